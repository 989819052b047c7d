use std::fmt;

/// A jet coordinate: the `order`-th x-derivative of `z`, optionally
/// differentiated once more in `t`.
///
/// `z` itself is order 0. Names are `z, z1, z2, ...` and `zt, z1t, z2t, ...`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub t: bool,
    pub order: u32,
}

impl JetVar {
    pub const fn x(order: u32) -> Self {
        JetVar { t: false, order }
    }

    pub const fn t(order: u32) -> Self {
        JetVar { t: true, order }
    }

    /// Parses a jet-variable name. Returns `None` when the name is not of the
    /// jet shape at all, `Some(Err(()))` when it looks like one but is malformed.
    pub fn from_name(name: &str) -> Option<Result<Self, ()>> {
        let rest = name.strip_prefix('z')?;
        if rest.is_empty() {
            return Some(Ok(JetVar::x(0)));
        }
        if !rest.chars().all(|c| c.is_ascii_digit() || c == 't') {
            return None;
        }
        let (digits, t) = match rest.strip_suffix('t') {
            Some(d) => (d, true),
            None => (rest, false),
        };
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Some(Err(()));
        }
        if digits.is_empty() {
            return Some(Ok(JetVar { t, order: 0 }));
        }
        if digits.starts_with('0') {
            return Some(Err(()));
        }
        match digits.parse::<u32>() {
            Ok(order) => Some(Ok(JetVar { t, order })),
            Err(_) => Some(Err(())),
        }
    }

    /// The coordinate reached by one more x-derivative.
    pub fn dx(self) -> Self {
        JetVar {
            t: self.t,
            order: self.order + 1,
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("z")?;
        if self.order > 0 {
            write!(f, "{}", self.order)?;
        }
        if self.t {
            f.write_str("t")?;
        }
        Ok(())
    }
}
