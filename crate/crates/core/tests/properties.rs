//! Randomized algebraic identities of the jet-space kernel.

use proptest::prelude::*;

use pssforge::expr::{derive, parse_ratfn, RatFn, TotalDt, TotalDx};

const PIECES: [&str; 9] = ["z", "z1", "z2", "z3", "sin(z)", "cos(z1)", "exp(z)", "eta", "h(z)"];

fn term() -> impl Strategy<Value = String> {
    (-5i64..=5, 1i64..=3, prop::collection::vec((0..PIECES.len(), 1u32..=2), 0..=2)).prop_map(|(n, d, fs)| {
        let mut t = format!("({n}/{d})");
        for (i, e) in fs {
            t.push_str(&format!("*{}^{e}", PIECES[i]));
        }
        t
    })
}

fn expr() -> impl Strategy<Value = RatFn> {
    (prop::collection::vec(term(), 1..=3), prop::option::of((1i64..=3, 0..PIECES.len()))).prop_map(|(ts, den)| {
        let num = ts.join(" + ");
        let text = match den {
            Some((c, i)) => format!("({num})/({c} + {}^2)", PIECES[i]),
            None => num,
        };
        parse_ratfn(&text).unwrap()
    })
}

const DX: TotalDx = TotalDx { max_order: 12 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leibniz(f in expr(), g in expr()) {
        let lhs = derive(&(&f * &g), &DX).unwrap();
        let rhs = &(&derive(&f, &DX).unwrap() * &g) + &(&f * &derive(&g, &DX).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn total_derivatives_commute(f in expr()) {
        let a = derive(&derive(&f, &TotalDt).unwrap(), &DX).unwrap();
        let b = derive(&derive(&f, &DX).unwrap(), &TotalDt).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn print_parse_round_trip(f in expr()) {
        prop_assert_eq!(parse_ratfn(&f.to_string()).unwrap(), f);
    }
}
