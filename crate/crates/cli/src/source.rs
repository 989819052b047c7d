//! Where the coframe and equation of a command come from.

use std::path::{Path, PathBuf};

use clap::Args;
use pssforge::coframe::{Coframe, EquationSpec};
use pssforge::expr::parse_ratfn;
use pssforge::families::{catalog, construct, Branch, BranchSpec, BranchSpecJson, FamilyError, FamilyInstance, Sign};

use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct SourceArgs {
    /// Named catalog entry (see `catalog list`).
    #[arg(long, conflicts_with_all = ["branch", "spec", "coframe"])]
    pub catalog: Option<String>,
    /// Family branch id, e.g. T32-II or T35s-I.
    #[arg(long, conflicts_with_all = ["spec", "coframe"])]
    pub branch: Option<String>,
    /// Sign choice of the branch, `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub sign: String,
    /// delta = 1 (pseudospherical) or -1 (spherical).
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub delta: i8,
    /// Branch parameter value, `name=expr`; repeatable.
    #[arg(long = "param", value_name = "NAME=EXPR")]
    pub params: Vec<String>,
    /// Closed-form arbitrary function, `name=body`; repeatable.
    #[arg(long = "closed", value_name = "NAME=BODY")]
    pub closed: Vec<String>,
    /// Branch spec as a JSON file.
    #[arg(long, conflicts_with = "coframe")]
    pub spec: Option<PathBuf>,
    /// Coframe JSON file (needs --equation).
    #[arg(long, requires = "equation")]
    pub coframe: Option<PathBuf>,
    /// Equation JSON file.
    #[arg(long)]
    pub equation: Option<PathBuf>,
}

pub struct Loaded {
    pub name: String,
    pub coframe: Coframe,
    pub equation: EquationSpec,
    pub flags: Vec<&'static str>,
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn split_binding(s: &str) -> Result<(&str, &str), CliError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| CliError::usage(format!("expected NAME=VALUE, got `{s}`")))
}

fn family(e: FamilyError) -> CliError {
    CliError::usage(e.to_string())
}

fn from_instance(inst: FamilyInstance, name: String) -> Loaded {
    Loaded {
        name,
        coframe: inst.coframe,
        equation: inst.equation,
        flags: inst.flags.iter().map(|f| f.name()).collect(),
    }
}

impl SourceArgs {
    pub fn branch_spec(&self) -> Result<Option<BranchSpec>, CliError> {
        if let Some(path) = &self.spec {
            return BranchSpecJson::from_json(&read(path)?).map(Some).map_err(family);
        }
        let Some(id) = &self.branch else {
            return Ok(None);
        };
        let branch = Branch::from_id(id).map_err(family)?;
        let sign = Sign::parse(&self.sign).ok_or_else(|| CliError::usage(format!("sign must be + or -, got `{}`", self.sign)))?;
        let mut spec = BranchSpec::new(branch, sign, self.delta);
        for p in &self.params {
            let (k, v) = split_binding(p)?;
            spec = spec.param(k, parse_ratfn(v).map_err(|e| CliError::usage(format!("--param {k}: {e}")))?);
        }
        for c in &self.closed {
            let (k, v) = split_binding(c)?;
            spec = spec.closed(k, parse_ratfn(v).map_err(|e| CliError::usage(format!("--closed {k}: {e}")))?);
        }
        Ok(Some(spec))
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        if let Some(name) = &self.catalog {
            return Ok(from_instance(catalog(name).map_err(family)?, name.clone()));
        }
        if let Some(spec) = self.branch_spec()? {
            let name = format!("{} ({}, delta={})", spec.branch.id(), spec.sign.symbol(), spec.delta);
            return Ok(from_instance(construct(&spec).map_err(family)?, name));
        }
        if let (Some(c), Some(e)) = (&self.coframe, &self.equation) {
            let coframe = Coframe::from_json(&read(c)?).map_err(|err| CliError::usage(format!("{}: {err}", c.display())))?;
            let equation =
                EquationSpec::from_json(&read(e)?).map_err(|err| CliError::usage(format!("{}: {err}", e.display())))?;
            return Ok(Loaded {
                name: c.display().to_string(),
                coframe,
                equation,
                flags: Vec::new(),
            });
        }
        Err(CliError::usage(
            "give one of --catalog, --branch, --spec or --coframe with --equation",
        ))
    }
}
