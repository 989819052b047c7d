mod commands;
mod selftest;
mod source;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use source::SourceArgs;

/// Exit status 0 on pass, 1 when a check fails, 2 on usage or IO errors.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Latex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    /// Infinity unless the coframe is polynomial in the parameter.
    Auto,
    Zero,
    Infinity,
}

#[derive(Parser, Debug)]
#[command(name = "pssforge", version, about = "Check coframes of pseudospherical and spherical equations")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structure equations (and optionally the branch conditions).
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Also run the class-specific list of coefficient conditions.
        #[arg(long)]
        lemma: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List or show the named equations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Closed-form check and series of conserved densities.
    Conservation {
        #[command(flatten)]
        source: SourceArgs,
        /// Expansion parameter.
        #[arg(long = "expand-in", default_value = "eta")]
        expand_in: String,
        #[arg(long, value_enum, default_value_t = CenterArg::Auto)]
        center: CenterArg,
        /// Number of pairs, 1 to 6.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Remove x-exact parts from each density.
        #[arg(long)]
        strip: bool,
        /// Pull back along z -> z + SHIFT, x -> x - SPEED t first.
        #[arg(long, requires = "speed")]
        shift: Option<String>,
        #[arg(long, requires = "shift")]
        speed: Option<String>,
        /// Allow delta = -1 in the closed-form check.
        #[arg(long)]
        experimental_ss: bool,
    },
    /// Gaussian curvature of the induced metric along an exact solution.
    Curvature {
        #[command(flatten)]
        source: SourceArgs,
        /// Solution preset: kink, kdv-soliton or zero.
        #[arg(long)]
        solution: String,
        #[arg(long, default_value_t = 400)]
        nx: usize,
        #[arg(long, default_value_t = 400)]
        nt: usize,
        /// Box `x0,x1,t0,t1`; defaults to the preset's box.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        r#box: Option<Vec<f64>>,
        /// Numeric value of a parameter, `name=value`; unset ones default to 1.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// Largest accepted max |K + delta|.
        #[arg(long, default_value_t = pssforge::numcheck::CURVATURE_TOL)]
        tol: f64,
    },
    /// Render the coframe and equation.
    Export {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = Format::Latex)]
        format: Format,
    },
    /// Built-in consistency run with randomized kernel checks.
    Selftest {
        /// Seed; PSSFORGE_SEED is used when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
    Show {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    match cli.command {
        Command::Verify { source, lemma, format } => commands::verify(&source, lemma, format),
        Command::Catalog { action } => match action {
            CatalogAction::List => commands::catalog_list(),
            CatalogAction::Show { name, format } => commands::catalog_show(&name, format),
        },
        Command::Conservation {
            source,
            expand_in,
            center,
            order,
            strip,
            shift,
            speed,
            experimental_ss,
        } => commands::conservation(&commands::ConservationArgs {
            source: &source,
            param: &expand_in,
            center,
            order,
            strip,
            boost: shift.zip(speed),
            experimental_ss,
        }),
        Command::Curvature {
            source,
            solution,
            nx,
            nt,
            r#box,
            set,
            tol,
        } => commands::curvature(&source, &solution, nx, nt, r#box.as_deref(), &set, tol),
        Command::Export { source, format } => commands::export(&source, format),
        Command::Selftest { seed, cases } => selftest::run(seed, cases),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok((text, pass)) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    let mut out = std::io::stdout().lock();
                    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
