use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use qweyl_core::catalog::CatalogError;
use qweyl_core::coeff::Scalar;
use qweyl_core::fock::FockError;
use qweyl_core::freealg::{AlgebraError, Element, DEFAULT_STEP_LIMIT};
use qweyl_core::qdiff::QdiffError;
use qweyl_core::soq::SoqError;
use qweyl_core::syntax::{parse_element, parse_relation, print_element, SyntaxError};
use qweyl_core::weyl::{Variant, WeylError};
use thiserror::Error;

pub mod args;
pub mod config;
pub mod report;
pub mod suites;

use args::{Cli, Command, Format, RepKind, Suite, VariantArg};
use config::{load_config, Params};
pub use report::{Item, Report, Summary};

/// The JSON schema every `--format json` report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Qdiff(#[from] QdiffError),
    #[error(transparent)]
    Soq(#[from] SoqError),
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse an expression over the generators of a catalog algebra.
pub fn parse_expression(algebra: &str, text: &str) -> Result<Element<Scalar>, CliError> {
    let p = qweyl_core::catalog::presentation(algebra)?;
    Ok(parse_element(&p, text)?)
}

/// Print an element so that [`parse_expression`] reads it back unchanged.
pub fn print_expression(algebra: &str, e: &Element<Scalar>) -> Result<String, CliError> {
    let p = qweyl_core::catalog::presentation(algebra)?;
    Ok(print_element(&p, e))
}

/// Rewrite step bound, overridable through `QWEYL_STEP_LIMIT`.
pub fn step_limit() -> Result<usize, CliError> {
    match std::env::var("QWEYL_STEP_LIMIT") {
        Err(_) => Ok(DEFAULT_STEP_LIMIT),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("QWEYL_STEP_LIMIT={v} is not a positive integer"))),
        },
    }
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Corrected => Variant::Corrected,
        VariantArg::Printed => Variant::Printed,
    }
}

fn execute(command: Command, params: &Params) -> Result<Report, CliError> {
    let limit = step_limit()?;
    let report = match command {
        Command::Normalize { algebra, expression } => {
            let key: String = params.required("algebra", algebra)?;
            params.finish()?;
            let p = suites::algebra(&key, limit)?;
            let nf = p.normal_form(&parse_element(&p, &expression)?)?;
            let mut r = Report::new("normalize", None).input("algebra", &key).input("expression", &expression);
            r.push(Item::new("normal form", true, p.render(&nf)));
            r
        }
        Command::Check { algebra, relation } => {
            let key: String = params.required("algebra", algebra)?;
            params.finish()?;
            let p = suites::algebra(&key, limit)?;
            let (lhs, rhs) = parse_relation(&p, &relation)?;
            let res = p.normal_form(&lhs.sub(&rhs))?;
            let mut r = Report::new("check", None).input("algebra", &key).input("relation", &relation);
            r.push(Item::new(relation.clone(), res.is_zero(), p.render(&res)));
            r
        }
        Command::Confluence { algebra, maxlen } => {
            let key: String = params.required("algebra", algebra)?;
            let maxlen = params.or("maxlen", maxlen, 6)?;
            params.finish()?;
            suites::confluence(&key, maxlen, limit, "confluence")?
        }
        Command::Verify { suite } => verify(suite, params, limit)?,
        Command::Rep { kind, dim, levels, q, pi0, exact, matrices } => match kind {
            RepKind::Oscillator | RepKind::Qoscillator => {
                let dim = params.or("dim", dim, 8)?;
                let q = if kind == RepKind::Qoscillator { params.or("q", q, 1.2)? } else { 1.0 };
                params.finish()?;
                let name = if kind == RepKind::Oscillator { "oscillator" } else { "qoscillator" };
                suites::fock_rep(name, dim, q, matrices)?
            }
            RepKind::Momentum => {
                let levels = params.or("levels", levels, 8)?;
                let q = params.or("q", q, 1.2)?;
                let pi0 = params.or("pi0", pi0, 1.0)?;
                let exact = params.flag("exact", exact)?;
                params.finish()?;
                suites::momentum("rep", levels, q, pi0, exact, matrices)?
            }
        },
        Command::RmatrixValidate { file } => {
            params.finish()?;
            suites::rmatrix_validate(&file)?
        }
    };
    Ok(report)
}

fn verify(suite: Suite, params: &Params, limit: usize) -> Result<Report, CliError> {
    match suite {
        Suite::Qheis5Realization { order, variant: v } => {
            let order = params.or("order", order, 6)?;
            let v = params.or("variant", v, VariantArg::Corrected)?;
            params.finish()?;
            suites::qheis5_realization(order, variant(v))
        }
        Suite::OscMap { dim, q } => {
            let dim = params.or("dim", dim, 64)?;
            let q = params.or("q", q, 1.2)?;
            params.finish()?;
            suites::osc_map(dim, q)
        }
        Suite::MomentumRep { levels, q, pi0, exact } => {
            let levels = params.or("levels", levels, 8)?;
            let q = params.or("q", q, 1.2)?;
            let pi0 = params.or("pi0", pi0, 1.0)?;
            let exact = params.flag("exact", exact)?;
            params.finish()?;
            suites::momentum("verify", levels, q, pi0, exact, false)
        }
        Suite::Qdiff { bound, sweep } => {
            let bound = params.or("bound", bound, 20)?;
            let sweep = params.or("sweep", sweep, 6)?;
            params.finish()?;
            suites::qdiff(bound, sweep)
        }
        Suite::Remark1 { bound } => {
            let bound = params.or("bound", bound, 6)?;
            params.finish()?;
            suites::remark1(bound)
        }
        Suite::Remark3 { bound } => {
            let bound = params.or("bound", bound, 6)?;
            params.finish()?;
            suites::remark3(bound)
        }
        Suite::Soq { n, rmatrix } => {
            let n = params.or("n", n, 3)?;
            let path: PathBuf = params.required("rmatrix", rmatrix)?;
            params.finish()?;
            suites::soq(n, &path, limit)
        }
        Suite::InnerDerivations { trials, seed } => {
            let trials = params.or("trials", trials, 20)?;
            let seed = params.or("seed", seed, 0)?;
            params.finish()?;
            suites::inner_derivations(trials, seed)
        }
        Suite::Confluence { algebra, maxlen } => {
            let key: String = params.required("algebra", algebra)?;
            let maxlen = params.or("maxlen", maxlen, 6)?;
            params.finish()?;
            suites::confluence(&key, maxlen, limit, "verify")
        }
    }
}

fn usage(message: String) -> Outcome {
    Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: message }
}

/// Run the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_PASS, stdout: text, stderr: String::new() }
                }
                _ => usage(text),
            };
        }
    };
    let config = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => return usage(format!("error: {e}\n")),
        },
        None => BTreeMap::new(),
    };
    let params = Params::new(&config);
    let format = match params.or("format", cli.format, Format::Text) {
        Ok(f) => f,
        Err(e) => return usage(format!("error: {e}\n")),
    };
    match execute(cli.command, &params) {
        Ok(report) => {
            let stdout = match format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_string(),
            };
            Outcome { code: report.exit_code(), stdout, stderr: String::new() }
        }
        Err(e) => usage(format!("error: {e}\n")),
    }
}
