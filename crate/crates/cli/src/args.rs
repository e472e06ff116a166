use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qweyl", version, about = "Exact rewriting and verification for q-deformed Heisenberg algebras")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Plain key=value file with suite parameters; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the normal form of an expression.
    Normalize {
        #[arg(long)]
        algebra: Option<String>,
        expression: String,
    },
    /// Check a relation `lhs = rhs` by comparing normal forms.
    Check {
        #[arg(long)]
        algebra: Option<String>,
        relation: String,
    },
    /// List unresolved overlap ambiguities of a presentation.
    Confluence {
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        maxlen: Option<usize>,
    },
    /// Run a named verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Build a matrix representation and check its relations.
    Rep {
        #[arg(value_enum)]
        kind: RepKind,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        pi0: Option<f64>,
        #[arg(long)]
        exact: bool,
        /// Include the matrices in the JSON report.
        #[arg(long)]
        matrices: bool,
    },
    /// Validate an R-matrix data file.
    RmatrixValidate { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepKind {
    Oscillator,
    Qoscillator,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Corrected,
    Printed,
}

impl std::str::FromStr for VariantArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <VariantArg as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Series realization of the final q-Heisenberg algebra through order h^K.
    Qheis5Realization {
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Oscillator deforming map on a truncated Fock space.
    OscMap {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Momentum representation of the final q-Heisenberg algebra.
    MomentumRep {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        pi0: Option<f64>,
        #[arg(long)]
        exact: bool,
    },
    /// q-difference calculus identities on monomials.
    Qdiff {
        /// Exponent bound for one-variable sweeps.
        #[arg(long)]
        bound: Option<i32>,
        /// Exponent bound for three-variable sweeps.
        #[arg(long)]
        sweep: Option<i32>,
    },
    /// Almost-commutative coordinates and their relations.
    Remark1 {
        #[arg(long)]
        bound: Option<i32>,
    },
    /// Unsymmetric derivatives and their conjugates.
    Remark3 {
        #[arg(long)]
        bound: Option<i32>,
    },
    /// Orthogonal quantum plane with derivatives from an R-matrix file.
    Soq {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rmatrix: Option<PathBuf>,
    },
    /// Randomized inner derivations of the first Weyl algebra.
    InnerDerivations {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Overlap check of one catalog algebra, or of every confluent one with `all`.
    Confluence {
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        maxlen: Option<usize>,
    },
}
