use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmarkov::qubit::MAX_QUBITS;
use qmarkov::HalfInt;

pub const MAX_STEPS: usize = 100_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "qmarkov",
    version,
    about = "Markov chains generated by alternating quantum measurements",
    after_help = concat!(
        "Random numbers: ", "xoshiro256++ seeded through splitmix64, uniforms from the top 53 bits.\n",
        "Exit codes: 0 success, 2 usage or input error, 3 convergence failure, 4 verification failure."
    )
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format. JSON is the canonical machine format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for every random draw of the run.
    #[arg(long, global = true, env = "QMARKOV_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transition matrix |d^s_{ji}(beta)|^2 of the spin chain.
    SpinMatrix {
        #[arg(long)]
        s: HalfInt,
        #[command(flatten)]
        beta: Beta,
    },
    /// Transition matrix of the N-qubit register chain.
    QubitMatrix {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_QUBITS as i64))]
        n: u32,
        #[command(flatten)]
        beta: Beta,
    },
    /// Simulate measurement trajectories and compare them with the analytic matrix.
    Simulate(SimulateArgs),
    /// Check the register formula against enumeration over a grid of N and beta.
    Verify(VerifyArgs),
    /// Stationary distribution by power iteration.
    Stationary(StationaryArgs),
    /// Bits from repeated spin-1/2 measurements at beta = pi/2.
    CoinToss {
        #[arg(long, default_value_t = 1000, value_parser = steps_in_range)]
        count: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
#[group(required = true, multiple = false)]
pub struct Beta {
    /// Angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Angle as a multiple of pi.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_pi: Option<f64>,
}

impl Beta {
    pub fn radians(&self) -> f64 {
        match (self.beta, self.beta_pi) {
            (Some(b), _) => b,
            (None, Some(x)) => x * PI,
            (None, None) => unreachable!("clap requires one of the angle flags"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Spin,
    Qubit,
    MatrixFile,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spin => "spin",
            Kind::Qubit => "qubit",
            Kind::MatrixFile => "matrix-file",
        }
    }
}

/// Where a chain comes from: a spin, a register, or a matrix file.
#[derive(Args, Debug, Clone)]
pub struct Source {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, required_if_eq("kind", "spin"))]
    pub s: Option<HalfInt>,
    #[arg(long, required_if_eq("kind", "qubit"), value_parser = clap::value_parser!(u32).range(1..=MAX_QUBITS as i64))]
    pub n: Option<u32>,
    /// Matrix in JSON or CSV form.
    #[arg(long, required_if_eq("kind", "matrix-file"))]
    pub file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "beta")]
    pub beta_pi: Option<f64>,
}

impl Source {
    pub fn beta(&self) -> Option<f64> {
        self.beta.or(self.beta_pi.map(|x| x * PI))
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 1000, value_parser = steps_in_range)]
    pub steps: usize,
    /// Independent trajectories, each on its own stream of the seed.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4096))]
    pub trajectories: u64,
    /// Starting outcome label; defaults to the first label.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    /// Write the trajectory file here (suffixed `.K` when several are requested).
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Per-row TV threshold used when a row is too sparse for chi-square.
    #[arg(long, default_value_t = 0.02)]
    pub tv_limit: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = qmarkov::verify::DEFAULT_N_MAX,
          value_parser = clap::value_parser!(u32).range(1..=qmarkov::qubit::MAX_BRUTE_FORCE_QUBITS as i64))]
    pub n_max: u32,
    /// Comma-separated angles in radians.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub betas: Vec<f64>,
    /// Offset one formula entry before checking, as N:J:J'=DELTA or N:J:J'=DELTA@BETA.
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub perturb: Option<String>,
}

#[derive(Args, Debug)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
}

fn steps_in_range(text: &str) -> Result<usize, String> {
    let value: usize = text.parse().map_err(|e| format!("{e}"))?;
    if value > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} allowed"));
    }
    Ok(value)
}
