use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::fail::Failure;

#[derive(Debug, Parser)]
#[command(name = "seqclass", version, about = "Sequence-class checks and trigonometric-series experiments")]
pub struct Cli {
    /// JSON file with default values for the flags below; flags given on
    /// the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Check,
    VerifyInclusions,
    Counterexample,
    Eval,
    Uniform,
    Sine,
    L1,
    Rate,
    Approx,
    Kernels,
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Membership of --pos in one class (--class) or all of them.
    Check(Params),
    /// Check every class and the inclusions between the verdicts.
    VerifyInclusions(Params),
    /// Reproduce the dyadic-block sequence that is NBVS but not GBVS.
    Counterexample(Params),
    /// Sup and L¹ norms of f - S_n on the grid.
    Eval(Params),
    /// Uniform-convergence criterion and decay of ‖f - S_n‖.
    Uniform(Params),
    /// Criterion and decay for the sine series with coefficients --pos.
    Sine(Params),
    /// L¹-convergence criterion and the L¹ decay pipeline.
    L1(Params),
    /// Match ‖f - S_n‖_L against a reference rate --psi.
    Rate(Params),
    /// Brackets for the best approximation E_n(f) and the Q_n window.
    Approx(Params),
    /// Kernel identities, kernel norm growth and the φ sup bound.
    Kernels(Params),
}

impl Command {
    pub fn split(self) -> (CommandKind, Params) {
        match self {
            Command::Check(p) => (CommandKind::Check, p),
            Command::VerifyInclusions(p) => (CommandKind::VerifyInclusions, p),
            Command::Counterexample(p) => (CommandKind::Counterexample, p),
            Command::Eval(p) => (CommandKind::Eval, p),
            Command::Uniform(p) => (CommandKind::Uniform, p),
            Command::Sine(p) => (CommandKind::Sine, p),
            Command::L1(p) => (CommandKind::L1, p),
            Command::Rate(p) => (CommandKind::Rate, p),
            Command::Approx(p) => (CommandKind::Approx, p),
            Command::Kernels(p) => (CommandKind::Kernels, p),
        }
    }
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Check => "check",
            CommandKind::VerifyInclusions => "verify-inclusions",
            CommandKind::Counterexample => "counterexample",
            CommandKind::Eval => "eval",
            CommandKind::Uniform => "uniform",
            CommandKind::Sine => "sine",
            CommandKind::L1 => "l1",
            CommandKind::Rate => "rate",
            CommandKind::Approx => "approx",
            CommandKind::Kernels => "kernels",
        }
    }
}

/// Experiment parameters. The config file uses the same names as the
/// flags (`{"pos": "power:p=2", "nmax": 64}`).
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Rule for c_k, k ≥ 1 (e.g. `power:p=2`).
    #[arg(long, visible_alias = "rule", value_name = "RULE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    /// Rule for c_{-k}, or `mirror:<re>[,<im>]`; defaults to `zero`.
    #[arg(long, value_name = "RULE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neg: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Largest n; the n list becomes 4, 8, …, nmax.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    /// Comma-separated n values, or `a..b` for the powers of two in [a, b].
    #[arg(long, value_name = "LIST")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nlist: Option<String>,
    /// Base grid points (before critical points are injected).
    #[arg(long, value_name = "POINTS")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Reference rate for `rate`.
    #[arg(long, value_name = "RULE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Class for `check`: ms, cqms, rbvs, gbvs, gbvs:<N0>, nbvs or all.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Part of `kernels` to run: identities, norms, phi or all.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    /// Largest kernel index for `kernels --check identities`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// Write curve data as CSV.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Cap on fitted constants (window C for `approx`).
    #[arg(long, value_name = "C")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_c: Option<f64>,
    /// Cap on |log-log trend slope|.
    #[arg(long, value_name = "SLOPE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_slope: Option<f64>,
    /// Record wall time in the report (makes reports differ between runs).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub timing: bool,
}

impl Params {
    /// Fills every unset field from `file`.
    pub fn or(self, file: Params) -> Params {
        Params {
            pos: self.pos.or(file.pos),
            neg: self.neg.or(file.neg),
            horizon: self.horizon.or(file.horizon),
            nmax: self.nmax.or(file.nmax),
            nlist: self.nlist.or(file.nlist),
            grid: self.grid.or(file.grid),
            psi: self.psi.or(file.psi),
            class: self.class.or(file.class),
            check: self.check.or(file.check),
            kmax: self.kmax.or(file.kmax),
            json: self.json.or(file.json),
            csv: self.csv.or(file.csv),
            threshold_c: self.threshold_c.or(file.threshold_c),
            threshold_slope: self.threshold_slope.or(file.threshold_slope),
            timing: self.timing || file.timing,
        }
    }
}

pub fn load_config(path: &Path) -> Result<Params, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// `4,8,16` or `8..128` (powers of two in the range).
pub fn parse_n_list(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = |why: &str| Failure::param(format!("n list `{spec}`: {why}"));
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| bad("bad lower end"))?;
        let hi: u64 = b.trim().parse().map_err(|_| bad("bad upper end"))?;
        return Ok((0..64).map(|j| 1u64 << j).filter(|&n| n >= lo && n <= hi).collect());
    }
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',').map(|t| t.trim().parse().map_err(|_| bad("expected integers"))).collect()
}
