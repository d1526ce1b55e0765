//! `treelight` command-line front end.
//!
//! Exit codes: 0 success, 1 a checked predicate failed, 2 usage or input
//! error, 3 numerical failure (diverged generation, ambiguous rank).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod angle;
mod commands;
mod output;

use angle::Angle;

#[derive(Parser)]
#[command(name = "treelight", version, about = "Tree-unitary circuits on Cayley trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tree-unitary gate by alternating projections.
    Gen(GenArgs),
    /// Check gate predicates; exits 1 if a requested predicate fails.
    Check(CheckArgs),
    /// Build a kicked-Ising gate.
    Kim(KimArgs),
    /// Light-cone correlators from channel products.
    Corr(CorrArgs),
    /// OTOC along a constant-direction light-cone path.
    Otoc(OtocArgs),
    /// Clifford entanglement growth against the closed-form curves.
    Entropy(EntropyArgs),
    /// Level-set intersections and four-point hyperbolicity of a graph.
    Geom(GeomArgs),
    /// Light-cone weight and average-OTOC bound over random instances.
    Bound(BoundArgs),
}

/// Operator-flow direction `i:j` between 1-based legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Direction(pub usize, pub usize);

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("direction '{s}' should look like 2:1"))?;
        let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad leg in '{s}'"));
        Ok(Direction(p(a)?, p(b)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Kim,
    TreeUnitary,
    Haar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FirstColor {
    A,
    B,
}

impl From<FirstColor> for treelight::tree::Color {
    fn from(c: FirstColor) -> Self {
        match c {
            FirstColor::A => treelight::tree::Color::A,
            FirstColor::B => treelight::tree::Color::B,
        }
    }
}

/// Where the gate comes from: a JSON file or a named model.
#[derive(Args, Debug, Serialize)]
pub struct GateArgs {
    /// Gate JSON file (overrides --model).
    #[arg(long)]
    pub gate: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "kim")]
    pub model: Model,
    /// Cluster size.
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    /// Ising coupling (kim).
    #[arg(long = "J", default_value = "pi/4")]
    pub j: Angle,
    /// Transverse kick (kim).
    #[arg(long, default_value = "pi/4")]
    pub b: Angle,
    /// Longitudinal field, one value or one per leg (kim).
    #[arg(long, num_args = 1.., default_values = ["0"])]
    pub h: Vec<Angle>,
    /// Required maximum-velocity directions (tree-unitary).
    #[arg(long = "max-velocity")]
    pub max_velocity: Vec<Direction>,
    /// Seed of the gate generator (tree-unitary, haar).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-velocity")]
    pub max_velocity: Vec<Direction>,
    #[arg(long = "max-iter", default_value_t = 5000)]
    pub max_iter: usize,
    /// Convergence threshold on the largest condition residual.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Gate JSON output.
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// Convergence trace CSV (default: <out>.trace.csv).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArgs {
    /// Gate JSON file.
    pub gate: PathBuf,
    /// Also require these maximum-velocity directions.
    #[arg(long = "max-velocity")]
    pub max_velocity: Vec<Direction>,
    /// Also require the perfect-tensor property.
    #[arg(long)]
    pub perfect: bool,
    /// Also require the gate to be Clifford (qubits).
    #[arg(long)]
    pub clifford: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Report JSON (printed to stdout when absent).
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct KimArgs {
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    #[arg(long = "J", default_value = "pi/4")]
    pub j: Angle,
    #[arg(long, default_value = "pi/4")]
    pub b: Angle,
    /// One value or one per leg.
    #[arg(long, num_args = 1.., default_values = ["0"])]
    pub h: Vec<Angle>,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CorrArgs {
    #[command(flatten)]
    pub gate: GateArgs,
    /// Depth of the unrooted tree.
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub origin: usize,
    /// Target vertices (default: every vertex at --distance from the origin).
    #[arg(long = "target")]
    pub targets: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub distance: usize,
    #[arg(long, value_enum, default_value = "a")]
    pub first: FirstColor,
    /// Qubit operator label (x, y, z, xz, ... or ax,ay,az); default: every basis element.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Compare the final value of each path against the dense oracle.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Dense single-site profile output (site_id, depth, branch_label, t, log10_abs).
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    /// Steps of the dense profile.
    #[arg(long = "heatmap-steps", default_value_t = 2)]
    pub heatmap_steps: usize,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct OtocArgs {
    #[command(flatten)]
    pub gate: GateArgs,
    /// Incoming leg.
    #[arg(long, default_value_t = 2)]
    pub e: usize,
    /// Outgoing leg.
    #[arg(long = "e-tilde", default_value_t = 3)]
    pub e_tilde: usize,
    #[arg(long, default_value_t = 60)]
    pub steps: usize,
    #[arg(long, default_value = "xz")]
    pub alpha: String,
    #[arg(long, default_value = "z")]
    pub beta: String,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeArg {
    Unrooted,
    Rooted,
    TwoSite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftArg {
    Aligned,
    Shifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyModel {
    Kim,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[arg(long, value_enum, default_value = "kim")]
    pub model: EntropyModel,
    /// Clifford gate JSON file (overrides the kicked-Ising parameters).
    #[arg(long)]
    pub gate: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub z: usize,
    /// Region radius.
    #[arg(long, default_value_t = 7)]
    pub r: usize,
    #[arg(long, value_enum, default_value = "unrooted")]
    pub tree: TreeArg,
    #[arg(long, value_enum, default_value = "aligned")]
    pub shift: ShiftArg,
    /// Last time step (default r + 2).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "J", default_value = "pi/4")]
    pub j: Angle,
    #[arg(long, default_value = "pi/4")]
    pub b: Angle,
    #[arg(long, num_args = 1.., default_values = ["pi/2"])]
    pub h: Vec<Angle>,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GeomArgs {
    /// grid:AxB[xC..], plaquette:N, tree:Z:DEPTH, tree-gates:Z:DEPTH,
    /// patch:P:Q:LAYERS or file:PATH (edge list).
    #[arg(long)]
    pub graph: String,
    /// First vertex of the level-set pair.
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    /// Second vertex (default: the vertex farthest from i, lowest id).
    #[arg(long)]
    pub j: Option<usize>,
    /// Compute the four-point δ.
    #[arg(long)]
    pub delta: bool,
    /// Largest graph for the exact δ.
    #[arg(long, default_value_t = treelight::hyperbolicity::DEFAULT_DELTA_CAP)]
    pub cap: usize,
    /// Estimate δ from this many random quadruples instead.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Check every pair's intersection diameters against 2δ.
    #[arg(long = "check-pairs")]
    pub check_pairs: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// (s, |I|) CSV; the JSON report goes to <out>.json.
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum, default_value = "tree-unitary")]
    pub model: Model,
    /// Distinct gates drawn for the instances.
    #[arg(long, default_value_t = 10)]
    pub gates: usize,
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Largest t drawn.
    #[arg(long, default_value_t = 2)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance on the bound residual and the two-way Ō gap.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

pub enum Outcome {
    Ok,
    PredicateFailed,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use treelight::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Diverged { .. } | E::AmbiguousRank { .. } | E::DegeneratePolar(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Check(a) => commands::check(a),
        Command::Kim(a) => commands::kim(a),
        Command::Corr(a) => commands::corr(a),
        Command::Otoc(a) => commands::otoc(a),
        Command::Entropy(a) => commands::entropy(a),
        Command::Geom(a) => commands::geom(a),
        Command::Bound(a) => commands::bound(a),
    };
    match res {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::PredicateFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
