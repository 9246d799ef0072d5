use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "ee",
    version,
    about = "Ground-state entanglement entropies of harmonic lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy of one region.
    Entropy(Params),
    /// Belt entropies over a sweep of N or L, with a log fit.
    Belt(Params),
    /// Rectangle entropy against the crossed-belt bounds (2D).
    RectBounds(Params),
    /// Strong subadditivity for two regions.
    Ssa(Params),
    /// Geometric factor of a closed Bose surface.
    Gamma(Params),
    /// Per-chain entropies of a belt.
    Profile(Params),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dense,
    Chains,
    Both,
}

/// Experiment parameters. A `--config` JSON file uses the same keys as the
/// long flags; flags given on the command line take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Dispersion: ebl | closed:alpha=A,beta=B | point | gapped:m=M | custom:PATH
    #[arg(long)]
    pub disp: Option<String>,
    /// Spatial dimension (1-3).
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Linear lattice size.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Belt widths, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L")]
    pub l: Option<Vec<usize>>,
    /// Belt width as a fraction of N, for N sweeps.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Lattice sizes to sweep, comma separated.
    #[arg(long = "sweep-N", value_delimiter = ',')]
    #[serde(rename = "sweep-N")]
    pub sweep_n: Option<Vec<usize>>,
    /// Region literal: belt:AXIS,OFFSET,L | rect:X0,Y0,LX,LY | disk:CX,CY,R | mask:PATH
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<String>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<String>,
    /// Rectangle extents for rect-bounds (default N/2).
    #[arg(long)]
    pub lx: Option<usize>,
    #[arg(long)]
    pub ly: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: EE_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with default parameters.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Write 0 in the seconds column so reruns are byte-identical.
    #[arg(long)]
    #[serde(default, rename = "no-timing")]
    pub no_timing: bool,
}

impl Params {
    /// Fills every unset field from `base`.
    pub fn or(self, base: Params) -> Params {
        Params {
            disp: self.disp.or(base.disp),
            d: self.d.or(base.d),
            n: self.n.or(base.n),
            l: self.l.or(base.l),
            ratio: self.ratio.or(base.ratio),
            sweep_n: self.sweep_n.or(base.sweep_n),
            region: self.region.or(base.region),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            lx: self.lx.or(base.lx),
            ly: self.ly.or(base.ly),
            method: self.method.or(base.method),
            out: self.out.or(base.out),
            threads: self.threads.or(base.threads),
            config: self.config,
            no_timing: self.no_timing || base.no_timing,
        }
    }

    /// Merges the `--config` file, if any, under the command-line values.
    pub fn resolve(self) -> Result<Params, String> {
        match self.config.clone() {
            None => Ok(self),
            Some(path) => Ok(self.or(load_config(&path)?)),
        }
    }
}

pub fn load_config(path: &Path) -> Result<Params, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("--config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("--config {}: {e}", path.display()))
}

#[derive(Debug, Clone, Default, Args)]
pub struct SelftestArgs {
    /// Only these criteria, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
    /// Writes PREFIX.json with every report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}
