use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qbeats", version, about = "Collective quantum beats of two V-type emitters in a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate the poles of one symmetry sector and write their coefficients.
    Poles(RunArgs),
    /// Evolve the amplitudes with the selected backend(s).
    Dynamics(DynamicsArgs),
    /// Repeat a scenario across one parameter axis.
    Sweep(SweepArgs),
    /// Quick internal consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Reference scenario: markovian_beat, markovian_half, nonmarkovian_7_5, nonmarkovian_8.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Name of the output subdirectory.
    #[arg(long)]
    pub name: Option<String>,
    /// sym or antisym.
    #[arg(long)]
    pub sector: Option<String>,
    #[arg(long, value_name = "RAD", allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, value_name = "RAD", allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, value_name = "VAL")]
    pub distance: Option<f64>,
    /// beat, lam21 or coh.
    #[arg(long)]
    pub distance_unit: Option<String>,
    /// Keep the separation as given instead of rounding it to a multiple of lambda21.
    #[arg(long)]
    pub no_snap: bool,
    /// modes, dde or both.
    #[arg(long)]
    pub backend: Option<String>,
    /// markovian, nonmarkovian or custom.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub re_max: Option<f64>,
    #[arg(long)]
    pub im_max: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Worker threads (default: one per core).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output directory (default: out/<name>).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write detector intensities.
    #[arg(long)]
    pub intensity: bool,
    /// Also write the isolated-emitter reference (amplitude 1/sqrt 2 in level 2).
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// distance, theta or omega23.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

impl RunArgs {
    /// Flags that were given, as config entries.
    pub fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        put("scenario", self.scenario.clone());
        put("name", self.name.clone());
        put("sector", self.sector.clone());
        put("theta", self.theta.map(|v| v.to_string()));
        put("phi", self.phi.map(|v| v.to_string()));
        put("distance", self.distance.map(|v| v.to_string()));
        put("distance_unit", self.distance_unit.clone());
        put("snap", self.no_snap.then(|| "false".to_string()));
        put("backend", self.backend.clone());
        put("window", self.window.clone());
        put("re_max", self.re_max.map(|v| v.to_string()));
        put("im_max", self.im_max.map(|v| v.to_string()));
        put("tmax", self.tmax.map(|v| v.to_string()));
        put("dt", self.dt.map(|v| v.to_string()));
        put("jobs", self.jobs.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        out
    }
}
