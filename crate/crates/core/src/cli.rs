//! Batch front-end: one scenario, one method, one power per process.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::baselines::{oma_timeshare, random_search_region, tdma_region, REFINE_ROUNDS};
use crate::error::{Error, Result};
use crate::io::{load_channels, write_points, RunMeta};
use crate::multicast::CASE_SLACK;
use crate::region::{RateRegion, HULL_TOL};
use crate::search::SolverOptions;
use crate::split::{sweep_region, AGREEMENT_TOL, ZERO_BUDGET};
use crate::types::{Scenario, ScenarioKind};
use crate::wsr::{wsr_frontier, WsrConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Power-splitting sweep over the alpha grid.
    Ps,
    /// Weighted-sum-rate frontier (no common message).
    Wsr,
    /// Equal slots, one per message, each at full power.
    Tdma,
    /// Time sharing between the two single-user points (no common message).
    Oma,
    /// Monte-Carlo covariance search.
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Ps => "ps",
            Method::Wsr => "wsr",
            Method::Tdma => "tdma",
            Method::Oma => "oma",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

/// Rate regions for the two-user MIMO broadcast channel with common,
/// private and confidential messages.
///
/// TDMA slots carry the full power each. Writes the Pareto points of the
/// region to --out and a key=value sidecar to <out>.meta.
#[derive(Debug, Clone, Parser)]
#[command(name = "secnoma", version)]
pub struct Config {
    /// Channel file: "n1 n2 nt", then n1 rows of h1 and n2 rows of h2.
    #[arg(long)]
    pub channels: PathBuf,
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: ScenarioKind,
    #[arg(long, value_enum, default_value = "on")]
    pub common: Switch,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Total transmit power.
    #[arg(long)]
    pub power: f64,
    /// Power-split grid step.
    #[arg(long, default_value_t = 0.05)]
    pub eps1: f64,
    /// Weight grid step.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Oracle sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Config {
    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.scenario, self.common == Switch::On)
    }

    pub fn meta_path(&self) -> PathBuf {
        let mut s = self.out.clone().into_os_string();
        s.push(".meta");
        s.into()
    }

    /// Rejects flag combinations that have no meaning.
    pub fn validate(&self) -> Result<()> {
        let common = self.common == Switch::On;
        match self.method {
            Method::Wsr if common => {
                return Err(Error::Usage(
                    "the weighted-sum-rate method only covers the two-message case; use --common off".into(),
                ))
            }
            Method::Oma if common => {
                return Err(Error::Usage("the time-sharing baseline is defined with --common off".into()))
            }
            _ => {}
        }
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::Usage(format!("--power must be finite and nonnegative, got {}", self.power)));
        }
        if self.method == Method::Ps && !(self.eps1 > 0.0 && self.eps1 <= 0.5) {
            return Err(Error::Usage(format!("--eps1 must lie in (0, 0.5], got {}", self.eps1)));
        }
        if self.method == Method::Wsr && !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::Usage(format!("--sigma must lie in (0, 1], got {}", self.sigma)));
        }
        if self.method == Method::Oracle && self.samples == 0 {
            return Err(Error::Usage("--samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub region: RateRegion,
    pub meta: RunMeta,
}

/// Loads the channels, runs the method and writes the CSV and sidecar.
pub fn run(cfg: &Config) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let ch = load_channels(&cfg.channels)?;
    let scenario = cfg.scenario();
    let p = cfg.power;
    let opts = SolverOptions::with_seed(cfg.seed);
    let mut converged = true;
    let region = match cfg.method {
        Method::Ps => {
            let sweep = sweep_region(&ch, scenario, p, cfg.eps1, &opts)?;
            converged = sweep.converged;
            sweep.region
        }
        Method::Wsr => wsr_frontier(&ch, scenario, p, cfg.sigma)?.0,
        Method::Tdma => tdma_region(&ch, scenario, p, &opts)?,
        Method::Oma => oma_timeshare(&ch, scenario, p, &opts)?,
        Method::Oracle => random_search_region(&ch, scenario, p, cfg.samples, cfg.seed)?,
    };
    write_points(&cfg.out, &region.points)?;

    let mut meta = RunMeta::default();
    meta.push("version", env!("CARGO_PKG_VERSION"));
    meta.push("channels", cfg.channels.display());
    meta.push("n1", ch.n1());
    meta.push("n2", ch.n2());
    meta.push("nt", ch.nt());
    meta.push("scenario", scenario.kind);
    meta.push("common", if scenario.common_enabled { "on" } else { "off" });
    meta.push("method", cfg.method.name());
    meta.push("power", p);
    meta.push("seed", cfg.seed);
    match cfg.method {
        Method::Ps => {
            meta.push("eps1", cfg.eps1);
            meta.push("bfgs_max_iters", opts.max_iters);
            meta.push("bfgs_starts", opts.n_starts);
            meta.push("bfgs_f_tol", opts.f_tol);
            meta.push("bfgs_grad_tol", opts.grad_tol);
            meta.push("fd_step", opts.fd_step);
            meta.push("zero_budget", ZERO_BUDGET);
            meta.push("agreement_tol", AGREEMENT_TOL);
            meta.push("multicast_case_slack", CASE_SLACK);
        }
        Method::Wsr => {
            let w = WsrConfig::new(1.0, 0.0)?;
            meta.push("sigma", cfg.sigma);
            meta.push("lambda_min", w.lambda_min);
            meta.push("lambda_max", "10*max(w1,w2)");
            meta.push("eps2", w.eps2);
            meta.push("eps3", w.eps3);
            meta.push("max_inner", w.max_inner);
        }
        Method::Tdma => meta.push("tdma_slot_power", "full"),
        Method::Oma => {}
        Method::Oracle => {
            meta.push("samples", cfg.samples);
            meta.push("refine_rounds", REFINE_ROUNDS);
        }
    }
    meta.push("hull_tol", HULL_TOL);
    meta.push("points", region.points.len());
    meta.push("converged", converged);
    meta.push("wall_time_s", format!("{:.3}", started.elapsed().as_secs_f64()));
    std::fs::write(cfg.meta_path(), meta.render())?;
    Ok(RunReport { region, meta })
}

/// Process entry: 0 on success, 2 on usage errors, 1 on runtime failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match Config::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cfg) {
        Ok(_) => 0,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
