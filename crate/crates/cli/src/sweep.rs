use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qer_core::codes::Code;
use qer_core::recovery::{damping_recovery, Method};
use qer_core::sdp::SolverOptions;
use qer_core::Error;

use crate::config::{CliError, SweepConfig};

/// One grid point. Columns for recoveries that were not requested, or that
/// failed, are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub f_optimal: Option<f64>,
    pub f_qec: Option<f64>,
    pub f_none: Option<f64>,
    /// Duality gap of the optimal solve.
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

fn evaluate(code: &Code, gamma: f64, cfg: &SweepConfig) -> SweepRecord {
    let start = Instant::now();
    let opts = SolverOptions::with_tol(cfg.tol);
    let mut rec = SweepRecord {
        gamma,
        f_optimal: None,
        f_qec: None,
        f_none: None,
        gap: None,
        iterations: None,
        wall_time: 0.0,
        error: None,
    };
    let mut errors = Vec::new();
    for &m in &cfg.recoveries {
        match damping_recovery(code, gamma, m, &opts) {
            Ok(r) => {
                match m {
                    Method::Optimal => rec.f_optimal = Some(r.fidelity),
                    Method::Qec => rec.f_qec = Some(r.fidelity),
                    Method::None => rec.f_none = Some(r.fidelity),
                    Method::DecodeOnly => {}
                }
                if let Some(c) = r.certificate {
                    rec.gap = Some(c.gap);
                    rec.iterations = Some(c.iterations);
                }
            }
            Err(Error::NotConverged { best }) => {
                rec.gap = Some(best.gap);
                rec.iterations = Some(best.iterations);
                errors.push(format!("{m}: no convergence after {} iterations (gap {:.3e})", best.iterations, best.gap));
            }
            Err(e) => errors.push(format!("{m}: {e}")),
        }
    }
    if !errors.is_empty() {
        let msg = errors.join("; ");
        warn!("gamma = {gamma}: {msg}");
        rec.error = Some(msg);
    }
    rec.wall_time = start.elapsed().as_secs_f64();
    info!("gamma = {gamma:.6} done in {:.2}s", rec.wall_time);
    rec
}

/// Evaluates every grid point, in parallel when `cfg.jobs > 1`. Records come
/// back ordered by γ; per-point failures are recorded in the record.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CliError> {
    cfg.validate()?;
    let code = cfg.code.load()?;
    if cfg.recoveries.contains(&Method::Qec) && code.stabilizer.is_none() {
        return Err(CliError::Config(format!(
            "code {} has no stabilizer description, so qec recovery is unavailable",
            cfg.code
        )));
    }
    let grid = cfg.grid();
    if cfg.jobs <= 1 {
        return Ok(grid.iter().map(|&g| evaluate(&code, g, cfg)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|&g| evaluate(&code, g, cfg)).collect()))
}

/// Sweep recovery set when none is given: everything the code supports.
pub fn default_recoveries(code: &Code) -> Vec<Method> {
    if code.stabilizer.is_some() {
        vec![Method::Optimal, Method::Qec, Method::None]
    } else {
        vec![Method::Optimal, Method::None]
    }
}

/// γ values where `a − b` changes sign, by linear interpolation between grid
/// points. Points where either column is missing, or where the two agree to
/// within `slack`, are skipped.
pub fn crossings(
    records: &[SweepRecord],
    a: impl Fn(&SweepRecord) -> Option<f64>,
    b: impl Fn(&SweepRecord) -> Option<f64>,
    slack: f64,
) -> Vec<f64> {
    let diffs: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| Some((r.gamma, a(r)? - b(r)?)))
        .filter(|(_, d)| d.abs() > slack)
        .collect();
    diffs
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let ((g0, d0), (g1, d1)) = (w[0], w[1]);
            g0 + (g1 - g0) * d0 / (d0 - d1)
        })
        .collect()
}
