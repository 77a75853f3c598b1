use rayon::prelude::*;
use serde::Serialize;
use swing_casimir_core::ModeIndex;

use super::direct::DirectRun;
use super::{labels, output, pump_modes, resonant_set};
use crate::config::{warn_speed, Pumps, RunConfig};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

pub const THREADS_VAR: &str = "CASIMIR_SWING_THREADS";

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub command: &'static str,
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub t_final: f64,
    pub pumps: Vec<String>,
    pub threads: usize,
    pub peak_omega: Option<f64>,
    pub peak_lambda_fit: Option<f64>,
}

pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Config(format!(
                "{THREADS_VAR} = {v:?}: must be a non-negative integer"
            ))
        }),
    }
}

struct Point {
    omega: f64,
    lambda_fit: Option<f64>,
    r_squared: Option<f64>,
    fit_mode: Option<String>,
    n_final: Option<f64>,
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    // fix the pump set once so every grid point measures the same thing
    let mut point_cfg = cfg.clone();
    if cfg.pumps == Pumps::Resonant {
        let slow = resonant_set(cfg, cfg.omega)?.map(|(_, s)| s);
        let basis: Vec<ModeIndex> = Vec::new();
        point_cfg.pumps = Pumps::List(pump_modes(cfg, slow.as_ref(), &basis)?);
    }
    let pumps = match &point_cfg.pumps {
        Pumps::List(list) => labels(list),
        _ => vec!["all".into()],
    };
    if point_cfg.fit_mode.is_none() {
        // the hub at the nominal frequency keeps the fitted mode fixed across the grid
        let slow = resonant_set(cfg, cfg.omega)?.map(|(_, s)| s);
        point_cfg.fit_mode = slow
            .as_ref()
            .and_then(|s| s.star().map(|(hub, _)| s.modes()[hub]))
            .or(Some(ModeIndex::new(1, 1, cfg.n_z)?));
    }

    let omegas = grid(cfg.omega_min, cfg.omega_max, cfg.steps);
    let mut fastest: Option<f64> = None;
    for &omega in &omegas {
        if let Some(v) = point_cfg.check_speed(omega)? {
            fastest = Some(fastest.map_or(v, |f| f.max(v)));
        }
    }
    warn_speed(fastest);
    let requested = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(requested)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let points = pool.install(|| {
        omegas
            .par_iter()
            .map(|&omega| {
                let run = DirectRun::execute(&point_cfg, omega)?;
                let fit = run.fit(&point_cfg)?;
                let n_final = point_cfg
                    .fit_mode
                    .and_then(|m| run.count_of(m))
                    .and_then(|n| n.last().copied());
                Ok(Point {
                    omega,
                    lambda_fit: fit.as_ref().map(|f| f.lambda_fit),
                    r_squared: fit.as_ref().map(|f| f.r_squared),
                    fit_mode: point_cfg.fit_mode.map(|m| m.label()),
                    n_final,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new(
        "sweep",
        &["omega", "lambda_fit", "r_squared", "fit_mode", "n_final"],
    );
    for p in &points {
        table.push(vec![
            p.omega.into(),
            p.lambda_fit.into(),
            p.r_squared.into(),
            p.fit_mode.clone().map_or(Cell::Empty, Cell::Text),
            p.n_final.into(),
        ]);
    }
    let peak = points
        .iter()
        .filter_map(|p| p.lambda_fit.map(|l| (p.omega, l)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let summary = SweepSummary {
        command: "sweep",
        omega_min: cfg.omega_min,
        omega_max: cfg.omega_max,
        steps: cfg.steps,
        epsilon: cfg.epsilon,
        t_final: cfg.t_final,
        pumps,
        threads,
        peak_omega: peak.map(|p| p.0),
        peak_lambda_fit: peak.map(|p| p.1),
    };
    let out = output(cfg);
    out.table(&table, true)?;
    out.summary("sweep_summary", &summary, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(1.0, 2.0, 1), vec![1.0]);
        let g = grid(1.0, 2.0, 5);
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[4]), (1.0, 2.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
