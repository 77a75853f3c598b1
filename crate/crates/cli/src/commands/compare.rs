use serde::Serialize;
use swing_casimir_core::{fit_growth_rate, integrate_reduced_at, SlowAmplitudes, SlowSystem};

use super::direct::DirectRun;
use super::{fit_mode, output, FitSummary};
use crate::config::{warn_speed, RunConfig};
use crate::error::{CliError, Result};
use crate::table::Table;

/// Largest direct particle number still counted as "nothing created".
const VACUUM_FLOOR: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub command: &'static str,
    /// `pass`, `fail`, `trivial` (no rotation) or `inapplicable` (nothing resonant).
    pub status: &'static str,
    pub pass: Option<bool>,
    pub msa_applicable: bool,
    pub omega: f64,
    pub epsilon: f64,
    pub tau_final: f64,
    pub window: [f64; 2],
    pub rel_tol: f64,
    pub lambda_tol: f64,
    pub modes: Vec<ModeComparison>,
    pub fit: Option<FitSummary>,
    pub lambda_msa: Option<f64>,
    pub lambda_rel_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ModeComparison {
    pub mode: String,
    pub n_direct: f64,
    pub n_msa: Option<f64>,
    pub max_rel_error: Option<f64>,
}

/// `Σ_k 2ω_m |B_m^k|²` restricted to the pumps actually run directly.
fn msa_count(a: &SlowAmplitudes, mode: usize, pumps: &[usize]) -> f64 {
    2.0 * a.omegas[mode] * pumps.iter().map(|&k| a.b(mode, k).norm_sqr()).sum::<f64>()
}

fn slow_lambda(system: &SlowSystem) -> Option<f64> {
    system.lambda_squared().filter(|&l| l > 0.0).map(f64::sqrt)
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    warn_speed(cfg.check_speed(cfg.omega)?);
    let direct = DirectRun::execute(cfg, cfg.omega)?;
    let fit = direct.fit(cfg)?;
    let window = cfg.window();
    let mut summary = CompareSummary {
        command: "compare",
        status: "inapplicable",
        pass: None,
        msa_applicable: direct.slow.is_some(),
        omega: cfg.omega,
        epsilon: cfg.epsilon,
        tau_final: cfg.tau_final(),
        window: [window.0, window.1],
        rel_tol: cfg.rel_tol,
        lambda_tol: cfg.lambda_tol,
        modes: Vec::new(),
        fit: None,
        lambda_msa: None,
        lambda_rel_error: None,
    };
    let mut table = Table::new(
        "compare",
        &["t", "tau", "mode", "n_direct", "n_msa", "rel_error"],
    );

    if cfg.epsilon == 0.0 {
        // both descriptions are the vacuum at every time
        let peak = direct.counts.iter().flatten().copied().fold(0.0, f64::max);
        summary.status = if peak <= VACUUM_FLOOR {
            "trivial"
        } else {
            "fail"
        };
        summary.pass = Some(peak <= VACUUM_FLOOR);
        for (m, n) in direct.tracked.iter().zip(&direct.counts) {
            summary.modes.push(ModeComparison {
                mode: m.label(),
                n_direct: n.last().copied().unwrap_or(0.0),
                n_msa: Some(0.0),
                max_rel_error: None,
            });
        }
    } else if let Some(slow) = &direct.slow {
        let amps = integrate_reduced_at(slow, &direct.taus, cfg.dtau)?;
        let pumps: Vec<usize> = direct
            .pumps
            .iter()
            .filter_map(|&p| slow.index_of(p))
            .collect();
        let mut ok = true;
        for (j, &m) in direct.tracked.iter().enumerate() {
            let Some(i) = slow.index_of(m) else { continue };
            let mut worst: Option<f64> = None;
            for (s, a) in amps.iter().enumerate() {
                let (nd, nm) = (direct.counts[j][s], msa_count(a, i, &pumps));
                let rel = (nm > 0.0).then(|| (nd - nm).abs() / nm);
                if let Some(r) = rel.filter(|_| a.tau >= window.0 && a.tau <= window.1) {
                    worst = Some(worst.map_or(r, |w: f64| w.max(r)));
                }
                table.push(vec![
                    direct.times[s].into(),
                    a.tau.into(),
                    m.label().into(),
                    nd.into(),
                    nm.into(),
                    rel.into(),
                ]);
            }
            ok &= worst.map_or(true, |w| w <= cfg.rel_tol);
            summary.modes.push(ModeComparison {
                mode: m.label(),
                n_direct: direct.counts[j].last().copied().unwrap_or(0.0),
                n_msa: amps.last().map(|a| msa_count(a, i, &pumps)),
                max_rel_error: worst,
            });
        }

        // closed form when available, otherwise a fit to the reduced series
        let lambda_msa = match slow_lambda(slow) {
            Some(l) => Some(l),
            None => match fit_mode(cfg, Some(slow), &direct.pumps).and_then(|m| slow.index_of(m)) {
                Some(i) => {
                    let n: Vec<f64> = amps.iter().map(|a| msa_count(a, i, &pumps)).collect();
                    Some(fit_growth_rate(&direct.taus, &n, window)?.lambda_fit)
                }
                None => None,
            },
        };
        if let (Some(lm), Some(f)) = (lambda_msa, &fit) {
            let err = (f.lambda_fit - lm).abs() / lm.abs().max(f64::MIN_POSITIVE);
            summary.lambda_rel_error = Some(err);
            ok &= err <= cfg.lambda_tol;
        }
        summary.lambda_msa = lambda_msa;
        summary.status = if ok { "pass" } else { "fail" };
        summary.pass = Some(ok);
    } else {
        log::warn!(
            "no resonant pair at omega = {}; reporting the direct run only",
            cfg.omega
        );
        for (m, n) in direct.tracked.iter().zip(&direct.counts) {
            summary.modes.push(ModeComparison {
                mode: m.label(),
                n_direct: n.last().copied().unwrap_or(0.0),
                n_msa: None,
                max_rel_error: None,
            });
        }
    }
    summary.fit = fit;

    let out = output(cfg);
    out.table(&table, false)?;
    out.summary("compare_summary", &summary, true)?;
    match summary.pass {
        Some(false) => Err(CliError::Tolerance(format!(
            "direct and slow-time results disagree beyond rel_tol = {} / lambda_tol = {}",
            cfg.rel_tol, cfg.lambda_tol
        ))),
        _ => Ok(()),
    }
}
