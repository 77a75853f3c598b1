mod compare;
mod direct;
mod msa;
mod sweep;

use serde::Serialize;
use swing_casimir_core::{
    build_slow_system, find_resonant_pairs_with, mode_frequency, MatchKind, ModeIndex,
    ResonanceSearch, ResonantPair, SlowSystem,
};

pub use self::compare::run as compare;
pub use self::direct::run as direct;
pub use self::msa::run as msa;
pub use self::sweep::run as sweep;

use crate::config::{Pumps, RunConfig};
use crate::error::Result;
use crate::table::{Output, Table};

pub fn output(cfg: &RunConfig) -> Output {
    Output {
        dir: cfg.out.clone(),
        format: cfg.format,
    }
}

/// Modes of the `n_z` block, sorted by frequency.
pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    let mut rows: Vec<(ModeIndex, f64)> = Vec::new();
    for nx in 1..=cfg.n_max {
        for ny in 1..=cfg.n_max {
            let mode = ModeIndex::new(nx, ny, cfg.n_z)?;
            rows.push((mode, mode_frequency(mode, cfg.length)));
        }
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut table = Table::new("spectrum", &["mode", "nx", "ny", "nz", "omega"]);
    for (m, w) in rows {
        table.push(vec![
            m.label().into(),
            m.nx().into(),
            m.ny().into(),
            m.nz().into(),
            w.into(),
        ]);
    }
    output(cfg).table(&table, true)
}

fn search(cfg: &RunConfig, omega: f64) -> ResonanceSearch {
    ResonanceSearch {
        omega,
        length: cfg.length,
        max_index: cfg.max_index,
        tol: cfg.tol,
        include_difference: cfg.include_difference,
    }
}

pub fn resonances(cfg: &RunConfig) -> Result<()> {
    let pairs = find_resonant_pairs_with(&search(cfg, cfg.omega))?;
    let mut table = Table::new("resonances", &["lo", "hi", "detuning", "axis", "kind"]);
    for p in &pairs {
        table.push(vec![
            p.lo.label().into(),
            p.hi.label().into(),
            p.detuning.into(),
            p.axis.as_str().into(),
            p.kind.as_str().into(),
        ]);
    }
    output(cfg).table(&table, true)
}

/// Sum-resonant pairs inside the simulated `n_z` block and their slow system;
/// `None` when nothing in the block resonates with `omega`.
pub fn resonant_set(
    cfg: &RunConfig,
    omega: f64,
) -> Result<Option<(Vec<ResonantPair>, SlowSystem)>> {
    let search = ResonanceSearch {
        include_difference: false,
        ..search(cfg, omega)
    };
    let pairs: Vec<ResonantPair> = find_resonant_pairs_with(&search)?
        .into_iter()
        .filter(|p| p.lo.nz() == cfg.n_z && p.kind == MatchKind::Sum)
        .collect();
    if pairs.is_empty() {
        return Ok(None);
    }
    let system = build_slow_system(&pairs, omega, cfg.length)?;
    Ok(Some((pairs, system)))
}

/// Pumps for the direct runs; `basis` is the truncated basis.
pub fn pump_modes(
    cfg: &RunConfig,
    slow: Option<&SlowSystem>,
    basis: &[ModeIndex],
) -> Result<Vec<ModeIndex>> {
    Ok(match &cfg.pumps {
        Pumps::All => basis.to_vec(),
        Pumps::List(list) => list.clone(),
        Pumps::Resonant => match slow {
            Some(s) => s.modes().to_vec(),
            None => vec![ModeIndex::new(1, 1, cfg.n_z)?],
        },
    })
}

/// Hub of a star-shaped resonant set, else the first pump.
pub fn fit_mode(
    cfg: &RunConfig,
    slow: Option<&SlowSystem>,
    pumps: &[ModeIndex],
) -> Option<ModeIndex> {
    cfg.fit_mode
        .or_else(|| slow.and_then(|s| s.star().map(|(hub, _)| s.modes()[hub])))
        .or_else(|| pumps.first().copied())
}

#[derive(Debug, Serialize)]
pub struct PairSummary {
    pub lo: String,
    pub hi: String,
    pub detuning: f64,
    pub axis: &'static str,
    pub kind: &'static str,
}

impl From<&ResonantPair> for PairSummary {
    fn from(p: &ResonantPair) -> Self {
        Self {
            lo: p.lo.label(),
            hi: p.hi.label(),
            detuning: p.detuning,
            axis: p.axis.as_str(),
            kind: p.kind.as_str(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub mode: String,
    pub lambda_fit: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

pub fn labels(modes: &[ModeIndex]) -> Vec<String> {
    modes.iter().map(ModeIndex::label).collect()
}
