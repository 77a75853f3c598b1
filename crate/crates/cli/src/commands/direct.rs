use rayon::prelude::*;
use serde::Serialize;
use swing_casimir_core::{
    build_coupled_system, direct_particle_number, fit_growth_rate, integrate_full, slow_amplitudes,
    CoupledSystem, Error, IntegrationSettings, ModeIndex, PumpRun, RotationProfile, SlowSystem,
    C64,
};

use super::{fit_mode, labels, output, pump_modes, resonant_set, FitSummary};
use crate::config::{warn_speed, RunConfig};
use crate::error::Result;
use crate::table::Table;

/// Per-pump direct runs at one drive frequency plus the particle numbers of
/// the tracked modes.
pub struct DirectRun {
    pub system: CoupledSystem,
    pub profile: RotationProfile,
    pub pumps: Vec<ModeIndex>,
    pub runs: Vec<PumpRun>,
    pub slow: Option<SlowSystem>,
    pub tracked: Vec<ModeIndex>,
    pub counts: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub taus: Vec<f64>,
    pub steps: usize,
}

impl DirectRun {
    pub fn execute(cfg: &RunConfig, omega: f64) -> Result<Self> {
        cfg.check_speed(omega)?;
        let system = build_coupled_system(cfg.n_max, cfg.n_z, cfg.length)?.with_frame(cfg.frame);
        let profile = cfg.rotation(omega);
        let slow = resonant_set(cfg, omega)?.map(|(_, s)| s);
        let pumps = pump_modes(cfg, slow.as_ref(), system.basis())?;
        for &p in &pumps {
            system.index_of(p).ok_or(Error::ModeNotInBasis(p))?;
        }

        let steps = if cfg.t_final > 0.0 {
            ((cfg.t_final / cfg.dt - 1e-9).ceil() as usize).max(1)
        } else {
            0
        };
        let h = if steps > 0 {
            cfg.t_final / steps as f64
        } else {
            cfg.dt
        };
        let settings = IntegrationSettings {
            t_final: cfg.t_final,
            dt: cfg.dt,
            sample_every: ((cfg.sample_dt / h).round() as usize).max(1),
        };
        let runs = pumps
            .par_iter()
            .map(|&p| integrate_full(&system, &profile, p, settings))
            .collect::<Result<Vec<_>, _>>()?;

        let mut tracked: Vec<ModeIndex> = pumps.clone();
        if let Some(s) = &slow {
            tracked.extend(s.modes().iter().filter(|m| system.index_of(**m).is_some()));
        }
        if let Some(m) = cfg.fit_mode.filter(|m| system.index_of(*m).is_some()) {
            tracked.push(m);
        }
        tracked.sort();
        tracked.dedup();
        let counts = tracked
            .iter()
            .map(|&m| direct_particle_number(&system, &profile, &runs, m, &pumps))
            .collect::<Result<Vec<_>, _>>()?;
        let times: Vec<f64> = runs[0].samples.iter().map(|s| s.t).collect();
        let taus = times.iter().map(|t| cfg.epsilon * t).collect();
        Ok(Self {
            system,
            profile,
            pumps,
            runs,
            slow,
            tracked,
            counts,
            times,
            taus,
            steps,
        })
    }

    pub fn count_of(&self, mode: ModeIndex) -> Option<&[f64]> {
        self.tracked
            .iter()
            .position(|&m| m == mode)
            .map(|i| self.counts[i].as_slice())
    }

    /// Growth fit of the fit mode over the configured window; `None` when the
    /// run has no slow-time extent.
    pub fn fit(&self, cfg: &RunConfig) -> Result<Option<FitSummary>> {
        let tau_f = cfg.tau_final();
        if tau_f.is_nan() || tau_f <= 0.0 {
            return Ok(None);
        }
        let Some(mode) = fit_mode(cfg, self.slow.as_ref(), &self.pumps) else {
            return Ok(None);
        };
        let counts = self.count_of(mode).ok_or(Error::ModeNotInBasis(mode))?;
        let fit = fit_growth_rate(&self.taus, counts, cfg.window())?;
        Ok(Some(FitSummary {
            mode: mode.label(),
            lambda_fit: fit.lambda_fit,
            r_squared: fit.r_squared,
            window: [fit.window.0, fit.window.1],
            samples: fit.samples,
        }))
    }

    fn tables(&self) -> Result<(Table, Table)> {
        let mut amps = Table::new(
            "direct_amplitudes",
            &[
                "t", "tau", "mode", "pump", "c_abs", "b_re", "b_im", "c_re", "c_im",
            ],
        );
        let mut counts = Table::new("direct_particles", &["t", "tau", "mode", "n"]);
        let index: Vec<usize> = self
            .tracked
            .iter()
            .map(|&m| self.system.index_of(m).unwrap_or_else(|| unreachable!()))
            .collect();
        for (s, (&t, &tau)) in self.times.iter().zip(&self.taus).enumerate() {
            let extracted: Vec<(Vec<C64>, Vec<C64>)> = self
                .runs
                .iter()
                .map(|r| slow_amplitudes(&self.system, &self.profile, &r.samples[s]))
                .collect::<Result<_, _>>()?;
            for (j, (&m, &i)) in self.tracked.iter().zip(&index).enumerate() {
                for (run, (b, c)) in self.runs.iter().zip(&extracted) {
                    amps.push(vec![
                        t.into(),
                        tau.into(),
                        m.label().into(),
                        run.pump.label().into(),
                        run.samples[s].c[i].norm().into(),
                        b[i].re.into(),
                        b[i].im.into(),
                        c[i].re.into(),
                        c[i].im.into(),
                    ]);
                }
                counts.push(vec![
                    t.into(),
                    tau.into(),
                    m.label().into(),
                    self.counts[j][s].into(),
                ]);
            }
        }
        Ok((amps, counts))
    }
}

#[derive(Debug, Serialize)]
pub struct DirectSummary {
    pub command: &'static str,
    pub omega: f64,
    pub length: f64,
    pub epsilon: f64,
    pub profile: &'static str,
    pub acceleration: Option<f64>,
    pub frame: &'static str,
    pub n_max: u32,
    pub n_z: u32,
    pub t_final: f64,
    pub tau_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub pumps: Vec<String>,
    pub fit: Option<FitSummary>,
    pub particles: Vec<FinalCount>,
}

#[derive(Debug, Serialize)]
pub struct FinalCount {
    pub mode: String,
    pub n: f64,
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    warn_speed(cfg.check_speed(cfg.omega)?);
    let run = DirectRun::execute(cfg, cfg.omega)?;
    let out = output(cfg);
    if out.dir.is_some() {
        let (amps, counts) = run.tables()?;
        out.table(&amps, false)?;
        out.table(&counts, false)?;
    }
    let summary = DirectSummary {
        command: "direct",
        omega: cfg.omega,
        length: cfg.length,
        epsilon: cfg.epsilon,
        profile: cfg.profile_name(),
        acceleration: match run.profile {
            RotationProfile::ConstantAcceleration { acceleration } => Some(acceleration),
            RotationProfile::Sinusoidal { .. } => None,
        },
        frame: cfg.frame_name(),
        n_max: cfg.n_max,
        n_z: cfg.n_z,
        t_final: cfg.t_final,
        tau_final: cfg.tau_final(),
        dt: cfg.dt,
        steps: run.steps,
        pumps: labels(&run.pumps),
        fit: run.fit(cfg)?,
        particles: run
            .tracked
            .iter()
            .zip(&run.counts)
            .map(|(m, n)| FinalCount {
                mode: m.label(),
                n: n.last().copied().unwrap_or(0.0),
            })
            .collect(),
    };
    out.summary("direct_summary", &summary, true)
}
