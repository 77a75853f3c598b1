//! Real-time integration of the truncated coupled-mode system.

mod fit;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use self::fit::{fit_growth_rate, GrowthFit};
use crate::coupling::{CoupledSystem, RotationProfile};
use crate::error::Error;
use crate::ode::{uniform_steps, Rk4};
use crate::spectrum::{positive, ModeIndex};
use crate::{Result, C64};

/// Mode amplitudes and their time derivatives at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectState {
    pub t: f64,
    pub c: Vec<C64>,
    pub cdot: Vec<C64>,
}

impl DirectState {
    /// Vacuum mode function of `pump`: `c_k = 1/√(2ω_k)`, `ċ_k = −i√(ω_k/2)`.
    pub fn vacuum(system: &CoupledSystem, pump: ModeIndex) -> Result<Self> {
        let k = system.index_of(pump).ok_or(Error::ModeNotInBasis(pump))?;
        let w = system.omegas()[k];
        let mut c = vec![C64::new(0.0, 0.0); system.len()];
        let mut cdot = c.clone();
        c[k] = C64::new(1.0 / libm::sqrt(2.0 * w), 0.0);
        cdot[k] = C64::new(0.0, -libm::sqrt(w / 2.0));
        Ok(Self { t: 0.0, c, cdot })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
}

/// Largest accepted step: twenty steps per period of the fastest oscillation.
pub fn step_bound(system: &CoupledSystem, profile: &RotationProfile) -> f64 {
    let fastest = system
        .max_frequency()
        .max(profile.drive_frequency().unwrap_or(0.0));
    2.0 * PI / (20.0 * fastest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpRun {
    pub pump: ModeIndex,
    pub samples: Vec<DirectState>,
}

/// Fixed-step RK4 on `(c, ċ)` from the vacuum state of `pump`. The interval
/// is split into equal steps no longer than `dt`; samples are taken at
/// `t = 0`, every `sample_every` steps and at `t_final`.
pub fn integrate_full(
    system: &CoupledSystem,
    profile: &RotationProfile,
    pump: ModeIndex,
    settings: IntegrationSettings,
) -> Result<PumpRun> {
    positive("dt", settings.dt)?;
    if !(settings.t_final >= 0.0 && settings.t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            value: settings.t_final,
            requirement: "finite and >= 0",
        });
    }
    let bound = step_bound(system, profile);
    if settings.dt > bound {
        return Err(Error::StepTooLarge {
            dt: settings.dt,
            bound,
        });
    }
    let start = DirectState::vacuum(system, pump)?;
    let n = system.len();
    let mut y = start.c.clone();
    y.extend_from_slice(&start.cdot);

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let (c, v) = y.split_at(n);
        let (dc, dv) = dy.split_at_mut(n);
        dc.copy_from_slice(v);
        system.rhs_unchecked(profile.at(t), c, v, dv);
    };
    let snapshot = |y: &[C64], t: f64| DirectState {
        t,
        c: y[..n].to_vec(),
        cdot: y[n..].to_vec(),
    };

    let every = settings.sample_every.max(1);
    let (steps, h) = uniform_steps(settings.t_final, settings.dt);
    let mut samples = Vec::with_capacity(steps / every + 2);
    samples.push(start);
    let mut rk = Rk4::new(2 * n);
    for s in 0..steps {
        rk.step(rhs, s as f64 * h, h, &mut y);
        let done = s + 1 == steps;
        if done || (s + 1) % every == 0 {
            samples.push(snapshot(
                &y,
                if done {
                    settings.t_final
                } else {
                    (s + 1) as f64 * h
                },
            ));
        }
    }
    Ok(PumpRun { pump, samples })
}

/// Inverts `c = B e^{iωt} + C e^{−iωt}`, `ċ = iω(B e^{iωt} − C e^{−iωt})`.
pub fn extract_slow_amplitudes(
    c: &[C64],
    velocity: &[C64],
    t: f64,
    omegas: &[f64],
) -> (Vec<C64>, Vec<C64>) {
    let mut b = Vec::with_capacity(c.len());
    let mut cc = Vec::with_capacity(c.len());
    for ((&ci, &vi), &w) in c.iter().zip(velocity).zip(omegas) {
        let p = vi / C64::new(0.0, w);
        let phase = C64::from_polar(1.0, w * t);
        b.push((ci + p) * 0.5 * phase.conj());
        cc.push((ci - p) * 0.5 * phase);
    }
    (b, cc)
}

/// Slow amplitudes of a sampled state, using the lab-frame velocity so the
/// rotation's instantaneous frame drag does not leak into `B`.
pub fn slow_amplitudes(
    system: &CoupledSystem,
    profile: &RotationProfile,
    state: &DirectState,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let u = system.lab_velocity(profile, state.t, &state.c, &state.cdot)?;
    Ok(extract_slow_amplitudes(
        &state.c,
        &u,
        state.t,
        system.omegas(),
    ))
}

/// `N_m(t) = Σ_k 2ω_m |B_m^k(t)|²` over the runs for `pumps`.
pub fn direct_particle_number(
    system: &CoupledSystem,
    profile: &RotationProfile,
    runs: &[PumpRun],
    mode: ModeIndex,
    pumps: &[ModeIndex],
) -> Result<Vec<f64>> {
    let m = system.index_of(mode).ok_or(Error::ModeNotInBasis(mode))?;
    let w = system.omegas()[m];
    let selected: Vec<&PumpRun> = pumps
        .iter()
        .map(|&p| {
            runs.iter()
                .find(|r| r.pump == p)
                .ok_or(Error::MissingPump(p))
        })
        .collect::<Result<_>>()?;
    let Some(first) = selected.first().copied() else {
        return Ok(Vec::new());
    };
    let len = first.samples.len();
    if selected.iter().any(|r| r.samples.len() != len) {
        return Err(Error::MisalignedRuns);
    }
    let mut out = vec![0.0; len];
    for run in selected {
        for ((o, state), reference) in out.iter_mut().zip(&run.samples).zip(&first.samples) {
            if state.t != reference.t {
                return Err(Error::MisalignedRuns);
            }
            let u = system.lab_velocity(profile, state.t, &state.c, &state.cdot)?;
            let p = u[m] / C64::new(0.0, w);
            let b = (state.c[m] + p) * 0.5;
            *o += 2.0 * w * b.norm_sqr();
        }
    }
    Ok(out)
}
