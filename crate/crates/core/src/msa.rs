//! Multiple-scale reduction of the coupled-mode system.
//!
//! At zeroth order every mode oscillates freely,
//! `c_m = B_m(τ) e^{iω_m t} + C_m(τ) e^{−iω_m t}` with slow time `τ = εt`.
//! Removing the secular terms at first order leaves a linear system
//!
//! ```text
//! ∂_τ B_m = Σ_n K_mn C_n,    ∂_τ C_m = Σ_n K_mn B_n
//! ```
//!
//! over the resonant modes, with `K_mn = ±G` for a partner differing along y
//! (+) or x (−). Every amplitude carries a pump label `k`: the mode whose
//! vacuum fluctuation seeds it, `C_m^k(0) = δ_mk/√(2ω_k)`, `B_m^k(0) = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::coupling::slow_coupling;
use crate::error::Error;
use crate::ode::{uniform_steps, Rk4};
use crate::spectrum::{
    mode_frequency, positive, three_mode_drive_frequency, Axis, MatchKind, ModeIndex, ResonantPair,
};
use crate::{Result, C64};

/// Linear slow-time system over a resonant mode set.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowSystem {
    modes: Vec<ModeIndex>,
    omegas: Vec<f64>,
    /// `K[m][n]` row-major.
    rates: Vec<f64>,
}

/// Character of the solution of a star-shaped slow system, `λ² = Σ K_hs K_sh`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowGrowth {
    /// `λ² > 0`: amplitudes grow as `sinh(λτ)`.
    Amplifying { rate: f64 },
    /// `λ² < 0`: bounded `sin(μτ)` exchange, no net particle creation.
    Oscillating { frequency: f64 },
    /// `λ² = 0`: polynomial growth.
    Neutral,
}

impl SlowGrowth {
    pub fn from_lambda_squared(lambda_sq: f64) -> Self {
        if lambda_sq > 0.0 {
            SlowGrowth::Amplifying {
                rate: libm::sqrt(lambda_sq),
            }
        } else if lambda_sq < 0.0 {
            SlowGrowth::Oscillating {
                frequency: libm::sqrt(-lambda_sq),
            }
        } else {
            SlowGrowth::Neutral
        }
    }

    pub fn is_amplifying(&self) -> bool {
        matches!(self, SlowGrowth::Amplifying { .. })
    }

    /// `(S, Ch, Q)` = `(sinh(λτ)/λ, cosh(λτ), (cosh(λτ) − 1)/λ²)` and their
    /// trigonometric or polynomial counterparts.
    fn kernels(&self, tau: f64) -> (f64, f64, f64) {
        match *self {
            SlowGrowth::Amplifying { rate } => {
                let ch = libm::cosh(rate * tau);
                (
                    libm::sinh(rate * tau) / rate,
                    ch,
                    (ch - 1.0) / (rate * rate),
                )
            }
            SlowGrowth::Oscillating { frequency } => {
                let co = libm::cos(frequency * tau);
                (
                    libm::sin(frequency * tau) / frequency,
                    co,
                    (1.0 - co) / (frequency * frequency),
                )
            }
            SlowGrowth::Neutral => (tau, 1.0, 0.5 * tau * tau),
        }
    }
}

/// Modes appearing in `pairs`, sorted, with couplings from the slow-time
/// coefficient `G`.
pub fn build_slow_system(pairs: &[ResonantPair], omega: f64, length: f64) -> Result<SlowSystem> {
    positive("omega", omega)?;
    positive("length", length)?;
    for p in pairs {
        if p.kind != MatchKind::Sum {
            return Err(Error::UnsupportedMatch { lo: p.lo, hi: p.hi });
        }
    }
    let mut modes: Vec<ModeIndex> = pairs.iter().flat_map(|p| [p.lo, p.hi]).collect();
    modes.sort();
    modes.dedup();
    let omegas: Vec<f64> = modes.iter().map(|&m| mode_frequency(m, length)).collect();
    let n = modes.len();
    let mut rates = vec![0.0; n * n];
    let index = |m: ModeIndex| modes.binary_search(&m).unwrap_or_else(|_| unreachable!());
    for p in pairs {
        let sign = match Axis::between(p.lo, p.hi) {
            Some(Axis::Y) => 1.0,
            Some(Axis::X) => -1.0,
            _ => return Err(Error::UnsupportedCoupling { m: p.lo, k: p.hi }),
        };
        let (i, j) = (index(p.lo), index(p.hi));
        // equation for `lo` is driven by partner `hi` through G^{lo}_{hi}
        rates[i * n + j] = sign * slow_coupling(p.hi, p.lo, omega, length)?;
        rates[j * n + i] = sign * slow_coupling(p.lo, p.hi, omega, length)?;
    }
    Ok(SlowSystem {
        modes,
        omegas,
        rates,
    })
}

impl SlowSystem {
    /// System with an explicit coupling matrix `rates[m * n + k]`.
    pub fn from_matrix(modes: Vec<ModeIndex>, omegas: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let n = modes.len();
        if omegas.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: omegas.len(),
            });
        }
        if rates.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: rates.len(),
            });
        }
        for &w in &omegas {
            positive("omega", w)?;
        }
        Ok(Self {
            modes,
            omegas,
            rates,
        })
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    /// Coefficient of the partner `n` in the equation for `m`.
    pub fn rate(&self, m: ModeIndex, n: ModeIndex) -> f64 {
        match (self.index_of(m), self.index_of(n)) {
            (Some(i), Some(j)) => self.rates[i * self.len() + j],
            _ => 0.0,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.len() + j]
    }

    /// Hub and spokes when every coupling touches one mode.
    pub fn star(&self) -> Option<(usize, Vec<usize>)> {
        let n = self.len();
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.k(i, j) != 0.0 || self.k(j, i) != 0.0)
            .collect();
        let &(a, b) = edges.first()?;
        let hub = if edges.len() == 1 {
            a
        } else {
            [a, b]
                .into_iter()
                .find(|&h| edges.iter().all(|&(i, j)| i == h || j == h))?
        };
        // isolated modes would stay frozen; treat them as outside the closed form
        if edges.len() + 1 != n {
            return None;
        }
        let spokes = edges
            .iter()
            .map(|&(i, j)| if i == hub { j } else { i })
            .collect();
        Some((hub, spokes))
    }

    /// `λ² = Σ_s K_hs K_sh` for star-shaped systems.
    pub fn lambda_squared(&self) -> Option<f64> {
        let (hub, spokes) = self.star()?;
        Some(
            spokes
                .iter()
                .map(|&s| self.k(hub, s) * self.k(s, hub))
                .sum(),
        )
    }

    pub fn growth(&self) -> Option<SlowGrowth> {
        self.lambda_squared().map(SlowGrowth::from_lambda_squared)
    }

    /// Closed-form amplitudes at slow time `tau`; `None` unless the system is a star.
    pub fn solve_analytic(&self, tau: f64) -> Option<SlowAmplitudes> {
        let (hub, spokes) = self.star()?;
        let growth = self.growth()?;
        let (s, ch, q) = growth.kernels(tau);
        let n = self.len();
        let mut amps = SlowAmplitudes::vacuum(self.modes.clone(), self.omegas.clone());
        amps.tau = tau;
        let seed = |k: usize| 1.0 / libm::sqrt(2.0 * self.omegas[k]);

        let a = seed(hub);
        amps.c[hub * n + hub] = C64::new(a * ch, 0.0);
        for &sp in &spokes {
            amps.b[sp * n + hub] = C64::new(self.k(sp, hub) * a * s, 0.0);
        }
        for &j in &spokes {
            let a = seed(j);
            amps.b[hub * n + j] = C64::new(self.k(hub, j) * a * s, 0.0);
            for &sp in &spokes {
                let own = if sp == j { a } else { 0.0 };
                amps.c[sp * n + j] = C64::new(own + self.k(sp, hub) * self.k(hub, j) * a * q, 0.0);
            }
        }
        Some(amps)
    }
}

/// `B_m^k`, `C_m^k` at one slow time, indexed `[mode][pump]` over the
/// system's modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowAmplitudes {
    pub modes: Vec<ModeIndex>,
    pub omegas: Vec<f64>,
    pub tau: f64,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
}

impl SlowAmplitudes {
    pub fn vacuum(modes: Vec<ModeIndex>, omegas: Vec<f64>) -> Self {
        let n = modes.len();
        let mut c = vec![C64::new(0.0, 0.0); n * n];
        for (k, &w) in omegas.iter().enumerate() {
            c[k * n + k] = C64::new(1.0 / libm::sqrt(2.0 * w), 0.0);
        }
        Self {
            modes,
            omegas,
            tau: 0.0,
            b: vec![C64::new(0.0, 0.0); n * n],
            c,
        }
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    pub fn b(&self, mode: usize, pump: usize) -> C64 {
        self.b[mode * self.modes.len() + pump]
    }

    pub fn c(&self, mode: usize, pump: usize) -> C64 {
        self.c[mode * self.modes.len() + pump]
    }

    /// `⟨N_m⟩ = Σ_k 2ω_m |B_m^k|²`.
    pub fn particle_number(&self, mode: ModeIndex) -> Result<f64> {
        let i = self.index_of(mode).ok_or(Error::ModeNotInBasis(mode))?;
        let n = self.modes.len();
        Ok(2.0
            * self.omegas[i]
            * self.b[i * n..(i + 1) * n]
                .iter()
                .map(|b| b.norm_sqr())
                .sum::<f64>())
    }

    /// `Σ_m 2ω_m (|C_m^k|² − |B_m^k|²)` for pump `k`; 1 at `τ = 0`.
    pub fn bogoliubov_norm(&self, pump: usize) -> f64 {
        (0..self.modes.len())
            .map(|m| {
                2.0 * self.omegas[m] * (self.c(m, pump).norm_sqr() - self.b(m, pump).norm_sqr())
            })
            .sum()
    }
}

pub fn particle_number(amps: &SlowAmplitudes, mode: ModeIndex) -> Result<f64> {
    amps.particle_number(mode)
}

/// Closed-form solution for the (1,1,1)–(1,2,1)–(2,1,1) set driven at
/// `Ω = (√3 + √6)π/L`.
pub fn solve_three_mode_analytic(omega: f64, length: f64, tau: f64) -> Result<SlowAmplitudes> {
    positive("length", length)?;
    let expected = three_mode_drive_frequency(length);
    if !omega.is_finite() || libm::fabs(omega - expected) > 1e-9 * expected {
        return Err(Error::NotThreeModeDrive { omega, expected });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            requirement: "finite and >= 0",
        });
    }
    let hub = ModeIndex::new(1, 1, 1)?;
    let pair = |hi: ModeIndex, axis| ResonantPair {
        lo: hub,
        hi,
        detuning: 0.0,
        axis,
        kind: MatchKind::Sum,
    };
    let pairs = [
        pair(ModeIndex::new(1, 2, 1)?, Axis::Y),
        pair(ModeIndex::new(2, 1, 1)?, Axis::X),
    ];
    let system = build_slow_system(&pairs, omega, length)?;
    Ok(system
        .solve_analytic(tau)
        .unwrap_or_else(|| unreachable!("three-mode set is a star")))
}

pub fn integrate_reduced(system: &SlowSystem, tau_f: f64, dtau: f64) -> Result<SlowAmplitudes> {
    let mut traj = integrate_reduced_trajectory(system, tau_f, dtau, usize::MAX)?;
    Ok(traj.pop().unwrap_or_else(|| unreachable!()))
}

/// RK4 integration from the vacuum initial conditions; samples at `τ = 0`,
/// every `sample_every` steps and at `tau_f`.
pub fn integrate_reduced_trajectory(
    system: &SlowSystem,
    tau_f: f64,
    dtau: f64,
    sample_every: usize,
) -> Result<Vec<SlowAmplitudes>> {
    positive("dtau", dtau)?;
    if !(tau_f >= 0.0 && tau_f.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tau_f",
            value: tau_f,
            requirement: "finite and >= 0",
        });
    }
    let sample_every = sample_every.max(1);
    let mut y = system.vacuum_state();
    let nn = y.len() / 2;

    let snapshot = |y: &[C64], tau: f64| system.snapshot(y, tau);
    let rhs = |_: f64, y: &[C64], dy: &mut [C64]| system.slow_rhs(y, dy);

    let (steps, h) = uniform_steps(tau_f, dtau);
    let mut out = vec![snapshot(&y, 0.0)];
    let mut rk = Rk4::new(2 * nn);
    for s in 0..steps {
        rk.step(rhs, s as f64 * h, h, &mut y);
        let done = s + 1 == steps;
        if done || (s + 1) % sample_every == 0 {
            out.push(snapshot(&y, if done { tau_f } else { (s + 1) as f64 * h }));
        }
    }
    Ok(out)
}

/// Amplitudes at each of the non-decreasing slow times `taus`, stepping at
/// most `dtau` between consecutive targets.
pub fn integrate_reduced_at(
    system: &SlowSystem,
    taus: &[f64],
    dtau: f64,
) -> Result<Vec<SlowAmplitudes>> {
    positive("dtau", dtau)?;
    let mut y = system.vacuum_state();
    let mut rk = Rk4::new(y.len());
    let mut out = Vec::with_capacity(taus.len());
    let mut now = 0.0;
    for &tau in taus {
        if !(tau >= now && tau.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                requirement: "finite, >= 0 and non-decreasing",
            });
        }
        let (steps, h) = uniform_steps(tau - now, dtau);
        for s in 0..steps {
            rk.step(
                |_, y, dy| system.slow_rhs(y, dy),
                now + s as f64 * h,
                h,
                &mut y,
            );
        }
        now = tau;
        out.push(system.snapshot(&y, tau));
    }
    Ok(out)
}

impl SlowSystem {
    /// `[B | C]` with the vacuum initial conditions.
    fn vacuum_state(&self) -> Vec<C64> {
        let start = SlowAmplitudes::vacuum(self.modes.clone(), self.omegas.clone());
        let mut y = start.b;
        y.extend_from_slice(&start.c);
        y
    }

    fn snapshot(&self, y: &[C64], tau: f64) -> SlowAmplitudes {
        let nn = y.len() / 2;
        SlowAmplitudes {
            modes: self.modes.clone(),
            omegas: self.omegas.clone(),
            tau,
            b: y[..nn].to_vec(),
            c: y[nn..].to_vec(),
        }
    }

    fn slow_rhs(&self, y: &[C64], dy: &mut [C64]) {
        let n = self.len();
        let nn = n * n;
        let (b, c) = y.split_at(nn);
        let (db, dc) = dy.split_at_mut(nn);
        for m in 0..n {
            for k in 0..n {
                let (mut sb, mut sc) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for p in 0..n {
                    let r = self.rates[m * n + p];
                    if r != 0.0 {
                        sb += c[p * n + k] * r;
                        sc += b[p * n + k] * r;
                    }
                }
                db[m * n + k] = sb;
                dc[m * n + k] = sc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_weight;
    use crate::spectrum::find_resonant_pairs;
    use core::f64::consts::PI;

    fn m(x: u32, y: u32, z: u32) -> ModeIndex {
        ModeIndex::new(x, y, z).unwrap()
    }

    fn three_mode() -> SlowSystem {
        let om = three_mode_drive_frequency(1.0);
        let pairs = find_resonant_pairs(om, 1.0, 3, 1e-9).unwrap();
        build_slow_system(&pairs, om, 1.0).unwrap()
    }

    /// `λ = √(√2 π²/3)`
    fn lambda() -> f64 {
        (2f64.sqrt() * PI * PI / 3.0).sqrt()
    }

    #[test]
    fn three_mode_coefficients_follow_printed_signs() {
        let om = three_mode_drive_frequency(1.0);
        let sys = three_mode();
        let (a, b, c) = (m(1, 1, 1), m(1, 2, 1), m(2, 1, 1));
        assert_eq!(sys.modes(), &[a, b, c]);
        let g = |sub, sup| slow_coupling(sub, sup, om, 1.0).unwrap();
        // ∂B_111 = G^{111}_{121} C_121 − G^{111}_{211} C_211, ...
        assert_eq!(sys.rate(a, b), g(b, a));
        assert_eq!(sys.rate(a, c), -g(c, a));
        assert_eq!(sys.rate(b, a), g(a, b));
        assert_eq!(sys.rate(c, a), -g(a, c));
        assert_eq!(sys.rate(b, c), 0.0);
        assert_eq!(sys.rate(c, b), 0.0);
        assert_eq!(sys.rate(a, a), 0.0);
    }

    #[test]
    fn rates_match_secular_term_matching() {
        // Oracle: collecting e^{±iω_m t} terms of the first-order equation
        // gives K_mn = W_mn Ω (Ω − 2ω_n) / (4 ω_m).
        for om in [three_mode_drive_frequency(1.0), 22.0, 31.5] {
            let pairs: Vec<_> = find_resonant_pairs(om, 1.0, 6, 0.2)
                .unwrap()
                .into_iter()
                .filter(|p| p.axis != Axis::XY)
                .map(|p| ResonantPair { detuning: 0.0, ..p })
                .collect();
            for p in &pairs {
                // exact resonance is assumed by the reduction: use ω_lo + ω_hi
                let om = mode_frequency(p.lo, 1.0) + mode_frequency(p.hi, 1.0);
                let sys = build_slow_system(core::slice::from_ref(p), om, 1.0).unwrap();
                for (x, y) in [(p.lo, p.hi), (p.hi, p.lo)] {
                    let (wx, wy) = (mode_frequency(x, 1.0), mode_frequency(y, 1.0));
                    let want = coupling_weight(x, y) * om * (om - 2.0 * wy) / (4.0 * wx);
                    assert_close!(sys.rate(x, y), want, 1e-12 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn lambda_squared_closed_form() {
        let l2 = three_mode().lambda_squared().unwrap();
        let want = 2f64.sqrt() * PI * PI / 3.0;
        assert!(((l2 - want) / want).abs() <= 1e-12);
        assert_close!(lambda(), 2.156983109134744, 1e-12);
        assert!(three_mode().growth().unwrap().is_amplifying());
    }

    #[test]
    fn empty_system_is_static() {
        let sys = build_slow_system(&[], 10.0, 1.0).unwrap();
        assert!(sys.is_empty());
        assert_eq!(sys.star(), None);
        let amps = integrate_reduced(&sys, 1.0, 0.1).unwrap();
        assert!(amps.b.is_empty() && amps.c.is_empty());
    }

    #[test]
    fn single_pair_reduces_to_one_product() {
        let om = three_mode_drive_frequency(1.0);
        let pair = find_resonant_pairs(om, 1.0, 3, 1e-9).unwrap()[0];
        let sys = build_slow_system(&[pair], om, 1.0).unwrap();
        assert_eq!(sys.len(), 2);
        let (a, b) = (m(1, 1, 1), m(1, 2, 1));
        let g = |sub, sup| slow_coupling(sub, sup, om, 1.0).unwrap();
        assert_close!(sys.lambda_squared().unwrap(), g(b, a) * g(a, b), 1e-14);
        let num = integrate_reduced(&sys, 1.5, 1e-4).unwrap();
        let ana = sys.solve_analytic(1.5).unwrap();
        for (x, y) in num.b.iter().chain(&num.c).zip(ana.b.iter().chain(&ana.c)) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn analytic_initial_state() {
        let amps = solve_three_mode_analytic(three_mode_drive_frequency(1.0), 1.0, 0.0).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(amps.b(i, k), C64::new(0.0, 0.0));
                let want = if i == k {
                    1.0 / (2.0 * amps.omegas[k]).sqrt()
                } else {
                    0.0
                };
                assert_close!(amps.c(i, k).re, want, 1e-16);
            }
        }
    }

    #[test]
    fn analytic_b_entry() {
        let amps = solve_three_mode_analytic(three_mode_drive_frequency(1.0), 1.0, 1.0).unwrap();
        let (i, k) = (
            amps.index_of(m(1, 2, 1)).unwrap(),
            amps.index_of(m(1, 1, 1)).unwrap(),
        );
        assert_close!(amps.b(i, k).re, -0.7686752035635825, 1e-12);
    }

    #[test]
    fn analytic_rejects_other_drives() {
        let om = three_mode_drive_frequency(1.0);
        assert!(matches!(
            solve_three_mode_analytic(om * 1.01, 1.0, 1.0),
            Err(Error::NotThreeModeDrive { .. })
        ));
        assert!(solve_three_mode_analytic(om, 1.0, -1.0).is_err());
        assert!(solve_three_mode_analytic(om / 2.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn numeric_tracks_analytic() {
        let sys = three_mode();
        let om = three_mode_drive_frequency(1.0);
        for amps in integrate_reduced_trajectory(&sys, 2.0, 1e-4, 1000).unwrap() {
            let ana = solve_three_mode_analytic(om, 1.0, amps.tau).unwrap();
            for (x, y) in amps.b.iter().chain(&amps.c).zip(ana.b.iter().chain(&ana.c)) {
                assert!((x - y).norm() <= 1e-8, "tau {}", amps.tau);
            }
        }
    }

    #[test]
    fn particle_numbers_follow_sinh_squared() {
        let om = three_mode_drive_frequency(1.0);
        let mut last = -1.0;
        for tau in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
            let amps = solve_three_mode_analytic(om, 1.0, tau).unwrap();
            let s2 = (lambda() * tau).sinh().powi(2);
            let n111 = particle_number(&amps, m(1, 1, 1)).unwrap();
            assert_close!(n111, s2, 1e-10 * s2.max(1e-300));
            assert_close!(
                particle_number(&amps, m(1, 2, 1)).unwrap(),
                s2 / 2.0,
                1e-10 * s2
            );
            assert_close!(
                particle_number(&amps, m(2, 1, 1)).unwrap(),
                s2 / 2.0,
                1e-10 * s2
            );
            assert!(n111 > last);
            last = n111;
        }
        let amps = solve_three_mode_analytic(om, 1.0, 1.0).unwrap();
        assert_eq!(
            amps.particle_number(m(2, 2, 1)),
            Err(Error::ModeNotInBasis(m(2, 2, 1)))
        );
    }

    #[test]
    fn reduced_at_matches_trajectory() {
        let sys = three_mode();
        let traj = integrate_reduced_trajectory(&sys, 1.0, 1e-3, 250).unwrap();
        let taus: Vec<f64> = traj.iter().map(|a| a.tau).collect();
        let at = integrate_reduced_at(&sys, &taus, 1e-3).unwrap();
        for (a, b) in traj.iter().zip(&at) {
            assert_eq!(a.tau, b.tau);
            for (x, y) in a.b.iter().zip(&b.b) {
                assert!((x - y).norm() <= 1e-12);
            }
        }
        assert!(integrate_reduced_at(&sys, &[0.5, 0.2], 1e-3).is_err());
        assert!(integrate_reduced_at(&sys, &[], 1e-3).unwrap().is_empty());
    }

    #[test]
    fn bogoliubov_form_is_conserved() {
        let sys = three_mode();
        for amps in integrate_reduced_trajectory(&sys, 2.0, 1e-3, 50).unwrap() {
            for k in 0..3 {
                assert!((amps.bogoliubov_norm(k) - 1.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn lambda_is_relabeling_invariant() {
        // (1,2,1)+(1,3,1) and its x↔y image
        let om = mode_frequency(m(1, 2, 1), 1.0) + mode_frequency(m(1, 3, 1), 1.0);
        let pairs = find_resonant_pairs(om, 1.0, 4, 1e-9).unwrap();
        assert!(!pairs.is_empty());
        let swap = |p: &ResonantPair| {
            let s = |q: ModeIndex| m(q.ny(), q.nx(), q.nz());
            ResonantPair {
                lo: s(p.lo),
                hi: s(p.hi),
                axis: match p.axis {
                    Axis::X => Axis::Y,
                    Axis::Y => Axis::X,
                    Axis::XY => Axis::XY,
                },
                ..*p
            }
        };
        let hub = m(1, 2, 1);
        let single: Vec<_> = pairs
            .iter()
            .copied()
            .filter(|p| p.axis != Axis::XY && p.involves(hub))
            .collect();
        let mirrored: Vec<_> = single.iter().map(swap).collect();
        let a = build_slow_system(&single, om, 1.0).unwrap();
        let b = build_slow_system(&mirrored, om, 1.0).unwrap();
        let (la, lb) = (a.lambda_squared().unwrap(), b.lambda_squared().unwrap());
        assert_close!(la, lb, 1e-12 * la.abs());
    }

    #[test]
    fn oscillating_star_solution() {
        let modes = vec![m(1, 1, 1), m(1, 2, 1)];
        let omegas = vec![3.0, 5.0];
        // K_01 K_10 < 0
        let sys = SlowSystem::from_matrix(modes, omegas, vec![0.0, 0.7, -1.1, 0.0]).unwrap();
        assert!(matches!(sys.growth(), Some(SlowGrowth::Oscillating { .. })));
        let num = integrate_reduced(&sys, 3.0, 1e-3).unwrap();
        let ana = sys.solve_analytic(3.0).unwrap();
        for (x, y) in num.b.iter().chain(&num.c).zip(ana.b.iter().chain(&ana.c)) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn neutral_star_solution() {
        let sys = SlowSystem::from_matrix(
            vec![m(1, 1, 1), m(2, 1, 1)],
            vec![2.0, 4.0],
            vec![0.0, 0.5, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(sys.growth(), Some(SlowGrowth::Neutral));
        let num = integrate_reduced(&sys, 2.0, 1e-3).unwrap();
        let ana = sys.solve_analytic(2.0).unwrap();
        for (x, y) in num.b.iter().chain(&num.c).zip(ana.b.iter().chain(&ana.c)) {
            assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn rejects_unsupported_pairs() {
        let diff = ResonantPair {
            lo: m(1, 1, 1),
            hi: m(1, 2, 1),
            detuning: 0.0,
            axis: Axis::Y,
            kind: MatchKind::Difference,
        };
        assert!(matches!(
            build_slow_system(&[diff], 5.0, 1.0),
            Err(Error::UnsupportedMatch { .. })
        ));
        let xy = ResonantPair {
            lo: m(1, 2, 1),
            hi: m(2, 1, 1),
            detuning: 0.0,
            axis: Axis::XY,
            kind: MatchKind::Sum,
        };
        assert!(matches!(
            build_slow_system(&[xy], 5.0, 1.0),
            Err(Error::UnsupportedCoupling { .. })
        ));
        assert!(integrate_reduced(&three_mode(), 1.0, 0.0).is_err());
        assert!(integrate_reduced(&three_mode(), -1.0, 0.1).is_err());
    }
}
