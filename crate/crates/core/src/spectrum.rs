//! Static cavity spectrum and the search for resonantly coupled mode pairs.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::coupling::{coupling_weight, RotationProfile};
use crate::error::Error;
use crate::Result;

/// Mode numbers `(n_x, n_y, n_z)` of a standing wave in the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    nx: u32,
    ny: u32,
    nz: u32,
}

impl ModeIndex {
    pub fn new(nx: u32, ny: u32, nz: u32) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidMode { nx, ny, nz });
        }
        Ok(Self { nx, ny, nz })
    }

    pub fn nx(&self) -> u32 {
        self.nx
    }

    pub fn ny(&self) -> u32 {
        self.ny
    }

    pub fn nz(&self) -> u32 {
        self.nz
    }

    pub fn squared_norm(&self) -> u64 {
        let (x, y, z) = (self.nx as u64, self.ny as u64, self.nz as u64);
        x * x + y * y + z * z
    }

    /// Compact `nx-ny-nz` form used for file columns and keys.
    pub fn label(&self) -> alloc::string::String {
        alloc::format!("{}-{}-{}", self.nx, self.ny, self.nz)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.nx, self.ny, self.nz)
    }
}

/// Accepts `1,2,1`, `(1,2,1)`, `1-2-1` and `1 2 1`.
impl FromStr for ModeIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseMode(s.to_string());
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = body
            .split(|c: char| c == ',' || c == '-' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<u32>().map_err(|_| bad()));
        let (Some(x), Some(y), Some(z), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        ModeIndex::new(x?, y?, z?)
    }
}

/// Angular frequency `π/L · |n|` of a static cavity mode.
pub fn mode_frequency(mode: ModeIndex, length: f64) -> f64 {
    PI / length * libm::sqrt(mode.squared_norm() as f64)
}

/// Drive frequency `(√3 + √6)π/L` that couples (1,1,1) to (1,2,1) and (2,1,1).
pub fn three_mode_drive_frequency(length: f64) -> f64 {
    (libm::sqrt(3.0) + libm::sqrt(6.0)) * PI / length
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Sinusoidal,
    ConstantAcceleration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedRegime {
    Slow,
    /// Outside the small-velocity regime; `speed` is `ε·Ω·L`.
    Marginal {
        speed: f64,
    },
}

/// Cavity and drive parameters, `c = 1`.
///
/// For [`ProfileKind::ConstantAcceleration`] `epsilon` is the angular
/// acceleration and `omega` only sets the slow-time scale of the matching
/// sinusoidal run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    pub length: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub profile: ProfileKind,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            epsilon: 0.01,
            omega: three_mode_drive_frequency(1.0),
            profile: ProfileKind::Sinusoidal,
        }
    }
}

impl CavityConfig {
    pub const WARN_SPEED: f64 = 0.01;

    pub fn validate(&self) -> Result<SpeedRegime> {
        positive("length", self.length)?;
        positive("omega", self.omega)?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                requirement: "finite and >= 0",
            });
        }
        if self.profile == ProfileKind::ConstantAcceleration {
            return Ok(SpeedRegime::Slow);
        }
        // the far edge sits √2·L from the rotation axis
        let speed = self.epsilon * self.omega * self.length;
        if libm::sqrt(2.0) * speed >= 1.0 {
            return Err(Error::Superluminal {
                speed: libm::sqrt(2.0) * speed,
            });
        }
        Ok(if speed > Self::WARN_SPEED {
            SpeedRegime::Marginal { speed }
        } else {
            SpeedRegime::Slow
        })
    }

    pub fn rotation_profile(&self) -> RotationProfile {
        match self.profile {
            ProfileKind::Sinusoidal => RotationProfile::Sinusoidal {
                amplitude: self.epsilon,
                frequency: self.omega,
            },
            ProfileKind::ConstantAcceleration => RotationProfile::ConstantAcceleration {
                acceleration: self.epsilon,
            },
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            requirement: "finite and > 0",
        })
    }
}

/// Axes along which the two modes of a pair differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    XY,
}

impl Axis {
    pub fn between(a: ModeIndex, b: ModeIndex) -> Option<Axis> {
        match (a.nx != b.nx, a.ny != b.ny) {
            (true, false) => Some(Axis::X),
            (false, true) => Some(Axis::Y),
            (true, true) => Some(Axis::XY),
            (false, false) => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::XY => "xy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchKind {
    /// `ω_lo + ω_hi ≈ Ω`
    Sum,
    /// `ω_hi − ω_lo ≈ Ω`
    Difference,
}

impl MatchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatchKind::Sum => "sum",
            MatchKind::Difference => "difference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantPair {
    pub lo: ModeIndex,
    pub hi: ModeIndex,
    pub detuning: f64,
    pub axis: Axis,
    pub kind: MatchKind,
}

impl ResonantPair {
    pub fn involves(&self, mode: ModeIndex) -> bool {
        self.lo == mode || self.hi == mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceSearch {
    pub omega: f64,
    pub length: f64,
    pub max_index: u32,
    pub tol: f64,
    pub include_difference: bool,
}

impl ResonanceSearch {
    pub fn new(omega: f64, length: f64, max_index: u32) -> Self {
        Self {
            omega,
            length,
            max_index,
            tol: Self::default_tol(length),
            include_difference: false,
        }
    }

    pub fn default_tol(length: f64) -> f64 {
        1e-9 * PI / length
    }
}

/// All coupled pairs with `|ω_m + ω_n − Ω| ≤ tol`, components up to `max_index`.
pub fn find_resonant_pairs(
    omega: f64,
    length: f64,
    max_index: u32,
    tol: f64,
) -> Result<Vec<ResonantPair>> {
    find_resonant_pairs_with(&ResonanceSearch {
        omega,
        length,
        max_index,
        tol,
        include_difference: false,
    })
}

pub fn find_resonant_pairs_with(search: &ResonanceSearch) -> Result<Vec<ResonantPair>> {
    positive("omega", search.omega)?;
    positive("length", search.length)?;
    positive("tol", search.tol)?;
    if search.max_index == 0 {
        return Err(Error::InvalidParameter {
            name: "max_index",
            value: 0.0,
            requirement: ">= 1",
        });
    }

    let n = search.max_index;
    let mut out = Vec::new();
    for nz in 1..=n {
        // rotation about z never mixes n_z blocks
        let block: Vec<(ModeIndex, f64)> = (1..=n)
            .flat_map(|nx| (1..=n).map(move |ny| (nx, ny)))
            .map(|(nx, ny)| {
                let m = ModeIndex { nx, ny, nz };
                (m, mode_frequency(m, search.length))
            })
            .collect();
        for (i, &(a, wa)) in block.iter().enumerate() {
            for &(b, wb) in &block[i + 1..] {
                let Some(axis) = Axis::between(a, b) else {
                    continue;
                };
                if coupling_weight(a, b) == 0.0 {
                    continue;
                }
                let (lo, hi, wlo, whi) = match wa.total_cmp(&wb).then(a.cmp(&b)) {
                    Ordering::Greater => (b, a, wb, wa),
                    _ => (a, b, wa, wb),
                };
                let sum = wlo + whi - search.omega;
                if libm::fabs(sum) <= search.tol {
                    out.push(ResonantPair {
                        lo,
                        hi,
                        detuning: sum,
                        axis,
                        kind: MatchKind::Sum,
                    });
                }
                if search.include_difference {
                    let diff = whi - wlo - search.omega;
                    if libm::fabs(diff) <= search.tol {
                        out.push(ResonantPair {
                            lo,
                            hi,
                            detuning: diff,
                            axis,
                            kind: MatchKind::Difference,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|p, q| {
        libm::fabs(p.detuning)
            .total_cmp(&libm::fabs(q.detuning))
            .then(p.lo.cmp(&q.lo))
            .then(p.hi.cmp(&q.hi))
            .then(p.kind.cmp(&q.kind))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(x: u32, y: u32, z: u32) -> ModeIndex {
        ModeIndex::new(x, y, z).unwrap()
    }

    #[test]
    fn zero_index_rejected() {
        assert!(matches!(
            ModeIndex::new(0, 1, 1),
            Err(Error::InvalidMode { .. })
        ));
        assert!(ModeIndex::new(1, 1, 0).is_err());
    }

    #[test]
    fn parse_forms() {
        for s in ["1,2,1", "(1,2,1)", "1-2-1", " 1 2 1 "] {
            assert_eq!(s.parse::<ModeIndex>().unwrap(), m(1, 2, 1), "{s}");
        }
        for s in ["1,2", "1,2,3,4", "a,b,c", "0,1,1", ""] {
            assert!(s.parse::<ModeIndex>().is_err(), "{s}");
        }
        assert_eq!(
            m(3, 10, 2).label().parse::<ModeIndex>().unwrap(),
            m(3, 10, 2)
        );
    }

    #[test]
    fn frequencies() {
        assert_close!(mode_frequency(m(1, 1, 1), 1.0), 5.441398092702653, 1e-12);
        assert_close!(mode_frequency(m(1, 2, 1), 1.0), 7.695298980971472, 1e-12);
        assert_close!(
            mode_frequency(m(1, 1, 1), 2.0),
            PI * 3f64.sqrt() / 2.0,
            1e-15
        );
    }

    #[test]
    fn three_mode_pairs() {
        let omega = three_mode_drive_frequency(1.0);
        let pairs = find_resonant_pairs(omega, 1.0, 3, 1e-9).unwrap();
        let got: Vec<_> = pairs.iter().map(|p| (p.lo, p.hi, p.axis)).collect();
        assert_eq!(
            got,
            [
                (m(1, 1, 1), m(1, 2, 1), Axis::Y),
                (m(1, 1, 1), m(2, 1, 1), Axis::X)
            ]
        );
        for p in &pairs {
            assert!(p.detuning.abs() <= 1e-9);
            assert_eq!(p.kind, MatchKind::Sum);
        }
    }

    #[test]
    fn below_spectrum_is_empty() {
        for n in [1, 3, 6] {
            assert!(find_resonant_pairs(PI, 1.0, n, 1e-9).unwrap().is_empty());
        }
    }

    #[test]
    fn double_lowest_frequency_only_matches_itself() {
        let omega = 2.0 * 3f64.sqrt() * PI;
        // oracle: every ordered pair within a block, self-pairs included
        let mut hits = Vec::new();
        for z in 1..=5 {
            for (ax, ay) in (1..=5).flat_map(|x| (1..=5).map(move |y| (x, y))) {
                for (bx, by) in (1..=5).flat_map(|x| (1..=5).map(move |y| (x, y))) {
                    let s = PI
                        * (((ax * ax + ay * ay + z * z) as f64).sqrt()
                            + ((bx * bx + by * by + z * z) as f64).sqrt());
                    if (s - omega).abs() <= 1e-9 {
                        hits.push(((ax, ay, z), (bx, by, z)));
                    }
                }
            }
        }
        assert_eq!(hits, [((1, 1, 1), (1, 1, 1))]);
        assert_eq!(g_self(), 0.0);
        assert!(find_resonant_pairs(omega, 1.0, 5, 1e-9).unwrap().is_empty());

        fn g_self() -> f64 {
            crate::coupling::g_scalar(1, 1)
        }
    }

    #[test]
    fn irrational_drive_has_no_exact_partner() {
        let omega = core::f64::consts::E * PI;
        for n in 1..=10 {
            assert!(
                find_resonant_pairs(omega, 1.0, n, 1e-12)
                    .unwrap()
                    .is_empty(),
                "n={n}"
            );
        }
    }

    #[test]
    fn wide_tolerance_reports_detuned_pairs() {
        let omega = three_mode_drive_frequency(1.0);
        let pairs = find_resonant_pairs(omega, 1.0, 5, 1e-3 * PI).unwrap();
        assert!(pairs.len() >= 2);
        assert!(pairs
            .windows(2)
            .all(|w| w[0].detuning.abs() <= w[1].detuning.abs()));
    }

    #[test]
    fn difference_matches_are_opt_in() {
        // ω_(1,2,1) − ω_(1,1,1) = (√6 − √3)π
        let omega = (6f64.sqrt() - 3f64.sqrt()) * PI;
        let mut search = ResonanceSearch::new(omega, 1.0, 3);
        assert!(find_resonant_pairs_with(&search).unwrap().is_empty());
        search.include_difference = true;
        let pairs = find_resonant_pairs_with(&search).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs
            .iter()
            .all(|p| p.kind == MatchKind::Difference && p.lo == m(1, 1, 1)));
    }

    #[test]
    fn bad_search_inputs() {
        assert!(find_resonant_pairs(1.0, 1.0, 0, 1e-9).is_err());
        assert!(find_resonant_pairs(1.0, 1.0, 2, 0.0).is_err());
        assert!(find_resonant_pairs(1.0, -1.0, 2, 1e-9).is_err());
    }

    #[test]
    fn cavity_validation() {
        let cfg = CavityConfig::default();
        assert!(matches!(cfg.validate(), Ok(SpeedRegime::Marginal { .. })));
        let slow = CavityConfig {
            epsilon: 1e-4,
            ..cfg
        };
        assert_eq!(slow.validate(), Ok(SpeedRegime::Slow));
        let still = CavityConfig {
            epsilon: 0.0,
            ..cfg
        };
        assert_eq!(still.validate(), Ok(SpeedRegime::Slow));
        let fast = CavityConfig {
            epsilon: 0.1,
            ..cfg
        };
        assert!(matches!(fast.validate(), Err(Error::Superluminal { .. })));
        assert!(CavityConfig { length: 0.0, ..cfg }.validate().is_err());
        assert!(CavityConfig {
            omega: f64::NAN,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(CavityConfig {
            epsilon: -0.1,
            ..cfg
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn frequency_increases_with_each_index(x in 1u32..40, y in 1u32..40, z in 1u32..40, l in 0.1f64..10.0) {
            let w = mode_frequency(m(x, y, z), l);
            prop_assert!(mode_frequency(m(x + 1, y, z), l) > w);
            prop_assert!(mode_frequency(m(x, y + 1, z), l) > w);
            prop_assert!(mode_frequency(m(x, y, z + 1), l) > w);
        }

        #[test]
        fn returned_pairs_satisfy_invariants(omega in 8.0f64..60.0, n in 1u32..6, tol_exp in -3.0f64..0.5) {
            let tol = 10f64.powf(tol_exp);
            for p in find_resonant_pairs(omega, 1.0, n, tol).unwrap() {
                prop_assert_eq!(p.lo.nz(), p.hi.nz());
                prop_assert!(p.detuning.abs() <= tol);
                let sum = mode_frequency(p.lo, 1.0) + mode_frequency(p.hi, 1.0) - omega;
                prop_assert_eq!(sum, p.detuning);
                if p.lo.nx() != p.hi.nx() {
                    prop_assert!((p.lo.nx() + p.hi.nx()) % 2 == 1);
                }
                if p.lo.ny() != p.hi.ny() {
                    prop_assert!((p.lo.ny() + p.hi.ny()) % 2 == 1);
                }
                prop_assert_eq!(Some(p.axis), Axis::between(p.lo, p.hi));
            }
        }

        #[test]
        fn length_scaling(omega in 8.0f64..40.0, n in 1u32..5) {
            let tol = 0.05;
            let a = find_resonant_pairs(omega, 1.0, n, tol).unwrap();
            let b = find_resonant_pairs(omega / 2.0, 2.0, n, tol / 2.0).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!((p.lo, p.hi), (q.lo, q.hi));
                prop_assert!((q.detuning - p.detuning / 2.0).abs() <= 1e-12);
            }
        }
    }
}
