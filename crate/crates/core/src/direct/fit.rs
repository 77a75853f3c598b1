use crate::error::Error;
use crate::Result;

/// Least-squares slope of `asinh(√N)` against slow time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub lambda_fit: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits `asinh(√N(τ)) ≈ a + λτ` over samples with `τ ∈ [lo, hi]`. Exact for
/// `N = sinh²(λτ)`.
pub fn fit_growth_rate(tau: &[f64], counts: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    if tau.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: tau.len(),
            found: counts.len(),
        });
    }
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidParameter {
            name: "window",
            value: lo,
            requirement: "below the window end",
        });
    }
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (&t, &c) in tau.iter().zip(counts) {
        if c.is_nan() || c < 0.0 {
            return Err(Error::NegativeCount(c));
        }
        if t >= lo && t <= hi {
            n += 1;
            sx += t;
            sy += libm::asinh(libm::sqrt(c));
        }
    }
    if n < 3 {
        return Err(Error::TooFewSamples { found: n });
    }
    let (mx, my) = (sx / n as f64, sy / n as f64);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&t, &c) in tau.iter().zip(counts) {
        if t >= lo && t <= hi {
            let (dx, dy) = (t - mx, libm::asinh(libm::sqrt(c)) - my);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "window",
            value: lo,
            requirement: "spanning distinct times",
        });
    }
    let slope = sxy / sxx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(GrowthFit {
        lambda_fit: slope,
        r_squared,
        window,
        samples: n,
    })
}
