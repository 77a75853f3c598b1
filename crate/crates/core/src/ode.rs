use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Classical fourth-order Runge-Kutta with preallocated stages.
pub(crate) struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub(crate) fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    pub(crate) fn step<F>(&mut self, mut f: F, t: f64, h: f64, y: &mut [C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        f(t, y, &mut self.k1);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k1);
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k2);
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, h, &self.k3);
        f(t + h, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }
}

fn axpy(out: &mut [C64], y: &[C64], a: f64, k: &[C64]) {
    for ((o, &yi), &ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + ki * a;
    }
}

/// Splits `[0, t_final]` into the fewest equal steps no longer than `dt`.
pub(crate) fn uniform_steps(t_final: f64, dt: f64) -> (usize, f64) {
    if t_final <= 0.0 {
        return (0, dt);
    }
    let n = libm::ceil(t_final / dt - 1e-9).max(1.0) as usize;
    (n, t_final / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_is_fourth_order() {
        let run = |h: f64| {
            let (n, h) = uniform_steps(1.0, h);
            let mut y = [C64::new(1.0, 0.0)];
            let mut rk = Rk4::new(1);
            for k in 0..n {
                rk.step(
                    |_, y, dy| dy[0] = y[0] * C64::new(0.0, 3.0),
                    k as f64 * h,
                    h,
                    &mut y,
                );
            }
            (y[0] - C64::from_polar(1.0, 3.0)).norm()
        };
        let ratio = run(0.02) / run(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn step_splitting() {
        assert_eq!(uniform_steps(200.0, 0.005), (40000, 0.005));
        let (n, h) = uniform_steps(1.0, 0.3);
        assert_eq!(n, 4);
        assert_close!(h, 0.25, 1e-15);
        assert_eq!(uniform_steps(0.0, 0.1).0, 0);
    }
}
