//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

/// Error control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state that persists across consecutive calls, so that the
/// step size carries over between output nodes.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    tol: Tolerance,
    h: Option<f64>,
    pub steps: usize,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(tol: Tolerance) -> Self {
        Dopri5 {
            tol,
            h: None,
            steps: 0,
        }
    }

    /// Advance `y` from `x0` to `x1` (either direction).
    pub fn integrate<F>(&mut self, f: &F, x0: f64, x1: f64, y: &mut [f64; N]) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        let mut x = x0;
        let mut h = self
            .h
            .map(|h| h.abs().min(span.abs()))
            .unwrap_or_else(|| (span.abs() * 1e-3).max(1e-8).min(span.abs()));
        let mut k1 = f(x, y);
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 1e-15 * x1.abs().max(1.0) {
                break;
            }
            let last = h >= remaining;
            let step = if last { remaining } else { h } * dir;

            let stage = |coeffs: &[(f64, &[f64; N])]| {
                let mut out = *y;
                for (c, k) in coeffs {
                    for i in 0..N {
                        out[i] += step * c * k[i];
                    }
                }
                out
            };
            let k2 = f(x + C2 * step, &stage(&[(A21, &k1)]));
            let k3 = f(x + C3 * step, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * step, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * step,
                &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + step,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + step, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h *= 0.25;
                if h < 1e-14 {
                    return Err(Error::Convergence {
                        iterations: self.steps,
                        detail: format!("non-finite state near x = {x}"),
                    });
                }
                continue;
            }
            self.steps += 1;
            if self.steps > self.tol.max_steps {
                return Err(Error::Convergence {
                    iterations: self.steps,
                    detail: "step budget exhausted".into(),
                });
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + step };
                *y = y_new;
                k1 = k7;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h *= grow;
                }
                self.h = Some(if last { h.max(step.abs()) } else { h });
                if last {
                    break;
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::Convergence {
                        iterations: self.steps,
                        detail: format!("step size underflow near x = {x}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let mut solver = Dopri5::new(Tolerance::default());
        solver
            .integrate(&f, 0.0, 2.0 * std::f64::consts::PI, &mut y)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn backward_integration() {
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut y = [1.0];
        Dopri5::new(Tolerance::default())
            .integrate(&f, 1.0, 0.0, &mut y)
            .unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-12);
    }
}
