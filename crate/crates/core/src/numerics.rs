//! Shared numerical kernels: finite-difference weights, spectral
//! differentiation on the circle, least-squares line fits and a
//! tridiagonal solver.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Fornberg's algorithm: weights for the `order`-th derivative at `x0`
/// from values at `nodes`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Derivative of samples on a uniform grid with spacing `h`, using
/// `width`-point stencils (centred in the interior, shifted at the edges).
#[derive(Debug, Clone)]
pub struct UniformDifferentiator {
    width: usize,
    order: usize,
    /// `weights[s]` is the stencil whose evaluation point sits at offset `s`
    /// inside the stencil, in units of `h`.
    weights: Vec<Vec<f64>>,
}

impl UniformDifferentiator {
    pub fn new(width: usize, order: usize) -> Self {
        assert!(width > order, "stencil too narrow for derivative order");
        let nodes: Vec<f64> = (0..width).map(|k| k as f64).collect();
        let weights = (0..width)
            .map(|s| fornberg_weights(s as f64, &nodes, order))
            .collect();
        UniformDifferentiator {
            width,
            order,
            weights,
        }
    }

    pub fn apply(&self, values: &[f64], h: f64) -> Vec<f64> {
        let n = values.len();
        assert!(n >= self.width, "need at least {} samples", self.width);
        let half = self.width / 2;
        let scale = h.powi(self.order as i32);
        (0..n)
            .map(|i| {
                let start = i.saturating_sub(half).min(n - self.width);
                let w = &self.weights[i - start];
                let acc: f64 = w
                    .iter()
                    .zip(&values[start..start + self.width])
                    .map(|(a, b)| a * b)
                    .sum();
                acc / scale
            })
            .collect()
    }

    /// Complex-valued variant, applied to real and imaginary parts separately.
    pub fn apply_complex(&self, values: &[Complex64], h: f64) -> Vec<Complex64> {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        self.apply(&re, h)
            .into_iter()
            .zip(self.apply(&im, h))
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }
}

/// Spectral `∂_θ` for periodic samples on `n` equispaced nodes.
pub struct SpectralDerivative {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralDerivative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralDerivative").field("n", &self.n).finish()
    }
}

impl SpectralDerivative {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        SpectralDerivative {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Signed wavenumber of FFT bin `k`. The Nyquist bin is treated as zero
    /// so that the derivative of real data stays real.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n;
        if 2 * k == n {
            0.0
        } else if k < n.div_ceil(2) {
            k as f64
        } else {
            k as f64 - n as f64
        }
    }

    pub fn differentiate(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n);
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::new(0.0, self.wavenumber(k));
        }
        self.inverse.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|v| v * s).collect()
    }

    /// Fourier coefficients `c_k` with `f(θ_j) = Σ c_k e^{ikθ_j}`.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|v| v * s).collect()
    }

    pub fn synthesize(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coefficients.to_vec();
        self.inverse.process(&mut buf);
        buf
    }
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("line fit needs at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || !sxy.is_finite() {
        return Err(Error::Singular("degenerate abscissae in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Solve a tridiagonal system in place (Thomas algorithm, no pivoting).
/// `lower[i]` couples row `i+1` to column `i`, `upper[i]` row `i` to column `i+1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::invalid("tridiagonal dimensions disagree"));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// `count` points `exp(x)` with `x` uniform on `[ln lo, ln hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                (a + h * i as f64).exp()
            }
        })
        .collect()
}
