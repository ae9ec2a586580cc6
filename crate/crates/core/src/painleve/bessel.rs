//! Modified Bessel functions of the second kind, orders 0 and 1.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the ascending series is used, above it quadrature.
const SERIES_CUTOFF: f64 = 2.0;

/// Macdonald function `K₀(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(if x <= SERIES_CUTOFF {
        k0_series(x)
    } else {
        k_integral(0.0, x)
    })
}

/// `K₁(x) = −K₀′(x)` for `x > 0`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(if x <= SERIES_CUTOFF {
        k1_series(x)
    } else {
        k_integral(1.0, x)
    })
}

fn check(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("Bessel K needs a positive argument, got {x}")))
    }
}

// K₀(x) = −(ln(x/2) + γ) I₀(x) + Σ_{k≥1} H_k (x²/4)^k / (k!)²
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -log_term * i0 + tail
}

// K₁(x) = 1/x + ln(x/2) I₁(x) − (x/4) Σ_{k≥0} (ψ(k+1) + ψ(k+2)) (x²/4)^k / (k!(k+1)!)
fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut digamma_k1 = -EULER_GAMMA;
    let mut digamma_k2 = 1.0 - EULER_GAMMA;
    let mut i1 = 0.0;
    let mut rest = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term *= q / (kf * (kf + 1.0));
            digamma_k1 += 1.0 / kf;
            digamma_k2 += 1.0 / (kf + 1.0);
        }
        i1 += term;
        rest += (digamma_k1 + digamma_k2) * term;
        if term < 1e-18 * i1.abs().max(1.0) {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * 0.5 * x * i1 - 0.25 * x * rest
}

// K_ν(x) = e^{−x} ∫₀^∞ e^{−x(cosh s − 1)} cosh(νs) ds by the trapezoid rule,
// which converges geometrically for this analytic, rapidly decaying integrand.
// The integrand has width ~ x^{−1/2}, so the step shrinks with x.
fn k_integral(nu: f64, x: f64) -> f64 {
    let h = (0.5 / x.sqrt()).min(0.1);
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let s = k as f64 * h;
        let v = (-x * (s.cosh() - 1.0)).exp() * (nu * s).cosh();
        sum += v;
        if v < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    (-x).exp() * h * sum
}
