//! Small-ρ expansion `e^{−ψ} = ρ^{1/3} Σ_j a_j σ^j` with `σ = ρ^{4/3}`.
//!
//! Writing `S(σ) = Σ a_j σ^j` and `L = log S`, the equation
//! `ψ_xx = ½ρ² sinh 2ψ` (with `x = log ρ`) becomes
//! `−(16/9)(σ∂_σ)² L = ¼(σ S^{−2} − σ² S²)`, which fixes `L_k` for `k ≥ 1`
//! from the coefficients of lower order.

use crate::error::{Error, Result};

/// Coefficients of `exp(Σ c_k σ^k)` up to the length of `c`.
fn exp_series(c: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; c.len()];
    e[0] = c[0].exp();
    for k in 1..c.len() {
        let acc: f64 = (1..=k).map(|j| j as f64 * c[j] * e[k - j]).sum();
        e[k] = acc / k as f64;
    }
    e
}

/// The first `n_terms` coefficients `a_0, …, a_{n−1}` of `S`, together with
/// those of `L = log S`.
fn coefficients(a0: f64, n_terms: usize) -> (Vec<f64>, Vec<f64>) {
    let mut log_s = vec![a0.ln()];
    for k in 1..n_terms {
        // σ S^{−2} and σ² S² only need L up to order k − 1.
        let mut lo = log_s.clone();
        lo.resize(k, 0.0);
        let minus_two: Vec<f64> = lo.iter().map(|v| -2.0 * v).collect();
        let plus_two: Vec<f64> = lo.iter().map(|v| 2.0 * v).collect();
        let inv_sq = exp_series(&minus_two);
        let sq = exp_series(&plus_two);
        let mut rhs = 0.25 * inv_sq[k - 1];
        if k >= 2 {
            rhs -= 0.25 * sq[k - 2];
        }
        log_s.push(-9.0 * rhs / (16.0 * (k * k) as f64));
    }
    (exp_series(&log_s), log_s)
}

/// Coefficients `a_0, …, a_{n−1}` of the small-ρ expansion.
pub fn series_coefficients(a0: f64, n_terms: usize) -> Vec<f64> {
    coefficients(a0, n_terms).0
}

/// Relative size of the first omitted term allowed by [`small_rho_series`].
pub const SERIES_TRUNCATION_TOL: f64 = 1e-12;

/// `(ψ, dψ/dρ)` from the truncated expansion with `n_terms` coefficients.
///
/// Refuses when the first omitted term, relative to the partial sum, exceeds
/// [`SERIES_TRUNCATION_TOL`].
pub fn small_rho_series(a0: f64, n_terms: usize, rho: f64) -> Result<(f64, f64)> {
    let (psi, psi_x, _) = small_rho_series_x(a0, n_terms, rho)?;
    Ok((psi, psi_x / rho))
}

/// `(ψ, ψ_x, ψ_xx)` in the log variable `x = log ρ`.
pub fn small_rho_series_x(a0: f64, n_terms: usize, rho: f64) -> Result<(f64, f64, f64)> {
    let (psi, q, psi_xx) = small_rho_series_q(a0, n_terms, rho)?;
    Ok((psi, q - 1.0 / 3.0, psi_xx))
}

/// `(ψ, ψ_x + 1/3, ψ_xx)`; the middle entry keeps full relative precision.
pub(crate) fn small_rho_series_q(a0: f64, n_terms: usize, rho: f64) -> Result<(f64, f64, f64)> {
    if !(a0 > 0.0) || n_terms == 0 {
        return Err(Error::invalid("series needs a₀ > 0 and at least one term"));
    }
    if !(rho > 0.0) {
        return Err(Error::domain(format!("series evaluated at ρ = {rho}")));
    }
    let (values, omitted) = evaluate(a0, n_terms, rho);
    if !(omitted <= SERIES_TRUNCATION_TOL) {
        return Err(Error::domain(format!(
            "small-ρ series truncation error {omitted:.3e} at ρ = {rho}; shrink ρ"
        )));
    }
    Ok(values)
}

/// Truncated series and the relative size of the first omitted term.
fn evaluate(a0: f64, n_terms: usize, rho: f64) -> ((f64, f64, f64), f64) {
    let (a, _) = coefficients(a0, n_terms + 1);
    let sigma = rho.powf(4.0 / 3.0);
    let mut s = 0.0;
    let mut ds = 0.0;
    let mut dds = 0.0;
    let mut p = 1.0;
    for (j, aj) in a.iter().take(n_terms).enumerate() {
        let jf = j as f64;
        s += aj * p;
        // σ∂_σ and (σ∂_σ)² of σ^j
        ds += jf * aj * p;
        dds += jf * jf * aj * p;
        p *= sigma;
    }
    let omitted = if s > 0.0 { (a[n_terms] * p / s).abs() } else { f64::INFINITY };
    // ψ = −x/3 − log S,   ∂_x = (4/3) σ∂_σ
    let l1 = ds / s;
    let l2 = dds / s - l1 * l1;
    let psi = -rho.ln() / 3.0 - s.ln();
    let q = -(4.0 / 3.0) * l1;
    let psi_xx = -(16.0 / 9.0) * l2;
    ((psi, q, psi_xx), omitted)
}
