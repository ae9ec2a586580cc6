//! Mode-wise Poisson problem on the punctured disk.
//!
//! `−(u″ + u′/r − ν²u/r²) = g` with `u(1) = 0` and `u ~ r^{|ν|}` at 0. In
//! `x = log r` this reads `−u_xx + ν²u = r²g`; the inner condition becomes
//! the Robin condition `u_x = |ν|u`, which selects the decaying branch.

use serde::Serialize;

use super::RadialGrid;
use crate::error::{Error, Result};
use crate::numerics::{fit_line, solve_tridiagonal, LineFit};

#[derive(Debug, Clone, Serialize)]
pub struct PoissonSolution {
    pub nu: f64,
    pub delta: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl PoissonSolution {
    /// Log-log slope of `|u|` over nodes in `[r_lo, r_hi]`.
    pub fn inner_exponent(&self, r_lo: f64, r_hi: f64) -> Result<LineFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .r
            .iter()
            .zip(&self.u)
            .filter(|(r, u)| (r_lo..=r_hi).contains(*r) && u.abs() > 0.0)
            .map(|(r, u)| (r.ln(), u.abs().ln()))
            .unzip();
        fit_line(&x, &y)
    }
}

fn check_mode(nu: f64) -> Result<()> {
    let m = 2.0 * nu;
    if !m.is_finite() || (m - m.round()).abs() > 1e-12 || (m.round() as i64) % 2 == 0 {
        return Err(Error::invalid(format!("ν = {nu} is not in Z + 1/2")));
    }
    Ok(())
}

// Rows of the tridiagonal system on the unknowns 0..n−1; `lower[i]` couples
// row i + 1 to row i and `upper[i]` couples row i to row i + 1.
fn rows(nu: f64, grid: &RadialGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.n - 1;
    let h2 = grid.h * grid.h;
    let lower = vec![-1.0 / h2; n - 1];
    let mut diag = vec![2.0 / h2 + nu * nu; n];
    let mut upper = vec![-1.0 / h2; n - 1];
    // ghost node u_{−1} = u_1 − 2h|ν|u_0
    diag[0] += 2.0 * grid.h * nu.abs() / h2;
    upper[0] = -2.0 / h2;
    (lower, diag, upper)
}

/// Solves the mode-`ν` problem for `ν ∈ Z + 1/2` with data `rhs` sampled on
/// all grid nodes. The weight `δ` names the weighted space
/// `r^{δ}L²`-type setting in which the problem is posed; it must lie in the
/// window `(1/2, 3/2)` where the operator is an isomorphism.
pub fn conic_poisson_solve(nu: f64, rhs: &[f64], grid: &RadialGrid, delta: f64) -> Result<PoissonSolution> {
    check_mode(nu)?;
    if !(delta > 0.5 && delta < 1.5) {
        return Err(Error::invalid(format!(
            "δ = {delta} is outside the isomorphism window (1/2, 3/2)"
        )));
    }
    if rhs.len() != grid.n || rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("right-hand side must be finite and sampled on every node"));
    }
    let (lower, diag, upper) = rows(nu, grid);
    let b: Vec<f64> = (0..grid.n - 1).map(|i| grid.r[i] * grid.r[i] * rhs[i]).collect();
    let mut u = solve_tridiagonal(&lower, &diag, &upper, &b)?;
    u.push(0.0);
    Ok(PoissonSolution {
        nu,
        delta,
        r: grid.r.clone(),
        u,
    })
}

/// The discrete operator used by [`conic_poisson_solve`], applied to `u`
/// (sampled on every node, with `u(1)` ignored and taken as 0). The last
/// entry of the result is 0.
pub fn apply_conic_operator(nu: f64, u: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    check_mode(nu)?;
    if u.len() != grid.n {
        return Err(Error::invalid("u must be sampled on every node"));
    }
    let (lower, diag, upper) = rows(nu, grid);
    let n = grid.n - 1;
    let mut out = Vec::with_capacity(grid.n);
    for i in 0..n {
        let mut v = diag[i] * u[i];
        if i > 0 {
            v += lower[i - 1] * u[i - 1];
        }
        if i + 1 < n {
            v += upper[i] * u[i + 1];
        }
        out.push(v / (grid.r[i] * grid.r[i]));
    }
    out.push(0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(1e-6, 2000).unwrap()
    }

    fn bump(r: f64) -> f64 {
        if r > 0.5 && r < 0.8 {
            let s = (r - 0.5) / 0.3;
            (-1.0 / (s * (1.0 - s))).exp() * 50.0
        } else {
            0.0
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = grid();
        let s = conic_poisson_solve(0.5, &vec![0.0; g.n], &g, 1.0).unwrap();
        assert!(s.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn annulus_data_decays_like_sqrt_r() {
        let g = grid();
        let rhs: Vec<f64> = g.r.iter().map(|&r| bump(r)).collect();
        let s = conic_poisson_solve(0.5, &rhs, &g, 1.0).unwrap();
        let fit = s.inner_exponent(1e-3, 1e-2).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.025, "{}", fit.slope);
        let fit3 = conic_poisson_solve(1.5, &rhs, &g, 1.0).unwrap().inner_exponent(1e-3, 1e-2).unwrap();
        assert!((fit3.slope - 1.5).abs() < 0.025);
    }

    #[test]
    fn manufactured_solution_round_trip() {
        let g = grid();
        let exact: Vec<f64> = g.r.iter().map(|r| r.sqrt() * (1.0 - r)).collect();
        let rhs = apply_conic_operator(0.5, &exact, &g).unwrap();
        let s = conic_poisson_solve(0.5, &rhs, &g, 1.0).unwrap();
        let err = s.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        // against the continuous right-hand side 2r^{−1/2} the error is O(h²)
        let cont: Vec<f64> = g.r.iter().map(|r| 2.0 / r.sqrt()).collect();
        let s = conic_poisson_solve(0.5, &cont, &g, 1.0).unwrap();
        let err = s.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn weight_outside_window_is_rejected() {
        let g = grid();
        let rhs = vec![0.0; g.n];
        for d in [0.5, 1.5, 0.2, 2.0] {
            assert!(matches!(conic_poisson_solve(0.5, &rhs, &g, d), Err(Error::InvalidInput(_))));
        }
        assert!(matches!(conic_poisson_solve(1.0, &rhs, &g, 1.0), Err(Error::InvalidInput(_))));
    }
}
