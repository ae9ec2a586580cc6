//! The desingularized fiducial family `(A_t, Φ_t)` on the unit disk, built from
//! the profile `ψ` through `h_t(r) = ψ((8/3) t r^{3/2})`, and its limiting pair.

mod pair;

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use pair::{DiskPair, HitchinResidual, PairKind, DEFAULT_N_THETA};
pub(crate) use pair::{check_grid, PolarDerivatives};

use crate::algebra::TracelessMatrix;
use crate::error::{Error, Result};
use crate::numerics::{fit_line, geometric_grid, LineFit, UniformDifferentiator};
use crate::painleve::PsiProfile;
use crate::report::fmt_f64;

/// Default radial grid: 400 geometric nodes on `[10⁻³, 1]`.
pub fn default_radial_grid() -> Vec<f64> {
    geometric_grid(1e-3, 1.0, 400)
}

/// `ρ = (8/3) t r^{3/2}`.
pub fn rho_of(t: f64, r: f64) -> f64 {
    8.0 / 3.0 * t * r.powf(1.5)
}

/// Radial data of the fiducial solution at a fixed `t`.
#[derive(Debug, Clone)]
pub struct FiducialFamily {
    pub t: f64,
    pub r: Vec<f64>,
    pub h: Vec<f64>,
    /// `r ∂_r h`.
    pub r_dh: Vec<f64>,
    /// `(r∂_r)² h`.
    pub rr_h: Vec<f64>,
    pub f: Vec<f64>,
    /// `∂_r f`.
    pub df: Vec<f64>,
    pub profile: Arc<PsiProfile>,
}

/// Builds the family at `t` on the radial grid `r`.
///
/// Derivatives of `h` come from the profile by the chain rule
/// `r∂_r = (3/2)ρ∂_ρ`, never from differences of `h`.
pub fn build_family(t: f64, profile: &Arc<PsiProfile>, r: &[f64]) -> Result<FiducialFamily> {
    sample_family(t, profile, r, false)
}

/// As [`build_family`] but without the range limit on `ρ`: below the profile
/// grid the series is used and beyond it the Bessel tail.
pub fn build_family_extended(t: f64, profile: &Arc<PsiProfile>, r: &[f64]) -> Result<FiducialFamily> {
    sample_family(t, profile, r, true)
}

fn sample_family(t: f64, profile: &Arc<PsiProfile>, r: &[f64], extended: bool) -> Result<FiducialFamily> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    if r.is_empty() || r.iter().any(|&v| !(v > 0.0)) || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radial grid must be positive and increasing"));
    }
    let n = r.len();
    let mut fam = FiducialFamily {
        t,
        r: r.to_vec(),
        h: Vec::with_capacity(n),
        r_dh: Vec::with_capacity(n),
        rr_h: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        df: Vec::with_capacity(n),
        profile: Arc::clone(profile),
    };
    for &ri in r {
        let rho = rho_of(t, ri);
        let (psi, psi_x, psi_xx, q) = if extended {
            let (p, px, pxx) = profile.eval_x_extended(rho)?;
            (p, px, pxx, profile.eval_q_extended(rho)?.1)
        } else {
            let (p, px, pxx) = profile.eval_x(rho)?;
            // f = (3/8)(ψ_x + 1/3), taken directly so it keeps relative precision as r → 0
            (p, px, pxx, profile.eval_q(rho)?.1)
        };
        fam.h.push(psi);
        fam.r_dh.push(1.5 * psi_x);
        fam.rr_h.push(2.25 * psi_xx);
        fam.f.push(0.375 * q);
        fam.df.push(0.5625 * psi_xx / ri);
    }
    Ok(fam)
}

/// Builds families for several `t` in parallel.
pub fn build_families(ts: &[f64], profile: &Arc<PsiProfile>, r: &[f64]) -> Result<Vec<FiducialFamily>> {
    ts.par_iter().map(|&t| build_family(t, profile, r)).collect()
}

/// Suprema controlled by the uniform estimates on `f_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FBounds {
    pub t: f64,
    pub sup_f_over_r: f64,
    pub sup_f_over_r2: f64,
    /// `t^{−2/3} sup f/r`.
    pub normalized_r: f64,
    /// `t^{−4/3} sup f/r²`.
    pub normalized_r2: f64,
    pub f_in_range: bool,
    pub f_monotone_in_r: bool,
}

/// Per-`t` summary written by the driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiducialSummary {
    pub t: f64,
    pub sup_f_over_r: f64,
    pub sup_f_over_r2: f64,
    pub phi_sup: f64,
    pub residual_max: f64,
}

impl FiducialFamily {
    /// `|(1/r)∂_r f − 2t² r sinh 2h|` at each node.
    pub fn pointwise_residual(&self) -> Vec<f64> {
        let t2 = self.t * self.t;
        (0..self.r.len())
            .map(|i| (self.df[i] / self.r[i] - 2.0 * t2 * self.r[i] * (2.0 * self.h[i]).sinh()).abs())
            .collect()
    }

    pub fn residual_max(&self) -> f64 {
        self.pointwise_residual().into_iter().fold(0.0, f64::max)
    }

    /// Max of `|∂_r f − 2t²r² sinh 2h|` and `|(r∂_r)²h − 8t²r³ sinh 2h|`,
    /// with the outer derivatives taken by differences in `log r` from the
    /// stored `f` and `r∂_r h`. Needs a geometric grid.
    pub fn defining_equation_residuals(&self) -> Result<(f64, f64)> {
        let n = self.r.len();
        if n < 16 {
            return Err(Error::invalid("need at least 16 radii"));
        }
        let dx = (self.r[n - 1] / self.r[0]).ln() / (n - 1) as f64;
        let fd = UniformDifferentiator::new(9, 1);
        let x_f = fd.apply(&self.f, dx);
        let x_rdh = fd.apply(&self.r_dh, dx);
        let t2 = self.t * self.t;
        let mut eqf: f64 = 0.0;
        let mut eqh: f64 = 0.0;
        for i in 0..n {
            let r = self.r[i];
            let s = (2.0 * self.h[i]).sinh();
            eqf = eqf.max((x_f[i] / r - 2.0 * t2 * r * r * s).abs());
            eqh = eqh.max((x_rdh[i] - 8.0 * t2 * r.powi(3) * s).abs());
        }
        Ok((eqf, eqh))
    }

    /// The pair `(A_t, Φ_t)` on the family's radii with exact radial derivatives.
    pub fn pair(&self, n_theta: usize) -> Result<DiskPair> {
        check_grid(&self.r, n_theta)?;
        let n = self.r.len();
        let mut a01 = Vec::with_capacity(n * n_theta);
        let mut phi = Vec::with_capacity(n * n_theta);
        let mut da = Vec::with_capacity(n * n_theta);
        let mut dp = Vec::with_capacity(n * n_theta);
        for i in 0..n {
            let r = self.r[i];
            let (f, df, h) = (self.f[i], self.df[i], self.h[i]);
            let hr = self.r_dh[i] / r;
            let b = r.sqrt() * h.exp();
            let c = r.sqrt() * (-h).exp();
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                let e = Complex64::from_polar(1.0, th);
                // a01 = −(f/z̄) diag(1, −1)
                a01.push(TracelessMatrix::diagonal(e * (-f / r)));
                da.push(TracelessMatrix::diagonal(e * (-(df / r) + f / (r * r))));
                phi.push(TracelessMatrix::off_diagonal(Complex64::new(b, 0.0), e * c));
                dp.push(TracelessMatrix::off_diagonal(
                    Complex64::new(b * (0.5 / r + hr), 0.0),
                    e * (c * (0.5 / r - hr)),
                ));
            }
        }
        Ok(DiskPair {
            kind: PairKind::FiniteT(self.t),
            r: self.r.clone(),
            n_theta,
            a01,
            phi,
            dr_a01: Some(da),
            dr_phi: Some(dp),
        })
    }

    /// A family whose exponent is `scale·h`, with `f` rebuilt from it.
    /// Not a solution unless `scale = 1`.
    pub fn with_scaled_exponent(&self, scale: f64) -> FiducialFamily {
        let mut out = self.clone();
        for i in 0..out.r.len() {
            out.h[i] *= scale;
            out.r_dh[i] *= scale;
            out.rr_h[i] *= scale;
            out.f[i] = 0.125 + 0.25 * out.r_dh[i];
            out.df[i] = 0.25 * out.rr_h[i] / out.r[i];
        }
        out
    }

    /// Max over the grid of `|det φ + z|` written as the product of the
    /// off-diagonal entries against `r e^{iθ}`.
    pub fn determinant_defect(&self, n_theta: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.r.len() {
            let r = self.r[i];
            let b = r.sqrt() * self.h[i].exp();
            let c = r.sqrt() * (-self.h[i]).exp();
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                let e = Complex64::from_polar(1.0, th);
                let prod = Complex64::new(b, 0.0) * (e * c);
                worst = worst.max((prod - e * r).norm());
            }
        }
        worst
    }

    pub fn verify_f_bounds(&self) -> FBounds {
        let mut s1: f64 = 0.0;
        let mut s2: f64 = 0.0;
        for (r, f) in self.r.iter().zip(&self.f) {
            s1 = s1.max(f / r);
            s2 = s2.max(f / (r * r));
        }
        FBounds {
            t: self.t,
            sup_f_over_r: s1,
            sup_f_over_r2: s2,
            normalized_r: s1 * self.t.powf(-2.0 / 3.0),
            normalized_r2: s2 * self.t.powf(-4.0 / 3.0),
            f_in_range: self.f.iter().all(|&f| (0.0..=0.125).contains(&f)),
            f_monotone_in_r: self.f.windows(2).all(|w| w[1] >= w[0]),
        }
    }

    /// `sup_r |φ_t|` (Frobenius), with `|φ_t|² = 2r cosh 2h_t`.
    pub fn phi_sup_bound(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.h)
            .map(|(r, h)| (2.0 * r * (2.0 * h).cosh()).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest of `r^{1/2}e^{h}` and `r^{1/2}e^{−h}` over the grid.
    pub fn phi_entry_sup(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.h)
            .map(|(r, h)| r.sqrt() * h.abs().exp())
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> FiducialSummary {
        let b = self.verify_f_bounds();
        FiducialSummary {
            t: self.t,
            sup_f_over_r: b.sup_f_over_r,
            sup_f_over_r2: b.sup_f_over_r2,
            phi_sup: self.phi_sup_bound(),
            residual_max: self.residual_max(),
        }
    }

    /// Writes `r, h, f, df, residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "h", "f", "df", "residual"])?;
        let res = self.pointwise_residual();
        for i in 0..self.r.len() {
            w.write_record([
                fmt_f64(self.r[i]),
                fmt_f64(self.h[i]),
                fmt_f64(self.f[i]),
                fmt_f64(self.df[i]),
                fmt_f64(res[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exponential rate at which the family approaches the limit on `[r₀, 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRate {
    pub r0: f64,
    pub t: Vec<f64>,
    /// `sup_{r ≥ r₀} (|f_t − 1/8| + |h_t|)`.
    pub sup_error: Vec<f64>,
    /// Fitted `δ̂` (minus the slope of `log sup_error` against `t`).
    pub delta: f64,
    pub fit: LineFit,
}

/// Least-squares fit of `log sup_{r≥r₀}(|f_t − 1/8| + |h_t|)` against `t`.
pub fn convergence_rate(profile: &Arc<PsiProfile>, ts: &[f64], r0: f64) -> Result<ConvergenceRate> {
    if ts.len() < 3 {
        return Err(Error::invalid("convergence fit needs at least three values of t"));
    }
    if !(0.1..1.0).contains(&r0) {
        return Err(Error::invalid(format!("r₀ must lie in [0.1, 1), got {r0}")));
    }
    let grid = geometric_grid(r0, 1.0, 200);
    let fams = build_families(ts, profile, &grid)?;
    let sup_error: Vec<f64> = fams
        .iter()
        .map(|fam| {
            fam.f
                .iter()
                .zip(&fam.h)
                .map(|(f, h)| (f - 0.125).abs() + h.abs())
                .fold(0.0, f64::max)
        })
        .collect();
    if sup_error.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Singular("distance to the limit underflowed; use smaller t".into()));
    }
    let logs: Vec<f64> = sup_error.iter().map(|e| e.ln()).collect();
    let fit = fit_line(ts, &logs)?;
    Ok(ConvergenceRate {
        r0,
        t: ts.to_vec(),
        sup_error,
        delta: -fit.slope,
        fit,
    })
}
