use std::io::Write;

use serde::Serialize;

use super::bessel::{bessel_k0, bessel_k1};
use super::series::small_rho_series_q;
use crate::error::{Error, Result};
use crate::numerics::UniformDifferentiator;
use crate::ode::{Dopri5, Tolerance};
use crate::report::fmt_f64;

/// Number of small-ρ series coefficients used for the inner boundary data.
pub const SERIES_TERMS: usize = 3;

/// Settings for [`solve_connection`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionConfig {
    pub rho_min: f64,
    pub rho_mid: f64,
    pub rho_max: f64,
    /// Bound on the ODE residual of the returned profile.
    pub tol: f64,
    /// Relative tolerance of the adaptive integrator.
    pub rtol: f64,
    /// Number of log-spaced profile nodes.
    pub nodes: usize,
    pub max_newton: usize,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig {
            rho_min: 1e-4,
            rho_mid: 1.0,
            rho_max: 40.0,
            tol: 1e-8,
            rtol: 1e-12,
            nodes: 4001,
            max_newton: 40,
        }
    }
}

impl ConnectionConfig {
    fn validate(&self) -> Result<()> {
        let ordered = self.rho_min > 0.0 && self.rho_min < self.rho_mid && self.rho_mid < self.rho_max;
        if !ordered || !self.rho_max.is_finite() {
            return Err(Error::invalid(format!(
                "need 0 < ρ_min < ρ_mid < ρ_max, got {} {} {}",
                self.rho_min, self.rho_mid, self.rho_max
            )));
        }
        if !(self.tol > 0.0) || !(self.rtol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.nodes < 16 {
            return Err(Error::invalid("profile needs at least 16 nodes"));
        }
        Ok(())
    }
}

/// Solution `ψ` of `(ρ∂_ρ)²ψ = ½ρ² sinh 2ψ` that behaves like
/// `−(1/3) log ρ − log a₀` at 0 and decays like `λ K₀(ρ)` at infinity.
///
/// Values are stored in `x = log ρ` on a uniform grid. The integrated
/// unknowns are `ψ` and `q = ψ_x + 1/3`, so that `η = (3/8)q` keeps full
/// relative precision as `ρ → 0`. Higher derivatives come from the equation
/// and both `ψ` and `q` are interpolated by quintic Hermite.
#[derive(Debug, Clone, Serialize)]
pub struct PsiProfile {
    pub config: ConnectionConfig,
    pub rho: Vec<f64>,
    pub psi: Vec<f64>,
    /// `ρ ψ′(ρ) = ∂_x ψ`.
    pub psi_x: Vec<f64>,
    pub psi_xx: Vec<f64>,
    q: Vec<f64>,
    psi_xxx: Vec<f64>,
    pub a0: f64,
    pub lambda: f64,
    pub newton_iterations: usize,
    /// Mismatch of `(ψ, ψ_x)` at `ρ_mid` after matching.
    pub mismatch: f64,
    /// Max ODE residual in `x`, measured independently of the integrator.
    pub residual: f64,
    x0: f64,
    dx: f64,
}

/// `η(ρ) = 1/8 + (3/8) ρψ′(ρ)` on the profile grid.
#[derive(Debug, Clone, Serialize)]
pub struct EtaProfile {
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
}

impl EtaProfile {
    pub fn is_nondecreasing(&self) -> bool {
        self.eta.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn within_bounds(&self) -> bool {
        self.eta.iter().all(|&e| (0.0..=0.125).contains(&e))
    }
}

const THIRD: f64 = 1.0 / 3.0;

// Left state (ψ, q) with q = ψ_x + 1/3: q is of order ρ^{4/3} near 0.
fn rhs_left(x: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1] - THIRD, 0.5 * (2.0 * x).exp() * (2.0 * y[0]).sinh()]
}

// Right state (ψ, ψ_x): both are of order e^{−ρ} in the tail.
fn rhs_right(x: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], 0.5 * (2.0 * x).exp() * (2.0 * y[0]).sinh()]
}

fn left_data(a0: f64, rho_min: f64) -> Result<[f64; 2]> {
    let (psi, q, _) = small_rho_series_q(a0, SERIES_TERMS, rho_min)?;
    Ok([psi, q])
}

fn right_data(lambda: f64, rho_max: f64) -> Result<[f64; 2]> {
    Ok([lambda * bessel_k0(rho_max)?, -lambda * rho_max * bessel_k1(rho_max)?])
}

// No unknown changes sign, so pure relative control is safe on both sides.
fn tolerances(cfg: &ConnectionConfig) -> (Tolerance, Tolerance) {
    let tol = Tolerance {
        rtol: cfg.rtol,
        atol: 1e-300,
        ..Tolerance::default()
    };
    (tol, tol)
}

fn shoot(cfg: &ConnectionConfig, a0: f64, lambda: f64) -> Result<[f64; 2]> {
    let (tl, tr) = tolerances(cfg);
    let xm = cfg.rho_mid.ln();
    let mut left = left_data(a0, cfg.rho_min)?;
    Dopri5::new(tl).integrate(&rhs_left, cfg.rho_min.ln(), xm, &mut left)?;
    let mut right = right_data(lambda, cfg.rho_max)?;
    Dopri5::new(tr).integrate(&rhs_right, cfg.rho_max.ln(), xm, &mut right)?;
    Ok([left[0] - right[0], left[1] - THIRD - right[1]])
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Newton iteration on `(a₀, λ)` with a forward-difference Jacobian.
/// Returns the final parameters, the mismatch norm and the iteration count.
fn newton(cfg: &ConnectionConfig, start: (f64, f64), target: f64) -> Result<((f64, f64), f64, usize)> {
    let (mut a0, mut lambda) = start;
    let mut f = shoot(cfg, a0, lambda)?;
    let mut res = norm2(f);
    for it in 0..cfg.max_newton {
        if res < target {
            return Ok(((a0, lambda), res, it));
        }
        let ha = 1e-6 * a0;
        let hl = 1e-6 * lambda;
        let fa = shoot(cfg, a0 + ha, lambda)?;
        let fl = shoot(cfg, a0, lambda + hl)?;
        let j = [
            [(fa[0] - f[0]) / ha, (fl[0] - f[0]) / hl],
            [(fa[1] - f[1]) / ha, (fl[1] - f[1]) / hl],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("shooting Jacobian is singular".into()));
        }
        let da = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dl = (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        // Damped step: keep both parameters positive and the mismatch falling.
        let mut step = 1.0;
        loop {
            let (na, nl) = (a0 - step * da, lambda - step * dl);
            if na > 0.0 && nl > 0.0 {
                if let Ok(nf) = shoot(cfg, na, nl) {
                    let nres = norm2(nf);
                    if nres < res || step < 1e-3 {
                        a0 = na;
                        lambda = nl;
                        f = nf;
                        res = nres;
                        break;
                    }
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                return Err(Error::Convergence {
                    iterations: it,
                    detail: format!("line search failed with mismatch {res:.3e}"),
                });
            }
        }
    }
    if res < target {
        Ok(((a0, lambda), res, cfg.max_newton))
    } else {
        Err(Error::Convergence {
            iterations: cfg.max_newton,
            detail: format!("shooting mismatch {res:.3e} above {target:.3e}"),
        })
    }
}

/// Coarse sweep over `(a₀, λ)` for a better Newton seed.
fn sweep_seed(cfg: &ConnectionConfig) -> (f64, f64) {
    let mut best = ((1.0, 1.0), f64::INFINITY);
    for i in 0..=20 {
        let a0 = 0.25 * 1.1f64.powi(i);
        for j in 0..=20 {
            let lambda = 0.05 * 1.2f64.powi(j);
            if let Ok(f) = shoot(cfg, a0, lambda) {
                let r = norm2(f);
                if r < best.1 {
                    best = ((a0, lambda), r);
                }
            }
        }
    }
    best.0
}

/// Two-sided shooting for the decaying solution.
pub fn solve_connection(cfg: &ConnectionConfig) -> Result<PsiProfile> {
    cfg.validate()?;
    let target = (1e-3 * cfg.tol).max(10.0 * cfg.rtol);
    let ((a0, lambda), mismatch, iterations) = match newton(cfg, (1.0, 1.0), target) {
        Ok(v) => v,
        Err(_) => newton(cfg, sweep_seed(cfg), target)?,
    };
    build_profile(cfg, a0, lambda, mismatch, iterations)
}

fn build_profile(cfg: &ConnectionConfig, a0: f64, lambda: f64, mismatch: f64, iterations: usize) -> Result<PsiProfile> {
    let n = cfg.nodes;
    let x0 = cfg.rho_min.ln();
    let x1 = cfg.rho_max.ln();
    let xm = cfg.rho_mid.ln();
    let dx = (x1 - x0) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| x0 + dx * i as f64).collect();
    let mut psi = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut psi_x = vec![0.0; n];

    let (tl, tr) = tolerances(cfg);
    let split = xs.iter().position(|&x| x > xm).unwrap_or(n);

    let mut y = left_data(a0, cfg.rho_min)?;
    let mut solver = Dopri5::new(tl);
    let mut x = x0;
    for i in 0..split {
        solver.integrate(&rhs_left, x, xs[i], &mut y)?;
        x = xs[i];
        psi[i] = y[0];
        q[i] = y[1];
        psi_x[i] = y[1] - THIRD;
    }
    let mut y = right_data(lambda, cfg.rho_max)?;
    let mut solver = Dopri5::new(tr);
    let mut x = x1;
    for i in (split..n).rev() {
        solver.integrate(&rhs_right, x, xs[i], &mut y)?;
        x = xs[i];
        psi[i] = y[0];
        q[i] = y[1] + THIRD;
        psi_x[i] = y[1];
    }

    if psi.iter().any(|&p| !(p > 0.0)) || q.iter().any(|&d| !(d > 0.0)) || psi_x.iter().any(|&d| !(d < 0.0)) {
        return Err(Error::Convergence {
            iterations,
            detail: "matched profile is not positive and decreasing; invalid bracketing".into(),
        });
    }
    let psi_xx: Vec<f64> = xs
        .iter()
        .zip(&psi)
        .map(|(&x, &p)| 0.5 * (2.0 * x).exp() * (2.0 * p).sinh())
        .collect();
    // ∂_x(½e^{2x} sinh 2ψ)
    let psi_xxx: Vec<f64> = (0..n)
        .map(|i| (2.0 * xs[i]).exp() * ((2.0 * psi[i]).sinh() + (2.0 * psi[i]).cosh() * psi_x[i]))
        .collect();
    let mut profile = PsiProfile {
        config: *cfg,
        rho: xs.iter().map(|x| x.exp()).collect(),
        psi_x,
        psi,
        psi_xx,
        q,
        psi_xxx,
        a0,
        lambda,
        newton_iterations: iterations,
        mismatch,
        residual: 0.0,
        x0,
        dx,
    };
    profile.rho[0] = cfg.rho_min;
    profile.rho[n - 1] = cfg.rho_max;
    profile.residual = profile.ode_residual();
    if !(profile.residual <= cfg.tol) {
        return Err(Error::Convergence {
            iterations,
            detail: format!("profile ODE residual {:.3e} above {:.3e}", profile.residual, cfg.tol),
        });
    }
    Ok(profile)
}

impl PsiProfile {
    /// Largest ODE residual in `x`, from eighth-order differences of the
    /// stored `ψ_x` at the nodes and from the interpolant at the midpoints.
    pub fn ode_residual(&self) -> f64 {
        let d = UniformDifferentiator::new(9, 1).apply(&self.q, self.dx);
        let mut worst: f64 = 0.0;
        for (i, di) in d.iter().enumerate() {
            let x = self.x0 + self.dx * i as f64;
            let target = 0.5 * (2.0 * x).exp() * (2.0 * self.psi[i]).sinh();
            worst = worst.max((di - target).abs());
        }
        for i in 0..self.rho.len() - 1 {
            let x = self.x0 + self.dx * (i as f64 + 0.5);
            let (p, _, pxx) = self.interpolate(i, 0.5);
            let target = 0.5 * (2.0 * x).exp() * (2.0 * p).sinh();
            worst = worst.max((pxx - target).abs());
        }
        worst
    }

    pub fn rho_min(&self) -> f64 {
        self.config.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.config.rho_max
    }

    // (ψ, q, ψ_xx) on cell i at local coordinate s ∈ [0, 1]. ψ_xx is the
    // derivative of the q interpolant, which avoids differencing O(1) values.
    fn interpolate(&self, i: usize, s: f64) -> (f64, f64, f64) {
        let h = self.dx;
        let cell = |f: &[f64], d: &[f64], c: &[f64]| {
            hermite5(s, [f[i], d[i] * h, c[i] * h * h, f[i + 1], d[i + 1] * h, c[i + 1] * h * h])
        };
        let (psi, _) = cell(&self.psi, &self.psi_x, &self.psi_xx);
        let (q, dq) = cell(&self.q, &self.psi_xx, &self.psi_xxx);
        (psi, q, dq / h)
    }

    /// `(ψ, ψ_x + 1/3, ψ_xx)` at `ρ`, with `x = log ρ`. The middle entry is
    /// `(8/3)η` and is accurate relative to its own size.
    ///
    /// Inside the grid the stored data are interpolated; on
    /// `[ρ_min/2, ρ_min)` the small-ρ series and on `(ρ_max, 2ρ_max]` the
    /// `λK₀` tail are used.
    pub fn eval_q(&self, rho: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = (self.rho_min(), self.rho_max());
        if !(rho >= 0.5 * lo && rho <= 2.0 * hi) {
            return Err(Error::domain(format!(
                "ρ = {rho} outside the profile range [{}, {}]",
                0.5 * lo,
                2.0 * hi
            )));
        }
        if rho < lo {
            return small_rho_series_q(self.a0, SERIES_TERMS, rho);
        }
        if rho > hi {
            let k0 = self.lambda * bessel_k0(rho)?;
            let k1 = self.lambda * bessel_k1(rho)?;
            // (ρ∂_ρ)² K₀ = ρ² K₀
            return Ok((k0, THIRD - rho * k1, rho * rho * k0));
        }
        let n = self.rho.len();
        let t = (rho.ln() - self.x0) / self.dx;
        let nearest = (t.round().max(0.0) as usize).min(n - 1);
        if self.rho[nearest] == rho {
            return Ok((self.psi[nearest], self.q[nearest], self.psi_xx[nearest]));
        }
        let i = (t.floor().max(0.0) as usize).min(n - 2);
        Ok(self.interpolate(i, (t - i as f64).clamp(0.0, 1.0)))
    }

    /// [`eval_q`](Self::eval_q) without the outer range limits: the small-ρ
    /// series below `ρ_min` and the Bessel tail above `ρ_max`. The series is
    /// only more accurate as `ρ → 0`.
    pub fn eval_q_extended(&self, rho: f64) -> Result<(f64, f64, f64)> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("profile evaluated at ρ = {rho}")));
        }
        if rho < self.rho_min() {
            return small_rho_series_q(self.a0, SERIES_TERMS, rho);
        }
        if rho > self.rho_max() {
            let k0 = self.lambda * bessel_k0(rho)?;
            return Ok((k0, THIRD - rho * self.lambda * bessel_k1(rho)?, rho * rho * k0));
        }
        self.eval_q(rho)
    }

    /// `(ψ, ψ_x, ψ_xx)` at `ρ`, with `x = log ρ`.
    pub fn eval_x(&self, rho: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = (self.rho_min(), self.rho_max());
        if rho > hi && rho <= 2.0 * hi {
            let k0 = self.lambda * bessel_k0(rho)?;
            let k1 = self.lambda * bessel_k1(rho)?;
            return Ok((k0, -rho * k1, rho * rho * k0));
        }
        if rho >= lo && rho <= hi {
            let n = self.rho.len();
            let t = (rho.ln() - self.x0) / self.dx;
            let nearest = (t.round().max(0.0) as usize).min(n - 1);
            if self.rho[nearest] == rho {
                return Ok((self.psi[nearest], self.psi_x[nearest], self.psi_xx[nearest]));
            }
            // ψ_x from whichever of ψ_x, q is better conditioned on this cell
            let i = (t.floor().max(0.0) as usize).min(n - 2);
            let s = (t - i as f64).clamp(0.0, 1.0);
            let (p, q, pxx) = self.interpolate(i, s);
            if q < 0.25 {
                return Ok((p, q - THIRD, pxx));
            }
            let h = self.dx;
            let (px, _) = hermite5(
                s,
                [
                    self.psi_x[i],
                    self.psi_xx[i] * h,
                    self.psi_xxx[i] * h * h,
                    self.psi_x[i + 1],
                    self.psi_xx[i + 1] * h,
                    self.psi_xxx[i + 1] * h * h,
                ],
            );
            return Ok((p, px, pxx));
        }
        let (p, q, pxx) = self.eval_q(rho)?;
        Ok((p, q - THIRD, pxx))
    }

    /// [`eval_x`](Self::eval_x) on all of `(0, ∞)`, with the series below
    /// `ρ_min` and the Bessel tail above `ρ_max`.
    pub fn eval_x_extended(&self, rho: f64) -> Result<(f64, f64, f64)> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("profile evaluated at ρ = {rho}")));
        }
        if rho < self.rho_min() {
            let (p, q, pxx) = small_rho_series_q(self.a0, SERIES_TERMS, rho)?;
            return Ok((p, q - THIRD, pxx));
        }
        if rho > self.rho_max() {
            let k0 = self.lambda * bessel_k0(rho)?;
            let k1 = self.lambda * bessel_k1(rho)?;
            return Ok((k0, -rho * k1, rho * rho * k0));
        }
        self.eval_x(rho)
    }

    /// `(ψ, dψ/dρ)` at `ρ`.
    pub fn eval(&self, rho: f64) -> Result<(f64, f64)> {
        let (p, px, _) = self.eval_x(rho)?;
        Ok((p, px / rho))
    }

    /// `η(ρ) = 1/8 + (3/8) ρψ′(ρ)`.
    pub fn eta(&self, rho: f64) -> Result<f64> {
        Ok(0.375 * self.eval_q(rho)?.1)
    }

    pub fn eta_profile(&self) -> EtaProfile {
        EtaProfile {
            rho: self.rho.clone(),
            eta: self.q.iter().map(|q| 0.375 * q).collect(),
        }
    }

    /// Constant `b₀` in `h_t(r) = −½ log r + b₀ + o(1)` as `r → 0` for the
    /// family `h_t(r) = ψ((8/3) t r^{3/2})`.
    pub fn b0(&self, t: f64) -> f64 {
        -(8.0 * t / 3.0).ln() / 3.0 - self.a0.ln()
    }

    /// Writes `rho, psi, dpsi, eta` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rho", "psi", "dpsi", "eta"])?;
        for i in 0..self.rho.len() {
            let rho = self.rho[i];
            w.write_record([
                fmt_f64(rho),
                fmt_f64(self.psi[i]),
                fmt_f64(self.psi_x[i] / rho),
                fmt_f64(0.375 * self.q[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

// Quintic Hermite on [0, 1] from [p0, d0, c0, p1, d1, c1]: values, first and
// second derivatives at both ends, already scaled by the cell width.
// Returns the value and the s-derivative.
fn hermite5(s: f64, v: [f64; 6]) -> (f64, f64) {
    let [p0, d0, c0, p1, d1, c1] = v;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let dh0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let dh1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let dh2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    let dh3 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    let dh4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let dh5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let v = p0 * h0 + d0 * h1 + c0 * h2 + c1 * h3 + d1 * h4 + p1 * h5;
    let dv = p0 * dh0 + d0 * dh1 + c0 * dh2 + c1 * dh3 + d1 * dh4 + p1 * dh5;
    (v, dv)
}

/// `(ψ, dψ/dρ)` at `ρ`; see [`PsiProfile::eval`].
pub fn psi_eval(profile: &PsiProfile, rho: f64) -> Result<(f64, f64)> {
    profile.eval(rho)
}
