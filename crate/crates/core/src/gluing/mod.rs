//! Cutoff approximate solutions on the disk and their Newton correction.
//!
//! The glued exponent is `h_χ = χ h_t`, which equals the fiducial exponent
//! where `χ ≡ 1` and vanishes where `χ ≡ 0`. Its error is supported on the
//! cutoff annulus, where `h_t` is exponentially small in `t`. The correction
//! `u` solves the radial equation
//!
//! ```text
//! (r∂_r)²(h_χ + u) = 8t²r³ sinh 2(h_χ + u),   u(1) = 0,   u bounded at 0,
//! ```
//!
//! discretized in `x = log r` by the fourth-order Numerov scheme. Where
//! `χ ≡ 1` the forcing `(r∂_r)²h_χ` enters through the Numerov average; on
//! the cutoff annulus, where `u` inherits the sharp features of `χ` but
//! `h_χ + u` does not, it enters as a second difference of `h_χ` so that the
//! scheme is Numerov for the smooth total exponent.

mod cutoff;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use cutoff::{CutoffProfile, CutoffValue};

use crate::error::{Error, Result};
use crate::fiducial::{build_family_extended, FiducialFamily, HitchinResidual};
use crate::linearized::RadialGrid;
use crate::numerics::{fit_line, solve_tridiagonal, LineFit, UniformDifferentiator};
use crate::painleve::PsiProfile;

/// Radial nodes of the default gluing grid.
pub const DEFAULT_NODES: usize = 2000;
/// Innermost radius of the default gluing grid.
pub const DEFAULT_R_MIN: f64 = 1e-6;
/// Default Newton tolerance on the sup norm of the discrete residual.
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 40;
/// Angular resolution used when the corrected pair is rebuilt.
const CHECK_N_THETA: usize = 16;

pub fn default_grid() -> RadialGrid {
    RadialGrid::new(DEFAULT_R_MIN, DEFAULT_NODES).expect("default gluing grid is valid")
}

/// The glued radial data at one `t`.
#[derive(Debug, Clone, Serialize)]
pub struct GluedState {
    pub t: f64,
    pub cutoff: CutoffProfile,
    #[serde(skip)]
    pub grid: RadialGrid,
    pub r: Vec<f64>,
    /// The fiducial exponent `h_t`.
    pub h_t: Vec<f64>,
    pub chi: Vec<f64>,
    /// `h_χ = χ h_t`.
    pub h: Vec<f64>,
    /// `r∂_r h_χ`.
    pub r_dh: Vec<f64>,
    /// `(r∂_r)² h_χ`.
    pub rr_h: Vec<f64>,
    /// `f_{χ,t} = 1/8 + (1/4) r∂_r h_χ`.
    pub f: Vec<f64>,
    /// `∂_r f_{χ,t}`.
    pub df: Vec<f64>,
    /// `(1/r)∂_r f_{χ,t} − 2t²r sinh 2h_χ`.
    pub residual: Vec<f64>,
    #[serde(skip)]
    profile: Arc<PsiProfile>,
    // discrete −(r∂_r)²h_χ at the unknown nodes
    #[serde(skip)]
    forcing: Vec<f64>,
}

pub fn build_glued(t: f64, profile: &Arc<PsiProfile>, cutoff: &CutoffProfile, grid: &RadialGrid) -> Result<GluedState> {
    let fam = build_family_extended(t, profile, &grid.r)?;
    let n = grid.n;
    let mut st = GluedState {
        t,
        cutoff: *cutoff,
        grid: grid.clone(),
        r: grid.r.clone(),
        h_t: fam.h.clone(),
        chi: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        r_dh: Vec::with_capacity(n),
        rr_h: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        df: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        profile: Arc::clone(profile),
        forcing: Vec::with_capacity(n - 1),
    };
    let t2 = t * t;
    for i in 0..n {
        let r = grid.r[i];
        let c = cutoff.eval(r);
        let (h, dh, ddh) = (fam.h[i], fam.r_dh[i], fam.rr_h[i]);
        let hc = c.chi * h;
        let dhc = c.r_dchi * h + c.chi * dh;
        let ddhc = c.rr_chi * h + 2.0 * c.r_dchi * dh + c.chi * ddh;
        st.chi.push(c.chi);
        st.h.push(hc);
        st.r_dh.push(dhc);
        st.rr_h.push(ddhc);
        // where χ ≡ 1 keep the profile's own f, which is accurate to the last bit at small r
        st.f.push(if c.chi == 1.0 { fam.f[i] } else { 0.125 + 0.25 * dhc });
        st.df.push(if c.chi == 1.0 { fam.df[i] } else { 0.25 * ddhc / r });
        st.residual.push(0.25 * ddhc / (r * r) - 2.0 * t2 * r * (2.0 * hc).sinh());
    }
    let hx2 = grid.h * grid.h;
    for i in 0..n - 1 {
        let below = if i == 0 { 1 } else { i - 1 };
        let phi = if grid.r[i + 1] <= cutoff.onset {
            -(st.rr_h[i + 1] + 10.0 * st.rr_h[i] + st.rr_h[below]) / 12.0
        } else {
            -(st.h[i + 1] - 2.0 * st.h[i] + st.h[i - 1]) / hx2
        };
        st.forcing.push(phi);
    }
    Ok(st)
}

impl GluedState {
    pub fn residual_sup(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖residual‖_{L²(r dr)}` on `(r_min, 1)`.
    pub fn residual_l2(&self) -> f64 {
        l2_r_dr(&self.grid, &self.residual)
    }

    /// Largest `|residual|` on `[r_lo, r_hi]`.
    pub fn residual_sup_on(&self, r_lo: f64, r_hi: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.residual)
            .filter(|(r, _)| (r_lo..=r_hi).contains(*r))
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn f_range(&self) -> (f64, f64) {
        self.f
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    // g = 8t²r³ sinh 2(h_χ + u) and ∂g/∂u.
    fn source(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t2 = self.t * self.t;
        (0..self.grid.n)
            .map(|i| {
                let r3 = self.r[i].powi(3);
                let a = 2.0 * (self.h[i] + u[i]);
                (8.0 * t2 * r3 * a.sinh(), 16.0 * t2 * r3 * a.cosh())
            })
            .unzip()
    }

    /// Numerov residual at the unknown nodes `0..n−1`; `u[n−1] = 0`.
    fn discrete_residual(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let h2 = self.grid.h * self.grid.h;
        let (g, _) = self.source(u);
        (0..n - 1)
            .map(|i| {
                // mirror node for the bounded (Neumann) condition at r_min
                let (um, gm) = if i == 0 { (u[1], g[1]) } else { (u[i - 1], g[i - 1]) };
                -(u[i + 1] - 2.0 * u[i] + um) / h2 + (g[i + 1] + 10.0 * g[i] + gm) / 12.0 + self.forcing[i]
            })
            .collect()
    }

    fn newton_step(&self, u: &[f64], res: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n - 1;
        let h2 = self.grid.h * self.grid.h;
        let (_, dg) = self.source(u);
        let diag: Vec<f64> = (0..n).map(|i| 2.0 / h2 + 10.0 * dg[i] / 12.0).collect();
        let upper: Vec<f64> = (0..n - 1)
            .map(|i| {
                let c = -1.0 / h2 + dg[i + 1] / 12.0;
                if i == 0 {
                    2.0 * c
                } else {
                    c
                }
            })
            .collect();
        let lower: Vec<f64> = (1..n).map(|i| -1.0 / h2 + dg[i - 1] / 12.0).collect();
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        solve_tridiagonal(&lower, &diag, &upper, &rhs)
    }

    /// One linear solve of the initial residual: `−J(0)⁻¹F(0)`.
    pub fn linearized_correction(&self) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.grid.n];
        let mut du = self.newton_step(&zero, &self.discrete_residual(&zero))?;
        du.push(0.0);
        Ok(du)
    }

    /// The potential `16t²r cosh 2h_χ` of the linearization at `u = 0`.
    pub fn newton_potential(&self) -> Vec<f64> {
        let t2 = self.t * self.t;
        self.r.iter().zip(&self.h).map(|(r, h)| 16.0 * t2 * r * (2.0 * h).cosh()).collect()
    }
}

fn l2_r_dr(grid: &RadialGrid, v: &[f64]) -> f64 {
    // ∫ v² r dr = ∫ v² r² dx, trapezoid in x
    let n = v.len().min(grid.n);
    let mut acc = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == grid.n - 1 { 0.5 } else { 1.0 };
        acc += w * v[i] * v[i] * grid.r[i] * grid.r[i];
    }
    (acc * grid.h).sqrt()
}

/// Fit of `log ‖residual‖_{L²(r dr)} ≈ log C − δ t`.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxErrorFit {
    pub t: Vec<f64>,
    pub residual_l2: Vec<f64>,
    pub residual_sup: Vec<f64>,
    pub delta: f64,
    pub c: f64,
    pub r_squared: f64,
}

pub fn approx_error_sweep(ts: &[f64], profile: &Arc<PsiProfile>, cutoff: &CutoffProfile, grid: &RadialGrid) -> Result<ApproxErrorFit> {
    if ts.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 values of t, got {}", ts.len())));
    }
    let states = ts
        .par_iter()
        .map(|&t| build_glued(t, profile, cutoff, grid))
        .collect::<Result<Vec<_>>>()?;
    let l2: Vec<f64> = states.iter().map(GluedState::residual_l2).collect();
    if l2.iter().any(|v| !(v > &0.0)) {
        return Err(Error::Singular("glued residual vanishes; nothing to fit".into()));
    }
    let logs: Vec<f64> = l2.iter().map(|v| v.ln()).collect();
    let fit = fit_line(ts, &logs)?;
    Ok(ApproxErrorFit {
        t: ts.to_vec(),
        residual_sup: states.iter().map(GluedState::residual_sup).collect(),
        residual_l2: l2,
        delta: -fit.slope,
        c: fit.intercept.exp(),
        r_squared: fit.r_squared,
    })
}

/// The exponent predicted from the decay `h_t ~ e^{−ρ}` at the cutoff
/// radius `r_c`: `δ = (8/3) r_c^{3/2}`.
pub fn predicted_delta(r_c: f64) -> f64 {
    8.0 / 3.0 * r_c.powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonStep {
    pub iteration: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonResult {
    pub t: f64,
    pub u: Vec<f64>,
    /// One entry per residual evaluation, the first at `u = 0`.
    pub history: Vec<NewtonStep>,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub sup_u: f64,
}

impl NewtonResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// `r_{k+1}/r_k²` in the `L²(r dr)` norm for consecutive steps with
    /// `r_k < threshold`, ignoring steps that land on the rounding floor.
    pub fn quadratic_ratios(&self, threshold: f64, floor: f64) -> Vec<f64> {
        self.history
            .windows(2)
            .filter(|w| w[0].residual_l2 < threshold && w[1].residual_l2 > floor)
            .map(|w| w[1].residual_l2 / (w[0].residual_l2 * w[0].residual_l2))
            .collect()
    }
}

/// Newton iteration for the correction `u`, stopping once the discrete
/// residual is below `tol` in both the sup and `L²(r dr)` norms.
pub fn newton_correct(state: &GluedState, tol: f64) -> Result<NewtonResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut u = vec![0.0; state.grid.n];
    let mut history = Vec::new();
    for k in 0..MAX_NEWTON {
        let res = state.discrete_residual(&u);
        let sup = res.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let l2 = l2_r_dr(&state.grid, &res);
        history.push(NewtonStep {
            iteration: k,
            residual_sup: sup,
            residual_l2: l2,
        });
        if !sup.is_finite() || (k > 0 && sup > 1e3 * history[0].residual_sup.max(tol)) {
            return Err(divergence(&history));
        }
        if sup < tol && l2 < tol {
            let sup_u = u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            return Ok(NewtonResult {
                t: state.t,
                u,
                history,
                residual_sup: sup,
                residual_l2: l2,
                sup_u,
            });
        }
        let du = state.newton_step(&u, &res)?;
        for (a, d) in u.iter_mut().zip(du) {
            *a += d;
        }
    }
    Err(divergence(&history))
}

fn divergence(history: &[NewtonStep]) -> Error {
    let log: Vec<String> = history.iter().map(|s| format!("{:.3e}", s.residual_sup)).collect();
    Error::Convergence {
        iterations: history.len(),
        detail: format!("Newton residual history [{}]", log.join(", ")),
    }
}

/// Checks on the corrected exponent `h = h_χ + u`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectedReport {
    pub t: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub newton_iters: usize,
    pub sup_u: f64,
    /// Hitchin residual of the rebuilt disk pair on `[r_lo, 1]`.
    pub hitchin: HitchinResidual,
    pub r_lo: f64,
    /// `sup_{r ≤ 1/4} |h − h_t|`.
    pub interior_deviation: f64,
}

impl CorrectedReport {
    /// The correction is invisible on `r ≤ 1/4` to within `10·tol`.
    pub fn interior_rigidity(&self, tol: f64) -> bool {
        self.interior_deviation <= 10.0 * tol
    }
}

/// The corrected family on the gluing grid. Derivatives of the correction
/// are eighth-order differences in `x`: of `u` where `χ ≡ 1`, so the large
/// singular part of `h_t` stays exact near 0, and of `w = h_χ + u` beyond,
/// where `u` carries the cutoff's sharp features but `w` does not.
pub fn corrected_family(state: &GluedState, newton: &NewtonResult) -> Result<FiducialFamily> {
    let n = state.grid.n;
    if newton.u.len() != n {
        return Err(Error::invalid("correction was computed on another grid"));
    }
    let hx = state.grid.h;
    let d1 = UniformDifferentiator::new(9, 1);
    let d2 = UniformDifferentiator::new(9, 2);
    let w: Vec<f64> = state.h.iter().zip(&newton.u).map(|(a, b)| a + b).collect();
    let (ux, uxx) = (d1.apply(&newton.u, hx), d2.apply(&newton.u, hx));
    let (wx, wxx) = (d1.apply(&w, hx), d2.apply(&w, hx));
    let split = 0.5 * state.cutoff.onset.min(2.0);
    let ux: Vec<f64> = (0..n).map(|i| if state.r[i] < split { ux[i] } else { wx[i] - state.r_dh[i] }).collect();
    let uxx: Vec<f64> = (0..n).map(|i| if state.r[i] < split { uxx[i] } else { wxx[i] - state.rr_h[i] }).collect();
    let mut fam = FiducialFamily {
        t: state.t,
        r: state.r.clone(),
        h: Vec::with_capacity(n),
        r_dh: Vec::with_capacity(n),
        rr_h: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        df: Vec::with_capacity(n),
        profile: Arc::clone(&state.profile),
    };
    for i in 0..n {
        let r = state.r[i];
        fam.h.push(state.h[i] + newton.u[i]);
        fam.r_dh.push(state.r_dh[i] + ux[i]);
        fam.rr_h.push(state.rr_h[i] + uxx[i]);
        fam.f.push(state.f[i] + 0.25 * ux[i]);
        fam.df.push(state.df[i] + 0.25 * uxx[i] / r);
    }
    Ok(fam)
}

pub fn corrected_solution_check(state: &GluedState, newton: &NewtonResult, r_lo: f64) -> Result<CorrectedReport> {
    let fam = corrected_family(state, newton)?;
    let hitchin = fam.pair(CHECK_N_THETA)?.hitchin_residual_on(state.t, r_lo, 1.0)?;
    let interior_deviation = (0..state.grid.n)
        .filter(|&i| state.r[i] <= 0.25)
        .map(|i| (fam.h[i] - state.h_t[i]).abs())
        .fold(0.0, f64::max);
    Ok(CorrectedReport {
        t: state.t,
        residual_sup: newton.residual_sup,
        residual_l2: newton.residual_l2,
        newton_iters: newton.iterations(),
        sup_u: newton.sup_u,
        hitchin,
        r_lo,
        interior_deviation,
    })
}

/// Growth of the glued `f_{χ,t}` at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub t: f64,
    pub sup_f: f64,
    pub sup_df: f64,
    /// `sup_r (|f| + |∂_r f|)/t`.
    pub sup_sum_over_t: f64,
    pub sup_df_over_t: f64,
    pub f_min: f64,
    pub f_max: f64,
}

pub fn growth_norm_check(ts: &[f64], profile: &Arc<PsiProfile>, cutoff: &CutoffProfile, grid: &RadialGrid) -> Result<Vec<GrowthRow>> {
    ts.par_iter()
        .map(|&t| {
            let st = build_glued(t, profile, cutoff, grid)?;
            let sup_f = st.f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let sup_df = st.df.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let sup_sum = st.f.iter().zip(&st.df).fold(0.0, |m: f64, (a, b)| m.max(a.abs() + b.abs()));
            let (f_min, f_max) = st.f_range();
            Ok(GrowthRow {
                t,
                sup_f,
                sup_df,
                sup_sum_over_t: sup_sum / t,
                sup_df_over_t: sup_df / t,
                f_min,
                f_max,
            })
        })
        .collect()
}

/// Ratio of the largest to the smallest entry.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi / lo
}

/// Line fit of `log sup|u|` against `t`, for the decay of the correction.
pub fn correction_decay(results: &[NewtonResult]) -> Result<LineFit> {
    let t: Vec<f64> = results.iter().map(|r| r.t).collect();
    let y: Vec<f64> = results.iter().map(|r| r.sup_u.ln()).collect();
    fit_line(&t, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearized::{assemble_block, BlockKind, FiducialCoefficients};
    use crate::painleve::{solve_connection, ConnectionConfig};
    use std::sync::OnceLock;

    fn profile() -> Arc<PsiProfile> {
        static P: OnceLock<Arc<PsiProfile>> = OnceLock::new();
        Arc::clone(P.get_or_init(|| Arc::new(solve_connection(&ConnectionConfig::default()).unwrap())))
    }

    #[test]
    fn glued_state_matches_the_family_inside_and_vanishes_outside() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let st = build_glued(4.0, &profile(), &CutoffProfile::default(), &grid).unwrap();
        for i in 0..grid.n {
            if st.r[i] <= 0.5 {
                assert_eq!(st.h[i], st.h_t[i]);
            }
            if st.r[i] >= 0.9 {
                assert_eq!(st.h[i], 0.0);
                assert_eq!(st.residual[i], 0.0);
            }
        }
        assert!(st.residual_sup_on(1e-6, 0.5) < 1e-8);
        assert!(st.residual_sup_on(0.56, 0.89) > 1e-6);
    }

    #[test]
    fn error_decays_exponentially() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let ts = [2.0, 4.0, 6.0, 8.0];
        let fit = approx_error_sweep(&ts, &profile(), &CutoffProfile::default(), &grid).unwrap();
        assert!(fit.delta > 0.0 && fit.r_squared > 0.98, "{fit:?}");
        assert!(fit.residual_sup.windows(2).all(|w| w[1] < w[0]));
        assert!(approx_error_sweep(&ts[..3], &profile(), &CutoffProfile::default(), &grid).is_err());
    }

    #[test]
    fn earlier_onset_lowers_the_rate() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let ts = [2.0, 4.0, 6.0, 8.0, 10.0];
        let late = approx_error_sweep(&ts, &profile(), &CutoffProfile::default(), &grid).unwrap();
        let early = approx_error_sweep(&ts, &profile(), &CutoffProfile::new(0.275, 0.45).unwrap(), &grid).unwrap();
        assert!(early.delta < late.delta, "{} vs {}", early.delta, late.delta);
    }

    #[test]
    fn exact_input_needs_no_correction() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let st = build_glued(4.0, &profile(), &CutoffProfile::identity(), &grid).unwrap();
        let res = newton_correct(&st, 1e-9).unwrap();
        assert_eq!(res.iterations(), 1);
        assert!(res.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn newton_converges_quadratically() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let st = build_glued(4.0, &profile(), &CutoffProfile::default(), &grid).unwrap();
        let res = newton_correct(&st, 1e-10).unwrap();
        assert!(res.iterations() <= 6, "{:?}", res.history);
        let ratios = res.quadratic_ratios(1e-2, 1e-14);
        assert!(!ratios.is_empty());
        assert!(ratios.iter().all(|&q| q < 1e3), "{ratios:?}");
        // a posteriori: the nonlinear correction is close to the linear one
        let lin = st.linearized_correction().unwrap();
        let sup_lin = lin.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        assert!(res.sup_u <= 10.0 * sup_lin);
        assert!((res.sup_u - sup_lin).abs() < 0.1 * sup_lin);
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let grid = RadialGrid::new(1e-6, 200).unwrap();
        let st = build_glued(4.0, &profile(), &CutoffProfile::default(), &grid).unwrap();
        assert!(matches!(newton_correct(&st, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn newton_potential_is_twice_the_block_cosh_term() {
        let grid = RadialGrid::new(1e-6, 300).unwrap();
        let t = 3.0;
        let st = build_glued(t, &profile(), &CutoffProfile::identity(), &grid).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), t, &grid).unwrap();
        let full = assemble_block(0, &coeffs, &grid, BlockKind::Full).unwrap();
        let conn = assemble_block(0, &coeffs, &grid, BlockKind::Connection).unwrap();
        let pot = st.newton_potential();
        for i in 0..grid.n - 1 {
            let cosh_term = full.potential[i][0][0] - conn.potential[i][0][0];
            assert!((pot[i] - 2.0 * cosh_term).abs() <= 1e-10 * pot[i].abs().max(1.0), "{i}");
        }
    }

    #[test]
    fn growth_of_f_is_linear_in_t_at_most() {
        let grid = RadialGrid::new(1e-6, 800).unwrap();
        let ts = [1.0, 2.0, 4.0, 8.0, 16.0];
        // without cutting, the bound is uniform over the whole sweep
        let plain = growth_norm_check(&ts, &profile(), &CutoffProfile::identity(), &grid).unwrap();
        let s: Vec<f64> = plain.iter().map(|r| r.sup_df_over_t).collect();
        assert!(spread(&s) < 3.0, "{s:?}");
        // the cutoff's derivatives hit h_1, still O(1) on the annulus, at t = 1
        let rows = growth_norm_check(&ts, &profile(), &CutoffProfile::default(), &grid).unwrap();
        let s: Vec<f64> = rows[1..].iter().map(|r| r.sup_df_over_t).collect();
        assert!(spread(&s) < 3.0, "{s:?}");
        for r in rows.iter().filter(|r| r.t >= 4.0) {
            assert!(r.f_min >= 0.0 && r.f_max <= 0.125 + 0.05, "{r:?}");
        }
    }
}
