//! Complex gauge transformations of disk pairs.
//!
//! A gauge is sampled on the same polar grid as the pair it acts on. The
//! action is `Φ^g = g⁻¹Φg` and `a01^g = g⁻¹ a01 g + g⁻¹∂_z̄ g`, which fixes the
//! `(1,0)` part as `−(a01^g)*`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{Mat2, TracelessMatrix};
use crate::error::{Error, Result};
use crate::fiducial::{check_grid, DiskPair, FiducialFamily, PairKind, PolarDerivatives};
use crate::numerics::SpectralDerivative;

/// Gauges whose condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Samples of `g: D^× → SL(2, C)` on a polar grid.
#[derive(Debug, Clone)]
pub struct GaugeField {
    pub r: Vec<f64>,
    pub n_theta: usize,
    pub g: Vec<Mat2>,
    /// Exact `∂_r g`, when known.
    pub dr: Option<Vec<Mat2>>,
}

impl GaugeField {
    pub fn from_fn<G>(r: &[f64], n_theta: usize, g: G) -> Result<Self>
    where
        G: Fn(f64, f64) -> Mat2,
    {
        check_grid(r, n_theta)?;
        let mut out = Vec::with_capacity(r.len() * n_theta);
        for &ri in r {
            for j in 0..n_theta {
                out.push(g(ri, theta(j, n_theta)));
            }
        }
        Ok(GaugeField {
            r: r.to_vec(),
            n_theta,
            g: out,
            dr: None,
        })
    }

    /// Attaches an exact radial derivative.
    pub fn with_radial_derivative<D>(mut self, dr: D) -> Self
    where
        D: Fn(f64, f64) -> Mat2,
    {
        let mut out = Vec::with_capacity(self.g.len());
        for &ri in &self.r {
            for j in 0..self.n_theta {
                out.push(dr(ri, theta(j, self.n_theta)));
            }
        }
        self.dr = Some(out);
        self
    }

    pub fn identity(r: &[f64], n_theta: usize) -> Result<Self> {
        Ok(Self::from_fn(r, n_theta, |_, _| Mat2::identity())?.with_radial_derivative(|_, _| zero()))
    }

    /// Pointwise product `g·h`. The exact radial derivative is kept when
    /// both factors carry one.
    pub fn compose(&self, h: &GaugeField) -> Result<GaugeField> {
        self.same_grid(&h.r, h.n_theta)?;
        let g: Vec<Mat2> = self.g.iter().zip(&h.g).map(|(a, b)| *a * *b).collect();
        let dr = match (&self.dr, &h.dr) {
            (Some(da), Some(db)) => Some(
                (0..g.len())
                    .map(|k| da[k] * h.g[k] + self.g[k] * db[k])
                    .collect(),
            ),
            _ => None,
        };
        Ok(GaugeField {
            r: self.r.clone(),
            n_theta: self.n_theta,
            g,
            dr,
        })
    }

    /// Pointwise inverse, with `∂_r g⁻¹ = −g⁻¹(∂_r g)g⁻¹` when available.
    pub fn inverse(&self) -> Result<GaugeField> {
        let inv = self.g.iter().map(|m| m.inverse()).collect::<Result<Vec<_>>>()?;
        let dr = self.dr.as_ref().map(|d| {
            (0..inv.len())
                .map(|k| (inv[k] * d[k] * inv[k]).scale(Complex64::new(-1.0, 0.0)))
                .collect()
        });
        Ok(GaugeField {
            r: self.r.clone(),
            n_theta: self.n_theta,
            g: inv,
            dr,
        })
    }

    pub fn max_condition_number(&self) -> f64 {
        self.g.iter().map(Mat2::condition_number).fold(0.0, f64::max)
    }

    pub fn max_det_defect(&self) -> f64 {
        self.g.iter().map(|m| (m.det() - 1.0).norm()).fold(0.0, f64::max)
    }

    fn same_grid(&self, r: &[f64], n_theta: usize) -> Result<()> {
        if self.r != r || self.n_theta != n_theta {
            return Err(Error::invalid("gauge and pair live on different grids"));
        }
        Ok(())
    }

    /// `∂_z̄ g`, spectral in θ and eighth order in `log r`.
    fn dzbar(&self, d: &PolarDerivatives) -> Vec<Mat2> {
        let dr = self.dr.clone().unwrap_or_else(|| map_mat(&self.g, |v| d.dr_scalar(v)));
        let dth = map_mat(&self.g, |v| d.dtheta_scalar(v));
        let nt = self.n_theta;
        let mut out = Vec::with_capacity(self.g.len());
        for (i, &r) in self.r.iter().enumerate() {
            for j in 0..nt {
                let k = i * nt + j;
                let phase = Complex64::from_polar(0.5, theta(j, nt));
                out.push((dr[k] + dth[k].scale(I / r)).scale(phase));
            }
        }
        out
    }
}

fn theta(j: usize, n_theta: usize) -> f64 {
    2.0 * std::f64::consts::PI * j as f64 / n_theta as f64
}

fn zero() -> Mat2 {
    Mat2::diag(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
}

fn map_mat<F>(field: &[Mat2], op: F) -> Vec<Mat2>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut entries = [[vec![], vec![]], [vec![], vec![]]];
    for (a, row) in entries.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            let col: Vec<Complex64> = field.iter().map(|m| m.m[a][b]).collect();
            *e = op(&col);
        }
    }
    (0..field.len())
        .map(|k| {
            Mat2::new(
                entries[0][0][k],
                entries[0][1][k],
                entries[1][0][k],
                entries[1][1][k],
            )
        })
        .collect()
}

/// `(A^g, Φ^g)`.
pub fn apply_complex_gauge(pair: &DiskPair, g: &GaugeField) -> Result<DiskPair> {
    g.same_grid(&pair.r, pair.n_theta)?;
    let cond = g.max_condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular(format!(
            "gauge condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}"
        )));
    }
    let d = PolarDerivatives::new(&pair.r, pair.n_theta)?;
    let dzbar = g.dzbar(&d);
    let mut a01 = Vec::with_capacity(pair.len());
    let mut phi = Vec::with_capacity(pair.len());
    for k in 0..pair.len() {
        let gi = g.g[k].inverse()?;
        let a = gi * pair.a01[k].to_mat2() * g.g[k] + gi * dzbar[k];
        a01.push(TracelessMatrix::from_mat2(&a));
        phi.push(pair.phi[k].conjugate_by(&g.g[k])?);
    }
    Ok(DiskPair {
        kind: PairKind::Other,
        r: pair.r.clone(),
        n_theta: pair.n_theta,
        a01,
        phi,
        dr_a01: None,
        dr_phi: None,
    })
}

/// `g = diag(e^u, e^{−u})` with `u` real and radial.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalGauge {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    /// Exact `u′(r)`, when known.
    pub du: Option<Vec<f64>>,
}

impl DiagonalGauge {
    pub fn new(r: &[f64], u: Vec<f64>, du: Option<Vec<f64>>) -> Result<Self> {
        if u.len() != r.len() || du.as_ref().is_some_and(|d| d.len() != r.len()) {
            return Err(Error::invalid("gauge samples do not match the radial grid"));
        }
        Ok(DiagonalGauge { r: r.to_vec(), u, du })
    }

    /// `u = −(1/4) log r`, i.e. `diag(|z|^{−1/4}, |z|^{1/4})`.
    pub fn singular(r: &[f64]) -> Self {
        DiagonalGauge {
            r: r.to_vec(),
            u: r.iter().map(|r| -0.25 * r.ln()).collect(),
            du: Some(r.iter().map(|r| -0.25 / r).collect()),
        }
    }

    /// `u_t = −(1/4) log r − (1/2) h_t`, which maps the model pair to the
    /// fiducial pair of `family`. With `sign = −1` the exponent is negated.
    pub fn orbit(family: &FiducialFamily, sign: f64) -> Self {
        let r = &family.r;
        DiagonalGauge {
            r: r.clone(),
            u: (0..r.len())
                .map(|i| sign * (-0.25 * r[i].ln() - 0.5 * family.h[i]))
                .collect(),
            du: Some(
                (0..r.len())
                    .map(|i| sign * (-0.25 - 0.5 * family.r_dh[i]) / r[i])
                    .collect(),
            ),
        }
    }

    pub fn to_field(&self, n_theta: usize) -> Result<GaugeField> {
        check_grid(&self.r, n_theta)?;
        let n = self.r.len();
        let mut g = Vec::with_capacity(n * n_theta);
        let mut dr = Vec::with_capacity(n * n_theta);
        for i in 0..n {
            let (e, ei) = (self.u[i].exp(), (-self.u[i]).exp());
            let m = Mat2::diag(e.into(), ei.into());
            let dm = self.du.as_ref().map(|du| Mat2::diag((du[i] * e).into(), (-du[i] * ei).into()));
            for _ in 0..n_theta {
                g.push(m);
                if let Some(dm) = dm {
                    dr.push(dm);
                }
            }
        }
        Ok(GaugeField {
            r: self.r.clone(),
            n_theta,
            g,
            dr: self.du.as_ref().map(|_| dr),
        })
    }
}

/// Report of [`verify_orbit_finite_t`] and [`verify_singular_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitCheck {
    pub t: Option<f64>,
    pub r_lo: f64,
    pub discrepancy: f64,
}

/// Radius below which orbit comparisons are not made.
pub const ORBIT_R_MIN: f64 = 0.05;

/// Applies `diag(e^{u_t}, e^{−u_t})` to the model pair and compares with the
/// fiducial pair of `family` on `r ≥ 0.05`.
pub fn verify_orbit_finite_t(family: &FiducialFamily, n_theta: usize) -> Result<OrbitCheck> {
    orbit_discrepancy(family, n_theta, 1.0)
}

/// Same comparison with the exponent negated; a negative control.
pub fn verify_orbit_wrong_sign(family: &FiducialFamily, n_theta: usize) -> Result<OrbitCheck> {
    orbit_discrepancy(family, n_theta, -1.0)
}

fn orbit_discrepancy(family: &FiducialFamily, n_theta: usize, sign: f64) -> Result<OrbitCheck> {
    let model = DiskPair::model(&family.r, n_theta)?;
    let g = DiagonalGauge::orbit(family, sign).to_field(n_theta)?;
    let moved = apply_complex_gauge(&model, &g)?;
    let target = family.pair(n_theta)?;
    Ok(OrbitCheck {
        t: Some(family.t),
        r_lo: ORBIT_R_MIN,
        discrepancy: moved.max_discrepancy(&target, ORBIT_R_MIN, f64::INFINITY)?,
    })
}

/// `diag(|z|^{−1/4}, |z|^{1/4})` applied to the model pair against the
/// limiting pair on `r ≥ r_lo`.
pub fn verify_singular_orbit(r: &[f64], n_theta: usize, r_lo: f64) -> Result<OrbitCheck> {
    let model = DiskPair::model(r, n_theta)?;
    let g = DiagonalGauge::singular(r).to_field(n_theta)?;
    let moved = apply_complex_gauge(&model, &g)?;
    let target = DiskPair::limiting(r, n_theta)?;
    Ok(OrbitCheck {
        t: None,
        r_lo,
        discrepancy: moved.max_discrepancy(&target, r_lo, f64::INFINITY)?,
    })
}

/// `g_μ = exp(μJ)` with `J = [[0, 1], [e^{iθ}, 0]]`, the stabilizer of the
/// limiting Higgs field.
///
/// Since `J² = e^{iθ}`, `g_μ = cosh s + μ (sinh s / s) J` with `s² = e^{iθ}μ²`.
/// Both `cosh` and `sinh s / s` are even in `s`, so no branch of `e^{iθ/2}`
/// is ever chosen.
#[derive(Debug, Clone)]
pub struct StabilizerGauge {
    pub r: Vec<f64>,
    pub n_theta: usize,
    pub mu: Vec<Complex64>,
    /// `∂_r μ`, when known.
    pub dr_mu: Option<Vec<Complex64>>,
    /// `max |e^{iθ}μ + μ̄|`.
    pub unitarity_defect: f64,
    /// Whether the defect is within tolerance, i.e. `g_μ` is unitary.
    pub unitary: bool,
    /// Residuals of `∂_r(iv) = −Pw`, `∂_rμ = −w` and `Pμ = iv`.
    pub compatibility: f64,
    pub radial_residual: f64,
    pub angular_residual: f64,
}

fn sinhc(s: Complex64) -> Complex64 {
    if s.norm() < 1e-4 {
        let s2 = s * s;
        1.0 + s2 / 6.0 * (1.0 + s2 / 20.0)
    } else {
        s.sinh() / s
    }
}

/// `g_μ` at angle `θ`.
pub fn stabilizer_matrix(mu: Complex64, theta: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, theta);
    let s = (e * mu * mu).sqrt();
    let (c, k) = (s.cosh(), mu * sinhc(s));
    Mat2::new(c, k, e * k, c)
}

impl StabilizerGauge {
    /// Wraps given samples of `μ` and its radial derivative.
    pub fn from_samples(r: &[f64], n_theta: usize, mu: Vec<Complex64>, dr_mu: Option<Vec<Complex64>>, tol: f64) -> Result<Self> {
        check_grid(r, n_theta)?;
        if mu.len() != r.len() * n_theta || dr_mu.as_ref().is_some_and(|d| d.len() != mu.len()) {
            return Err(Error::invalid("μ samples do not match the grid"));
        }
        let defect = unitarity_defect(&mu, n_theta);
        let scale = mu.iter().map(|m| m.norm()).fold(1.0, f64::max);
        Ok(StabilizerGauge {
            r: r.to_vec(),
            n_theta,
            unitary: defect <= tol * scale,
            mu,
            dr_mu,
            unitarity_defect: defect,
            compatibility: 0.0,
            radial_residual: 0.0,
            angular_residual: 0.0,
        })
    }

    pub fn to_field(&self) -> Result<GaugeField> {
        let nt = self.n_theta;
        let mut g = Vec::with_capacity(self.mu.len());
        let mut dr = Vec::with_capacity(self.mu.len());
        for i in 0..self.r.len() {
            for j in 0..nt {
                let k = i * nt + j;
                let th = theta(j, nt);
                let m = stabilizer_matrix(self.mu[k], th);
                if let Some(d) = &self.dr_mu {
                    // ∂_r exp(μJ) = (∂_r μ) J exp(μJ)
                    let jm = Mat2::new(0.0.into(), 1.0.into(), Complex64::from_polar(1.0, th), 0.0.into());
                    dr.push((jm * m).scale(d[k]));
                }
                g.push(m);
            }
        }
        Ok(GaugeField {
            r: self.r.clone(),
            n_theta: nt,
            g,
            dr: self.dr_mu.as_ref().map(|_| dr),
        })
    }
}

fn unitarity_defect(mu: &[Complex64], n_theta: usize) -> f64 {
    mu.iter()
        .enumerate()
        .map(|(k, m)| (Complex64::from_polar(1.0, theta(k % n_theta, n_theta)) * m + m.conj()).norm())
        .fold(0.0, f64::max)
}

/// Applies the Fourier multiplier `m(ℓ)` on every radius.
fn angular_multiplier<M>(field: &[Complex64], n_theta: usize, spectral: &SpectralDerivative, m: M) -> Vec<Complex64>
where
    M: Fn(f64) -> Complex64,
{
    let mut out = Vec::with_capacity(field.len());
    for row in field.chunks(n_theta) {
        let mut c = spectral.coefficients(row);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= m(spectral.wavenumber(k));
        }
        out.extend(spectral.synthesize(&c));
    }
    out
}

/// Solves `(∂_r − P/r)μ = −w − (i/r)v` with `P = −i∂_θ + 1/2` by taking
/// `μ = P⁻¹(iv)` mode by mode.
///
/// `v` and `w` are the upper-right entries of `A_θ` and `A_r`, sampled on the
/// polar grid `(r, θ_j)`. The flatness compatibility `∂_r(iv) = −Pw` is
/// checked first and the input is rejected when its residual, relative to
/// the data, exceeds `tol`. On every mode `|ℓ + 1/2| ≥ 1/2`, so the inverse is
/// bounded by 2.
pub fn stabilizer_normalize(r: &[f64], n_theta: usize, v: &[Complex64], w: &[Complex64], tol: f64) -> Result<StabilizerGauge> {
    let d = PolarDerivatives::new(r, n_theta)?;
    if v.len() != r.len() * n_theta || w.len() != v.len() {
        return Err(Error::invalid("v, w samples do not match the grid"));
    }
    let spectral = SpectralDerivative::new(n_theta);
    let p = |l: f64| Complex64::new(l + 0.5, 0.0);
    let iv: Vec<Complex64> = v.iter().map(|x| I * x).collect();
    let pw = angular_multiplier(w, n_theta, &spectral, p);
    let dr_iv = d.dr_scalar(&iv);
    let scale = v.iter().chain(w).map(|x| x.norm()).fold(1.0, f64::max);
    let compatibility = dr_iv
        .iter()
        .zip(&pw)
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max)
        / scale;
    if !(compatibility <= tol) {
        return Err(Error::invalid(format!(
            "connection is not flat: compatibility residual {compatibility:.3e} above {tol:.1e}"
        )));
    }

    let mu = angular_multiplier(&iv, n_theta, &spectral, |l| 1.0 / p(l));
    let dr_mu: Vec<Complex64> = w.iter().map(|x| -x).collect();
    let radial_residual = d
        .dr_scalar(&mu)
        .iter()
        .zip(w)
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max)
        / scale;
    let angular_residual = angular_multiplier(&mu, n_theta, &spectral, p)
        .iter()
        .zip(&iv)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    let mut gauge = StabilizerGauge::from_samples(r, n_theta, mu, Some(dr_mu), tol)?;
    gauge.compatibility = compatibility;
    gauge.radial_residual = radial_residual;
    gauge.angular_residual = angular_residual;
    Ok(gauge)
}

/// Upper-right entries `(v, w)` of `A_θ` and `A_r` of a pair's connection.
pub fn stabilizer_data(pair: &DiskPair) -> (Vec<Complex64>, Vec<Complex64>) {
    pair.polar_components()
        .iter()
        .map(|(ar, ath)| (ath.m[0][1], ar.m[0][1]))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::geometric_grid;
    use crate::painleve::{solve_connection, ConnectionConfig, PsiProfile};
    use crate::fiducial::{build_family, default_radial_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::{Arc, OnceLock};

    fn profile() -> Arc<PsiProfile> {
        static P: OnceLock<Arc<PsiProfile>> = OnceLock::new();
        P.get_or_init(|| Arc::new(solve_connection(&ConnectionConfig::default()).unwrap()))
            .clone()
    }

    fn grid() -> Vec<f64> {
        geometric_grid(0.05, 1.0, 120)
    }

    #[test]
    fn identity_leaves_pair_unchanged() {
        let r = grid();
        let pair = DiskPair::limiting(&r, 32).unwrap();
        let out = apply_complex_gauge(&pair, &GaugeField::identity(&r, 32).unwrap()).unwrap();
        assert!(out.max_discrepancy(&pair, 0.0, 1.0).unwrap() < 1e-15);
    }

    #[test]
    fn unitary_gauge_preserves_higgs_norm() {
        let r = grid();
        let pair = DiskPair::limiting(&r, 32).unwrap();
        let g = GaugeField::from_fn(&r, 32, |r, th| {
            let a = Complex64::from_polar(1.0, r + th);
            let b = Complex64::new(0.0, 0.0);
            Mat2::new(a, b, -b.conj(), a.conj())
        })
        .unwrap();
        let out = apply_complex_gauge(&pair, &g).unwrap();
        for k in 0..pair.len() {
            assert!((out.phi[k].norm() - pair.phi[k].norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_gauge_gives_limiting_pair() {
        let r = geometric_grid(1e-3, 1.0, 400);
        let check = verify_singular_orbit(&r, 64, 0.1).unwrap();
        assert!(check.discrepancy < 1e-8, "{}", check.discrepancy);
    }

    #[test]
    fn orbit_of_model_pair_is_the_fiducial_pair() {
        let p = profile();
        for t in [1.0, 8.0] {
            let fam = build_family(t, &p, &default_radial_grid()).unwrap();
            let good = verify_orbit_finite_t(&fam, 64).unwrap();
            assert!(good.discrepancy < 1e-7, "t = {t}: {}", good.discrepancy);
            let bad = verify_orbit_wrong_sign(&fam, 64).unwrap();
            assert!(bad.discrepancy > 1e-2);
        }
    }

    #[test]
    fn ill_conditioned_gauge_is_rejected() {
        let r = grid();
        let pair = DiskPair::model(&r, 16).unwrap();
        let g = DiagonalGauge::new(&r, vec![10.0; r.len()], None).unwrap().to_field(16).unwrap();
        assert!(matches!(apply_complex_gauge(&pair, &g), Err(Error::Singular(_))));
    }

    fn random_gauge(rng: &mut ChaCha8Rng, r: &[f64], nt: usize, unitary: bool) -> GaugeField {
        let (a, b, c) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(0..3) as f64);
        if unitary {
            // exp of a skew-Hermitian with radial amplitude a + b r and mode c
            let x = move |r: f64| a + b * r;
            let mat = move |r: f64, th: f64| {
                let (s, co) = x(r).sin_cos();
                let e = Complex64::from_polar(1.0, c * th);
                Mat2::new(co.into(), e * s, -e.conj() * s, co.into())
            };
            let dmat = move |r: f64, th: f64| {
                let (s, co) = x(r).sin_cos();
                let e = Complex64::from_polar(b, c * th);
                Mat2::new((-b * s).into(), e * co, -e.conj() * co, (-b * s).into())
            };
            GaugeField::from_fn(r, nt, mat).unwrap().with_radial_derivative(dmat)
        } else {
            let u: Vec<f64> = r.iter().map(|r| a + b * r * r).collect();
            let du: Vec<f64> = r.iter().map(|r| 2.0 * b * r).collect();
            DiagonalGauge::new(r, u, Some(du)).unwrap().to_field(nt).unwrap()
        }
    }

    #[test]
    fn gauge_action_is_a_right_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = grid();
        let nt = 32;
        let pair = DiskPair::limiting(&r, nt).unwrap();
        for trial in 0..6 {
            let g = random_gauge(&mut rng, &r, nt, trial % 2 == 0);
            let h = random_gauge(&mut rng, &r, nt, trial % 3 == 0);
            let two_steps = apply_complex_gauge(&apply_complex_gauge(&pair, &g).unwrap(), &h).unwrap();
            let once = apply_complex_gauge(&pair, &g.compose(&h).unwrap()).unwrap();
            let err = two_steps.max_discrepancy(&once, 0.0, 1.0).unwrap();
            assert!(err < 1e-9, "trial {trial}: {err}");
        }
    }

    // F_{A^g} = g⁻¹(F_A − ∂̄_A(G ∂_A G⁻¹))g as dz∧dz̄ coefficients, G = gg*.
    #[test]
    fn curvature_transforms_by_the_complex_gauge_rule() {
        let r = geometric_grid(0.1, 1.0, 160);
        let nt = 32;
        let pair = DiskPair::limiting(&r, nt).unwrap();
        let g = GaugeField::from_fn(&r, nt, |r, th| {
            let e = Complex64::from_polar(0.3 * r * r, th);
            Mat2::new(1.0.into(), e, 0.0.into(), 1.0.into())
        })
        .unwrap()
        .with_radial_derivative(|r, th| {
            Mat2::new(0.0.into(), Complex64::from_polar(0.6 * r, th), 0.0.into(), 0.0.into())
        });
        let moved = apply_complex_gauge(&pair, &g).unwrap();
        let direct = moved.curvature().unwrap();

        let d = PolarDerivatives::new(&r, nt).unwrap();
        let f = pair.curvature().unwrap();
        let big_g: Vec<Mat2> = g.g.iter().map(|m| *m * m.adjoint()).collect();
        let gi: Vec<Mat2> = big_g.iter().map(|m| m.inverse().unwrap()).collect();
        let partial = |field: &[Mat2], sign: f64| {
            let dr = map_mat(field, |v| d.dr_scalar(v));
            let dth = map_mat(field, |v| d.dtheta_scalar(v));
            (0..field.len())
                .map(|k| {
                    let (i, j) = (k / nt, k % nt);
                    let phase = Complex64::from_polar(0.5, sign * theta(j, nt));
                    (dr[k] + dth[k].scale(I * sign / r[i])).scale(phase)
                })
                .collect::<Vec<_>>()
        };
        let dz_gi = partial(&gi, -1.0);
        let y: Vec<Mat2> = (0..gi.len())
            .map(|k| {
                let a10 = pair.a01[k].adjoint().scale_re(-1.0).to_mat2();
                big_g[k] * (dz_gi[k] + a10 * gi[k] - gi[k] * a10)
            })
            .collect();
        let dzbar_y = partial(&y, 1.0);
        let mut worst: f64 = 0.0;
        for (i, &ri) in r.iter().enumerate() {
            if !(0.2..=0.9).contains(&ri) {
                continue;
            }
            for j in 0..nt {
                let k = i * nt + j;
                let a01 = pair.a01[k].to_mat2();
                let dbar_y = dzbar_y[k] + a01 * y[k] - y[k] * a01;
                let gk = g.g[k];
                let rule = gk.inverse().unwrap() * (f[k].to_mat2() - dbar_y) * gk;
                worst = worst.max(rule.max_abs_diff(&direct[k].to_mat2()));
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn zero_data_gives_zero_mu() {
        let r = grid();
        let z = vec![Complex64::new(0.0, 0.0); r.len() * 16];
        let s = stabilizer_normalize(&r, 16, &z, &z, 1e-8).unwrap();
        assert!(s.mu.iter().all(|m| m.norm() == 0.0));
        assert!(s.unitary);
    }

    #[test]
    fn single_mode_is_divided_by_l_plus_half() {
        let r = grid();
        let nt = 32;
        let eps = 0.1;
        for l in [-3i32, -1, 0, 2] {
            let lf = l as f64;
            let mut v = vec![];
            let mut w = vec![];
            let mut expect = vec![];
            for &ri in &r {
                for j in 0..nt {
                    let e = Complex64::from_polar(1.0, lf * theta(j, nt));
                    // ρ = r², and w = −∂_r μ
                    v.push(e * eps * ri * ri);
                    w.push(-I * eps * e * 2.0 * ri / (lf + 0.5));
                    expect.push(I * eps * e * ri * ri / (lf + 0.5));
                }
            }
            let s = stabilizer_normalize(&r, nt, &v, &w, 1e-8).unwrap();
            let err = s.mu.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-14, "ℓ = {l}: {err}");
            assert!(s.radial_residual < 1e-8 && s.angular_residual < 1e-14);
        }
    }

    #[test]
    fn non_flat_data_is_rejected() {
        let r = grid();
        let nt = 16;
        let v = vec![Complex64::new(0.0, 0.0); r.len() * nt];
        let w: Vec<Complex64> = (0..v.len()).map(|k| Complex64::new(0.1 + k as f64 * 1e-4, 0.0)).collect();
        assert!(matches!(stabilizer_normalize(&r, nt, &v, &w, 1e-8), Err(Error::InvalidInput(_))));
    }

    fn unitary_mu(r: &[f64], nt: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut mu = vec![];
        let mut dmu = vec![];
        for &ri in r {
            for j in 0..nt {
                let a = -(1.0 - Complex64::from_polar(1.0, -theta(j, nt)));
                mu.push(a * 0.4 * ri * ri);
                dmu.push(a * 0.8 * ri);
            }
        }
        (mu, dmu)
    }

    #[test]
    fn unitary_mu_gives_unitary_gauge_that_stabilizes_phi() {
        let r = grid();
        let nt = 32;
        let (mu, dmu) = unitary_mu(&r, nt);
        let s = StabilizerGauge::from_samples(&r, nt, mu, Some(dmu), 1e-12).unwrap();
        assert!(s.unitary, "{}", s.unitarity_defect);
        let field = s.to_field().unwrap();
        let pair = DiskPair::limiting(&r, nt).unwrap();
        for k in 0..pair.len() {
            let g = field.g[k];
            assert!((g * g.adjoint()).max_abs_diff(&Mat2::identity()) < 1e-13);
            assert!((g.det() - 1.0).norm() < 1e-13);
            let moved = pair.phi[k].conjugate_by(&g).unwrap();
            assert!((moved - pair.phi[k]).max_abs() < 1e-13);
        }
    }

    // Move the limiting pair off by g_μ⁻¹, read off (v, w) and recover μ.
    #[test]
    fn normalization_round_trip() {
        let r = grid();
        let nt = 64;
        let (mu, dmu) = unitary_mu(&r, nt);
        let s = StabilizerGauge::from_samples(&r, nt, mu.clone(), Some(dmu), 1e-12).unwrap();
        let inv = s.to_field().unwrap().inverse().unwrap();
        let limiting = DiskPair::limiting(&r, nt).unwrap();
        let moved = apply_complex_gauge(&limiting, &inv).unwrap();
        assert!(moved.curvature().unwrap().iter().all(|f| f.max_abs() < 1e-8));
        let (v, w) = stabilizer_data(&moved);
        let back = stabilizer_normalize(&r, nt, &v, &w, 1e-7).unwrap();
        let err = back.mu.iter().zip(&mu).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(back.unitary);
        let restored = apply_complex_gauge(&moved, &back.to_field().unwrap()).unwrap();
        assert!(restored.max_discrepancy(&limiting, 0.0, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn non_unitary_data_is_flagged() {
        let r = grid();
        let nt = 32;
        let eps = 0.1;
        let mut v = vec![];
        let mut w = vec![];
        for &ri in &r {
            for j in 0..nt {
                let e = Complex64::from_polar(1.0, theta(j, nt));
                v.push(e * eps * ri * ri);
                w.push(-I * eps * e * 2.0 * ri / 1.5);
            }
        }
        let s = stabilizer_normalize(&r, nt, &v, &w, 1e-8).unwrap();
        assert!(!s.unitary);
        assert!(s.unitarity_defect > 1e-3);
    }
}
