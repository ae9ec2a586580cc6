//! Pairs `(A, Φ)` sampled on a polar grid of the unit disk.
//!
//! A unitary connection is stored through its `(0,1)` part `A^{0,1} = a01 dz̄`;
//! the `(1,0)` part is `−a01*`. The Higgs field is `Φ = φ dz`. Samples are
//! stored radius-major: index `i·n_theta + j` is `(r_i, θ_j)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{commutator, TracelessMatrix};
use crate::error::{Error, Result};
use crate::numerics::{SpectralDerivative, UniformDifferentiator};

/// Default number of angular samples.
pub const DEFAULT_N_THETA: usize = 256;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairKind {
    /// The desingularized pair at the given `t`.
    FiniteT(f64),
    /// The singular limit `t → ∞`.
    Limiting,
    /// Anything else, e.g. the result of a gauge transformation.
    Other,
}

#[derive(Debug, Clone)]
pub struct DiskPair {
    pub kind: PairKind,
    /// Geometric radial grid.
    pub r: Vec<f64>,
    pub n_theta: usize,
    pub a01: Vec<TracelessMatrix>,
    pub phi: Vec<TracelessMatrix>,
    /// Exact `∂_r a01`, when known; otherwise differences are used.
    pub dr_a01: Option<Vec<TracelessMatrix>>,
    pub dr_phi: Option<Vec<TracelessMatrix>>,
}

/// Sup-norm residuals of `(F_A + t²[Φ∧Φ*], ∂̄_A Φ)` as `dz∧dz̄` coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitchinResidual {
    pub curvature: f64,
    pub holomorphic: f64,
}

impl HitchinResidual {
    pub fn max(&self) -> f64 {
        self.curvature.max(self.holomorphic)
    }
}

/// Radial and angular differentiation on a pair's grid.
#[derive(Debug)]
pub(crate) struct PolarDerivatives {
    r: Vec<f64>,
    n_theta: usize,
    dx: f64,
    fd: UniformDifferentiator,
    spectral: SpectralDerivative,
}

impl PolarDerivatives {
    pub(crate) fn new(r: &[f64], n_theta: usize) -> Result<Self> {
        check_grid(r, n_theta)?;
        let dx = (r[r.len() - 1] / r[0]).ln() / (r.len() - 1) as f64;
        Ok(PolarDerivatives {
            r: r.to_vec(),
            n_theta,
            dx,
            fd: UniformDifferentiator::new(9, 1),
            spectral: SpectralDerivative::new(n_theta),
        })
    }

    /// `∂_r` of a complex sample field, eighth order in `log r`.
    pub(crate) fn dr_scalar(&self, field: &[Complex64]) -> Vec<Complex64> {
        let (nr, nt) = (self.r.len(), self.n_theta);
        let mut out = vec![Complex64::new(0.0, 0.0); field.len()];
        let mut column = vec![Complex64::new(0.0, 0.0); nr];
        for j in 0..nt {
            for i in 0..nr {
                column[i] = field[i * nt + j];
            }
            let d = self.fd.apply_complex(&column, self.dx);
            for i in 0..nr {
                out[i * nt + j] = d[i] / self.r[i];
            }
        }
        out
    }

    pub(crate) fn dtheta_scalar(&self, field: &[Complex64]) -> Vec<Complex64> {
        let nt = self.n_theta;
        let mut out = Vec::with_capacity(field.len());
        for row in field.chunks(nt) {
            out.extend(self.spectral.differentiate(row));
        }
        out
    }

    pub(crate) fn dr(&self, field: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        map_entries(field, |v| self.dr_scalar(v))
    }

    pub(crate) fn dtheta(&self, field: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        map_entries(field, |v| self.dtheta_scalar(v))
    }

    fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// `∂_z̄ = (e^{iθ}/2)(∂_r + (i/r)∂_θ)` given both partial derivatives.
    pub(crate) fn dzbar(&self, dr: &[TracelessMatrix], dth: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        self.combine(dr, dth, 1.0)
    }

    /// `∂_z = (e^{−iθ}/2)(∂_r − (i/r)∂_θ)` given both partial derivatives.
    pub(crate) fn dz(&self, dr: &[TracelessMatrix], dth: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        self.combine(dr, dth, -1.0)
    }

    fn combine(&self, dr: &[TracelessMatrix], dth: &[TracelessMatrix], sign: f64) -> Vec<TracelessMatrix> {
        let nt = self.n_theta;
        let mut out = Vec::with_capacity(dr.len());
        for (i, &r) in self.r.iter().enumerate() {
            for j in 0..nt {
                let k = i * nt + j;
                let phase = Complex64::from_polar(0.5, sign * self.theta(j));
                let ang = I * sign / r;
                out.push((dr[k] + dth[k].scale(ang)).scale(phase));
            }
        }
        out
    }
}

fn map_entries<F>(field: &[TracelessMatrix], op: F) -> Vec<TracelessMatrix>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let a: Vec<Complex64> = field.iter().map(|m| m.a).collect();
    let b: Vec<Complex64> = field.iter().map(|m| m.b).collect();
    let c: Vec<Complex64> = field.iter().map(|m| m.c).collect();
    let (da, db, dc) = (op(&a), op(&b), op(&c));
    (0..field.len())
        .map(|k| TracelessMatrix::new(da[k], db[k], dc[k]))
        .collect()
}

pub(crate) fn check_grid(r: &[f64], n_theta: usize) -> Result<()> {
    if r.len() < 16 || n_theta < 8 {
        return Err(Error::invalid("polar grid needs at least 16 radii and 8 angles"));
    }
    if r[0] <= 0.0 {
        return Err(Error::invalid("radii must be positive"));
    }
    let q = r[1] / r[0];
    let geometric = r.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9);
    if !(q > 1.0) || !geometric {
        return Err(Error::invalid("radial grid must be increasing and geometric"));
    }
    Ok(())
}

impl DiskPair {
    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a pair by sampling closures of `(r, θ)`.
    pub fn from_fn<A, P>(kind: PairKind, r: &[f64], n_theta: usize, a01: A, phi: P) -> Result<Self>
    where
        A: Fn(f64, f64) -> TracelessMatrix,
        P: Fn(f64, f64) -> TracelessMatrix,
    {
        check_grid(r, n_theta)?;
        let mut av = Vec::with_capacity(r.len() * n_theta);
        let mut pv = Vec::with_capacity(r.len() * n_theta);
        for &ri in r {
            for j in 0..n_theta {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                av.push(a01(ri, th));
                pv.push(phi(ri, th));
            }
        }
        Ok(DiskPair {
            kind,
            r: r.to_vec(),
            n_theta,
            a01: av,
            phi: pv,
            dr_a01: None,
            dr_phi: None,
        })
    }

    /// `(A₀, Φ₀) = (0, [[0, 1], [z, 0]] dz)`.
    pub fn model(r: &[f64], n_theta: usize) -> Result<Self> {
        Self::from_fn(
            PairKind::Other,
            r,
            n_theta,
            |_, _| TracelessMatrix::ZERO,
            |r, th| TracelessMatrix::off_diagonal(Complex64::new(1.0, 0.0), Complex64::from_polar(r, th)),
        )
    }

    /// The limiting pair: `φ = [[0, √r], [√r e^{iθ}, 0]]` and
    /// `A = (1/8) diag(1, −1)(dz/z − dz̄/z̄)`.
    pub fn limiting(r: &[f64], n_theta: usize) -> Result<Self> {
        let mut pair = Self::from_fn(
            PairKind::Limiting,
            r,
            n_theta,
            |r, th| TracelessMatrix::diagonal(Complex64::from_polar(-0.125 / r, th)),
            |r, th| TracelessMatrix::off_diagonal(Complex64::new(r.sqrt(), 0.0), Complex64::from_polar(r.sqrt(), th)),
        )?;
        let mut da = Vec::with_capacity(pair.len());
        let mut dp = Vec::with_capacity(pair.len());
        for &ri in r {
            for j in 0..n_theta {
                let th = pair.theta(j);
                da.push(TracelessMatrix::diagonal(Complex64::from_polar(0.125 / (ri * ri), th)));
                let s = 0.5 / ri.sqrt();
                dp.push(TracelessMatrix::off_diagonal(Complex64::new(s, 0.0), Complex64::from_polar(s, th)));
            }
        }
        pair.dr_a01 = Some(da);
        pair.dr_phi = Some(dp);
        Ok(pair)
    }

    pub(crate) fn derivatives(&self) -> Result<PolarDerivatives> {
        PolarDerivatives::new(&self.r, self.n_theta)
    }

    fn dr_fields(&self, d: &PolarDerivatives) -> (Vec<TracelessMatrix>, Vec<TracelessMatrix>) {
        let da = self.dr_a01.clone().unwrap_or_else(|| d.dr(&self.a01));
        let dp = self.dr_phi.clone().unwrap_or_else(|| d.dr(&self.phi));
        (da, dp)
    }

    /// `F_A` as the coefficient of `dz∧dz̄`: `∂_z a01 − ∂_z̄ a10 + [a10, a01]`.
    pub fn curvature(&self) -> Result<Vec<TracelessMatrix>> {
        let d = self.derivatives()?;
        let (dr_a, _) = self.dr_fields(&d);
        Ok(self.curvature_with(&d, &dr_a))
    }

    fn curvature_with(&self, d: &PolarDerivatives, dr_a: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        let dth_a = d.dtheta(&self.a01);
        let dz_a = d.dz(dr_a, &dth_a);
        (0..self.len())
            .map(|k| {
                let a01 = self.a01[k];
                let a10 = -a01.adjoint();
                // ∂_z̄ a10 = −(∂_z a01)*
                dz_a[k] + dz_a[k].adjoint() + commutator(&a10, &a01)
            })
            .collect()
    }

    /// `∂̄_A φ = ∂_z̄ φ + [a01, φ]` as the coefficient of `dz̄∧dz`.
    pub fn dbar_phi(&self) -> Result<Vec<TracelessMatrix>> {
        let d = self.derivatives()?;
        let (_, dr_p) = self.dr_fields(&d);
        Ok(self.dbar_phi_with(&d, &dr_p))
    }

    fn dbar_phi_with(&self, d: &PolarDerivatives, dr_p: &[TracelessMatrix]) -> Vec<TracelessMatrix> {
        let dth = d.dtheta(&self.phi);
        let dzbar = d.dzbar(dr_p, &dth);
        (0..self.len())
            .map(|k| dzbar[k] + commutator(&self.a01[k], &self.phi[k]))
            .collect()
    }

    /// `[φ, φ*]`.
    pub fn higgs_commutator(&self) -> Vec<TracelessMatrix> {
        self.phi.iter().map(|p| commutator(p, &p.adjoint())).collect()
    }

    /// Max-norm of `F_A + t²[φ, φ*]` and of `∂̄_A φ` over radii in `[r_lo, r_hi]`.
    pub fn hitchin_residual_on(&self, t: f64, r_lo: f64, r_hi: f64) -> Result<HitchinResidual> {
        let d = self.derivatives()?;
        let (dr_a, dr_p) = self.dr_fields(&d);
        let f = self.curvature_with(&d, &dr_a);
        let db = self.dbar_phi_with(&d, &dr_p);
        let comm = self.higgs_commutator();
        let t2 = t * t;
        let mut out = HitchinResidual {
            curvature: 0.0,
            holomorphic: 0.0,
        };
        for (i, &r) in self.r.iter().enumerate() {
            if r < r_lo * (1.0 - 1e-12) || r > r_hi * (1.0 + 1e-12) {
                continue;
            }
            for j in 0..self.n_theta {
                let k = self.index(i, j);
                let hit = f[k] + comm[k].scale_re(t2);
                out.curvature = out.curvature.max(hit.max_abs());
                out.holomorphic = out.holomorphic.max(db[k].max_abs());
            }
        }
        Ok(out)
    }

    /// Residual over the whole grid.
    pub fn hitchin_residual(&self, t: f64) -> Result<HitchinResidual> {
        self.hitchin_residual_on(t, 0.0, f64::INFINITY)
    }

    /// Polar components `(A_r, A_θ)` of the full connection matrix.
    pub fn polar_components(&self) -> Vec<(crate::algebra::Mat2, crate::algebra::Mat2)> {
        let mut out = Vec::with_capacity(self.len());
        for (i, &r) in self.r.iter().enumerate() {
            for j in 0..self.n_theta {
                let k = self.index(i, j);
                let e = Complex64::from_polar(1.0, self.theta(j));
                let a01 = self.a01[k].to_mat2();
                let a10 = self.a01[k].adjoint().to_mat2().scale(Complex64::new(-1.0, 0.0));
                // dz = e^{iθ}(dr + i r dθ), dz̄ = e^{−iθ}(dr − i r dθ)
                let ar = a10.scale(e) + a01.scale(e.conj());
                let ath = a10.scale(I * r * e) + a01.scale(-I * r * e.conj());
                out.push((ar, ath));
            }
        }
        out
    }

    /// Largest pointwise discrepancy of connection and Higgs field against
    /// `other` over radii in `[r_lo, r_hi]`.
    pub fn max_discrepancy(&self, other: &DiskPair, r_lo: f64, r_hi: f64) -> Result<f64> {
        if self.r != other.r || self.n_theta != other.n_theta {
            return Err(Error::invalid("pairs live on different grids"));
        }
        let mut worst: f64 = 0.0;
        for (i, &r) in self.r.iter().enumerate() {
            if r < r_lo * (1.0 - 1e-12) || r > r_hi * (1.0 + 1e-12) {
                continue;
            }
            for j in 0..self.n_theta {
                let k = self.index(i, j);
                worst = worst
                    .max((self.a01[k] - other.a01[k]).max_abs())
                    .max((self.phi[k] - other.phi[k]).max_abs());
            }
        }
        Ok(worst)
    }
}
