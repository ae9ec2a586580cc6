//! Complex 2×2 matrix algebra for `sl(2,C)` and `su(2)`.
//!
//! Trace-free matrices are stored by their three free entries. The operator
//! `M_φ γ = 2([φ*,[φ,γ]] + [φ,[φ*,γ]])` on Hermitian trace-free matrices is
//! represented as a real symmetric 3×3 matrix in the basis `σ_k = iτ_k`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// What a trace-free matrix stands for. Purely informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Role {
    #[default]
    Untagged,
    HiggsCoefficient,
    GaugeAlgebra,
    GaugeGroupLog,
}

/// `[[a, b], [c, -a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TracelessMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub role: Role,
}

impl TracelessMatrix {
    pub const ZERO: TracelessMatrix = TracelessMatrix {
        a: ZERO,
        b: ZERO,
        c: ZERO,
        role: Role::Untagged,
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        TracelessMatrix {
            a,
            b,
            c,
            role: Role::Untagged,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Off-diagonal matrix `[[0, b], [c, 0]]`.
    pub fn off_diagonal(b: Complex64, c: Complex64) -> Self {
        Self::new(ZERO, b, c)
    }

    /// `a · diag(1, -1)`.
    pub fn diagonal(a: Complex64) -> Self {
        Self::new(a, ZERO, ZERO)
    }

    /// Standard basis `τ₁, τ₂, τ₃` of `su(2)` (index 0, 1, 2).
    pub fn tau(k: usize) -> Self {
        match k {
            0 => Self::new(I, ZERO, ZERO),
            1 => Self::new(ZERO, ONE, -ONE),
            2 => Self::new(ZERO, I, I),
            _ => panic!("tau index {k} out of range"),
        }
    }

    /// `σ_k = iτ_k`, an orthogonal basis of `i·su(2)` with `|σ_k|² = 2`.
    pub fn sigma(k: usize) -> Self {
        Self::tau(k).scale(I)
    }

    pub fn d(&self) -> Complex64 {
        -self.a
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(self.a, self.b, self.c, -self.a)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TracelessMatrix {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            role: self.role,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        TracelessMatrix {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            role: self.role,
        }
    }

    pub fn trace(&self) -> Complex64 {
        ZERO
    }

    pub fn det(&self) -> Complex64 {
        -self.a * self.a - self.b * self.c
    }

    /// Frobenius inner product `tr(X Y*)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        2.0 * self.a * other.a.conj() + self.b * other.b.conj() + self.c * other.c.conj()
    }

    pub fn norm_sqr(&self) -> f64 {
        2.0 * self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.a.im.abs() <= tol && (self.b - self.c.conj()).norm() <= tol
    }

    /// Conjugation `g⁻¹ X g`.
    pub fn conjugate_by(&self, g: &Mat2) -> Result<Self> {
        let gi = g.inverse()?;
        Ok(Self::from_mat2(&(gi * self.to_mat2() * *g)).with_role(self.role))
    }

    /// Trace-free part of an arbitrary 2×2 matrix.
    pub fn from_mat2(m: &Mat2) -> Self {
        let half = 0.5 * (m.m[0][0] - m.m[1][1]);
        Self::new(half, m.m[0][1], m.m[1][0])
    }

    /// Coefficients `(γ¹, γ², γ³)` with `γ = Σ γ^k σ_k`; only meaningful for Hermitian input.
    pub fn hermitian_decomposition(&self) -> HermitianDecomposition {
        let coeff = |k: usize| 0.5 * self.inner(&Self::sigma(k)).re;
        HermitianDecomposition {
            coefficients: [coeff(0), coeff(1), coeff(2)],
        }
    }
}

impl Add for TracelessMatrix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        TracelessMatrix {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
            role: self.role,
        }
    }
}

impl Sub for TracelessMatrix {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        TracelessMatrix {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
            role: self.role,
        }
    }
}

impl Neg for TracelessMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

/// Hermitian trace-free matrix written as `iγ¹τ₁ + iγ²τ₂ + iγ³τ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermitianDecomposition {
    pub coefficients: [f64; 3],
}

impl HermitianDecomposition {
    pub fn reconstruct(&self) -> TracelessMatrix {
        (0..3).fold(TracelessMatrix::ZERO, |acc, k| {
            acc + TracelessMatrix::sigma(k).scale_re(self.coefficients[k])
        })
    }
}

/// General complex 2×2 matrix, used for gauge transformations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(d0: Complex64, d1: Complex64) -> Self {
        Self::new(d0, ZERO, ZERO, d1)
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= f64::MIN_POSITIVE {
            return Err(Error::Singular("2x2 matrix has zero determinant".into()));
        }
        let s = 1.0 / det;
        Ok(Self::new(
            self.m[1][1] * s,
            -self.m[0][1] * s,
            -self.m[1][0] * s,
            self.m[0][0] * s,
        ))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Spectral condition number `σ_max / σ_min`.
    pub fn condition_number(&self) -> f64 {
        let f = self.norm_sqr();
        let d = self.det().norm();
        let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
        let smax2 = 0.5 * (f + disc);
        let smin2 = d * d / smax2.max(f64::MIN_POSITIVE);
        if smin2 <= 0.0 {
            f64::INFINITY
        } else {
            (smax2 / smin2).sqrt()
        }
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        Mat2 { m: out }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

/// `xy − yx`.
pub fn commutator(x: &TracelessMatrix, y: &TracelessMatrix) -> TracelessMatrix {
    // [x, y] for x = [[a,b],[c,-a]], y = [[p,q],[s,-p]]
    let (a, b, c) = (x.a, x.b, x.c);
    let (p, q, s) = (y.a, y.b, y.c);
    TracelessMatrix {
        a: b * s - c * q,
        b: 2.0 * (a * q - b * p),
        c: 2.0 * (c * p - a * s),
        role: x.role,
    }
}

/// `M_φ γ = 2([φ*,[φ,γ]] + [φ,[φ*,γ]])`.
pub fn m_phi_apply(phi: &TracelessMatrix, gamma: &TracelessMatrix) -> TracelessMatrix {
    let phi_star = phi.adjoint();
    let first = commutator(&phi_star, &commutator(phi, gamma));
    let second = commutator(phi, &commutator(&phi_star, gamma));
    (first + second).scale_re(2.0).with_role(gamma.role)
}

/// Matrix of `M_φ` in the orthogonal basis `σ_k = iτ_k` of `i·su(2)`.
///
/// Entries are `⟨M_φ σ_j, σ_i⟩ / 2`; the basis has equal norms, so the
/// result is symmetric exactly when `M_φ` is self-adjoint.
pub fn m_phi_matrix(phi: &TracelessMatrix) -> Matrix3<f64> {
    let images: Vec<TracelessMatrix> = (0..3)
        .map(|j| m_phi_apply(phi, &TracelessMatrix::sigma(j)))
        .collect();
    Matrix3::from_fn(|i, j| 0.5 * images[j].inner(&TracelessMatrix::sigma(i)).re)
}

/// Dimension of `ker M_φ` on `i·su(2)`, counting eigenvalues below
/// `tol · max(1, ‖M_φ‖)`.
pub fn m_phi_kernel_dim(phi: &TracelessMatrix, tol: f64) -> usize {
    let m = m_phi_matrix(phi);
    let scale = m.norm().max(1.0);
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues
        .iter()
        .filter(|v| v.abs() <= tol * scale)
        .count()
}

/// Whether `[φ, φ*] = 0` up to `tol`.
pub fn is_normal(phi: &TracelessMatrix, tol: f64) -> bool {
    commutator(phi, &phi.adjoint()).norm() <= tol
}

/// Result of conjugating a Higgs field into `[[0, 1], [−det φ, 0]]` near a simple zero.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub points: Vec<Complex64>,
    /// Unimodular gauge `g = b^{-1/2} [[b, 0], [−a, 1]]` at each sample.
    pub gauges: Vec<Mat2>,
    /// `g⁻¹ φ g` at each sample.
    pub conjugated: Vec<TracelessMatrix>,
}

impl NormalForm {
    /// Largest deviation of the conjugated field from `[[0, 1], [z, 0]]`.
    pub fn deviation_from_standard(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.conjugated)
            .map(|(z, m)| (*m - TracelessMatrix::off_diagonal(ONE, *z)).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Normal form of a holomorphic Higgs field sampled on a small disc around a simple zero.
///
/// `samples` pairs points `z` with `φ(z)`. The field must already be in the
/// position where `φ(0)` is nilpotent with `b(0) ≠ 0`; `b` must not vanish
/// anywhere on the sample set. The square root uses the principal branch.
pub fn normal_form_at_zero(samples: &[(Complex64, TracelessMatrix)]) -> Result<NormalForm> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let (z0, phi0) = samples
        .iter()
        .min_by(|x, y| x.0.norm().total_cmp(&y.0.norm()))
        .expect("non-empty");
    let scale = phi0.norm().max(1.0);
    if phi0.b.norm() <= 1e-12 * scale {
        return Err(Error::invalid(format!(
            "upper-right entry vanishes at z = {z0}; apply a constant conjugation first"
        )));
    }

    let mut points = Vec::with_capacity(samples.len());
    let mut gauges = Vec::with_capacity(samples.len());
    let mut conjugated = Vec::with_capacity(samples.len());
    for (z, phi) in samples {
        if phi.b.norm() <= 1e-14 * phi.norm().max(1.0) {
            return Err(Error::domain(format!("b vanishes at sample z = {z}")));
        }
        let root = phi.b.sqrt();
        let g = Mat2::new(phi.b, ZERO, -phi.a, ONE).scale(1.0 / root);
        points.push(*z);
        conjugated.push(phi.conjugate_by(&g)?.with_role(Role::HiggsCoefficient));
        gauges.push(g);
    }
    Ok(NormalForm {
        points,
        gauges,
        conjugated,
    })
}
