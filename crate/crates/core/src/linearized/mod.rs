//! Fourier-mode blocks of `L_t = Δ_A + t²M_Φ` at the fiducial pair.
//!
//! On the mode space `E_ℓ` the operator becomes
//!
//! ```text
//! L_{ℓ,t} = diag(P⁻_{ℓ,t}, P⁺_{ℓ−1,t}) + 8t²r [[cosh 2h, 1], [1, cosh 2h]],
//! P^±_{ℓ,t} = −r⁻²(r∂_r)² + r⁻²(ℓ ± 4f)²,
//! ```
//!
//! acting on `L²((0,1), r dr)²` with Dirichlet data at `r = 1`. In `x = log r`
//! the quadratic form is `∫ |u_x|² + r²V|u|² dx` against the mass `∫ r²|u|² dx`,
//! which is discretized by linear elements on a uniform `x` grid.

mod banded;
mod indicial;
mod poisson;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiducial::rho_of;
use crate::painleve::PsiProfile;
use banded::{Block, BlockTridiagonal, Vec2};

pub use indicial::{indicial_roots, restricted_indicial_roots, IndicialRoot, RootSource};
pub use poisson::{apply_conic_operator, conic_poisson_solve, PoissonSolution};

/// Default number of radial nodes.
pub const DEFAULT_NODES: usize = 2000;
/// Default innermost radius of the operator grid.
pub const DEFAULT_R_MIN: f64 = 1e-8;
/// Default number of Fourier modes on each side.
pub const DEFAULT_L_MAX: i64 = 32;

/// Nodes uniform in `log r` on `[r_min, 1]`; the last node carries the
/// Dirichlet condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub n: usize,
    pub h: f64,
    /// All nodes, including `r = 1`.
    pub r: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_min: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::invalid(format!("radial grid needs at least 16 nodes, got {n}")));
        }
        if !(r_min > 0.0 && r_min < 1.0) {
            return Err(Error::invalid(format!("r_min must lie in (0, 1), got {r_min}")));
        }
        let x0 = r_min.ln();
        let h = -x0 / (n - 1) as f64;
        let mut r: Vec<f64> = (0..n).map(|i| (x0 + h * i as f64).exp()).collect();
        r[0] = r_min;
        r[n - 1] = 1.0;
        Ok(RadialGrid { r_min, n, h, r })
    }

    pub fn default_grid() -> Self {
        Self::new(DEFAULT_R_MIN, DEFAULT_NODES).expect("default grid is valid")
    }

    /// Nodes carrying unknowns.
    pub fn interior(&self) -> &[f64] {
        &self.r[..self.n - 1]
    }

    /// Trapezoid weights in `x` for the unknowns; the inner node gets half.
    fn weight(&self, i: usize) -> f64 {
        if i == 0 {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

/// `f_t` and `cosh 2h_t` on a radial grid.
#[derive(Debug, Clone)]
pub struct FiducialCoefficients {
    pub t: f64,
    pub f: Vec<f64>,
    pub cosh2h: Vec<f64>,
}

impl FiducialCoefficients {
    pub fn new(profile: &Arc<PsiProfile>, t: f64, grid: &RadialGrid) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        let mut f = Vec::with_capacity(grid.n);
        let mut c = Vec::with_capacity(grid.n);
        for &r in &grid.r {
            let (psi, q, _) = profile.eval_q_extended(rho_of(t, r))?;
            f.push(0.375 * q);
            c.push((2.0 * psi).cosh());
        }
        Ok(FiducialCoefficients { t, f, cosh2h: c })
    }

    /// `f ≡ 0`, `h ≡ 0`; with [`BlockKind::Flat`] this is the flat Laplacian.
    pub fn zero(grid: &RadialGrid) -> Self {
        FiducialCoefficients {
            t: 0.0,
            f: vec![0.0; grid.n],
            cosh2h: vec![1.0; grid.n],
        }
    }
}

/// Which terms of `L_{ℓ,t}` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// `diag(P_ℓ, P_{ℓ−1})`, the flat Laplacian on `E_ℓ`.
    Flat,
    /// `diag(P⁻_{ℓ,t}, P⁺_{ℓ−1,t})`, the connection Laplacian.
    Connection,
    /// The full `L_{ℓ,t}`.
    Full,
}

/// Scalar operators on a single Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalarKind {
    /// `P_ℓ`.
    Flat,
    /// `P⁻_{ℓ,t}`.
    Minus,
    /// `P⁺_{ℓ,t}`.
    Plus,
}

/// Discretized `−r⁻²(r∂_r)² + V(r)` on `(0, 1)` with measure `r dr`,
/// Dirichlet (or, if `neumann`, natural) at `r = 1` and the natural
/// condition at `r_min`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialOperator {
    pub l: i64,
    pub t: f64,
    /// 1 for a scalar mode, 2 for a block of `E_ℓ`.
    pub block: usize,
    pub r: Vec<f64>,
    pub h: f64,
    /// Potential matrix at every unknown node.
    pub potential: Vec<Block>,
    /// Diagonal mass `r_i² w_i`.
    pub mass: Vec<f64>,
    pub neumann: bool,
}

fn scalar_potential(l: f64, f: f64, r: f64, kind: ScalarKind) -> f64 {
    let s = match kind {
        ScalarKind::Flat => l,
        ScalarKind::Minus => l - 4.0 * f,
        ScalarKind::Plus => l + 4.0 * f,
    };
    s * s / (r * r)
}

/// Assembles the block of `L_{ℓ,t}` (or a part of it) on `E_ℓ`.
pub fn assemble_block(l: i64, coeffs: &FiducialCoefficients, grid: &RadialGrid, kind: BlockKind) -> Result<RadialOperator> {
    assemble_block_with(l, coeffs, grid, kind, false)
}

/// As [`assemble_block`] but with the natural (Neumann) condition at `r = 1`.
pub fn assemble_block_neumann(l: i64, coeffs: &FiducialCoefficients, grid: &RadialGrid, kind: BlockKind) -> Result<RadialOperator> {
    assemble_block_with(l, coeffs, grid, kind, true)
}

fn assemble_block_with(l: i64, coeffs: &FiducialCoefficients, grid: &RadialGrid, kind: BlockKind, neumann: bool) -> Result<RadialOperator> {
    check_coefficients(coeffs, grid)?;
    let t = coeffs.t;
    let lf = l as f64;
    let nodes = if neumann { &grid.r[..] } else { grid.interior() };
    let potential = nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = coeffs.f[i];
            let (k1, k2) = match kind {
                BlockKind::Flat => (ScalarKind::Flat, ScalarKind::Flat),
                _ => (ScalarKind::Minus, ScalarKind::Plus),
            };
            let mut p = [
                [scalar_potential(lf, f, r, k1), 0.0],
                [0.0, scalar_potential(lf - 1.0, f, r, k2)],
            ];
            if kind == BlockKind::Full {
                let w = 8.0 * t * t * r;
                p[0][0] += w * coeffs.cosh2h[i];
                p[1][1] += w * coeffs.cosh2h[i];
                p[0][1] += w;
                p[1][0] += w;
            }
            p
        })
        .collect();
    Ok(operator(l, t, 2, grid, potential, neumann))
}

/// Assembles a scalar mode operator.
pub fn assemble_scalar(l: i64, coeffs: &FiducialCoefficients, grid: &RadialGrid, kind: ScalarKind) -> Result<RadialOperator> {
    check_coefficients(coeffs, grid)?;
    let potential = grid
        .interior()
        .iter()
        .enumerate()
        .map(|(i, &r)| [[scalar_potential(l as f64, coeffs.f[i], r, kind), 0.0], [0.0, 0.0]])
        .collect();
    Ok(operator(l, coeffs.t, 1, grid, potential, false))
}

fn check_coefficients(coeffs: &FiducialCoefficients, grid: &RadialGrid) -> Result<()> {
    if coeffs.f.len() != grid.n || coeffs.cosh2h.len() != grid.n {
        return Err(Error::invalid("coefficients were sampled on a different grid"));
    }
    Ok(())
}

fn operator(l: i64, t: f64, block: usize, grid: &RadialGrid, potential: Vec<Block>, neumann: bool) -> RadialOperator {
    let r = if neumann { grid.r.clone() } else { grid.interior().to_vec() };
    let last = r.len() - 1;
    let mass = r
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let w = if neumann && i == last { 0.5 * grid.h } else { grid.weight(i) };
            r * r * w
        })
        .collect();
    RadialOperator {
        l,
        t,
        block,
        r,
        h: grid.h,
        potential,
        mass,
        neumann,
    }
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// The stiffness matrix `K` of the pencil `K − λM`.
    fn stiffness(&self) -> BlockTridiagonal {
        let n = self.len();
        let h = self.h;
        let diag = (0..n)
            .map(|i| {
                // end nodes close one element, every other node two
                let kin = if i == 0 || (self.neumann && i == n - 1) { 1.0 / h } else { 2.0 / h };
                let p = &self.potential[i];
                let m = self.mass[i];
                [[kin + m * p[0][0], m * p[0][1]], [m * p[1][0], kin + m * p[1][1]]]
            })
            .collect();
        BlockTridiagonal {
            size: self.block,
            diag,
            off: -1.0 / h,
        }
    }

    /// Smallest pointwise eigenvalue of the potential matrix.
    pub fn potential_floor(&self) -> f64 {
        self.potential
            .iter()
            .map(|p| {
                if self.block == 1 {
                    p[0][0]
                } else {
                    let m = 0.5 * (p[0][0] + p[1][1]);
                    let d = (0.25 * (p[0][0] - p[1][1]).powi(2) + p[0][1] * p[1][0]).sqrt();
                    m - d
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn potential_is_nonnegative(&self) -> bool {
        self.potential_floor() >= 0.0
    }

    /// Largest relative asymmetry of `M^{1/2}(M⁻¹K)M^{−1/2}`.
    pub fn asymmetry(&self) -> f64 {
        let k = self.stiffness();
        let s = self.block;
        let n = self.len();
        let scale = |i: usize| self.mass[i].sqrt();
        let mut worst: f64 = 0.0;
        let mut rel = |a: f64, b: f64| {
            let d = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(d);
        };
        for i in 0..n {
            // entry (i,j) of D M⁻¹ K D⁻¹ is K_ij √m_i⁻¹ √m_j⁻¹ · (m_j/m_j)
            if s == 2 {
                let a = k.diag[i][0][1] / self.mass[i];
                let b = k.diag[i][1][0] / self.mass[i];
                rel(a, b);
            }
            if i + 1 < n {
                let a = scale(i) * (k.off / self.mass[i]) / scale(i + 1);
                let b = scale(i + 1) * (k.off / self.mass[i + 1]) / scale(i);
                rel(a, b);
            }
        }
        worst
    }

    /// Number of eigenvalues below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        self.stiffness().negative_count(sigma, &self.mass)
    }

    /// `K u` per node, and `M u`.
    /// Dense symmetrized matrix `M^{−1/2} K M^{−1/2}`; for tests and small grids.
    pub fn symmetrized_dense(&self) -> DMatrix<f64> {
        let k = self.stiffness();
        let (s, n) = (self.block, self.len());
        let mut d = DMatrix::zeros(s * n, s * n);
        for i in 0..n {
            let mi = self.mass[i].sqrt();
            for a in 0..s {
                for b in 0..s {
                    d[(i * s + a, i * s + b)] = k.diag[i][a][b] / (mi * mi);
                }
                if i + 1 < n {
                    let v = k.off / (mi * self.mass[i + 1].sqrt());
                    d[(i * s + a, (i + 1) * s + a)] = v;
                    d[((i + 1) * s + a, i * s + a)] = v;
                }
            }
        }
        d
    }
}

/// Relative accuracy of [`smallest_eigenvalue`].
pub const EIGEN_RTOL: f64 = 1e-11;

/// Smallest eigenvalue by inertia bisection on `K − σM`.
pub fn smallest_eigenvalue(op: &RadialOperator) -> Result<f64> {
    let k = op.stiffness();
    let below = |s: f64| k.negative_count(s, &op.mass);
    if below(0.0) > 0 {
        return Err(Error::Convergence {
            iterations: 0,
            detail: format!("operator for ℓ = {} is not positive", op.l),
        });
    }
    let mut lo = 0.0;
    let mut hi = op.potential_floor().max(0.0) + 1.0;
    let mut grow = 0;
    while below(hi) == 0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::Convergence {
                iterations: grow,
                detail: "no eigenvalue bracket found".into(),
            });
        }
    }
    let mut it = 0;
    while hi - lo > EIGEN_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if below(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
        if it > 400 {
            return Err(Error::Convergence {
                iterations: it,
                detail: format!("bisection stalled in [{lo}, {hi}]"),
            });
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `‖Δ G‖` in `L²(r dr)`: the largest singular value of `S_Δ S_L⁻¹` with
/// `S = M^{−1/2} K M^{−1/2}`, from Lanczos on `S_L⁻¹ S_Δ² S_L⁻¹`.
pub fn laplacian_green_norm(op: &RadialOperator, flat: &RadialOperator) -> Result<f64> {
    if op.len() != flat.len() || op.block != flat.block || op.h != flat.h {
        return Err(Error::invalid("operators have different shapes"));
    }
    let fact = op.stiffness().factor()?;
    let sq: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let s_inv = |x: &[Vec2]| -> Vec<Vec2> {
        let rhs: Vec<Vec2> = x.iter().zip(&sq).map(|(v, s)| [v[0] * s, v[1] * s]).collect();
        let u = fact.solve(&rhs);
        u.iter().zip(&sq).map(|(v, s)| [v[0] * s, v[1] * s]).collect()
    };
    // Both stiffness matrices share the kinetic part, so
    // S_flat S_op⁻¹ = I − ΔV S_op⁻¹ with ΔV the pointwise potential gap.
    let dv: Vec<[[f64; 2]; 2]> = op
        .potential
        .iter()
        .zip(&flat.potential)
        .map(|(a, b)| [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
        .collect();
    let dv_mul = |x: &[Vec2]| -> Vec<Vec2> {
        x.iter()
            .zip(&dv)
            .map(|(v, d)| [d[0][0] * v[0] + d[0][1] * v[1], d[1][0] * v[0] + d[1][1] * v[1]])
            .collect()
    };
    let sub = |a: &[Vec2], b: &[Vec2]| -> Vec<Vec2> { a.iter().zip(b).map(|(x, y)| [x[0] - y[0], x[1] - y[1]]).collect() };
    let forward = |x: &[Vec2]| sub(x, &dv_mul(&s_inv(x)));
    let adjoint = |x: &[Vec2]| sub(x, &s_inv(&dv_mul(x)));
    let apply = |x: &[Vec2]| adjoint(&forward(x));
    let top = lanczos_top(op.len(), op.block, apply)?;
    Ok(top.sqrt())
}

fn dot(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum()
}

/// Largest eigenvalue of a symmetric positive operator by Lanczos with full
/// reorthogonalization.
fn lanczos_top<F>(n: usize, block: usize, apply: F) -> Result<f64>
where
    F: Fn(&[Vec2]) -> Vec<Vec2>,
{
    let dim = n * block;
    let max_k = dim.min(150);
    let mut q: Vec<Vec<Vec2>> = Vec::with_capacity(max_k);
    let mut v: Vec<Vec2> = (0..n)
        .map(|i| {
            let x = i as f64 + 1.0;
            [1.0 + 0.1 * (0.37 * x).sin(), if block == 2 { 1.0 + 0.1 * (0.71 * x).cos() } else { 0.0 }]
        })
        .collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|e| *e = [e[0] / norm, e[1] / norm]);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    for k in 0..max_k {
        q.push(v.clone());
        let mut w = apply(&v);
        let a = dot(&w, &v);
        alpha.push(a);
        for qi in &q {
            let c = dot(&w, qi);
            w.iter_mut().zip(qi).for_each(|(e, x)| *e = [e[0] - c * x[0], e[1] - c * x[1]]);
        }
        let b = dot(&w, &w).sqrt();
        let top = tridiagonal_top(&alpha, &beta);
        if k >= 4 && (top - last).abs() <= 1e-12 * top {
            return Ok(top);
        }
        last = top;
        if b <= 1e-14 * top.abs().max(1.0) {
            return Ok(top);
        }
        beta.push(b);
        v = w.iter().map(|e| [e[0] / b, e[1] / b]).collect();
    }
    if last.is_finite() {
        Ok(last)
    } else {
        Err(Error::Convergence {
            iterations: max_k,
            detail: "Lanczos produced no estimate".into(),
        })
    }
}

fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Per-mode data of [`green_norms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeNorms {
    pub l: i64,
    pub lambda_min: f64,
    /// `‖G_{ℓ,t}‖_{L²→L²} = 1/λ_min`.
    pub green_l2: f64,
    /// `‖Δ G_{ℓ,t}‖_{L²→L²}`.
    pub green_h2: f64,
    /// Pointwise floor of the connection potential `diag(V⁻_ℓ, V⁺_{ℓ−1})`.
    pub potential_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub t: f64,
    pub grid: RadialGrid,
    pub l: Vec<i64>,
    pub lambda_min: Vec<f64>,
    pub modes: Vec<ModeNorms>,
    pub g_norm_l2: f64,
    pub g_norm_h2_surrogate: f64,
    /// `min_{|ℓ| ≥ 2} floor_ℓ / ℓ²`.
    pub kappa: f64,
    pub indicial: Vec<f64>,
}

impl SpectralReport {
    /// Whether `1/λ_min(L_{ℓ,t}) ≤ κ⁻¹ℓ⁻²` for every `|ℓ| ≥ 2`.
    pub fn tail_bound_holds(&self) -> bool {
        self.modes
            .iter()
            .filter(|m| m.l.abs() >= 2)
            .all(|m| m.green_l2 <= 1.0 / (self.kappa * (m.l * m.l) as f64))
    }
}

/// `‖G_t‖` in the `L² → L²` and `L² → H²` senses, from all modes `|ℓ| ≤ l_max`.
pub fn green_norms(t: f64, l_max: i64, profile: &Arc<PsiProfile>, grid: &RadialGrid) -> Result<SpectralReport> {
    if l_max < 8 {
        return Err(Error::invalid(format!("ℓ_max must be at least 8, got {l_max}")));
    }
    let coeffs = FiducialCoefficients::new(profile, t, grid)?;
    let zero = FiducialCoefficients::zero(grid);
    let modes = (-l_max..=l_max)
        .into_par_iter()
        .map(|l| -> Result<ModeNorms> {
            let full = assemble_block(l, &coeffs, grid, BlockKind::Full)?;
            let conn = assemble_block(l, &coeffs, grid, BlockKind::Connection)?;
            let flat = assemble_block(l, &zero, grid, BlockKind::Flat)?;
            let lambda = smallest_eigenvalue(&full)?;
            Ok(ModeNorms {
                l,
                lambda_min: lambda,
                green_l2: 1.0 / lambda,
                green_h2: laplacian_green_norm(&full, &flat)?,
                potential_floor: conn.potential_floor(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kappa = modes
        .iter()
        .filter(|m| m.l.abs() >= 2)
        .map(|m| m.potential_floor / (m.l * m.l) as f64)
        .fold(f64::INFINITY, f64::min);
    let indicial = indicial_roots(-l_max..=l_max)
        .into_iter()
        .map(|r| r.value())
        .collect::<Vec<_>>();
    let mut distinct = indicial;
    distinct.dedup();
    Ok(SpectralReport {
        t,
        grid: grid.clone(),
        l: modes.iter().map(|m| m.l).collect(),
        lambda_min: modes.iter().map(|m| m.lambda_min).collect(),
        g_norm_l2: modes.iter().map(|m| m.green_l2).fold(0.0, f64::max),
        g_norm_h2_surrogate: modes.iter().map(|m| m.green_h2).fold(0.0, f64::max),
        kappa,
        modes,
        indicial: distinct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painleve::{solve_connection, ConnectionConfig};
    use std::sync::OnceLock;

    fn profile() -> Arc<PsiProfile> {
        static P: OnceLock<Arc<PsiProfile>> = OnceLock::new();
        P.get_or_init(|| Arc::new(solve_connection(&ConnectionConfig::default()).unwrap()))
            .clone()
    }

    // J₀ by its power series, first zero by bisection.
    fn j0(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = -0.25 * x * x;
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    fn j01() -> f64 {
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if j0(a) * j0(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    fn p0(n: usize) -> f64 {
        let grid = RadialGrid::new(1e-8, n).unwrap();
        let op = assemble_scalar(0, &FiducialCoefficients::zero(&grid), &grid, ScalarKind::Flat).unwrap();
        smallest_eigenvalue(&op).unwrap()
    }

    #[test]
    fn bessel_oracle_and_second_order_convergence() {
        let exact = j01().powi(2);
        assert!((exact - 5.783_185_962_946_784).abs() < 1e-12);
        let e: Vec<f64> = [500, 1000, 2000].iter().map(|&n| (p0(n) - exact).abs()).collect();
        assert!(e[2] / exact < 1e-3, "{}", e[2] / exact);
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn bisection_agrees_with_dense_eigensolver() {
        let grid = RadialGrid::new(1e-4, 120).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 2.0, &grid).unwrap();
        for l in [-2, 0, 1, 3] {
            let op = assemble_block(l, &coeffs, &grid, BlockKind::Full).unwrap();
            let dense = SymmetricEigen::new(op.symmetrized_dense()).eigenvalues.min();
            let bis = smallest_eigenvalue(&op).unwrap();
            assert!((bis / dense - 1.0).abs() < 1e-8, "ℓ = {l}: {bis} vs {dense}");
        }
    }

    #[test]
    fn operators_are_symmetric_with_nonnegative_potential() {
        let grid = RadialGrid::new(1e-8, 400).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 1.0, &grid).unwrap();
        for l in [-3, 0, 1, 5] {
            let op = assemble_block(l, &coeffs, &grid, BlockKind::Full).unwrap();
            assert!(op.asymmetry() < 1e-12);
            assert!(op.potential_is_nonnegative());
        }
    }

    #[test]
    fn adding_potential_never_lowers_the_bottom() {
        let grid = RadialGrid::new(1e-8, 600).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 4.0, &grid).unwrap();
        for l in [-2, 0, 1, 4] {
            let conn = smallest_eigenvalue(&assemble_block(l, &coeffs, &grid, BlockKind::Connection).unwrap()).unwrap();
            let full = smallest_eigenvalue(&assemble_block(l, &coeffs, &grid, BlockKind::Full).unwrap()).unwrap();
            assert!(full >= conn * (1.0 - 1e-10));
        }
        // P⁺_ℓ ≥ P_ℓ for ℓ ≥ 0; P⁻_ℓ ≥ P_ℓ for ℓ ≤ 0
        let zero = FiducialCoefficients::zero(&grid);
        for (l, kind) in [(0, ScalarKind::Plus), (3, ScalarKind::Plus), (0, ScalarKind::Minus), (-2, ScalarKind::Minus)] {
            let twisted = smallest_eigenvalue(&assemble_scalar(l, &coeffs, &grid, kind).unwrap()).unwrap();
            let flat = smallest_eigenvalue(&assemble_scalar(l, &zero, &grid, ScalarKind::Flat).unwrap()).unwrap();
            assert!(twisted >= flat * (1.0 - 1e-10), "ℓ = {l}");
        }
    }

    // For ℓ ≥ 1 the shift ℓ − 4f lowers the potential, so P⁻_{ℓ,t} sits below P_ℓ.
    #[test]
    fn minus_branch_can_drop_below_the_flat_operator() {
        let grid = RadialGrid::new(1e-8, 600).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 4.0, &grid).unwrap();
        let zero = FiducialCoefficients::zero(&grid);
        let twisted = smallest_eigenvalue(&assemble_scalar(1, &coeffs, &grid, ScalarKind::Minus).unwrap()).unwrap();
        let flat = smallest_eigenvalue(&assemble_scalar(1, &zero, &grid, ScalarKind::Flat).unwrap()).unwrap();
        assert!(twisted < flat);
    }

    #[test]
    fn high_modes_respect_the_potential_floor() {
        let grid = RadialGrid::new(1e-8, 600).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 1.0, &grid).unwrap();
        // 0 ≤ f < 1/8, so (2 − 4f)² and (1 + 4f)² are at least 1 on r ≤ 1
        let op = assemble_block(2, &coeffs, &grid, BlockKind::Connection).unwrap();
        assert!(op.potential_floor() > 0.99);
        let op5 = assemble_block(5, &coeffs, &grid, BlockKind::Full).unwrap();
        let kappa = assemble_block(5, &coeffs, &grid, BlockKind::Connection).unwrap().potential_floor() / 25.0;
        assert!(smallest_eigenvalue(&op5).unwrap() >= kappa * 25.0);
    }

    #[test]
    fn neumann_block_stays_positive_below_dirichlet() {
        let grid = RadialGrid::new(1e-6, 400).unwrap();
        for t in [1.0, 4.0] {
            let coeffs = FiducialCoefficients::new(&profile(), t, &grid).unwrap();
            let neu = smallest_eigenvalue(&assemble_block_neumann(0, &coeffs, &grid, BlockKind::Full).unwrap()).unwrap();
            let dir = smallest_eigenvalue(&assemble_block(0, &coeffs, &grid, BlockKind::Full).unwrap()).unwrap();
            assert!(neu > 0.0 && neu <= dir, "{neu} {dir}");
        }
        // without the potential the constant is a Neumann zero mode
        let zero = FiducialCoefficients::zero(&grid);
        let op = assemble_block_neumann(0, &zero, &grid, BlockKind::Flat).unwrap();
        assert!(smallest_eigenvalue(&op).is_err() || smallest_eigenvalue(&op).unwrap() < 1e-8);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(matches!(RadialGrid::new(1e-3, 10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn green_norm_of_the_flat_operator_is_one() {
        let grid = RadialGrid::new(1e-6, 300).unwrap();
        let zero = FiducialCoefficients::zero(&grid);
        let flat = assemble_block(2, &zero, &grid, BlockKind::Flat).unwrap();
        let n = laplacian_green_norm(&flat, &flat).unwrap();
        assert!((n - 1.0).abs() < 1e-9, "{n}");
    }

    #[test]
    fn lanczos_matches_dense_singular_value() {
        let grid = RadialGrid::new(1e-3, 60).unwrap();
        let coeffs = FiducialCoefficients::new(&profile(), 2.0, &grid).unwrap();
        let zero = FiducialCoefficients::zero(&grid);
        let full = assemble_block(0, &coeffs, &grid, BlockKind::Full).unwrap();
        let flat = assemble_block(0, &zero, &grid, BlockKind::Flat).unwrap();
        let a = flat.symmetrized_dense() * full.symmetrized_dense().try_inverse().unwrap();
        let dense = a.singular_values().max();
        let lz = laplacian_green_norm(&full, &flat).unwrap();
        assert!((lz / dense - 1.0).abs() < 1e-8, "{lz} vs {dense}");
    }

    #[test]
    fn green_norm_report_has_tail_and_uniform_bound() {
        let grid = RadialGrid::new(1e-8, 400).unwrap();
        let rep = green_norms(2.0, 8, &profile(), &grid).unwrap();
        assert_eq!(rep.l.len(), 17);
        assert!(rep.lambda_min.iter().all(|&l| l > 0.0));
        assert!(rep.tail_bound_holds());
        assert!(rep.g_norm_l2 <= 1.0 / 5.7);
        assert!(rep.kappa > 0.0);
    }
}
