//! Symmetric block-tridiagonal matrices with 1×1 or 2×2 blocks and a
//! constant scalar off-diagonal coupling `c·I`.

use crate::error::{Error, Result};

pub(crate) type Block = [[f64; 2]; 2];
pub(crate) type Vec2 = [f64; 2];

#[derive(Debug, Clone)]
pub(crate) struct BlockTridiagonal {
    pub size: usize,
    pub diag: Vec<Block>,
    pub off: f64,
}

fn inv(size: usize, m: &Block) -> Option<Block> {
    if size == 1 {
        if m[0][0] == 0.0 {
            return None;
        }
        return Some([[1.0 / m[0][0], 0.0], [0.0, 0.0]]);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn negatives(size: usize, m: &Block) -> usize {
    if size == 1 {
        return (m[0][0] < 0.0) as usize;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let tr = m[0][0] + m[1][1];
    if det < 0.0 {
        1
    } else if tr < 0.0 {
        2
    } else {
        0
    }
}

fn mul(m: &Block, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

impl BlockTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    #[cfg(test)]
    pub fn apply(&self, x: &[Vec2]) -> Vec<Vec2> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = mul(&self.diag[i], &x[i]);
                for k in 0..self.size {
                    if i > 0 {
                        y[k] += self.off * x[i - 1][k];
                    }
                    if i + 1 < n {
                        y[k] += self.off * x[i + 1][k];
                    }
                }
                y
            })
            .collect()
    }

    /// Number of negative eigenvalues of `self − σ·diag(mass)`, by Sylvester's
    /// law of inertia applied to the block LDLᵀ factorization.
    pub fn negative_count(&self, sigma: f64, mass: &[f64]) -> usize {
        let c2 = self.off * self.off;
        let mut count = 0;
        let mut prev: Option<Block> = None;
        for (i, d) in self.diag.iter().enumerate() {
            let mut e = *d;
            for k in 0..self.size {
                e[k][k] -= sigma * mass[i];
            }
            if let Some(p) = prev {
                for a in 0..self.size {
                    for b in 0..self.size {
                        e[a][b] -= c2 * p[a][b];
                    }
                }
            }
            count += negatives(self.size, &e);
            // A zero pivot is nudged; the count is then correct for a σ
            // perturbed by a relative 1e-15.
            let e_inv = inv(self.size, &e).or_else(|| {
                let mut f = e;
                for k in 0..self.size {
                    f[k][k] += 1e-300_f64.max(f64::EPSILON * d[k][k].abs());
                }
                inv(self.size, &f)
            });
            prev = e_inv;
        }
        count
    }

    /// Block LDLᵀ factorization for repeated solves.
    pub fn factor(&self) -> Result<Factorization> {
        let c2 = self.off * self.off;
        let mut e_inv = Vec::with_capacity(self.len());
        for (i, d) in self.diag.iter().enumerate() {
            let mut e = *d;
            if i > 0 {
                let p: &Block = &e_inv[i - 1];
                for a in 0..self.size {
                    for b in 0..self.size {
                        e[a][b] -= c2 * p[a][b];
                    }
                }
            }
            let ei = inv(self.size, &e).ok_or_else(|| Error::Singular("singular pivot in block factorization".into()))?;
            e_inv.push(ei);
        }
        Ok(Factorization {
            size: self.size,
            off: self.off,
            e_inv,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Factorization {
    size: usize,
    off: f64,
    e_inv: Vec<Block>,
}

impl Factorization {
    pub fn solve(&self, rhs: &[Vec2]) -> Vec<Vec2> {
        let n = rhs.len();
        let mut g = rhs.to_vec();
        for i in 1..n {
            let carry = mul(&self.e_inv[i - 1], &g[i - 1]);
            for k in 0..self.size {
                g[i][k] -= self.off * carry[k];
            }
        }
        let mut u = vec![[0.0; 2]; n];
        u[n - 1] = mul(&self.e_inv[n - 1], &g[n - 1]);
        for i in (0..n - 1).rev() {
            let mut v = g[i];
            for k in 0..self.size {
                v[k] -= self.off * u[i + 1][k];
            }
            u[i] = mul(&self.e_inv[i], &v);
        }
        u
    }
}
