//! Twisted cohomology of a punctured surface with a real rank-one local
//! system, computed on a graph spine.
//!
//! A closed surface of genus `γ` with `k` punctures retracts onto a wedge of
//! `2γ + k − 1` circles. The loops are `a_1, b_1, …, a_γ, b_γ` around the
//! handles and `c_1, …, c_{k−1}` around all punctures but the last, whose
//! loop is fixed by `∏[a_i, b_i]·c_1⋯c_k = 1`. Each circle is subdivided, so
//! the cochain complex has one vertex per midpoint plus the base point.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Which generator of `π₁` a loop represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    HandleA(usize),
    HandleB(usize),
    Puncture(usize),
}

/// An oriented edge `tail → head` with transport `sign ∈ {±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwistedSurfaceComplex {
    pub genus: usize,
    pub punctures: usize,
    pub generators: Vec<Generator>,
    /// Monodromy of each generator.
    pub monodromy: Vec<i8>,
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

/// `(γ, k)` with the puncture loops twisted and the handles untwisted.
pub fn build_complex(genus: usize, punctures: usize) -> Result<TwistedSurfaceComplex> {
    if genus < 2 {
        return Err(Error::invalid(format!("genus must be at least 2, got {genus}")));
    }
    if punctures == 0 {
        return Err(Error::invalid("the surface must have at least one puncture"));
    }
    // the last puncture loop is the product of the others, so its monodromy
    // is (−1)^{k−1}; twisting every puncture forces k even
    if punctures % 2 == 1 {
        return Err(Error::invalid(format!(
            "{punctures} punctures cannot all carry monodromy −1; k must be even"
        )));
    }
    let mut generators = Vec::new();
    for i in 0..genus {
        generators.push(Generator::HandleA(i));
        generators.push(Generator::HandleB(i));
    }
    generators.extend((0..punctures - 1).map(Generator::Puncture));
    let monodromy = generators
        .iter()
        .map(|g| if matches!(g, Generator::Puncture(_)) { -1 } else { 1 })
        .collect();
    Ok(assemble(genus, punctures, generators, monodromy))
}

fn assemble(genus: usize, punctures: usize, generators: Vec<Generator>, monodromy: Vec<i8>) -> TwistedSurfaceComplex {
    // base point 0; circle j runs 0 → j+1 → 0 and carries its monodromy on the way back
    let mut edges = Vec::with_capacity(2 * generators.len());
    for (j, &m) in monodromy.iter().enumerate() {
        edges.push(Edge { tail: 0, head: j + 1, sign: 1 });
        edges.push(Edge { tail: j + 1, head: 0, sign: m });
    }
    TwistedSurfaceComplex {
        genus,
        punctures,
        vertices: generators.len() + 1,
        generators,
        monodromy,
        edges,
    }
}

impl TwistedSurfaceComplex {
    /// Replaces the handle monodromies, in the order `a_1, b_1, a_2, …`.
    pub fn with_handle_monodromy(&self, handles: &[i8]) -> Result<Self> {
        if handles.len() != 2 * self.genus || handles.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!("need {} signs ±1 for the handles", 2 * self.genus)));
        }
        let mut m = self.monodromy.clone();
        m[..2 * self.genus].copy_from_slice(handles);
        Ok(assemble(self.genus, self.punctures, self.generators.clone(), m))
    }

    /// The same spine with the trivial local system.
    pub fn untwisted(&self) -> Self {
        assemble(self.genus, self.punctures, self.generators.clone(), vec![1; self.generators.len()])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64
    }

    /// First Betti number of the spine.
    pub fn betti_1(&self) -> usize {
        self.generators.len()
    }

    pub fn is_twisted(&self) -> bool {
        self.monodromy.contains(&-1)
    }

    /// Matrix of `δ: C⁰ → C¹`, `(δs)(e) = σ_e s(head) − s(tail)`.
    pub fn coboundary(&self) -> Vec<Vec<BigInt>> {
        self.edges
            .iter()
            .map(|e| {
                let mut row = vec![BigInt::zero(); self.vertices];
                row[e.head] += BigInt::from(e.sign);
                row[e.tail] -= BigInt::one();
                row
            })
            .collect()
    }
}

/// Rank of an integer matrix by Bareiss fraction-free elimination.
pub fn rank(matrix: &[Vec<BigInt>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// `(h⁰, h¹)` of the twisted complex.
pub fn twisted_cohomology_dims(complex: &TwistedSurfaceComplex) -> (usize, usize) {
    let rk = rank(&complex.coboundary());
    (complex.vertices - rk, complex.edges.len() - rk)
}

/// Default puncture count: the zeroes of a quadratic differential with
/// simple zeroes, `4γ − 4`.
pub fn default_punctures(genus: usize) -> usize {
    4 * genus.saturating_sub(1)
}

/// Dimension of the torus of limiting configurations: twisted `h¹` with
/// `k = 4γ − 4`.
pub fn torus_dimension(genus: usize) -> Result<usize> {
    let c = build_complex(genus, default_punctures(genus))?;
    Ok(twisted_cohomology_dims(&c).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorusRow {
    pub gamma: usize,
    pub k: usize,
    pub h0: usize,
    pub h1: usize,
    pub expected: usize,
}

pub fn torus_sweep(genera: &[usize]) -> Result<Vec<TorusRow>> {
    genera
        .iter()
        .map(|&g| {
            let k = default_punctures(g);
            let (h0, h1) = twisted_cohomology_dims(&build_complex(g, k)?);
            Ok(TorusRow {
                gamma: g,
                k,
                h0,
                h1,
                expected: 6 * g - 6,
            })
        })
        .collect()
}

pub fn write_torus_csv<W: Write>(rows: &[TorusRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_two_with_four_punctures() {
        let c = build_complex(2, 4).unwrap();
        assert_eq!(c.betti_1(), 7);
        assert_eq!(c.euler_characteristic(), 2 - 2 * 2 - 4);
        assert_eq!(twisted_cohomology_dims(&c), (0, 6));
        assert_eq!(twisted_cohomology_dims(&c.untwisted()), (1, 7));
    }

    #[test]
    fn genus_three_with_eight_punctures() {
        assert_eq!(twisted_cohomology_dims(&build_complex(3, 8).unwrap()), (0, 12));
    }

    #[test]
    fn torus_dimension_is_six_gamma_minus_six() {
        for g in 2..=20 {
            assert_eq!(torus_dimension(g).unwrap(), 6 * g - 6, "γ = {g}");
        }
    }

    #[test]
    fn euler_characteristic_is_representation_independent() {
        for (g, k) in [(2, 2), (2, 4), (3, 6), (5, 16)] {
            let c = build_complex(g, k).unwrap();
            assert_eq!(c.euler_characteristic(), 2 - 2 * g as i64 - k as i64);
            for cx in [c.clone(), c.untwisted(), c.with_handle_monodromy(&vec![-1; 2 * g]).unwrap()] {
                let (h0, h1) = twisted_cohomology_dims(&cx);
                assert_eq!(h0 as i64 - h1 as i64, cx.euler_characteristic());
                assert_eq!(h0, usize::from(!cx.is_twisted()));
            }
        }
    }

    #[test]
    fn handle_monodromy_does_not_change_the_count() {
        let c = build_complex(3, 8).unwrap();
        let alt = c.with_handle_monodromy(&[1, -1, -1, 1, -1, 1]).unwrap();
        assert_eq!(twisted_cohomology_dims(&alt), twisted_cohomology_dims(&c));
        assert!(c.with_handle_monodromy(&[1, 0, 1, 1, 1, 1]).is_err());
    }

    #[test]
    fn invalid_surfaces_are_rejected() {
        assert!(build_complex(2, 0).is_err());
        assert!(build_complex(1, 4).is_err());
        assert!(build_complex(2, 3).is_err());
    }

    #[test]
    fn bareiss_rank_of_small_matrices() {
        let m = |rows: &[&[i64]]| -> Vec<Vec<BigInt>> { rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect() };
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(&m(&[&[2, 3, 5], &[7, 11, 13], &[17, 19, 23]])), 3);
        assert_eq!(rank(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), 2);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = torus_sweep(&[2, 3]).unwrap();
        let mut buf = Vec::new();
        write_torus_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), "gamma,k,h0,h1,expected");
        assert_eq!(s.lines().nth(1).unwrap(), "2,4,0,6,6");
    }
}
