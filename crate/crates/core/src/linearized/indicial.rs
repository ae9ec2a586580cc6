//! Indicial roots of the mode operators at the cone point.
//!
//! Roots are found exactly: each indicial polynomial is rewritten in
//! `m = 2ν`, which gives a monic integer polynomial, and its integer roots are
//! located among the divisors of the lowest nonzero coefficient.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_rational::Rational64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootSource {
    /// `ν² − ℓ² = 0`, the scalar component.
    Scalar,
    /// `(ν² − ℓ² − 1/4)² − ℓ² = 0`, the coupled `2×2` system.
    Coupled,
    /// `ν² − (ℓ + 1/2)² = 0` on anti-periodic functions.
    AntiPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicialRoot {
    pub nu: Rational64,
    pub multiplicity: usize,
}

impl IndicialRoot {
    pub fn value(&self) -> f64 {
        *self.nu.numer() as f64 / *self.nu.denom() as f64
    }

    /// `2ν`, always an integer here.
    pub fn twice(&self) -> i64 {
        (self.nu * 2).to_integer()
    }
}

impl Serialize for IndicialRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("IndicialRoot", 3)?;
        st.serialize_field("nu", &format!("{}", self.nu))?;
        st.serialize_field("value", &self.value())?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

// Coefficients in increasing degree of the polynomial in m = 2ν.
fn polynomial(l: i64, source: RootSource) -> Vec<i128> {
    let l = l as i128;
    match source {
        // 4ν² − 4ℓ²
        RootSource::Scalar => vec![-4 * l * l, 0, 1],
        // 16(ν² − ℓ² − 1/4)² − 16ℓ² = (m² − 4ℓ² − 1)² − 16ℓ²
        RootSource::Coupled => {
            let a = 4 * l * l + 1;
            vec![a * a - 16 * l * l, 0, -2 * a, 0, 1]
        }
        // m² − (2ℓ + 1)²
        RootSource::AntiPeriodic => vec![-(2 * l + 1) * (2 * l + 1), 0, 1],
    }
}

fn eval(p: &[i128], m: i128) -> i128 {
    p.iter().rev().fold(0, |acc, &c| acc * m + c)
}

// Synthetic division by (m − root).
fn deflate(p: &[i128], root: i128) -> Vec<i128> {
    let n = p.len() - 1;
    let mut q = vec![0; n];
    let mut carry = 0;
    for k in (0..n).rev() {
        carry = p[k + 1] + carry * root;
        q[k] = carry;
    }
    q
}

fn divisors(c: i128) -> Vec<i128> {
    let c = c.abs();
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= c {
        if c % d == 0 {
            out.push(d);
            out.push(c / d);
        }
        d += 1;
    }
    out
}

/// Integer roots with multiplicity of a monic integer polynomial.
fn integer_roots(mut p: Vec<i128>) -> BTreeMap<i128, usize> {
    let mut roots = BTreeMap::new();
    while p.len() > 1 && p[0] == 0 {
        *roots.entry(0).or_insert(0) += 1;
        p.remove(0);
    }
    if p.len() <= 1 {
        return roots;
    }
    for d in divisors(p[0]) {
        for cand in [d, -d] {
            while p.len() > 1 && eval(&p, cand) == 0 {
                *roots.entry(cand).or_insert(0) += 1;
                p = deflate(&p, cand);
            }
        }
    }
    roots
}

/// Roots of one mode; the result is sorted.
pub fn mode_roots(l: i64, source: RootSource) -> Vec<IndicialRoot> {
    integer_roots(polynomial(l, source))
        .into_iter()
        .map(|(m, k)| IndicialRoot {
            nu: Rational64::new(m as i64, 2),
            multiplicity: k,
        })
        .collect()
}

fn aggregate<I: IntoIterator<Item = IndicialRoot>>(roots: I) -> Vec<IndicialRoot> {
    let mut acc: BTreeMap<Rational64, usize> = BTreeMap::new();
    for r in roots {
        *acc.entry(r.nu).or_insert(0) += r.multiplicity;
    }
    acc.into_iter()
        .map(|(nu, multiplicity)| IndicialRoot { nu, multiplicity })
        .collect()
}

/// Roots of `Δ_A` over the modes in `range`: scalar and coupled parts
/// together, sorted, multiplicities summed.
pub fn indicial_roots(range: RangeInclusive<i64>) -> Vec<IndicialRoot> {
    aggregate(range.flat_map(|l| {
        let mut v = mode_roots(l, RootSource::Scalar);
        v.extend(mode_roots(l, RootSource::Coupled));
        v
    }))
}

/// Roots of `Δ_A` restricted to the Higgs stabilizer, whose sections are
/// anti-periodic in θ; the basis `e^{i(ℓ+1/2)θ}` runs over `ℓ ∈ range`.
pub fn restricted_indicial_roots(range: RangeInclusive<i64>) -> Vec<IndicialRoot> {
    aggregate(range.flat_map(|l| mode_roots(l, RootSource::AntiPeriodic)))
}
