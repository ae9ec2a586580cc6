//! Smooth radial cutoffs built from `e^{−1/x}`.

use serde::Serialize;

use crate::error::{Error, Result};

/// `χ ≡ 1` on `r ≤ onset`, `χ ≡ 0` on `r ≥ end`, and `C^∞` in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffProfile {
    pub onset: f64,
    pub end: f64,
}

/// `(χ, r∂_r χ, (r∂_r)² χ)` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffValue {
    pub chi: f64,
    pub r_dchi: f64,
    pub rr_chi: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { onset: 0.55, end: 0.9 }
    }
}

impl CutoffProfile {
    pub fn new(onset: f64, end: f64) -> Result<Self> {
        if !(onset > 0.0 && onset < end && end.is_finite()) {
            return Err(Error::invalid(format!("cutoff needs 0 < onset < end, got [{onset}, {end}]")));
        }
        Ok(CutoffProfile { onset, end })
    }

    /// `χ ≡ 1`: no cutting at all.
    pub fn identity() -> Self {
        CutoffProfile {
            onset: f64::INFINITY,
            end: f64::INFINITY,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.onset.is_infinite()
    }

    /// True when `χ ≡ 1` on `r ≤ 1/2` and `χ` vanishes before `r = 1`.
    pub fn fits_the_disk(&self) -> bool {
        self.onset >= 0.5 && self.end < 1.0
    }

    pub fn eval(&self, r: f64) -> CutoffValue {
        if r <= self.onset {
            return CutoffValue { chi: 1.0, r_dchi: 0.0, rr_chi: 0.0 };
        }
        if r >= self.end {
            return CutoffValue { chi: 0.0, r_dchi: 0.0, rr_chi: 0.0 };
        }
        let width = self.end - self.onset;
        let s = (r - self.onset) / width;
        // χ = 1/(1 + e^w) with w = 1/(1 − s) − 1/s
        let w = 1.0 / (1.0 - s) - 1.0 / s;
        let chi = 1.0 / (1.0 + w.exp());
        let one_minus = 1.0 / (1.0 + (-w).exp());
        let p = chi * one_minus;
        if p == 0.0 {
            return CutoffValue { chi, r_dchi: 0.0, rr_chi: 0.0 };
        }
        let ws = 1.0 / (1.0 - s).powi(2) + 1.0 / (s * s);
        let wss = 2.0 / (1.0 - s).powi(3) - 2.0 / s.powi(3);
        let chi_s = -p * ws;
        let chi_ss = (1.0 - 2.0 * chi) * p * ws * ws - p * wss;
        let chi_r = chi_s / width;
        let chi_rr = chi_ss / (width * width);
        CutoffValue {
            chi,
            r_dchi: r * chi_r,
            rr_chi: r * chi_r + r * r * chi_rr,
        }
    }
}
