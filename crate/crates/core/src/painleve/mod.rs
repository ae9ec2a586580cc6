//! The connection problem for `(ρ∂_ρ)²ψ = ½ρ² sinh 2ψ`: positive solutions
//! with `ψ ∼ −(1/3) log ρ` at the origin and exponential decay at infinity.

mod bessel;
mod profile;
mod series;

pub use bessel::{bessel_k0, bessel_k1};
pub use profile::{psi_eval, solve_connection, ConnectionConfig, EtaProfile, PsiProfile, SERIES_TERMS};
pub use series::{series_coefficients, small_rho_series, small_rho_series_x, SERIES_TRUNCATION_TOL};
