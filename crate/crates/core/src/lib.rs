//! Numerical laboratory for the fiducial solutions of Hitchin's equations
//! near a simple zero of the Higgs field.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: `sl(2, C)` matrices, the operator `M_φ`, the normal form at a simple zero.
//! - [`painleve`]: the connection problem for the radial sinh-Gordon profile `ψ`.
//! - [`fiducial`]: the families `(A_t, Φ_t)` and the limiting pair on the unit disk.
//! - [`gauge`]: complex gauge transformations and the orbit identities.
//! - [`linearized`]: Fourier-mode blocks of the linearization, Green-operator norms, indicial roots.
//! - [`gluing`]: cutoff approximate solutions and their Newton correction.
//! - [`topology`]: twisted cohomology of punctured surfaces.

pub mod algebra;
pub mod error;
pub mod fiducial;
pub mod gauge;
pub mod gluing;
pub mod linearized;
pub mod numerics;
pub mod ode;
pub mod painleve;
pub mod report;
pub mod topology;

pub use algebra::{HermitianDecomposition, Mat2, Role, TracelessMatrix};
pub use error::{Error, Result};
pub use fiducial::{DiskPair, FiducialFamily};
pub use painleve::{ConnectionConfig, EtaProfile, PsiProfile};
pub use gauge::GaugeField;
pub use gluing::{CutoffProfile, GluedState, NewtonResult};
pub use linearized::{RadialGrid, RadialOperator, SpectralReport};
pub use topology::TwistedSurfaceComplex;
