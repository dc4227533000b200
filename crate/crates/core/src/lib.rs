//! Numerical geometry of Lagrangian submanifolds of `Cⁿ`: ambient forms, chart-level invariants,
//! closed-form special Lagrangian examples, Gaussian densities, soliton residuals, algebraic curves
//! in `C²` and asymptotic decay.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`). The aliases at the crate root fix
//! `f64`, which is what the verification suites use.

pub mod ambient;
pub mod asymptotics;
pub mod chart;
pub mod curves;
pub mod density;
pub mod domain;
pub mod error;
pub mod flow;
pub mod gallery;
pub mod linalg;
pub mod patch;
pub mod report;
pub mod scalar;

pub use ambient::{hyperkahler_rotate, holomorphic_volume, kahler_form, liouville_form};
pub use error::{GeomError, Result};
pub use scalar::Real;

pub type Vector = ambient::CVector<f64>;
pub type Complex = scalar::C<f64>;
pub type Patch = patch::LagrangianPatch<f64>;
pub type Poly = curves::BiPoly<f64>;
pub type Plane = gallery::PlaneSpec<f64>;
pub type Motion = flow::PrescribedMotion<f64>;
pub type Graph = asymptotics::GraphField<f64>;
