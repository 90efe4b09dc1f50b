//! Orbit measures, spherical vectors and Bessel kernels on matrix models of
//! Jordan algebras, with numerical checks of the integral identities that
//! relate them.

pub mod bessel;
pub mod cayley;
pub mod config;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod poly;
pub mod quad;
pub mod rankk;
pub mod registry;
pub mod report;
pub mod scalar;
pub mod spherical;
pub mod suite;

pub use cayley::ExactPoly;
pub use config::{Config, MatrixLiteral};
pub use error::{Error, Result};
pub use measures::{ConePoint, DensityValue, PolarMeasure};
pub use models::{AlgebraElement, CompactElement, Entries, GroupFactors, LeviElement};
pub use quad::{Estimate, Mode, QuadratureSpec, ScanVerdict};
pub use registry::{CaseDescriptor, CaseId};
pub use report::{Quantity, Verdict, VerificationReport};
pub use scalar::Scalar;

pub type Element = AlgebraElement<f64>;
pub type Element32 = AlgebraElement<f32>;
pub type Levi = LeviElement<f64>;
pub type Compact = CompactElement<f64>;
pub type Cone = ConePoint<f64>;
