//! Boundary controllability of `N` coupled one-dimensional wave equations
//! `u_tt − u_xx + A u = 0` on `(0, π)` with a single Dirichlet control
//! `u(0, t) = b f(t)`.
//!
//! Every routine is generic over [`Real`]; the aliases below fix the scalar
//! to `f64` or to [`DoubleDouble`].

pub mod coupling;
pub mod dd;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod moments;
pub mod pipeline;
pub mod scalar;
pub mod spectrum;
pub mod tolerances;
pub mod waveform;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type System = coupling::CouplingSystem<f64>;
pub type Grid = spectrum::FrequencyGrid<f64>;
pub type Decomposition = coupling::SpectralDecomposition<f64>;
pub type Edd = spectrum::EddFamily<f64>;
pub type Modal = moments::ModalState<f64>;
pub type Target = moments::TargetSpec<f64>;
pub type Control = moments::ControlSignal<f64>;
pub type Moments = moments::MomentSystem<f64>;
pub type Problem = pipeline::Problem<f64>;
pub type Tolerances = tolerances::Tolerances<f64>;

pub type MatrixDd = linalg::ComplexMatrix<DoubleDouble>;
pub type SystemDd = coupling::CouplingSystem<DoubleDouble>;
pub type ProblemDd = pipeline::Problem<DoubleDouble>;
pub type TolerancesDd = tolerances::Tolerances<DoubleDouble>;
