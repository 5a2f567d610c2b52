//! Indefinite block-Toeplitz Carathéodory interpolation.
//!
//! The crate builds the structured triple of a Hermitian block Toeplitz
//! matrix, evaluates the transfer-matrix frame and the linear fractional
//! family of solutions, extracts Taylor coefficients and Toeplitz extensions,
//! computes Poisson-weighted entropy functionals with their Blaschke
//! corrections, and checks determinant-ratio (Szegő type) limits.

pub use nalgebra::Complex;

pub type Complex64 = Complex<f64>;

pub mod caratheodory;
pub mod entropy;
pub mod error;
pub mod frame;
pub mod json;
pub mod linalg;
pub mod params;
pub mod quadrature;
pub mod scenario;
pub mod szego;
pub mod toeplitz;
pub mod zeros;

pub use caratheodory::{
    build_extension, taylor_coefficients, verify_solution, ExtensionReport, TaylorSeries,
};
pub use entropy::{EntropyValue, IntegrandKind};
pub use error::{Error, Result};
pub use frame::{eval_frame, FrameEvaluation, Nondegeneracy, Solution, SolutionMode};
pub use linalg::CMatrix;
pub use params::{ContractionSpec, HerglotzSpec, MoebiusMaps, Parameter};
pub use scenario::{generate_instance, run_scenario, Scenario};
pub use szego::SzegoReport;
pub use toeplitz::{
    build_structured_triple, negative_index, StructuredTriple, ToeplitzSpec, YMatrix,
};
pub use zeros::{blaschke_eval, disk_zeros, DiskZeros};
