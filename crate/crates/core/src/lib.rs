//! Exact low-rank matrix completion from random expansion coefficients in a
//! general, possibly non-orthogonal, matrix basis.
//!
//! The crate is organized bottom-up:
//!
//! * [`basis`]: concrete basis families and the textual basis format.
//! * [`dual`]: Gram matrix, dual set and spectral constants.
//! * [`tangent`]: tangent space at a low-rank matrix and its projectors.
//! * [`diagnostics`]: correlation parameter, coherence and sample bounds.
//! * [`sampling`]: index sampling and the sampling/frame operators.
//! * [`solver`]: nuclear-norm minimization under basis-coefficient constraints.
//! * [`certificate`]: golfing-scheme dual certificates and their checks.
//! * [`experiments`]: Monte-Carlo harnesses that emit CSV.

pub mod basis;
pub mod certificate;
pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod planted;
pub mod rng;
pub mod sampling;
pub mod solver;
pub mod tangent;

pub use basis::{BasisSet, Family, SubspaceConstraints};
pub use dual::{DualBasisData, GramSpectrum};
pub use error::{Error, Result};
pub use sampling::SampleSet;
pub use tangent::TangentSpace;
