//! Equidistribution of dilated measures and curves on compact nilmanifolds.
//!
//! The crate has two halves. The exact half decides, over the rationals,
//! whether a horizontal character obstructs (weak) equidistribution of a
//! dilated family `mu_t`. The numerical half estimates the same behaviour:
//! Weyl sums, Cesàro averages, discrepancies and shrinking-window averages.

pub mod counterexamples;
pub mod diagnostics;
pub mod dilation;
pub mod error;
pub mod lattice;
pub mod lie;
pub mod linalg;
pub mod measures;
pub mod obstruction;
mod parallel;
pub mod realization;
pub mod scalar;

pub use dilation::{DegreeData, DilationFamily, TorusCoefficients};
pub use error::{Error, Result};
pub use lattice::{haar_integrate, Nilmanifold, NilmanifoldPoint};
pub use measures::{Curve, DilatedMeasure, Integrand, Integration, MeasureSpec, Model, PiecewiseCurve, Segment};
pub use obstruction::{classify, Character, ClassifyOptions, Verdict, VerdictKind};
pub use lie::{AlgebraVector, GroupElement, NilAlgebra};
pub use scalar::{Rational, Scalar};
