//! Grassmann algebra, supermatrices and supersymmetric checks for random
//! matrix ensembles.
//!
//! ```
//! use supersym_core::{run_suite, Suite, VerifyConfig};
//! let cfg = VerifyConfig { algebra_cases: 10, matrix_cases: 5, ..VerifyConfig::default() };
//! assert!(run_suite(Suite::Algebra, &cfg).unwrap().passed());
//! ```

pub mod brownian;
pub mod colorflavor;
pub mod duality;
pub mod ensembles;
pub mod error;
pub mod genfun;
pub mod grassmann;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod superlinalg;
pub mod testing;
pub mod verify;

pub use duality::{Beta, VectorBundle};
pub use ensembles::{EnsembleClass, EnsembleSpec, McValue, SpectrumBatch};
pub use error::{Error, Result};
pub use genfun::SourceConfig;
pub use grassmann::{ConjugationConvention, Gen, GrassmannElement};
pub use num_complex::Complex64;
pub use report::{CheckResult, SuiteReport, SCHEMA_VERSION};
pub use scalar::{Coefficient, ExactComplex, Laurent};
pub use superlinalg::{Parity, SuperMatrix, TransposeConvention};
pub use verify::{run_suite, Fault, Suite, VerifyConfig};
