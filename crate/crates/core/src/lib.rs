//! Strong-stability-preserving modified Patankar Runge–Kutta schemes for
//! positive, conservative production–destruction systems, with the stability
//! theory needed to check them.

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod pds;
pub mod problems;
pub mod schemes;
pub mod stability;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::{ComplexValue, DenseMatrix};
pub use pds::{LinearPds, ProductionDestruction, StateVector};
pub use problems::{ProblemId, TestProblem};
pub use schemes::{Scheme, Sspmprk2Params, Sspmprk3Params};
