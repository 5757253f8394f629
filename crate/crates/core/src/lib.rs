//! Completely bounded norms of holomorphic functions on concrete operator
//! spaces: certified upper bounds, witnessed lower bounds, and numerical
//! checks of the surrounding matrix-convexity and predual constructions.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the aliases
//! below fix `f64`.
//!
//! ```
//! use cbnorm::cbnorm::sandwich;
//! use cbnorm::holofun::HoloFunction;
//! use cbnorm::matcore::RngSeed;
//! use cbnorm::Complex64;
//!
//! let f = HoloFunction::moebius_quotient(HoloFunction::identity(), Complex64::new(0.5, 0.0))?;
//! let est = sandwich(&f, 4, 20_000, RngSeed(11))?;
//! assert_eq!(est.upper, Some(2.0));
//! assert!(est.lower > 1.99);
//! for entry in &est.level_table {
//!     assert!((entry.witness.recompute(&f)? - entry.witness.value).abs() < 1e-12);
//! }
//! # Ok::<(), cbnorm::Error>(())
//! ```

// `!(x > y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cbnorm;
pub mod cli;
pub mod error;
pub mod gcb;
pub mod holofun;
pub mod matcore;
pub mod mconvex;
pub mod opspace;
mod optim;
pub mod scalar;

pub use error::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = matcore::ComplexMatrix<f64>;
pub type Space = opspace::SpaceRef<f64>;
pub type SpaceMatrix = opspace::OpSpaceMatrix<f64>;
pub type Functional = holofun::CertifiedFunctional<f64>;
pub type Holo = holofun::HoloFunction<f64>;
pub type Estimate = cbnorm::CbEstimate<f64>;
pub type Set = mconvex::MatrixSet<f64>;
pub type Element = gcb::GcbElement<f64>;
