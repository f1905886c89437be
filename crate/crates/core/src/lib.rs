//! Bounded-variation sequence classes (MS, CQMS, RBVS, GBVS, NBVS) as
//! computable predicates, and numerical checks of convergence and
//! best-approximation estimates for trigonometric series built from such
//! coefficients.
//!
//! Every infinite quantity is split into an exact finite part plus a
//! closed-form tail majorant supplied by the coefficient rule, so results
//! come back as certified intervals or explicitly bounded estimates.

pub mod approx;
pub mod class;
pub mod convergence;
pub mod error;
pub mod fit;
pub mod json;
pub mod seq;
pub mod sum;
pub mod trig;

pub use class::{check_class, verify_inclusions, ClassId, ClassVerdict};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use seq::{SectorAngle, SequenceRule, TwoSidedSeq};
