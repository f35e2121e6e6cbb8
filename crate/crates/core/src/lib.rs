//! Verification toolkit for m-fold symmetric bi-univalent functions.
//!
//! Exact truncated power series with composition and reversion, the
//! inverse-coefficient closed forms for m-fold functions, sampling of
//! positive-real-part functions, the membership functional of the
//! `S(alpha, lambda)` / `S(beta, lambda)` classes, the coefficient bounds for
//! `|a_{m+1}|` and `|a_{2m+1}|`, and a replay of the coefficient equations
//! behind those bounds.

pub mod bounds;
pub mod caratheodory;
pub mod classfun;
pub mod cli;
pub mod derivation;
pub mod error;
pub mod explore;
pub mod mfold;
pub mod scalar;
pub mod series;

pub use caratheodory::{CaratheodoryFunction, PairStrategy};
pub use classfun::{ClassKind, ClassSpec, MembershipReport, Verdict};
pub use error::{Error, Result};
pub use mfold::{InverseCoefficients, MFoldFunction};
pub use scalar::{Backend, Complex64, ComplexRational, Scalar};
pub use series::TruncatedSeries;
