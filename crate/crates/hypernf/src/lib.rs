//! Exact normal forms for four-dimensional double-Hopf vector fields.
//!
//! The crate works entirely in exact arithmetic, in two coordinate
//! systems connected by a lossless translation:
//!
//! * **Complex coordinates** (`z1, z1*, z2, z2*`): the eigenvalue stage
//!   ([`poincare`]) clears every non-resonant monomial symbolically in
//!   the two frequencies.
//! * **The generator basis** (`P1, P2, R1, R2` families over the two
//!   amplitude products): the graded stages ([`hyper`]) clear resonant
//!   terms grade by grade with closed-form block matrices, route the
//!   grade-1 coefficients through documented case tables, and push
//!   simplification through higher levels via kernel chains.
//!
//! Every run produces a serializable report ([`hyper::report`]) whose
//! generator records are enough to replay the whole computation with
//! nothing but exponential flows — [`verify`] does exactly that, and the
//! pipeline refuses to report success unless the replay agrees term by
//! term.  Input documents, option merging, and the command workflows
//! (`normalize`, `verify`, `rank`) live in [`cli`].

pub mod cli;
pub mod error;
pub mod hyper;
pub mod liealg;
pub mod poincare;
pub mod scalars;
pub mod verify;

pub use error::{Error, Result};
