//! Model order reduction for continuous-time linear time-invariant systems.
//!
//! The crate implements the balanced-truncation pipeline end to end:
//!
//! 1. strip unreachable and unobservable dynamics to get a minimal
//!    realization ([`realization`]),
//! 2. solve Lyapunov equations for the controllability and observability
//!    gramians ([`gramians`]),
//! 3. change coordinates so both gramians become the same diagonal matrix of
//!    Hankel singular values and drop the weakly coupled states
//!    ([`reduction`]),
//! 4. verify the resulting frequency- and time-domain error against the
//!    truncation error bounds ([`analysis`]).
//!
//! Supporting layers: [`linalg`] holds the dense numerical kernels,
//! [`statespace`] the model type and its invariants, [`io`] file formats and
//! example generators.

// Indexed loops mirror the textbook statement of the numerical kernels and
// match the rest of the crate; iterator rewrites would hide the index
// symmetry between the arrays involved.
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` in argument checks deliberately rejects NaN along with
// nonpositive values; the suggested `partial_cmp` rewrite obscures that.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod gramians;
pub mod io;
pub mod linalg;
pub mod realization;
pub mod reduction;
pub mod statespace;

pub use error::{Error, Result};
