//! Scale calculus at a finite step `h`.
//!
//! The crate provides uniform grids with halo layers ([`grid`]), the
//! h-scale derivative and its limit ladder ([`scale_ops`]), Hölder and smooth
//! test functions ([`holder`]), residual checks of the calculus rules
//! ([`identities`]), an expression language for Lagrangians ([`expr`]), and a
//! solver for variational problems with a free terminal point
//! ([`variational`]).

pub mod error;
pub mod expr;
pub mod fit;
pub mod grid;
pub mod holder;
pub mod identities;
pub mod scale_ops;
pub mod variational;

pub use error::{Error, Result};
pub use grid::{make_grid, sample, Grid, SampledFn};
