//! States, the stiff linear operator `A`, and the nonlinear family `B(t, u)`.

mod family;
mod grid;
mod sparse;

pub use family::{
    eval_b, eval_b_prime, eval_b_second, ConstantFamily, FnDiagonalFamily, FrozenOperator, LogisticFamily,
    NonlinearFamily, PowerFamily, Structure,
};
pub use grid::{Axis, Grid, StateVector};
pub use sparse::LinearOperator;

use crate::error::Result;

/// Sparse matrix-vector product `A v`.
pub fn apply_linear(a: &LinearOperator, v: &[f64]) -> Result<Vec<f64>> {
    a.apply(v)
}
