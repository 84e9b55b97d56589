//! Fixtures shared by the benchmarks.

use semisplit::problems::Problem;
use semisplit::{LinearOperator, Result};

/// 1D Fisher-KPP at the default resolution (`n = 199`).
pub fn fisher_1d() -> Result<Problem> {
    Problem::fisher_1d(0.01, 1.0, 1.0, (0.0, 10.0), 0.05)
}

/// 2D Fisher-KPP on `[-2, 2]^2` at spacing `dx`.
pub fn fisher_2d(dx: f64) -> Result<Problem> {
    Problem::fisher_2d(0.01, 0.01, 1.0, 1.0, (-2.0, 2.0), dx)
}

/// Nonsymmetric tridiagonal convection-diffusion matrix of size `n`.
pub fn convection_diffusion(n: usize, peclet: f64) -> Result<LinearOperator> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0));
        if i > 0 {
            t.push((i, i - 1, 1.0 + peclet));
        }
        if i + 1 < n {
            t.push((i, i + 1, 1.0 - peclet));
        }
    }
    LinearOperator::from_triplets(n, t)
}
