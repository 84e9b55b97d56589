//! `w = exp(tau M) v` for sparse `M`.
//!
//! The dense backend exponentiates the assembled matrix. The iterative
//! backend never assembles `exp(tau M)`: symmetric operators use a Chebyshev
//! expansion on their spectral enclosure, everything else an adaptive
//! Arnoldi (Krylov) projection.

mod chebyshev;
mod dense;
mod krylov;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use dense::exp_dense;

use crate::error::{check_len, Error, Result};
use crate::operators::{FrozenOperator, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Dense up to `dense_cap` unknowns, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpBackend {
    pub kind: BackendKind,
    /// Relative accuracy target for iterative evaluation.
    pub tolerance: f64,
    /// Maximum Chebyshev degree per substep.
    pub max_degree: usize,
    /// Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Maximum Krylov substeps (accepted and rejected) per call.
    pub max_substeps: usize,
    /// Overrides the operator's own spectral enclosure.
    pub spectral_hint: Option<(f64, f64)>,
    /// Largest dimension for which dense evaluation is allowed.
    pub dense_cap: usize,
}

impl Default for ExpBackend {
    fn default() -> Self {
        Self {
            kind: BackendKind::Auto,
            tolerance: 1e-10,
            max_degree: 200,
            krylov_dim: 40,
            max_substeps: 10_000,
            spectral_hint: None,
            dense_cap: 2000,
        }
    }
}

impl ExpBackend {
    pub fn dense() -> Self {
        Self {
            kind: BackendKind::Dense,
            ..Self::default()
        }
    }

    pub fn iterative() -> Self {
        Self {
            kind: BackendKind::Iterative,
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "exp-action tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_degree < 2 || self.krylov_dim < 1 {
            return Err(Error::InvalidConfig("exp-action degree limits must be positive".into()));
        }
        Ok(())
    }

    /// Whether an operator of dimension `n` is evaluated densely.
    pub fn uses_dense(&self, n: usize) -> Result<bool> {
        match self.kind {
            BackendKind::Auto => Ok(n <= self.dense_cap),
            BackendKind::Iterative => Ok(false),
            BackendKind::Dense if n <= self.dense_cap => Ok(true),
            BackendKind::Dense => Err(Error::InvalidConfig(format!(
                "dense exponential requested for n = {n} above the cap {}",
                self.dense_cap
            ))),
        }
    }
}

pub(crate) fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn is_diagonal(m: &LinearOperator) -> bool {
    m.entries().all(|(i, j, _)| i == j)
}

/// `exp(tau M) v`.
pub fn exp_action(m: &LinearOperator, tau: f64, v: &[f64], backend: &ExpBackend) -> Result<Vec<f64>> {
    check_len(m.dim(), v.len())?;
    if !tau.is_finite() {
        return Err(Error::Domain(format!("exponential step {tau} is not finite")));
    }
    backend.validate()?;
    if tau == 0.0 || m.nnz() == 0 {
        return Ok(v.to_vec());
    }
    if is_diagonal(m) {
        return Ok(m
            .diagonal_values()
            .iter()
            .zip(v)
            .map(|(d, x)| (tau * d).exp() * x)
            .collect());
    }
    if backend.uses_dense(m.dim())? {
        let e = exp_dense(&m.to_dense(), tau)?;
        return Ok((e * DVector::from_column_slice(v)).as_slice().to_vec());
    }
    if m.is_symmetric() {
        let interval = backend.spectral_hint.unwrap_or_else(|| m.spectral_interval());
        chebyshev::exp_action(m, tau, v, interval, backend.tolerance, backend.max_degree)
    } else {
        krylov::exp_action(m, tau, v, backend.tolerance, backend.krylov_dim, backend.max_substeps)
    }
}

/// Iterative evaluation regardless of the backend kind, choosing Chebyshev
/// or Krylov from the operator's symmetry flag.
pub fn exp_action_iterative(m: &LinearOperator, tau: f64, v: &[f64], backend: &ExpBackend) -> Result<Vec<f64>> {
    let forced = ExpBackend {
        kind: BackendKind::Iterative,
        ..backend.clone()
    };
    exp_action(m, tau, v, &forced)
}

/// Krylov evaluation, bypassing the symmetric Chebyshev path.
pub fn exp_action_krylov(m: &LinearOperator, tau: f64, v: &[f64], backend: &ExpBackend) -> Result<Vec<f64>> {
    check_len(m.dim(), v.len())?;
    backend.validate()?;
    if tau == 0.0 || m.nnz() == 0 {
        return Ok(v.to_vec());
    }
    krylov::exp_action(m, tau, v, backend.tolerance, backend.krylov_dim, backend.max_substeps)
}

/// `exp(tau B) v` for a frozen nonlinear operator, elementwise when diagonal.
pub fn exp_frozen(op: &FrozenOperator, tau: f64, v: &[f64], backend: &ExpBackend) -> Result<Vec<f64>> {
    check_len(op.dim(), v.len())?;
    match op {
        FrozenOperator::Diagonal(d) => Ok(d.iter().zip(v).map(|(x, y)| (tau * x).exp() * y).collect()),
        FrozenOperator::Matrix(m) => exp_action(m, tau, v, backend),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, c: f64, r: f64) -> LinearOperator {
        let t = (0..n).flat_map(|i| {
            let mut e = vec![(i, i, -2.0 * c + r)];
            if i > 0 {
                e.push((i, i - 1, c));
            }
            if i + 1 < n {
                e.push((i, i + 1, c));
            }
            e
        });
        LinearOperator::from_triplets(n, t).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let m = laplacian(10, 4.0, 1.0);
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(exp_action(&m, 0.0, &v, &ExpBackend::default()).unwrap(), v);
    }

    #[test]
    fn diagonal_fast_path_is_exact() {
        let m = LinearOperator::diagonal(&[-1.0, 2.0]);
        let w = exp_action(&m, 0.5, &[1.0, 1.0], &ExpBackend::iterative()).unwrap();
        assert_eq!(w, vec![(-0.5f64).exp(), 1f64.exp()]);
    }

    #[test]
    fn nilpotent_example_all_backends() {
        let m = LinearOperator::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        for b in [ExpBackend::dense(), ExpBackend::iterative()] {
            let w = exp_action(&m, 1.0, &[2.0, 5.0], &b).unwrap();
            assert!((w[0] - 7.0).abs() < 1e-13 && (w[1] - 5.0).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_and_krylov_agree_with_dense_on_laplacian() {
        let m = laplacian(60, 50.0, 1.0);
        let v: Vec<f64> = (0..60).map(|i| (-(i as f64 - 30.0).powi(2) / 50.0).exp()).collect();
        let b = ExpBackend::default();
        for tau in [0.01, 0.3, -0.002] {
            let d = exp_action(&m, tau, &v, &ExpBackend::dense()).unwrap();
            let c = exp_action_iterative(&m, tau, &v, &b).unwrap();
            let k = exp_action_krylov(&m, tau, &v, &b).unwrap();
            let dn = vec_norm(&d);
            let ec = vec_norm(&c.iter().zip(&d).map(|(a, b)| a - b).collect::<Vec<_>>()) / dn;
            let ek = vec_norm(&k.iter().zip(&d).map(|(a, b)| a - b).collect::<Vec<_>>()) / dn;
            assert!(ec < 1e-10, "chebyshev tau {tau}: {ec}");
            assert!(ek < 1e-10, "krylov tau {tau}: {ek}");
        }
    }

    #[test]
    fn dense_above_cap_is_rejected() {
        let m = laplacian(5, 1.0, 0.0);
        let b = ExpBackend {
            dense_cap: 4,
            ..ExpBackend::dense()
        };
        assert!(matches!(exp_action(&m, 1.0, &[1.0; 5], &b), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn invalid_tolerance_is_rejected() {
        let m = laplacian(3, 1.0, 0.0);
        let b = ExpBackend::default().with_tolerance(0.0);
        assert!(exp_action(&m, 1.0, &[1.0; 3], &b).is_err());
    }
}
