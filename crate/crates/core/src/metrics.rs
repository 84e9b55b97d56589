//! Grid norms of errors, aggregation over time, and convergence rates.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operators::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn label(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.label() == s)
    }
}

/// Discrete norm of `v` with node weight `w` (the cell volume, 1 for ODEs).
pub fn grid_norm(v: &[f64], weight: f64, kind: NormKind) -> f64 {
    match kind {
        NormKind::L1 => weight * v.iter().map(|x| x.abs()).sum::<f64>(),
        NormKind::L2 => (weight * v.iter().map(|x| x * x).sum::<f64>()).sqrt(),
        NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

fn error_norm(num: &[f64], reference: &[f64], weight: f64, kind: NormKind, relative: bool) -> Result<f64> {
    check_len(reference.len(), num.len())?;
    let diff: Vec<f64> = num.iter().zip(reference).map(|(a, b)| a - b).collect();
    let e = grid_norm(&diff, weight, kind);
    if !relative {
        return Ok(e);
    }
    let r = grid_norm(reference, weight, kind);
    if r == 0.0 {
        return Err(Error::Domain("relative error against a zero reference".into()));
    }
    Ok(e / r)
}

/// `||u_num - u_ref||` in the weighted grid norm, optionally divided by
/// `||u_ref||`.
pub fn spatial_error(num: &StateVector, reference: &StateVector, kind: NormKind, relative: bool) -> Result<f64> {
    if num.grid() != reference.grid() {
        return Err(Error::InvalidConfig("states live on different grids".into()));
    }
    error_norm(num.values(), reference.values(), num.grid().cell_volume(), kind, relative)
}

/// How per-step errors are combined into one number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeAggregation {
    /// `max_n e_n`.
    Max,
    /// `sqrt(sum_n e_n^2)`, no step-size weight.
    #[default]
    L2Unweighted,
    /// `sqrt(dt sum_n e_n^2)`.
    L2Weighted,
}

impl TimeAggregation {
    pub fn label(self) -> &'static str {
        match self {
            TimeAggregation::Max => "max",
            TimeAggregation::L2Unweighted => "l2-unweighted",
            TimeAggregation::L2Weighted => "l2-weighted",
        }
    }
}

pub fn time_aggregate(errors: &[f64], mode: TimeAggregation, dt: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Domain("no errors to aggregate".into()));
    }
    if errors.len() == 1 {
        return Ok(errors[0]);
    }
    let squares: f64 = errors.iter().map(|e| e * e).sum();
    Ok(match mode {
        TimeAggregation::Max => errors.iter().copied().fold(0.0, f64::max),
        TimeAggregation::L2Unweighted => squares.sqrt(),
        TimeAggregation::L2Weighted => (dt * squares).sqrt(),
    })
}

/// Restricts `fine` to the nodes of `coarse` (exact injection on nested
/// grids) and measures the difference.
pub fn refined_reference_error(
    coarse: &StateVector,
    fine: &StateVector,
    kind: NormKind,
    relative: bool,
) -> Result<f64> {
    let restricted = restrict(fine, coarse)?;
    error_norm(coarse.values(), &restricted, coarse.grid().cell_volume(), kind, relative)
}

/// Values of `fine` at the nodes of `coarse`'s grid.
pub fn restrict(fine: &StateVector, coarse: &StateVector) -> Result<Vec<f64>> {
    let map = coarse
        .grid()
        .nested_in(fine.grid())
        .ok_or_else(|| Error::InvalidConfig("grids are not nested".into()))?;
    Ok(map.into_iter().map(|i| fine.values()[i]).collect())
}

/// `log(E_fine / E_coarse) / log(1/2)` for errors at steps `dt` and `dt/2`.
pub fn convergence_rate(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) || !e_coarse.is_finite() || !e_fine.is_finite() {
        return Err(Error::Domain(format!(
            "convergence rate needs positive errors, got {e_coarse} and {e_fine}"
        )));
    }
    Ok((e_fine / e_coarse).ln() / 0.5f64.ln())
}

/// Error of one run in one norm, with per-sample values.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub norm: NormKind,
    pub relative: bool,
    pub aggregation: TimeAggregation,
    pub times: Vec<f64>,
    pub samples: Vec<f64>,
    pub value: f64,
}

impl ErrorReport {
    pub fn new(
        norm: NormKind,
        relative: bool,
        aggregation: TimeAggregation,
        dt: f64,
        times: Vec<f64>,
        samples: Vec<f64>,
    ) -> Result<Self> {
        check_len(times.len(), samples.len())?;
        let value = time_aggregate(&samples, aggregation, dt)?;
        Ok(Self {
            norm,
            relative,
            aggregation,
            times,
            samples,
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Grid;
    use std::sync::Arc;

    fn state(grid: &Arc<Grid>, v: Vec<f64>) -> StateVector {
        StateVector::new(v, grid.clone(), 0.0).unwrap()
    }

    #[test]
    fn hand_evaluated_norms() {
        let grid = Arc::new(Grid::uniform(1, 0.0, 1.25, 0.25).unwrap());
        assert_eq!(grid.len(), 4);
        let a = state(&grid, vec![1.0; 4]);
        let b = state(&grid, vec![0.0; 4]);
        for k in NormKind::ALL {
            assert!((spatial_error(&a, &b, k, false).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(spatial_error(&a, &a, k, false).unwrap(), 0.0);
        }
        assert!(matches!(spatial_error(&a, &b, NormKind::L2, true), Err(Error::Domain(_))));
    }

    #[test]
    fn aggregation_modes() {
        let e = [0.5; 4];
        assert_eq!(time_aggregate(&e, TimeAggregation::Max, 0.1).unwrap(), 0.5);
        assert!((time_aggregate(&e, TimeAggregation::L2Unweighted, 0.1).unwrap() - 1.0).abs() < 1e-15);
        assert!((time_aggregate(&e, TimeAggregation::L2Weighted, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(time_aggregate(&[0.3], TimeAggregation::L2Weighted, 0.01).unwrap(), 0.3);
        assert!(time_aggregate(&[], TimeAggregation::Max, 0.1).is_err());
    }

    #[test]
    fn rates() {
        assert!((convergence_rate(0.260, 0.160).unwrap() - 0.700).abs() < 1e-3);
        assert!((convergence_rate(0.087, 0.026).unwrap() - 1.743).abs() < 1e-3);
        for p in 0..4 {
            let r = convergence_rate(3.0, 3.0 / 2f64.powi(p)).unwrap();
            assert!((r - p as f64).abs() < 1e-12);
        }
        assert!(convergence_rate(0.0, 1.0).is_err());
        assert!(convergence_rate(1.0, -1.0).is_err());
    }

    #[test]
    fn nested_restriction() {
        let coarse = Arc::new(Grid::uniform(2, 0.0, 1.0, 0.25).unwrap());
        let fine = Arc::new(Grid::uniform(2, 0.0, 1.0, 0.125).unwrap());
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1];
        let c = state(&coarse, coarse.sample(f));
        let fi = state(&fine, fine.sample(f));
        assert_eq!(refined_reference_error(&c, &fi, NormKind::Linf, false).unwrap(), 0.0);
        let other = Arc::new(Grid::uniform(2, 0.0, 1.0, 0.2).unwrap());
        let o = state(&other, other.sample(f));
        assert!(refined_reference_error(&c, &o, NormKind::L2, false).is_err());
    }
}
