use std::sync::Arc;

use crate::error::{check_finite, check_len, Error, Result};

/// One Cartesian axis of an interior-point Dirichlet grid.
///
/// The boundary nodes `lower` and `upper` are not unknowns; the `points`
/// interior nodes sit at `lower + spacing * j` for `j = 1..=points`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    pub spacing: f64,
}

impl Axis {
    /// Builds the interior nodes of `[lower, upper]` with spacing `dx`.
    ///
    /// `dx` must divide the interval length (up to a relative 1e-9).
    pub fn interior(lower: f64, upper: f64, dx: f64) -> Result<Self> {
        if !(upper > lower) || !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "axis [{lower}, {upper}] with spacing {dx} is not a valid interval"
            )));
        }
        let cells = (upper - lower) / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) || rounded < 2.0 {
            return Err(Error::InvalidConfig(format!(
                "spacing {dx} does not divide [{lower}, {upper}] into an integer number (>= 2) of cells"
            )));
        }
        let cells = rounded as usize;
        Ok(Self {
            lower,
            upper,
            points: cells - 1,
            spacing: (upper - lower) / cells as f64,
        })
    }

    /// Coordinate of interior node `j` (0-based).
    pub fn node(&self, j: usize) -> f64 {
        self.lower + self.spacing * (j + 1) as f64
    }
}

/// Spatial layout of the unknown vector.
///
/// Dimension 0 describes an ODE system of `size` unknowns with no geometry.
/// For dimensions 1-3 the unknowns are the interior nodes, flattened
/// lexicographically with the first axis running fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    size: usize,
}

impl Grid {
    pub fn scalar(size: usize) -> Self {
        Self { axes: Vec::new(), size }
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidConfig(format!(
                "grids support 1 to 3 axes, got {}",
                axes.len()
            )));
        }
        let size = axes.iter().map(|a| a.points).product();
        Ok(Self { axes, size })
    }

    /// Uniform interior grid on the box `[lower, upper]^dim`.
    pub fn uniform(dim: usize, lower: f64, upper: f64, dx: f64) -> Result<Self> {
        let axis = Axis::interior(lower, upper, dx)?;
        Self::from_axes(vec![axis; dim])
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Spacing of the first axis, or `None` for ODE grids.
    pub fn spacing(&self) -> Option<f64> {
        self.axes.first().map(|a| a.spacing)
    }

    /// Quadrature weight of one node: the product of the axis spacings.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// Per-axis node indices of flat index `i`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let j = i % a.points;
                i /= a.points;
                j
            })
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &j) in self.axes.iter().zip(idx) {
            flat += j * stride;
            stride *= a.points;
        }
        flat
    }

    /// Coordinates of unknown `i` (empty for ODE grids).
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.multi_index(i)
            .into_iter()
            .zip(&self.axes)
            .map(|(j, a)| a.node(j))
            .collect()
    }

    /// Samples `f` at every unknown.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.size).map(|i| f(&self.point(i))).collect()
    }

    /// Index map from this grid into a nested finer grid whose nodes include
    /// every node of `self`. Returns `None` when the grids are not nested.
    pub fn nested_in(&self, fine: &Grid) -> Option<Vec<usize>> {
        if self.dimension() != fine.dimension() || self.dimension() == 0 {
            return None;
        }
        let mut ratios = Vec::with_capacity(self.dimension());
        for (c, f) in self.axes.iter().zip(fine.axes()) {
            let tol = 1e-12 * (c.upper - c.lower).abs().max(1.0);
            if (c.lower - f.lower).abs() > tol || (c.upper - f.upper).abs() > tol {
                return None;
            }
            let (cc, fc) = (c.points + 1, f.points + 1);
            if fc % cc != 0 {
                return None;
            }
            ratios.push(fc / cc);
        }
        Some(
            (0..self.size)
                .map(|i| {
                    let idx: Vec<usize> = self
                        .multi_index(i)
                        .iter()
                        .zip(&ratios)
                        .map(|(&j, &k)| (j + 1) * k - 1)
                        .collect();
                    fine.flat_index(&idx)
                })
                .collect(),
        )
    }
}

/// Grid-sampled solution values at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
    grid: Arc<Grid>,
    time: f64,
}

impl StateVector {
    pub fn new(values: Vec<f64>, grid: Arc<Grid>, time: f64) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        check_finite(&values)?;
        Ok(Self { values, grid, time })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
