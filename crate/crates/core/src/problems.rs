//! Test problems: the scalar Bernoulli equation and Fisher-KPP on interior
//! finite-difference grids in one to three dimensions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::operators::{Grid, LinearOperator, LogisticFamily, NonlinearFamily, PowerFamily, StateVector};

/// Pointwise reference solution `(x, t) -> u`.
pub type ReferenceFn = Arc<dyn Fn(&[f64], f64) -> Result<f64> + Send + Sync>;

/// Time-dependent boundary values, one per source channel.
pub type ChannelFn = Arc<dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync>;

/// Dirichlet data eliminated into an affine source
/// `b(t) = sum_c g_c(t) col_c` of the semidiscrete system `u' = A u + b(t) + B(u) u`.
#[derive(Clone)]
pub struct BoundarySource {
    /// Sparse coefficient column of each channel, as `(row, coefficient)`.
    pub columns: Vec<Vec<(usize, f64)>>,
    /// Channel values `g_c(t)`.
    pub values: ChannelFn,
}

impl BoundarySource {
    pub fn channels(&self) -> usize {
        self.columns.len()
    }

    pub fn channel_values(&self, t: f64) -> Result<Vec<f64>> {
        let g = (self.values)(t)?;
        check_len(self.columns.len(), g.len())?;
        Ok(g)
    }

    /// Dense source vector `b(t)`.
    pub fn source(&self, n: usize, t: f64) -> Result<Vec<f64>> {
        let g = self.channel_values(t)?;
        let mut b = vec![0.0; n];
        for (col, gc) in self.columns.iter().zip(g) {
            for &(row, c) in col {
                b[row] += c * gc;
            }
        }
        Ok(b)
    }
}

impl fmt::Debug for BoundarySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySource").field("columns", &self.columns).finish_non_exhaustive()
    }
}

/// Physical parameters, kept for labelling output.
#[derive(Clone, Debug, PartialEq)]
pub enum Parameters {
    Bernoulli { lambda1: f64, lambda2: f64, m: u32 },
    Fisher { diffusion: Vec<f64>, rate: f64, capacity: f64 },
    Custom,
}

impl Parameters {
    /// Compact `key=value` description.
    pub fn describe(&self) -> String {
        match self {
            Parameters::Bernoulli { lambda1, lambda2, m } => format!("lambda1={lambda1};lambda2={lambda2};m={m}"),
            Parameters::Fisher {
                diffusion,
                rate,
                capacity,
            } => {
                let d: Vec<String> = diffusion.iter().map(|d| d.to_string()).collect();
                format!("D={};r={rate};K={capacity}", d.join(":"))
            }
            Parameters::Custom => String::new(),
        }
    }
}

/// A semilinear problem `u' = A u + b(t) + B(t, u) u` with initial data.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub grid: Arc<Grid>,
    pub linear: LinearOperator,
    pub nonlinear: Arc<dyn NonlinearFamily>,
    pub initial: Vec<f64>,
    pub reference: Option<ReferenceFn>,
    pub boundary: Option<BoundarySource>,
    pub params: Parameters,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("unknowns", &self.grid.len())
            .field("params", &self.params)
            .field("has_reference", &self.reference.is_some())
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl Problem {
    pub fn custom(
        name: impl Into<String>,
        grid: Grid,
        linear: LinearOperator,
        nonlinear: Arc<dyn NonlinearFamily>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let problem = Self {
            name: name.into(),
            grid: Arc::new(grid),
            linear,
            nonlinear,
            initial,
            reference: None,
            boundary: None,
            params: Parameters::Custom,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        check_len(n, self.linear.dim())?;
        check_len(n, self.nonlinear.dim())?;
        check_len(n, self.initial.len())?;
        if let Some(b) = &self.boundary {
            if b.columns.iter().flatten().any(|&(row, _)| row >= n) {
                return Err(Error::InvalidConfig("boundary source row outside the grid".into()));
            }
        }
        Ok(())
    }

    pub fn with_reference(mut self, reference: ReferenceFn) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_boundary(mut self, boundary: Option<BoundarySource>) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn with_linear(mut self, linear: LinearOperator) -> Result<Self> {
        self.linear = linear;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nonlinear(mut self, nonlinear: Arc<dyn NonlinearFamily>) -> Result<Self> {
        self.nonlinear = nonlinear;
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector::new(self.initial.clone(), self.grid.clone(), 0.0).expect("validated at construction")
    }

    /// Reference solution sampled on the grid, if the problem has one.
    pub fn reference_state(&self, t: f64) -> Result<Option<StateVector>> {
        let Some(reference) = &self.reference else {
            return Ok(None);
        };
        let values = (0..self.grid.len())
            .map(|i| reference(&self.grid.point(i), t))
            .collect::<Result<Vec<_>>>()?;
        StateVector::new(values, self.grid.clone(), t).map(Some)
    }

    /// `u' = lambda1 u + lambda2 u^m`, `u(0) = 1`, split as `A = lambda1` and
    /// `B(u) = lambda2 u^(m-1)`.
    pub fn bernoulli(lambda1: f64, lambda2: f64, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("Bernoulli exponent must be >= 2, got {m}")));
        }
        let family = PowerFamily::new(1, lambda2, m)?;
        let mut p = Self::custom(
            "bernoulli",
            Grid::scalar(1),
            LinearOperator::diagonal(&[lambda1]),
            Arc::new(family),
            vec![1.0],
        )?;
        p.params = Parameters::Bernoulli { lambda1, lambda2, m };
        if lambda1 != 0.0 {
            p.reference = Some(Arc::new(move |_x: &[f64], t| bernoulli_exact(t, lambda1, lambda2, m)));
        }
        Ok(p)
    }

    /// Fisher-KPP on `[lo, hi]` with Dirichlet data taken from
    /// [`fisher_reference`] at both ends.
    pub fn fisher_1d(diffusion: f64, rate: f64, capacity: f64, domain: (f64, f64), dx: f64) -> Result<Self> {
        let grid = Grid::uniform(1, domain.0, domain.1, dx)?;
        let mut p = fisher_on(grid, vec![diffusion], rate, capacity)?;
        let n = p.dim();
        let c = diffusion / (p.grid.axes()[0].spacing).powi(2);
        let (lo, hi) = domain;
        let (d, r, k) = (diffusion, rate, capacity);
        p.boundary = Some(BoundarySource {
            columns: vec![vec![(0, c)], vec![(n - 1, c)]],
            values: Arc::new(move |t| {
                Ok(vec![
                    fisher_reference(&[lo], t, d, r, k)?,
                    fisher_reference(&[hi], t, d, r, k)?,
                ])
            }),
        });
        p.name = "fisher1d".into();
        Ok(p)
    }

    /// Fisher-KPP on `[lo, hi]^2` with homogeneous Dirichlet data.
    pub fn fisher_2d(dx_coef: f64, dy_coef: f64, rate: f64, capacity: f64, domain: (f64, f64), dx: f64) -> Result<Self> {
        let grid = Grid::uniform(2, domain.0, domain.1, dx)?;
        let mut p = fisher_on(grid, vec![dx_coef, dy_coef], rate, capacity)?;
        p.name = "fisher2d".into();
        Ok(p)
    }

    /// Fisher-KPP on `[lo, hi]^3` with homogeneous Dirichlet data.
    pub fn fisher_3d(
        diffusion: [f64; 3],
        rate: f64,
        capacity: f64,
        domain: (f64, f64),
        dx: f64,
    ) -> Result<Self> {
        let grid = Grid::uniform(3, domain.0, domain.1, dx)?;
        let mut p = fisher_on(grid, diffusion.to_vec(), rate, capacity)?;
        p.name = "fisher3d".into();
        Ok(p)
    }
}

fn fisher_on(grid: Grid, diffusion: Vec<f64>, rate: f64, capacity: f64) -> Result<Problem> {
    if diffusion.iter().any(|d| !(*d >= 0.0)) || !(capacity > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "Fisher parameters need D >= 0 and K > 0 (D = {diffusion:?}, K = {capacity})"
        )));
    }
    let linear = diffusion_reaction_operator(&grid, &diffusion, rate)?;
    let family = LogisticFamily::new(grid.len(), rate, capacity)?;
    let initial = grid.sample(gaussian);
    let mut p = Problem::custom("fisher", grid, linear, Arc::new(family), initial)?;
    let ds = diffusion.clone();
    p.reference = Some(Arc::new(move |x: &[f64], t| fisher_reference_aniso(x, t, &ds, rate, capacity)));
    p.params = Parameters::Fisher {
        diffusion,
        rate,
        capacity,
    };
    Ok(p)
}

/// `sum_a D_a d^2/dx_a^2 + r` with the standard second-order stencil on the
/// interior nodes of `grid` (homogeneous Dirichlet closure).
pub fn diffusion_reaction_operator(grid: &Grid, diffusion: &[f64], rate: f64) -> Result<LinearOperator> {
    check_len(grid.dimension(), diffusion.len())?;
    let axes = grid.axes();
    let coef: Vec<f64> = axes.iter().zip(diffusion).map(|(a, d)| d / (a.spacing * a.spacing)).collect();
    let centre = rate - 2.0 * coef.iter().sum::<f64>();
    let mut triplets = Vec::with_capacity(grid.len() * (1 + 2 * axes.len()));
    let mut stride = 1;
    let strides: Vec<usize> = axes
        .iter()
        .map(|a| {
            let s = stride;
            stride *= a.points;
            s
        })
        .collect();
    for i in 0..grid.len() {
        triplets.push((i, i, centre));
        let idx = grid.multi_index(i);
        for (a, ax) in axes.iter().enumerate() {
            if coef[a] == 0.0 {
                continue;
            }
            if idx[a] > 0 {
                triplets.push((i, i - strides[a], coef[a]));
            }
            if idx[a] + 1 < ax.points {
                triplets.push((i, i + strides[a], coef[a]));
            }
        }
    }
    // Dirichlet Laplacian eigenvalues: -4 c sin^2(k pi / (2 (I + 1))), k = 1..I.
    let (mut lo, mut hi) = (rate, rate);
    for (ax, c) in axes.iter().zip(&coef) {
        let s = |k: usize| (k as f64 * PI / (2.0 * (ax.points + 1) as f64)).sin().powi(2);
        lo -= 4.0 * c * s(ax.points);
        hi -= 4.0 * c * s(1);
    }
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    Ok(LinearOperator::from_triplets(grid.len(), triplets)?
        .with_symmetry(true)
        .with_spectral_hint(lo - pad, hi + pad))
}

fn gaussian(x: &[f64]) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>()).exp()
}

/// Closed-form solution of `u' = lambda1 u + lambda2 u^m`, `u(0) = 1`.
pub fn bernoulli_exact(t: f64, lambda1: f64, lambda2: f64, m: u32) -> Result<f64> {
    if lambda1 == 0.0 || m < 2 {
        return Err(Error::Domain(format!(
            "closed form needs lambda1 != 0 and m >= 2 (lambda1 = {lambda1}, m = {m})"
        )));
    }
    let q = 1.0 - m as f64;
    let ratio = lambda2 / lambda1;
    let bracket = (1.0 + ratio) * (lambda1 * t * q).exp() - ratio;
    if !(bracket > 0.0) {
        return Err(Error::Domain(format!("Bernoulli solution blows up before t = {t}")));
    }
    Ok(bracket.powf(1.0 / q))
}

/// `[A, B]`-type diagnostic for the Bernoulli split at state `u`:
/// `lambda2^2 (m-1) u^(m-1) - lambda1 lambda2 u^(m-1)`.
pub fn bernoulli_commutator(u: f64, lambda1: f64, lambda2: f64, m: u32) -> f64 {
    let p = u.powi(m as i32 - 1);
    lambda2 * lambda2 * (m as f64 - 1.0) * p - lambda1 * lambda2 * p
}

fn tilde_axes(x: &[f64], t: f64, diffusion: &[f64]) -> Result<f64> {
    x.iter().zip(diffusion).try_fold(1.0, |acc, (xi, d)| {
        let s = 1.0 + 4.0 * d * t;
        if !(s > 0.0) {
            return Err(Error::Domain(format!("1 + 4 D t = {s} is not positive")));
        }
        Ok(acc * (-xi * xi / s).exp() / s.sqrt())
    })
}

/// Heat-equation solution `u~(x, t)` for Gaussian data `exp(-|x|^2)`, in
/// product form over the coordinates of `x`.
pub fn heat_kernel_tilde(x: &[f64], t: f64, diffusion: f64) -> Result<f64> {
    tilde_axes(x, t, &vec![diffusion; x.len()])
}

/// Solution `exp(r t) u~(x, t)` of the linear diffusion-reaction part.
pub fn linear_dr_exact(x: &[f64], t: f64, diffusion: f64, rate: f64) -> Result<f64> {
    Ok((rate * t).exp() * heat_kernel_tilde(x, t, diffusion)?)
}

/// Reference field for Fisher-KPP with Gaussian data:
///
/// ```text
/// u(x, t) = exp(r t) u~ / (1 + (exp(r t) u~ - g(x)) / K)
/// ```
///
/// Exact when `D = 0` (pointwise logistic growth) or `r = 0` (heat flow);
/// an approximation otherwise.
pub fn fisher_reference(x: &[f64], t: f64, diffusion: f64, rate: f64, capacity: f64) -> Result<f64> {
    fisher_reference_aniso(x, t, &vec![diffusion; x.len()], rate, capacity)
}

fn fisher_reference_aniso(x: &[f64], t: f64, diffusion: &[f64], rate: f64, capacity: f64) -> Result<f64> {
    let tilde = tilde_axes(x, t, diffusion)?;
    let growth = (rate * t).exp();
    let denom = 1.0 + (growth * tilde - gaussian(x)) / capacity;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("reference denominator {denom} is not positive")));
    }
    Ok(growth * tilde / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_closed_form_values() {
        assert_eq!(bernoulli_exact(0.0, -1.0, -10.0, 2).unwrap(), 1.0);
        let v = bernoulli_exact(1.0, -1.0, -1.0, 2).unwrap();
        assert!((v - 1.0 / (2.0 * std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((v - 0.225399).abs() < 1e-6);
        assert!(matches!(bernoulli_exact(1.0, -1.0, 5.0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn commutator_diagnostic() {
        assert_eq!(bernoulli_commutator(1.0, -1.0, -1.0, 2), 0.0);
        assert_eq!(bernoulli_commutator(1.0, -1.0, -2.0, 2), 2.0);
    }

    #[test]
    fn fisher_1d_default_grid_and_stencil() {
        let p = Problem::fisher_1d(0.01, 1.0, 1.0, (0.0, 10.0), 0.05).unwrap();
        assert_eq!(p.dim(), 199);
        assert!((p.linear.get(5, 5) + 7.0).abs() < 1e-12);
        assert!((p.linear.get(5, 6) - 4.0).abs() < 1e-12);
        assert!(p.linear.is_symmetric());
        let b = p.boundary.as_ref().unwrap();
        assert_eq!(b.columns.len(), 2);
        assert_eq!((b.columns[0][0].0, b.columns[1][0].0), (0, 198));
        assert!(b.columns.iter().all(|c| (c[0].1 - 4.0).abs() < 1e-12));
    }

    #[test]
    fn fisher_2d_and_3d_diagonals() {
        let p = Problem::fisher_2d(0.01, 0.01, 1.0, 1.0, (-2.0, 2.0), 0.05).unwrap();
        assert_eq!(p.dim(), 79 * 79);
        assert!((p.linear.get(100, 100) + 15.0).abs() < 1e-12);
        let q = Problem::fisher_3d([0.01; 3], 1.0, 1.0, (-0.5, 0.5), 0.05).unwrap();
        assert_eq!(q.dim(), 19 * 19 * 19);
        let i = q.grid.flat_index(&[5, 5, 5]);
        assert!((q.linear.get(i, i) - (1.0 - 6.0 * 4.0)).abs() < 1e-12);
        let row: Vec<_> = q.linear.entries().filter(|e| e.0 == i && e.1 != i).collect();
        assert_eq!(row.len(), 6);
        assert!(row.iter().all(|e| (e.2 - 4.0).abs() < 1e-12));
    }

    #[test]
    fn spectral_hint_encloses_gershgorin_interior() {
        let p = Problem::fisher_2d(0.01, 0.02, 1.0, 1.0, (-1.0, 1.0), 0.25).unwrap();
        let (lo, hi) = p.linear.spectral_hint().unwrap();
        let eig = p.linear.to_dense().symmetric_eigen();
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        assert!(lo <= min && max <= hi);
        assert!((lo - min).abs() < 1e-10 && (hi - max).abs() < 1e-10);
    }

    #[test]
    fn heat_kernel_and_linear_values() {
        assert!((heat_kernel_tilde(&[0.0], 1.0, 0.01).unwrap() - 0.980581).abs() < 1e-6);
        let want = std::f64::consts::E / 1.04f64.sqrt();
        assert!((linear_dr_exact(&[0.0], 1.0, 0.01, 1.0).unwrap() - want).abs() < 1e-14);
        assert!((want - 2.66550).abs() < 1e-5);
        assert_eq!(heat_kernel_tilde(&[0.7], 3.0, 0.0).unwrap(), (-0.49f64).exp());
    }

    #[test]
    fn reference_reproduces_initial_data() {
        for p in [
            Problem::fisher_1d(0.01, 1.0, 1.0, (0.0, 10.0), 0.05).unwrap(),
            Problem::fisher_2d(0.01, 0.01, 1.0, 0.5, (-2.0, 2.0), 0.1).unwrap(),
        ] {
            let r = p.reference_state(0.0).unwrap().unwrap();
            for (a, b) in r.values().iter().zip(&p.initial) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn logistic_limit_of_reference() {
        let (g, r, k, t) = ((-0.09f64).exp(), 1.0f64, 0.5, 2.0f64);
        let want = g * (r * t).exp() / (1.0 + g / k * ((r * t).exp() - 1.0));
        assert!((fisher_reference(&[0.3], t, 0.0, r, k).unwrap() - want).abs() < 1e-14);
    }
}
