use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::sparse::LinearOperator;
use crate::error::{check_finite, check_len, Error, Result};

/// Storage shape of a nonlinear family's frozen operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Diagonal,
    Dense,
    General,
}

/// A state-dependent operator evaluated at a fixed `(t, u)`.
///
/// Diagonal operators keep only their diagonal so that products and
/// exponentials stay linear in the unknown count.
#[derive(Clone, Debug, PartialEq)]
pub enum FrozenOperator {
    Diagonal(Vec<f64>),
    Matrix(LinearOperator),
}

impl FrozenOperator {
    pub fn zeros(n: usize) -> Self {
        FrozenOperator::Diagonal(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        match self {
            FrozenOperator::Diagonal(d) => d.len(),
            FrozenOperator::Matrix(m) => m.dim(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, FrozenOperator::Diagonal(_))
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        Ok(match self {
            FrozenOperator::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            FrozenOperator::Matrix(m) => m.apply(v)?,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            FrozenOperator::Diagonal(d) => FrozenOperator::Diagonal(d.iter().map(|x| x * s).collect()),
            FrozenOperator::Matrix(m) => FrozenOperator::Matrix(m.scaled(s)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.dim(), other.dim())?;
        Ok(match (self, other) {
            (FrozenOperator::Diagonal(a), FrozenOperator::Diagonal(b)) => {
                FrozenOperator::Diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (FrozenOperator::Diagonal(d), FrozenOperator::Matrix(m))
            | (FrozenOperator::Matrix(m), FrozenOperator::Diagonal(d)) => {
                FrozenOperator::Matrix(m.add_diagonal(d)?)
            }
            (FrozenOperator::Matrix(a), FrozenOperator::Matrix(b)) => FrozenOperator::Matrix(a.add(b)?),
        })
    }

    pub fn to_linear(&self) -> LinearOperator {
        match self {
            FrozenOperator::Diagonal(d) => LinearOperator::diagonal(d),
            FrozenOperator::Matrix(m) => m.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            FrozenOperator::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            FrozenOperator::Matrix(m) => m.to_dense(),
        }
    }
}

/// The state-dependent operator family `B(t, u)` of `u' = A u + B(t, u) u`,
/// together with its first and second directional derivatives.
///
/// `derivative(t, u0, d)` returns the operator `B'(u0)[d]`, i.e. the limit of
/// `(B(t, u0 + h d) - B(t, u0)) / h`; `second_derivative` returns the
/// symmetric bilinear term `B''(u0)[d1, d2]`.
pub trait NonlinearFamily: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn structure(&self) -> Structure;

    fn operator(&self, t: f64, u: &[f64]) -> Result<FrozenOperator>;

    fn derivative(&self, _t: f64, _u0: &[f64], _d: &[f64]) -> Result<FrozenOperator> {
        Err(Error::Unsupported("first derivative"))
    }

    fn second_derivative(&self, _t: f64, _u0: &[f64], _d1: &[f64], _d2: &[f64]) -> Result<FrozenOperator> {
        Err(Error::Unsupported("second derivative"))
    }
}

/// `B(t, u) v`.
pub fn eval_b(family: &dyn NonlinearFamily, t: f64, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_len(family.dim(), u.len())?;
    check_finite(u)?;
    family.operator(t, u)?.apply(v)
}

/// `(B'(u0)[d]) v`.
pub fn eval_b_prime(
    family: &dyn NonlinearFamily,
    t: f64,
    u0: &[f64],
    d: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    check_len(family.dim(), u0.len())?;
    check_len(family.dim(), d.len())?;
    check_finite(u0)?;
    family.derivative(t, u0, d)?.apply(v)
}

/// `(B''(u0)[d1, d2]) v`.
pub fn eval_b_second(
    family: &dyn NonlinearFamily,
    t: f64,
    u0: &[f64],
    d1: &[f64],
    d2: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    check_len(family.dim(), u0.len())?;
    check_len(family.dim(), d1.len())?;
    check_len(family.dim(), d2.len())?;
    check_finite(u0)?;
    family.second_derivative(t, u0, d1, d2)?.apply(v)
}

/// Logistic reaction `B(u) = -(r/K) diag(u)`.
#[derive(Clone, Debug)]
pub struct LogisticFamily {
    n: usize,
    rate: f64,
    capacity: f64,
}

impl LogisticFamily {
    pub fn new(n: usize, rate: f64, capacity: f64) -> Result<Self> {
        if !(capacity > 0.0) {
            return Err(Error::InvalidConfig(format!("carrying capacity must be positive, got {capacity}")));
        }
        Ok(Self { n, rate, capacity })
    }

    fn coefficient(&self) -> f64 {
        -self.rate / self.capacity
    }
}

impl NonlinearFamily for LogisticFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn structure(&self) -> Structure {
        Structure::Diagonal
    }

    fn operator(&self, _t: f64, u: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u.len())?;
        let c = self.coefficient();
        Ok(FrozenOperator::Diagonal(u.iter().map(|x| c * x).collect()))
    }

    fn derivative(&self, _t: f64, u0: &[f64], d: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u0.len())?;
        check_len(self.n, d.len())?;
        let c = self.coefficient();
        Ok(FrozenOperator::Diagonal(d.iter().map(|x| c * x).collect()))
    }

    fn second_derivative(&self, _t: f64, u0: &[f64], _d1: &[f64], _d2: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u0.len())?;
        Ok(FrozenOperator::zeros(self.n))
    }
}

/// Elementwise power law `B(u) = c diag(u^(m-1))`, the Bernoulli nonlinearity.
#[derive(Clone, Debug)]
pub struct PowerFamily {
    n: usize,
    coefficient: f64,
    exponent: u32,
}

impl PowerFamily {
    pub fn new(n: usize, coefficient: f64, exponent: u32) -> Result<Self> {
        if exponent < 2 {
            return Err(Error::InvalidConfig(format!("exponent must be at least 2, got {exponent}")));
        }
        Ok(Self { n, coefficient, exponent })
    }

    /// `c * k * x^p`, with `x^0 = 1` even for `x = 0`.
    fn term(&self, k: f64, x: f64, p: i32) -> f64 {
        if k == 0.0 {
            0.0
        } else {
            self.coefficient * k * x.powi(p)
        }
    }
}

impl NonlinearFamily for PowerFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn structure(&self) -> Structure {
        Structure::Diagonal
    }

    fn operator(&self, _t: f64, u: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u.len())?;
        let p = self.exponent as i32 - 1;
        Ok(FrozenOperator::Diagonal(u.iter().map(|&x| self.term(1.0, x, p)).collect()))
    }

    fn derivative(&self, _t: f64, u0: &[f64], d: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u0.len())?;
        check_len(self.n, d.len())?;
        let m = self.exponent as i32;
        let k = (m - 1) as f64;
        Ok(FrozenOperator::Diagonal(
            u0.iter().zip(d).map(|(&x, &di)| self.term(k, x, m - 2) * di).collect(),
        ))
    }

    fn second_derivative(&self, _t: f64, u0: &[f64], d1: &[f64], d2: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u0.len())?;
        check_len(self.n, d1.len())?;
        check_len(self.n, d2.len())?;
        let m = self.exponent as i32;
        let k = ((m - 1) * (m - 2)) as f64;
        Ok(FrozenOperator::Diagonal(
            u0.iter()
                .zip(d1.iter().zip(d2))
                .map(|(&x, (&a, &b))| self.term(k, x, (m - 3).max(0)) * a * b)
                .collect(),
        ))
    }
}

/// State- and time-independent family `B(t, u) = B0`.
#[derive(Clone, Debug)]
pub struct ConstantFamily {
    op: FrozenOperator,
}

impl ConstantFamily {
    pub fn new(op: FrozenOperator) -> Self {
        Self { op }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(FrozenOperator::zeros(n))
    }
}

impl NonlinearFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn structure(&self) -> Structure {
        match self.op {
            FrozenOperator::Diagonal(_) => Structure::Diagonal,
            FrozenOperator::Matrix(_) => Structure::General,
        }
    }

    fn operator(&self, _t: f64, u: &[f64]) -> Result<FrozenOperator> {
        check_len(self.dim(), u.len())?;
        Ok(self.op.clone())
    }

    fn derivative(&self, _t: f64, u0: &[f64], _d: &[f64]) -> Result<FrozenOperator> {
        check_len(self.dim(), u0.len())?;
        Ok(FrozenOperator::zeros(self.dim()))
    }

    fn second_derivative(&self, _t: f64, u0: &[f64], _d1: &[f64], _d2: &[f64]) -> Result<FrozenOperator> {
        check_len(self.dim(), u0.len())?;
        Ok(FrozenOperator::zeros(self.dim()))
    }
}

type DiagFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;
type DiagDerivFn = dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync;
type DiagSecondFn = dyn Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Diagonal family defined by closures; derivatives are optional.
#[derive(Clone)]
pub struct FnDiagonalFamily {
    n: usize,
    value: Arc<DiagFn>,
    derivative: Option<Arc<DiagDerivFn>>,
    second: Option<Arc<DiagSecondFn>>,
}

impl fmt::Debug for FnDiagonalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDiagonalFamily")
            .field("n", &self.n)
            .field("derivative", &self.derivative.is_some())
            .field("second", &self.second.is_some())
            .finish()
    }
}

impl FnDiagonalFamily {
    pub fn new(n: usize, value: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            n,
            value: Arc::new(value),
            derivative: None,
            second: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_second_derivative(
        mut self,
        d2: impl Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.second = Some(Arc::new(d2));
        self
    }

    fn checked(&self, v: Vec<f64>) -> Result<FrozenOperator> {
        check_len(self.n, v.len())?;
        Ok(FrozenOperator::Diagonal(v))
    }
}

impl NonlinearFamily for FnDiagonalFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn structure(&self) -> Structure {
        Structure::Diagonal
    }

    fn operator(&self, t: f64, u: &[f64]) -> Result<FrozenOperator> {
        check_len(self.n, u.len())?;
        self.checked((self.value)(t, u))
    }

    fn derivative(&self, t: f64, u0: &[f64], d: &[f64]) -> Result<FrozenOperator> {
        let f = self.derivative.as_ref().ok_or(Error::Unsupported("first derivative"))?;
        self.checked(f(t, u0, d))
    }

    fn second_derivative(&self, t: f64, u0: &[f64], d1: &[f64], d2: &[f64]) -> Result<FrozenOperator> {
        let f = self.second.as_ref().ok_or(Error::Unsupported("second derivative"))?;
        self.checked(f(t, u0, d1, d2))
    }
}
