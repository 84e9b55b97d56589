use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

/// Rows above this count are processed in parallel by `apply_into`.
const PARALLEL_ROWS: usize = 1 << 15;

/// Square sparse matrix in compressed-row form.
///
/// Carries a symmetry flag and an optional enclosure `(lo, hi)` of the
/// spectrum, both consumed by the iterative exponential backends.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
    spectral_hint: Option<(f64, f64)>,
}

impl LinearOperator {
    /// Assembles an `n x n` matrix from `(row, col, value)` entries.
    /// Duplicate entries are summed.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= n || *c >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.max(c) + 1,
            });
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
            spectral_hint: None,
        };
        op.symmetric = op.is_structurally_symmetric(0.0);
        Ok(op)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            symmetric: true,
            spectral_hint: Some((0.0, 0.0)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
            symmetric: true,
            spectral_hint: if n > 0 { Some((lo, hi)) } else { None },
        }
    }

    /// Converts a dense matrix, dropping exact zeros.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        let trip = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != 0.0).then_some((i, j, v))
            });
        Self::from_triplets(n, trip)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Sets the symmetry flag. The flag is trusted by the iterative backends,
    /// so callers must only set it for matrices that are symmetric.
    pub fn with_symmetry(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn spectral_hint(&self) -> Option<(f64, f64)> {
        self.spectral_hint
    }

    pub fn with_spectral_hint(mut self, lo: f64, hi: f64) -> Self {
        self.spectral_hint = Some((lo.min(hi), lo.max(hi)));
        self
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `A v`, checking dimensions.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `out = A v`. Panics if the slices do not have length `dim()`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        assert_eq!(out.len(), self.n);
        let row = |i: usize| -> f64 {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            self.col_idx[a..b]
                .iter()
                .zip(&self.values[a..b])
                .map(|(&j, &x)| x * v[j])
                .sum()
        };
        if self.n >= PARALLEL_ROWS {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.spectral_hint = self.spectral_hint.map(|(lo, hi)| {
            let (a, b) = (lo * s, hi * s);
            (a.min(b), a.max(b))
        });
        out
    }

    /// Entrywise sum. The result carries no spectral hint.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.n, other.n)?;
        let sym = self.symmetric && other.symmetric;
        let out = Self::from_triplets(self.n, self.entries().chain(other.entries()))?;
        Ok(out.with_symmetry(sym))
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Result<Self> {
        check_len(self.n, d.len())?;
        let sym = self.symmetric;
        let diag = d.iter().enumerate().map(|(i, &x)| (i, i, x));
        let out = Self::from_triplets(self.n, self.entries().chain(diag))?;
        Ok(out.with_symmetry(sym))
    }

    /// Appends `extra` zero rows and columns, then stores the given column
    /// entries in the new columns: `[[A, C], [0, 0]]`.
    ///
    /// Used to fold an affine source term into a single exponential action.
    pub fn augmented(&self, columns: &[Vec<(usize, f64)>]) -> Result<Self> {
        let n = self.n + columns.len();
        let extra = columns.iter().enumerate().flat_map(|(k, col)| {
            col.iter().map(move |&(row, v)| (row, self.n + k, v))
        });
        let out = Self::from_triplets(n, self.entries().chain(extra))?;
        Ok(out.with_symmetry(columns.is_empty() && self.symmetric))
    }

    /// Interval `[lo, hi]` containing the real parts of all eigenvalues.
    pub fn gershgorin(&self) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut centre = 0.0;
            let mut radius = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    centre += self.values[k];
                } else {
                    radius += self.values[k].abs();
                }
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }

    /// Spectral enclosure: the stored hint if any, otherwise Gershgorin.
    pub fn spectral_interval(&self) -> (f64, f64) {
        self.spectral_hint.unwrap_or_else(|| self.gershgorin())
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.n];
        for (_, j, v) in self.entries() {
            cols[j] += v.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    fn is_structurally_symmetric(&self, tol: f64) -> bool {
        self.entries()
            .all(|(i, j, v)| (self.get(j, i) - v).abs() <= tol * v.abs().max(1.0))
    }
}
