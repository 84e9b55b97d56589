//! Exact flow of the linear part `u' = A u + b(t)` over one substep, with
//! the boundary source frozen at the substep midpoint.
//!
//! Both pieces come out of one exponential of the augmented operator
//! `[[A, C], [0, 0]]`, whose upper-right block is `h phi_1(h A) C`. Small
//! problems cache the dense exponential per step length; large ones apply
//! the action on the fly.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::expaction::{exp_action, exp_dense, ExpBackend};
use crate::operators::LinearOperator;
use crate::problems::BoundarySource;

struct DenseFlow {
    h: f64,
    exp: DMatrix<f64>,
    /// `h phi_1(h A) C`, one column per boundary channel.
    source: DMatrix<f64>,
}

pub(crate) struct LinearFlow<'a> {
    a: &'a LinearOperator,
    boundary: Option<&'a BoundarySource>,
    augmented: Option<LinearOperator>,
    backend: ExpBackend,
    dense: bool,
    cache: Vec<DenseFlow>,
}

impl<'a> LinearFlow<'a> {
    pub(crate) fn new(a: &'a LinearOperator, boundary: Option<&'a BoundarySource>, backend: &ExpBackend) -> Result<Self> {
        let boundary = boundary.filter(|b| b.channels() > 0);
        let augmented = boundary.map(|b| a.augmented(&b.columns)).transpose()?;
        Ok(Self {
            a,
            boundary,
            augmented,
            backend: backend.clone(),
            dense: backend.uses_dense(a.dim())?,
            cache: Vec::new(),
        })
    }

    fn dense_flow(&mut self, h: f64) -> Result<&DenseFlow> {
        if let Some(pos) = self.cache.iter().position(|f| f.h == h) {
            return Ok(&self.cache[pos]);
        }
        let n = self.a.dim();
        let flow = match &self.augmented {
            Some(aug) => {
                let e = exp_dense(&aug.to_dense(), h)?;
                let c = aug.dim() - n;
                DenseFlow {
                    h,
                    exp: e.view((0, 0), (n, n)).into_owned(),
                    source: e.view((0, n), (n, c)).into_owned(),
                }
            }
            None => DenseFlow {
                h,
                exp: exp_dense(&self.a.to_dense(), h)?,
                source: DMatrix::zeros(n, 0),
            },
        };
        self.cache.push(flow);
        Ok(self.cache.last().expect("just pushed"))
    }

    /// `exp(h A) v`, without the source.
    pub(crate) fn linear(&mut self, h: f64, v: &[f64]) -> Result<Vec<f64>> {
        if self.dense {
            let f = self.dense_flow(h)?;
            Ok((&f.exp * DVector::from_column_slice(v)).as_slice().to_vec())
        } else {
            exp_action(self.a, h, v, &self.backend)
        }
    }

    /// Solution at `t + h` of `u' = A u + b(t + h/2)` from `u(t) = v`.
    pub(crate) fn affine(&mut self, t: f64, h: f64, v: &[f64]) -> Result<Vec<f64>> {
        let Some(boundary) = self.boundary else {
            return self.linear(h, v);
        };
        let g = boundary.channel_values(t + 0.5 * h)?;
        if self.dense {
            let f = self.dense_flow(h)?;
            let w = &f.exp * DVector::from_column_slice(v) + &f.source * DVector::from_vec(g);
            Ok(w.as_slice().to_vec())
        } else {
            let n = v.len();
            let mut z = v.to_vec();
            z.extend(g);
            let aug = self.augmented.as_ref().expect("boundary implies augmented operator");
            let mut w = exp_action(aug, h, &z, &self.backend)?;
            w.truncate(n);
            Ok(w)
        }
    }

    /// `A v + b(t)`.
    pub(crate) fn vector_field(&self, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        let mut w = self.a.apply(v)?;
        if let Some(boundary) = self.boundary {
            let b = boundary.source(v.len(), t)?;
            w.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn heat(n: usize) -> LinearOperator {
        let t = (0..n).flat_map(|i| {
            let mut e = vec![(i, i, -2.0)];
            if i > 0 {
                e.push((i, i - 1, 1.0));
            }
            if i + 1 < n {
                e.push((i, i + 1, 1.0));
            }
            e
        });
        LinearOperator::from_triplets(n, t).unwrap()
    }

    #[test]
    fn constant_source_reaches_the_steady_state() {
        // u' = A u + b with A u* = -b fixed: the flow from u* stays at u*.
        let a = heat(6);
        let boundary = BoundarySource {
            columns: vec![vec![(0, 1.0)], vec![(5, 1.0)]],
            values: Arc::new(|_t| Ok(vec![2.0, 2.0])),
        };
        let steady = vec![2.0; 6];
        for backend in [ExpBackend::dense(), ExpBackend::iterative()] {
            let mut flow = LinearFlow::new(&a, Some(&boundary), &backend).unwrap();
            let w = flow.affine(0.0, 0.7, &steady).unwrap();
            for x in w {
                assert!((x - 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_and_iterative_flows_agree() {
        let a = heat(30).scaled(10.0);
        let boundary = BoundarySource {
            columns: vec![vec![(0, 10.0)]],
            values: Arc::new(|t| Ok(vec![1.0 + t])),
        };
        let v: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut d = LinearFlow::new(&a, Some(&boundary), &ExpBackend::dense()).unwrap();
        let mut k = LinearFlow::new(&a, Some(&boundary), &ExpBackend::iterative()).unwrap();
        let wd = d.affine(0.2, 0.05, &v).unwrap();
        let wk = k.affine(0.2, 0.05, &v).unwrap();
        for (x, y) in wd.iter().zip(&wk) {
            assert!((x - y).abs() < 1e-9);
        }
        let ld = d.linear(0.05, &v).unwrap();
        let lk = k.linear(0.05, &v).unwrap();
        for (x, y) in ld.iter().zip(&lk) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
