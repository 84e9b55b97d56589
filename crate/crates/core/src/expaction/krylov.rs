//! Arnoldi projection with adaptive substepping for general (nonsymmetric)
//! operators.
//!
//! Each substep builds a Krylov basis of dimension `m` from the current
//! vector and evaluates `beta V exp(h H) e1`. The step length `h` is
//! accepted when the residual-based error estimate
//! `beta h_{m+1,m} h |e_m^T phi_1(h H) e1|` meets the per-unit-time budget.

use nalgebra::DMatrix;

use super::dense::exp_dense;
use super::vec_norm;
use crate::error::{Error, Result};
use crate::operators::LinearOperator;

pub(crate) fn exp_action(
    m: &LinearOperator,
    tau: f64,
    v: &[f64],
    tol: f64,
    krylov_dim: usize,
    max_substeps: usize,
) -> Result<Vec<f64>> {
    let n = m.dim();
    let dim = krylov_dim.min(n).max(1);
    let sign = tau.signum();
    let total = tau.abs();
    let anorm = m.one_norm().max(f64::MIN_POSITIVE);
    let breakdown = 1e-14 * anorm;

    let mut w = v.to_vec();
    let mut t_done = 0.0;
    let mut h = total;
    let mut substeps = 0usize;
    let mut scratch = vec![0.0; n];

    while t_done < total {
        let beta = vec_norm(&w);
        if beta == 0.0 {
            return Ok(w);
        }

        // Arnoldi with modified Gram-Schmidt and one reorthogonalisation pass.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        basis.push(w.iter().map(|x| x / beta).collect());
        let mut hess = DMatrix::<f64>::zeros(dim + 1, dim);
        let mut k = dim;
        let mut happy = false;
        for j in 0..dim {
            m.apply_into(&basis[j], &mut scratch);
            let mut p: Vec<f64> = scratch.iter().map(|x| sign * x).collect();
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &p);
                    hess[(i, j)] += c;
                    p.iter_mut().zip(q).for_each(|(pi, qi)| *pi -= c * qi);
                }
            }
            let norm = vec_norm(&p);
            hess[(j + 1, j)] = norm;
            if norm <= breakdown {
                k = j + 1;
                happy = true;
                break;
            }
            basis.push(p.into_iter().map(|x| x / norm).collect());
        }
        let h_next = hess[(k, k - 1)];

        let remaining = total - t_done;
        h = h.min(remaining);
        let coeffs = loop {
            // exp([[hH, e1], [0, 0]]) = [[exp(hH), phi1(hH) e1], [0, 1]]
            let mut aug = DMatrix::<f64>::zeros(k + 1, k + 1);
            aug.view_mut((0, 0), (k, k)).copy_from(&hess.view((0, 0), (k, k)));
            aug *= h;
            aug[(0, k)] = 1.0;
            let e = exp_dense(&aug, 1.0)?;
            let coeffs: Vec<f64> = (0..k).map(|i| beta * e[(i, 0)]).collect();
            let err = if happy {
                0.0
            } else {
                beta * h_next * h * e[(k - 1, k)].abs()
            };
            let ynorm = vec_norm(&coeffs);
            if err <= 0.25 * tol * ynorm * (h / total) || happy {
                break coeffs;
            }
            substeps += 1;
            if h <= total * 1e-14 || substeps > max_substeps {
                return Err(Error::NotConverged {
                    residual: err / ynorm.max(f64::MIN_POSITIVE),
                    iterations: substeps,
                });
            }
            h *= 0.5;
        };

        w.iter_mut().for_each(|x| *x = 0.0);
        for (c, q) in coeffs.iter().zip(&basis) {
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi += c * qi);
        }
        t_done += h;
        if happy {
            // The Krylov space is invariant: the rest of the interval is exact too.
            h = total - t_done;
        } else {
            h *= 2.0;
        }
        substeps += 1;
        if substeps > max_substeps && t_done < total {
            return Err(Error::NotConverged {
                residual: f64::NAN,
                iterations: substeps,
            });
        }
    }
    Ok(w)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
