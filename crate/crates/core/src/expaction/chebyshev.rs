//! Chebyshev expansion of `exp(tau M) v` for symmetric `M` with a known
//! spectral enclosure `[lo, hi]`.
//!
//! With `c = (lo + hi) / 2`, `d = (hi - lo) / 2` and `X = (M - c I) / d`,
//!
//! ```text
//! exp(tau M) = exp(tau c) [ I_0(z) + 2 sum_k I_k(z) T_k(X) ],   z = tau d,
//! ```
//!
//! where `I_k` are modified Bessel functions. Coefficients are formed from
//! exponentially scaled Bessel values so large `|z|` cannot overflow; long
//! steps are split so that each substep has `|z| <= MAX_Z`.

use super::vec_norm;
use crate::error::{Error, Result};
use crate::operators::LinearOperator;

const MAX_Z: f64 = 24.0;

/// `exp(-x) I_k(x)` for `k = 0..=kmax`, `x >= 0`, by Miller's backward
/// recurrence normalised with `I_0 + 2 sum I_k = exp(x)`.
pub(crate) fn scaled_bessel_i(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = kmax.max(x.ceil() as usize);
    let start = 2 * (top + (40.0 * top as f64).sqrt() as usize + 10);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = vals[k + 1] + (2.0 * k as f64 / x) * vals[k];
        if vals[k - 1] > 1e250 {
            vals[k - 1..].iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let sum = vals[0] + 2.0 * vals[1..].iter().sum::<f64>();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / sum;
    }
    out
}

pub(crate) fn exp_action(
    m: &LinearOperator,
    tau: f64,
    v: &[f64],
    (lo, hi): (f64, f64),
    tol: f64,
    max_degree: usize,
) -> Result<Vec<f64>> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if half <= 1e-15 * centre.abs().max(1.0) {
        let s = (tau * centre).exp();
        return Ok(v.iter().map(|x| s * x).collect());
    }

    let substeps = (tau.abs() * half / MAX_Z).ceil().max(1.0) as usize;
    let h = tau / substeps as f64;
    let z = h * half;
    let bessel = scaled_bessel_i(z.abs(), max_degree);
    let sign = z.signum();
    // exp(h c) I_k(z) = exp(h c + |z|) [exp(-|z|) I_k(|z|)] sign(z)^k
    let prefactor = (h * centre + z.abs()).exp();
    let coeffs: Vec<f64> = bessel
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let doubled = if k == 0 { 1.0 } else { 2.0 };
            doubled * b * if k % 2 == 1 { sign } else { 1.0 }
        })
        .collect();
    let sub_tol = tol / substeps as f64;

    let n = m.dim();
    let mut w = v.to_vec();
    let mut scratch = vec![0.0; n];
    // X x = (M x - c x) / d
    let apply_x = |x: &[f64], out: &mut [f64]| {
        m.apply_into(x, out);
        out.iter_mut().zip(x).for_each(|(o, xi)| *o = (*o - centre * xi) / half);
    };

    for _ in 0..substeps {
        let vnorm = vec_norm(&w);
        if vnorm == 0.0 {
            return Ok(w);
        }
        let mut t_prev = w.clone();
        let mut t_curr = vec![0.0; n];
        apply_x(&t_prev, &mut t_curr);
        let mut acc: Vec<f64> = t_prev
            .iter()
            .zip(&t_curr)
            .map(|(a, b)| coeffs[0] * a + coeffs[1] * b)
            .collect();

        let mut converged = false;
        let mut small_terms = 0;
        let mut last_term = coeffs[1].abs();
        for k in 2..=max_degree {
            apply_x(&t_curr, &mut scratch);
            // T_k = 2 X T_{k-1} - T_{k-2}
            scratch.iter_mut().zip(&t_prev).for_each(|(s, p)| *s = 2.0 * *s - p);
            std::mem::swap(&mut t_prev, &mut t_curr);
            std::mem::swap(&mut t_curr, &mut scratch);
            let ck = coeffs[k];
            acc.iter_mut().zip(&t_curr).for_each(|(a, t)| *a += ck * t);

            // |T_k(X)| <= 1 on the enclosure, so |c_k| |v| bounds each term.
            last_term = ck.abs() * vnorm;
            if k as f64 > z.abs() && last_term <= 0.5 * sub_tol * vec_norm(&acc) {
                small_terms += 1;
                if small_terms >= 2 {
                    converged = true;
                    break;
                }
            } else {
                small_terms = 0;
            }
        }
        if !converged {
            return Err(Error::NotConverged {
                residual: last_term / vec_norm(&acc).max(f64::MIN_POSITIVE),
                iterations: max_degree,
            });
        }
        w = acc.into_iter().map(|x| prefactor * x).collect();
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_sum_rule_and_known_values() {
        // exp(-1) I_0(1) = 0.46575960759364043, exp(-1) I_1(1) = 0.2079104153497085
        let b = scaled_bessel_i(1.0, 20);
        assert!((b[0] - 0.46575960759364043).abs() < 1e-15);
        assert!((b[1] - 0.2079104153497085).abs() < 1e-15);
        for x in [0.1, 3.0, 24.0, 300.0] {
            let b = scaled_bessel_i(x, 800);
            let s = b[0] + 2.0 * b[1..].iter().sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x = {x}");
            assert!(b.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn diagonal_operator_matches_elementwise_exponential() {
        let d = [-3.0, -1.0, 0.0, 0.5];
        let m = LinearOperator::diagonal(&d);
        let v = [1.0, 2.0, -1.0, 0.5];
        for tau in [0.3, -0.7, 20.0] {
            let w = exp_action(&m, tau, &v, m.gershgorin(), 1e-12, 200).unwrap();
            for i in 0..4 {
                let e = (tau * d[i]).exp() * v[i];
                assert!((w[i] - e).abs() <= 1e-11 * e.abs().max(1.0), "tau {tau}: {} vs {e}", w[i]);
            }
        }
    }

    #[test]
    fn degree_cap_reports_non_convergence() {
        let m = LinearOperator::diagonal(&[-10.0, 0.0]);
        let r = exp_action(&m, 2.0, &[1.0, 1.0], (-10.0, 0.0), 1e-12, 3);
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }
}
