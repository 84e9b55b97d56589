//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants (degrees 3, 5, 7, 9, 13), after Higham (2005).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub(crate) fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(tau * M)` for a dense square matrix.
pub fn exp_dense(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !tau.is_finite() {
        return Err(Error::Domain(format!("exponential step {tau} is not finite")));
    }
    let n = m.nrows();
    let a = m * tau;
    let norm = one_norm(&a);
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }

    let (uv, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(degree, _)) => (pade_low(&a, degree), 0),
        None => {
            let s = (norm / THETA[4].1).log2().ceil().max(0.0);
            if s > 1023.0 {
                return Err(Error::Overflow { norm });
            }
            let scaled = &a / 2f64.powi(s as i32);
            (pade13(&scaled), s as u32)
        }
    };
    let (u, v) = uv;
    let p = &v + &u;
    let q = v - u;
    let mut x = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Domain("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        x = &x * &x;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { norm });
    }
    Ok(x)
}

fn pade_low(a: &DMatrix<f64>, degree: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let b: &[f64] = match degree {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    // powers[k] = A^(2k)
    let mut powers = vec![ident, a2.clone()];
    while powers.len() <= degree / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = DMatrix::<f64>::zeros(n, n);
    let mut even = DMatrix::<f64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            odd += p * b[2 * k + 1];
        }
        if 2 * k < b.len() {
            even += p * b[2 * k];
        }
    }
    (a * odd, even)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &B13;
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + ident * b[0];
    (u, v)
}
