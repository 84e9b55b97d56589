//! Oracles shared by the integration tests: an adaptive Dormand-Prince
//! reference integrator at tight tolerances, finite-difference helpers and a
//! non-commuting test family with a full (non-diagonal) operator.
#![allow(dead_code)]

use std::sync::Arc;

use ode_solvers::{DVector, Dopri5, OutputType, System};
use semisplit::integrators::{CorrectionStart, Reconstruction};
use semisplit::operators::{FrozenOperator, Structure};
use semisplit::{Grid, LinearOperator, NonlinearFamily, Problem, Result, Scheme, SchemeConfig};

struct Rhs<F>(F);

impl<F: Fn(f64, &[f64]) -> Vec<f64>> System<f64, DVector<f64>> for Rhs<F> {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let v = (self.0)(t, y.as_slice());
        dy.as_mut_slice().copy_from_slice(&v);
    }
}

/// `u(t1)` of `u' = f(t, u)`, `u(t0) = u0`, by adaptive Dormand-Prince 5(4).
/// The eighth-order solver of the same crate reports spurious stiffness on
/// coupled systems at these tolerances.
pub fn ode_oracle(f: impl Fn(f64, &[f64]) -> Vec<f64>, u0: &[f64], t0: f64, t1: f64) -> Vec<f64> {
    if t1 == t0 {
        return u0.to_vec();
    }
    let mut solver = Dopri5::new(Rhs(f), t0, t1, t1 - t0, DVector::from_column_slice(u0), 1e-13, 1e-14);
    // Dense output interpolates the end point; the accepted-step record
    // ends exactly at `t1`.
    solver.set_output(OutputType::Sparse);
    solver.integrate().expect("oracle integration");
    solver.y_out().last().expect("final state").as_slice().to_vec()
}

/// Right-hand side `A u + b(t) + B(t, u) u` of a problem.
pub fn vector_field(problem: &Problem, t: f64, u: &[f64]) -> Vec<f64> {
    let mut out = problem.linear.apply(u).unwrap();
    if let Some(b) = &problem.boundary {
        for (o, s) in out.iter_mut().zip(b.source(u.len(), t).unwrap()) {
            *o += s;
        }
    }
    let bu = problem.nonlinear.operator(t, u).unwrap().apply(u).unwrap();
    out.iter_mut().zip(bu).for_each(|(o, x)| *o += x);
    out
}

/// Oracle solution of a problem from `u0` at `t0` to `t1`.
pub fn problem_oracle(problem: &Problem, u0: &[f64], t0: f64, t1: f64) -> Vec<f64> {
    ode_oracle(|t, u| vector_field(problem, t, u), u0, t0, t1)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    diff_norm(a, b) / norm(b)
}

pub fn order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

/// `B(u) = [[-u0, u1 t], [0.5 u1, -u0 u1]]`, a time-dependent full-matrix
/// family whose frozen operators do not commute with each other or with a
/// generic `A`.
#[derive(Debug, Clone, Copy)]
pub struct Coupled;

impl NonlinearFamily for Coupled {
    fn dim(&self) -> usize {
        2
    }

    fn structure(&self) -> Structure {
        Structure::General
    }

    fn operator(&self, t: f64, u: &[f64]) -> Result<FrozenOperator> {
        let m = LinearOperator::from_triplets(
            2,
            [(0, 0, -u[0]), (0, 1, u[1] * t), (1, 0, 0.5 * u[1]), (1, 1, -u[0] * u[1])],
        )?;
        Ok(FrozenOperator::Matrix(m))
    }

    fn derivative(&self, t: f64, u: &[f64], d: &[f64]) -> Result<FrozenOperator> {
        let m = LinearOperator::from_triplets(
            2,
            [
                (0, 0, -d[0]),
                (0, 1, d[1] * t),
                (1, 0, 0.5 * d[1]),
                (1, 1, -(d[0] * u[1] + u[0] * d[1])),
            ],
        )?;
        Ok(FrozenOperator::Matrix(m))
    }

    fn second_derivative(&self, _t: f64, _u: &[f64], d1: &[f64], d2: &[f64]) -> Result<FrozenOperator> {
        let m = LinearOperator::from_triplets(2, [(1, 1, -(d1[0] * d2[1] + d2[0] * d1[1]))])?;
        Ok(FrozenOperator::Matrix(m))
    }
}

/// Two-component problem with a non-normal `A` and the [`Coupled`] family.
pub fn coupled_problem() -> Problem {
    let a = LinearOperator::from_triplets(2, [(0, 0, -1.0), (0, 1, 0.5), (1, 0, 0.2), (1, 1, -2.0)]).unwrap();
    Problem::custom("coupled", Grid::scalar(2), a, Arc::new(Coupled), vec![0.8, 0.6]).unwrap()
}

/// Central differences of `h -> g(h)` at 0 for steps `h` and `h/2`; returns
/// the defects against `exact`.
pub fn central_defects(g: impl Fn(f64) -> Vec<f64>, exact: &[f64], h: f64) -> (f64, f64) {
    let fd = |h: f64| -> Vec<f64> {
        let (p, m) = (g(h), g(-h));
        p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    (diff_norm(&fd(h), exact), diff_norm(&fd(0.5 * h), exact))
}

/// Every scheme variant paired with its hand-expanded one-step value for the
/// scalar problem `u' = c u^2` split as `A = 0`, `B(u) = c u`, from `u` over
/// `dt`.
pub fn zero_linear_cases(c: f64, u: f64, dt: f64) -> Vec<(SchemeConfig, f64)> {
    let b = |u: f64| c * u;
    let omega1 = |u: f64, h: f64| (h * b(u)).exp() * u;
    let trap = |u: f64, h: f64| {
        let end = (h * b(u)).exp() * u;
        (0.5 * h * (b(u) + b(end))).exp() * u
    };
    let mid = |u: f64, h: f64| {
        let half = (0.5 * h * b(u)).exp() * u;
        (h * b(half)).exp() * u
    };
    let as_printed = |u: f64, h: f64| (h * b(0.5 * h * b(u))).exp() * u;
    let standard = |j: usize| {
        let mut it = u;
        for _ in 0..j {
            it = u + 0.5 * dt * (b(u) * u + b(it) * it);
        }
        it
    };
    let paper_sum = |j: usize| {
        let (mut it, mut sum) = (u, u);
        for _ in 0..j {
            let corr = 0.5 * dt * (b(u) * u + b(it) * it);
            it = u + corr;
            sum += corr;
        }
        sum
    };
    let c1 = dt * b(u) * u;
    let k2_end = b(u) * c1 + c * c1 * u;
    let k2_left_restart = b(u) * u + c * u * u;
    use semisplit::magnus::MagnusOrder::*;
    let mut v = vec![
        (SchemeConfig::new(Scheme::Ab), omega1(u, dt)),
        (SchemeConfig::new(Scheme::Ab).with_magnus(SecondTrapezoid, SecondTrapezoid), trap(u, dt)),
        (SchemeConfig::new(Scheme::Ab).with_magnus(SecondMidpoint, SecondTrapezoid), mid(u, dt)),
        (SchemeConfig::new(Scheme::Ab).with_magnus(MidpointAsPrinted, SecondTrapezoid), as_printed(u, dt)),
        (SchemeConfig::new(Scheme::Ba), trap(u, dt)),
        (SchemeConfig::new(Scheme::Ba).with_magnus(First, First), omega1(u, dt)),
        (SchemeConfig::new(Scheme::Ba).with_magnus(First, SecondMidpoint), mid(u, dt)),
        (SchemeConfig::new(Scheme::Strang), trap(trap(u, 0.5 * dt), 0.5 * dt)),
        (
            SchemeConfig::new(Scheme::Strang).with_magnus(First, SecondTrapezoid),
            trap(omega1(u, 0.5 * dt), 0.5 * dt),
        ),
    ];
    for j in 1..=3 {
        v.push((SchemeConfig::new(Scheme::SuccessiveStandard).with_iterations(j), standard(j)));
        v.push((
            SchemeConfig::new(Scheme::SuccessiveStandard)
                .with_iterations(j)
                .with_reconstruction(Reconstruction::PaperSum),
            paper_sum(j),
        ));
    }
    v.push((SchemeConfig::new(Scheme::SuccessiveMultiA).with_iterations(1), u + c1));
    v.push((SchemeConfig::new(Scheme::SuccessiveMultiA), u + c1 + 0.5 * dt * k2_end));
    v.push((
        SchemeConfig::new(Scheme::SuccessiveMultiA).with_correction_start(CorrectionStart::Restart),
        u + c1 + 0.5 * dt * (k2_end + k2_left_restart),
    ));
    v.push((SchemeConfig::new(Scheme::SuccessiveMultiB), omega1(u, dt)));
    v
}
