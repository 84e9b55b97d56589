//! Property suites small enough to run on every install.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builtin::{bernoulli_sweep, default_schemes};
use super::output::emit_csv;
use super::run::run_experiment;
use crate::error::Result;
use crate::expaction::{exp_action_iterative, exp_dense, vec_norm, ExpBackend};
use crate::integrators::{integrate_final, Scheme, SchemeConfig, Stepper};
use crate::metrics::convergence_rate;
use crate::operators::{ConstantFamily, Grid, LinearOperator, LogisticFamily, NonlinearFamily, PowerFamily};
use crate::problems::{bernoulli_exact, diffusion_reaction_operator, Problem};

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SelfTestReport {
    pub checks: Vec<SelfCheck>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Suite = fn(u64) -> Result<(bool, String)>;

/// Runs every suite with the given seed for its random inputs.
pub fn selftest(seed: u64) -> SelfTestReport {
    let suites: [(&'static str, Suite); 6] = [
        ("rate-arithmetic", rate_arithmetic),
        ("exp-action-vs-dense", exp_action_vs_dense),
        ("family-derivatives", family_derivatives),
        ("linear-reduction", linear_reduction),
        ("splitting-orders", splitting_orders),
        ("sweep-determinism", sweep_determinism),
    ];
    let checks = suites
        .iter()
        .map(|(name, suite)| {
            let started = Instant::now();
            let (passed, detail) = match suite(seed) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            SelfCheck {
                name,
                passed,
                detail,
                seconds: started.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SelfTestReport { checks }
}

fn rate_arithmetic(_: u64) -> Result<(bool, String)> {
    let column = [0.260, 0.160, 0.106, 0.073];
    let want = [0.700, 0.594, 0.538];
    let mut worst: f64 = 0.0;
    for (w, expect) in column.windows(2).zip(want) {
        worst = worst.max((convergence_rate(w[0], w[1])? - expect).abs());
    }
    Ok((worst <= 0.002, format!("max deviation {worst:.2e}")))
}

/// Random sparse matrix with `||tau M||_1 <= bound`.
pub(crate) fn random_sparse(rng: &mut ChaCha8Rng, n: usize, symmetric: bool, tau: f64, bound: f64) -> LinearOperator {
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, rng.random_range(-1.0..1.0)));
        for _ in 0..3 {
            let j = rng.random_range(0..n);
            let v = rng.random_range(-1.0..1.0);
            triplets.push((i, j, v));
            if symmetric {
                triplets.push((j, i, v));
            }
        }
    }
    let m = LinearOperator::from_triplets(n, triplets).expect("indices in range");
    let scale = bound / (tau * m.one_norm()).max(f64::MIN_POSITIVE);
    m.scaled(scale.min(1.0)).with_symmetry(symmetric)
}

fn exp_action_vs_dense(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let backend = ExpBackend::iterative();
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = rng.random_range(5..=120);
        let tau = rng.random_range(0.1..2.0);
        let bound = rng.random_range(1.0..20.0);
        let m = random_sparse(&mut rng, n, k % 2 == 0, tau, bound);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dense = exp_dense(&m.to_dense(), tau)? * nalgebra::DVector::from_column_slice(&v);
        let got = exp_action_iterative(&m, tau, &v, &backend)?;
        let diff: Vec<f64> = got.iter().zip(dense.iter()).map(|(a, b)| a - b).collect();
        worst = worst.max(vec_norm(&diff) / vec_norm(dense.as_slice()));
    }
    Ok((worst <= 1e-9, format!("max relative difference {worst:.2e} over 20 matrices")))
}

/// Observed order of the central-difference defect of `B'` and `B''`, or
/// `None` when the defect is at rounding level (exact differences).
pub(crate) fn derivative_fd_orders(family: &dyn NonlinearFamily, u: &[f64], d: &[f64], v: &[f64]) -> Result<Vec<Option<f64>>> {
    let shifted = |h: f64| -> Vec<f64> { u.iter().zip(d).map(|(a, b)| a + h * b).collect() };
    let apply = |x: &[f64]| family.operator(0.0, x)?.apply(v);
    let first = family.derivative(0.0, u, d)?.apply(v)?;
    let second = family.second_derivative(0.0, u, d, d)?.apply(v)?;
    let scale = vec_norm(&first).max(vec_norm(&second)).max(1.0);
    let mut defects = [Vec::new(), Vec::new()];
    for h in [1e-2, 5e-3] {
        let plus = apply(&shifted(h))?;
        let minus = apply(&shifted(-h))?;
        let mid = apply(u)?;
        let fd1: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        let fd2: Vec<f64> = plus
            .iter()
            .zip(&minus)
            .zip(&mid)
            .map(|((p, m), c)| (p - 2.0 * c + m) / (h * h))
            .collect();
        for (slot, (fd, exact)) in defects.iter_mut().zip([(fd1, &first), (fd2, &second)]) {
            let diff: Vec<f64> = fd.iter().zip(exact.iter()).map(|(a, b)| a - b).collect();
            slot.push(vec_norm(&diff));
        }
    }
    Ok(defects
        .iter()
        .map(|e| {
            if e[0] <= 1e-9 * scale {
                None
            } else {
                Some((e[0] / e[1]).ln() / 2f64.ln())
            }
        })
        .collect())
}

fn family_derivatives(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = 8;
    let families: Vec<(&str, Box<dyn NonlinearFamily>)> = vec![
        ("logistic", Box::new(LogisticFamily::new(n, 1.0, 0.5)?)),
        ("power-m2", Box::new(PowerFamily::new(n, -10.0, 2)?)),
        ("power-m3", Box::new(PowerFamily::new(n, -2.0, 3)?)),
        ("power-m5", Box::new(PowerFamily::new(n, 0.5, 5)?)),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, f) in &families {
        let mut draw = || (0..n).map(|_| rng.random_range(0.2..1.5)).collect::<Vec<f64>>();
        let (u, d, v) = (draw(), draw(), draw());
        let orders = derivative_fd_orders(f.as_ref(), &u, &d, &v)?;
        for o in orders.iter().flatten() {
            ok &= *o >= 1.9;
        }
        let show = |o: &Option<f64>| o.map_or("exact".to_string(), |x| format!("{x:.2}"));
        detail.push(format!("{name} {}/{}", show(&orders[0]), show(&orders[1])));
    }
    Ok((ok, detail.join(", ")))
}

fn linear_reduction(_: u64) -> Result<(bool, String)> {
    let grid = Grid::uniform(1, 0.0, 10.0, 0.05)?;
    let a = diffusion_reaction_operator(&grid, &[0.01], 1.0)?;
    let n = grid.len();
    let u0 = grid.sample(|x| (-x[0] * x[0]).exp());
    let problem = Problem::custom("linear", grid, a.clone(), Arc::new(ConstantFamily::zero(n)), u0.clone())?;
    let dt = 0.01;
    let exact = exp_dense(&a.to_dense(), dt)? * nalgebra::DVector::from_column_slice(&u0);
    // Multiscale-B treats A as the perturbation; without B its step is the
    // trapezoidal Euler map (I + dt A) u.
    let euler = a.apply(&u0)?.iter().zip(&u0).map(|(au, u)| u + dt * au).collect::<Vec<f64>>();
    let mut worst: f64 = 0.0;
    for scheme in Scheme::ALL {
        let got = Stepper::new(&problem, &SchemeConfig::new(scheme))?.step(0.0, dt, &u0)?;
        let want = if scheme == Scheme::SuccessiveMultiB { &euler[..] } else { exact.as_slice() };
        let diff: Vec<f64> = got.iter().zip(want).map(|(x, y)| x - y).collect();
        worst = worst.max(vec_norm(&diff) / vec_norm(want));
    }
    Ok((worst <= 1e-9, format!("n = {n}, max relative defect {worst:.2e}")))
}

fn splitting_orders(_: u64) -> Result<(bool, String)> {
    let problem = Problem::bernoulli(-1.0, -2.0, 2)?;
    let exact = bernoulli_exact(1.0, -1.0, -2.0, 2)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (scheme, floor) in [(Scheme::Ab, 0.9), (Scheme::Ba, 0.9), (Scheme::Strang, 1.9)] {
        let cfg = SchemeConfig::new(scheme);
        let err = |dt: f64| -> Result<f64> { Ok((integrate_final(&problem, problem.initial_state(), 1.0, dt, &cfg)?.values()[0] - exact).abs()) };
        let rate = convergence_rate(err(0.02)?, err(0.01)?)?;
        ok &= rate >= floor - 0.3;
        detail.push(format!("{} {rate:.2}", scheme.label()));
    }
    Ok((ok, detail.join(", ")))
}

fn sweep_determinism(_: u64) -> Result<(bool, String)> {
    let mut e = bernoulli_sweep(-2.0);
    e.schemes = default_schemes();
    e.dts = vec![0.1, 0.05];
    e.timing = false;
    let one = emit_csv(&run_experiment(&e, 1)?.rows)?;
    let again = emit_csv(&run_experiment(&e, 1)?.rows)?;
    let many = emit_csv(&run_experiment(&e, 4)?.rows)?;
    let ok = one == again && one == many;
    Ok((ok, format!("{} rows, identical across runs and worker counts: {ok}", one.lines().count() - 1)))
}
