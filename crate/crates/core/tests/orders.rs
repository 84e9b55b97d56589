mod common;

use std::sync::Arc;

use common::{coupled_problem, diff_norm, order, problem_oracle, zero_linear_cases, Coupled};
use semisplit::integrators::Stepper;
use semisplit::magnus::{subflow_step, MagnusOrder};
use semisplit::operators::{ConstantFamily, PowerFamily};
use semisplit::problems::Problem;
use semisplit::{integrate_final, ExpBackend, Grid, LinearOperator, NonlinearFamily, Scheme, SchemeConfig};

const DTS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];

fn global_errors(problem: &Problem, cfg: &SchemeConfig, t_end: f64) -> Vec<f64> {
    let exact = problem_oracle(problem, &problem.initial, 0.0, t_end);
    DTS.iter()
        .map(|&dt| {
            let end = integrate_final(problem, problem.initial_state(), t_end, dt, cfg).unwrap();
            diff_norm(end.values(), &exact)
        })
        .collect()
}

fn assert_orders(label: &str, errors: &[f64], expected: f64, slack: f64) {
    for w in errors.windows(2) {
        let p = order(w[0], w[1]);
        assert!((p - expected).abs() <= slack, "{label}: order {p:.3} from {errors:?}");
    }
}

#[test]
fn splitting_global_orders_on_bernoulli() {
    let p = Problem::bernoulli(-1.0, -2.0, 2).unwrap();
    assert_orders("ab", &global_errors(&p, &SchemeConfig::new(Scheme::Ab), 1.0), 1.0, 0.3);
    assert_orders("ba", &global_errors(&p, &SchemeConfig::new(Scheme::Ba), 1.0), 1.0, 0.3);
    assert_orders("strang", &global_errors(&p, &SchemeConfig::new(Scheme::Strang), 1.0), 2.0, 0.3);
}

#[test]
fn splitting_global_orders_with_non_commuting_matrix_family() {
    let p = coupled_problem();
    assert_orders("ab", &global_errors(&p, &SchemeConfig::new(Scheme::Ab), 1.0), 1.0, 0.3);
    assert_orders("ba", &global_errors(&p, &SchemeConfig::new(Scheme::Ba), 1.0), 1.0, 0.3);
    assert_orders("strang", &global_errors(&p, &SchemeConfig::new(Scheme::Strang), 1.0), 2.0, 0.3);
}

#[test]
fn successive_schemes_converge_at_least_linearly() {
    let p = Problem::bernoulli(-1.0, -2.0, 2).unwrap();
    for cfg in [
        SchemeConfig::new(Scheme::SuccessiveStandard).with_iterations(3),
        SchemeConfig::new(Scheme::SuccessiveMultiA),
        SchemeConfig::new(Scheme::SuccessiveMultiB),
    ] {
        let e = global_errors(&p, &cfg, 1.0);
        for w in e.windows(2) {
            assert!(order(w[0], w[1]) > 0.8, "{}: {e:?}", cfg.describe());
        }
    }
}

fn local_errors(order_kind: MagnusOrder, family: &dyn NonlinearFamily, problem: &Problem, u: &[f64]) -> Vec<f64> {
    let backend = ExpBackend::default();
    [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let num = subflow_step(order_kind, family, 0.3, dt, u, &backend).unwrap();
            diff_norm(&num, &problem_oracle(problem, u, 0.3, 0.3 + dt))
        })
        .collect()
}

#[test]
fn magnus_local_orders_on_a_scalar_power_law() {
    let family = PowerFamily::new(1, -1.0, 2).unwrap();
    let p = Problem::custom("b-only", Grid::scalar(1), LinearOperator::zeros(1), Arc::new(family.clone()), vec![1.0])
        .unwrap();
    assert_orders("omega1", &local_errors(MagnusOrder::First, &family, &p, &[1.0]), 2.0, 0.3);
    for o in [MagnusOrder::SecondTrapezoid, MagnusOrder::SecondMidpoint] {
        assert_orders(o.label(), &local_errors(o, &family, &p, &[1.0]), 3.0, 0.3);
    }
}

#[test]
fn magnus_local_orders_on_a_time_dependent_matrix_family() {
    let p = Problem::custom("b-only", Grid::scalar(2), LinearOperator::zeros(2), Arc::new(Coupled), vec![0.8, 0.6])
        .unwrap();
    let u = [0.8, 0.6];
    assert_orders("omega1", &local_errors(MagnusOrder::First, &Coupled, &p, &u), 2.0, 0.3);
    for o in [MagnusOrder::SecondTrapezoid, MagnusOrder::SecondMidpoint] {
        assert_orders(o.label(), &local_errors(o, &Coupled, &p, &u), 3.0, 0.3);
    }
}

#[test]
fn zero_linear_part_reduces_to_the_b_subflow() {
    let c = -1.3;
    let family = PowerFamily::new(1, c, 2).unwrap();
    let p = Problem::custom("a0", Grid::scalar(1), LinearOperator::zeros(1), Arc::new(family), vec![1.0]).unwrap();
    let (t, dt) = (0.2, 0.05);
    for u in [1.0, 0.37, -0.8] {
        for (cfg, expected) in zero_linear_cases(c, u, dt) {
            let got = Stepper::new(&p, &cfg).unwrap().step(t, dt, &[u]).unwrap()[0];
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "{} at u = {u}: {got} vs {expected}",
                cfg.describe()
            );
        }
    }
}

#[test]
fn hand_evaluated_single_steps() {
    let minus_u = PowerFamily::new(1, -1.0, 2).unwrap();
    let p = Problem::custom("a0", Grid::scalar(1), LinearOperator::zeros(1), Arc::new(minus_u), vec![1.0]).unwrap();
    let step = |cfg: SchemeConfig| Stepper::new(&p, &cfg).unwrap().step(0.0, 0.01, &[1.0]).unwrap()[0];
    assert!((step(SchemeConfig::new(Scheme::Ab)) - (-0.01f64).exp()).abs() < 1e-15);
    assert!((step(SchemeConfig::new(Scheme::SuccessiveStandard).with_iterations(1)) - 0.99).abs() < 1e-15);
    assert!((step(SchemeConfig::new(Scheme::SuccessiveMultiA)) - 0.9901).abs() < 1e-14);

    let bern = Problem::bernoulli(-1.0, -1.0, 2).unwrap();
    let got = Stepper::new(&bern, &SchemeConfig::new(Scheme::SuccessiveMultiB))
        .unwrap()
        .step(0.0, 0.01, &[1.0])
        .unwrap()[0];
    let u0 = (-0.01f64).exp();
    let expected = u0 + 0.005 * (-u0 - (-0.02f64).exp());
    assert!((got - expected).abs() < 1e-15);
    assert!((got - 0.980199).abs() < 1e-6);
}

#[test]
fn constant_commuting_diagonals_are_split_exactly() {
    let a = [-0.5, 0.3, -2.0];
    let bdiag = vec![0.7, -1.1, 0.25];
    let family = ConstantFamily::new(semisplit::FrozenOperator::Diagonal(bdiag.clone()));
    let u = vec![1.0, -2.0, 0.5];
    let p = Problem::custom("commuting", Grid::scalar(3), LinearOperator::diagonal(&a), Arc::new(family), u.clone())
        .unwrap();
    let dt = 0.1;
    let exact: Vec<f64> = (0..3).map(|i| ((a[i] + bdiag[i]) * dt).exp() * u[i]).collect();
    for s in [Scheme::Ab, Scheme::Ba, Scheme::Strang] {
        let got = Stepper::new(&p, &SchemeConfig::new(s)).unwrap().step(0.0, dt, &u).unwrap();
        assert!(diff_norm(&got, &exact) < 1e-13, "{s:?}");
    }
}
