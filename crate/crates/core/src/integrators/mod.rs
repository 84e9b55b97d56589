//! One-step maps of the splitting and successive-approximation schemes and
//! the fixed-step time loop.

mod config;
mod flow;
mod stepper;

use std::time::Instant;

pub use config::{CorrectionStart, Quadrature, Reconstruction, Scheme, SchemeConfig};
pub use stepper::Stepper;

use crate::error::{Error, Result};
use crate::operators::StateVector;
use crate::problems::Problem;

/// States recorded at every step of a fixed-step run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub label: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Wall-clock seconds spent in each step.
    pub step_seconds: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &StateVector {
        self.states.last().expect("a trajectory holds at least the initial state")
    }

    pub fn total_seconds(&self) -> f64 {
        self.step_seconds.iter().sum()
    }
}

/// Number of steps of length `dt` from `t0` to `t_end`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidConfig(format!("time step {dt} must be positive and finite")));
    }
    if t_end < t0 {
        return Err(Error::InvalidConfig(format!("final time {t_end} precedes start time {t0}")));
    }
    let steps = (t_end - t0) / dt;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "interval [{t0}, {t_end}] is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(rounded as usize)
}

fn run(
    problem: &Problem,
    u0: StateVector,
    t_end: f64,
    dt: f64,
    cfg: &SchemeConfig,
    observer: &mut dyn FnMut(usize, f64, &[f64]),
    keep: bool,
) -> Result<Trajectory> {
    let t0 = u0.time();
    let steps = step_count(t0, t_end, dt)?;
    let mut stepper = Stepper::new(problem, cfg)?;
    let grid = u0.grid().clone();
    if grid.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: grid.len(),
        });
    }
    observer(0, t0, u0.values());
    let mut traj = Trajectory {
        label: cfg.describe(),
        dt,
        times: vec![t0],
        states: Vec::with_capacity(if keep { steps + 1 } else { 1 }),
        step_seconds: Vec::with_capacity(steps),
    };
    let mut current = u0.into_values();
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let started = Instant::now();
        let next = stepper.step(t, dt, &current)?;
        traj.step_seconds.push(started.elapsed().as_secs_f64());
        let t_next = t0 + (n + 1) as f64 * dt;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                step: n + 1,
                time: t_next,
            });
        }
        observer(n + 1, t_next, &next);
        let previous = std::mem::replace(&mut current, next);
        if keep {
            traj.states.push(StateVector::new(previous, grid.clone(), t)?);
            traj.times.push(t_next);
        }
    }
    if !keep {
        traj.times = vec![t0 + steps as f64 * dt];
    }
    let t_last = *traj.times.last().expect("nonempty");
    traj.states.push(StateVector::new(current, grid, t_last)?);
    Ok(traj)
}

/// Integrates from `u0` (at time `u0.time()`) to `t_end` with fixed step
/// `dt`, recording every state. `observer` sees `(step, time, values)` for
/// the initial state and after every step.
pub fn integrate(
    problem: &Problem,
    u0: StateVector,
    t_end: f64,
    dt: f64,
    cfg: &SchemeConfig,
    observer: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<Trajectory> {
    run(problem, u0, t_end, dt, cfg, observer, true)
}

/// Like [`integrate`], keeping only the final state.
pub fn integrate_final(
    problem: &Problem,
    u0: StateVector,
    t_end: f64,
    dt: f64,
    cfg: &SchemeConfig,
) -> Result<StateVector> {
    integrate_observed(problem, u0, t_end, dt, cfg, &mut |_, _, _| {})
}

/// Like [`integrate_final`], reporting every state to `observer` as in
/// [`integrate`] without storing it.
pub fn integrate_observed(
    problem: &Problem,
    u0: StateVector,
    t_end: f64,
    dt: f64,
    cfg: &SchemeConfig,
    observer: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<StateVector> {
    let traj = run(problem, u0, t_end, dt, cfg, observer, false)?;
    Ok(traj.states.into_iter().next_back().expect("final state"))
}
