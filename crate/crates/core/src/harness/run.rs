use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ConfigFile, ExperimentConfig, ReferenceSpec, TimeMode};
use crate::error::{Error, Result};
use crate::integrators::{integrate_observed, step_count, SchemeConfig};
use crate::metrics::{convergence_rate, grid_norm, refined_reference_error, spatial_error, time_aggregate, NormKind, TimeAggregation};
use crate::operators::StateVector;
use crate::problems::Problem;

/// One line of the output table.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub scheme: String,
    pub magnus: String,
    pub quadrature: String,
    pub reconstruction: String,
    pub correction_ic: String,
    pub dt: f64,
    pub dx: Option<f64>,
    pub norm: String,
    pub relative: bool,
    /// `NaN` marks a failed cell.
    pub error: f64,
    pub rate: Option<f64>,
    pub seconds: f64,
}

/// A whitespace-separated data file behind a figure.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    /// File stem; unique within a result.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A cell that could not be integrated or evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub experiment: String,
    pub cell: String,
    pub message: String,
    pub numerical: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub plots: Vec<PlotData>,
    pub failures: Vec<CellFailure>,
}

impl ExperimentResult {
    pub fn extend(&mut self, other: ExperimentResult) {
        self.rows.extend(other.rows);
        self.plots.extend(other.plots);
        self.failures.extend(other.failures);
    }
}

/// Sweep coordinates of one integration run.
#[derive(Clone, Debug)]
struct Cell {
    index: usize,
    scheme_index: usize,
    scheme: SchemeConfig,
    dx: Option<f64>,
    dt: f64,
}

/// Key of a shared reference run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct RefKey {
    scheme_index: Option<usize>,
    dx_bits: Option<u64>,
    dt_bits: u64,
}

struct CellOutput {
    /// `errors[t_index][measure_index]`.
    errors: Vec<Vec<f64>>,
    seconds: f64,
    plots: Vec<PlotData>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

/// Runs every experiment of a configuration document.
pub fn run_config(cfg: &ConfigFile, workers: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut out = ExperimentResult::default();
    for e in &cfg.experiments {
        out.extend(run_experiment(e, workers)?);
    }
    Ok(out)
}

/// Runs one sweep on a pool of `workers` threads.
///
/// Rows come out in configuration order (scheme, then grid spacing, then
/// step size, then final time, then measure) regardless of scheduling.
/// Numerical failures of individual cells are recorded, not raised.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let schemes = cfg.effective_schemes();
    let spacings = cfg.grid_spacings();
    let mut cells = Vec::new();
    for (si, scheme) in schemes.iter().enumerate() {
        for &dx in &spacings {
            for &dt in &cfg.dts {
                cells.push(Cell {
                    index: cells.len(),
                    scheme_index: si,
                    scheme: scheme.clone(),
                    dx,
                    dt,
                });
            }
        }
    }
    let pool = pool(workers)?;

    // Shared references first, one run per distinct key.
    let mut ref_jobs: Vec<(RefKey, Cell)> = Vec::new();
    for c in &cells {
        let key = reference_key(cfg, c);
        if let Some(k) = key {
            if !ref_jobs.iter().any(|(j, _)| *j == k) {
                ref_jobs.push((k, c.clone()));
            }
        }
    }
    let references: HashMap<RefKey, std::result::Result<Vec<StateVector>, String>> = pool.install(|| {
        ref_jobs
            .par_iter()
            .map(|(k, c)| (k.clone(), reference_run(cfg, c).map_err(|e| e.to_string())))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    });

    let outputs: Vec<Result<CellOutput>> =
        pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c, &references)).collect());

    let mut result = ExperimentResult::default();
    let mut errors_by_cell = Vec::with_capacity(cells.len());
    for (cell, out) in cells.iter().zip(outputs) {
        match out {
            Ok(o) => {
                errors_by_cell.push(Some((o.errors, o.seconds)));
                result.plots.extend(o.plots);
            }
            Err(e) => {
                result.failures.push(CellFailure {
                    experiment: cfg.name.clone(),
                    cell: describe_cell(cell),
                    numerical: e.is_numerical(),
                    message: e.to_string(),
                });
                errors_by_cell.push(None);
            }
        }
    }

    let lookup = |si: usize, dx: Option<f64>, dt: f64| {
        cells
            .iter()
            .position(|c| c.scheme_index == si && c.dx == dx && (c.dt - dt).abs() <= 1e-12 * dt)
    };
    for cell in &cells {
        let data = &errors_by_cell[cell.index];
        let finer = if cfg.rates { lookup(cell.scheme_index, cell.dx, 0.5 * cell.dt) } else { None };
        for (ti, &t_end) in cfg.final_times.iter().enumerate() {
            for (mi, m) in cfg.measures.iter().enumerate() {
                let (error, seconds) = match data {
                    Some((errs, secs)) => (errs[ti][mi], if cfg.timing { *secs } else { 0.0 }),
                    None => (f64::NAN, 0.0),
                };
                let rate = finer
                    .and_then(|f| errors_by_cell[f].as_ref())
                    .and_then(|(errs, _)| convergence_rate(error, errs[ti][mi]).ok());
                result.rows.push(ResultRow {
                    problem: cfg.problem.label(t_end),
                    scheme: cell.scheme.scheme.label().to_string(),
                    magnus: cell.scheme.magnus_label(),
                    quadrature: cell.scheme.quadrature_label().to_string(),
                    reconstruction: cell.scheme.reconstruction_label(),
                    correction_ic: cell.scheme.correction_label().to_string(),
                    dt: cell.dt,
                    dx: cell.dx,
                    norm: m.label(),
                    relative: m.relative,
                    error,
                    rate,
                    seconds,
                });
            }
        }
    }
    result.plots.extend(convergence_curves(cfg, &cells, &errors_by_cell));
    Ok(result)
}

fn describe_cell(c: &Cell) -> String {
    match c.dx {
        Some(dx) => format!("{} dt={} dx={dx}", c.scheme.describe(), c.dt),
        None => format!("{} dt={}", c.scheme.describe(), c.dt),
    }
}

fn reference_key(cfg: &ExperimentConfig, c: &Cell) -> Option<RefKey> {
    match cfg.reference {
        ReferenceSpec::Analytic => None,
        ReferenceSpec::Oracle { .. } => Some(RefKey {
            scheme_index: None,
            dx_bits: c.dx.map(f64::to_bits),
            dt_bits: c.dt.to_bits(),
        }),
        ReferenceSpec::Refined { .. } => Some(RefKey {
            scheme_index: Some(c.scheme_index),
            dx_bits: None,
            dt_bits: c.dt.to_bits(),
        }),
    }
}

/// States of `problem` at every final time, from one run to the largest.
fn states_at(
    problem: &Problem,
    scheme: &SchemeConfig,
    dt: f64,
    final_times: &[f64],
    observer: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<Vec<StateVector>> {
    let t_max = final_times.iter().copied().fold(0.0, f64::max);
    let wanted: Vec<usize> = final_times
        .iter()
        .map(|&t| step_count(0.0, t, dt))
        .collect::<Result<_>>()?;
    let mut captured: Vec<Option<Vec<f64>>> = vec![None; wanted.len()];
    let mut obs = |n: usize, t: f64, v: &[f64]| {
        for (slot, &w) in captured.iter_mut().zip(&wanted) {
            if w == n {
                *slot = Some(v.to_vec());
            }
        }
        observer(n, t, v);
    };
    integrate_observed(problem, problem.initial_state(), t_max, dt, scheme, &mut obs)?;
    captured
        .into_iter()
        .zip(final_times)
        .map(|(v, &t)| StateVector::new(v.expect("every final time is a step"), problem.grid.clone(), t))
        .collect()
}

fn reference_run(cfg: &ExperimentConfig, c: &Cell) -> Result<Vec<StateVector>> {
    match &cfg.reference {
        ReferenceSpec::Analytic => unreachable!("analytic references are evaluated pointwise"),
        ReferenceSpec::Oracle { refine } => {
            let problem = build(cfg, c.dx)?;
            let mut oracle = SchemeConfig::default();
            if let Some(tol) = cfg.tolerance {
                oracle.backend.tolerance = tol;
            }
            states_at(&problem, &oracle, c.dt / *refine as f64, &cfg.final_times, &mut |_, _, _| {})
        }
        ReferenceSpec::Refined { dx } => {
            let problem = build(cfg, Some(*dx))?;
            states_at(&problem, &c.scheme, c.dt, &cfg.final_times, &mut |_, _, _| {})
        }
    }
}

fn build(cfg: &ExperimentConfig, dx: Option<f64>) -> Result<Problem> {
    match dx {
        Some(dx) => cfg.problem.with_dx(dx).build(),
        None => cfg.problem.build(),
    }
}

fn aggregation(mode: TimeMode) -> Option<TimeAggregation> {
    match mode {
        TimeMode::Final => None,
        TimeMode::Max => Some(TimeAggregation::Max),
        TimeMode::L2Unweighted => Some(TimeAggregation::L2Unweighted),
        TimeMode::L2Weighted => Some(TimeAggregation::L2Weighted),
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    references: &HashMap<RefKey, std::result::Result<Vec<StateVector>, String>>,
) -> Result<CellOutput> {
    let problem = build(cfg, cell.dx)?;
    let grid = problem.grid.clone();
    let weight = grid.cell_volume();

    // In-time samples: per (norm, relative) pair, the error after each step.
    let in_time: Vec<(NormKind, bool)> = {
        let mut v: Vec<(NormKind, bool)> = cfg
            .measures
            .iter()
            .filter(|m| m.time != TimeMode::Final)
            .map(|m| (m.norm, m.relative))
            .collect();
        v.dedup();
        v
    };
    let need_reference_each_step = !in_time.is_empty() || (cfg.series && problem.reference.is_some());
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); in_time.len()];
    let mut series_rows: Vec<Vec<f64>> = Vec::new();
    let mut observer_error: Option<Error> = None;

    let started = Instant::now();
    let states = {
        let mut observer = |n: usize, t: f64, v: &[f64]| {
            if observer_error.is_some() {
                return;
            }
            let reference = if need_reference_each_step {
                match problem.reference_state(t) {
                    Ok(r) => r,
                    Err(e) => {
                        observer_error = Some(e);
                        return;
                    }
                }
            } else {
                None
            };
            if n > 0 {
                for ((kind, relative), s) in in_time.iter().zip(samples.iter_mut()) {
                    let r = reference.as_ref().expect("validated: analytic reference");
                    let num = StateVector::new(v.to_vec(), grid.clone(), t);
                    match num.and_then(|num| spatial_error(&num, r, *kind, *relative)) {
                        Ok(e) => s.push((t, e)),
                        Err(e) => observer_error = Some(e),
                    }
                }
            }
            if cfg.series {
                let mut row = vec![t];
                row.extend(NormKind::ALL.iter().map(|&k| grid_norm(v, weight, k)));
                if let Some(r) = &reference {
                    let diff: Vec<f64> = v.iter().zip(r.values()).map(|(a, b)| a - b).collect();
                    row.extend(NormKind::ALL.iter().map(|&k| grid_norm(&diff, weight, k)));
                }
                series_rows.push(row);
            }
        };
        states_at(&problem, &cell.scheme, cell.dt, &cfg.final_times, &mut observer)?
    };
    let seconds = started.elapsed().as_secs_f64();
    if let Some(e) = observer_error {
        return Err(e);
    }

    let reference_states: Vec<Option<StateVector>> = match &cfg.reference {
        ReferenceSpec::Analytic => cfg
            .final_times
            .iter()
            .map(|&t| problem.reference_state(t))
            .collect::<Result<_>>()?,
        _ => {
            let key = reference_key(cfg, cell).expect("numerical reference");
            match references.get(&key).expect("reference job scheduled") {
                Ok(states) => states.iter().cloned().map(Some).collect(),
                Err(message) => {
                    return Err(Error::Domain(format!("reference run failed: {message}")));
                }
            }
        }
    };

    let mut errors = Vec::with_capacity(cfg.final_times.len());
    for (ti, (&t_end, state)) in cfg.final_times.iter().zip(&states).enumerate() {
        let reference = reference_states[ti]
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig(format!("problem `{}` has no analytic reference", problem.name)))?;
        let mut row = Vec::with_capacity(cfg.measures.len());
        for m in &cfg.measures {
            let e = match aggregation(m.time) {
                None => match cfg.reference {
                    ReferenceSpec::Refined { .. } => refined_reference_error(state, reference, m.norm, m.relative)?,
                    _ => spatial_error(state, reference, m.norm, m.relative)?,
                },
                Some(mode) => {
                    let k = in_time
                        .iter()
                        .position(|p| *p == (m.norm, m.relative))
                        .expect("collected above");
                    let upto: Vec<f64> = samples[k]
                        .iter()
                        .filter(|(t, _)| *t <= t_end + 1e-9 * cell.dt)
                        .map(|(_, e)| *e)
                        .collect();
                    if upto.is_empty() {
                        0.0
                    } else {
                        time_aggregate(&upto, mode, cell.dt)?
                    }
                }
            };
            row.push(e);
        }
        errors.push(row);
    }

    let mut plots = Vec::new();
    let stem = format!("{}_c{:04}_{}", cfg.name, cell.index, slug(&describe_cell(cell)));
    if cfg.snapshots && grid.dimension() > 0 {
        for (state, reference) in states.iter().zip(&reference_states) {
            let mut columns: Vec<String> = ["x", "y", "z"][..grid.dimension()].iter().map(|s| s.to_string()).collect();
            columns.push("u".into());
            let reference = reference.as_ref().filter(|r| r.grid() == state.grid());
            if reference.is_some() {
                columns.push("reference".into());
            }
            let rows = (0..grid.len())
                .map(|i| {
                    let mut r = grid.point(i);
                    r.push(state.values()[i]);
                    if let Some(re) = reference {
                        r.push(re.values()[i]);
                    }
                    r
                })
                .collect();
            plots.push(PlotData {
                name: format!("field_{stem}_T{}", slug(&state.time().to_string())),
                columns,
                rows,
            });
        }
    }
    if cfg.series {
        let mut columns = vec!["t".to_string(), "l1".into(), "l2".into(), "linf".into()];
        if series_rows.first().is_some_and(|r| r.len() > 4) {
            columns.extend(["err_l1".to_string(), "err_l2".into(), "err_linf".into()]);
        }
        plots.push(PlotData {
            name: format!("series_{stem}"),
            columns,
            rows: series_rows,
        });
    }
    Ok(CellOutput { errors, seconds, plots })
}

fn convergence_curves(
    cfg: &ExperimentConfig,
    cells: &[Cell],
    errors: &[Option<(Vec<Vec<f64>>, f64)>],
) -> Vec<PlotData> {
    let mut out = Vec::new();
    let schemes = cfg.effective_schemes();
    for (si, scheme) in schemes.iter().enumerate() {
        for (ti, &t_end) in cfg.final_times.iter().enumerate() {
            for (mi, m) in cfg.measures.iter().enumerate() {
                let name = |axis: &str, fixed: &str| {
                    format!(
                        "conv-{axis}_{}_s{si:02}_{}_T{}_{}{}{}",
                        cfg.name,
                        slug(&scheme.describe()),
                        slug(&t_end.to_string()),
                        slug(&m.label()),
                        if m.relative { "_rel" } else { "" },
                        fixed
                    )
                };
                let pick = |pred: &dyn Fn(&Cell) -> bool, x: &dyn Fn(&Cell) -> f64| -> Vec<Vec<f64>> {
                    cells
                        .iter()
                        .filter(|c| c.scheme_index == si && pred(c))
                        .filter_map(|c| errors[c.index].as_ref().map(|(e, _)| vec![x(c), e[ti][mi]]))
                        .collect()
                };
                if cfg.dts.len() > 1 {
                    for dx in cfg.grid_spacings() {
                        let fixed = dx.map(|d| format!("_dx{}", slug(&d.to_string()))).unwrap_or_default();
                        out.push(PlotData {
                            name: name("dt", &fixed),
                            columns: vec!["dt".into(), "error".into()],
                            rows: pick(&|c: &Cell| c.dx == dx, &|c: &Cell| c.dt),
                        });
                    }
                }
                if cfg.grid_spacings().len() > 1 {
                    for &dt in &cfg.dts {
                        out.push(PlotData {
                            name: name("dx", &format!("_dt{}", slug(&dt.to_string()))),
                            columns: vec!["dx".into(), "error".into()],
                            rows: pick(&|c: &Cell| c.dt == dt, &|c: &Cell| c.dx.unwrap_or(f64::NAN)),
                        });
                    }
                }
            }
        }
    }
    out
}

/// File-name-safe rendering: ASCII alphanumerics and `.` kept, `-` and `_`
/// kept, everything else mapped to `-`.
pub(crate) fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '-' })
        .collect()
}
