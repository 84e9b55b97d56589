//! Built-in experiment configurations behind the `tables` and `figures`
//! subcommands.
//!
//! The Bernoulli tables fix `lambda1 = -1`, `m = 2`, `T = 1` and measure the
//! unweighted in-time l2 and max-in-time errors. These settings are an
//! inference from the magnitudes of the published errors. `lambda2` runs over
//! [`TABLE_LAMBDA2`], with `-10` as the main table.

use super::config::{ConfigFile, ExperimentConfig, Measure, ProblemSpec, ReferenceSpec, TimeMode};
use crate::integrators::{CorrectionStart, Reconstruction, Scheme, SchemeConfig};
use crate::magnus::MagnusOrder;
use crate::metrics::NormKind;

pub const TABLE_LAMBDA2: [f64; 3] = [-1.0, -2.0, -10.0];
pub const TABLE_DTS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
pub const FISHER_CAPACITIES: [f64; 3] = [1.0, 0.5, 0.25];

fn bernoulli(lambda2: f64) -> ProblemSpec {
    ProblemSpec::Bernoulli {
        lambda1: -1.0,
        lambda2,
        m: 2,
    }
}

fn lambda_tag(lambda2: f64) -> String {
    format!("l{}", lambda2.abs())
}

/// AB, Strang, standard successive and multiscale-A with their defaults.
pub fn default_schemes() -> Vec<SchemeConfig> {
    vec![
        SchemeConfig::new(Scheme::Ab),
        SchemeConfig::new(Scheme::Strang),
        SchemeConfig::new(Scheme::SuccessiveStandard),
        SchemeConfig::new(Scheme::SuccessiveMultiA),
    ]
}

/// Every Magnus, iteration-depth, reconstruction and correction-start
/// variant worth tabulating.
pub fn variant_schemes() -> Vec<SchemeConfig> {
    use MagnusOrder::*;
    let mut v = Vec::new();
    for ab in [First, SecondTrapezoid, SecondMidpoint, MidpointAsPrinted] {
        v.push(SchemeConfig::new(Scheme::Ab).with_magnus(ab, SecondTrapezoid));
    }
    for ba in [SecondTrapezoid, SecondMidpoint, First, MidpointAsPrinted] {
        v.push(SchemeConfig::new(Scheme::Ba).with_magnus(First, ba));
    }
    v.push(SchemeConfig::new(Scheme::Strang));
    v.push(SchemeConfig::new(Scheme::Strang).with_magnus(First, SecondTrapezoid));
    for j in 1..=3 {
        for r in [Reconstruction::FinalIterate, Reconstruction::PaperSum] {
            v.push(SchemeConfig::new(Scheme::SuccessiveStandard).with_iterations(j).with_reconstruction(r));
        }
    }
    v.push(SchemeConfig::new(Scheme::SuccessiveMultiA).with_iterations(1));
    v.push(SchemeConfig::new(Scheme::SuccessiveMultiA));
    v.push(SchemeConfig::new(Scheme::SuccessiveMultiA).with_correction_start(CorrectionStart::Restart));
    v.push(SchemeConfig::new(Scheme::SuccessiveMultiB));
    v
}

fn ode_measures() -> Vec<Measure> {
    vec![
        Measure::new(NormKind::L2, TimeMode::L2Unweighted, false),
        Measure::new(NormKind::Linf, TimeMode::Max, false),
    ]
}

/// Bernoulli sweep over the step ladder with the full variant list.
pub fn bernoulli_sweep(lambda2: f64) -> ExperimentConfig {
    let mut e = ExperimentConfig::new(format!("bernoulli-{}", lambda_tag(lambda2)), bernoulli(lambda2));
    e.schemes = variant_schemes();
    e.dts = TABLE_DTS.to_vec();
    e.measures = ode_measures();
    e
}

/// `(file stem, document)` pairs for `table1`, `table2` and `table3`.
pub fn table_configs() -> Vec<(String, ConfigFile)> {
    let table1 = TABLE_LAMBDA2
        .iter()
        .map(|&l2| {
            let mut e = ExperimentConfig::new(format!("table1-{}", lambda_tag(l2)), bernoulli(l2));
            e.schemes = default_schemes();
            e.dts = vec![0.01];
            e.measures = ode_measures();
            e.rates = false;
            e
        })
        .collect();
    let mut table2 = bernoulli_sweep(-10.0);
    table2.name = "table2".into();
    let table3 = TABLE_LAMBDA2
        .iter()
        .map(|&l2| {
            let mut e = bernoulli_sweep(l2);
            e.name = format!("table3-{}", lambda_tag(l2));
            e.schemes.retain(|s| !s.scheme.is_splitting());
            e.measures = vec![Measure::new(NormKind::L2, TimeMode::L2Unweighted, false)];
            e
        })
        .collect();
    vec![
        ("table1".into(), ConfigFile::new(table1)),
        ("table2".into(), ConfigFile::new(vec![table2])),
        ("table3".into(), ConfigFile::new(table3)),
    ]
}

fn fisher_1d(capacity: f64) -> ProblemSpec {
    ProblemSpec::Fisher1d {
        diffusion: 0.01,
        rate: 1.0,
        capacity,
        domain: (0.0, 10.0),
        dx: 0.05,
    }
}

/// 2D Fisher-KPP on `[-2, 2]^2` at `dx = 0.05`.
pub fn fisher_2d(capacity: f64) -> ProblemSpec {
    ProblemSpec::Fisher2d {
        diffusion: (0.01, 0.01),
        rate: 1.0,
        capacity,
        domain: (-2.0, 2.0),
        dx: 0.05,
    }
}

/// 3D Fisher-KPP on `[-0.5, 0.5]^3` at `dx = 0.05`.
pub fn fisher_3d(capacity: f64) -> ProblemSpec {
    ProblemSpec::Fisher3d {
        diffusion: (0.01, 0.01, 0.01),
        rate: 1.0,
        capacity,
        domain: (-0.5, 0.5),
        dx: 0.05,
    }
}

fn capacity_tag(k: f64) -> String {
    format!("k{k}").replace('.', "p")
}

fn all_norms(time: TimeMode, relative: bool) -> Vec<Measure> {
    NormKind::ALL.iter().map(|&n| Measure::new(n, time, relative)).collect()
}

/// Refinement ladder of a 2D or 3D problem against a refined-grid reference.
pub fn refinement_ladder(name: String, problem: ProblemSpec, dxs: Vec<f64>, reference_dx: f64) -> ExperimentConfig {
    let mut e = ExperimentConfig::new(name, problem);
    e.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    e.dts = vec![0.01];
    e.dxs = dxs;
    e.reference = ReferenceSpec::Refined { dx: reference_dx };
    e.measures = all_norms(TimeMode::Final, false);
    e.measures.extend(all_norms(TimeMode::Final, true));
    e
}

pub fn ladder_2d(capacity: f64) -> ExperimentConfig {
    refinement_ladder(
        format!("fisher2d-ladder-{}", capacity_tag(capacity)),
        fisher_2d(capacity),
        vec![0.05, 0.025, 0.0125],
        0.00625,
    )
}

pub fn ladder_3d(capacity: f64) -> ExperimentConfig {
    refinement_ladder(
        format!("fisher3d-ladder-{}", capacity_tag(capacity)),
        fisher_3d(capacity),
        vec![0.05, 0.025],
        0.0125,
    )
}

/// `(file stem, document)` pairs for the data behind every figure.
pub fn figure_configs() -> Vec<(String, ConfigFile)> {
    let mut out = Vec::new();

    let solutions = TABLE_LAMBDA2
        .iter()
        .map(|&l2| {
            let mut e = ExperimentConfig::new(format!("bernoulli-solutions-{}", lambda_tag(l2)), bernoulli(l2));
            e.schemes = default_schemes();
            e.dts = vec![0.01];
            e.measures = ode_measures();
            e.series = true;
            e
        })
        .collect();
    out.push(("bernoulli-solutions".to_string(), ConfigFile::new(solutions)));

    let mut vs_reference = ExperimentConfig::new("fisher1d-vs-reference", fisher_1d(1.0));
    vs_reference.schemes = default_schemes();
    vs_reference.dts = vec![0.01];
    vs_reference.measures = all_norms(TimeMode::Final, false);
    vs_reference.snapshots = true;
    out.push(("fisher1d-vs-reference".to_string(), ConfigFile::new(vec![vs_reference])));

    let capacities = FISHER_CAPACITIES
        .iter()
        .map(|&k| {
            let mut e = ExperimentConfig::new(format!("fisher1d-capacity-{}", capacity_tag(k)), fisher_1d(k));
            e.schemes = default_schemes();
            e.dts = vec![0.01];
            e.final_times = vec![1.0, 5.0, 10.0];
            e.measures = all_norms(TimeMode::Final, false);
            e.snapshots = true;
            e.series = true;
            e
        })
        .collect();
    out.push(("fisher1d-capacity".to_string(), ConfigFile::new(capacities)));

    let mut field2d = ExperimentConfig::new("fisher2d-field", fisher_2d(1.0));
    field2d.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    field2d.dts = vec![0.01];
    field2d.measures = all_norms(TimeMode::Final, false);
    field2d.snapshots = true;
    field2d.series = true;
    out.push(("fisher2d-field".to_string(), ConfigFile::new(vec![field2d])));

    out.push((
        "fisher2d-convergence".to_string(),
        ConfigFile::new(FISHER_CAPACITIES.iter().map(|&k| ladder_2d(k)).collect()),
    ));

    let mut field3d = ExperimentConfig::new("fisher3d-field", fisher_3d(1.0));
    field3d.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    field3d.dts = vec![0.01];
    field3d.measures = all_norms(TimeMode::Final, false);
    field3d.snapshots = true;
    field3d.series = true;
    out.push(("fisher3d-field".to_string(), ConfigFile::new(vec![field3d])));

    let mut ladders3d: Vec<ExperimentConfig> = FISHER_CAPACITIES.iter().map(|&k| ladder_3d(k)).collect();
    for e in &mut ladders3d {
        e.measures = all_norms(TimeMode::Final, true);
    }
    out.push(("fisher3d-convergence".to_string(), ConfigFile::new(ladders3d)));
    out
}
