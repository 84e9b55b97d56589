use std::collections::HashSet;

use semisplit::harness::builtin::variant_schemes;
use semisplit::harness::{emit_plotdata, run_experiment, ExperimentConfig, Measure, ProblemSpec, ReferenceSpec, TimeMode};
use semisplit::metrics::refined_reference_error;
use semisplit::{integrate_final, NormKind, Scheme, SchemeConfig};

fn fisher1d(capacity: f64) -> ProblemSpec {
    ProblemSpec::Fisher1d {
        diffusion: 0.01,
        rate: 1.0,
        capacity,
        domain: (0.0, 10.0),
        dx: 0.05,
    }
}

fn final_l2() -> Vec<Measure> {
    vec![Measure::new(NormKind::L2, TimeMode::Final, false)]
}

#[test]
fn snapshot_at_time_zero_is_the_sampled_initial_profile() {
    let mut e = ExperimentConfig::new("snap", fisher1d(1.0));
    e.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    e.dts = vec![0.1];
    e.final_times = vec![0.0, 0.5];
    e.measures = final_l2();
    e.snapshots = true;
    let result = run_experiment(&e, 1).unwrap();
    assert!(result.failures.is_empty());
    let field = result.plots.iter().find(|p| p.name.starts_with("field_") && p.name.ends_with("_T0")).unwrap();
    assert_eq!(field.columns, ["x", "u", "reference"]);
    assert_eq!(field.rows.len(), 199);
    for r in &field.rows {
        assert!((r[1] - (-r[0] * r[0]).exp()).abs() < 1e-15, "{r:?}");
    }
    assert_eq!(result.rows[0].error, 0.0);
}

#[test]
fn fisher_mass_grows_monotonically_at_unit_capacity() {
    let mut e = ExperimentConfig::new("mass", fisher1d(1.0));
    e.schemes = vec![SchemeConfig::new(Scheme::Strang), SchemeConfig::new(Scheme::SuccessiveMultiA)];
    e.dts = vec![0.05];
    e.final_times = vec![3.0];
    e.measures = final_l2();
    e.series = true;
    let result = run_experiment(&e, 2).unwrap();
    let series: Vec<_> = result.plots.iter().filter(|p| p.name.starts_with("series_")).collect();
    assert_eq!(series.len(), 2);
    for s in series {
        assert_eq!(&s.columns[..4], ["t", "l1", "l2", "linf"]);
        assert_eq!(s.rows.len(), 61);
        for w in s.rows.windows(2) {
            assert!(w[1][1] > w[0][1], "{}: {:?} -> {:?}", s.name, w[0], w[1]);
        }
    }
}

#[test]
fn plot_file_names_are_injective_over_cells() {
    let mut e = ExperimentConfig::new("names", fisher1d(0.5));
    e.schemes = variant_schemes();
    e.dts = vec![0.1, 0.05];
    e.final_times = vec![0.2, 0.4];
    e.measures = vec![
        Measure::new(NormKind::L2, TimeMode::Final, false),
        Measure::new(NormKind::L2, TimeMode::Final, true),
        Measure::new(NormKind::Linf, TimeMode::Max, false),
    ];
    e.snapshots = true;
    e.series = true;
    let result = run_experiment(&e, 4).unwrap();
    assert!(result.failures.is_empty(), "{:?}", result.failures);
    let names: HashSet<_> = result.plots.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names.len(), result.plots.len());
    let cells = variant_schemes().len() * 2;
    assert_eq!(result.plots.iter().filter(|p| p.name.starts_with("field_")).count(), cells * 2);
    assert_eq!(result.plots.iter().filter(|p| p.name.starts_with("series_")).count(), cells);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_plotdata(&result.plots, dir.path()).unwrap();
    assert_eq!(files.len(), result.plots.len());
}

#[test]
fn oracle_reference_gives_second_order_for_strang() {
    let mut e = ExperimentConfig::new("oracle", fisher1d(1.0));
    e.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    e.dts = vec![0.1, 0.05, 0.025];
    e.measures = final_l2();
    e.reference = ReferenceSpec::Oracle { refine: 8 };
    let result = run_experiment(&e, 2).unwrap();
    assert_eq!(result.rows.len(), 3);
    for r in &result.rows[..2] {
        let rate = r.rate.unwrap();
        assert!((rate - 2.0).abs() < 0.2, "{r:?}");
    }
}

#[test]
fn refined_reference_matches_a_hand_restricted_run() {
    let problem = ProblemSpec::Fisher2d {
        diffusion: (0.01, 0.01),
        rate: 1.0,
        capacity: 0.5,
        domain: (-1.0, 1.0),
        dx: 0.2,
    };
    let mut e = ExperimentConfig::new("ladder", problem.clone());
    e.schemes = vec![SchemeConfig::new(Scheme::Strang)];
    e.dts = vec![0.05];
    e.dxs = vec![0.2, 0.1];
    e.final_times = vec![0.5];
    e.measures = vec![Measure::new(NormKind::L1, TimeMode::Final, true)];
    e.reference = ReferenceSpec::Refined { dx: 0.05 };
    let result = run_experiment(&e, 2).unwrap();
    assert_eq!(result.rows.len(), 2);

    let cfg = SchemeConfig::new(Scheme::Strang);
    let run = |dx: f64| {
        let p = problem.with_dx(dx).build().unwrap();
        integrate_final(&p, p.initial_state(), 0.5, 0.05, &cfg).unwrap()
    };
    let fine = run(0.05);
    for (row, dx) in result.rows.iter().zip([0.2, 0.1]) {
        assert_eq!(row.dx, Some(dx));
        let expected = refined_reference_error(&run(dx), &fine, NormKind::L1, true).unwrap();
        assert!((row.error - expected).abs() <= 1e-12 * expected, "{row:?} vs {expected}");
    }
    assert!(result.rows[1].error < result.rows[0].error);
}
