use super::*;

#[test]
fn summarize_examples() {
    assert_eq!(summarize(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 2.0));
    assert_eq!(summarize(&[1.0, 2.0, 3.0, 100.0]).unwrap(), (26.5, 2.5));
    assert_eq!(summarize(&[0.1009]).unwrap(), (0.1009, 0.1009));
    assert!(summarize(&[]).is_err());
}

#[test]
fn seeds_are_distinct_and_stable() {
    let a = replicate_seed(1, 0, 0);
    assert_eq!(a, replicate_seed(1, 0, 0));
    let mut all: Vec<u64> = (0..27).flat_map(|j| (0..50).map(move |k| replicate_seed(1, j, k))).collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 27 * 50);
    assert_ne!(replicate_seed(1, 0, 0), replicate_seed(2, 0, 0));
}

#[test]
fn grid_has_every_cell() {
    let g = ExperimentGrid::default();
    let cells = g.cells();
    assert_eq!(cells.len(), 27);
    for c in &cells {
        assert!(c.n_sim <= g.n_steps);
        let sched = OnOffSchedule::new(c.delta1, c.delta2).unwrap();
        assert!(sched.steps_for_windows(c.p + 1) > g.n_steps);
    }
    assert!(ExperimentGrid { reps: 0, ..g.clone() }.validate().is_err());
    assert!(ExperimentGrid { h_values: vec![], ..g }.validate().is_err());
}

fn small_grid() -> ExperimentGrid {
    ExperimentGrid {
        h_values: vec![0.002],
        delta1_steps: vec![100],
        delta2_steps: vec![0, 200],
        n_steps: 4_000,
        reps: 3,
        spacing: 0.02,
        ..ExperimentGrid::default()
    }
}

#[test]
fn no_gap_cells_give_identical_tables() {
    let g = small_grid();
    let (on, contiguous) = run_hausdorff_tables(&g).unwrap();
    assert_eq!(on.cells.len(), 2);
    assert_eq!(on.cells[0].values, contiguous.cells[0].values);
    assert_ne!(on.cells[1].values, contiguous.cells[1].values);
    let gain = efficiency_gain(&on, &contiguous).unwrap();
    assert_eq!(gain.metric, Metric::GainDh);
    assert_eq!(gain.cells[0].mean, Some(0.0));
}

#[test]
fn reruns_reproduce_raw_values() {
    let g = small_grid();
    let all = MetricSet {
        hausdorff: true,
        measure: true,
    };
    let a = run_tables(&g, all, |_, _| {}).unwrap();
    let b = run_tables(&g, all, |_, _| {}).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.tables.len(), 4);
    assert_eq!(a.with_gains().unwrap().len(), 6);
    for t in &a.tables {
        for c in &t.cells {
            let ok: Vec<f64> = c.values.iter().flatten().copied().collect();
            assert_eq!((c.mean, c.median), summarize(&ok).map(|(m, d)| (Some(m), Some(d))).unwrap());
        }
    }
    assert_eq!(a.manifest.cells[1].seeds.len(), 3);
}

#[test]
fn identical_tables_have_zero_gain() {
    let (on, _) = run_hausdorff_tables(&small_grid()).unwrap();
    let gain = efficiency_gain(&on, &on).unwrap();
    assert!(gain.cells.iter().all(|c| c.mean == Some(0.0) && c.median == Some(0.0)));
}

#[test]
fn zero_denominator_gain_is_undefined() {
    let (mut on, _) = run_hausdorff_tables(&small_grid()).unwrap();
    on.cells[0].mean = Some(0.0);
    let gain = efficiency_gain(&on, &on).unwrap();
    assert_eq!(gain.cells[0].mean, None);
}

#[test]
fn single_length_diagnostic_has_one_point() {
    let cfg = ConvergenceConfig {
        spacing: 0.02,
        ..ConvergenceConfig::default()
    };
    let pts = run_convergence_diagnostic(&[2_000], 2, &cfg).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].dh_points.len(), 2);
    assert!(run_convergence_diagnostic(&[2_000, 1_000], 2, &cfg).is_err());
}
