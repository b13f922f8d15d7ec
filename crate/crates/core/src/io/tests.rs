use std::path::Path;

use proptest::prelude::*;

use super::config::RunConfig;
use super::svg::{flag_runs, render_svg, SvgPayload};
use super::table::{polylines_csv, table_csv};
use super::track::{diameter, parse_trajectory, rescale_unit_diameter, trajectory_csv};
use crate::contour::Polyline;
use crate::experiments::{Cell, CellResult, Metric, ResultTable};
use crate::geometry::Point2;
use crate::simulator::{simulate, OnOffSchedule, SimParams};
use crate::Error;

fn parse(text: &str) -> crate::Result<crate::Trajectory> {
    parse_trajectory(text, Path::new("t.csv"))
}

fn parse_line(e: crate::Error) -> usize {
    match e {
        Error::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other}"),
    }
}

#[test]
fn three_row_track() {
    let t = parse("time,x,y\n0,1,2\n1,1.5,2\n1,2,2.5\n").unwrap();
    assert_eq!(t.len(), 3);
    assert_eq!(t.points[2], Point2::new(2.0, 2.5));
    assert_eq!(t.steps, vec![0, 1, 2]);
    assert!(t.on_flags.iter().all(|&f| f));
}

#[test]
fn nan_row_is_named() {
    let e = parse("time,x,y\n0,1,2\n1,NaN,2\n").unwrap_err();
    assert!(e.to_string().contains("must be finite"), "{e}");
    assert_eq!(parse_line(e), 3);
}

#[test]
fn malformed_tracks_are_rejected_with_lines() {
    assert_eq!(parse_line(parse("time,x,y\n0,1,2\n2,1,2\n1,1,2\n").unwrap_err()), 4);
    assert_eq!(parse_line(parse("time,x,y\n0,one,2\n").unwrap_err()), 2);
    assert_eq!(parse_line(parse("time,x,y\n0,1\n").unwrap_err()), 2);
    assert_eq!(parse_line(parse("# note\nt,x,y\n").unwrap_err()), 2);
    assert_eq!(parse_line(parse("step,time,x,y,on\n0,0,1,1,2\n").unwrap_err()), 2);
    assert!(matches!(parse("").unwrap_err(), Error::EmptyInput(_)));
    assert!(matches!(parse("time,x,y\n").unwrap_err(), Error::EmptyInput(_)));
}

#[test]
fn simulated_trajectory_round_trips_exactly() {
    let traj = simulate(&SimParams::study(0.002, 2000, 3))
        .unwrap()
        .with_schedule(&OnOffSchedule::new(100, 250).unwrap());
    let back = parse(&trajectory_csv(&traj)).unwrap();
    assert_eq!(back, traj);
}

proptest! {
    #[test]
    fn arbitrary_finite_rows_round_trip(rows in prop::collection::vec(
        (-1e6f64..1e6, -1e6f64..1e6, any::<bool>(), 0.0f64..10.0), 1..40)) {
        let mut t = 0.0;
        let mut traj = crate::Trajectory {
            points: Vec::new(),
            times: Vec::new(),
            steps: Vec::new(),
            on_flags: Vec::new(),
            meta: Default::default(),
        };
        for (k, (x, y, on, dt)) in rows.into_iter().enumerate() {
            t += dt;
            traj.points.push(Point2::new(x, y));
            traj.times.push(t);
            traj.steps.push(3 * k);
            traj.on_flags.push(on);
        }
        prop_assert_eq!(parse(&trajectory_csv(&traj)).unwrap(), traj);
    }

    #[test]
    fn diameter_matches_all_pairs(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..60)) {
        let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
        let mut brute: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                brute = brute.max(a.dist(*b));
            }
        }
        prop_assert!((diameter(&pts) - brute).abs() <= 1e-12 * brute.max(1.0));
    }
}

#[test]
fn rescaled_track_has_unit_diameter() {
    let t = parse("time,x,y\n0,500000,7000000\n1,500300,7000400\n2,500100,7000100\n").unwrap();
    let (r, a) = rescale_unit_diameter(&t).unwrap();
    assert!((diameter(&r.points) - 1.0).abs() < 1e-12);
    assert_eq!(a.scale, 1.0 / 500.0);
    assert_eq!(r.points[0], Point2::new(0.0, 0.0));
    let single = parse("time,x,y\n0,1,1\n").unwrap();
    assert!(rescale_unit_diameter(&single).is_err());
}

fn cell(index: usize, h: f64, delta1: usize, delta2: usize) -> Cell {
    Cell {
        index,
        h,
        delta1,
        delta2,
        p: 1,
        n_sim: delta1,
    }
}

#[test]
fn table_layout() {
    let result = |c: Cell, mean: Option<f64>, median: Option<f64>| CellResult {
        cell: c,
        values: vec![],
        failures: 0,
        mean,
        median,
    };
    let table = ResultTable {
        metric: Metric::DhOnoff,
        cells: vec![
            result(cell(0, 0.001, 100, 100), Some(0.25), Some(0.2)),
            result(cell(1, 0.001, 100, 500), Some(0.123456), Some(0.1)),
            result(cell(2, 0.002, 100, 100), None, None),
        ],
    };
    assert_eq!(
        table_csv(&table),
        "h,delta1,100,500\n0.001,100,0.2500 (0.2000),0.1235 (0.1000)\n0.002,100,NA (NA),NA\n"
    );
}

#[test]
fn polyline_csv_rows() {
    let lines = vec![
        Polyline {
            points: vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            closed: false,
        },
        Polyline {
            points: vec![Point2::new(0.5, 0.5)],
            closed: true,
        },
    ];
    let csv = polylines_csv(&lines);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "loop_id,x,y");
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("1,5.0000000000000000e-1"));
}

#[test]
fn runs_split_on_flag_changes() {
    assert_eq!(flag_runs(&[]), vec![]);
    assert_eq!(
        flag_runs(&[true, true, false, true]),
        vec![(0, 2, true), (2, 3, false), (3, 4, true)]
    );
}

#[test]
fn empty_payloads_are_errors() {
    let empty = crate::Trajectory {
        points: vec![],
        times: vec![],
        steps: vec![],
        on_flags: vec![],
        meta: Default::default(),
    };
    assert!(render_svg(SvgPayload::Trajectory(&empty)).is_err());
    assert!(render_svg(SvgPayload::Polylines(&[])).is_err());
}

#[test]
fn svg_is_deterministic_and_alternates_colors() {
    let traj = simulate(&SimParams::study(0.002, 10_000, 9))
        .unwrap()
        .with_schedule(&OnOffSchedule::new(250, 500).unwrap());
    let a = render_svg(SvgPayload::Trajectory(&traj)).unwrap();
    let b = render_svg(SvgPayload::Trajectory(&traj)).unwrap();
    assert_eq!(a, b);
    let colors: Vec<&str> = a
        .lines()
        .filter(|l| l.starts_with("<polyline"))
        .map(|l| if l.contains("stroke=\"black\"") { "on" } else { "off" })
        .collect();
    let on_runs = colors.iter().filter(|&&c| c == "on").count();
    assert_eq!(on_runs, 10_000usize.div_ceil(750));
    assert_eq!(colors.len(), 2 * on_runs - 1);
    assert!(colors.windows(2).all(|w| w[0] != w[1]));
    assert_eq!(colors[0], "on");
}

#[test]
fn config_defaults_and_overrides() {
    let cfg = RunConfig::from_json_str("{}", Path::new("c.json")).unwrap();
    assert_eq!(cfg, RunConfig::default());
    let cfg = RunConfig::from_json_str(
        "{\"simulation\": {\"h\": 0.01, \"seed\": 4}, \"schedule\": {\"delta2_steps\": 0}}",
        Path::new("c.json"),
    )
    .unwrap();
    assert_eq!(cfg.simulation.h, 0.01);
    assert_eq!(cfg.simulation.seed, 4);
    assert_eq!(cfg.schedule.delta1_steps, 100);
    assert_eq!(cfg.schedule.delta2_steps, 0);
}

#[test]
fn config_errors_carry_line_numbers() {
    let p = Path::new("c.json");
    let syntax = "{\n  \"simulation\": {\n    \"h\": 0.01,\n  }\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(syntax, p).unwrap_err()), 4);
    let unknown = "{\n  \"simulation\": {\n    \"step\": 3\n  }\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(unknown, p).unwrap_err()), 3);
    let bad_h = "{\n  \"simulation\": {\n    \"h\": -1\n  }\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(bad_h, p).unwrap_err()), 3);
    let bad_r = "{\n  \"estimator\": {\n    \"bandwidth\": 0.1,\n    \"r\": 0\n  }\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(bad_r, p).unwrap_err()), 4);
    let outside = "{\n \"simulation\": {\n  \"start\": [0.8, 0.0]\n }\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(outside, p).unwrap_err()), 3);
    let missing = "{\n \"track\": \"does/not/exist.csv\"\n}";
    assert_eq!(parse_line(RunConfig::from_json_str(missing, p).unwrap_err()), 2);
    let zero_window = "{\"schedule\": {\"delta1_steps\": 0}}";
    assert!(RunConfig::from_json_str(zero_window, p).is_err());
    let masses = "{\"estimator\": {\"level_masses\": [1.5]}}";
    assert!(RunConfig::from_json_str(masses, p).is_err());
}
