use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::geometry::Rect;

fn study_grid(spacing: f64) -> Grid2D {
    Grid2D::covering(&Domain::ellipse_minus_disk().bbox, spacing, 2.0 * spacing).unwrap()
}

/// Independent draws from `exp(-(x^2 + y^2)) 1_S` by rejection from N(0, I/2).
fn stationary_draws(n: usize, seed: u64) -> Vec<Point2> {
    let s = Domain::ellipse_minus_disk();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 0.5f64.sqrt();
    std::iter::repeat_with(|| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Point2::new(sd * x, sd * y)
    })
    .filter(|p| s.contains(*p))
    .take(n)
    .collect()
}

/// 5 x 5 probes in a block of the study domain well away from its boundary.
fn interior_probes() -> Vec<Point2> {
    (0..25)
        .map(|k| Point2::new(-0.9 + 0.2 * (k % 5) as f64, -0.4 + 0.2 * (k / 5) as f64))
        .collect()
}

fn brute_kde(points: &[Point2], kernel: KernelSpec, q: Point2) -> f64 {
    let h = kernel.bandwidth;
    points.iter().map(|p| kernel.kernel((q - *p) * (1.0 / h))).sum::<f64>() / (points.len() as f64 * h * h)
}

#[test]
fn single_sample_peak() {
    let g = Grid2D::new(Point2::new(-1.0, -1.0), 0.1, 21, 21).unwrap();
    let h = 0.3;
    let f = kde(&[Point2::ORIGIN], KernelSpec::gaussian(h).unwrap(), g).unwrap();
    let (i, j) = g.cell_of(Point2::ORIGIN).unwrap();
    assert!((f.get(i, j) - 1.0 / (2.0 * PI * h * h)).abs() < 1e-12);
}

#[test]
fn kde_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<Point2> = (0..40)
        .map(|_| Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let g = Grid2D::new(Point2::new(-2.0, -2.0), 0.1, 41, 41).unwrap();
    for family in [KernelFamily::Gaussian, KernelFamily::Epanechnikov] {
        let k = KernelSpec::new(family, 0.35).unwrap();
        let f = kde(&pts, k, g).unwrap();
        for idx in (0..g.len()).step_by(7) {
            let want = brute_kde(&pts, k, g.center_of(idx));
            assert!((f.values[idx] - want).abs() < 1e-12 * want.max(1.0), "{family:?} {idx}");
        }
    }
}

#[test]
fn kde_is_translation_equivariant() {
    let pts = stationary_draws(200, 2);
    let g = study_grid(0.05);
    let v = Point2::new(3.0, -2.0);
    let k = KernelSpec::gaussian(0.2).unwrap();
    let a = kde(&pts, k, g).unwrap();
    let moved: Vec<Point2> = pts.iter().map(|&p| p + v).collect();
    let b = kde(&moved, k, g.translated(v)).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-9 * a.max());
    }
}

#[test]
fn kde_mass_is_one() {
    let pts = stationary_draws(300, 3);
    let h = 0.2;
    let bb = Rect::bounding(&pts).unwrap();
    let g = Grid2D::covering(&bb, 0.02, 6.0 * h).unwrap();
    let gauss = kde(&pts, KernelSpec::gaussian(h).unwrap(), g).unwrap();
    assert!(gauss.mass() >= 0.99 && gauss.mass() <= 1.0 + 1e-6, "{}", gauss.mass());
    let epa = kde(&pts, KernelSpec::new(KernelFamily::Epanechnikov, h).unwrap(), g).unwrap();
    assert!((epa.mass() - 1.0).abs() < 0.01, "{}", epa.mass());
}

#[test]
fn bandwidth_must_be_positive() {
    assert!(KernelSpec::gaussian(0.0).is_err());
    assert!(KernelSpec::gaussian(f64::NAN).is_err());
    assert!(kde(&[], KernelSpec::gaussian(0.2).unwrap(), study_grid(0.1)).is_err());
}

#[test]
fn true_density_ratios_and_support() {
    let s = Domain::ellipse_minus_disk();
    let g = study_grid(0.01);
    let f = true_density(&s, &Potential::study(), g).unwrap();
    assert!((f.mass() - 1.0).abs() < 1e-3);
    let cells: Vec<usize> = (0..g.len()).filter(|&k| s.contains(g.center_of(k))).collect();
    for w in cells.chunks(997).map(|c| c[0]).collect::<Vec<_>>().windows(2) {
        let (p1, p2) = (g.center_of(w[0]), g.center_of(w[1]));
        let want = (p2.norm_sq() - p1.norm_sq()).exp();
        assert!((f.values[w[0]] / f.values[w[1]] - want).abs() < 1e-12 * want);
    }
    for k in 0..g.len() {
        if !s.contains(g.center_of(k)) {
            assert_eq!(f.values[k], 0.0);
        }
    }
    let empty = Grid2D::new(Point2::new(10.0, 10.0), 0.1, 5, 5).unwrap();
    assert!(true_density(&s, &Potential::study(), empty).is_err());
}

#[test]
fn true_density_normaliser_matches_monte_carlo() {
    let s = Domain::ellipse_minus_disk();
    let g = study_grid(0.005);
    let f = true_density(&s, &Potential::study(), g).unwrap();
    let k = g.index(300, 200);
    let p = g.center_of(k);
    assert!(s.contains(p));
    let c_grid = (-p.norm_sq()).exp() / f.values[k];

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bb = s.bbox;
    let n = 10_000_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let q = Point2::new(rng.random_range(bb.min.x..bb.max.x), rng.random_range(bb.min.y..bb.max.y));
        if s.contains(q) {
            sum += (-q.norm_sq()).exp();
        }
    }
    let c_mc = sum / n as f64 * bb.width() * bb.height();
    assert!((c_grid - c_mc).abs() < 0.005 * c_mc, "{c_grid} vs {c_mc}");
}

#[test]
fn unit_circle_level_set() {
    let disk = Domain::disk(Point2::ORIGIN, 2.0).unwrap();
    let g = Grid2D::covering(&disk.bbox, 0.01, 0.02).unwrap();
    let f = true_density(&disk, &Potential::study(), g).unwrap();
    // rescale so the level e^{-1} of exp(-r^2) applies to the normalised field
    let c = (-g.center_of(g.index(200, 200)).norm_sq()).exp() / f.get(200, 200);
    let loops = level_set_contours(&f, (-1.0f64).exp() / c).unwrap();
    assert_eq!(loops.len(), 1);
    for p in &loops[0].points {
        assert!((p.norm() - 1.0).abs() < 2.0 * g.spacing, "{p:?}");
    }
    assert!(level_set_contours(&f, 2.0 * f.max()).unwrap().is_empty());
    assert!(level_set_contours(&f, 0.0).is_err());
}

#[test]
fn half_mass_contour_avoids_removed_disk() {
    let s = Domain::ellipse_minus_disk();
    let f = true_density(&s, &Potential::study(), study_grid(0.01)).unwrap();
    let lambda = mass_level(&f, 0.5).unwrap();
    let mask = level_set_mask(&f, lambda);
    let held = (mask.cells.iter().zip(&f.values).filter(|(&c, _)| c).map(|(_, v)| v).sum::<f64>())
        * f.grid.cell_area();
    assert!((held - 0.5).abs() < 0.01, "{held}");
    // edges into the hole interpolate towards a zero sample, at most one cell deep
    let hole = Point2::new(0.8, 0.0);
    for poly in level_set_contours(&f, lambda).unwrap() {
        for p in poly.points {
            assert!(p.dist(hole) >= 0.5 - f.grid.spacing, "{p:?}");
        }
    }
}

#[test]
fn level_sets_are_nested() {
    let f = kde(&stationary_draws(500, 5), KernelSpec::gaussian(0.2).unwrap(), study_grid(0.02)).unwrap();
    let m = f.max();
    let levels = [0.05 * m, 0.2 * m, 0.5 * m, 0.9 * m];
    for w in levels.windows(2) {
        assert!(level_set_mask(&f, w[1]).is_subset_of(&level_set_mask(&f, w[0])).unwrap());
    }
}

#[test]
fn concentric_polygons_are_a_tenth_apart() {
    let circle = |r: f64| Polyline {
        points: (0..64)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 64.0;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect(),
        closed: true,
    };
    let d = contour_hausdorff(&[circle(1.0)], &[circle(1.1)]).unwrap();
    assert!((d - 0.1).abs() < 0.005, "{d}");
    assert_eq!(contour_hausdorff(&[circle(1.0)], &[circle(1.0)]).unwrap(), 0.0);
    assert!(contour_hausdorff(&[], &[circle(1.0)]).is_err());
}

#[test]
fn drift_of_true_density_is_minus_identity() {
    let s = Domain::ellipse_minus_disk();
    let f = true_density(&s, &Potential::study(), study_grid(0.005)).unwrap();
    let nu = drift_estimate(&f, Point2::new(0.5, -0.5)).unwrap();
    assert!(nu.dist(Point2::new(-0.5, 0.5)) < 1e-3);
    for p in interior_probes() {
        let nu = drift_estimate(&f, p).unwrap();
        assert!(nu.dist(p * -1.0) < 1e-3, "{p:?} -> {nu:?}");
    }
}

#[test]
fn drift_of_constant_field_vanishes() {
    let g = Grid2D::new(Point2::ORIGIN, 0.1, 10, 10).unwrap();
    let f = DensityField::new(g, vec![0.7; 100]).unwrap();
    assert_eq!(drift_estimate(&f, Point2::new(0.43, 0.51)).unwrap(), Point2::ORIGIN);
}

#[test]
fn drift_refuses_vanishing_density_and_grid_edge() {
    let s = Domain::ellipse_minus_disk();
    let f = true_density(&s, &Potential::study(), study_grid(0.01)).unwrap();
    assert!(matches!(
        drift_estimate(&f, Point2::new(0.8, 0.0)),
        Err(Error::DensityTooSmall { .. })
    ));
    assert!(drift_estimate(&f, Point2::new(5.0, 0.0)).is_err());
}

#[test]
fn drift_error_is_second_order_in_spacing() {
    // log g = -(x^4 + y^4): central differences carry an O(s^2) error
    let exact = |p: Point2| Point2::new(-2.0 * p.x.powi(3), -2.0 * p.y.powi(3));
    let err = |s: f64| {
        let g = Grid2D::covering(&Rect::new(Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0)), s, 0.1).unwrap();
        let values = g.centers().map(|p| (-(p.x.powi(4) + p.y.powi(4))).exp()).collect();
        let f = DensityField::new(g, values).unwrap();
        // probes on cell centers of both grids isolate the difference error
        [(0.4, 0.6), (-0.7, 0.2), (0.8, -0.8)]
            .iter()
            .map(|&(x, y)| drift_estimate(&f, Point2::new(x, y)).unwrap().dist(exact(Point2::new(x, y))))
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.02), err(0.01));
    assert!(coarse > 0.0 && coarse / fine >= 3.0, "{coarse} {fine}");
}

#[test]
fn kde_tracks_true_density_away_from_boundary() {
    let s = Domain::ellipse_minus_disk();
    let g = study_grid(0.02);
    let truth = true_density(&s, &Potential::study(), g).unwrap();
    let est = kde(&stationary_draws(10_000, 6), KernelSpec::gaussian(0.2).unwrap(), g).unwrap();
    let inner = crate::geometry::inner_parallel_set(&s, 0.4, g).unwrap().mask;
    let err = est.sup_distance(&truth, &inner).unwrap();
    assert!(err < 0.15 * truth.max(), "{err} vs {}", truth.max());
}

#[test]
fn kde_drift_tracks_analytic_drift() {
    let g = study_grid(0.02);
    let est = kde(&stationary_draws(20_000, 7), KernelSpec::gaussian(0.2).unwrap(), g).unwrap();
    let probes = interior_probes();
    let mean = probes
        .iter()
        .map(|&p| drift_estimate(&est, p).unwrap().dist(p * -1.0))
        .sum::<f64>()
        / probes.len() as f64;
    assert!(mean < 0.25, "{mean}");
}
