mod common;

use crosswalk::geometry::{
    AnchorPair, AnchorSide, GeometryError, Homography, ImagePoint, OverheadPoint,
};
use nalgebra::{DMatrix, Matrix3};
use proptest::prelude::*;
use rand::Rng;

/// Unconditioned DLT solved by SVD: the right singular vector of the
/// smallest singular value, normalized to h33 = 1.
fn svd_dlt(anchors: &[AnchorPair; 4]) -> Matrix3<f64> {
    let mut a = DMatrix::<f64>::zeros(9, 9);
    for (k, p) in anchors.iter().enumerate() {
        let (x, y) = (p.image.x, p.image.y);
        let (u, v) = (p.overhead.x, p.overhead.y);
        let r0 = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u];
        let r1 = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v];
        for j in 0..9 {
            a[(2 * k, j)] = r0[j];
            a[(2 * k + 1, j)] = r1[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let i = (0..9)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap();
    let h = v_t.row(i);
    Matrix3::from_fn(|r, c| h[3 * r + c] / h[8])
}

fn max_rel_diff(a: &Matrix3<f64>, b: [[f64; 3]; 3]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..3)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| (a[(r, c)] - b[r][c]).abs() / scale)
        .fold(0.0, f64::max)
}

#[test]
fn spot_a_matches_svd_oracle_and_anchors() {
    let cfg = common::spot_a();
    let oracle = svd_dlt(&cfg.anchors);
    assert!(max_rel_diff(&oracle, cfg.homography().matrix()) < 1e-9);
    for r in cfg.homography().residuals(&cfg.anchors) {
        assert!(r <= 1e-6, "residual {r}");
    }
}

#[test]
fn random_configurations_match_svd_oracle() {
    let mut rng = common::rng(7);
    let mut checked = 0;
    while checked < 200 {
        let h = common::random_homography(&mut rng);
        let Some(anchors) = common::anchors_for(&h, &mut rng) else {
            continue;
        };
        let Ok(est) = Homography::estimate(&anchors) else {
            continue;
        };
        let oracle = svd_dlt(&anchors);
        assert!(
            max_rel_diff(&oracle, est.matrix()) < 1e-7,
            "configuration {checked}"
        );
        checked += 1;
    }
}

#[test]
fn identity_anchors_give_identity() {
    let pts = [(0.0, 0.0), (100.0, 0.0), (100.0, 50.0), (0.0, 50.0)];
    let anchors =
        pts.map(|(x, y)| AnchorPair::new(ImagePoint::new(x, y), OverheadPoint::new(x, y)));
    let h = Homography::estimate(&anchors).unwrap().matrix();
    for (r, row) in h.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let want = if r == c { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }
}

#[test]
fn collinear_overhead_anchors_are_named() {
    let mut anchors = common::spot_a().anchors;
    anchors[3].overhead = OverheadPoint::new(480.0, 0.0);
    match Homography::estimate(&anchors) {
        Err(GeometryError::DegenerateAnchors { side, a, b, c }) => {
            assert_eq!(side, AnchorSide::Overhead);
            assert_eq!((a, b, c), (0, 1, 3));
        }
        other => panic!("expected degenerate anchors, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn round_trip_through_inverse(seed in any::<u64>(), x in -200.0f64..1500.0, y in -200.0f64..900.0) {
        let mut rng = common::rng(seed);
        let h = common::random_homography(&mut rng);
        let inv = h.inverse().unwrap();
        if let Ok((u, v)) = h.apply(x, y) {
            if let Ok((bx, by)) = inv.apply(u, v) {
                let scale = 1.0 + x.abs().max(y.abs());
                prop_assert!((bx - x).abs() / scale <= 1e-9 && (by - y).abs() / scale <= 1e-9);
            }
        }
    }

    #[test]
    fn scaling_overhead_anchors_scales_the_mapping(k in 0.01f64..100.0, x in 0.0f64..1280.0, y in 0.0f64..720.0) {
        let cfg = common::spot_a();
        let mut scaled = cfg.anchors;
        for a in &mut scaled {
            a.overhead = OverheadPoint::new(a.overhead.x * k, a.overhead.y * k);
        }
        let h = cfg.homography();
        let hk = Homography::estimate(&scaled).unwrap();
        if let (Ok((u, v)), Ok((uk, vk))) = (h.apply(x, y), hk.apply(x, y)) {
            let tol = 1e-9 * (1.0 + u.abs().max(v.abs())) * k;
            prop_assert!((uk - k * u).abs() <= tol && (vk - k * v).abs() <= tol);
        }
    }

    #[test]
    fn anchors_in_general_position_are_reproduced(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let h = common::random_homography(&mut rng);
        if let Some(anchors) = common::anchors_for(&h, &mut rng) {
            if let Ok(est) = Homography::estimate(&anchors) {
                let scale = anchors.iter().map(|a| a.overhead.x.abs().max(a.overhead.y.abs())).fold(1.0, f64::max);
                for r in est.residuals(&anchors) {
                    prop_assert!(r <= 1e-9 * scale);
                }
            }
        }
    }
}

#[test]
fn translated_points_keep_distances_under_similarity_anchors() {
    // a pure similarity maps equal image distances to equal overhead distances
    let mut rng = common::rng(3);
    let s = 1.7;
    let anchors = [(10.0, 20.0), (300.0, 25.0), (280.0, 200.0), (15.0, 190.0)].map(|(x, y)| {
        AnchorPair::new(
            ImagePoint::new(x, y),
            OverheadPoint::new(s * x + 5.0, s * y - 3.0),
        )
    });
    let h = Homography::estimate(&anchors).unwrap();
    for _ in 0..100 {
        let (x, y) = (rng.random_range(0.0..400.0), rng.random_range(0.0..300.0));
        let (dx, dy) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let a = h.project(ImagePoint::new(x, y)).unwrap();
        let b = h.project(ImagePoint::new(x + dx, y + dy)).unwrap();
        assert!((a.distance(&b) - s * f64::hypot(dx, dy)).abs() < 1e-9);
    }
}
