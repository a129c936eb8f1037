use comp_coverage::coverage::{
    ccp_map, ccp_point, ergodic_point, lognormal_at, worst_case_ccp, CoverageQuery,
};
use comp_coverage::geometry::{
    build_tessellation, color_reuse6, distances, home_region, interference_layout_at, layouts_congruent,
    LatticeIndex, Point2D,
};
use comp_coverage::icri::{beta_total, icri_avg};
use comp_coverage::montecarlo::{estimate_ccp_curve, McOptions, UserPosition};
use comp_coverage::units::{compensated_sum, density_from_side};
use comp_coverage::{CoopOrder, NetworkConfig};
use proptest::prelude::*;

fn order() -> impl Strategy<Value = CoopOrder> {
    prop_oneof![Just(CoopOrder::Two), Just(CoopOrder::Three)]
}

fn config() -> impl Strategy<Value = NetworkConfig> {
    (order(), 1u32..=4, 2.5f64..5.0, 0.0f64..8.0, 50.0f64..5000.0, 1u8..=2).prop_map(
        |(n, m, alpha, sigma_l_db, d_m, tiers)| NetworkConfig {
            n,
            m,
            alpha,
            sigma_l_db,
            d_m,
            tiers,
            ..Default::default()
        },
    )
}

/// A point strictly inside the home region, from barycentric-style weights.
fn interior(cfg: &NetworkConfig, w: &[f64]) -> Vec<f64> {
    let cr = home_region(cfg).unwrap();
    let v = cr.polygon.vertices();
    let total: f64 = w.iter().take(v.len()).sum();
    let p = v
        .iter()
        .zip(w)
        .fold(Point2D::ORIGIN, |acc, (vi, wi)| acc + *vi * (wi / total));
    distances(p, &cr).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_match_is_exact(cfg in config(), w in weights()) {
        let r = interior(&cfg, &w);
        let fit = lognormal_at(&cfg, &r).unwrap();
        let e1 = (fit.mu + 0.5 * fit.sigma2).exp();
        let e2 = (2.0 * fit.mu + 2.0 * fit.sigma2).exp();
        prop_assert!((e1 / fit.gamma1 - 1.0).abs() < 1e-12);
        prop_assert!((e2 / fit.gamma2 - 1.0).abs() < 1e-12);
        prop_assert!(fit.sigma2 > 0.0);
    }

    #[test]
    fn ccp_is_scale_free_without_noise(cfg in config(), w in weights(), c0 in 0.05f64..3.0) {
        let cfg = cfg.noiseless();
        let r = interior(&cfg, &w);
        let r2: Vec<f64> = r.iter().map(|x| 2.0 * x).collect();
        let q = CoverageQuery::new(c0).unwrap();
        let a = ccp_point(&cfg, &r, q).unwrap();
        let b = ccp_point(&cfg.with_side(2.0 * cfg.d_m), &r2, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{} vs {}", a, b);
    }

    #[test]
    fn ccp_decreases_in_rate(cfg in config(), w in weights(), c0 in 0.05f64..2.0, dc in 0.01f64..1.0) {
        let r = interior(&cfg, &w);
        let lo = ccp_point(&cfg, &r, CoverageQuery::new(c0).unwrap()).unwrap();
        let hi = ccp_point(&cfg, &r, CoverageQuery::new(c0 + dc).unwrap()).unwrap();
        // strict while the upper value is representable above zero
        prop_assert!(hi < lo || (hi == 0.0 && lo == 0.0) || (lo == 1.0 && hi == 1.0));
        prop_assert!(hi <= lo);
    }

    #[test]
    fn ergodic_ignores_bs_order(cfg in config(), w in weights()) {
        let r = interior(&cfg, &w);
        let mut rev = r.clone();
        rev.reverse();
        let a = ergodic_point(&cfg, &r).unwrap();
        let b = ergodic_point(&cfg, &rev).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn icri_scales_with_side(cfg in config()) {
        let a = icri_avg(&cfg).unwrap();
        let b = icri_avg(&cfg.with_side(2.0 * cfg.d_m)).unwrap();
        let ratio = b.total.watts() / a.total.watts();
        prop_assert!((ratio / 2f64.powf(-cfg.alpha) - 1.0).abs() < 1e-12);
        let tiers: f64 = a.per_tier.iter().map(|p| p.watts()).sum();
        prop_assert!((tiers / a.total.watts() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_is_permutation_stable(xs in proptest::collection::vec(-1e3f64..1e3, 2..40), seed in any::<u64>()) {
        let a = compensated_sum(xs.iter().copied());
        let mut shuffled = xs.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let b = compensated_sum(shuffled);
        let scale = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((a - b).abs() <= 1e-15 * scale);
    }

    #[test]
    fn config_json_round_trip(cfg in config()) {
        let json = serde_json::to_string(&cfg).unwrap();
        let back: NetworkConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(cfg, back);
    }

    #[test]
    fn density_side_identity(d in 1.0f64..1e5) {
        let lam = density_from_side(d);
        prop_assert!((lam * 1.5 * 3f64.sqrt() * d * d - 1.0).abs() < 1e-12);
    }
}

#[test]
fn beta_decreases_in_alpha_and_order() {
    let grid = [3.0, 3.5, 4.0];
    for n in [CoopOrder::Two, CoopOrder::Three] {
        let b: Vec<f64> = grid.iter().map(|&a| beta_total(a, n, 1).unwrap().total).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
    }
    for a in grid {
        let two = beta_total(a, CoopOrder::Two, 1).unwrap().total;
        let three = beta_total(a, CoopOrder::Three, 1).unwrap().total;
        assert!(three < two);
    }
}

#[test]
fn every_bs_sees_the_same_layout() {
    for n in [CoopOrder::Two, CoopOrder::Three] {
        for color in 1..=6 {
            let base = interference_layout_at(n, 2, LatticeIndex::ORIGIN, color).unwrap();
            for bs in [LatticeIndex::new(1, 0), LatticeIndex::new(-2, 1), LatticeIndex::new(3, -3)] {
                let other = interference_layout_at(n, 2, bs, color).unwrap();
                assert!(layouts_congruent(&base, &other), "N={n} color={color} bs={bs:?}");
            }
        }
    }
}

#[test]
fn co_channel_regions_share_no_bs() {
    for n in [CoopOrder::Two, CoopOrder::Three] {
        let cfg = NetworkConfig { n, d_m: 1.0, ..Default::default() };
        let regions = color_reuse6(build_tessellation(&cfg, 4).unwrap()).unwrap();
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                if a.color == b.color {
                    let shared = a.key.anchors().iter().any(|x| b.key.anchors().contains(x));
                    assert!(!shared, "{:?} and {:?}", a.key, b.key);
                }
            }
        }
    }
}

/// Grid cells of the home region and the half-diagonal of one cell.
fn region_grid(cfg: &NetworkConfig, res: usize) -> (Vec<Point2D>, f64) {
    let cr = home_region(cfg).unwrap();
    let v = cr.polygon.vertices();
    let (x0, x1) = v.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.x), a.1.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.y), a.1.max(p.y)));
    let (dx, dy) = ((x1 - x0) / res as f64, (y1 - y0) / res as f64);
    let pts = (0..res * res)
        .map(|k| Point2D::new(x0 + ((k % res) as f64 + 0.5) * dx, y0 + ((k / res) as f64 + 0.5) * dy))
        .filter(|p| cr.polygon.contains(*p))
        .collect();
    (pts, dx.hypot(dy))
}

#[test]
fn path_loss_objective_is_minimized_at_worst_case_points() {
    // the objective Σ r_k^{-2α}, whose minimizer locates the worst-case points
    for n in [CoopOrder::Two, CoopOrder::Three] {
        for alpha in [3.0, 3.5, 4.0] {
            let cfg = NetworkConfig { n, alpha, d_m: 1.0, ..Default::default() };
            let cr = home_region(&cfg).unwrap();
            let (pts, cell) = region_grid(&cfg, 200);
            let f = |p: Point2D| -> f64 {
                distances(p, &cr).unwrap().iter().map(|r| r.powf(-2.0 * alpha)).sum()
            };
            let best = pts.iter().copied().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
            let near = cr.worst_case_points().iter().any(|w| w.distance(best) <= cell);
            assert!(near, "N={n} α={alpha}: argmin at {best:?}");
        }
    }
}

#[test]
fn grid_minimum_sits_at_worst_case_points() {
    let cases = [
        (CoopOrder::Two, 3.0, 1000.0, 1.0),
        (CoopOrder::Two, 3.5, 1000.0, 1.0),
        (CoopOrder::Two, 4.0, 1000.0, 1.0),
        (CoopOrder::Three, 3.0, 1000.0, 1.0),
        (CoopOrder::Three, 3.5, 1000.0, 1.0),
        (CoopOrder::Three, 4.0, 1000.0, 1.0),
        (CoopOrder::Three, 4.0, 1006.0, 0.5),
        (CoopOrder::Two, 4.0, 1034.0, 0.5),
    ];
    for (n, alpha, d_m, c0) in cases {
        let cfg = NetworkConfig { n, alpha, d_m, ..Default::default() };
        let q = CoverageQuery::new(c0).unwrap();
        let rows = ccp_map(&cfg, q, 50).unwrap();
        let min = rows.iter().min_by(|a, b| a.ccp.total_cmp(&b.ccp)).unwrap();
        let (_, cell) = region_grid(&cfg, 50);
        let cr = home_region(&cfg).unwrap();
        let p = Point2D::new(min.x_m, min.y_m);
        let near = cr.worst_case_points().iter().any(|w| w.distance(p) <= cell);
        assert!(near, "N={n} α={alpha} c0={c0}: grid min at {p:?}");
        assert!(min.ccp >= worst_case_ccp(&cfg, q).unwrap() - 1e-12);
    }
}

#[test]
fn simulation_is_worker_independent() {
    let cfg = NetworkConfig { n: CoopOrder::Three, ..Default::default() };
    let c0s = [0.2, 0.8, 1.6];
    let run = |w| estimate_ccp_curve(&cfg, UserPosition::Centroid, &c0s, McOptions::new(20_000, 99).with_workers(w))
        .unwrap()
        .iter()
        .map(|e| (e.mean.to_bits(), e.stderr.to_bits()))
        .collect::<Vec<_>>();
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(16));
}
