//! Implementation vs independent oracle. Each oracle here shares no code
//! path with the quantity it checks.

use comp_coverage::coverage::{
    ccp_point, ergodic_point, lognormal_at, sum_ccp, worst_case_ccp, CoverageQuery,
};
use comp_coverage::geometry::{interference_layout, region_area_normalized, ConvexPolygon, Point2D};
use comp_coverage::icri::{beta_region, beta_total, icri_avg};
use comp_coverage::montecarlo::{
    estimate_ccp, estimate_ccp_curve, estimate_ergodic, McOptions, UserPosition,
};
use comp_coverage::units::{q_function, shadow_scale};
use comp_coverage::{CoopOrder, NetworkConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

/// Rejection-sampled `∬ f` over a convex polygon: mean and standard error.
fn rejection_integral(poly: &ConvexPolygon, f: impl Fn(f64, f64) -> f64 + Sync, n: u64, seed: u64) -> (f64, f64) {
    let v = poly.vertices();
    let (x0, x1) = v.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.x), a.1.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.y), a.1.max(p.y)));
    let box_area = (x1 - x0) * (y1 - y0);
    let chunks = 64u64;
    let (s1, s2): (f64, f64) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (c << 32));
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..n / chunks {
                let p = Point2D::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
                let val = if poly.contains(p) { box_area * f(p.x, p.y) } else { 0.0 };
                a += val;
                b += val * val;
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
    let m = (n / chunks * chunks) as f64;
    let mean = s1 / m;
    (mean, ((s2 / m - mean * mean) / m).sqrt())
}

#[test]
fn beta_regions_match_rejection_sampling() {
    for n in [CoopOrder::Two, CoopOrder::Three] {
        let layout = interference_layout(&NetworkConfig { n, tiers: 2, ..Default::default() }).unwrap();
        let area = region_area_normalized(n).unwrap();
        for alpha in [3.0, 4.0] {
            for (k, r) in layout.regions.iter().enumerate() {
                let quad = beta_region(&r.polygon, alpha, area).unwrap();
                let (mc, se) = rejection_integral(
                    &r.polygon,
                    |x, y| (x * x + y * y).powf(-0.5 * alpha),
                    10_000_000,
                    k as u64 + 1000 * n.count() as u64,
                );
                let (mc, se) = (mc / area, se / area);
                assert!((quad - mc).abs() <= 3.0 * se, "N={n} α={alpha} region {k}: {quad} vs {mc} ± {se}");
            }
        }
    }
}

#[test]
fn unit_square_kernel_integral() {
    let sq = ConvexPolygon::new(vec![
        Point2D::new(1.0, 0.0),
        Point2D::new(2.0, 0.0),
        Point2D::new(2.0, 1.0),
        Point2D::new(1.0, 1.0),
    ])
    .unwrap();
    let (mc, se) = rejection_integral(&sq, |x, y| (x * x + y * y).powi(-2), 100_000_000, 77);
    let quad = beta_region(&sq, 4.0, 1.0).unwrap();
    assert!((quad - mc).abs() <= 3.0 * se, "{quad} vs {mc} ± {se}");
    // frozen from the sampling oracle above
    assert!((quad - 0.211_934).abs() < 1e-6);
}

/// Draws of the average-interference SINR `θ Σ_k ξ_k L_k r_k^{-α}`.
fn sinr_draws(cfg: &NetworkConfig, r: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let fit_theta = {
        let i = icri_avg(cfg).unwrap().total.watts();
        cfg.tx_power().watts() / (cfg.noise_power().watts() + i)
    };
    let sz = shadow_scale(cfg.sigma_l_db).sigma_z;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            r.iter()
                .map(|&rk| {
                    let xi: f64 = (0..cfg.m).map(|_| -> f64 { Exp1.sample(&mut rng) }).sum::<f64>();
                    let l = (sz * rng.sample::<f64, _>(StandardNormal)).exp();
                    fit_theta * xi * l * rk.powf(-cfg.alpha)
                })
                .sum()
        })
        .collect()
}

#[test]
fn raw_moments_match_direct_sampling() {
    // interference limited, r = (d, d): γ's no longer depend on d
    let cfg = NetworkConfig { noise_power_dbm: f64::NEG_INFINITY, ..Default::default() };
    let r = [cfg.d_m, cfg.d_m];
    let fit = lognormal_at(&cfg, &r).unwrap();
    let draws = sinr_draws(&cfg, &r, 10_000_000, 5);
    let n = draws.len() as f64;
    let m1 = draws.iter().sum::<f64>() / n;
    let m2 = draws.iter().map(|x| x * x).sum::<f64>() / n;
    assert!((fit.gamma1 / m1 - 1.0).abs() < 0.005, "{} vs {m1}", fit.gamma1);
    assert!((fit.gamma2 / m2 - 1.0).abs() < 0.03, "{} vs {m2}", fit.gamma2);
    // frozen from the sampling oracle, with the quadrature β for (α=4, N=2)
    let beta = beta_total(4.0, CoopOrder::Two, 1).unwrap().total;
    assert!((fit.gamma1 - 2.0 / beta).abs() < 1e-9);
    assert!((fit.gamma1 - 6.0847).abs() < 1e-3);
    assert!((fit.gamma2 - 104.99).abs() < 0.01);
}

#[test]
fn theta_matches_direct_evaluation() {
    let cfg = NetworkConfig::default();
    let beta = beta_total(4.0, CoopOrder::Two, 1).unwrap().total;
    let icri = 0.1 * shadow_scale(4.0).mean_factor * beta * 500f64.powi(-4);
    let theta = 0.1 / (1e-13 + icri);
    let dec = comp_coverage::coverage::decompose(&cfg, &[500.0, 500.0]).unwrap();
    assert!((dec.theta / theta - 1.0).abs() < 1e-12);
    assert!((icri_avg(&cfg).unwrap().total.watts() / icri - 1.0).abs() < 1e-12);
}

/// Composite Simpson rule on `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn ergodic_closed_form_matches_quadrature() {
    for (n, alpha, d, m) in [
        (CoopOrder::Two, 4.0, 1034.0, 1),
        (CoopOrder::Three, 3.0, 500.0, 2),
        (CoopOrder::Two, 3.5, 3000.0, 1),
        (CoopOrder::Three, 4.0, 20_000.0, 1),
    ] {
        let cfg = NetworkConfig { n, alpha, d_m: d, m, ..Default::default() };
        let r: Vec<f64> = (0..n.count()).map(|k| d * (0.8 + 0.2 * k as f64)).collect();
        let fit = lognormal_at(&cfg, &r).unwrap();
        let nn = n.count() as f64;
        let sigma = fit.sigma2.sqrt();
        let upper = (fit.mu + 12.0 * sigma).max(1.0) / (nn * std::f64::consts::LN_2);
        let quad = simpson(
            |c| q_function((nn * c * std::f64::consts::LN_2 - fit.mu) / sigma),
            0.0,
            upper,
            200_000,
        );
        let closed = ergodic_point(&cfg, &r).unwrap();
        assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
    }
}

#[test]
fn sum_ccp_against_sampled_products() {
    let cfg = NetworkConfig::default();
    let r = [cfg.d_m, cfg.d_m];
    // pairing helps while ln T > -√2 μ; c0 = 0.3 sits inside that band
    let q = CoverageQuery::new(0.3).unwrap();
    let t = q.threshold(cfg.n);
    let a = sinr_draws(&cfg, &r, 1_000_000, 11);
    let b = sinr_draws(&cfg, &r, 1_000_000, 12);
    let mc_single = a.iter().filter(|&&x| x > t).count() as f64 / a.len() as f64;
    let mc_pair = a.iter().zip(&b).filter(|(x, y)| *x * *y > t).count() as f64 / a.len() as f64;
    let single = ccp_point(&cfg, &r, q).unwrap();
    let pair = sum_ccp(&cfg, &[r.to_vec(), r.to_vec()], q).unwrap();
    assert!(pair >= single && mc_pair >= mc_single, "{pair} {single} {mc_pair} {mc_single}");
    assert!((pair - mc_pair).abs() < 0.05, "{pair} vs {mc_pair}");
}

#[test]
fn simulated_snr_follows_exponential_law() {
    // reuse 7: no interference, rate (1/7) log2(1 + SNR), user at distance d
    let cfg = NetworkConfig {
        n: CoopOrder::One,
        reuse: 7,
        sigma_l_db: 0.0,
        d_m: 2500.0,
        ..Default::default()
    };
    let c0s = [0.05, 0.1, 0.2, 0.3];
    let est = estimate_ccp_curve(&cfg, UserPosition::WorstCase, &c0s, McOptions::new(200_000, 3)).unwrap();
    for (c0, e) in c0s.iter().zip(est) {
        let t = 2f64.powf(7.0 * c0) - 1.0;
        let exact = (-t * 1e-13 * cfg.d_m.powf(cfg.alpha) / 0.1).exp();
        assert!((e.mean - exact).abs() <= 3.0 * e.stderr.max(1e-4), "c0={c0}: {} vs {exact}", e.mean);
    }
}

#[test]
fn simulated_ergodic_matches_integrated_ccp() {
    let cfg = NetworkConfig::default();
    let opts = McOptions::new(100_000, 8);
    let erg = estimate_ergodic(&cfg, UserPosition::WorstCase, opts).unwrap();
    let step = 0.002;
    let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * step).collect();
    let ccp = estimate_ccp_curve(&cfg, UserPosition::WorstCase, &grid, opts).unwrap();
    assert!(ccp.last().unwrap().mean == 0.0);
    // E X = ∫ P(X > t) dt; right Riemann sum of the step function
    let integral: f64 = ccp[1..].iter().map(|e| e.mean * step).sum();
    assert!((integral - erg.mean).abs() <= 3.0 * erg.stderr + step, "{integral} vs {}", erg.mean);
}

#[test]
fn simulation_sits_above_analytic_at_worst_case() {
    let cfg = NetworkConfig { n: CoopOrder::Three, d_m: 1006.0, ..Default::default() };
    let q = CoverageQuery::new(0.5).unwrap();
    let mc = estimate_ccp(&cfg, UserPosition::Centroid, q, McOptions::new(100_000, 4)).unwrap();
    let an = worst_case_ccp(&cfg, q).unwrap();
    assert!(an <= mc.mean + 3.0 * mc.stderr, "{an} vs {}", mc.mean);
}
