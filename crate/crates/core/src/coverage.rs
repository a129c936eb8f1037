//! Moment-matched lognormal SINR model and the coverage metrics built on it.
//!
//! Under average interference the SINR of a user served by `N` cooperating
//! BSs with `M` antennas each is `θ Σ_k ξ_k z_k`, with `ξ_k ~ Gamma(M, 1)`
//! small-scale gain and `z_k = L_k r_k^{-α}` lognormal large-scale gain.
//! The sum is replaced by a single lognormal with the same first two raw
//! moments.

use serde::Serialize;
use std::f64::consts::LN_2;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geometry::{distances, home_region, CoopRegion, Point2D};
use crate::icri::icri_avg;
use crate::units::{normal_pdf, q_function, CoopOrder, NetworkConfig};

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of probabilities clamped into `[0, 1]` since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

fn clamp_probability(p: f64) -> f64 {
    if (0.0..=1.0).contains(&p) {
        p
    } else {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        p.clamp(0.0, 1.0)
    }
}

/// Large-scale term of one cooperating BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsTerm {
    pub r_m: f64,
    /// Log-mean of `z_k`, `-α ln r_k`.
    pub mu_z: f64,
    pub sigma_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrDecomposition {
    /// Gamma shape of each `ξ_k`, equal to the antenna count.
    pub kappa: u32,
    /// Effective SNR scale `σ_s² / (σ_n² + Î)`.
    pub theta: f64,
    pub terms: Vec<BsTerm>,
}

impl SinrDecomposition {
    /// Scale of the chi-square form `ξ_k = c χ²(2M)`.
    pub fn c(&self) -> f64 {
        self.theta / 2.0
    }
}

/// Splits the SINR at BS distances `r` (meters) into gamma and lognormal parts.
pub fn decompose(cfg: &NetworkConfig, r: &[f64]) -> Result<SinrDecomposition> {
    cfg.validate()?;
    if r.len() != cfg.n.count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} distances, got {}",
            cfg.n.count(),
            r.len()
        )));
    }
    if let Some(&bad) = r.iter().find(|&&rk| !(rk > 0.0 && rk.is_finite())) {
        return Err(Error::InvalidArgument(format!("distance must be positive, got {bad}")));
    }
    let interference = if cfg.n.is_cooperative() { icri_avg(cfg)?.total.watts() } else { 0.0 };
    let theta = cfg.tx_power().watts() / (cfg.noise_power().watts() + interference);
    let sigma_z = cfg.shadow().sigma_z;
    let terms = r
        .iter()
        .map(|&r_m| BsTerm { r_m, mu_z: -cfg.alpha * r_m.ln(), sigma_z })
        .collect();
    Ok(SinrDecomposition { kappa: cfg.m, theta, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LognormalSinr {
    pub mu: f64,
    pub sigma2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl LognormalSinr {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// First and second raw moments of the SINR and the lognormal sharing them.
pub fn moment_match(dec: &SinrDecomposition) -> Result<LognormalSinr> {
    let m = dec.kappa as f64;
    let theta = dec.theta;
    // E z_k = e^{μ_k + σ²/2}, E z_k² = e^{2μ_k + 2σ²}
    let ez: Vec<f64> = dec
        .terms
        .iter()
        .map(|t| (t.mu_z + 0.5 * t.sigma_z * t.sigma_z).exp())
        .collect();
    let ez2: Vec<f64> = dec
        .terms
        .iter()
        .map(|t| (2.0 * t.mu_z + 2.0 * t.sigma_z * t.sigma_z).exp())
        .collect();
    let s1: f64 = ez.iter().sum();
    let s2: f64 = ez2.iter().sum();
    let cross: f64 = s1 * s1 - ez.iter().map(|e| e * e).sum::<f64>();
    let gamma1 = m * theta * s1;
    // E ξ = Mθ, E ξ² = M(M+1)θ²
    let gamma2 = m * (m + 1.0) * theta * theta * s2 + m * m * theta * theta * cross;
    let sigma2 = gamma2.ln() - 2.0 * gamma1.ln();
    if !(gamma1 > 0.0 && gamma1.is_finite() && gamma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::DegenerateMoments { gamma1_sq: gamma1 * gamma1, gamma2 });
    }
    let mu = 2.0 * gamma1.ln() - 0.5 * gamma2.ln();
    Ok(LognormalSinr { mu, sigma2, gamma1, gamma2 })
}

/// Lognormal fit at BS distances `r`.
pub fn lognormal_at(cfg: &NetworkConfig, r: &[f64]) -> Result<LognormalSinr> {
    moment_match(&decompose(cfg, r)?)
}

/// Target per-user capacity `c0` in b/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageQuery {
    pub c0: f64,
}

impl CoverageQuery {
    pub fn new(c0: f64) -> Result<Self> {
        if !(c0 >= 0.0 && c0.is_finite()) {
            return Err(Error::InvalidArgument(format!("c0 must be finite and >= 0, got {c0}")));
        }
        Ok(CoverageQuery { c0 })
    }

    /// SINR threshold `2^{N c0} - 1` for a cluster of `n` BSs.
    pub fn threshold(&self, n: CoopOrder) -> f64 {
        (n.count() as f64 * self.c0 * LN_2).exp_m1()
    }
}

fn ccp_from_fit(fit: &LognormalSinr, n: CoopOrder, q: CoverageQuery) -> f64 {
    if q.c0 == 0.0 {
        return 1.0;
    }
    clamp_probability(q_function((q.threshold(n).ln() - fit.mu) / fit.sigma()))
}

/// Capacity coverage probability at BS distances `r`.
pub fn ccp_point(cfg: &NetworkConfig, r: &[f64], q: CoverageQuery) -> Result<f64> {
    Ok(ccp_from_fit(&lognormal_at(cfg, r)?, cfg.n, q))
}

/// Ergodic capacity of the fitted lognormal with `ln(2^{NC}-1)` replaced by
/// `NC ln 2`, in closed form.
pub fn ergodic_from_fit(fit: &LognormalSinr, n: CoopOrder) -> f64 {
    let sigma = fit.sigma();
    let x = fit.mu / sigma;
    let scale = sigma / (n.count() as f64 * LN_2);
    // x (1 - Q(x)) + φ(x) ≥ 0, the integral of Q from -x to ∞
    let bracket = if x >= 0.0 {
        x + (normal_pdf(x) - x * q_function(x))
    } else {
        normal_pdf(x) - (-x) * q_function(-x)
    };
    (scale * bracket).max(0.0)
}

/// Ergodic capacity (b/s/Hz) at BS distances `r`.
pub fn ergodic_point(cfg: &NetworkConfig, r: &[f64]) -> Result<f64> {
    Ok(ergodic_from_fit(&lognormal_at(cfg, r)?, cfg.n))
}

/// Ergodic capacity keeping the exact `ln(2^{NC}-1)` threshold, by quadrature.
/// Measures the gap introduced by the closed form.
pub fn ergodic_point_exact(cfg: &NetworkConfig, r: &[f64]) -> Result<f64> {
    let fit = lognormal_at(cfg, r)?;
    let n = cfg.n.count() as f64;
    let sigma = fit.sigma();
    let tail = (fit.mu + 40.0 * sigma).max(1.0) / (n * LN_2);
    let f = |c: f64| {
        if c <= 0.0 {
            1.0
        } else {
            q_function(((n * c * LN_2).exp_m1().ln() - fit.mu) / sigma)
        }
    };
    Ok(gauss_legendre_panels(f, 0.0, tail, 4096))
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn gauss_legendre_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = crate::units::CompensatedSum::new();
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in &GL8 {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        acc.add(s * half);
    }
    acc.value()
}

/// Probability that the product of per-user `1 + SINR` terms clears the
/// threshold, users given as BS-distance vectors.
pub fn sum_ccp(cfg: &NetworkConfig, users: &[Vec<f64>], q: CoverageQuery) -> Result<f64> {
    if users.is_empty() {
        return Err(Error::InvalidArgument("sum_ccp needs at least one user".into()));
    }
    let fits = users
        .iter()
        .map(|r| lognormal_at(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    if q.c0 == 0.0 {
        return Ok(1.0);
    }
    let mu: f64 = fits.iter().map(|f| f.mu).sum();
    let sigma2: f64 = fits.iter().map(|f| f.sigma2).sum();
    Ok(clamp_probability(q_function((q.threshold(cfg.n).ln() - mu) / sigma2.sqrt())))
}

fn worst_case_distances(cfg: &NetworkConfig) -> Result<Vec<f64>> {
    if !cfg.n.is_cooperative() {
        return Err(Error::UnsupportedOrder(1));
    }
    Ok(vec![cfg.d_m; cfg.n.count()])
}

/// CCP at the worst-case point, where every cooperating BS is `d` away.
pub fn worst_case_ccp(cfg: &NetworkConfig, q: CoverageQuery) -> Result<f64> {
    ccp_point(cfg, &worst_case_distances(cfg)?, q)
}

/// Ergodic capacity at the worst-case point.
pub fn worst_case_ergodic(cfg: &NetworkConfig) -> Result<f64> {
    ergodic_point(cfg, &worst_case_distances(cfg)?)
}

/// Points and weights of a centroid rule over the polygon: fan-triangulate,
/// split each triangle into `res²` congruent sub-triangles, one node each.
pub fn area_rule(cr: &CoopRegion, res: usize) -> Vec<(Point2D, f64)> {
    let v = cr.polygon.vertices();
    let total = cr.polygon.area();
    let mut nodes = Vec::new();
    for k in 1..v.len() - 1 {
        let (a, b, c) = (v[0], v[k], v[k + 1]);
        let area = 0.5 * (b - a).cross(c - a).abs();
        let w = area / (res * res) as f64 / total;
        let (e1, e2) = ((b - a) * (1.0 / res as f64), (c - a) * (1.0 / res as f64));
        for i in 0..res {
            for j in 0..res - i {
                let base = a + e1 * i as f64 + e2 * j as f64;
                // upright sub-triangle (base, base+e1, base+e2)
                nodes.push((base + (e1 + e2) * (1.0 / 3.0), w));
                if i + j + 1 < res {
                    // inverted sub-triangle (base+e1, base+e1+e2, base+e2)
                    nodes.push((base + (e1 * 2.0 + e2 * 2.0) * (1.0 / 3.0), w));
                }
            }
        }
    }
    nodes
}

/// CCP averaged over a uniformly distributed user in the home region.
pub fn average_ccp(cfg: &NetworkConfig, q: CoverageQuery, resolution: usize) -> Result<f64> {
    if resolution < 32 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 32, got {resolution}"
        )));
    }
    let cr = home_region(cfg)?;
    let vals = area_rule(&cr, resolution)
        .into_iter()
        .map(|(p, w)| Ok(w * ccp_point(cfg, &distances(p, &cr)?, q)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(clamp_probability(crate::units::compensated_sum(vals)))
}

/// True when average ICRI exceeds noise by more than `ratio` (strict).
pub fn interference_limited(cfg: &NetworkConfig, ratio: f64) -> Result<bool> {
    let icri = icri_avg(cfg)?.total.watts();
    let noise = cfg.noise_power().watts();
    Ok(icri / noise > ratio)
}

pub const DEFAULT_INTERFERENCE_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcpMapRow {
    pub x_m: f64,
    pub y_m: f64,
    pub r_m: Vec<f64>,
    pub ccp: f64,
    pub ergodic_bps_hz: f64,
}

/// Metrics on a `res × res` grid of cell centers over the bounding box of
/// the home region; cells whose center lies outside are skipped.
pub fn ccp_map(cfg: &NetworkConfig, q: CoverageQuery, res: usize) -> Result<Vec<CcpMapRow>> {
    if res == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    let cr = home_region(cfg)?;
    let v = cr.polygon.vertices();
    let (x0, x1) = v.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let (dx, dy) = ((x1 - x0) / res as f64, (y1 - y0) / res as f64);
    let mut rows = Vec::new();
    for iy in 0..res {
        for ix in 0..res {
            let p = Point2D::new(x0 + (ix as f64 + 0.5) * dx, y0 + (iy as f64 + 0.5) * dy);
            if !cr.polygon.contains(p) {
                continue;
            }
            let r = distances(p, &cr)?;
            let fit = lognormal_at(cfg, &r)?;
            rows.push(CcpMapRow {
                x_m: p.x,
                y_m: p.y,
                ccp: ccp_from_fit(&fit, cfg.n, q),
                ergodic_bps_hz: ergodic_from_fit(&fit, cfg.n),
                r_m: r,
            });
        }
    }
    Ok(rows)
}
