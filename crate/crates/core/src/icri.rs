//! Average inter-cooperation-region interference (ICRI).
//!
//! Each co-channel region contributes `σ_s² e^{σ_z²/2} β_j d^{-α}`, where
//! `β_j = (1/A_CR) ∬_region (x² + y²)^{-α/2} dx dy` in units of `d`. The
//! integral is evaluated by adaptive quadrature over a centroid fan of each
//! polygon, so any path-loss exponent above 2 is handled the same way.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::{interference_layout_at, region_area_normalized, canonical_color,
    ConvexPolygon, InterferenceLayout, LatticeIndex, Point2D};
use crate::units::{compensated_sum, CoopOrder, NetworkConfig, PowerW};

/// Absolute error budget for a single region integral (before division by
/// the region area).
const REGION_ABS_TOL: f64 = 1e-11;
const MAX_DEPTH: u32 = 24;

// Dunavant degree-5 rule, barycentric (a, b, b) orbits.
const RULE: [(f64, f64, f64); 3] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
    (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
];

#[derive(Clone, Copy)]
struct Tri([Point2D; 3]);

impl Tri {
    fn area(&self) -> f64 {
        0.5 * (self.0[1] - self.0[0]).cross(self.0[2] - self.0[0]).abs()
    }

    fn at(&self, l0: f64, l1: f64, l2: f64) -> Point2D {
        self.0[0] * l0 + self.0[1] * l1 + self.0[2] * l2
    }

    fn rule(&self, f: &impl Fn(Point2D) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, &(a, b, w)) in RULE.iter().enumerate() {
            if k == 0 {
                acc += w * f(self.at(a, a, a));
            } else {
                let s = f(self.at(a, b, b)) + f(self.at(b, a, b)) + f(self.at(b, b, a));
                acc += w * s;
            }
        }
        acc * self.area()
    }

    fn split(&self) -> [Tri; 4] {
        let [a, b, c] = self.0;
        let ab = (a + b) * 0.5;
        let bc = (b + c) * 0.5;
        let ca = (c + a) * 0.5;
        [Tri([a, ab, ca]), Tri([ab, b, bc]), Tri([ca, bc, c]), Tri([ab, bc, ca])]
    }
}

fn adaptive(tri: Tri, coarse: f64, f: &impl Fn(Point2D) -> f64, tol: f64, depth: u32) -> Result<f64> {
    let kids = tri.split();
    let parts: Vec<f64> = kids.iter().map(|k| k.rule(f)).collect();
    let fine: f64 = parts.iter().sum();
    let err = (fine - coarse).abs();
    if err <= tol {
        return Ok(fine);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureDiverged { estimate: err });
    }
    let mut total = 0.0;
    for (k, p) in kids.into_iter().zip(parts) {
        total += adaptive(k, p, f, tol / 4.0, depth + 1)?;
    }
    Ok(total)
}

/// Adaptive integral of `f` over a convex polygon to absolute tolerance `tol`.
pub fn integrate_polygon(
    poly: &ConvexPolygon,
    f: impl Fn(Point2D) -> f64,
    tol: f64,
) -> Result<f64> {
    let c = poly.centroid();
    let fan: Vec<Tri> = poly.edges().map(|(a, b)| Tri([c, a, b])).collect();
    let per = tol / fan.len() as f64;
    let parts = fan
        .into_iter()
        .map(|t| adaptive(t, t.rule(&f), &f, per, 0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(parts))
}

/// Path-loss kernel `(x² + y²)^{-α/2}`.
pub fn kernel(p: Point2D, alpha: f64) -> f64 {
    (p.x * p.x + p.y * p.y).powf(-0.5 * alpha)
}

/// Normalized ICRI coefficient of one region (units of `d`).
pub fn beta_region(poly: &ConvexPolygon, alpha: f64, a_cr_normalized: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::InvalidArgument(format!("alpha must exceed 2, got {alpha}")));
    }
    if !(a_cr_normalized > 0.0) {
        return Err(Error::InvalidArgument("region area must be positive".into()));
    }
    if poly.contains(Point2D::ORIGIN) {
        return Err(Error::SingularKernel);
    }
    let integral = integrate_polygon(poly, |p| kernel(p, alpha), REGION_ABS_TOL)?;
    Ok(integral / a_cr_normalized)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBeta {
    pub tier: u8,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcriCoefficients {
    pub per_region: Vec<RegionBeta>,
    /// `β(α, N)`, sum over all modeled regions.
    pub total: f64,
    pub alpha: f64,
    pub n: CoopOrder,
    pub tiers: u8,
}

impl IcriCoefficients {
    pub fn tier_sum(&self, tier: u8) -> f64 {
        compensated_sum(self.per_region.iter().filter(|r| r.tier == tier).map(|r| r.beta))
    }
}

/// `β` coefficients for an explicit layout.
pub fn beta_for_layout(layout: &InterferenceLayout, alpha: f64) -> Result<IcriCoefficients> {
    let area = region_area_normalized(layout.n)?;
    let per_region = layout
        .regions
        .par_iter()
        .map(|r| Ok(RegionBeta { tier: r.tier, beta: beta_region(&r.polygon, alpha, area)? }))
        .collect::<Result<Vec<_>>>()?;
    let total = compensated_sum(per_region.iter().map(|r| r.beta));
    Ok(IcriCoefficients { per_region, total, alpha, n: layout.n, tiers: layout.tiers })
}

type CacheKey = (u64, CoopOrder, u8);

fn cache() -> &'static Mutex<HashMap<CacheKey, IcriCoefficients>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, IcriCoefficients>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `β(α, N)` over the canonical layout, memoized per `(α, N, tiers)`.
pub fn beta_total(alpha: f64, n: CoopOrder, tiers: u8) -> Result<IcriCoefficients> {
    let key = (alpha.to_bits(), n, tiers);
    if let Some(hit) = cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let layout = interference_layout_at(n, tiers, LatticeIndex::ORIGIN, canonical_color(n)?)?;
    let coeffs = beta_for_layout(&layout, alpha)?;
    cache().lock().unwrap().insert(key, coeffs.clone());
    Ok(coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcriResult {
    /// `Î_total^avg(d)` per receive antenna.
    pub total: PowerW,
    /// Breakdown indexed by tier (tier 1 first).
    pub per_tier: Vec<PowerW>,
    pub beta: IcriCoefficients,
    pub d_m: f64,
}

/// Average total ICRI per receive antenna, `σ_s² e^{σ_z²/2} β(α, N) d^{-α}`.
pub fn icri_avg(cfg: &NetworkConfig) -> Result<IcriResult> {
    cfg.validate()?;
    let beta = beta_total(cfg.alpha, cfg.n, cfg.tiers)?;
    let scale = cfg.tx_power().watts() * cfg.shadow().mean_factor * cfg.d_m.powf(-cfg.alpha);
    let per_tier: Vec<PowerW> = (1..=cfg.tiers)
        .map(|t| PowerW::new(scale * beta.tier_sum(t)))
        .collect::<Result<_>>()?;
    let total = PowerW::new(scale * beta.total)?;
    Ok(IcriResult { total, per_tier, beta, d_m: cfg.d_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point2D::new(1.0, 0.0),
            Point2D::new(2.0, 0.0),
            Point2D::new(2.0, 1.0),
            Point2D::new(1.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn polynomial_exactness() {
        // degree-5 rule integrates x^2 y^2 exactly on any triangle
        let v = integrate_polygon(&square(), |p| p.x * p.x * p.y * p.y, 1e-14).unwrap();
        assert!((v - 7.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn unit_square_alpha4() {
        // closed form: ∫∫_[1,2]x[0,1] (x²+y²)^-2
        // inner y-integral in closed form, outer x-integral by composite Simpson
        let inner = |x: f64| 1.0 / (2.0 * x * x * (1.0 + x * x)) + (1.0 / x).atan() / (2.0 * x.powi(3));
        let n = 20_000;
        let h = 1.0 / n as f64;
        let exact = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                w * inner(1.0 + k as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        let b = beta_region(&square(), 4.0, 1.0).unwrap();
        assert!((b - exact).abs() < 1e-10, "{b} vs {exact}");
        assert!((b - 0.211_933_926_7).abs() < 1e-9);
    }

    #[test]
    fn homogeneity() {
        let sq = square();
        let far = sq.scale(10.0);
        let near = beta_region(&sq, 4.0, 1.0).unwrap();
        // area grows by 100, kernel shrinks by 10^-4
        let far_b = beta_region(&far, 4.0, 1.0).unwrap();
        assert!((far_b / near - 1e-2).abs() < 1e-9);
    }

    #[test]
    fn singular_kernel_rejected() {
        let around = square().translate(Point2D::new(-1.5, -0.5));
        assert!(matches!(beta_region(&around, 4.0, 1.0), Err(Error::SingularKernel)));
        assert!(beta_region(&square(), 2.0, 1.0).is_err());
    }

    #[test]
    fn icri_scaling_in_d() {
        let cfg = NetworkConfig::default();
        let a = icri_avg(&cfg).unwrap().total.watts();
        let b = icri_avg(&cfg.with_side(2.0 * cfg.d_m)).unwrap().total.watts();
        assert!((b / a - 2f64.powf(-cfg.alpha)).abs() < 1e-15);
    }

    #[test]
    fn icri_without_shadowing() {
        let cfg = NetworkConfig { sigma_l_db: 0.0, ..Default::default() };
        let r = icri_avg(&cfg).unwrap();
        let expect = cfg.tx_power().watts() * r.beta.total * cfg.d_m.powf(-cfg.alpha);
        assert_eq!(r.total.watts(), expect);
    }

    #[test]
    fn per_tier_sums_to_total() {
        let cfg = NetworkConfig { tiers: 2, ..Default::default() };
        let r = icri_avg(&cfg).unwrap();
        let s: f64 = r.per_tier.iter().map(|p| p.watts()).sum();
        assert!((s / r.total.watts() - 1.0).abs() < 1e-12);
        assert!(r.beta.per_region.iter().all(|b| b.beta > 0.0));
    }

    #[test]
    fn two_tier_one_regions_by_symmetry() {
        // the two regions touching neighbor BSs off-axis mirror each other
        let c = beta_total(4.0, CoopOrder::Two, 1).unwrap();
        let mut b: Vec<f64> = c.per_region.iter().map(|r| r.beta).collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let paired = b.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-10);
        assert!(paired, "{b:?}");
    }
}
