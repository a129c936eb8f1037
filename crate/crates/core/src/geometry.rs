//! Hexagonal BS lattice, cooperation-region tessellation, reuse-6 coloring
//! and the tiered co-channel interference layout.
//!
//! Frame: BS lattice generated by `a1 = d(3/2, √3/2)` and `a2 = d(0, √3)`,
//! so hexagons are flat-topped with a vertex at `(d, 0)` when the home BS
//! sits at the origin. Lattice indices `(i, j)` map to `i·a1 + j·a2`.
//!
//! * N = 2: one diamond per lattice edge, spanned by the two BSs of the edge
//!   and the two hexagon vertices shared by their cells.
//! * N = 3: one triangle per lattice face, with its three BSs as vertices.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::units::{CoopOrder, NetworkConfig};

const SQRT3: f64 = 1.732_050_807_568_877_2;
/// Relative slack used for boundary and tier-threshold comparisons.
const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Point2D) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2D) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn distance(self, o: Point2D) -> f64 {
        (self - o).norm()
    }

    pub fn rotate(self, angle: f64) -> Point2D {
        let (s, c) = angle.sin_cos();
        Point2D::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn approx_eq(self, o: Point2D, tol: f64) -> bool {
        (self - o).norm() <= tol
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, o: Point2D) -> Point2D {
        Point2D::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, o: Point2D) -> Point2D {
        Point2D::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, s: f64) -> Point2D {
        Point2D::new(self.x * s, self.y * s)
    }
}

/// Strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2D>", into = "Vec<Point2D>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2D>,
}

impl TryFrom<Vec<Point2D>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<Point2D>) -> Result<Self> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2D> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Accepts either orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point2D>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polygon vertex".into()));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let area = signed_area(&vertices);
        let scale = vertices.iter().map(|p| p.norm()).fold(1e-300, f64::max);
        if !(area > GEOM_EPS * scale * scale) {
            return Err(Error::InvalidArgument("polygon has no area".into()));
        }
        let n = vertices.len();
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            let turn = (b - a).cross(c - b);
            if !(turn > GEOM_EPS * (b - a).norm() * (c - b).norm()) {
                return Err(Error::InvalidArgument(
                    "polygon is not strictly convex".into(),
                ));
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2D {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let w = a.cross(b);
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let six_a = 6.0 * self.area();
        Point2D::new(cx / six_a, cy / six_a)
    }

    fn diameter_scale(&self) -> f64 {
        self.area().sqrt()
    }

    /// Boundary points count as inside.
    pub fn contains(&self, p: Point2D) -> bool {
        let tol = GEOM_EPS * self.diameter_scale().max(p.norm());
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(p - a) >= -tol * e.norm()
        })
    }

    /// Euclidean distance from `p` to the closed polygon (zero inside).
    pub fn distance_to(&self, p: Point2D) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(Point2D) -> Point2D) -> ConvexPolygon {
        let mut vertices: Vec<Point2D> = self.vertices.iter().map(|&p| f(p)).collect();
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }

    pub fn translate(&self, by: Point2D) -> ConvexPolygon {
        self.map(|p| p + by)
    }

    pub fn scale(&self, s: f64) -> ConvexPolygon {
        assert!(s > 0.0);
        self.map(|p| p * s)
    }

    /// Intersection with another convex polygon (Sutherland-Hodgman), or
    /// `None` when the overlap has no area.
    pub fn intersection(&self, clip: &ConvexPolygon) -> Option<ConvexPolygon> {
        let mut out = self.vertices.clone();
        for (a, b) in clip.edges() {
            if out.is_empty() {
                break;
            }
            let e = b - a;
            let side = |p: Point2D| e.cross(p - a);
            let input = std::mem::take(&mut out);
            let m = input.len();
            for k in 0..m {
                let cur = input[k];
                let prev = input[(k + m - 1) % m];
                let (sc, sp) = (side(cur), side(prev));
                if sc >= 0.0 {
                    if sp < 0.0 {
                        out.push(line_cross(prev, cur, sp, sc));
                    }
                    out.push(cur);
                } else if sp >= 0.0 {
                    out.push(line_cross(prev, cur, sp, sc));
                }
            }
        }
        dedup_close(&mut out, GEOM_EPS * self.diameter_scale());
        if out.len() < 3 || signed_area(&out) <= 0.0 {
            return None;
        }
        Some(ConvexPolygon { vertices: out })
    }

    /// Area of the overlap with `other` (zero when disjoint).
    pub fn overlap_area(&self, other: &ConvexPolygon) -> f64 {
        self.intersection(other).map_or(0.0, |p| p.area())
    }

    /// Same vertex set up to cyclic order, within `tol`.
    pub fn same_shape(&self, other: &ConvexPolygon, tol: f64) -> bool {
        self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .all(|p| other.vertices.iter().any(|q| p.approx_eq(*q, tol)))
    }
}

fn signed_area(v: &[Point2D]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|k| v[k].cross(v[(k + 1) % n])).sum::<f64>()
}

fn segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let e = b - a;
    let t = ((p - a).dot(e) / e.dot(e)).clamp(0.0, 1.0);
    p.distance(a + e * t)
}

fn line_cross(p: Point2D, q: Point2D, sp: f64, sq: f64) -> Point2D {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

fn dedup_close(v: &mut Vec<Point2D>, tol: f64) {
    let mut out: Vec<Point2D> = Vec::with_capacity(v.len());
    for &p in v.iter() {
        if out.last().is_none_or(|q| !q.approx_eq(p, tol)) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].approx_eq(*out.last().unwrap(), tol) {
        out.pop();
    }
    *v = out;
}

/// Flat-topped regular hexagon with side `d` centered on `center`.
pub fn hexagon(center: Point2D, d: f64) -> ConvexPolygon {
    let vertices = (0..6)
        .map(|k| center + Point2D::new(d, 0.0).rotate(k as f64 * PI / 3.0))
        .collect();
    ConvexPolygon::new(vertices).expect("regular hexagon is convex")
}

/// Integer coordinates of a BS on the hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub i: i64,
    pub j: i64,
}

impl LatticeIndex {
    pub const ORIGIN: LatticeIndex = LatticeIndex { i: 0, j: 0 };

    pub const fn new(i: i64, j: i64) -> Self {
        LatticeIndex { i, j }
    }

    /// Position in units of `d`.
    pub fn position(self) -> Point2D {
        Point2D::new(1.5 * self.i as f64, 0.5 * SQRT3 * self.i as f64 + SQRT3 * self.j as f64)
    }

    /// Number of cell hops from the origin BS.
    pub fn ring(self) -> i64 {
        (self.i.abs() + self.j.abs() + (self.i + self.j).abs()) / 2
    }

    pub fn offset(self, di: i64, dj: i64) -> LatticeIndex {
        LatticeIndex::new(self.i + di, self.j + dj)
    }
}

/// Lattice directions `a1`, `a2`, `a2 - a1` (30°, 90°, 150°).
const EDGE_DIRS: [(i64, i64); 3] = [(1, 0), (0, 1), (-1, 1)];

/// Identity of a cooperation region on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKey {
    /// Diamond on the lattice edge from `from` along `EDGE_DIRS[dir]`.
    Edge { from: LatticeIndex, dir: u8 },
    /// Triangle `(p, p + a1, p + a2)`.
    Up(LatticeIndex),
    /// Triangle `(p + a1, p + a1 + a2, p + a2)`.
    Down(LatticeIndex),
}

impl RegionKey {
    pub fn anchors(self) -> Vec<LatticeIndex> {
        match self {
            RegionKey::Edge { from, dir } => {
                let (di, dj) = EDGE_DIRS[dir as usize];
                vec![from, from.offset(di, dj)]
            }
            RegionKey::Up(p) => vec![p, p.offset(1, 0), p.offset(0, 1)],
            RegionKey::Down(p) => vec![p.offset(1, 0), p.offset(1, 1), p.offset(0, 1)],
        }
    }

    /// Region polygon in units of `d`.
    pub fn polygon(self) -> ConvexPolygon {
        let anchors: Vec<Point2D> = self.anchors().into_iter().map(|a| a.position()).collect();
        match self {
            RegionKey::Edge { .. } => {
                let (p, q) = (anchors[0], anchors[1]);
                let mid = (p + q) * 0.5;
                let e = q - p;
                // hexagon vertices sit d/2 either side of the BS-BS midpoint
                let perp = Point2D::new(-e.y, e.x) * (0.5 / e.norm());
                ConvexPolygon::new(vec![p, mid - perp, q, mid + perp])
                    .expect("diamond is convex")
            }
            RegionKey::Up(_) | RegionKey::Down(_) => {
                ConvexPolygon::new(anchors).expect("triangle is convex")
            }
        }
    }

    /// Reuse-6 color in `1..=6` from the periodic lattice pattern.
    ///
    /// Diamonds: two colors per edge direction, alternating along the
    /// direction. Triangles: three colors cycling over up faces and three
    /// over down faces.
    pub fn reuse6_color(self) -> u8 {
        match self {
            RegionKey::Edge { from, dir } => {
                let coord = match dir {
                    0 | 2 => from.i,
                    _ => from.j,
                };
                1 + 2 * dir + coord.rem_euclid(2) as u8
            }
            RegionKey::Up(p) => 1 + (p.i + 2 * p.j).rem_euclid(3) as u8,
            RegionKey::Down(p) => 4 + (p.i + 2 * p.j).rem_euclid(3) as u8,
        }
    }

    /// All regions of order `n` having `bs` as an anchor.
    pub fn incident(n: CoopOrder, bs: LatticeIndex) -> Result<Vec<RegionKey>> {
        Ok(match n {
            CoopOrder::Two => {
                let mut out = Vec::with_capacity(6);
                for (dir, (di, dj)) in EDGE_DIRS.iter().enumerate() {
                    out.push(RegionKey::Edge { from: bs, dir: dir as u8 });
                    out.push(RegionKey::Edge {
                        from: bs.offset(-di, -dj),
                        dir: dir as u8,
                    });
                }
                out
            }
            CoopOrder::Three => vec![
                RegionKey::Up(bs),
                RegionKey::Up(bs.offset(-1, 0)),
                RegionKey::Up(bs.offset(0, -1)),
                RegionKey::Down(bs.offset(-1, 0)),
                RegionKey::Down(bs.offset(-1, -1)),
                RegionKey::Down(bs.offset(0, -1)),
            ],
            CoopOrder::One => return Err(Error::UnsupportedOrder(1)),
        })
    }
}

/// A cooperation region in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoopRegion {
    pub key: RegionKey,
    pub polygon: ConvexPolygon,
    pub anchors: Vec<Point2D>,
    /// Reuse color in `1..=6`, `None` before coloring.
    pub color: Option<u8>,
}

impl CoopRegion {
    pub fn from_key(key: RegionKey, d: f64) -> CoopRegion {
        CoopRegion {
            key,
            polygon: key.polygon().scale(d),
            anchors: key.anchors().into_iter().map(|a| a.position() * d).collect(),
            color: None,
        }
    }

    pub fn order(&self) -> usize {
        self.anchors.len()
    }

    /// Distances from `p` to each anchor BS.
    pub fn distances(&self, p: Point2D) -> Result<Vec<f64>> {
        distances(p, self)
    }

    /// Points minimizing the coverage probability: the two non-BS vertices
    /// of a diamond, or the centroid of a triangle.
    pub fn worst_case_points(&self) -> Vec<Point2D> {
        match self.key {
            RegionKey::Edge { .. } => self
                .polygon
                .vertices()
                .iter()
                .copied()
                .filter(|v| !self.anchors.iter().any(|a| a.approx_eq(*v, 1e-9 * v.norm().max(1.0))))
                .collect(),
            _ => vec![self.polygon.centroid()],
        }
    }
}

/// Canonical region area in units of `d²`.
pub fn region_area_normalized(n: CoopOrder) -> Result<f64> {
    match n {
        CoopOrder::Two => Ok(0.5 * SQRT3),
        CoopOrder::Three => Ok(0.75 * SQRT3),
        CoopOrder::One => Err(Error::UnsupportedOrder(1)),
    }
}

pub const HEXAGON_AREA_NORMALIZED: f64 = 1.5 * SQRT3;

fn require_coop(n: CoopOrder) -> Result<()> {
    if n.is_cooperative() {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(1))
    }
}

/// All BS indices within `extent` rings of the origin.
pub fn lattice_ball(extent: i64) -> Vec<LatticeIndex> {
    let mut out = Vec::new();
    for i in -extent..=extent {
        for j in -extent..=extent {
            let idx = LatticeIndex::new(i, j);
            if idx.ring() <= extent {
                out.push(idx);
            }
        }
    }
    out
}

/// Cooperation regions whose anchors all lie within `extent` rings of the
/// origin BS. Uncolored.
pub fn build_tessellation(cfg: &NetworkConfig, extent: u32) -> Result<Vec<CoopRegion>> {
    require_coop(cfg.n)?;
    if extent < 1 {
        return Err(Error::InsufficientExtent("extent must be at least 1".into()));
    }
    let extent = extent as i64;
    let mut keys = Vec::new();
    for p in lattice_ball(extent) {
        let candidates: Vec<RegionKey> = match cfg.n {
            CoopOrder::Two => (0..3).map(|dir| RegionKey::Edge { from: p, dir }).collect(),
            _ => vec![RegionKey::Up(p), RegionKey::Down(p)],
        };
        for key in candidates {
            if key.anchors().iter().all(|a| a.ring() <= extent) {
                keys.push(key);
            }
        }
    }
    Ok(keys
        .into_iter()
        .map(|k| CoopRegion::from_key(k, cfg.d_m))
        .collect())
}

/// Assigns the periodic reuse-6 pattern. Needs at least one complete star
/// of six regions around some BS so the pattern is verifiable.
pub fn color_reuse6(regions: Vec<CoopRegion>) -> Result<Vec<CoopRegion>> {
    let n = match regions.first().map(|r| r.order()) {
        Some(2) => CoopOrder::Two,
        Some(3) => CoopOrder::Three,
        Some(k) => return Err(Error::UnsupportedOrder(k)),
        None => return Err(Error::InsufficientExtent("no regions".into())),
    };
    let keys: std::collections::HashSet<RegionKey> = regions.iter().map(|r| r.key).collect();
    let has_star = regions.iter().flat_map(|r| r.key.anchors()).any(|bs| {
        RegionKey::incident(n, bs)
            .map(|inc| inc.iter().all(|k| keys.contains(k)))
            .unwrap_or(false)
    });
    if !has_star {
        return Err(Error::InsufficientExtent(
            "no BS has all six incident regions".into(),
        ));
    }
    Ok(regions
        .into_iter()
        .map(|mut r| {
            r.color = Some(r.key.reuse6_color());
            r
        })
        .collect())
}

/// One co-channel region as seen from a BS, in units of `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieredRegion {
    pub tier: u8,
    pub polygon: ConvexPolygon,
    /// Closest distance from the home BS, units of `d`.
    pub distance: f64,
}

/// Co-channel regions around a BS, home BS at the origin and lengths in
/// units of `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceLayout {
    pub n: CoopOrder,
    pub tiers: u8,
    pub color: u8,
    /// The home BS's own region of this color.
    pub home: ConvexPolygon,
    pub home_anchors: Vec<Point2D>,
    pub regions: Vec<TieredRegion>,
}

impl InterferenceLayout {
    pub fn tier(&self, t: u8) -> impl Iterator<Item = &TieredRegion> {
        self.regions.iter().filter(move |r| r.tier == t)
    }

    pub fn count(&self, t: u8) -> usize {
        self.tier(t).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Tier of a region whose nearest point is `dist` (units of `d`) from the BS.
/// Tier 1 reaches the adjacent-BS spacing √3, tier 2 twice that.
pub fn tier_of(dist: f64) -> Option<u8> {
    if dist <= SQRT3 * (1.0 + GEOM_EPS) {
        Some(1)
    } else if dist <= 2.0 * SQRT3 * (1.0 + GEOM_EPS) {
        Some(2)
    } else {
        None
    }
}

/// Color of the home region used by [`interference_layout`].
pub fn canonical_color(n: CoopOrder) -> Result<u8> {
    match n {
        CoopOrder::Two => Ok(4),
        CoopOrder::Three => Ok(1),
        CoopOrder::One => Err(Error::UnsupportedOrder(1)),
    }
}

/// Layout at the origin BS for the canonical home color.
pub fn interference_layout(cfg: &NetworkConfig) -> Result<InterferenceLayout> {
    require_coop(cfg.n)?;
    interference_layout_at(cfg.n, cfg.tiers, LatticeIndex::ORIGIN, canonical_color(cfg.n)?)
}

/// Co-channel regions of `color` around the BS `bs`, binned into tiers by
/// their nearest-point distance, expressed relative to `bs`.
pub fn interference_layout_at(
    n: CoopOrder,
    tiers: u8,
    bs: LatticeIndex,
    color: u8,
) -> Result<InterferenceLayout> {
    require_coop(n)?;
    if !matches!(tiers, 1 | 2) {
        return Err(Error::InvalidArgument(format!("tiers must be 1 or 2, got {tiers}")));
    }
    if !(1..=6).contains(&color) {
        return Err(Error::InvalidArgument(format!("color must be 1..=6, got {color}")));
    }
    let home_key = RegionKey::incident(n, bs)?
        .into_iter()
        .find(|k| k.reuse6_color() == color)
        .expect("every BS touches all six colors");
    let origin = bs.position();
    // five rings around the BS comfortably cover tier 2 (distance 2√3 d)
    let reach = bs.ring() + 5;
    let unit = NetworkConfig {
        d_m: 1.0,
        n,
        ..NetworkConfig::with_order(n)
    };
    let tess = color_reuse6(build_tessellation(&unit, reach as u32)?)?;
    let mut regions = Vec::new();
    for r in tess.iter().filter(|r| r.color == Some(color) && r.key != home_key) {
        debug_assert!(!r.key.anchors().contains(&bs));
        let poly = r.polygon.translate(origin * -1.0);
        let dist = poly.distance_to(Point2D::ORIGIN);
        if let Some(t) = tier_of(dist) {
            if t <= tiers {
                regions.push(TieredRegion { tier: t, polygon: poly, distance: dist });
            }
        }
    }
    // boundary guard: nothing in the outermost ring may fall inside tier 2
    let outer_ring_dist = (reach - bs.ring()) as f64 * 1.5;
    if outer_ring_dist <= 2.0 * SQRT3 {
        return Err(Error::InsufficientExtent("tessellation does not reach tier 2".into()));
    }
    regions.sort_by(|a, b| {
        (a.tier, a.distance)
            .partial_cmp(&(b.tier, b.distance))
            .unwrap()
            .then_with(|| {
                let (ca, cb) = (a.polygon.centroid(), b.polygon.centroid());
                ca.y.atan2(ca.x).partial_cmp(&cb.y.atan2(cb.x)).unwrap()
            })
    });
    let home = home_key.polygon().translate(origin * -1.0);
    let home_anchors = home_key
        .anchors()
        .into_iter()
        .map(|a| a.position() - origin)
        .collect();
    Ok(InterferenceLayout { n, tiers, color, home, home_anchors, regions })
}

/// Point-group symmetries of the BS lattice about a BS: six rotations by
/// multiples of 60°, each optionally preceded by a reflection in the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSymmetry {
    pub rotation: u8,
    pub reflect: bool,
}

impl LatticeSymmetry {
    pub fn all() -> impl Iterator<Item = LatticeSymmetry> {
        (0..6u8).flat_map(|rotation| {
            [false, true]
                .into_iter()
                .map(move |reflect| LatticeSymmetry { rotation, reflect })
        })
    }

    pub fn apply(self, p: Point2D) -> Point2D {
        let p = if self.reflect { Point2D::new(p.x, -p.y) } else { p };
        p.rotate(self.rotation as f64 * PI / 3.0)
    }
}

/// True when some lattice symmetry maps the regions of `a` onto those of
/// `b` tier by tier.
pub fn layouts_congruent(a: &InterferenceLayout, b: &InterferenceLayout) -> bool {
    if a.regions.len() != b.regions.len() {
        return false;
    }
    LatticeSymmetry::all().any(|sym| {
        a.regions.iter().all(|ra| {
            let mapped = ra.polygon.map(|p| sym.apply(p));
            b.regions
                .iter()
                .any(|rb| rb.tier == ra.tier && rb.polygon.same_shape(&mapped, 1e-9))
        })
    })
}

/// Euclidean distances from `p` to every anchor of `cr`.
pub fn distances(p: Point2D, cr: &CoopRegion) -> Result<Vec<f64>> {
    if !cr.polygon.contains(p) {
        return Err(Error::OutsideRegion { x: p.x, y: p.y });
    }
    let scale = cr.polygon.area().sqrt();
    let ds: Vec<f64> = cr.anchors.iter().map(|a| p.distance(*a)).collect();
    if ds.iter().any(|&r| r <= GEOM_EPS * scale) {
        return Err(Error::AtBaseStation { x: p.x, y: p.y });
    }
    Ok(ds)
}

/// The canonical home region (anchored at the origin BS) scaled to `cfg.d_m`.
pub fn home_region(cfg: &NetworkConfig) -> Result<CoopRegion> {
    require_coop(cfg.n)?;
    let color = canonical_color(cfg.n)?;
    let key = RegionKey::incident(cfg.n, LatticeIndex::ORIGIN)?
        .into_iter()
        .find(|k| k.reuse6_color() == color)
        .expect("all colors present");
    let mut cr = CoopRegion::from_key(key, cfg.d_m);
    cr.color = Some(color);
    Ok(cr)
}

/// Worst-case points of the home region together with their BS distances.
pub fn worst_case_points(cfg: &NetworkConfig) -> Result<Vec<(Point2D, Vec<f64>)>> {
    let cr = home_region(cfg)?;
    cr.worst_case_points()
        .into_iter()
        .map(|p| Ok((p, distances(p, &cr)?)))
        .collect()
}
