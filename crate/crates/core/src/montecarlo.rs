//! Link-level Monte-Carlo simulation of the cooperative uplink.
//!
//! Every trial draws Rayleigh fading per antenna, lognormal shadowing per
//! (user, BS) link and one interfering user uniformly inside each modeled
//! co-channel region, then applies MRC across all `N·M` antennas. Trial `i`
//! of a run with master seed `s` always consumes the ChaCha8 stream `(s, i)`,
//! and trials are reduced in fixed-size blocks, so results do not depend on
//! the worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use crate::coverage::{ccp_point, CoverageQuery};
use crate::error::{Error, Result};
use crate::geometry::{
    distances, hexagon, home_region, interference_layout, interference_layout_at, ConvexPolygon,
    LatticeIndex, Point2D,
};
use crate::units::{CompensatedSum, CoopOrder, NetworkConfig};

/// Trials per reduction block.
const BLOCK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeed {
    pub master: u64,
    pub index: u64,
}

impl TrialSeed {
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.index);
        rng
    }
}

/// Run size and parallelism. `workers = None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions { trials, seed, workers: None }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        McOptions { workers: Some(workers), ..self }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Maps every block `[start, end)` to a partial result, returned in block
    /// order.
    fn blocks<P: Send>(&self, f: impl Fn(u64, u64) -> P + Sync + Send) -> Result<Vec<P>> {
        self.check()?;
        let n_blocks = self.trials.div_ceil(BLOCK);
        let run = || {
            (0..n_blocks)
                .into_par_iter()
                .map(|b| f(b * BLOCK, ((b + 1) * BLOCK).min(self.trials)))
                .collect::<Vec<P>>()
        };
        match self.workers {
            None => Ok(run()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok(pool.install(run))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub elapsed_s: f64,
    pub seed: u64,
}

impl McEstimate {
    fn from_moments(sum: f64, sum_sq: f64, trials: u64, started: Instant, seed: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        McEstimate {
            mean,
            stderr: (var / n).sqrt(),
            trials,
            elapsed_s: started.elapsed().as_secs_f64(),
            seed,
        }
    }

    fn from_count(hits: u64, trials: u64, started: Instant, seed: u64) -> Self {
        // indicator variable: Σx = Σx² = hits
        Self::from_moments(hits as f64, hits as f64, trials, started, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfererRegion {
    pub tier: u8,
    pub polygon: ConvexPolygon,
}

/// Geometry and link budget of one simulated user, lengths in units of `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub serving: Vec<Point2D>,
    pub user: Point2D,
    pub interferers: Vec<InterfererRegion>,
    pub m: u32,
    /// Achievable rate is `rate_prefactor · log2(1 + SINR)`.
    pub rate_prefactor: f64,
    pub alpha: f64,
    pub sigma_z: f64,
}

/// Where the desired user sits inside its cooperation region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum UserPosition {
    WorstCase,
    Centroid,
    /// Explicit point in meters, home BS at the origin.
    At(Point2D),
}

impl Scenario {
    /// Cooperative scenario for the canonical home region. Interferers are
    /// the co-channel regions in the configured tiers of any serving BS.
    pub fn cooperative(cfg: &NetworkConfig, pos: UserPosition) -> Result<Scenario> {
        cfg.validate()?;
        let unit = cfg.with_side(1.0);
        let cr = home_region(&unit)?;
        let user = match pos {
            UserPosition::WorstCase => cr.worst_case_points()[0],
            UserPosition::Centroid => cr.polygon.centroid(),
            UserPosition::At(p) => p * (1.0 / cfg.d_m),
        };
        distances(user, &cr)?;
        let color = cr.color.expect("home region is colored");
        let mut seen = HashSet::new();
        let mut interferers = Vec::new();
        for anchor in cr.key.anchors() {
            let layout = interference_layout_at(cfg.n, cfg.tiers, anchor, color)?;
            let shift = anchor.position();
            for r in layout.regions {
                let poly = r.polygon.translate(shift);
                let c = poly.centroid();
                if seen.insert(((c.x * 1e6).round() as i64, (c.y * 1e6).round() as i64)) {
                    interferers.push(InterfererRegion { tier: r.tier, polygon: poly });
                }
            }
        }
        Ok(Scenario {
            serving: cr.anchors.clone(),
            user,
            interferers,
            m: cfg.m,
            rate_prefactor: 1.0 / cfg.n.count() as f64,
            alpha: cfg.alpha,
            sigma_z: cfg.shadow().sigma_z,
        })
    }

    /// Single-BS cell with the user at a hexagon vertex. Reuse 1 models the
    /// 18 co-channel cells of the first two rings; reuse 7 models none and
    /// scales the rate by 1/7.
    pub fn no_comp(cfg: &NetworkConfig) -> Result<Scenario> {
        cfg.validate()?;
        if cfg.n != CoopOrder::One {
            return Err(Error::InvalidConfig("no-CoMP baseline needs n = 1".into()));
        }
        let (interferers, rate_prefactor) = match cfg.reuse {
            1 => {
                let cells = crate::geometry::lattice_ball(2)
                    .into_iter()
                    .filter(|b| *b != LatticeIndex::ORIGIN)
                    .map(|b| InterfererRegion {
                        tier: b.ring() as u8,
                        polygon: hexagon(b.position(), 1.0),
                    })
                    .collect();
                (cells, 1.0)
            }
            7 => (Vec::new(), 1.0 / 7.0),
            r => return Err(Error::InvalidConfig(format!("no-CoMP reuse must be 1 or 7, got {r}"))),
        };
        Ok(Scenario {
            serving: vec![Point2D::ORIGIN],
            user: Point2D::new(1.0, 0.0),
            interferers,
            m: cfg.m,
            rate_prefactor,
            alpha: cfg.alpha,
            sigma_z: cfg.shadow().sigma_z,
        })
    }

    /// SINR threshold for a target rate `c0`.
    pub fn threshold(&self, c0: f64) -> f64 {
        (c0 / self.rate_prefactor * std::f64::consts::LN_2).exp_m1()
    }

    pub fn rate(&self, sinr: f64) -> f64 {
        self.rate_prefactor * sinr.ln_1p() / std::f64::consts::LN_2
    }

    fn antennas(&self) -> usize {
        self.serving.len() * self.m as usize
    }
}

/// One realization of all channels at physical scale `d_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// Desired-user channel, BS-major (`k·M + i`).
    pub h: Vec<Complex64>,
    /// `g[a][j]`: interferer `j` to antenna `a`.
    pub g: Vec<Vec<Complex64>>,
    /// Interferer positions in meters.
    pub interferer_positions: Vec<Point2D>,
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn uniform_in(poly: &ConvexPolygon, rng: &mut ChaCha8Rng) -> Point2D {
    let v = poly.vertices();
    let areas: Vec<f64> = (1..v.len() - 1)
        .map(|k| 0.5 * (v[k] - v[0]).cross(v[k + 1] - v[0]).abs())
        .collect();
    let total: f64 = areas.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut k = areas.len() - 1;
    for (i, a) in areas.iter().enumerate() {
        if u < *a {
            k = i;
            break;
        }
        u -= a;
    }
    let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
    if s + t > 1.0 {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    v[0] + (v[k + 1] - v[0]) * s + (v[k + 2] - v[0]) * t
}

/// Amplitude `10^{-(PL + L)/20}` for a link of `r_m` meters and shadowing `l_db`.
fn link_amplitude(r_m: f64, alpha: f64, l_db: f64) -> f64 {
    10f64.powf(-(10.0 * alpha * r_m.log10() + l_db) / 20.0)
}

/// Draws one trial. Shadowing is shared by all antennas of a BS.
pub fn sample_trial(sc: &Scenario, d_m: f64, seed: TrialSeed) -> ChannelSample {
    let mut rng = seed.rng();
    let m = sc.m as usize;
    let sigma_l_db = sc.sigma_z * 10.0 / std::f64::consts::LN_10;
    let shadow = |rng: &mut ChaCha8Rng| sigma_l_db * rng.sample::<f64, _>(StandardNormal);
    let mut h = Vec::with_capacity(sc.antennas());
    for bs in &sc.serving {
        let amp = link_amplitude(sc.user.distance(*bs) * d_m, sc.alpha, shadow(&mut rng));
        for _ in 0..m {
            h.push(complex_normal(&mut rng) * amp);
        }
    }
    let mut g = vec![Vec::with_capacity(sc.interferers.len()); sc.antennas()];
    let mut positions = Vec::with_capacity(sc.interferers.len());
    for region in &sc.interferers {
        let p = uniform_in(&region.polygon, &mut rng);
        for (k, bs) in sc.serving.iter().enumerate() {
            let amp = link_amplitude(p.distance(*bs) * d_m, sc.alpha, shadow(&mut rng));
            for i in 0..m {
                g[k * m + i].push(complex_normal(&mut rng) * amp);
            }
        }
        positions.push(p * d_m);
    }
    ChannelSample { h, g, interferer_positions: positions }
}

/// MRC output SINR `σ_s² (h^H h)² / (h^H G h)` with diagonal
/// `G_aa = σ_n² + σ_s² Σ_j |g_aj|²`.
pub fn sinr_instant(s: &ChannelSample, cfg: &NetworkConfig) -> f64 {
    let ps = cfg.tx_power().watts();
    let pn = cfg.noise_power().watts();
    let hh: f64 = s.h.iter().map(|x| x.norm_sqr()).sum();
    let hgh: f64 = s
        .h
        .iter()
        .zip(&s.g)
        .map(|(ha, ga)| ha.norm_sqr() * (pn + ps * ga.iter().map(|x| x.norm_sqr()).sum::<f64>()))
        .sum();
    ps * hh * hh / hgh
}

/// Per-antenna gains of a trial drawn at unit scale: `|h_a|²` and
/// `Σ_j |g_aj|²`. At side `d` both scale by `d^{-α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitGains {
    desired: Vec<f64>,
    interference: Vec<f64>,
}

impl UnitGains {
    pub fn draw(sc: &Scenario, seed: TrialSeed) -> UnitGains {
        let s = sample_trial(sc, 1.0, seed);
        UnitGains {
            desired: s.h.iter().map(|x| x.norm_sqr()).collect(),
            interference: s.g.iter().map(|ga| ga.iter().map(|x| x.norm_sqr()).sum()).collect(),
        }
    }

    pub fn sinr(&self, cfg: &NetworkConfig) -> f64 {
        let ps = cfg.tx_power().watts();
        let pn = cfg.noise_power().watts();
        let path = cfg.d_m.powf(-cfg.alpha);
        let hh: f64 = self.desired.iter().sum();
        let hgh: f64 = self
            .desired
            .iter()
            .zip(&self.interference)
            .map(|(a, b)| a * (pn + ps * path * b))
            .sum();
        ps * path * hh * hh / hgh
    }
}

/// Pre-drawn trials for evaluating one scenario at many cell sizes with
/// common random numbers.
#[derive(Debug, Clone)]
pub struct TrialBank {
    pub scenario: Scenario,
    pub opts: McOptions,
    gains: Vec<UnitGains>,
}

impl TrialBank {
    pub fn draw(scenario: Scenario, opts: McOptions) -> Result<TrialBank> {
        let seed = opts.seed;
        let blocks = opts.blocks(|lo, hi| {
            (lo..hi)
                .map(|index| UnitGains::draw(&scenario, TrialSeed { master: seed, index }))
                .collect::<Vec<_>>()
        })?;
        Ok(TrialBank { scenario, opts, gains: blocks.into_iter().flatten().collect() })
    }

    /// Empirical CCP at the side length and powers of `cfg`.
    pub fn ccp(&self, cfg: &NetworkConfig, q: CoverageQuery) -> McEstimate {
        let started = Instant::now();
        let t = self.scenario.threshold(q.c0);
        let hits = if q.c0 == 0.0 {
            self.gains.len() as u64
        } else {
            self.gains.iter().filter(|g| g.sinr(cfg) > t).count() as u64
        };
        McEstimate::from_count(hits, self.gains.len() as u64, started, self.opts.seed)
    }
}

fn scenario_for(cfg: &NetworkConfig, pos: UserPosition) -> Result<Scenario> {
    if cfg.n.is_cooperative() {
        Scenario::cooperative(cfg, pos)
    } else {
        Scenario::no_comp(cfg)
    }
}

/// Empirical CCP for each `c0` from one common set of trials.
pub fn estimate_ccp_curve(
    cfg: &NetworkConfig,
    pos: UserPosition,
    c0s: &[f64],
    opts: McOptions,
) -> Result<Vec<McEstimate>> {
    let started = Instant::now();
    let sc = scenario_for(cfg, pos)?;
    let queries = c0s.iter().map(|&c| CoverageQuery::new(c)).collect::<Result<Vec<_>>>()?;
    let thresholds: Vec<f64> = queries.iter().map(|q| sc.threshold(q.c0)).collect();
    let seed = opts.seed;
    let blocks = opts.blocks(|lo, hi| {
        let mut hits = vec![0u64; thresholds.len()];
        for index in lo..hi {
            let s = sample_trial(&sc, cfg.d_m, TrialSeed { master: seed, index });
            let sinr = sinr_instant(&s, cfg);
            for (h, (&t, q)) in hits.iter_mut().zip(thresholds.iter().zip(&queries)) {
                if q.c0 == 0.0 || sinr > t {
                    *h += 1;
                }
            }
        }
        hits
    })?;
    Ok((0..thresholds.len())
        .map(|k| {
            let hits = blocks.iter().map(|b| b[k]).sum();
            McEstimate::from_count(hits, opts.trials, started, seed)
        })
        .collect())
}

/// Empirical CCP at one rate target.
pub fn estimate_ccp(
    cfg: &NetworkConfig,
    pos: UserPosition,
    q: CoverageQuery,
    opts: McOptions,
) -> Result<McEstimate> {
    Ok(estimate_ccp_curve(cfg, pos, &[q.c0], opts)?[0])
}

/// Empirical mean achievable rate.
pub fn estimate_ergodic(cfg: &NetworkConfig, pos: UserPosition, opts: McOptions) -> Result<McEstimate> {
    let started = Instant::now();
    let sc = scenario_for(cfg, pos)?;
    let seed = opts.seed;
    let blocks = opts.blocks(|lo, hi| {
        let (mut s1, mut s2) = (0.0, 0.0);
        for index in lo..hi {
            let s = sample_trial(&sc, cfg.d_m, TrialSeed { master: seed, index });
            let c = sc.rate(sinr_instant(&s, cfg));
            s1 += c;
            s2 += c * c;
        }
        (s1, s2)
    })?;
    let s1: CompensatedSum = blocks.iter().map(|b| b.0).collect();
    let s2: CompensatedSum = blocks.iter().map(|b| b.1).collect();
    Ok(McEstimate::from_moments(s1.value(), s2.value(), opts.trials, started, seed))
}

/// Empirical mean ICRI at one antenna of the origin BS, per tier (watts).
pub fn estimate_icri(cfg: &NetworkConfig, opts: McOptions) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    let started = Instant::now();
    let layout = interference_layout(cfg)?;
    let sc = Scenario {
        serving: vec![Point2D::ORIGIN],
        user: Point2D::new(1.0, 0.0),
        interferers: layout
            .regions
            .iter()
            .map(|r| InterfererRegion { tier: r.tier, polygon: r.polygon.clone() })
            .collect(),
        m: 1,
        rate_prefactor: 1.0,
        alpha: cfg.alpha,
        sigma_z: cfg.shadow().sigma_z,
    };
    let ps = cfg.tx_power().watts();
    let tiers = cfg.tiers as usize;
    let seed = opts.seed;
    let blocks = opts.blocks(|lo, hi| {
        let mut acc = vec![(0.0, 0.0); tiers];
        for index in lo..hi {
            let s = sample_trial(&sc, cfg.d_m, TrialSeed { master: seed, index });
            let mut per = vec![0.0; tiers];
            for (g, r) in s.g[0].iter().zip(&sc.interferers) {
                per[r.tier as usize - 1] += ps * g.norm_sqr();
            }
            for (a, p) in acc.iter_mut().zip(per) {
                a.0 += p;
                a.1 += p * p;
            }
        }
        acc
    })?;
    Ok((0..tiers)
        .map(|t| {
            let s1: CompensatedSum = blocks.iter().map(|b| b[t].0).collect();
            let s2: CompensatedSum = blocks.iter().map(|b| b[t].1).collect();
            McEstimate::from_moments(s1.value(), s2.value(), opts.trials, started, seed)
        })
        .collect())
}

/// Empirical CCP of a single-BS network at the cell's worst-case point.
pub fn baseline_no_comp(cfg: &NetworkConfig, q: CoverageQuery, opts: McOptions) -> Result<McEstimate> {
    if cfg.n != CoopOrder::One {
        return Err(Error::InvalidConfig("no-CoMP baseline needs n = 1".into()));
    }
    estimate_ccp(cfg, UserPosition::WorstCase, q, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub scenario: String,
    pub c0: f64,
    pub analytic_ccp: f64,
    pub mc_ccp: f64,
    pub mc_stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Analytic vs simulated CCP at the worst-case point over a rate grid.
pub fn validation_rows(
    id: &str,
    cfg: &NetworkConfig,
    c0s: &[f64],
    opts: McOptions,
) -> Result<Vec<ValidationRow>> {
    let mc = estimate_ccp_curve(cfg, UserPosition::WorstCase, c0s, opts)?;
    let r = vec![cfg.d_m; cfg.n.count()];
    c0s.iter()
        .zip(mc)
        .map(|(&c0, est)| {
            Ok(ValidationRow {
                scenario: id.to_string(),
                c0,
                analytic_ccp: ccp_point(cfg, &r, CoverageQuery::new(c0)?)?,
                mc_ccp: est.mean,
                mc_stderr: est.stderr,
                trials: est.trials,
                seed: est.seed,
            })
        })
        .collect()
}
