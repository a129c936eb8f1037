//! Network dimensioning: the sparsest hexagonal deployment whose worst-case
//! point still meets a coverage or capacity target.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

use crate::coverage::{worst_case_ccp, worst_case_ergodic, CoverageQuery};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_ergodic, McOptions, Scenario, TrialBank, UserPosition};
use crate::units::{density_from_side, CoopOrder, NetworkConfig};

pub const D_MIN_M: f64 = 1.0;
pub const D_MAX_M: f64 = 1e5;
pub const D_REL_TOL: f64 = 1e-4;
/// Default trial count for simulated baselines.
pub const BASELINE_TRIALS: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ccp(CoverageQuery),
    Ergodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    InterferenceLimitedInfeasible,
    OutOfBracket,
}

/// Deployment schemes compared by [`compare_orders`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    NoCompReuse1,
    NoCompReuse7,
    Coop(CoopOrder),
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::NoCompReuse1,
        Scheme::NoCompReuse7,
        Scheme::Coop(CoopOrder::Two),
        Scheme::Coop(CoopOrder::Three),
    ];

    pub fn config(self, template: &NetworkConfig) -> NetworkConfig {
        match self {
            Scheme::NoCompReuse1 => NetworkConfig { n: CoopOrder::One, reuse: 1, ..*template },
            Scheme::NoCompReuse7 => NetworkConfig { n: CoopOrder::One, reuse: 7, ..*template },
            Scheme::Coop(n) => NetworkConfig { n, reuse: 6, ..*template },
        }
    }

    pub fn is_simulated(self) -> bool {
        !matches!(self, Scheme::Coop(_))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::NoCompReuse1 => write!(f, "N=1 reuse-1"),
            Scheme::NoCompReuse7 => write!(f, "N=1 reuse-7"),
            Scheme::Coop(n) => write!(f, "N={}", n.count()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSolution {
    pub scheme: String,
    pub lambda_per_m2: f64,
    pub d_m: f64,
    pub target: f64,
    pub achieved: f64,
    pub status: SolveStatus,
    pub iterations: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Three standard errors of the simulated metric at the solution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl DesignSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}

/// Largest `d` in `[D_MIN_M, D_MAX_M]` with `metric(d) >= target`, for a
/// metric that is non-increasing in `d`.
fn bisect(
    metric: impl Fn(f64) -> Result<f64>,
    target: f64,
    floor: f64,
) -> Result<(SolveStatus, f64, f64, u32)> {
    if floor < target {
        return Ok((SolveStatus::InterferenceLimitedInfeasible, f64::NAN, floor, 0));
    }
    let (mut lo, mut hi) = (D_MIN_M, D_MAX_M);
    let (m_lo, m_hi) = (metric(lo)?, metric(hi)?);
    if !(m_lo >= target && m_hi < target) {
        let (d, m) = if m_lo < target { (lo, m_lo) } else { (hi, m_hi) };
        return Ok((SolveStatus::OutOfBracket, d, m, 0));
    }
    let mut achieved = m_lo;
    let mut iterations = 0;
    while (hi - lo) > D_REL_TOL * lo {
        let mid = (lo * hi).sqrt();
        let m = metric(mid)?;
        if m >= target {
            lo = mid;
            achieved = m;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok((SolveStatus::Solved, lo, achieved, iterations))
}

fn analytic_metric(cfg: &NetworkConfig, metric: Metric) -> Result<f64> {
    match metric {
        Metric::Ccp(q) => worst_case_ccp(cfg, q),
        Metric::Ergodic => worst_case_ergodic(cfg),
    }
}

fn check_target(target: f64, metric: Metric) -> Result<()> {
    let ok = match metric {
        Metric::Ccp(_) => target > 0.0 && target < 1.0,
        Metric::Ergodic => target > 0.0 && target.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("target {target} out of range for {metric:?}")))
    }
}

fn solution(
    scheme: String,
    target: f64,
    (status, d, achieved, iterations): (SolveStatus, f64, f64, u32),
) -> DesignSolution {
    let lambda = if d.is_finite() { density_from_side(d) } else { f64::NAN };
    DesignSolution {
        scheme,
        lambda_per_m2: lambda,
        d_m: d,
        target,
        achieved,
        status,
        iterations,
        trials: None,
        tolerance: None,
    }
}

/// Minimum BS density of a cooperative network meeting `target` at the
/// worst-case point.
pub fn solve_density(template: &NetworkConfig, target: f64, metric: Metric) -> Result<DesignSolution> {
    template.validate()?;
    if !template.n.is_cooperative() {
        return Err(Error::UnsupportedOrder(1));
    }
    check_target(target, metric)?;
    let floor = analytic_metric(&template.noiseless(), metric)?;
    let found = bisect(|d| analytic_metric(&template.with_side(d), metric), target, floor)?;
    Ok(solution(Scheme::Coop(template.n).to_string(), target, found))
}

/// Minimum BS density of a single-BS network meeting a CCP target, using
/// one common set of simulated trials for every candidate `d`.
pub fn solve_density_mc(
    template: &NetworkConfig,
    target: f64,
    q: CoverageQuery,
    opts: McOptions,
) -> Result<DesignSolution> {
    template.validate()?;
    check_target(target, Metric::Ccp(q))?;
    let bank = TrialBank::draw(Scenario::no_comp(template)?, opts)?;
    let floor = bank.ccp(&template.noiseless(), q).mean;
    let found = bisect(|d| Ok(bank.ccp(&template.with_side(d), q).mean), target, floor)?;
    let scheme = if template.reuse == 1 { Scheme::NoCompReuse1 } else { Scheme::NoCompReuse7 };
    let mut sol = solution(scheme.to_string(), target, found);
    let at = if found.1.is_finite() { template.with_side(found.1) } else { template.noiseless() };
    sol.trials = Some(opts.trials);
    sol.tolerance = Some(3.0 * bank.ccp(&at, q).stderr);
    Ok(sol)
}

/// Solves one scheme, dispatching to the simulator for single-BS schemes.
pub fn solve_scheme(
    scheme: Scheme,
    template: &NetworkConfig,
    target: f64,
    q: CoverageQuery,
    opts: McOptions,
) -> Result<DesignSolution> {
    let cfg = scheme.config(template);
    if scheme.is_simulated() {
        solve_density_mc(&cfg, target, q, opts)
    } else {
        solve_density(&cfg, target, Metric::Ccp(q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: String,
    pub lambda_per_m2: f64,
    pub d_m: f64,
    pub worst_ccp: f64,
    pub worst_ergodic: f64,
}

/// Worst-case metrics of `scheme` over a grid of side lengths.
pub fn sweep_metric(
    scheme: Scheme,
    template: &NetworkConfig,
    d_grid: &[f64],
    q: CoverageQuery,
    opts: McOptions,
) -> Result<Vec<SweepRow>> {
    if d_grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let cfg = scheme.config(template);
    cfg.validate()?;
    let label = scheme.to_string();
    if scheme.is_simulated() {
        let bank = TrialBank::draw(Scenario::no_comp(&cfg)?, opts)?;
        d_grid
            .iter()
            .map(|&d| {
                let at = cfg.with_side(d);
                Ok(SweepRow {
                    scheme: label.clone(),
                    lambda_per_m2: density_from_side(d),
                    d_m: d,
                    worst_ccp: bank.ccp(&at, q).mean,
                    worst_ergodic: estimate_ergodic(&at, UserPosition::WorstCase, opts)?.mean,
                })
            })
            .collect()
    } else {
        d_grid
            .par_iter()
            .map(|&d| {
                let at = cfg.with_side(d);
                Ok(SweepRow {
                    scheme: label.clone(),
                    lambda_per_m2: density_from_side(d),
                    d_m: d,
                    worst_ccp: worst_case_ccp(&at, q)?,
                    worst_ergodic: worst_case_ergodic(&at)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scheme: String,
    pub solution: DesignSolution,
    pub ratio_vs_reuse1: Option<f64>,
    pub ratio_vs_reuse7: Option<f64>,
}

/// Required density of every scheme at a common CCP target, with ratios to
/// the two single-BS baselines where both sides are solvable.
pub fn compare_orders(
    template: &NetworkConfig,
    target: f64,
    q: CoverageQuery,
    opts: McOptions,
) -> Result<Vec<ComparisonRow>> {
    let sols = Scheme::ALL
        .iter()
        .map(|&s| solve_scheme(s, template, target, q, opts))
        .collect::<Result<Vec<_>>>()?;
    let lambda = |s: &DesignSolution| (s.status == SolveStatus::Solved).then_some(s.lambda_per_m2);
    let (r1, r7) = (lambda(&sols[0]), lambda(&sols[1]));
    Ok(sols
        .into_iter()
        .map(|sol| {
            let own = lambda(&sol);
            let ratio = |base: Option<f64>| own.zip(base).map(|(a, b)| a / b);
            ComparisonRow {
                scheme: sol.scheme.clone(),
                ratio_vs_reuse1: ratio(r1),
                ratio_vs_reuse7: ratio(r7),
                solution: sol,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n3() -> NetworkConfig {
        NetworkConfig { n: CoopOrder::Three, ..Default::default() }
    }

    #[test]
    fn solution_meets_target() {
        let q = CoverageQuery::new(0.5).unwrap();
        let sol = solve_density(&n3(), 0.5, Metric::Ccp(q)).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        assert!(sol.achieved >= 0.5);
        let at = worst_case_ccp(&n3().with_side(sol.d_m), q).unwrap();
        assert!(at >= 0.5);
        let beyond = worst_case_ccp(&n3().with_side(sol.d_m * (1.0 + 2.0 * D_REL_TOL)), q).unwrap();
        assert!(beyond < 0.5);
        let identity = sol.lambda_per_m2 * 1.5 * 3f64.sqrt() * sol.d_m * sol.d_m;
        assert!((identity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_target_is_interference_limited() {
        let q = CoverageQuery::new(3.0).unwrap();
        let sol = solve_density(&n3(), 0.99, Metric::Ccp(q)).unwrap();
        assert_eq!(sol.status, SolveStatus::InterferenceLimitedInfeasible);
        assert!(sol.achieved < 0.99);
    }

    #[test]
    fn tiny_target_leaves_bracket() {
        let q = CoverageQuery::new(0.1).unwrap();
        let cfg = NetworkConfig { alpha: 3.0, ..n3() };
        let sol = solve_density(&cfg, 1e-9, Metric::Ccp(q)).unwrap();
        assert_eq!(sol.status, SolveStatus::OutOfBracket);
    }

    #[test]
    fn targets_are_validated() {
        let q = CoverageQuery::new(0.5).unwrap();
        assert!(solve_density(&n3(), 1.0, Metric::Ccp(q)).is_err());
        assert!(solve_density(&n3(), 0.0, Metric::Ergodic).is_err());
        let single = NetworkConfig { n: CoopOrder::One, reuse: 1, ..Default::default() };
        assert!(solve_density(&single, 0.5, Metric::Ccp(q)).is_err());
    }

    #[test]
    fn more_antennas_need_fewer_sites() {
        let q = CoverageQuery::new(0.5).unwrap();
        let m1 = solve_density(&n3(), 0.5, Metric::Ccp(q)).unwrap();
        let m2 = solve_density(&NetworkConfig { m: 2, ..n3() }, 0.5, Metric::Ccp(q)).unwrap();
        assert!(m2.lambda_per_m2 < m1.lambda_per_m2);
    }

    #[test]
    fn reuse7_baseline_solves() {
        let q = CoverageQuery::new(0.5).unwrap();
        let cfg = Scheme::NoCompReuse7.config(&NetworkConfig::default());
        let sol = solve_density_mc(&cfg, 0.5, q, McOptions::new(20_000, 3)).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        assert!(sol.tolerance.unwrap() > 0.0 && sol.trials == Some(20_000));
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let q = CoverageQuery::new(0.5).unwrap();
        let grid = [400.0, 800.0, 1600.0];
        let rows =
            sweep_metric(Scheme::Coop(CoopOrder::Two), &NetworkConfig::default(), &grid, q, McOptions::new(1000, 0))
                .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].worst_ccp > w[1].worst_ccp));
        assert!(sweep_metric(Scheme::NoCompReuse7, &NetworkConfig::default(), &[], q, McOptions::new(1, 0)).is_err());
    }
}
