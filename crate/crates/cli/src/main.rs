//! `compcov`: coverage and dimensioning of cooperative hexagonal networks
//! from the command line.

mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use comp_coverage::coverage::{ccp_map, ccp_point, ergodic_point, CoverageQuery};
use comp_coverage::design::{
    compare_orders, solve_density, solve_density_mc, sweep_metric, Metric, Scheme, SolveStatus,
};
use comp_coverage::geometry::{interference_layout, worst_case_points};
use comp_coverage::icri::{beta_total, icri_avg};
use comp_coverage::montecarlo::{estimate_icri, validation_rows, McOptions};
use comp_coverage::units::{density_from_side, watts_to_dbm, PowerW};
use comp_coverage::{CoopOrder, Error, NetworkConfig};

use config::{footer, resolve, Overrides, Resolved};
use output::{header, sink, write_csv, write_json};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Io(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) | CliError::Compute(_) => 1,
        }
    }

    fn record(&self) -> String {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Infeasible(m) => ("infeasible", m),
            CliError::Io(m) => ("io", m),
            CliError::Compute(m) => ("compute", m),
        };
        serde_json::json!({ "error": kind, "message": message, "exit_code": self.code() }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::UnsupportedOrder(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "compcov", version, about = "Coverage analysis and dimensioning of cooperative hexagonal cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Geometry coefficients β(α, N) per interference tier (CSV)
    Beta,
    /// Average interference, analytic vs simulated, over side lengths (CSV)
    Icri,
    /// Analytic interference split by tier over side lengths (CSV)
    IcriTiers,
    /// Coverage probability and ergodic rate over a grid of the region (CSV)
    CcpMap {
        /// Grid cells per bounding-box side
        #[arg(long, default_value_t = 50)]
        res: usize,
    },
    /// Coverage and ergodic rate at the worst-case points (CSV)
    WorstCase,
    /// Sparsest deployment meeting the target at the worst-case point (JSON)
    SolveDensity {
        #[arg(long, value_enum, default_value_t = MetricArg::Ccp)]
        metric: MetricArg,
        /// Solve every scheme and report density ratios to the baselines
        #[arg(long)]
        all_schemes: bool,
    },
    /// Worst-case metrics over a grid of side lengths (CSV)
    Sweep {
        /// Include both single-BS baselines and both cooperation orders
        #[arg(long)]
        all_schemes: bool,
    },
    /// Analytic vs simulated coverage over a rate grid (CSV)
    Validate,
    /// Interference layout export
    Geometry {
        #[command(subcommand)]
        action: GeometryCommand,
    },
}

#[derive(Debug, Subcommand)]
enum GeometryCommand {
    /// Co-channel regions around a BS, lengths in units of d (JSON)
    Dump,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Ccp,
    Ergodic,
}

const TABLE_ALPHAS: [f64; 3] = [3.0, 3.5, 4.0];
const TABLE_ORDERS: [CoopOrder; 2] = [CoopOrder::Two, CoopOrder::Three];

fn default_d_grid() -> Vec<f64> {
    let (lo, hi, k) = (200.0f64, 5000.0f64, 30);
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect()
}

fn default_c0_grid() -> Vec<f64> {
    (1..=30).map(|k| k as f64 / 10.0).collect()
}

fn d_grid(r: &Resolved) -> Vec<f64> {
    match (&r.d_grid_m, r.explicit.d) {
        (Some(g), _) => g.clone(),
        (None, true) => vec![r.network.d_m],
        (None, false) => default_d_grid(),
    }
}

fn mc_options(r: &Resolved) -> McOptions {
    let opts = McOptions::new(r.trials, r.seed);
    match r.workers {
        Some(w) => opts.with_workers(w),
        None => opts,
    }
}

fn require_cooperative(cfg: &NetworkConfig, what: &str) -> Result<(), CliError> {
    if cfg.n.is_cooperative() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} needs a cooperation order of 2 or 3")))
    }
}

fn query(r: &Resolved) -> Result<CoverageQuery, CliError> {
    Ok(CoverageQuery::new(r.c0)?)
}

fn dbm(w: f64) -> f64 {
    PowerW::new(w).map(watts_to_dbm).unwrap_or(f64::NEG_INFINITY)
}

fn run(cmd: &Command, r: &Resolved) -> Result<(), CliError> {
    let cfg = &r.network;
    let foot = footer(r);
    let mut out = sink(r.out.as_deref())?;
    match cmd {
        Command::Beta => {
            let alphas = if r.explicit.alpha { vec![cfg.alpha] } else { TABLE_ALPHAS.to_vec() };
            let orders = if r.explicit.n { vec![cfg.n] } else { TABLE_ORDERS.to_vec() };
            for &n in &orders {
                require_cooperative(&NetworkConfig { n, ..cfg.clone() }, "beta")?;
            }
            let mut rows = Vec::new();
            for &alpha in &alphas {
                for &n in &orders {
                    let b = beta_total(alpha, n, cfg.tiers)?;
                    for tier in 1..=cfg.tiers {
                        rows.push((alpha, n.count(), tier, b.tier_sum(tier), b.total));
                    }
                }
            }
            write_csv(&mut out, &header(&["alpha", "N", "tier", "beta_j_sum", "beta_total"]), rows, &foot)
        }
        Command::Icri => {
            require_cooperative(cfg, "icri")?;
            let mut rows = Vec::new();
            for d in d_grid(r) {
                let at = cfg.with_side(d);
                let analytic = icri_avg(&at)?;
                let mc = estimate_icri(&at, mc_options(r))?;
                for (t, (a, e)) in analytic.per_tier.iter().zip(mc).enumerate() {
                    rows.push((
                        d,
                        density_from_side(d),
                        t + 1,
                        a.watts(),
                        dbm(a.watts()),
                        e.mean,
                        e.stderr,
                        dbm(e.mean),
                    ));
                }
            }
            let cols = [
                "d_m",
                "lambda_per_m2",
                "tier",
                "analytic_w",
                "analytic_dbm",
                "mc_w",
                "mc_stderr_w",
                "mc_dbm",
            ];
            write_csv(&mut out, &header(&cols), rows, &foot)
        }
        Command::IcriTiers => {
            require_cooperative(cfg, "icri-tiers")?;
            let at_tiers = NetworkConfig { tiers: if r.explicit.tiers { cfg.tiers } else { 2 }, ..cfg.clone() };
            let mut rows = Vec::new();
            for d in d_grid(r) {
                let a = icri_avg(&at_tiers.with_side(d))?;
                for (t, p) in a.per_tier.iter().enumerate() {
                    rows.push((d, density_from_side(d), t + 1, p.watts(), dbm(p.watts()), a.total.watts()));
                }
            }
            let cols = ["d_m", "lambda_per_m2", "tier", "icri_w", "icri_dbm", "total_w"];
            write_csv(&mut out, &header(&cols), rows, &foot)
        }
        Command::CcpMap { res } => {
            require_cooperative(cfg, "ccp-map")?;
            let rows = ccp_map(cfg, query(r)?, *res)?;
            let mut cols = vec!["x_m".to_string(), "y_m".to_string()];
            cols.extend((1..=cfg.n.count()).map(|k| format!("r{k}_m")));
            cols.extend(["ccp".to_string(), "ergodic_bps_hz".to_string()]);
            let records = rows.into_iter().map(|row| {
                let mut v = vec![row.x_m, row.y_m];
                v.extend(row.r_m);
                v.extend([row.ccp, row.ergodic_bps_hz]);
                v
            });
            write_csv(&mut out, &cols, records, &foot)
        }
        Command::WorstCase => {
            require_cooperative(cfg, "worst-case")?;
            let q = query(r)?;
            let mut cols = vec!["x_m".to_string(), "y_m".to_string()];
            cols.extend((1..=cfg.n.count()).map(|k| format!("r{k}_m")));
            cols.extend(["ccp".to_string(), "ergodic_bps_hz".to_string()]);
            let mut records = Vec::new();
            for (p, dist) in worst_case_points(cfg)? {
                let mut v = vec![p.x, p.y];
                v.extend(&dist);
                v.extend([ccp_point(cfg, &dist, q)?, ergodic_point(cfg, &dist)?]);
                records.push(v);
            }
            write_csv(&mut out, &cols, records, &foot)
        }
        Command::SolveDensity { metric, all_schemes } => {
            let q = query(r)?;
            let solutions = if *all_schemes {
                if matches!(metric, MetricArg::Ergodic) {
                    return Err(CliError::Config("scheme comparison uses the ccp metric".into()));
                }
                let rows = compare_orders(cfg, r.target, q, mc_options(r))?;
                let doc = serde_json::to_string_pretty(&rows).expect("comparison serializes");
                write_json(&mut out, &doc)?;
                rows.into_iter().map(|row| row.solution).collect::<Vec<_>>()
            } else {
                let sol = match (cfg.n.is_cooperative(), metric) {
                    (true, MetricArg::Ccp) => solve_density(cfg, r.target, Metric::Ccp(q))?,
                    (true, MetricArg::Ergodic) => solve_density(cfg, r.target, Metric::Ergodic)?,
                    (false, MetricArg::Ccp) => solve_density_mc(cfg, r.target, q, mc_options(r))?,
                    (false, MetricArg::Ergodic) => {
                        return Err(CliError::Config("single-BS schemes are solved for ccp only".into()))
                    }
                };
                write_json(&mut out, &sol.to_json())?;
                vec![sol]
            };
            for line in &foot {
                eprintln!("# {line}");
            }
            match solutions.iter().find(|s| s.status != SolveStatus::Solved) {
                Some(s) => {
                    let status = serde_json::to_value(s.status).expect("status serializes");
                    Err(CliError::Infeasible(format!("{}: {}", s.scheme, status.as_str().unwrap_or_default())))
                }
                None => Ok(()),
            }
        }
        Command::Sweep { all_schemes } => {
            let schemes = if *all_schemes {
                Scheme::ALL.to_vec()
            } else if cfg.n.is_cooperative() {
                vec![Scheme::Coop(cfg.n)]
            } else if cfg.reuse == 7 {
                vec![Scheme::NoCompReuse7]
            } else {
                vec![Scheme::NoCompReuse1]
            };
            let grid = d_grid(r);
            let mut rows = Vec::new();
            for s in schemes {
                rows.extend(sweep_metric(s, cfg, &grid, query(r)?, mc_options(r))?);
            }
            let cols = ["scheme", "lambda_per_m2", "d_m", "worst_ccp", "worst_ergodic"];
            write_csv(&mut out, &header(&cols), rows, &foot)
        }
        Command::Validate => {
            require_cooperative(cfg, "validate")?;
            let c0s = r.c0_grid.clone().unwrap_or_else(default_c0_grid);
            let id = format!("N{}-M{}-a{}-s{}dB-d{}", cfg.n, cfg.m, cfg.alpha, cfg.sigma_l_db, cfg.d_m);
            let rows = validation_rows(&id, cfg, &c0s, mc_options(r))?;
            let cols = ["scenario", "c0", "analytic_ccp", "mc_ccp", "mc_stderr", "trials", "seed"];
            write_csv(&mut out, &header(&cols), rows, &foot)
        }
        Command::Geometry { action: GeometryCommand::Dump } => {
            require_cooperative(cfg, "geometry dump")?;
            write_json(&mut out, &interference_layout(cfg)?.to_json())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            if !usage {
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", CliError::Config(e.kind().to_string()).record());
            return ExitCode::from(2);
        }
    };
    let result = resolve(&cli.flags).and_then(|r| run(&cli.command, &r));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("{}", e.record());
            ExitCode::from(e.code())
        }
    }
}
