//! Study configuration: JSON file merged under command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use comp_coverage::units::{density_from_side, side_from_density};
use comp_coverage::{CoopOrder, NetworkConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_C0: f64 = 0.5;
pub const DEFAULT_TARGET: f64 = 0.5;

/// Network parameters, every field optional so a file can set a subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    pub d_m: Option<f64>,
    pub n: Option<u8>,
    pub m: Option<u32>,
    pub alpha: Option<f64>,
    pub sigma_l_db: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub reuse: Option<u32>,
    pub tiers: Option<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Side-length grid, given directly or as densities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub d_grid_m: Option<Vec<f64>>,
    pub lambda_grid_per_m2: Option<Vec<f64>>,
    pub c0_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBlock {
    pub c0: Option<f64>,
    pub target: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub network: NetworkBlock,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub query: QueryBlock,
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON study configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for simulated trials
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Simulated trials per estimate
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads for simulation (default: all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Path-loss exponent
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Cooperating base stations per region (1, 2 or 3)
    #[arg(long, global = true)]
    pub n: Option<u8>,
    /// Receive antennas per base station
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Hexagon side length, meters
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Target rate per user, b/s/Hz
    #[arg(long, global = true)]
    pub c0: Option<f64>,
    /// Target coverage probability or ergodic rate
    #[arg(long, global = true)]
    pub target: Option<f64>,
    /// Shadowing standard deviation, dB
    #[arg(long = "sigma-l", global = true)]
    pub sigma_l: Option<f64>,
    /// Frequency-reuse factor (6 with cooperation, 1 or 7 without)
    #[arg(long, global = true)]
    pub reuse: Option<u32>,
    /// Modeled interference tiers (1 or 2)
    #[arg(long, global = true)]
    pub tiers: Option<u8>,
}

/// Fully resolved inputs of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub network: NetworkConfig,
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub c0: f64,
    pub target: f64,
    pub d_grid_m: Option<Vec<f64>>,
    pub c0_grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    /// Which parameters were set explicitly, by file or flag.
    #[serde(skip)]
    pub explicit: Explicit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Explicit {
    pub alpha: bool,
    pub n: bool,
    pub tiers: bool,
    pub d: bool,
}

/// Merges flags over the config file over built-in defaults.
pub fn resolve(flags: &Overrides) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    let net = &file.network;
    let base = NetworkConfig::default();
    let n_raw = flags.n.or(net.n).unwrap_or(u8::from(base.n));
    let n = CoopOrder::try_from(n_raw).map_err(|e| CliError::Config(e.to_string()))?;
    let default_reuse = if n.is_cooperative() { 6 } else { 1 };
    let network = NetworkConfig {
        d_m: flags.d.or(net.d_m).unwrap_or(base.d_m),
        n,
        m: flags.m.or(net.m).unwrap_or(base.m),
        alpha: flags.alpha.or(net.alpha).unwrap_or(base.alpha),
        sigma_l_db: flags.sigma_l.or(net.sigma_l_db).unwrap_or(base.sigma_l_db),
        tx_power_dbm: net.tx_power_dbm.unwrap_or(base.tx_power_dbm),
        noise_power_dbm: net.noise_power_dbm.unwrap_or(base.noise_power_dbm),
        reuse: flags.reuse.or(net.reuse).unwrap_or(default_reuse),
        tiers: flags.tiers.or(net.tiers).unwrap_or(base.tiers),
    };
    network.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let d_grid_m = match (&file.sweep.d_grid_m, &file.sweep.lambda_grid_per_m2) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("sweep: give d_grid_m or lambda_grid_per_m2, not both".into()))
        }
        (Some(d), None) => Some(d.clone()),
        (None, Some(l)) => Some(l.iter().map(|&x| side_from_density(x)).collect()),
        (None, None) => None,
    };
    if let Some(g) = &d_grid_m {
        if g.is_empty() || g.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(CliError::Config("sweep grid must be non-empty and positive".into()));
        }
    }
    let resolved = Resolved {
        network,
        trials: flags.trials.or(file.mc.trials).unwrap_or(DEFAULT_TRIALS),
        seed: flags.seed.or(file.mc.seed).unwrap_or(DEFAULT_SEED),
        workers: flags.workers.or(file.mc.workers),
        c0: flags.c0.or(file.query.c0).unwrap_or(DEFAULT_C0),
        target: flags.target.or(file.query.target).unwrap_or(DEFAULT_TARGET),
        d_grid_m,
        c0_grid: file.sweep.c0_grid.clone(),
        out: flags.out.clone().or(file.out),
        explicit: Explicit {
            alpha: flags.alpha.or(net.alpha).is_some(),
            n: flags.n.or(net.n).is_some(),
            tiers: flags.tiers.or(net.tiers).is_some(),
            d: flags.d.or(net.d_m).is_some(),
        },
    };
    if resolved.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if resolved.workers == Some(0) {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    if !(resolved.c0.is_finite() && resolved.c0 >= 0.0) {
        return Err(CliError::Config(format!("c0 must be >= 0, got {}", resolved.c0)));
    }
    Ok(resolved)
}

/// Audit lines for output footers: the resolved inputs in both the units
/// they were given in and SI.
pub fn footer(r: &Resolved) -> Vec<String> {
    let net = &r.network;
    let given = serde_json::to_string(r).expect("resolved config serializes");
    let si = serde_json::json!({
        "d_m": net.d_m,
        "lambda_per_m2": density_from_side(net.d_m),
        "tx_power_w": net.tx_power().watts(),
        "noise_power_w": net.noise_power().watts(),
        "shadow_sigma_z_nepers": net.shadow().sigma_z,
        "shadow_mean_factor": net.shadow().mean_factor,
    });
    vec![
        format!("config: {given}"),
        format!("si: {si}"),
        format!("seed: {} trials: {}", r.seed, r.trials),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.json");
        std::fs::write(&path, r#"{"network": {"alpha": 3.5, "m": 2}, "mc": {"seed": 9}}"#).unwrap();
        let flags = Overrides { config: Some(path), alpha: Some(3.0), ..Default::default() };
        let r = resolve(&flags).unwrap();
        assert_eq!(r.network.alpha, 3.0);
        assert_eq!(r.network.m, 2);
        assert_eq!(r.seed, 9);
        assert_eq!(r.network.d_m, NetworkConfig::default().d_m);
        assert_eq!(r.trials, DEFAULT_TRIALS);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.json");
        std::fs::write(&path, r#"{"network": {"alpah": 3.5}}"#).unwrap();
        let flags = Overrides { config: Some(path), ..Default::default() };
        assert!(matches!(resolve(&flags), Err(CliError::Config(_))));
    }

    #[test]
    fn single_bs_defaults_to_reuse_one() {
        let r = resolve(&Overrides { n: Some(1), ..Default::default() }).unwrap();
        assert_eq!(r.network.reuse, 1);
    }

    #[test]
    fn density_grid_maps_to_sides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.json");
        let lam = density_from_side(1000.0);
        std::fs::write(&path, format!(r#"{{"sweep": {{"lambda_grid_per_m2": [{lam}]}}}}"#)).unwrap();
        let r = resolve(&Overrides { config: Some(path), ..Default::default() }).unwrap();
        assert!((r.d_grid_m.unwrap()[0] - 1000.0).abs() < 1e-9);
    }
}
