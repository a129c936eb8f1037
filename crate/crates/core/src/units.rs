//! Power units, shadowing constants and the Gaussian tail helpers shared by
//! every other module.
//!
//! All internal power arithmetic is carried out in watts. Decibel quantities
//! only show up at configuration and reporting boundaries.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};

/// Linear-domain power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PowerW(f64);

impl PowerW {
    pub const ZERO: PowerW = PowerW(0.0);

    pub fn new(watts: f64) -> Result<Self> {
        if !(watts >= 0.0) || !watts.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power must be finite and non-negative, got {watts} W"
            )));
        }
        Ok(PowerW(watts))
    }

    pub fn watts(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        watts_to_dbm(self)
    }

    pub fn dbw(self) -> f64 {
        10.0 * self.0.log10()
    }
}

impl fmt::Display for PowerW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} W", self.0)
    }
}

impl std::ops::Add for PowerW {
    type Output = PowerW;
    fn add(self, rhs: PowerW) -> PowerW {
        PowerW(self.0 + rhs.0)
    }
}

impl std::ops::Mul<f64> for PowerW {
    type Output = PowerW;
    fn mul(self, rhs: f64) -> PowerW {
        debug_assert!(rhs >= 0.0);
        PowerW(self.0 * rhs)
    }
}

/// `10^((p - 30) / 10)` watts.
pub fn dbm_to_watts(p_dbm: f64) -> PowerW {
    PowerW(10f64.powf((p_dbm - 30.0) / 10.0))
}

pub fn watts_to_dbm(p: PowerW) -> f64 {
    10.0 * p.0.log10() + 30.0
}

/// Log-scale shadowing spread and the mean of the linear-scale lognormal
/// factor it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowScale {
    /// Standard deviation in nats, `0.1 ln(10) sigma_L`.
    pub sigma_z: f64,
    /// `exp(sigma_z^2 / 2)`.
    pub mean_factor: f64,
}

pub fn shadow_scale(sigma_l_db: f64) -> ShadowScale {
    debug_assert!(sigma_l_db >= 0.0);
    let sigma_z = 0.1 * LN_10 * sigma_l_db;
    ShadowScale {
        sigma_z,
        mean_factor: (0.5 * sigma_z * sigma_z).exp(),
    }
}

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(x / SQRT_2)
}

/// Closed form of `∫_0^x Q(t) dt = x Q(x) + (1 - e^{-x²/2}) / √(2π)`.
pub fn q_integral(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "q_integral needs x >= 0, got {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(1.0 / (2.0 * PI).sqrt());
    }
    Ok(x * q_function(x) + (-(0.5 * x * x)).exp_m1().abs() / (2.0 * PI).sqrt())
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Cooperation order: how many base stations jointly serve one region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CoopOrder {
    /// Single-BS baseline (no cooperation).
    One,
    Two,
    Three,
}

impl CoopOrder {
    pub fn count(self) -> usize {
        match self {
            CoopOrder::One => 1,
            CoopOrder::Two => 2,
            CoopOrder::Three => 3,
        }
    }

    pub fn is_cooperative(self) -> bool {
        self != CoopOrder::One
    }
}

impl TryFrom<u8> for CoopOrder {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(CoopOrder::One),
            2 => Ok(CoopOrder::Two),
            3 => Ok(CoopOrder::Three),
            other => Err(Error::UnsupportedOrder(other as usize)),
        }
    }
}

impl From<CoopOrder> for u8 {
    fn from(n: CoopOrder) -> u8 {
        n.count() as u8
    }
}

impl fmt::Display for CoopOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

/// Physical and layout parameters of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Hexagon side length, meters.
    pub d_m: f64,
    pub n: CoopOrder,
    /// Receive antennas per BS.
    pub m: u32,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Shadowing standard deviation, dB.
    pub sigma_l_db: f64,
    /// User transmit power, dBm.
    pub tx_power_dbm: f64,
    /// Per-antenna noise power, dBm.
    pub noise_power_dbm: f64,
    /// Frequency-reuse factor among cooperation regions (or cells for N=1).
    pub reuse: u32,
    /// Number of modeled interference tiers, 1 or 2.
    pub tiers: u8,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            d_m: 500.0,
            n: CoopOrder::Two,
            m: 1,
            alpha: 4.0,
            sigma_l_db: 4.0,
            tx_power_dbm: 20.0,
            noise_power_dbm: -100.0,
            reuse: 6,
            tiers: 1,
        }
    }
}

impl NetworkConfig {
    /// Default parameters for the given cooperation order (reuse 6 for
    /// CoMP, reuse 1 for the single-BS baseline).
    pub fn with_order(n: CoopOrder) -> Self {
        NetworkConfig {
            n,
            reuse: if n.is_cooperative() { 6 } else { 1 },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.d_m > 0.0) || !self.d_m.is_finite() {
            return bad(format!("d must be positive, got {}", self.d_m));
        }
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must exceed 2, got {}", self.alpha));
        }
        if !(self.sigma_l_db >= 0.0) || !self.sigma_l_db.is_finite() {
            return bad(format!("sigma_L must be >= 0 dB, got {}", self.sigma_l_db));
        }
        if self.m < 1 {
            return bad("M must be at least 1".into());
        }
        if !self.tx_power_dbm.is_finite() {
            return bad("tx power must be finite".into());
        }
        if self.noise_power_dbm.is_nan() || self.noise_power_dbm == f64::INFINITY {
            return bad("noise power must be finite or -inf".into());
        }
        if !matches!(self.tiers, 1 | 2) {
            return bad(format!("tiers must be 1 or 2, got {}", self.tiers));
        }
        match self.n {
            CoopOrder::One => {
                if !matches!(self.reuse, 1 | 7) {
                    return bad(format!(
                        "no-cooperation baseline supports reuse 1 or 7, got {}",
                        self.reuse
                    ));
                }
            }
            _ => {
                if self.reuse != 6 {
                    return bad(format!(
                        "cooperation order {} requires reuse 6, got {}",
                        self.n, self.reuse
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn shadow(&self) -> ShadowScale {
        shadow_scale(self.sigma_l_db)
    }

    pub fn tx_power(&self) -> PowerW {
        dbm_to_watts(self.tx_power_dbm)
    }

    /// Noise power in watts; `-inf` dBm maps to exactly zero.
    pub fn noise_power(&self) -> PowerW {
        if self.noise_power_dbm == f64::NEG_INFINITY {
            PowerW::ZERO
        } else {
            dbm_to_watts(self.noise_power_dbm)
        }
    }

    /// BS density on the hexagonal grid, `2 / (3√3 d²)`.
    pub fn density(&self) -> f64 {
        density_from_side(self.d_m)
    }

    pub fn with_side(&self, d_m: f64) -> Self {
        NetworkConfig {
            d_m,
            ..self.clone()
        }
    }

    /// Same configuration with the receiver noise removed.
    pub fn noiseless(&self) -> Self {
        NetworkConfig {
            noise_power_dbm: f64::NEG_INFINITY,
            ..self.clone()
        }
    }
}

pub fn density_from_side(d_m: f64) -> f64 {
    2.0 / (3.0 * 3f64.sqrt() * d_m * d_m)
}

pub fn side_from_density(lambda: f64) -> f64 {
    (2.0 / (3.0 * 3f64.sqrt() * lambda)).sqrt()
}
