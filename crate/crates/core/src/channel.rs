//! Downlink link budget: COST-231 Hata path loss, static lognormal shadowing,
//! Rayleigh fast fading and the Shannon SNR-to-rate map.
//!
//! Everything here is a pure function of its arguments plus an optional
//! caller-owned RNG, so one channel realisation can be regenerated exactly
//! from a seed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Below this range the Hata fit stops being meaningful.
pub const MIN_DISTANCE_M: f64 = 20.0;

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

const COST231_FREQ_MHZ: (f64, f64) = (1500.0, 2000.0);
const COST231_BS_HEIGHT_M: (f64, f64) = (30.0, 200.0);
const COST231_UE_HEIGHT_M: (f64, f64) = (1.0, 10.0);

/// COST-231 area class. Selects the additive correction `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvClass {
    /// Dense urban, `C = 3 dB`.
    #[default]
    Metro,
    /// Medium city / suburban, `C = 0 dB`.
    Suburban,
}

impl EnvClass {
    pub fn correction_db(self) -> f64 {
        match self {
            EnvClass::Metro => 3.0,
            EnvClass::Suburban => 0.0,
        }
    }
}

impl fmt::Display for EnvClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvClass::Metro => "metro",
            EnvClass::Suburban => "suburban",
        })
    }
}

impl FromStr for EnvClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "metro" => Ok(EnvClass::Metro),
            "suburban" => Ok(EnvClass::Suburban),
            _ => Err(format!("expected `metro` or `suburban`, got `{s}`")),
        }
    }
}

/// Link-budget constants shared by every user in the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Total downlink traffic-channel power.
    pub tx_power_dbm: f64,
    pub carrier_freq_mhz: f64,
    pub bandwidth_hz: f64,
    pub cell_radius_m: f64,
    pub shadowing_sigma_db: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub env_class: EnvClass,
    pub noise_figure_db: f64,
    pub slot_duration_s: f64,
    pub fast_fading_enabled: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            tx_power_dbm: 46.0,
            carrier_freq_mhz: 2000.0,
            bandwidth_hz: 10e6,
            cell_radius_m: 1000.0,
            shadowing_sigma_db: 8.0,
            bs_height_m: 30.0,
            ue_height_m: 1.5,
            env_class: EnvClass::Metro,
            noise_figure_db: 9.0,
            slot_duration_s: 1e-3,
            fast_fading_enabled: true,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite, got {v}")))
            }
        };
        finite("tx_power", self.tx_power_dbm)?;
        finite("noise_figure", self.noise_figure_db)?;
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::config("bandwidth", "must be > 0"));
        }
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return Err(Error::config("cell_radius", "must be > 0"));
        }
        if !(self.slot_duration_s > 0.0 && self.slot_duration_s.is_finite()) {
            return Err(Error::config("slot_duration", "must be > 0"));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return Err(Error::config("shadowing_sigma", "must be >= 0"));
        }
        in_range("carrier_freq", self.carrier_freq_mhz, COST231_FREQ_MHZ)?;
        in_range("bs_height", self.bs_height_m, COST231_BS_HEIGHT_M)?;
        in_range("ue_height", self.ue_height_m, COST231_UE_HEIGHT_M)?;
        Ok(())
    }

    /// Receiver noise floor over the full bandwidth.
    pub fn noise_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

fn in_range(key: &str, v: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("{v} outside COST-231 validity range [{lo}, {hi}]"),
        ))
    }
}

/// One user's static geometry and shadowing draw.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    pub user_id: usize,
    pub distance_m: f64,
    pub shadowing_db: f64,
    /// Most recent SNR (linear). Refreshed by the engine every slot.
    pub snr_linear: f64,
}

/// Output of [`cost231_path_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub db: f64,
    /// The requested distance was below [`MIN_DISTANCE_M`] and was clamped.
    pub clamped: bool,
}

/// Large-city mobile antenna height correction `a(h_m)`.
fn mobile_height_correction(ue_height_m: f64) -> f64 {
    3.2 * (11.75 * ue_height_m).log10().powi(2) - 4.97
}

/// COST-231 Hata median path loss.
pub fn cost231_path_loss(distance_m: f64, params: &ChannelParams) -> Result<PathLoss> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::config(
            "distance",
            format!("must be > 0, got {distance_m}"),
        ));
    }
    in_range("carrier_freq", params.carrier_freq_mhz, COST231_FREQ_MHZ)?;
    in_range("bs_height", params.bs_height_m, COST231_BS_HEIGHT_M)?;
    in_range("ue_height", params.ue_height_m, COST231_UE_HEIGHT_M)?;

    let clamped = distance_m < MIN_DISTANCE_M;
    let d_km = distance_m.max(MIN_DISTANCE_M) / 1000.0;
    let hb_log = params.bs_height_m.log10();
    let db = 46.3 + 33.9 * params.carrier_freq_mhz.log10()
        - 13.82 * hb_log
        - mobile_height_correction(params.ue_height_m)
        + (44.9 - 6.55 * hb_log) * d_km.log10()
        + params.env_class.correction_db();
    Ok(PathLoss { db, clamped })
}

/// Zero-mean normal shadowing in dB. Always consumes exactly one normal
/// variate so the RNG stream does not depend on `sigma`.
pub fn draw_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    if sigma_db == 0.0 {
        0.0
    } else {
        sigma_db * z
    }
}

/// Unit-mean exponential power gain (Rayleigh envelope).
pub fn draw_fast_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let g: f64 = Exp1.sample(rng);
        if g > 0.0 {
            return g;
        }
    }
}

/// Per-slot fading gain honouring `fast_fading_enabled`. The disabled path
/// does not touch the RNG.
pub fn fading_gain<R: Rng + ?Sized>(rng: &mut R, params: &ChannelParams) -> f64 {
    if params.fast_fading_enabled {
        draw_fast_fading(rng)
    } else {
        1.0
    }
}

/// Received-signal-to-noise ratio in dB, before fast fading.
pub fn mean_snr_db(params: &ChannelParams, link: &UserLink) -> Result<f64> {
    let pl = cost231_path_loss(link.distance_m, params)?;
    let rx_dbm = params.tx_power_dbm - pl.db + link.shadowing_db;
    Ok(rx_dbm - params.noise_dbm())
}

/// Linear SNR `γ` for one slot.
pub fn snr(params: &ChannelParams, link: &UserLink, fading_gain: f64) -> Result<f64> {
    Ok(db_to_linear(mean_snr_db(params, link)?) * fading_gain)
}

/// Bits deliverable in one slot at Shannon capacity over the full band.
pub fn instantaneous_rate(snr_linear: f64, params: &ChannelParams) -> Result<f64> {
    if !(snr_linear > 0.0) || !snr_linear.is_finite() {
        return Err(Error::Domain(format!(
            "SNR must be positive and finite, got {snr_linear}"
        )));
    }
    Ok(params.bandwidth_hz * snr_linear.ln_1p() / std::f64::consts::LN_2 * params.slot_duration_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// `radius * k / n` for `k = 1..=n`.
    #[default]
    EqualSpacing,
    /// Independent draws with uniform density over the disc area.
    UniformRing,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::EqualSpacing => "equal_spacing",
            Placement::UniformRing => "uniform_ring",
        })
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "equal_spacing" => Ok(Placement::EqualSpacing),
            "uniform_ring" => Ok(Placement::UniformRing),
            _ => Err(format!(
                "expected `equal_spacing` or `uniform_ring`, got `{s}`"
            )),
        }
    }
}

/// Distances from the base station, ordered by user index. `EqualSpacing`
/// yields increasing distance; the RNG is only used by `UniformRing`.
pub fn place_users<R: Rng + ?Sized>(
    n: usize,
    radius_m: f64,
    mode: Placement,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::config("n_users", "must be >= 1"));
    }
    if !(radius_m > 0.0) {
        return Err(Error::config("cell_radius", "must be > 0"));
    }
    Ok(match mode {
        Placement::EqualSpacing => (1..=n).map(|k| radius_m * k as f64 / n as f64).collect(),
        Placement::UniformRing => (0..n)
            .map(|_| {
                // 1 - U lies in (0, 1], keeping the distance strictly positive.
                let u: f64 = rng.random();
                radius_m * (1.0 - u).sqrt()
            })
            .collect(),
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
