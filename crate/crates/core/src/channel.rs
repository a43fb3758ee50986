//! Physical-layer link math: log-distance path gain, thermal noise, SINR,
//! Shannon capacity and energy efficiency.
//!
//! Everything here works in linear units (W, linear gain, linear SINR).
//! Conversions to dB happen only at the I/O boundary.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{name} {constraint} required (got {value})")]
    Domain {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
}

impl ChannelError {
    pub(crate) fn domain(name: &'static str, constraint: &'static str, value: f64) -> Self {
        ChannelError::Domain {
            name,
            constraint,
            value,
        }
    }
}

/// Small-scale fading applied on top of the deterministic path gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Fading {
    #[default]
    None,
    /// Power gain multiplied by an Exp(1) draw; link metrics are averaged
    /// over `trials` independent draws.
    Rayleigh { trials: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub path_loss_exponent: f64,
    pub carrier_frequency_hz: f64,
    pub reference_distance_m: f64,
    pub noise_temperature_k: f64,
    pub noise_figure_db: f64,
    pub fading: Fading,
}

impl ChannelModel {
    /// Model with the given path-loss exponent and carrier, anchored at 1 m,
    /// 290 K and a 0 dB noise figure, no fading.
    pub fn new(path_loss_exponent: f64, carrier_frequency_hz: f64) -> Result<Self, ChannelError> {
        let model = ChannelModel {
            path_loss_exponent,
            carrier_frequency_hz,
            reference_distance_m: 1.0,
            noise_temperature_k: 290.0,
            noise_figure_db: 0.0,
            fading: Fading::None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        check(
            self.path_loss_exponent >= 1.0,
            "path_loss_exponent",
            "≥ 1",
            self.path_loss_exponent,
        )?;
        check(
            self.carrier_frequency_hz > 0.0,
            "carrier_frequency_hz",
            "> 0",
            self.carrier_frequency_hz,
        )?;
        check(
            self.reference_distance_m > 0.0,
            "reference_distance_m",
            "> 0",
            self.reference_distance_m,
        )?;
        check(
            self.noise_temperature_k > 0.0,
            "noise_temperature_k",
            "> 0",
            self.noise_temperature_k,
        )?;
        check(
            self.noise_figure_db >= 0.0,
            "noise_figure_db",
            "≥ 0",
            self.noise_figure_db,
        )?;
        if let Fading::Rayleigh { trials } = self.fading {
            check(trials >= 1, "fading.rayleigh.trials", "≥ 1", trials as f64)?;
        }
        // The free-space anchor must itself be a loss, otherwise the clamp
        // below d₀ would hand out gains above unity.
        let anchor = self.reference_gain();
        check(
            anchor <= 1.0,
            "reference_distance_m",
            "≥ wavelength / 4π",
            self.reference_distance_m,
        )
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Friis free-space gain at the reference distance.
    pub fn reference_gain(&self) -> f64 {
        let ratio = self.wavelength_m() / (4.0 * std::f64::consts::PI * self.reference_distance_m);
        ratio * ratio
    }

    /// Log-distance power gain `g(d₀)·(d/d₀)^(−α)`, held at `g(d₀)` inside d₀.
    pub fn path_gain(&self, distance_m: f64) -> Result<f64, ChannelError> {
        check(distance_m > 0.0, "distance_m", "> 0", distance_m)?;
        let anchor = self.reference_gain();
        if distance_m <= self.reference_distance_m {
            return Ok(anchor);
        }
        let gain = anchor * (distance_m / self.reference_distance_m).powf(-self.path_loss_exponent);
        check(
            gain > 0.0 && gain.is_finite(),
            "distance_m",
            "below the gain underflow limit",
            distance_m,
        )?;
        Ok(gain)
    }

    /// Thermal noise `k·T·B` degraded by the noise figure.
    pub fn noise_power(&self, bandwidth_hz: f64) -> Result<f64, ChannelError> {
        check(bandwidth_hz > 0.0, "bandwidth_hz", "> 0", bandwidth_hz)?;
        let thermal = BOLTZMANN * self.noise_temperature_k * bandwidth_hz;
        Ok(thermal * db_to_linear(self.noise_figure_db))
    }
}

fn check(ok: bool, name: &'static str, constraint: &'static str, value: f64) -> Result<(), ChannelError> {
    if ok {
        Ok(())
    } else {
        Err(ChannelError::domain(name, constraint, value))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// A transmitter as seen by one receiver: its power and the linear channel
/// gain between the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub power_w: f64,
    pub gain: f64,
}

impl Transmitter {
    pub fn new(power_w: f64, gain: f64) -> Result<Self, ChannelError> {
        let tx = Transmitter { power_w, gain };
        tx.validate()?;
        Ok(tx)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        check(
            self.power_w >= 0.0 && self.power_w.is_finite(),
            "power_w",
            "finite and ≥ 0",
            self.power_w,
        )?;
        check(self.gain > 0.0 && self.gain <= 1.0, "gain", "in (0, 1]", self.gain)
    }

    pub fn received_power_w(&self) -> f64 {
        self.power_w * self.gain
    }
}

/// Signal to interference plus noise ratio at one receiver.
///
/// `interferers` lists only the co-channel transmitters other than the
/// wanted one, so the denominator is `Σ p_k h_k + σ²` over that list.
pub fn sinr(signal: &Transmitter, interferers: &[Transmitter], noise_w: f64) -> Result<f64, ChannelError> {
    check(noise_w > 0.0 && noise_w.is_finite(), "noise_w", "> 0", noise_w)?;
    signal.validate()?;
    let mut interference = 0.0;
    for tx in interferers {
        tx.validate()?;
        interference += tx.received_power_w();
    }
    Ok(signal.received_power_w() / (interference + noise_w))
}

/// Shannon capacity summed over parallel routes, `Σ B·log₂(1 + SINRᵢ)`.
pub fn capacity(bandwidth_hz: f64, sinr_values: &[f64]) -> Result<f64, ChannelError> {
    check(bandwidth_hz > 0.0, "bandwidth_hz", "> 0", bandwidth_hz)?;
    let mut total = 0.0;
    for &s in sinr_values {
        check(s >= 0.0 && s.is_finite(), "sinr", "finite and ≥ 0", s)?;
        total += bandwidth_hz * (1.0 + s).log2();
    }
    Ok(total)
}

/// Bits per joule: capacity over `hop_count × max_tx_power_w`.
pub fn energy_efficiency(capacity_bps: f64, hop_count: u32, max_tx_power_w: f64) -> Result<f64, ChannelError> {
    check(hop_count >= 1, "hop_count", "≥ 1", hop_count as f64)?;
    check(
        max_tx_power_w > 0.0 && max_tx_power_w.is_finite(),
        "max_tx_power_w",
        "> 0",
        max_tx_power_w,
    )?;
    check(
        capacity_bps >= 0.0 && capacity_bps.is_finite(),
        "capacity_bps",
        "finite and ≥ 0",
        capacity_bps,
    )?;
    Ok(capacity_bps / (hop_count as f64 * max_tx_power_w))
}

/// Multiplies `gain` by one fading draw. A no-op without fading.
pub fn apply_fading<R: Rng + ?Sized>(gain: f64, fading: Fading, rng: &mut R) -> f64 {
    match fading {
        Fading::None => gain,
        Fading::Rayleigh { .. } => {
            let power: f64 = Exp1.sample(rng);
            gain * power
        }
    }
}

/// Computed metrics for a single link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub gain: f64,
    pub sinr: f64,
    pub capacity_bps: f64,
    pub ee_bits_per_joule: f64,
}
