//! Line-of-sight propagation model.
//!
//! THz indoor links are dominated by the direct path: spreading loss plus
//! molecular absorption leaves reflections tens of dB down, so every link is
//! a single LoS ray. This module computes that path loss, half-wavelength ULA
//! steering vectors, the BS-to-user channel vector, the scalar
//! device-to-device side-link gain, and thermal noise power.

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{SimConfig, SPEED_OF_LIGHT};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("link distance must be strictly positive, got {0} m")]
    NonPositiveDistance(f64),
}

/// Array response of a half-wavelength ULA toward a given departure angle.
/// Entry n is exp(j*pi*n*sin(theta))/sqrt(N), so the vector has unit l2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Downlink channel vector from the BS array to one single-antenna user.
/// Every entry has the same magnitude (single LoS path); only the inter-entry
/// phase progression carries the user direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Path loss (linear power ratio >= 0 dB) of a LoS link: the free-space
/// spreading term (4*pi*f*d/c)^2 times the molecular absorption term
/// exp(k_abs * d).
pub fn path_loss(
    frequency_hz: f64,
    distance_m: f64,
    absorption_per_m: f64,
) -> Result<f64, ChannelError> {
    if distance_m <= 0.0 || distance_m.is_nan() {
        return Err(ChannelError::NonPositiveDistance(distance_m));
    }
    let spreading = (4.0 * std::f64::consts::PI * frequency_hz * distance_m / SPEED_OF_LIGHT).powi(2);
    Ok(spreading * (absorption_per_m * distance_m).exp())
}

/// ULA steering vector toward `angle_rad` for `num_antennas` elements.
pub fn steering_vector(num_antennas: usize, angle_rad: f64) -> SteeringVector {
    let scale = 1.0 / (num_antennas as f64).sqrt();
    let phase_step = std::f64::consts::PI * angle_rad.sin();
    let entries = (0..num_antennas)
        .map(|n| Complex64::from_polar(scale, phase_step * n as f64))
        .collect();
    SteeringVector { entries }
}

/// Channel vector from the BS to a user at distance `distance_m` and angle
/// `angle_rad`: sqrt(N) * sqrt(1/PL) * Omega * a(theta), where Omega combines
/// the BS and user antenna gains as sqrt(G_bs * G_user).
///
/// With a perfectly aligned unit-norm beam w = a(theta), the effective gain
/// |h^H w|^2 equals N * G_bs * G_user / PL.
pub fn bs_user_channel(
    config: &SimConfig,
    distance_m: f64,
    angle_rad: f64,
) -> Result<ChannelVector, ChannelError> {
    let pl = path_loss(
        config.carrier_frequency_hz,
        distance_m,
        config.absorption_coeff_per_m,
    )?;
    let omega = (config.bs_gain_linear * config.user_gain_linear).sqrt();
    let amplitude = (config.num_antennas as f64).sqrt() * (1.0 / pl).sqrt() * omega;
    let steering = steering_vector(config.num_antennas, angle_rad);
    let entries = steering.entries.iter().map(|a| amplitude * a).collect();
    Ok(ChannelVector { entries })
}

/// Power gain |h|^2 of the scalar device-to-device side link: the N = 1
/// specialization of the LoS model with the configured side-link antenna
/// gain on both device ends. The phase never enters any downstream
/// expression, so only the magnitude squared is returned.
pub fn side_link_gain(config: &SimConfig, distance_m: f64) -> Result<f64, ChannelError> {
    let pl = path_loss(
        config.carrier_frequency_hz,
        distance_m,
        config.absorption_coeff_per_m,
    )?;
    Ok(config.side_gain_linear * config.side_gain_linear / pl)
}

/// Thermal noise power (W) over `bandwidth_hz` with the given noise figure:
/// 10*log10(W) + N_f - 174 dBm.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    let dbm = 10.0 * bandwidth_hz.log10() + noise_figure_db - 174.0;
    10f64.powf((dbm - 30.0) / 10.0)
}
