//! Simulation configuration.
//!
//! All physical quantities are stored in SI-linear units (Hz, m, W, linear
//! antenna gain). Decibel values appear only at the CLI/config-file boundary;
//! the lone exception is the receiver noise figure, which enters the noise
//! formula in dB and is kept that way.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Shortest link distance the propagation model accepts (m). The free-space
/// term of the path-loss model diverges toward zero loss as d -> 0, so
/// callers clamp every link to at least this distance.
pub const MIN_LINK_DISTANCE_M: f64 = 0.1;

/// mmWave benchmark carrier frequency (Hz).
pub const MMWAVE_CARRIER_HZ: f64 = 28e9;

/// mmWave benchmark contiguous bandwidth (Hz).
pub const MMWAVE_BANDWIDTH_HZ: f64 = 2e9;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidField {
        field,
        reason: reason.into(),
    }
}

/// Static circuit power draw of the transmit chain (W): baseband processing,
/// one entry per RF chain, and one amplifier plus one phase shifter per
/// antenna element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitPowers {
    pub baseband_w: f64,
    pub rf_chain_w: f64,
    pub amplifier_w: f64,
    pub phase_shifter_w: f64,
}

impl Default for CircuitPowers {
    fn default() -> Self {
        Self {
            baseband_w: 0.2,
            rf_chain_w: 0.16,
            amplifier_w: 0.02,
            phase_shifter_w: 0.04,
        }
    }
}

/// Full parameter set for one simulation scenario.
///
/// Defaults describe the indoor THz downlink: a 3.42 THz window with 137 GHz
/// of contiguous bandwidth, a 4-element ULA behind a single RF chain covering
/// one 120-degree sector with 21 fixed beams, and a 7 m coverage region split
/// into a cell-center disk and a cell-edge annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Carrier frequency f (Hz).
    pub carrier_frequency_hz: f64,
    /// Contiguous bandwidth W (Hz).
    pub bandwidth_hz: f64,
    /// Molecular absorption coefficient k_abs (1/m) at the carrier.
    pub absorption_coeff_per_m: f64,
    /// Number of BS antenna elements N.
    pub num_antennas: usize,
    /// Number of beam spacings B; the codebook holds B+1 beams.
    pub num_beams: usize,
    /// Sector start angle (rad).
    pub sector_start_rad: f64,
    /// Sector end angle (rad).
    pub sector_end_rad: f64,
    /// BS antenna gain (linear).
    pub bs_gain_linear: f64,
    /// User antenna gain toward the BS (linear).
    pub user_gain_linear: f64,
    /// Per-device antenna gain on the cooperative side link (linear).
    /// Applies to both ends of the device-to-device hop.
    pub side_gain_linear: f64,
    /// BS transmit power per channel use p_k (W).
    pub bs_power_w: f64,
    /// Residual self-interference parameter kappa in [0, 1]; 0 models perfect
    /// cancellation at the full-duplex relay.
    pub si_kappa: f64,
    /// Magnitude-squared of the relay's self-interference channel |h_ii|^2
    /// (linear). Models the TX-to-RX leakage path of the full-duplex device
    /// after passive isolation.
    pub si_channel_gain: f64,
    /// Power-amplifier inefficiency xi (>= 1 in practice).
    pub pa_inefficiency: f64,
    /// Static circuit power components.
    pub circuit: CircuitPowers,
    /// Number of RF chains at the BS.
    pub num_rf_chains: usize,
    /// Minimum required rate for a cell-edge user (bit/s).
    pub min_rate_bps: f64,
    /// Overall coverage radius d_center + d_edge (m).
    pub coverage_radius_m: f64,
    /// Fraction of the coverage radius belonging to the cell-center disk.
    pub center_fraction: f64,
    /// Cooperators occupy the farthest `cooperator_band_fraction` of the
    /// cell-center radius.
    pub cooperator_band_fraction: f64,
    /// Number of cooperating-center / cell-edge user pairs per drop.
    pub num_pairs: usize,
    /// Receiver noise figure (dB).
    pub noise_figure_db: f64,
    /// Monte Carlo realizations per evaluation point.
    pub num_realizations: usize,
    /// Master seed; realization i uses an independent substream (seed, i).
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 3.42e12,
            bandwidth_hz: 137e9,
            absorption_coeff_per_m: 0.28,
            num_antennas: 4,
            num_beams: 20,
            sector_start_rad: -std::f64::consts::FRAC_PI_6,
            sector_end_rad: std::f64::consts::FRAC_PI_2,
            bs_gain_linear: 100.0,              // 20 dBi
            user_gain_linear: 10f64.powf(0.3),  // 3 dBi
            side_gain_linear: 10f64.powf(0.6),  // 6 dBi per device end
            bs_power_w: 9.0,
            si_kappa: 0.4,
            si_channel_gain: 1e-13, // -130 dB residual loopback coupling
            pa_inefficiency: 1.0 / 0.38,
            circuit: CircuitPowers::default(),
            num_rf_chains: 1,
            min_rate_bps: 20e9,
            coverage_radius_m: 7.0,
            center_fraction: 4.0 / 7.0,
            cooperator_band_fraction: 0.2,
            num_pairs: 6,
            noise_figure_db: 10.0,
            num_realizations: 1000,
            master_seed: 42,
        }
    }
}

impl SimConfig {
    /// Radius of the cell-center disk (m).
    pub fn center_radius_m(&self) -> f64 {
        self.coverage_radius_m * self.center_fraction
    }

    /// Inner radius of the cooperator band (m).
    pub fn cooperator_band_inner_m(&self) -> f64 {
        (1.0 - self.cooperator_band_fraction) * self.center_radius_m()
    }

    /// Angular width of the served sector (rad).
    pub fn sector_width_rad(&self) -> f64 {
        self.sector_end_rad - self.sector_start_rad
    }

    /// The same scenario moved to the mmWave benchmark band (28 GHz carrier,
    /// 2 GHz bandwidth). Molecular absorption is negligible there and is set
    /// to zero.
    pub fn mmwave_counterpart(&self) -> SimConfig {
        SimConfig {
            carrier_frequency_hz: MMWAVE_CARRIER_HZ,
            bandwidth_hz: MMWAVE_BANDWIDTH_HZ,
            absorption_coeff_per_m: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn require_positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
            if value <= 0.0 || !value.is_finite() {
                return Err(invalid(field, format!("must be strictly positive, got {value}")));
            }
            Ok(())
        }
        fn require_nonnegative(field: &'static str, value: f64) -> Result<(), ConfigError> {
            if value < 0.0 || !value.is_finite() {
                return Err(invalid(field, format!("must be nonnegative, got {value}")));
            }
            Ok(())
        }

        require_positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        require_positive("bandwidth_hz", self.bandwidth_hz)?;
        require_nonnegative("absorption_coeff_per_m", self.absorption_coeff_per_m)?;
        require_positive("bs_gain_linear", self.bs_gain_linear)?;
        require_positive("user_gain_linear", self.user_gain_linear)?;
        require_positive("side_gain_linear", self.side_gain_linear)?;
        require_positive("bs_power_w", self.bs_power_w)?;
        require_positive("pa_inefficiency", self.pa_inefficiency)?;
        require_positive("coverage_radius_m", self.coverage_radius_m)?;
        require_nonnegative("min_rate_bps", self.min_rate_bps)?;
        require_nonnegative("si_channel_gain", self.si_channel_gain)?;
        require_nonnegative("circuit.baseband_w", self.circuit.baseband_w)?;
        require_nonnegative("circuit.rf_chain_w", self.circuit.rf_chain_w)?;
        require_nonnegative("circuit.amplifier_w", self.circuit.amplifier_w)?;
        require_nonnegative("circuit.phase_shifter_w", self.circuit.phase_shifter_w)?;

        if !(0.0..=1.0).contains(&self.si_kappa) {
            return Err(invalid("si_kappa", format!("must lie in [0, 1], got {}", self.si_kappa)));
        }
        if !(self.center_fraction > 0.0 && self.center_fraction < 1.0) {
            return Err(invalid(
                "center_fraction",
                format!("must lie in (0, 1), got {}", self.center_fraction),
            ));
        }
        if !(self.cooperator_band_fraction > 0.0 && self.cooperator_band_fraction <= 1.0) {
            return Err(invalid(
                "cooperator_band_fraction",
                format!("must lie in (0, 1], got {}", self.cooperator_band_fraction),
            ));
        }
        if self.num_antennas < 1 {
            return Err(invalid("num_antennas", "must be at least 1"));
        }
        if self.num_beams < 1 {
            return Err(invalid("num_beams", "must be at least 1"));
        }
        if !self.sector_start_rad.is_finite()
            || !self.sector_end_rad.is_finite()
            || self.sector_end_rad <= self.sector_start_rad
        {
            return Err(invalid(
                "sector_end_rad",
                format!(
                    "sector must have positive width, got [{}, {}]",
                    self.sector_start_rad, self.sector_end_rad
                ),
            ));
        }
        if self.num_pairs < 1 {
            return Err(invalid("num_pairs", "must be at least 1"));
        }
        if self.num_rf_chains < 1 {
            return Err(invalid("num_rf_chains", "must be at least 1"));
        }
        if self.num_realizations < 1 {
            return Err(invalid("num_realizations", "must be at least 1"));
        }
        Ok(())
    }
}
