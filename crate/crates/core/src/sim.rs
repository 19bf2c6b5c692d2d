//! End-to-end pipeline, seeded Monte Carlo ensembles, and parameter sweeps.
//!
//! One realization runs the three-stage scheme in a fixed order: drop users,
//! compute channels, schedule beams, pair users by distance, then allocate
//! powers sequentially (cooperation power first, then the BS split). Each
//! realization owns an independent counter-derived random substream, and
//! aggregation walks results in realization-index order, so ensembles are
//! bit-reproducible at any degree of parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beamforming::{build_codebook, effective_gain, schedule_beams, BeamformingError};
use crate::channel::{bs_user_channel, noise_power, side_link_gain, ChannelError, ChannelVector};
use crate::config::{ConfigError, SimConfig, MIN_LINK_DISTANCE_M};
use crate::pairing::{distance_matrix, hungarian, PairingError};
use crate::power::{
    consumed_power, cooperation_power, energy_efficiency, link_sinrs, min_sinr, noma_fractions,
    pair_rates, LinkSinrs, PairAllocation, PairLink, PairRates, PowerError,
};
use crate::scenario::{deploy_users, euclidean_distance, PolarPoint};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("invalid value {value} for sweep axis {axis}: {reason}")]
    InvalidAxisValue {
        axis: &'static str,
        value: f64,
        reason: String,
    },
}

/// Everything decided and observed for one pair in one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub beam_index: usize,
    pub similarity: f64,
    pub cooperator: PolarPoint,
    pub edge: PolarPoint,
    pub side_distance_m: f64,
    pub link: PairLink,
    pub allocation: PairAllocation,
    /// Present only for feasible pairs.
    pub sinrs: Option<LinkSinrs>,
    /// Present only for feasible pairs.
    pub rates: Option<PairRates>,
}

/// Result of one Monte Carlo drop. The scalar fields are recomputable from
/// the per-pair records (feasible pairs only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub pairs: Vec<PairOutcome>,
    pub ee_bits_per_joule: f64,
    pub sum_rate_bps: f64,
    pub consumed_power_w: f64,
    /// Average rate of the feasible cooperating center users (0 if none).
    pub mean_center_rate_bps: f64,
    pub infeasible_pairs: usize,
}

/// Ensemble means over one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean_ee_bits_per_joule: f64,
    pub var_ee_bits_per_joule: f64,
    pub mean_sum_rate_bps: f64,
    pub mean_consumed_power_w: f64,
    pub mean_center_rate_bps: f64,
    /// Mean fraction of pairs per drop whose SIC balance has no valid split.
    pub infeasibility_rate: f64,
    pub num_realizations: usize,
    pub master_seed: u64,
}

/// Sweep axes. `NumUsers` values are total user counts (2 users per pair);
/// `Band` values select the frequency plan: 0 keeps the configured band,
/// 1 switches to the mmWave benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BsPower,
    MinRate,
    NumUsers,
    Band,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::BsPower => "bs_power",
            SweepAxis::MinRate => "min_rate",
            SweepAxis::NumUsers => "num_users",
            SweepAxis::Band => "band",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bs_power" => Ok(SweepAxis::BsPower),
            "min_rate" => Ok(SweepAxis::MinRate),
            "num_users" => Ok(SweepAxis::NumUsers),
            "band" => Ok(SweepAxis::Band),
            other => Err(format!(
                "unknown sweep axis `{other}` (expected bs_power, min_rate, num_users, or band)"
            )),
        }
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub summary: MonteCarloSummary,
}

/// A full sweep: per-point ensemble means plus the base configuration needed
/// to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub master_seed: u64,
    pub config: SimConfig,
}

/// Independent substream for realization `index` under `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Deterministic pairwise summation: always the same reduction tree for the
/// same length, independent of threading.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 8 => values.iter().sum(),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

/// Run the full three-stage scheme on one user drop.
pub fn run_realization(
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Result<RealizationResult, SimError> {
    let layout = deploy_users(config, rng)?;
    let codebook = build_codebook(config);
    let noise_w = noise_power(config.bandwidth_hz, config.noise_figure_db);
    let sinr_target = min_sinr(config.min_rate_bps, config.bandwidth_hz);

    let channels: Vec<ChannelVector> = layout
        .cooperators()
        .map(|p| {
            bs_user_channel(config, p.radius_m.max(MIN_LINK_DISTANCE_M), p.angle_rad)
        })
        .collect::<Result<_, _>>()?;
    let beams = schedule_beams(&codebook, &channels)?;
    let assignment = hungarian(&distance_matrix(&layout)?)?;

    let cooperators: Vec<PolarPoint> = layout.cooperators().copied().collect();
    let mut pairs = Vec::with_capacity(cooperators.len());
    for (i, cooperator) in cooperators.iter().enumerate() {
        let choice = beams.per_user[i];
        let edge = layout.edge_users[assignment.edge_for[i]];
        let side_distance_m =
            euclidean_distance(*cooperator, edge).max(MIN_LINK_DISTANCE_M);
        let link = PairLink {
            effective_bs_gain: effective_gain(&channels[i], &codebook.beams[choice.beam_index]),
            side_gain: side_link_gain(config, side_distance_m)?,
            si_gain: config.si_channel_gain,
            noise_center_w: noise_w,
            noise_edge_w: noise_w,
        };
        let coop_power_w = cooperation_power(sinr_target, link.noise_edge_w, link.side_gain)?;
        let allocation = noma_fractions(config.bs_power_w, coop_power_w, &link, config.si_kappa);
        let (sinrs, rates) = if allocation.feasible {
            let s = link_sinrs(&allocation, &link, config.si_kappa);
            (Some(s), Some(pair_rates(&s, config.bandwidth_hz)))
        } else {
            (None, None)
        };
        pairs.push(PairOutcome {
            beam_index: choice.beam_index,
            similarity: choice.similarity,
            cooperator: *cooperator,
            edge,
            side_distance_m,
            link,
            allocation,
            sinrs,
            rates,
        });
    }

    let feasible_allocs: Vec<PairAllocation> = pairs
        .iter()
        .filter(|p| p.allocation.feasible)
        .map(|p| p.allocation)
        .collect();
    let feasible_rates: Vec<PairRates> =
        pairs.iter().filter_map(|p| p.rates).collect();

    let sum_rate_bps = feasible_rates
        .iter()
        .map(|r| r.center_bps + r.edge_bps)
        .sum();
    let mean_center_rate_bps = if feasible_rates.is_empty() {
        0.0
    } else {
        feasible_rates.iter().map(|r| r.center_bps).sum::<f64>() / feasible_rates.len() as f64
    };

    Ok(RealizationResult {
        ee_bits_per_joule: energy_efficiency(&feasible_rates, &feasible_allocs, config),
        sum_rate_bps,
        consumed_power_w: consumed_power(&feasible_allocs, config),
        mean_center_rate_bps,
        infeasible_pairs: pairs.len() - feasible_allocs.len(),
        pairs,
    })
}

struct RealizationMetrics {
    ee: f64,
    sum_rate: f64,
    consumed_power: f64,
    center_rate: f64,
    infeasible_fraction: f64,
}

/// Run `config.num_realizations` independent drops and aggregate their
/// means. Realization i always uses substream (master_seed, i), and the
/// reduction order is fixed, so the result does not depend on how the work
/// is scheduled across threads.
pub fn run_monte_carlo(config: &SimConfig) -> Result<MonteCarloSummary, SimError> {
    config.validate()?;
    let metrics: Vec<RealizationMetrics> = (0..config.num_realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.master_seed, i as u64);
            let r = run_realization(config, &mut rng)?;
            Ok(RealizationMetrics {
                ee: r.ee_bits_per_joule,
                sum_rate: r.sum_rate_bps,
                consumed_power: r.consumed_power_w,
                center_rate: r.mean_center_rate_bps,
                infeasible_fraction: r.infeasible_pairs as f64 / r.pairs.len() as f64,
            })
        })
        .collect::<Result<_, SimError>>()?;

    let ees: Vec<f64> = metrics.iter().map(|m| m.ee).collect();
    let mean_ee = mean(&ees);
    let deviations: Vec<f64> = ees.iter().map(|e| (e - mean_ee) * (e - mean_ee)).collect();

    Ok(MonteCarloSummary {
        mean_ee_bits_per_joule: mean_ee,
        var_ee_bits_per_joule: mean(&deviations),
        mean_sum_rate_bps: mean(&metrics.iter().map(|m| m.sum_rate).collect::<Vec<_>>()),
        mean_consumed_power_w: mean(
            &metrics.iter().map(|m| m.consumed_power).collect::<Vec<_>>(),
        ),
        mean_center_rate_bps: mean(&metrics.iter().map(|m| m.center_rate).collect::<Vec<_>>()),
        infeasibility_rate: mean(
            &metrics.iter().map(|m| m.infeasible_fraction).collect::<Vec<_>>(),
        ),
        num_realizations: config.num_realizations,
        master_seed: config.master_seed,
    })
}

fn apply_axis(config: &SimConfig, axis: SweepAxis, value: f64) -> Result<SimConfig, SimError> {
    let invalid = |reason: String| SimError::InvalidAxisValue {
        axis: axis.as_str(),
        value,
        reason,
    };
    match axis {
        SweepAxis::BsPower => {
            if value <= 0.0 || !value.is_finite() {
                return Err(invalid("BS power must be strictly positive".into()));
            }
            Ok(SimConfig { bs_power_w: value, ..config.clone() })
        }
        SweepAxis::MinRate => {
            if value < 0.0 || !value.is_finite() {
                return Err(invalid("minimum rate must be nonnegative".into()));
            }
            Ok(SimConfig { min_rate_bps: value, ..config.clone() })
        }
        SweepAxis::NumUsers => {
            if !value.is_finite() || value.fract() != 0.0 {
                return Err(invalid("user count must be an integer".into()));
            }
            let users = value as i64;
            if users < 2 || users % 2 != 0 {
                return Err(invalid("user count must be even and at least 2".into()));
            }
            Ok(SimConfig { num_pairs: (users / 2) as usize, ..config.clone() })
        }
        SweepAxis::Band => {
            if value == 0.0 {
                Ok(config.clone())
            } else if value == 1.0 {
                Ok(config.mmwave_counterpart())
            } else {
                Err(invalid("band must be 0 (configured band) or 1 (mmWave)".into()))
            }
        }
    }
}

/// Evaluate a Monte Carlo ensemble per axis value. Every point reuses the
/// same master seed, so points that leave the drop geometry untouched see
/// identical user layouts (common random numbers), which makes trend
/// comparisons low-variance.
pub fn sweep(config: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult, SimError> {
    config.validate()?;
    if values.is_empty() {
        return Err(SimError::InvalidAxisValue {
            axis: axis.as_str(),
            value: f64::NAN,
            reason: "sweep needs at least one axis value".into(),
        });
    }
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let point_config = apply_axis(config, axis, value)?;
        let summary = run_monte_carlo(&point_config)?;
        points.push(SweepPoint { axis_value: value, summary });
    }
    Ok(SweepResult {
        axis,
        points,
        master_seed: config.master_seed,
        config: config.clone(),
    })
}
