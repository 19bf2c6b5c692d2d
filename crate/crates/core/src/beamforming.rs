//! Fixed analog beam grid and best-beam scheduling.
//!
//! The BS drives its ULA through phase shifters only, so it picks precoders
//! from a codebook of B+1 steering vectors spread uniformly over the sector.
//! Each cooperating cell-center user is scheduled on the beam with the
//! highest normalized correlation to its channel. For LoS channels that
//! correlation collapses to a Fejer-kernel function of the normalized
//! direction offset, which the tests use as an independent closed form.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{steering_vector, ChannelVector, SteeringVector};
use crate::config::SimConfig;

#[derive(Debug, Error, PartialEq)]
pub enum BeamformingError {
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("dimension mismatch: channel has {channel} entries, beam has {beam}")]
    DimensionMismatch { channel: usize, beam: usize },
}

/// The sector's candidate analog precoders and their boresight angles.
#[derive(Debug, Clone)]
pub struct BeamCodebook {
    pub beams: Vec<SteeringVector>,
    pub beam_angles: Vec<f64>,
}

impl BeamCodebook {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Best beam found for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamChoice {
    pub beam_index: usize,
    pub similarity: f64,
}

/// Per-cooperator beam selection, in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamAssignment {
    pub per_user: Vec<BeamChoice>,
}

/// Build the B+1 beams whose boresights split the sector into B equal
/// angular steps, endpoints included.
pub fn build_codebook(config: &SimConfig) -> BeamCodebook {
    let b = config.num_beams;
    let step = config.sector_width_rad() / b as f64;
    let beam_angles: Vec<f64> = (0..=b)
        .map(|i| config.sector_start_rad + i as f64 * step)
        .collect();
    let beams = beam_angles
        .iter()
        .map(|&theta| steering_vector(config.num_antennas, theta))
        .collect();
    BeamCodebook { beams, beam_angles }
}

/// Normalized correlation |h^H w| / (||h|| * ||w||) in [0, 1].
pub fn cosine_similarity(h: &ChannelVector, w: &SteeringVector) -> Result<f64, BeamformingError> {
    if h.len() != w.len() {
        return Err(BeamformingError::DimensionMismatch {
            channel: h.len(),
            beam: w.len(),
        });
    }
    let h_norm = h.norm();
    let w_norm = w.norm();
    if h_norm == 0.0 || w_norm == 0.0 {
        return Err(BeamformingError::ZeroNorm);
    }
    let inner: Complex64 = h
        .entries
        .iter()
        .zip(w.entries.iter())
        .map(|(hi, wi)| hi.conj() * wi)
        .sum();
    Ok((inner.norm() / (h_norm * w_norm)).min(1.0))
}

/// Received beamforming power gain |h^H w|^2 for a chosen precoder.
pub fn effective_gain(h: &ChannelVector, w: &SteeringVector) -> f64 {
    let inner: Complex64 = h
        .entries
        .iter()
        .zip(w.entries.iter())
        .map(|(hi, wi)| hi.conj() * wi)
        .sum();
    inner.norm_sqr()
}

/// Schedule each user on its highest-similarity beam. Ties go to the lowest
/// beam index, so the result is independent of any randomness. Beam reuse
/// across users is allowed: each pair is served on its own orthogonal
/// channel use.
pub fn schedule_beams(
    codebook: &BeamCodebook,
    channels: &[ChannelVector],
) -> Result<BeamAssignment, BeamformingError> {
    let mut per_user = Vec::with_capacity(channels.len());
    for h in channels {
        let mut best = BeamChoice { beam_index: 0, similarity: -1.0 };
        for (b, w) in codebook.beams.iter().enumerate() {
            let s = cosine_similarity(h, w)?;
            if s > best.similarity {
                best = BeamChoice { beam_index: b, similarity: s };
            }
        }
        per_user.push(best);
    }
    Ok(BeamAssignment { per_user })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bs_user_channel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Closed-form magnitude of the normalized steering-vector correlation:
    // |sin(N x / 2) / (N sin(x / 2))| with x = pi * (sin(theta_u) - sin(theta_b)).
    fn fejer_similarity(n: usize, sin_user: f64, sin_beam: f64) -> f64 {
        let x = std::f64::consts::PI * (sin_user - sin_beam);
        let half = x / 2.0;
        if half.sin().abs() < 1e-12 {
            return 1.0;
        }
        ((n as f64 * half).sin() / (n as f64 * half.sin())).abs()
    }

    fn channel_at(cfg: &SimConfig, theta: f64) -> ChannelVector {
        bs_user_channel(cfg, 2.5, theta).unwrap()
    }

    #[test]
    fn codebook_spans_sector() {
        let cfg = SimConfig::default();
        let cb = build_codebook(&cfg);
        assert_eq!(cb.len(), 21);
        assert_relative_eq!(cb.beam_angles[0], -std::f64::consts::FRAC_PI_6, max_relative = 1e-15);
        assert_relative_eq!(cb.beam_angles[20], std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
        // Constant 6-degree spacing.
        let step = 2.0 * std::f64::consts::PI / 60.0;
        for w in cb.beam_angles.windows(2) {
            assert_relative_eq!(w[1] - w[0], step, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_spacing_codebook_has_two_endpoint_beams() {
        let cfg = SimConfig { num_beams: 1, ..SimConfig::default() };
        let cb = build_codebook(&cfg);
        assert_eq!(cb.len(), 2);
        assert_relative_eq!(cb.beam_angles[0], cfg.sector_start_rad);
        assert_relative_eq!(cb.beam_angles[1], cfg.sector_end_rad);
    }

    #[test]
    fn aligned_beam_has_unit_similarity() {
        let cfg = SimConfig::default();
        let theta = 0.3;
        let h = channel_at(&cfg, theta);
        let w = steering_vector(cfg.num_antennas, theta);
        assert_relative_eq!(cosine_similarity(&h, &w).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn first_null_of_four_element_array() {
        // sin(theta_u) - sin(theta_b) = 1/2 puts a 4-element array exactly on
        // a correlation null: |sin(pi) / (4 sin(pi/4))| = 0.
        let cfg = SimConfig::default();
        let theta_u = std::f64::consts::FRAC_PI_6; // sin = 0.5
        let h = channel_at(&cfg, theta_u);
        let w = steering_vector(cfg.num_antennas, 0.0); // sin = 0.0
        assert!(cosine_similarity(&h, &w).unwrap() < 1e-12);
        assert!(fejer_similarity(4, 0.5, 0.0) < 1e-15);
    }

    #[test]
    fn inner_product_matches_fejer_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let n = rng.random_range(1usize..=32);
            let theta_u: f64 = rng.random_range(-1.5..1.5);
            let theta_b: f64 = rng.random_range(-1.5..1.5);
            let cfg = SimConfig { num_antennas: n, ..SimConfig::default() };
            let h = channel_at(&cfg, theta_u);
            let w = steering_vector(n, theta_b);
            let by_inner = cosine_similarity(&h, &w).unwrap();
            let by_fejer = fejer_similarity(n, theta_u.sin(), theta_b.sin());
            assert!(
                (by_inner - by_fejer).abs() < 1e-12,
                "N={n} theta_u={theta_u} theta_b={theta_b}: {by_inner} vs {by_fejer}"
            );
        }
    }

    #[test]
    fn similarity_bounded_to_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = SimConfig::default();
        for _ in 0..500 {
            let h = channel_at(&cfg, rng.random_range(-1.5..1.5));
            let w = steering_vector(cfg.num_antennas, rng.random_range(-1.5..1.5));
            let s = cosine_similarity(&h, &w).unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn zero_norm_rejected() {
        let h = ChannelVector { entries: vec![Complex64::new(0.0, 0.0); 4] };
        let w = steering_vector(4, 0.1);
        assert_eq!(cosine_similarity(&h, &w), Err(BeamformingError::ZeroNorm));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let cfg = SimConfig::default();
        let h = channel_at(&cfg, 0.2);
        let w = steering_vector(8, 0.2);
        assert!(matches!(
            cosine_similarity(&h, &w),
            Err(BeamformingError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        // Similarity and the resulting argmax are invariant to any complex
        // rescaling of the channel.
        #[test]
        fn similarity_invariant_to_channel_scaling(
            theta in -1.5f64..1.5,
            scale_mag in 0.01f64..100.0,
            scale_phase in -3.1f64..3.1,
        ) {
            let cfg = SimConfig::default();
            let cb = build_codebook(&cfg);
            let h = channel_at(&cfg, theta);
            let c = Complex64::from_polar(scale_mag, scale_phase);
            let scaled = ChannelVector { entries: h.entries.iter().map(|e| c * e).collect() };
            let a = schedule_beams(&cb, std::slice::from_ref(&h)).unwrap();
            let b = schedule_beams(&cb, std::slice::from_ref(&scaled)).unwrap();
            prop_assert_eq!(a.per_user[0].beam_index, b.per_user[0].beam_index);
            prop_assert!((a.per_user[0].similarity - b.per_user[0].similarity).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_decreases_within_main_lobe() {
        // For |x| inside the main lobe (|x| < 2 pi / N) the correlation
        // strictly decreases away from alignment.
        let n = 4;
        let mut prev = f64::INFINITY;
        for step in 0..40 {
            let delta_sin = (step as f64 + 1.0) / 41.0 * (2.0 / n as f64) * 0.99;
            let s = fejer_similarity(n, delta_sin, 0.0);
            assert!(s < prev, "not decreasing at step {step}: {s} >= {prev}");
            prev = s;
        }
    }

    #[test]
    fn scheduling_matches_brute_force_argmax() {
        let cfg = SimConfig::default();
        let cb = build_codebook(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let channels: Vec<ChannelVector> = (0..64)
            .map(|_| channel_at(&cfg, rng.random_range(cfg.sector_start_rad..cfg.sector_end_rad)))
            .collect();
        let assignment = schedule_beams(&cb, &channels).unwrap();
        for (h, choice) in channels.iter().zip(assignment.per_user.iter()) {
            let mut best_idx = 0;
            let mut best_val = -1.0;
            for b in 0..cb.len() {
                let s = cosine_similarity(h, &cb.beams[b]).unwrap();
                if s > best_val {
                    best_val = s;
                    best_idx = b;
                }
            }
            assert_eq!(choice.beam_index, best_idx);
            assert_relative_eq!(choice.similarity, best_val, max_relative = 1e-15);
        }
    }

    #[test]
    fn user_on_boresight_gets_that_beam() {
        let cfg = SimConfig::default();
        let cb = build_codebook(&cfg);
        let h = channel_at(&cfg, cb.beam_angles[5]);
        let a = schedule_beams(&cb, std::slice::from_ref(&h)).unwrap();
        assert_eq!(a.per_user[0].beam_index, 5);
        assert_relative_eq!(a.per_user[0].similarity, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn identical_angles_get_identical_beams() {
        let cfg = SimConfig::default();
        let cb = build_codebook(&cfg);
        let h1 = channel_at(&cfg, 0.77);
        let h2 = channel_at(&cfg, 0.77);
        let a = schedule_beams(&cb, &[h1, h2]).unwrap();
        assert_eq!(a.per_user[0], a.per_user[1]);
    }
}
