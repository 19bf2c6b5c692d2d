//! User deployment over one BS sector.
//!
//! Every drop places `num_pairs` cooperating cell-center users in the
//! farthest band of the cell-center disk and `num_pairs` cell-edge users in
//! the edge annulus, both uniform in area. Non-cooperating cell-center users
//! never enter any rate or power sum, so they are not generated at all.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SimConfig};

/// A user position in BS-centric polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub radius_m: f64,
    pub angle_rad: f64,
}

/// Planar Euclidean distance between two polar points (law of cosines).
pub fn euclidean_distance(a: PolarPoint, b: PolarPoint) -> f64 {
    let sq = a.radius_m * a.radius_m + b.radius_m * b.radius_m
        - 2.0 * a.radius_m * b.radius_m * (a.angle_rad - b.angle_rad).cos();
    sq.max(0.0).sqrt()
}

/// One drop of user positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserLayout {
    pub center_users: Vec<PolarPoint>,
    pub edge_users: Vec<PolarPoint>,
    /// Indices into `center_users` of the cooperating subset. Every generated
    /// center user cooperates, so this is currently the identity.
    pub cooperator_indices: Vec<usize>,
}

impl UserLayout {
    pub fn cooperators(&self) -> impl Iterator<Item = &PolarPoint> {
        self.cooperator_indices.iter().map(|&i| &self.center_users[i])
    }

    pub fn num_pairs(&self) -> usize {
        self.cooperator_indices.len()
    }
}

/// Uniform-in-area radius over the annulus [r_in, r_out] via the inverse CDF
/// r = sqrt(u * (r_out^2 - r_in^2) + r_in^2).
pub fn sample_annulus_radius(rng: &mut impl Rng, r_in: f64, r_out: f64) -> f64 {
    let u: f64 = rng.random();
    (u * (r_out * r_out - r_in * r_in) + r_in * r_in).sqrt()
}

fn sample_angle(rng: &mut impl Rng, start: f64, end: f64) -> f64 {
    let u: f64 = rng.random();
    start + u * (end - start)
}

/// Draw one user layout. Cooperators are sampled directly inside the
/// cooperator band, which guarantees the required count without rejection.
/// Draw order is fixed (all cooperators first, then all edge users; radius
/// before angle) so a given stream always yields the same layout.
pub fn deploy_users(config: &SimConfig, rng: &mut impl Rng) -> Result<UserLayout, ConfigError> {
    config.validate()?;
    let k = config.num_pairs;
    let d_center = config.center_radius_m();
    let band_inner = config.cooperator_band_inner_m();
    let (start, end) = (config.sector_start_rad, config.sector_end_rad);

    let mut center_users = Vec::with_capacity(k);
    for _ in 0..k {
        let radius_m = sample_annulus_radius(rng, band_inner, d_center);
        let angle_rad = sample_angle(rng, start, end);
        center_users.push(PolarPoint { radius_m, angle_rad });
    }

    let mut edge_users = Vec::with_capacity(k);
    for _ in 0..k {
        // Flip the uniform variate so the radius lands in the half-open
        // interval (d_center, coverage]: the edge annulus excludes the
        // center-disk boundary.
        let u: f64 = rng.random();
        let u = 1.0 - u;
        let r2 = u * (config.coverage_radius_m * config.coverage_radius_m - d_center * d_center)
            + d_center * d_center;
        let radius_m = r2.sqrt();
        let angle_rad = sample_angle(rng, start, end);
        edge_users.push(PolarPoint { radius_m, angle_rad });
    }

    Ok(UserLayout {
        center_users,
        edge_users,
        cooperator_indices: (0..k).collect(),
    })
}
