//! Deterministic link-level simulator for an energy-efficient full-duplex
//! cooperative NOMA downlink in indoor THz networks.
//!
//! A single-RF-chain BS with an N-element ULA serves user pairs in one
//! 120-degree sector: each cooperating cell-center user is scheduled on its
//! best fixed analog beam, paired with a cell-edge user by minimum Euclidean
//! distance (Hungarian method), and relays the edge user's message over a
//! full-duplex device-to-device side link. Power is allocated in closed form
//! so every served edge user gets exactly its minimum required rate, then the
//! ensemble evaluates energy efficiency, sum rate, and consumed power over
//! seeded Monte Carlo drops, including an mmWave benchmark plan.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod pairing;
pub mod power;
pub mod scenario;
pub mod sim;

pub use config::{SimConfig, MIN_LINK_DISTANCE_M, SPEED_OF_LIGHT};
pub use sim::{
    run_monte_carlo, run_realization, substream, sweep, MonteCarloSummary, RealizationResult,
    SimError, SweepAxis, SweepPoint, SweepResult,
};
