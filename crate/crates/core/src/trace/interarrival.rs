//! Up-crossing interarrival samples for the rescaled-exponential studies.
//!
//! Each sampler runs independent trajectory chunks, seeded from replication
//! indices 0, 1, ... of a [`SeedStream`], until `n` interarrivals are
//! collected. Interarrivals never straddle two chunks.

use std::f64::consts::PI;

use crate::error::{positive, Result};
use crate::geometry::{sample_poisson_points, FieldSample};
use crate::mginf::{rescale_high_radius, MGInfParams};
use crate::model::NetworkModel;
use crate::rng::{Rng, SeedStream};

use super::{
    interference_radius, simulate_coverage, sinr_trace, snr_trace, suppress_upcrossings,
    CrossingRecord, FadingModel, Track, Trajectory,
};

const MIN_CHUNK: f64 = 5_000.0;
const MAX_SAMPLED_CHUNK: f64 = 40_000.0;
/// Chunks that produce nothing this many times in a row abort the sampler.
const MAX_EMPTY_CHUNKS: usize = 1_000;

/// Runs `chunk` on replications 0, 1, ... until `n` values are collected.
pub fn collect_samples(
    n: usize,
    seeds: SeedStream,
    mut chunk: impl FnMut(&mut Rng) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut empty = 0;
    let mut i = 0;
    while out.len() < n {
        let xs = chunk(&mut seeds.rng(i))?;
        if xs.is_empty() {
            empty += 1;
            if empty >= MAX_EMPTY_CHUNKS {
                return Err(crate::Error::InsufficientData(format!(
                    "{} of {n} interarrivals after {i} chunks",
                    out.len()
                )));
            }
        } else {
            empty = 0;
        }
        out.extend(xs);
        i += 1;
    }
    out.truncate(n);
    Ok(out)
}

/// Mean up-crossing interarrival e^{λπr²}/(2λvr) of the coverage process.
pub fn mean_interarrival(model: &NetworkModel, radius: f64) -> f64 {
    (model.load(radius)).exp() / rescale_high_radius(model, radius)
}

/// Exact coverage interarrivals at `radius` (no fading), unscaled.
pub fn coverage_interarrivals(
    model: &NetworkModel,
    radius: f64,
    n: usize,
    seeds: SeedStream,
) -> Result<Vec<f64>> {
    positive("radius", radius)?;
    let chunk = (250.0 * mean_interarrival(model, radius)).max(MIN_CHUNK);
    collect_samples(n, seeds, |rng| {
        Ok(
            simulate_coverage(model.node_intensity, model.velocity, radius, chunk, rng)?
                .interarrivals(),
        )
    })
}

/// Dead time 2E[B] used to suppress fading-induced chatter at level γ.
pub fn fading_dead_time(model: &NetworkModel, gamma: f64) -> Result<f64> {
    Ok(2.0 * MGInfParams::for_threshold(model, gamma)?.busy_mean())
}

/// Interarrivals of the up-crossings of the sampled, faded SNR at level γ,
/// after dropping up-crossings within `dead_time` of the last kept one.
pub fn fading_interarrivals(
    model: &NetworkModel,
    gamma: f64,
    fading: FadingModel,
    dt: f64,
    dead_time: f64,
    n: usize,
    seeds: SeedStream,
) -> Result<Vec<f64>> {
    let lam = model.node_intensity;
    let r = model.coverage_radius(gamma)?;
    let chunk = (100.0 * mean_interarrival(model, r)).clamp(MIN_CHUNK, MAX_SAMPLED_CHUNK);
    collect_samples(n, seeds, |rng| {
        let traj = Trajectory::along_x(model.velocity, chunk)?;
        let nodes = sample_poisson_points(lam, &traj.padded_window(r, lam)?, rng)?;
        let track = Track::new(&nodes, traj);
        let trace = snr_trace(&track, model, dt, fading, rng)?;
        let rec = suppress_upcrossings(&CrossingRecord::from_sampled(&trace, gamma), dead_time)?;
        Ok(rec.interarrivals())
    })
}

/// Interarrivals of the up-crossings of the sampled SINR at level γ, with
/// interference from nodes within [`interference_radius`].
pub fn sinr_interarrivals(
    model: &NetworkModel,
    gamma: f64,
    dt: f64,
    n: usize,
    seeds: SeedStream,
) -> Result<Vec<f64>> {
    let lam = model.node_intensity;
    let r = model.coverage_radius(gamma)?;
    let r_int = interference_radius(r, lam);
    let chunk = (100.0 * mean_interarrival(model, r)).clamp(MIN_CHUNK, MAX_SAMPLED_CHUNK);
    collect_samples(n, seeds, |rng| {
        let traj = Trajectory::along_x(model.velocity, chunk)?;
        let w = traj.window(r_int)?;
        let field =
            FieldSample::from_points(sample_poisson_points(lam, &w, rng)?, Vec::new(), w, 0);
        let track = Track::new(&field.nodes, traj);
        let trace = sinr_trace(&field, &track, model, dt, r_int, Some(r))?;
        Ok(CrossingRecord::from_sampled(&trace, gamma).interarrivals())
    })
}

/// Divides every sample by the sample mean.
pub fn normalize_by_mean(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| x / m).collect()
}

/// Radius with λπr² = `load`.
pub fn radius_for_load(model: &NetworkModel, load: f64) -> f64 {
    (load / (model.node_intensity * PI)).sqrt()
}
