//! Exact and sampled generation of the SNR, SINR, level-crossing, maxima and
//! handoff processes along a straight constant-velocity trajectory.
//!
//! Crossing statistics use exact interval arithmetic on the serving envelope;
//! fading and SINR use traces sampled every `dt` seconds.

mod crossing;
mod envelope;
pub mod interarrival;
mod sampled;

use serde::{Deserialize, Serialize};

pub use crossing::{suppress_upcrossings, CrossingRecord, DEGENERATE_INTERVAL};
pub use envelope::{Handoff, ServingSegment, Track, Trajectory};
pub use sampled::{
    doppler_coherence_time, interference_radius, sinr_trace, snr_trace, FadingKind, FadingModel,
    FadingProcess, SampledTrace, ServingCursor, DEFAULT_COHERENCE_TIME, DEFAULT_DT, MIN_DISTANCE,
};

pub(crate) use envelope::push_merged;

use crate::error::{positive, Result};
use crate::geometry::{FieldSample, Point, Window};

/// Exact on-set {t : L(t) <= radius} as the union of per-node chords.
pub fn coverage_intervals(nodes: &[Point], traj: &Trajectory, radius: f64) -> Vec<(f64, f64)> {
    chord_union(nodes.iter().map(|&p| (p, radius)), traj)
}

/// Union over discs (center, radius) of the time intervals the mobile spends
/// inside them, clipped to [0, T].
pub fn chord_union(
    discs: impl IntoIterator<Item = (Point, f64)>,
    traj: &Trajectory,
) -> Vec<(f64, f64)> {
    let len = traj.length();
    let mut chords: Vec<(f64, f64)> = discs
        .into_iter()
        .filter_map(|(p, r)| {
            let (a, b) = traj.to_track(p);
            let h2 = r * r - b * b;
            if h2 <= 0.0 {
                return None;
            }
            let h = h2.sqrt();
            let (lo, hi) = ((a - h).max(0.0), (a + h).min(len));
            (hi > lo).then_some((lo, hi))
        })
        .collect();
    chords.sort_by(|x, y| x.0.total_cmp(&y.0));
    let v = traj.velocity;
    let mut out = Vec::new();
    for (lo, hi) in chords {
        push_merged(&mut out, lo / v, hi / v);
    }
    out
}

/// Coverage on/off record at `radius` along a fresh trajectory of length
/// `duration` seconds through a Poisson node pattern. The record's level
/// field holds the radius.
pub fn simulate_coverage(
    node_intensity: f64,
    velocity: f64,
    radius: f64,
    duration: f64,
    rng: &mut crate::rng::Rng,
) -> Result<CrossingRecord> {
    let traj = Trajectory::along_x(velocity, duration)?;
    let window = traj.window(radius + 1.0)?;
    let nodes = crate::geometry::sample_poisson_points(node_intensity, &window, rng)?;
    Ok(exact_crossings(&nodes, &traj, radius, radius))
}

/// Crossing record of the exact coverage process at `radius`.
pub fn exact_crossings(
    nodes: &[Point],
    traj: &Trajectory,
    radius: f64,
    level: f64,
) -> CrossingRecord {
    CrossingRecord::from_intervals(
        level,
        &coverage_intervals(nodes, traj, radius),
        0.0,
        traj.duration,
    )
}

/// Times of SNR maxima that fall in the interior of the serving cell.
pub fn interior_maxima(field: &FieldSample, traj: &Trajectory) -> Vec<f64> {
    Track::new(&field.nodes, *traj).interior_maxima()
}

/// Handoff times, exact from the serving envelope.
pub fn cell_edge_crossings(field: &FieldSample, traj: &Trajectory) -> Vec<f64> {
    Track::new(&field.nodes, *traj).handoff_times()
}

/// Handoffs found by scanning the nearest node at `step` seconds and
/// bisecting each change to `tol` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScannedHandoffs {
    pub times: Vec<f64>,
    /// Cells crossed in less than this time may be missed.
    pub scan_resolution: f64,
}

pub fn cell_edge_crossings_scan(
    field: &FieldSample,
    traj: &Trajectory,
    step: f64,
    tol: f64,
) -> Result<ScannedHandoffs> {
    positive("step", step)?;
    positive("tol", tol)?;
    let serving = |t: f64| field.nearest_node(traj.position(t)).map(|(i, _)| i);
    let n = (traj.duration / step).ceil() as usize;
    let mut times = Vec::new();
    let mut prev_t = 0.0;
    let mut prev = serving(0.0);
    for k in 1..=n {
        let t = (k as f64 * step).min(traj.duration);
        let cur = serving(t);
        if cur != prev {
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if serving(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            times.push(0.5 * (lo + hi));
        }
        prev = cur;
        prev_t = t;
    }
    Ok(ScannedHandoffs {
        times,
        scan_resolution: step,
    })
}

/// Provenance of an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub seed: u64,
    pub window: Window,
    pub pad: f64,
    pub dt: f64,
    pub scan_resolution: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::model::{disc_intensity, NetworkModel};
    use crate::rng::rng_from_seed;

    #[test]
    fn no_nearby_nodes_gives_empty_union() {
        let traj = Trajectory::along_x(16.0, 10.0).unwrap();
        assert!(coverage_intervals(&[Point::new(50.0, 500.0)], &traj, 200.0).is_empty());
    }

    #[test]
    fn single_chord_length() {
        let traj = Trajectory::along_x(16.0, 100.0).unwrap();
        let y: f64 = 120.0;
        let iv = coverage_intervals(&[Point::new(800.0, y)], &traj, 200.0);
        assert_eq!(iv.len(), 1);
        let w = 2.0 * (200.0f64.powi(2) - y * y).sqrt() / 16.0;
        assert!((iv[0].1 - iv[0].0 - w).abs() < 1e-12);
        assert!((0.5 * (iv[0].0 + iv[0].1) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn intervals_match_dense_sampling() {
        let lambda = disc_intensity(200.0);
        let traj =
            Trajectory::new(Point::new(0.0, 0.0), Point::new(0.8, 0.6), 16.0, 300.0).unwrap();
        let w = traj.padded_window(200.0, lambda).unwrap();
        for seed in 0..3 {
            let f = FieldSample::sample(lambda, 0.0, w, seed).unwrap();
            let iv = coverage_intervals(&f.nodes, &traj, 200.0);
            let via_envelope = Track::new(&f.nodes, traj).level_set(|_| 200.0);
            assert_eq!(iv.len(), via_envelope.len());
            for (a, b) in iv.iter().zip(&via_envelope) {
                assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
            }
            let dt = 1e-4;
            let mut j = 0;
            for k in 0..(300.0 / dt) as usize {
                let t = k as f64 * dt;
                let (_, d) = f.nearest_node(traj.position(t)).unwrap();
                while j < iv.len() && iv[j].1 < t {
                    j += 1;
                }
                let inside = j < iv.len() && iv[j].0 <= t && t <= iv[j].1;
                // Skip samples within rounding distance of an endpoint.
                if (d - 200.0).abs() > 1e-6 {
                    assert_eq!(inside, d <= 200.0, "seed {seed} t {t}");
                }
            }
        }
    }

    #[test]
    fn sampled_and_exact_crossings_agree_within_dt() {
        let model = NetworkModel::reference();
        let r = 200.0;
        let gamma = model.gamma_for_radius(r).unwrap();
        let traj = Trajectory::along_x(16.0, 2000.0).unwrap();
        let w = traj.padded_window(r, model.node_intensity).unwrap();
        let f = FieldSample::sample(model.node_intensity, 0.0, w, 12).unwrap();
        let exact = exact_crossings(&f.nodes, &traj, r, gamma);
        let track = Track::new(&f.nodes, traj);
        let dt = 0.01;
        let tr = snr_trace(
            &track,
            &model,
            dt,
            FadingModel::none(),
            &mut rng_from_seed(0),
        )
        .unwrap();
        let sampled = CrossingRecord::from_sampled(&tr, gamma);
        assert_eq!(exact.initially_on, sampled.initially_on);
        assert_eq!(exact.up_times.len(), sampled.up_times.len());
        assert_eq!(exact.down_times.len(), sampled.down_times.len());
        for (a, b) in exact.up_times.iter().zip(&sampled.up_times) {
            assert!(b - a >= -1e-9 && b - a <= dt + 1e-9);
        }
        for (a, b) in exact.down_times.iter().zip(&sampled.down_times) {
            assert!(b - a >= -1e-9 && b - a <= dt + 1e-9);
        }
        assert!(exact.is_interleaved());
    }

    #[test]
    fn maxima_and_handoffs() {
        let w = Window::new(-500.0, -500.0, 1500.0, 500.0).unwrap();
        let single = FieldSample::from_points(vec![Point::new(300.0, 40.0)], vec![], w, 0);
        let traj = Trajectory::along_x(10.0, 100.0).unwrap();
        assert_eq!(interior_maxima(&single, &traj), vec![30.0]);
        assert!(cell_edge_crossings(&single, &traj).is_empty());

        let lambda = disc_intensity(200.0);
        let traj = Trajectory::along_x(16.0, 600.0).unwrap();
        let f = FieldSample::sample(lambda, 0.0, traj.padded_window(200.0, lambda).unwrap(), 3)
            .unwrap();
        let h = cell_edge_crossings(&f, &traj);
        let m = interior_maxima(&f, &traj);
        // Every interior maximum lies strictly between consecutive handoffs.
        for &t in &m {
            assert!(!h.iter().any(|&x| (x - t).abs() < 1e-9));
        }
        let scanned = cell_edge_crossings_scan(&f, &traj, 0.05, 1e-9).unwrap();
        assert_eq!(scanned.times.len(), h.len());
        for (a, b) in scanned.times.iter().zip(&h) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
