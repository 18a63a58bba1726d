//! Uniformly sampled SNR and SINR traces, with block fading.

use std::io::Write;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, positive, Result};
use crate::geometry::FieldSample;
use crate::model::NetworkModel;
use crate::rng::Rng;
use crate::trace::Track;

/// Default sampling period.
pub const DEFAULT_DT: f64 = 1e-2;

/// Distances below this are clamped to keep SNR finite.
pub const MIN_DISTANCE: f64 = 1e-6;

/// Coherence time used by the default fading scenario (v = 16 m/s, 900 MHz).
pub const DEFAULT_COHERENCE_TIME: f64 = 0.007;

/// t_c = 0.423 / f_d with Doppler shift f_d = v f_o / c.
pub fn doppler_coherence_time(velocity: f64, carrier_hz: f64) -> f64 {
    0.423 * 299_792_458.0 / (velocity * carrier_hz)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrace {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl SampledTrace {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV rows `t,value`.
    pub fn write_csv<W: Write>(&self, out: W, header: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", header])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([self.time(k).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FadingKind {
    None,
    Rayleigh,
    /// With probability p the power is Exp with mean m1, otherwise mean m2.
    Hyperexp {
        p: f64,
        m1: f64,
        m2: f64,
    },
}

/// Unit-mean power fading, constant over blocks of `coherence_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingModel {
    pub kind: FadingKind,
    pub coherence_time: f64,
}

impl FadingModel {
    pub fn none() -> Self {
        Self {
            kind: FadingKind::None,
            coherence_time: DEFAULT_COHERENCE_TIME,
        }
    }

    pub fn rayleigh(coherence_time: f64) -> Result<Self> {
        positive("coherence_time", coherence_time)?;
        Ok(Self {
            kind: FadingKind::Rayleigh,
            coherence_time,
        })
    }

    /// Two-phase hyperexponential with unit mean and the requested variance.
    /// The phases carry equal shares of the mean, which reaches any variance >= 1.
    pub fn hyperexp_with_variance(variance: f64, coherence_time: f64) -> Result<Self> {
        positive("coherence_time", coherence_time)?;
        if !variance.is_finite() || variance < 1.0 {
            return Err(invalid(
                "fading variance",
                format!(
                    "a mixture of exponentials with unit mean has variance >= 1, got {variance}"
                ),
            ));
        }
        let p = 0.5 * (1.0 - ((variance - 1.0) / (variance + 1.0)).sqrt());
        Ok(Self {
            kind: FadingKind::Hyperexp {
                p,
                m1: 0.5 / p,
                m2: 0.5 / (1.0 - p),
            },
            coherence_time,
        })
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            FadingKind::None | FadingKind::Rayleigh => 1.0,
            FadingKind::Hyperexp { p, m1, m2 } => p * m1 + (1.0 - p) * m2,
        }
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            FadingKind::None => 0.0,
            FadingKind::Rayleigh => 1.0,
            FadingKind::Hyperexp { p, m1, m2 } => {
                2.0 * (p * m1 * m1 + (1.0 - p) * m2 * m2) - self.mean().powi(2)
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self.kind {
            FadingKind::None => 1.0,
            FadingKind::Rayleigh => Exp1.sample(rng),
            FadingKind::Hyperexp { p, m1, m2 } => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<f64>() < p {
                    m1 * e
                } else {
                    m2 * e
                }
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kind, FadingKind::None)
    }
}

/// Fading gain as a function of time: a fresh draw whenever the block index
/// floor(t / t_c) changes.
pub struct FadingProcess<'a> {
    model: FadingModel,
    rng: &'a mut Rng,
    block: i64,
    gain: f64,
}

impl<'a> FadingProcess<'a> {
    pub fn new(model: FadingModel, rng: &'a mut Rng) -> Self {
        Self {
            model,
            rng,
            block: i64::MIN,
            gain: 1.0,
        }
    }

    pub fn gain_at(&mut self, t: f64) -> f64 {
        if self.model.is_none() {
            return 1.0;
        }
        let b = (t / self.model.coherence_time).floor() as i64;
        if b != self.block {
            self.block = b;
            self.gain = self.model.sample(self.rng);
        }
        self.gain
    }
}

/// Walks the serving envelope at increasing times.
pub struct ServingCursor<'a> {
    track: &'a Track,
    k: usize,
}

impl<'a> ServingCursor<'a> {
    pub fn new(track: &'a Track) -> Self {
        Self { track, k: 0 }
    }

    /// Serving node and distance at time `t`; calls must be non-decreasing in `t`.
    pub fn at(&mut self, t: f64) -> Option<(usize, f64)> {
        let segs = &self.track.segments;
        if segs.is_empty() {
            return None;
        }
        let s = t * self.track.velocity();
        while self.k + 1 < segs.len() && segs[self.k].s1 < s {
            self.k += 1;
        }
        let n = segs[self.k].node;
        Some((n, self.track.dist2(n, s).sqrt().max(MIN_DISTANCE)))
    }
}

fn sample_count(track: &Track, dt: f64) -> Result<usize> {
    positive("dt", dt)?;
    Ok((track.duration() / dt + 1e-9).floor() as usize + 1)
}

/// SNR samples H_k p L(t_k)^{-β} / w at t_k = k dt.
pub fn snr_trace(
    track: &Track,
    model: &NetworkModel,
    dt: f64,
    fading: FadingModel,
    rng: &mut Rng,
) -> Result<SampledTrace> {
    let n = sample_count(track, dt)?;
    let mut cursor = ServingCursor::new(track);
    let mut fade = FadingProcess::new(fading, rng);
    let values = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            match cursor.at(t) {
                Some((_, d)) => fade.gain_at(t) * model.snr_point(d),
                None => 0.0,
            }
        })
        .collect();
    Ok(SampledTrace {
        t0: 0.0,
        dt,
        values,
    })
}

/// Default interference truncation radius max(20 r, 10/√λ).
pub fn interference_radius(radius: f64, node_intensity: f64) -> f64 {
    (20.0 * radius).max(10.0 / node_intensity.sqrt())
}

/// SINR samples with interference from every other node within `r_int` of
/// the mobile. If `mask_radius` is given, samples whose serving distance
/// exceeds it are not evaluated and hold 0 (SINR <= SNR, so they lie below
/// any level whose coverage radius is at most `mask_radius`).
pub fn sinr_trace(
    field: &FieldSample,
    track: &Track,
    model: &NetworkModel,
    dt: f64,
    r_int: f64,
    mask_radius: Option<f64>,
) -> Result<SampledTrace> {
    positive("interference radius", r_int)?;
    let n = sample_count(track, dt)?;
    let mut cursor = ServingCursor::new(track);
    let half_beta = 0.5 * model.pathloss_exponent;
    let r_int2 = r_int * r_int;
    let values = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            let Some((serving, d)) = cursor.at(t) else {
                return 0.0;
            };
            if mask_radius.is_some_and(|m| d > m) {
                return 0.0;
            }
            let q = track.trajectory.position(t);
            let mut interference = 0.0;
            field.nodes_within_for_each(q, r_int, |j, d2| {
                if j != serving && d2 <= r_int2 {
                    interference += if half_beta == 2.0 {
                        1.0 / (d2 * d2)
                    } else {
                        d2.powf(-half_beta)
                    };
                }
            });
            let signal = d.powf(-model.pathloss_exponent);
            model.tx_power * signal / (model.noise_power + model.tx_power * interference)
        })
        .collect();
    Ok(SampledTrace {
        t0: 0.0,
        dt,
        values,
    })
}
