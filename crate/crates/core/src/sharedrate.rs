//! Shared-rate processes, stationary snapshots, the variance decomposition,
//! rare-event tail estimators and shared-rate up-crossings.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, positive, Error, Result};
use crate::geometry::{poisson_count, FieldSample, Point};
use crate::model::NetworkModel;
use crate::rng::Rng;
use crate::sharing::{sharing_process, SharingKind};
use crate::stats::Summary;
use crate::trace::{CrossingRecord, ServingCursor, Track};

/// Sampled Shannon rate R, sharing number N and shared rate S = R/(1+N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTrace {
    pub t0: f64,
    pub dt: f64,
    pub rate: Vec<f64>,
    pub sharing: Vec<u32>,
    pub shared: Vec<f64>,
}

impl RateTrace {
    pub fn len(&self) -> usize {
        self.rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rate.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "rate", "sharing", "shared"])?;
        for k in 0..self.len() {
            w.write_record([
                self.time(k).to_string(),
                self.rate[k].to_string(),
                self.sharing[k].to_string(),
                self.shared[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// S(t) (or Ŝ(t) when `kind` is `Upper`) sampled every `dt`. The mobile is
/// served while its SNR is at least γ.
pub fn shared_rate_trace(
    field: &FieldSample,
    track: &Track,
    model: &NetworkModel,
    gamma: f64,
    dt: f64,
    kind: SharingKind,
) -> Result<RateTrace> {
    positive("dt", dt)?;
    let radius = model.coverage_radius(gamma)?;
    let steps = sharing_process(field, track, radius, kind);
    let n = (track.duration() / dt + 1e-9).floor() as usize + 1;
    let mut cursor = ServingCursor::new(track);
    let mut out = RateTrace {
        t0: 0.0,
        dt,
        rate: Vec::with_capacity(n),
        sharing: Vec::with_capacity(n),
        shared: Vec::with_capacity(n),
    };
    for k in 0..n {
        let t = k as f64 * dt;
        let rate = match cursor.at(t) {
            Some((_, d)) if d <= radius => model.shannon_rate(model.snr_point(d), true),
            _ => 0.0,
        };
        let users = steps.value_at(t);
        out.rate.push(rate);
        out.sharing.push(users);
        out.shared.push(rate / (1.0 + users as f64));
    }
    Ok(out)
}

/// Exact time set where Ŝ or S exceeds the rate level `delta`. On a segment
/// served by node i with n_i users, the shared rate exceeds δ iff the
/// distance is below r_{δ(1+n_i)} and at most r_γ.
pub fn shared_rate_level_set(
    field: &FieldSample,
    track: &Track,
    model: &NetworkModel,
    radius: f64,
    delta: f64,
    kind: SharingKind,
) -> Result<Vec<(f64, f64)>> {
    positive("delta", delta)?;
    let mut radii = std::collections::HashMap::new();
    for seg in &track.segments {
        radii.entry(seg.node).or_insert_with(|| {
            let n = match kind {
                SharingKind::Exact => field.jm_user_count(seg.node, radius),
                SharingKind::Upper => field.disc_user_count(seg.node, radius),
            };
            model
                .rate_radius(delta * (1.0 + n as f64))
                .map(|r| r.min(radius))
                .unwrap_or(0.0)
        });
    }
    Ok(track.level_set(|i| radii.get(&i).copied().unwrap_or(0.0)))
}

pub fn shared_rate_crossings(
    field: &FieldSample,
    track: &Track,
    model: &NetworkModel,
    radius: f64,
    delta: f64,
    kind: SharingKind,
) -> Result<CrossingRecord> {
    let set = shared_rate_level_set(field, track, model, radius, delta, kind)?;
    Ok(CrossingRecord::from_intervals(
        delta,
        &set,
        0.0,
        track.duration(),
    ))
}

/// Scaling of shared-rate up-crossing interarrivals at rate level δ,
/// 2λv r_δ e^{−ξπr_γ²}.
pub fn sharedrate_upcrossing_rescale(model: &NetworkModel, delta: f64, radius: f64) -> Result<f64> {
    let r_delta = model.rate_radius(delta)?;
    Ok(2.0
        * model.node_intensity
        * model.velocity
        * r_delta
        * (-model.user_intensity * PI * radius * radius).exp())
}

/// What a mobile sees at a stationary instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Distance to the nearest node.
    pub distance: f64,
    /// Users in the Johnson–Mehl cell of the nearest node.
    pub n_exact: u32,
    /// Users within r_γ of the nearest node.
    pub n_upper: u32,
}

impl Snapshot {
    pub fn served(&self, radius: f64) -> bool {
        self.distance <= radius
    }

    /// a ln(1 + SNR) when served, else 0.
    pub fn rate(&self, model: &NetworkModel, radius: f64) -> f64 {
        model.shannon_rate(model.snr_point(self.distance), self.served(radius))
    }

    pub fn shared(&self, model: &NetworkModel, radius: f64, kind: SharingKind) -> f64 {
        self.rate(model, radius) / (1.0 + self.sharing(kind) as f64)
    }

    pub fn sharing(&self, kind: SharingKind) -> u32 {
        match kind {
            SharingKind::Exact => self.n_exact,
            SharingKind::Upper => self.n_upper,
        }
    }
}

/// Draws one stationary snapshot. The nearest-node distance is drawn from
/// D² ~ Exp(λπ); other nodes form a Poisson pattern outside B(0, D), sampled
/// only where they can affect the cell within r of the serving node; users
/// are sampled in that disc.
pub fn sample_snapshot(
    node_intensity: f64,
    user_intensity: f64,
    radius: f64,
    rng: &mut Rng,
) -> Result<Snapshot> {
    let e: f64 = Exp1.sample(rng);
    let distance = (e / (node_intensity * PI)).sqrt();
    let phi = rng.random::<f64>() * 2.0 * PI;
    let x0 = Point::new(distance * phi.cos(), distance * phi.sin());
    let k = poisson_count(user_intensity * PI * radius * radius, rng)?;
    if k == 0 {
        return Ok(Snapshot {
            distance,
            n_exact: 0,
            n_upper: 0,
        });
    }
    let users: Vec<Point> = (0..k)
        .map(|_| {
            let rr = radius * rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * 2.0 * PI;
            Point::new(x0.x + rr * a.cos(), x0.y + rr * a.sin())
        })
        .collect();
    // A competitor closer to a user u than x0 lies within 2r of x0.
    let half = 2.0 * radius;
    let m = poisson_count(node_intensity * 4.0 * half * half, rng)?;
    let d2 = distance * distance;
    let mut others = Vec::with_capacity(m);
    for _ in 0..m {
        let p = Point::new(
            x0.x + half * (2.0 * rng.random::<f64>() - 1.0),
            x0.y + half * (2.0 * rng.random::<f64>() - 1.0),
        );
        if p.norm2() >= d2 {
            others.push(p);
        }
    }
    let n_exact = users
        .iter()
        .filter(|u| {
            let own = u.dist2(x0);
            others.iter().all(|o| u.dist2(*o) >= own)
        })
        .count() as u32;
    Ok(Snapshot {
        distance,
        n_exact,
        n_upper: k as u32,
    })
}

pub fn sample_snapshots(
    node_intensity: f64,
    user_intensity: f64,
    radius: f64,
    n: usize,
    rng: &mut Rng,
) -> Result<Vec<Snapshot>> {
    (0..n)
        .map(|_| sample_snapshot(node_intensity, user_intensity, radius, rng))
        .collect()
}

/// Empirical moments of S = R·F and the independent-product reconstruction
/// var(R)E[F]² + var(F)E[R²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub n: usize,
    pub var_s: f64,
    pub var_r: f64,
    pub var_f: f64,
    pub reconstruction: f64,
    /// var_s − reconstruction.
    pub gap: f64,
    /// Batch-means standard error of the gap.
    pub gap_std_err: f64,
}

impl VarianceDecomposition {
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.var_s
    }
}

const MIN_DECOMPOSITION_SAMPLES: usize = 100;
const GAP_BATCHES: usize = 20;

fn decompose(pairs: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut s = Summary::new();
    let mut r = Summary::new();
    let mut f = Summary::new();
    let mut r2 = Summary::new();
    for &(x, y) in pairs {
        s.push(x * y);
        r.push(x);
        f.push(y);
        r2.push(x * x);
    }
    let recon = r.variance() * f.mean * f.mean + f.variance() * r2.mean;
    (s.variance(), r.variance(), f.variance(), recon)
}

pub fn variance_decomposition(pairs: &[(f64, f64)]) -> Result<VarianceDecomposition> {
    if pairs.len() < MIN_DECOMPOSITION_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "variance decomposition needs at least {MIN_DECOMPOSITION_SAMPLES} samples, got {}",
            pairs.len()
        )));
    }
    let (var_s, var_r, var_f, reconstruction) = decompose(pairs);
    let size = pairs.len() / GAP_BATCHES;
    let gaps: Vec<f64> = pairs
        .chunks(size)
        .take(GAP_BATCHES)
        .map(|c| {
            let (vs, _, _, rc) = decompose(c);
            vs - rc
        })
        .collect();
    Ok(VarianceDecomposition {
        n: pairs.len(),
        var_s,
        var_r,
        var_f,
        reconstruction,
        gap: var_s - reconstruction,
        gap_std_err: Summary::from_slice(&gaps).std_err() / (GAP_BATCHES as f64).sqrt(),
    })
}

/// P(a ln(1+SNR) > s) at a stationary point, 1 − exp(−λπ(K/(e^{s/a}−1))^{2/β}).
pub fn rate_tail_closed_form(model: &NetworkModel, s: f64) -> f64 {
    let x = (model.k() / (s / model.bandwidth_const).exp_m1()).powf(2.0 / model.pathloss_exponent);
    -(-model.node_intensity * PI * x).exp_m1()
}

/// Exceedance-based estimate of lim −(1/s) log P(S > s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub samples: usize,
    pub thresholds: Vec<f64>,
    pub exceedances: Vec<usize>,
    /// Least-squares slope of −log P(S > s) against s.
    pub slope: f64,
    pub slope_std_err: f64,
    /// Two-point slope between the ends of the fitted range.
    pub endpoint: f64,
}

impl TailReport {
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.slope_std_err;
        (self.slope - h, self.slope + h)
    }

    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Minimum exceedance count at the highest threshold.
pub const MIN_EXCEEDANCES: usize = 50;

/// Fits −log P(S > s) against s over the decade of exceedance probabilities
/// [50/n, 500/n], at `points` log-spaced probability levels.
pub fn tail_exponent_high(samples: &[f64], points: usize) -> Result<TailReport> {
    let n = samples.len();
    if points < 3 {
        return Err(invalid("points", "need at least 3 thresholds"));
    }
    if n < 10 * MIN_EXCEEDANCES {
        return Err(Error::InsufficientData(format!(
            "tail fit needs at least {} samples, got {n}",
            10 * MIN_EXCEEDANCES
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds = Vec::with_capacity(points);
    let mut exceedances = Vec::with_capacity(points);
    for k in 0..points {
        let count =
            (MIN_EXCEEDANCES as f64 * 10f64.powf(k as f64 / (points - 1) as f64)).round() as usize;
        // Threshold midway between the count-th and (count+1)-th largest.
        let s = 0.5 * (xs[count - 1] + xs[count]);
        let exc = xs.partition_point(|&x| x > s);
        if exc < MIN_EXCEEDANCES && k == 0 {
            return Err(Error::InsufficientData(format!(
                "only {exc} exceedances at the highest threshold"
            )));
        }
        thresholds.push(s);
        exceedances.push(exc);
    }
    let ys: Vec<f64> = exceedances
        .iter()
        .map(|&e| -(e as f64 / n as f64).ln())
        .collect();
    let (slope, slope_std_err) = least_squares(&thresholds, &ys);
    let endpoint = (ys[0] - ys[points - 1]) / (thresholds[0] - thresholds[points - 1]);
    Ok(TailReport {
        samples: n,
        thresholds,
        exceedances,
        slope,
        slope_std_err,
        endpoint,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let se = if n > 2.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    (slope, se)
}

/// Conditional frequency with its sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    pub threshold: f64,
    pub conditioned: usize,
    pub probability: f64,
    pub std_err: f64,
}

fn conditional(threshold: f64, hits: usize, total: usize) -> Result<ConditionalEstimate> {
    if total == 0 {
        return Err(Error::InsufficientData(format!(
            "empty conditioning set at s = {threshold}"
        )));
    }
    let p = hits as f64 / total as f64;
    Ok(ConditionalEstimate {
        threshold,
        conditioned: total,
        probability: p,
        std_err: (p * (1.0 - p) / total as f64).sqrt(),
    })
}

/// Empirical P(N = 0 | S > s) from (S, N) pairs.
pub fn conditional_zero_sharing(pairs: &[(f64, u32)], s: f64) -> Result<ConditionalEstimate> {
    let cond = pairs.iter().filter(|p| p.0 > s);
    let total = cond.clone().count();
    let hits = cond.filter(|p| p.1 == 0).count();
    conditional(s, hits, total)
}

/// Empirical P(N > a s ln(1+γ) − 1 | 0 < S < 1/s) from (S, N) pairs.
pub fn conditional_low_rate(
    pairs: &[(f64, u32)],
    s: f64,
    bandwidth_const: f64,
    gamma: f64,
) -> Result<ConditionalEstimate> {
    positive("s", s)?;
    let bound = bandwidth_const * s * gamma.ln_1p() - 1.0;
    let cond = pairs.iter().filter(|p| p.0 > 0.0 && p.0 < 1.0 / s);
    let total = cond.clone().count();
    let hits = cond.filter(|p| p.1 as f64 > bound).count();
    conditional(s, hits, total)
}

/// Empirical −log P(0 < Ŝ < 1/s) / (s log s), and its limit a ln(1+γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowRateStatistic {
    pub s: f64,
    pub count: usize,
    pub statistic: f64,
    pub limit: f64,
}

pub fn low_rate_statistic(
    shared: &[f64],
    s: f64,
    bandwidth_const: f64,
    gamma: f64,
) -> Result<LowRateStatistic> {
    if s <= 1.0 {
        return Err(invalid("s", "must exceed 1"));
    }
    let count = shared.iter().filter(|&&x| x > 0.0 && x < 1.0 / s).count();
    if count == 0 {
        return Err(Error::InsufficientData(format!(
            "no samples with 0 < S < 1/{s}"
        )));
    }
    let p = count as f64 / shared.len() as f64;
    Ok(LowRateStatistic {
        s,
        count,
        statistic: -p.ln() / (s * s.ln()),
        limit: bandwidth_const * gamma.ln_1p(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::sharing::sharing_trace;
    use crate::trace::Trajectory;

    fn setup(xi_over_lambda: f64, seed: u64) -> (NetworkModel, FieldSample, Track) {
        let model = NetworkModel::reference();
        let lambda = model.node_intensity;
        let model = model.with_user_intensity(xi_over_lambda * lambda);
        let traj = Trajectory::along_x(16.0, 2000.0).unwrap();
        let w = traj.padded_window(200.0, lambda).unwrap();
        let f = FieldSample::sample(lambda, model.user_intensity, w, seed).unwrap();
        let t = Track::new(&f.nodes, traj);
        (model, f, t)
    }

    #[test]
    fn trace_ordering() {
        let (model, f, t) = setup(20.0, 3);
        let s = shared_rate_trace(&f, &t, &model, 0.1, 0.05, SharingKind::Exact).unwrap();
        let sh = shared_rate_trace(&f, &t, &model, 0.1, 0.05, SharingKind::Upper).unwrap();
        let mut served = 0;
        for k in 0..s.len() {
            assert!(sh.shared[k] <= s.shared[k] && s.shared[k] <= s.rate[k]);
            if s.rate[k] == 0.0 {
                assert_eq!(s.shared[k], 0.0);
            } else {
                served += 1;
            }
        }
        assert!(served > 0 && served < s.len());
    }

    #[test]
    fn no_users_shared_is_rate() {
        let (model, f, t) = setup(0.0, 4);
        let s = shared_rate_trace(&f, &t, &model, 1.0, 0.1, SharingKind::Exact).unwrap();
        assert_eq!(s.rate, s.shared);
    }

    #[test]
    fn level_set_matches_sampled_trace() {
        let (model, f, t) = setup(10.0, 5);
        let r = model.coverage_radius(0.1).unwrap();
        let delta = 2.0;
        let set = shared_rate_level_set(&f, &t, &model, r, delta, SharingKind::Upper).unwrap();
        let s = shared_rate_trace(&f, &t, &model, 0.1, 0.01, SharingKind::Upper).unwrap();
        let mut mismatches = 0;
        for k in 0..s.len() {
            let time = s.time(k);
            let inside = set.iter().any(|&(a, b)| a <= time && time <= b);
            if inside != (s.shared[k] > delta) {
                mismatches += 1;
            }
        }
        assert!(mismatches <= 2, "{mismatches}");
    }

    #[test]
    fn discontinuities_bounded_by_crossings() {
        let (model, f, t) = setup(10.0, 6);
        let r = model.coverage_radius(0.1).unwrap();
        let n = sharing_trace(&f, &t, r);
        let handoffs = t.handoffs().iter().filter(|h| h.distance <= r).count();
        let internal = n
            .times
            .iter()
            .filter(|&&time| t.handoff_times().iter().any(|&h| (h - time).abs() < 1e-9))
            .count();
        assert!(internal <= handoffs);
    }

    #[test]
    fn rescale_reduces_without_users() {
        let model = NetworkModel::reference();
        let r = model.coverage_radius(1.0).unwrap();
        let delta = 5.0;
        let f = sharedrate_upcrossing_rescale(&model, delta, r).unwrap();
        let r_delta = model.rate_radius(delta).unwrap();
        assert!((f - crate::mginf::rescale_high_radius(&model, r_delta)).abs() < 1e-15);
        let g = model.gamma_for_radius(r_delta).unwrap();
        assert!(((g.ln_1p() * model.bandwidth_const) - delta).abs() < 1e-9);
    }

    #[test]
    fn snapshot_sharing_law() {
        let model = NetworkModel::reference();
        let lambda = model.node_intensity;
        let r = 200.0;
        let mut rng = rng_from_seed(9);
        let snaps = sample_snapshots(lambda, 2.0 * lambda, r, 40_000, &mut rng).unwrap();
        let nu = Summary::from_slice(&snaps.iter().map(|s| s.n_upper as f64).collect::<Vec<_>>());
        assert!(nu.within(2.0 * lambda * PI * r * r, 3.0));
        let served = snaps.iter().filter(|s| s.served(r)).count() as f64 / snaps.len() as f64;
        assert!((served - (1.0 - (-1.0f64).exp())).abs() < 0.01);
        assert!(snaps.iter().all(|s| s.n_exact <= s.n_upper));
        // Served snapshots: E[N] = ξ E[Ĵ].
        let ne = Summary::from_slice(
            &snaps
                .iter()
                .filter(|s| s.served(r))
                .map(|s| s.n_exact as f64)
                .collect::<Vec<_>>(),
        );
        let area = crate::sharing::expected_jm_area(lambda, r).unwrap();
        assert!(
            ne.within(2.0 * lambda * area, 3.0),
            "{} vs {}",
            ne.mean,
            2.0 * lambda * area
        );
    }

    #[test]
    fn decomposition_trivial_and_independent() {
        let mut rng = rng_from_seed(1);
        let pairs: Vec<(f64, f64)> = (0..1000).map(|_| (rng.random::<f64>(), 1.0)).collect();
        let d = variance_decomposition(&pairs).unwrap();
        assert!((d.var_s - d.var_r).abs() < 1e-15 && d.gap.abs() < 1e-15);
        let pairs: Vec<(f64, f64)> = (0..100_000)
            .map(|_| {
                (
                    rng.random::<f64>() * 3.0,
                    1.0 / (1.0 + (rng.random::<f64>() * 4.0).floor()),
                )
            })
            .collect();
        let d = variance_decomposition(&pairs).unwrap();
        assert!(d.gap.abs() < 3.0 * d.gap_std_err, "{d:?}");
        assert!(variance_decomposition(&pairs[..50]).is_err());
    }

    #[test]
    fn closed_form_rate_tail() {
        let model = NetworkModel::reference();
        let mut rng = rng_from_seed(2);
        let snaps = sample_snapshots(model.node_intensity, 0.0, 1e9, 200_000, &mut rng).unwrap();
        for s in [2.0, 5.0, 8.0] {
            let p = snaps
                .iter()
                .filter(|x| x.rate(&model, f64::INFINITY) > s)
                .count() as f64
                / snaps.len() as f64;
            let q = rate_tail_closed_form(&model, s);
            assert!(
                (p - q).abs() < 3.0 * (q * (1.0 - q) / snaps.len() as f64).sqrt() + 1e-12,
                "{s}: {p} {q}"
            );
        }
    }

    #[test]
    fn low_rate_conditional_is_one() {
        let model = NetworkModel::reference();
        let lambda = model.node_intensity;
        let gamma = 1.0;
        let r = model.coverage_radius(gamma).unwrap();
        let mut rng = rng_from_seed(12);
        let snaps = sample_snapshots(lambda, 100.0 * lambda, r, 20_000, &mut rng).unwrap();
        let pairs: Vec<(f64, u32)> = snaps
            .iter()
            .map(|s| (s.shared(&model, r, SharingKind::Exact), s.n_exact))
            .collect();
        for s in [1.0, 2.0, 4.0] {
            let c = conditional_low_rate(&pairs, s, 1.0, gamma).unwrap();
            assert_eq!(c.probability, 1.0);
        }
        assert!(conditional_low_rate(&pairs, 1e9, 1.0, gamma).is_err());
    }

    #[test]
    fn tail_fit_on_exponential() {
        let mut rng = rng_from_seed(7);
        let xs: Vec<f64> = (0..200_000)
            .map(|_| Exp1.sample(&mut rng))
            .collect::<Vec<f64>>()
            .iter()
            .map(|x: &f64| 2.0 * x)
            .collect();
        let t = tail_exponent_high(&xs, 12).unwrap();
        assert!((t.slope - 0.5).abs() < 0.1, "{t:?}");
        assert!(t.exceedances[0] >= MIN_EXCEEDANCES);
        assert!(tail_exponent_high(&xs[..100], 12).is_err());
    }
}
