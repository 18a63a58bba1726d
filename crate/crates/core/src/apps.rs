//! Application-layer analytics: streaming load factor and its optimum,
//! level-set curves, the fluid-queue busy period, file download times and
//! the two-tier (macro/micro) network.

use std::f64::consts::PI;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, positive, Error, Result};
use crate::geometry::{sample_poisson_points, Point};
use crate::mginf::Estimate;
use crate::model::NetworkModel;
use crate::quad::{integrate, Tolerance};
use crate::rng::Rng;
use crate::sharing::{poisson_harmonic_mean, JmAreaTable};
use crate::stats::Summary;
use crate::trace::{chord_union, CrossingRecord, Trajectory};

/// Video streaming over the shared downlink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamingConfig {
    pub model: NetworkModel,
    /// η, playback rate in bits/s.
    pub playback_rate: f64,
}

impl StreamingConfig {
    pub fn new(model: NetworkModel, playback_rate: f64) -> Result<Self> {
        model.validate()?;
        positive("playback_rate", playback_rate)?;
        Ok(Self {
            model,
            playback_rate,
        })
    }

    /// b = λπ(p/w)^{2/β}, the load at γ = 1.
    pub fn b(&self) -> f64 {
        self.model
            .load(self.model.coverage_radius(1.0).expect("γ = 1 is valid"))
    }

    pub fn with_user_intensity(mut self, xi: f64) -> Self {
        self.model.user_intensity = xi;
        self
    }

    pub fn with_node_intensity(mut self, lambda: f64) -> Self {
        self.model.node_intensity = lambda;
        self
    }
}

/// Expected user count sharing the tagged user's cell, ξE[Ĵ(λ, r)].
fn sharing_mean(xi: f64, lambda: f64, r: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi * JmAreaTable::global().area(lambda, r)
    }
}

/// ρ(γ, ξ) = a ln(1+γ)(1 − e^{−λπr_γ²})/η · E[1/(N+1)], with N Poisson of
/// mean ξE[Ĵ].
pub fn load_factor(gamma: f64, cfg: &StreamingConfig) -> Result<f64> {
    let m = &cfg.model;
    let r = m.coverage_radius(gamma)?;
    let h = poisson_harmonic_mean(sharing_mean(m.user_intensity, m.node_intensity, r));
    Ok(m.bandwidth_const * gamma.ln_1p() * m.coverage_probability(r) / cfg.playback_rate * h)
}

/// Load factor with the rate averaged over the serving distance instead of
/// fixed at a ln(1+γ): a E[ln(1+SNR) | SNR ≥ γ] ν / η · E[1/(N+1)].
pub fn ergodic_load_factor(gamma: f64, cfg: &StreamingConfig) -> Result<f64> {
    let m = &cfg.model;
    let r = m.coverage_radius(gamma)?;
    let lambda = m.node_intensity;
    let q = integrate(
        |x| 2.0 * lambda * PI * x * (-lambda * PI * x * x).exp() * m.snr_point(x).ln_1p(),
        0.0,
        r,
        Tolerance::relative(1e-9),
    );
    let h = poisson_harmonic_mean(sharing_mean(m.user_intensity, lambda, r));
    Ok(m.bandwidth_const * q.value / cfg.playback_rate * h)
}

/// Maximizer of a load-factor curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStar {
    pub gamma: f64,
    pub rho: f64,
    /// γ found from each optimizer start.
    pub starts: Vec<f64>,
}

/// Default search range for γ.
pub const GAMMA_RANGE: (f64, f64) = (1e-8, 1e8);
const GRID_POINTS: usize = 400;
const STARTS: usize = 5;

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Maximizes `rho` over γ in [lo, hi]: a log-spaced grid locates the peak,
/// then golden-section search from five brackets around it must agree to
/// 1e-6 relative. A grid with more than one strict local maximum is rejected.
pub fn find_gamma_star_with(
    rho: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<GammaStar> {
    positive("gamma lower bound", lo)?;
    if hi <= lo {
        return Err(invalid("gamma range", format!("empty range [{lo}, {hi}]")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / (GRID_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..GRID_POINTS).map(|k| a + h * k as f64).collect();
    let ys = xs
        .iter()
        .map(|&x| rho(x.exp()))
        .collect::<Result<Vec<_>>>()?;
    let peak = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let flat = 1e-12 * peak.abs().max(f64::MIN_POSITIVE);
    let maxima = (1..GRID_POINTS - 1)
        .filter(|&k| ys[k] > ys[k - 1] + flat && ys[k] > ys[k + 1] + flat)
        .count();
    if maxima > 1 {
        return Err(Error::NotUnimodal(format!(
            "{maxima} local maxima on the grid"
        )));
    }
    let k = ys
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|p| p.0)
        .unwrap_or(0);
    let f = |x: f64| rho(x.exp()).unwrap_or(f64::NEG_INFINITY);
    let starts: Vec<f64> = (0..STARTS)
        .map(|j| {
            let left = xs[k] - h * (1.0 + 0.5 * j as f64);
            let right = xs[k] + h * (1.0 + 0.3 * (STARTS - 1 - j) as f64);
            golden_max(&f, left.max(a), right.min(b), 1e-10).exp()
        })
        .collect();
    let gamma = starts.iter().sum::<f64>() / STARTS as f64;
    let spread = starts
        .iter()
        .map(|g| (g / gamma - 1.0).abs())
        .fold(0.0, f64::max);
    if spread > 1e-6 {
        return Err(Error::NotUnimodal(format!("starts spread {spread:.3e}")));
    }
    Ok(GammaStar {
        gamma,
        rho: rho(gamma)?,
        starts,
    })
}

pub fn find_gamma_star(cfg: &StreamingConfig) -> Result<GammaStar> {
    find_gamma_star_with(|g| load_factor(g, cfg), GAMMA_RANGE.0, GAMMA_RANGE.1)
}

/// One point (ξ, λ) of the curve ρ(γ*, ξ) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub user_intensity: f64,
    pub node_intensity: f64,
    pub gamma_star: f64,
    pub rho: f64,
}

/// For each ξ, bisects on log λ in [lambda_lo, lambda_hi] until ρ(γ*) = 1 ± 1e-4.
pub fn level_set_rho1(
    cfg: &StreamingConfig,
    user_intensities: &[f64],
    lambda_lo: f64,
    lambda_hi: f64,
) -> Vec<Result<LevelPoint>> {
    user_intensities
        .iter()
        .map(|&xi| {
            let eval = |lambda: f64| {
                find_gamma_star(&cfg.with_user_intensity(xi).with_node_intensity(lambda))
            };
            let lo = eval(lambda_lo)?;
            let hi = eval(lambda_hi)?;
            if lo.rho > 1.0 || hi.rho < 1.0 {
                return Err(Error::NoCrossing {
                    lo: lambda_lo,
                    hi: lambda_hi,
                });
            }
            let (mut a, mut b) = (lambda_lo.ln(), lambda_hi.ln());
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let g = eval(m.exp())?;
                if (g.rho - 1.0).abs() <= 1e-5 {
                    return Ok(LevelPoint {
                        user_intensity: xi,
                        node_intensity: m.exp(),
                        gamma_star: g.gamma,
                        rho: g.rho,
                    });
                }
                if g.rho < 1.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            Err(Error::NoConvergence {
                iterations: 200,
                last_step: b - a,
            })
        })
        .collect()
}

/// Empirical Laplace transform of a positive sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaplace {
    pub samples: Vec<f64>,
}

impl EmpiricalLaplace {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData(
                "Laplace estimate needs at least 2 samples".into(),
            ));
        }
        Ok(Self { samples })
    }

    /// Mean of e^{−sX} with its standard error.
    pub fn estimate(&self, s: f64) -> Estimate {
        let sum = Summary::from_slice(
            &self
                .samples
                .iter()
                .map(|&x| (-s * x).exp())
                .collect::<Vec<_>>(),
        );
        Estimate {
            value: sum.mean,
            std_err: sum.std_err(),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.samples.iter().map(|&x| (-s * x).exp()).sum::<f64>() / self.samples.len() as f64
    }

    /// Derivative −E[X e^{−sX}].
    pub fn derivative(&self, s: f64) -> f64 {
        -self
            .samples
            .iter()
            .map(|&x| x * (-s * x).exp())
            .sum::<f64>()
            / self.samples.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Solution of the fluid busy-period fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub value: f64,
    pub iterations: usize,
    /// The iterates never increased.
    pub monotone: bool,
    /// Point x = sσ + λ'(σ−1)(1 − L) at which L_B was last evaluated.
    pub argument: f64,
}

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 10_000;

/// L_{B_f}(s) solving L = L_B(sσ + λ'(σ−1)(1 − L)), iterated from L_B(sσ).
/// Steps are halved once the iteration starts to oscillate.
pub fn fluid_busy_laplace(
    s: f64,
    sigma: f64,
    idle_rate: f64,
    lb: impl Fn(f64) -> f64,
) -> Result<FixedPoint> {
    non_negative("s", s)?;
    positive("idle_rate", idle_rate)?;
    if !(sigma > 1.0) {
        return Err(invalid("sigma", format!("must exceed 1, got {sigma}")));
    }
    let c = idle_rate * (sigma - 1.0);
    let arg = |l: f64| s * sigma + c * (1.0 - l);
    let mut l = lb(s * sigma);
    let mut damping = 1.0;
    let mut last_step = f64::INFINITY;
    let mut monotone = true;
    for it in 1..=FIXED_POINT_MAX_ITER {
        let next = l + damping * (lb(arg(l)) - l);
        let step = next - l;
        if step > 0.0 {
            monotone = false;
        }
        if step * last_step < 0.0 && damping == 1.0 {
            damping = 0.5;
        }
        l = next;
        if step.abs() <= FIXED_POINT_TOL {
            return Ok(FixedPoint {
                value: l,
                iterations: it,
                monotone,
                argument: arg(l),
            });
        }
        last_step = step;
    }
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_MAX_ITER,
        last_step: last_step.abs(),
    })
}

/// Fluid fixed point from busy-period samples, with a delta-method standard
/// error se(L̂_B(x)) / (1 + λ'(σ−1) L̂_B'(x)).
pub fn fluid_busy_laplace_estimate(
    s: f64,
    sigma: f64,
    idle_rate: f64,
    busy: &EmpiricalLaplace,
) -> Result<Estimate> {
    let fp = fluid_busy_laplace(s, sigma, idle_rate, |x| busy.value(x))?;
    let x = fp.argument;
    let denom = 1.0 + idle_rate * (sigma - 1.0) * busy.derivative(x);
    Ok(Estimate {
        value: fp.value,
        std_err: busy.estimate(x).std_err / denom.abs(),
    })
}

/// Busy periods of the playback buffer fed at rate σ (drained at rate 1)
/// during the on intervals: each starts empty at an on start and ends when
/// the buffer empties; the next one starts at the following on start.
pub fn simulate_fluid_busy(on_intervals: &[(f64, f64)], sigma: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < on_intervals.len() {
        let t0 = on_intervals[k].0;
        let mut content = 0.0;
        let mut j = k;
        let mut end = None;
        while j < on_intervals.len() {
            let (a, b) = on_intervals[j];
            content += (sigma - 1.0) * (b - a);
            match on_intervals.get(j + 1) {
                Some(&(next, _)) if next - b < content => {
                    content -= next - b;
                    j += 1;
                }
                Some(_) => {
                    end = Some(b + content);
                    break;
                }
                None => break,
            }
        }
        let Some(t1) = end else { break };
        out.push(t1 - t0);
        k = j + 1;
        while k < on_intervals.len() && on_intervals[k].0 < t1 {
            k += 1;
        }
    }
    out
}

/// L_T(s) = [δκ/(s+δκ)] (1 − c) / (1 − c λ'/(λ'+s)) with c = L_B(s + δκ).
pub fn download_laplace_with(
    s: f64,
    file_rate: f64,
    service_rate: f64,
    idle_rate: f64,
    lb: impl Fn(f64) -> f64,
) -> Result<f64> {
    non_negative("s", s)?;
    positive("file_rate", file_rate)?;
    positive("service_rate", service_rate)?;
    positive("idle_rate", idle_rate)?;
    let dk = file_rate * service_rate;
    let c = lb(s + dk);
    let q = idle_rate / (idle_rate + s);
    let denom = 1.0 - c * q;
    if denom <= 1e-14 {
        return Err(invalid("s", "transform denominator vanishes"));
    }
    Ok(dk / (s + dk) * (1.0 - c) / denom)
}

/// Download-time transform from busy-period samples, with a delta-method
/// standard error.
pub fn download_laplace(
    s: f64,
    file_rate: f64,
    service_rate: f64,
    idle_rate: f64,
    busy: &EmpiricalLaplace,
) -> Result<Estimate> {
    let value = download_laplace_with(s, file_rate, service_rate, idle_rate, |x| busy.value(x))?;
    let dk = file_rate * service_rate;
    let c = busy.estimate(s + dk);
    let (a, q) = (dk / (s + dk), idle_rate / (idle_rate + s));
    let grad = a * (q - 1.0) / (1.0 - c.value * q).powi(2);
    Ok(Estimate {
        value,
        std_err: grad.abs() * c.std_err,
    })
}

/// Download times of files with Exp(δ) sizes served at rate κ while covered.
/// Each download starts at an on start; the next starts at the first on
/// start after completion. Downloads unfinished at the horizon are dropped.
pub fn simulate_download(
    on_intervals: &[(f64, f64)],
    file_rate: f64,
    service_rate: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let work =
        Exp::new(file_rate * service_rate).map_err(|e| invalid("file_rate", e.to_string()))?;
    let mut out = Vec::new();
    let mut k = 0;
    while k < on_intervals.len() {
        let t0 = on_intervals[k].0;
        let mut need: f64 = work.sample(rng);
        let mut j = k;
        let mut done = None;
        while j < on_intervals.len() {
            let (a, b) = on_intervals[j];
            if b - a >= need {
                done = Some(a + need);
                break;
            }
            need -= b - a;
            j += 1;
        }
        let Some(t1) = done else { break };
        out.push(t1 - t0);
        k = j + 1;
    }
    Ok(out)
}

/// Two-tier network: macro and micro nodes sharing noise, path loss and speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HetNetModel {
    pub macro_intensity: f64,
    pub macro_power: f64,
    pub micro_intensity: f64,
    pub micro_power: f64,
    pub noise_power: f64,
    pub pathloss_exponent: f64,
    pub velocity: f64,
}

impl HetNetModel {
    pub fn validate(&self) -> Result<()> {
        positive("macro_intensity", self.macro_intensity)?;
        non_negative("micro_intensity", self.micro_intensity)?;
        positive("macro_power", self.macro_power)?;
        positive("micro_power", self.micro_power)?;
        positive("noise_power", self.noise_power)?;
        positive("velocity", self.velocity)?;
        if !(self.pathloss_exponent > 2.0) {
            return Err(invalid("pathloss_exponent", "must be > 2"));
        }
        Ok(())
    }

    /// Two-tier model whose macro tier is `model`.
    pub fn from_macro(model: &NetworkModel, micro_intensity: f64, micro_power: f64) -> Self {
        Self {
            macro_intensity: model.node_intensity,
            macro_power: model.tx_power,
            micro_intensity,
            micro_power,
            noise_power: model.noise_power,
            pathloss_exponent: model.pathloss_exponent,
            velocity: model.velocity,
        }
    }

    /// (r_γ, r̂_γ).
    pub fn radii(&self, gamma: f64) -> Result<(f64, f64)> {
        positive("gamma", gamma)?;
        let r = |p: f64| (p / (self.noise_power * gamma)).powf(1.0 / self.pathloss_exponent);
        Ok((r(self.macro_power), r(self.micro_power)))
    }
}

/// Stationary on probability and mean on/off durations of the two-tier
/// coverage process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HetNetOnStats {
    pub p_on: f64,
    pub mean_on: f64,
    pub mean_off: f64,
}

pub fn hetnet_on_stats(h: &HetNetModel, gamma: f64) -> Result<HetNetOnStats> {
    h.validate()?;
    let (r, rh) = h.radii(gamma)?;
    let vol = PI * (h.macro_intensity * r * r + h.micro_intensity * rh * rh);
    let rate = 2.0 * h.velocity * (h.macro_intensity * r + h.micro_intensity * rh);
    Ok(HetNetOnStats {
        p_on: -(-vol).exp_m1(),
        mean_on: vol.exp_m1() / rate,
        mean_off: 1.0 / rate,
    })
}

/// Coverage record of the two-tier network along a fresh trajectory.
pub fn simulate_hetnet_coverage(
    h: &HetNetModel,
    gamma: f64,
    duration: f64,
    rng: &mut Rng,
) -> Result<CrossingRecord> {
    h.validate()?;
    let (r, rh) = h.radii(gamma)?;
    let traj = Trajectory::along_x(h.velocity, duration)?;
    let window = traj.window(r.max(rh) + 1.0)?;
    let macros = sample_poisson_points(h.macro_intensity, &window, rng)?;
    let micros = sample_poisson_points(h.micro_intensity, &window, rng)?;
    let discs = macros
        .iter()
        .map(|&p| (p, r))
        .chain(micros.iter().map(|&p: &Point| (p, rh)));
    let set = chord_union(discs, &traj);
    Ok(CrossingRecord::from_intervals(gamma, &set, 0.0, duration))
}

/// Two-tier load-factor terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HetNetLoad {
    /// Served by a micro node.
    pub p_micro: f64,
    /// Served by a macro node.
    pub p_macro: f64,
    pub mean_micro_sharing: f64,
    pub mean_macro_sharing: f64,
    pub rho: f64,
}

/// ρ(γ, ξ) = a ln(1+γ)/η · (H_G P(G) + H_H P(H)); micro preferred within r̂.
/// The macro sharing mean ξE[Ĵ(λ, r)] is deflated by the probability
/// e^{−λ̂πr̂²} that a point is outside every micro disc.
pub fn hetnet_load(
    gamma: f64,
    h: &HetNetModel,
    xi: f64,
    bandwidth_const: f64,
    playback_rate: f64,
) -> Result<HetNetLoad> {
    h.validate()?;
    non_negative("user_intensity", xi)?;
    positive("playback_rate", playback_rate)?;
    let (r, rh) = h.radii(gamma)?;
    let micro_vol = h.micro_intensity * PI * rh * rh;
    let p_micro = -(-micro_vol).exp_m1();
    let p_macro = (-micro_vol).exp() * -(-h.macro_intensity * PI * r * r).exp_m1();
    let mean_micro_sharing = if h.micro_intensity > 0.0 {
        sharing_mean(xi, h.micro_intensity, rh)
    } else {
        0.0
    };
    let mean_macro_sharing = sharing_mean(xi, h.macro_intensity, r) * (-micro_vol).exp();
    let served = p_micro * poisson_harmonic_mean(mean_micro_sharing)
        + p_macro * poisson_harmonic_mean(mean_macro_sharing);
    Ok(HetNetLoad {
        p_micro,
        p_macro,
        mean_micro_sharing,
        mean_macro_sharing,
        rho: bandwidth_const * gamma.ln_1p() / playback_rate * served,
    })
}

pub fn hetnet_load_factor(
    gamma: f64,
    h: &HetNetModel,
    xi: f64,
    bandwidth_const: f64,
    playback_rate: f64,
) -> Result<f64> {
    Ok(hetnet_load(gamma, h, xi, bandwidth_const, playback_rate)?.rho)
}
