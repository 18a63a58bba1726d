//! M/GI/∞ analytics of the coverage process: service law, idle and busy
//! moments, the random-sum sampler of the forward busy time, Laplace
//! transforms and the rare-event rescaling functions.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, positive, Result};
use crate::model::NetworkModel;
use crate::quad::{integrate, Tolerance};
use crate::rng::Rng;
use crate::stats::Summary;

/// Queue parameters at coverage radius r: arrival rate 2rvλ, load λπr²,
/// ν = 1 - e^{-ρ}, mean service πr/(2v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MGInfParams {
    pub arrival_rate: f64,
    pub load: f64,
    pub nu: f64,
    pub mean_service: f64,
    pub radius: f64,
    pub velocity: f64,
}

impl MGInfParams {
    pub fn new(node_intensity: f64, velocity: f64, radius: f64) -> Result<Self> {
        positive("node_intensity", node_intensity)?;
        positive("velocity", velocity)?;
        positive("radius", radius)?;
        let load = node_intensity * PI * radius * radius;
        Ok(Self {
            arrival_rate: 2.0 * radius * velocity * node_intensity,
            load,
            nu: -(-load).exp_m1(),
            mean_service: PI * radius / (2.0 * velocity),
            radius,
            velocity,
        })
    }

    pub fn for_model(model: &NetworkModel, radius: f64) -> Result<Self> {
        Self::new(model.node_intensity, model.velocity, radius)
    }

    pub fn for_threshold(model: &NetworkModel, gamma: f64) -> Result<Self> {
        Self::for_model(model, model.coverage_radius(gamma)?)
    }

    /// Longest possible service, 2r/v.
    pub fn max_service(&self) -> f64 {
        2.0 * self.radius / self.velocity
    }

    /// Density v²s / (2r √(4r² - v²s²)) on [0, 2r/v).
    pub fn service_density(&self, s: f64) -> f64 {
        let (r, v) = (self.radius, self.velocity);
        if s < 0.0 || s >= self.max_service() {
            return 0.0;
        }
        v * v * s / (2.0 * r * (4.0 * r * r - v * v * s * s).sqrt())
    }

    /// P(W <= s) = 1 - √(1 - (vs/2r)²).
    pub fn service_cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.max_service() {
            return 1.0;
        }
        let y = self.velocity * s / (2.0 * self.radius);
        1.0 - (1.0 - y * y).sqrt()
    }

    /// Inverse-CDF draw of W.
    pub fn sample_service(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.random();
        let c = 1.0 - u;
        self.max_service() * (1.0 - c * c).sqrt()
    }

    /// P(Ŵ <= u) for the forward recurrence time of W: q(z)/π with z = vu/r
    /// and q(z) = z√(4-z²)/2 + 2 asin(z/2).
    pub fn forward_service_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let z = (self.velocity * u / self.radius).min(2.0);
        ((0.5 * z * (4.0 - z * z).max(0.0).sqrt() + 2.0 * (0.5 * z).asin()) / PI).min(1.0)
    }

    pub fn idle_law(&self) -> ExpLaw {
        ExpLaw {
            rate: self.arrival_rate,
        }
    }

    pub fn idle_mean(&self) -> f64 {
        1.0 / self.arrival_rate
    }

    /// E[B] = ν / (2λvr(1-ν)) = (e^ρ - 1)/(2λvr).
    pub fn busy_mean(&self) -> f64 {
        self.load.exp_m1() / self.arrival_rate
    }

    /// Stationary on probability E[B]/(E[B]+E[I]).
    pub fn on_probability(&self) -> f64 {
        let b = self.busy_mean();
        b / (b + self.idle_mean())
    }

    /// P(U <= u) = (1 - e^{-ρ P(Ŵ <= u)}) / ν.
    pub fn u_cdf(&self, u: f64) -> f64 {
        -(-self.load * self.forward_service_cdf(u)).exp_m1() / self.nu
    }

    /// Inverse-CDF draw of U, bisecting on the closed-form CDF to 1e-10 s.
    pub fn sample_u(&self, rng: &mut Rng) -> f64 {
        let p: f64 = rng.random();
        let target = -(-self.nu * p).ln_1p() / self.load;
        let (mut lo, mut hi) = (0.0, self.max_service());
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.forward_service_cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Draw of M with P(M = l) = (1-ν) ν^{l-1}, l >= 1.
    pub fn sample_m(&self, rng: &mut Rng) -> u64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        1 + (u.ln() / self.nu.ln()).floor() as u64
    }

    /// One draw of the forward busy time B̂ = Σ_{i=1}^M U_i.
    pub fn sample_forward_busy(&self, rng: &mut Rng) -> f64 {
        let m = self.sample_m(rng);
        (0..m).map(|_| self.sample_u(rng)).sum()
    }

    /// E[U] by quadrature of P(U > u) over [0, 2r/v].
    pub fn mean_u(&self) -> f64 {
        integrate(
            |u| 1.0 - self.u_cdf(u),
            0.0,
            self.max_service(),
            Tolerance::relative(1e-10),
        )
        .value
    }

    /// 2λrv E[U], which tends to 1 as the radius grows.
    pub fn scaled_mean_u(&self) -> f64 {
        self.arrival_rate * self.mean_u()
    }

    /// E[B̂] = E[M] E[U].
    pub fn forward_busy_mean(&self) -> f64 {
        self.load.exp() * self.mean_u()
    }
}

/// Exponential law handle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpLaw {
    pub rate: f64,
}

impl ExpLaw {
    pub fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.rate
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        self.quantile(rng.random())
    }
}

/// Value with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    /// |a - b| <= k √(se_a² + se_b²).
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.std_err.hypot(other.std_err)
    }
}

/// Sample mean of e^{-sX}.
pub fn empirical_laplace(samples: &[f64], s: f64) -> Estimate {
    let sum = Summary::from_slice(&samples.iter().map(|&x| (-s * x).exp()).collect::<Vec<_>>());
    Estimate {
        value: sum.mean,
        std_err: sum.std_err(),
    }
}

/// L_B(s) = 1 - s E[B] L_B̂(s), with E[B] in closed form and L_B̂ estimated
/// from forward-busy draws.
pub fn busy_laplace(s: f64, params: &MGInfParams, bhat_samples: &[f64]) -> Result<Estimate> {
    non_negative("s", s)?;
    if s == 0.0 {
        return Ok(Estimate {
            value: 1.0,
            std_err: 0.0,
        });
    }
    if bhat_samples.is_empty() {
        return Err(invalid("bhat_samples", "need at least one draw"));
    }
    let l = empirical_laplace(bhat_samples, s);
    let scale = s * params.busy_mean();
    Ok(Estimate {
        value: 1.0 - scale * l.value,
        std_err: scale * l.std_err,
    })
}

/// f(γ) = 2λv r_γ.
pub fn rescale_high(model: &NetworkModel, gamma: f64) -> Result<f64> {
    Ok(rescale_high_radius(model, model.coverage_radius(gamma)?))
}

/// g(γ) = 2λv r_γ e^{-λπr_γ²}.
pub fn rescale_low(model: &NetworkModel, gamma: f64) -> Result<f64> {
    Ok(rescale_low_radius(model, model.coverage_radius(gamma)?))
}

pub fn rescale_high_radius(model: &NetworkModel, radius: f64) -> f64 {
    2.0 * model.node_intensity * model.velocity * radius
}

pub fn rescale_low_radius(model: &NetworkModel, radius: f64) -> f64 {
    rescale_high_radius(model, radius) * (-model.load(radius)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::disc_intensity;
    use crate::rng::{rng_from_seed, SeedStream};

    fn preset() -> MGInfParams {
        MGInfParams::new(disc_intensity(200.0), 16.0, 200.0).unwrap()
    }

    #[test]
    fn identities() {
        for (lambda, r) in [(1e-6, 50.0), (disc_intensity(200.0), 200.0), (1e-4, 300.0)] {
            let p = MGInfParams::new(lambda, 16.0, r).unwrap();
            assert!((p.arrival_rate * p.mean_service - p.load).abs() <= 1e-14 * p.load);
            assert!((p.on_probability() - p.nu).abs() < 1e-12);
            assert!(p.nu > 0.0 && p.nu < 1.0);
        }
    }

    #[test]
    fn preset_values() {
        let p = preset();
        assert!((p.load - 1.0).abs() < 1e-12);
        assert!((p.mean_service - 19.634_954_084_936_208).abs() < 1e-9);
        assert!((p.idle_mean() - 19.634_954_084_936_208).abs() < 1e-9);
        // (e - 1) E[W].
        assert!((p.busy_mean() - 33.738_384_806_773_58).abs() < 1e-6);
    }

    #[test]
    fn service_density_integrates_to_one() {
        let p = preset();
        // s = (2r/v) sin θ removes the endpoint singularity.
        let smax = p.max_service();
        let q = integrate(
            |t| p.service_density(smax * t.sin()) * smax * t.cos(),
            0.0,
            0.5 * PI - 1e-12,
            Tolerance::relative(1e-11),
        );
        assert!((q.value - 1.0).abs() < 1e-8, "{q:?}");
        assert_eq!(p.service_density(-1.0), 0.0);
        assert_eq!(p.service_density(p.max_service() + 1.0), 0.0);
        assert_eq!(p.service_cdf(p.max_service()), 1.0);
        for s in [1.0, 5.0, 15.0, 24.0] {
            let q = integrate(|x| p.service_density(x), 0.0, s, Tolerance::relative(1e-12));
            assert!((q.value - p.service_cdf(s)).abs() < 1e-8);
        }
        let m = integrate(
            |t| {
                let s = smax * t.sin();
                s * p.service_density(s) * smax * t.cos()
            },
            0.0,
            0.5 * PI - 1e-12,
            Tolerance::relative(1e-11),
        );
        assert!((m.value - p.mean_service).abs() < 1e-7);
    }

    #[test]
    fn forward_cdf_matches_integrated_survival() {
        let p = preset();
        for u in [0.5, 3.0, 10.0, 20.0, 24.9] {
            let q = integrate(
                |x| 1.0 - p.service_cdf(x),
                0.0,
                u,
                Tolerance::relative(1e-12),
            );
            assert!((q.value / p.mean_service - p.forward_service_cdf(u)).abs() < 1e-9);
        }
        assert!((p.forward_service_cdf(p.max_service()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_service_mean() {
        let p = preset();
        let mut rng = rng_from_seed(4);
        let s = Summary::from_slice(
            &(0..200_000)
                .map(|_| p.sample_service(&mut rng))
                .collect::<Vec<_>>(),
        );
        assert!(s.within(p.mean_service, 3.0));
    }

    #[test]
    fn idle_law() {
        let p = preset();
        let e = p.idle_law();
        assert!((e.survival(e.mean()) - (-1.0f64).exp()).abs() < 1e-15);
        let fast = MGInfParams::new(disc_intensity(200.0), 32.0, 200.0).unwrap();
        assert!((fast.idle_mean() - 0.5 * p.idle_mean()).abs() < 1e-12);
    }

    #[test]
    fn small_load_busy_is_service() {
        let r = (1e-3 / (PI * disc_intensity(200.0))).sqrt();
        let p = MGInfParams::new(disc_intensity(200.0), 16.0, r).unwrap();
        assert!((p.load - 1e-3).abs() < 1e-15);
        assert!((p.busy_mean() / p.mean_service - 1.0).abs() < 0.01);
    }

    #[test]
    fn random_sum_sampler() {
        let p = preset();
        let mut rng = rng_from_seed(17);
        let ms: Vec<f64> = (0..200_000).map(|_| p.sample_m(&mut rng) as f64).collect();
        assert!(Summary::from_slice(&ms).within(p.load.exp(), 3.0));
        for _ in 0..10_000 {
            let u = p.sample_u(&mut rng);
            assert!((0.0..=p.max_service()).contains(&u));
        }
        let bh: Vec<f64> = (0..100_000)
            .map(|_| p.sample_forward_busy(&mut rng))
            .collect();
        assert!(Summary::from_slice(&bh).within(p.forward_busy_mean(), 3.0));
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = preset();
        let a: Vec<f64> = (0..10)
            .map(|i| p.sample_forward_busy(&mut SeedStream::new(3).rng(i)))
            .collect();
        let b: Vec<f64> = (0..10)
            .map(|i| p.sample_forward_busy(&mut SeedStream::new(3).rng(i)))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_mean_u_tends_to_one() {
        for rho in [16.0, 25.0] {
            let r = (rho / (PI * disc_intensity(200.0))).sqrt();
            let p = MGInfParams::new(disc_intensity(200.0), 16.0, r).unwrap();
            assert!(
                (p.scaled_mean_u() - 1.0).abs() < 0.05,
                "rho {rho}: {}",
                p.scaled_mean_u()
            );
        }
    }

    #[test]
    fn busy_laplace_basics() {
        let p = preset();
        let mut rng = rng_from_seed(2);
        let bh: Vec<f64> = (0..20_000)
            .map(|_| p.sample_forward_busy(&mut rng))
            .collect();
        assert_eq!(busy_laplace(0.0, &p, &bh).unwrap().value, 1.0);
        assert!(busy_laplace(-0.1, &p, &bh).is_err());
        let mut last = 1.0;
        for k in 1..20 {
            let v = busy_laplace(0.01 * k as f64, &p, &bh).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn rescaling_ratio() {
        let m = NetworkModel::reference();
        for g in [0.01, 1.0, 100.0] {
            let r = m.coverage_radius(g).unwrap();
            let ratio = rescale_low(&m, g).unwrap() / rescale_high(&m, g).unwrap();
            assert!((ratio - (-m.load(r)).exp()).abs() < 1e-15);
        }
        let f = rescale_high_radius(&m, 62.264);
        assert!((1.0 / f - 63.07).abs() < 1e-2);
    }
}
