//! Network parameters and the pointwise maps shared by every other module:
//! path-loss SNR, Shannon rate, sharing factor and coverage radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, invalid, non_negative, positive, Result};

/// Poisson network seen by a mobile moving on a line.
///
/// Lengths are meters, times seconds, intensities per square meter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    /// λ, nodes per m².
    pub node_intensity: f64,
    /// ξ, static users per m².
    pub user_intensity: f64,
    /// p, transmit power in watts.
    pub tx_power: f64,
    /// w, noise power in watts.
    pub noise_power: f64,
    /// β, path-loss exponent.
    pub pathloss_exponent: f64,
    /// v, mobile speed in m/s.
    pub velocity: f64,
    /// a, rate scale in bits/s.
    pub bandwidth_const: f64,
}

impl NetworkModel {
    pub fn new(
        node_intensity: f64,
        user_intensity: f64,
        tx_power: f64,
        noise_power: f64,
        pathloss_exponent: f64,
        velocity: f64,
        bandwidth_const: f64,
    ) -> Result<Self> {
        let m = Self {
            node_intensity,
            user_intensity,
            tx_power,
            noise_power,
            pathloss_exponent,
            velocity,
            bandwidth_const,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        positive("node_intensity", self.node_intensity)?;
        non_negative("user_intensity", self.user_intensity)?;
        positive("tx_power", self.tx_power)?;
        positive("noise_power", self.noise_power)?;
        finite("pathloss_exponent", self.pathloss_exponent)?;
        if self.pathloss_exponent <= 2.0 {
            return Err(invalid(
                "pathloss_exponent",
                format!("must be > 2, got {}", self.pathloss_exponent),
            ));
        }
        positive("velocity", self.velocity)?;
        positive("bandwidth_const", self.bandwidth_const)?;
        Ok(())
    }

    /// The default simulation scenario: nodes with one node per disc of radius
    /// 200 m, p = 2 W, β = 4, v = 16 m/s, noise calibrated at the cell edge.
    pub fn reference() -> Self {
        let lambda = disc_intensity(200.0);
        let cal = NoiseCalibration::reference();
        Self {
            node_intensity: lambda,
            user_intensity: 0.0,
            tx_power: 2.0,
            noise_power: cal
                .noise_power(lambda, 2.0, 4.0)
                .expect("valid reference calibration"),
            pathloss_exponent: 4.0,
            velocity: 16.0,
            bandwidth_const: 1.0,
        }
    }

    pub fn with_user_intensity(mut self, xi: f64) -> Self {
        self.user_intensity = xi;
        self
    }

    /// K = p/w.
    pub fn k(&self) -> f64 {
        self.tx_power / self.noise_power
    }

    /// r_γ = (p/(wγ))^{1/β}.
    pub fn coverage_radius(&self, gamma: f64) -> Result<f64> {
        positive("gamma", gamma)?;
        let r = (self.tx_power / (self.noise_power * gamma)).powf(1.0 / self.pathloss_exponent);
        finite("coverage_radius", r)
    }

    /// The SNR threshold whose coverage radius is `radius`.
    pub fn gamma_for_radius(&self, radius: f64) -> Result<f64> {
        positive("radius", radius)?;
        Ok(self.snr_point(radius))
    }

    pub fn threshold(&self, gamma: f64) -> Result<Threshold> {
        Ok(Threshold {
            gamma,
            radius: self.coverage_radius(gamma)?,
        })
    }

    pub fn threshold_for_radius(&self, radius: f64) -> Result<Threshold> {
        Ok(Threshold {
            gamma: self.gamma_for_radius(radius)?,
            radius,
        })
    }

    /// p L^{-β} / w; infinite at L = 0.
    pub fn snr_point(&self, distance: f64) -> f64 {
        if distance <= 0.0 {
            return f64::INFINITY;
        }
        self.tx_power * distance.powf(-self.pathloss_exponent) / self.noise_power
    }

    /// a ln(1 + snr) when served, else 0.
    pub fn shannon_rate(&self, snr: f64, served: bool) -> f64 {
        if served {
            self.bandwidth_const * snr.max(0.0).ln_1p()
        } else {
            0.0
        }
    }

    /// Inverse of the Shannon map: the radius at which a ln(1+SNR) equals `rate`.
    pub fn rate_radius(&self, rate: f64) -> Result<f64> {
        positive("rate", rate)?;
        let snr = (rate / self.bandwidth_const).exp_m1();
        self.coverage_radius(snr)
    }

    /// ρ = λπr².
    pub fn load(&self, radius: f64) -> f64 {
        self.node_intensity * PI * radius * radius
    }

    /// Stationary probability of coverage, 1 - e^{-λπr²}.
    pub fn coverage_probability(&self, radius: f64) -> f64 {
        -(-self.load(radius)).exp_m1()
    }

    /// Maps (λ, ξ, v) to (λ/c², ξ/c², c·v); radii scale by c.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            node_intensity: self.node_intensity / (c * c),
            user_intensity: self.user_intensity / (c * c),
            velocity: self.velocity * c,
            noise_power: self.noise_power * c.powf(-self.pathloss_exponent),
            ..*self
        }
    }
}

/// Intensity giving one node per disc of radius `radius` on average.
pub fn disc_intensity(radius: f64) -> f64 {
    1.0 / (PI * radius * radius)
}

/// Sharing factor 1/(1+n).
pub fn sharing_factor(n: u32) -> f64 {
    1.0 / (1.0 + n as f64)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// SNR threshold γ with its coverage radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub gamma: f64,
    pub radius: f64,
}

/// Noise power calibrated to a target SNR at the cell-edge distance, defined
/// as the `edge_quantile` of the nearest-node distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCalibration {
    pub edge_quantile: f64,
    pub snr_edge: f64,
}

impl NoiseCalibration {
    /// Edge SNR chosen so that γ = 1 has coverage radius 62.26 m under the
    /// reference geometry, i.e. 1/f(r_γ) = 63.07 s at v = 16 m/s.
    pub const REFERENCE_SNR_EDGE: f64 = 1.771_727_2e-3;

    pub fn new(edge_quantile: f64, snr_edge: f64) -> Result<Self> {
        finite("edge_quantile", edge_quantile)?;
        if !(0.0 < edge_quantile && edge_quantile < 1.0) {
            return Err(invalid(
                "edge_quantile",
                format!("must lie in (0,1), got {edge_quantile}"),
            ));
        }
        positive("snr_edge", snr_edge)?;
        Ok(Self {
            edge_quantile,
            snr_edge,
        })
    }

    pub fn reference() -> Self {
        Self {
            edge_quantile: 0.9,
            snr_edge: Self::REFERENCE_SNR_EDGE,
        }
    }

    /// d_edge = sqrt(-ln(1-q)/(πλ)).
    pub fn edge_distance(&self, node_intensity: f64) -> Result<f64> {
        positive("node_intensity", node_intensity)?;
        Ok((-(-self.edge_quantile).ln_1p() / (PI * node_intensity)).sqrt())
    }

    /// w = p d_edge^{-β} / snr_edge.
    pub fn noise_power(&self, node_intensity: f64, tx_power: f64, beta: f64) -> Result<f64> {
        positive("tx_power", tx_power)?;
        let d = self.edge_distance(node_intensity)?;
        Ok(tx_power * d.powf(-beta) / self.snr_edge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_model(w: f64) -> NetworkModel {
        NetworkModel::new(1e-5, 0.0, 2.0, w, 4.0, 16.0, 1.0).unwrap()
    }

    #[test]
    fn coverage_radius_examples() {
        assert!((unit_model(2.0).coverage_radius(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((unit_model(2.0 / 16.0).coverage_radius(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(unit_model(2.0).coverage_radius(0.0).is_err());
        assert!(unit_model(2.0).coverage_radius(f64::NAN).is_err());
    }

    #[test]
    fn snr_examples() {
        let m = unit_model(2.0);
        assert_eq!(m.snr_point(1.0), 1.0);
        assert_eq!(m.snr_point(2.0), 1.0 / 16.0);
        assert!(m.snr_point(0.0).is_infinite());
    }

    #[test]
    fn shannon_and_sharing() {
        let m = unit_model(2.0);
        assert_eq!(m.shannon_rate(0.0, true), 0.0);
        assert!((m.shannon_rate(std::f64::consts::E - 1.0, true) - 1.0).abs() < 1e-15);
        assert_eq!(m.shannon_rate(5.0, false), 0.0);
        assert_eq!(sharing_factor(0), 1.0);
        assert_eq!(sharing_factor(1), 0.5);
        assert!((sharing_factor(9) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn edge_distance_matches_root_solve() {
        let lambda = disc_intensity(200.0);
        let cal = NoiseCalibration::new(0.9, 1.0).unwrap();
        let d = cal.edge_distance(lambda).unwrap();
        // Independent check: bisection on P(D <= d) = 1 - exp(-λπd²) = 0.9.
        let (mut lo, mut hi) = (0.0f64, 1e4f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - (-lambda * PI * mid * mid).exp() < 0.9 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((d - lo).abs() < 1e-9);
        assert!((d - 200.0 * 10f64.ln().sqrt()).abs() < 1e-9);
        assert!((d - 303.485).abs() < 1e-3);
        // With γ = snr_edge the coverage radius is d_edge itself.
        let w = cal.noise_power(lambda, 2.0, 4.0).unwrap();
        let m = NetworkModel::new(lambda, 0.0, 2.0, w, 4.0, 16.0, 1.0).unwrap();
        assert!((m.coverage_radius(cal.snr_edge).unwrap() - d).abs() < 1e-9);
    }

    #[test]
    fn reference_calibration_gives_63_07_seconds() {
        let m = NetworkModel::reference();
        let r = m.coverage_radius(1.0).unwrap();
        assert!((r - 62.264).abs() < 1e-3, "r = {r}");
        let f = 2.0 * m.node_intensity * m.velocity * r;
        assert!((1.0 / f - 63.07).abs() < 1e-3, "1/f = {}", 1.0 / f);
    }

    #[test]
    fn model_validation() {
        assert!(NetworkModel::new(0.0, 0.0, 1.0, 1.0, 4.0, 1.0, 1.0).is_err());
        assert!(NetworkModel::new(1.0, -1.0, 1.0, 1.0, 4.0, 1.0, 1.0).is_err());
        assert!(NetworkModel::new(1.0, 0.0, 1.0, 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(NetworkModel::new(1.0, 0.0, 1.0, 1.0, 4.0, 0.0, 1.0).is_err());
        assert!(NetworkModel::new(1.0, 0.0, 1.0, 1.0, 4.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn db_round_trip() {
        assert!((db_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((linear_to_db(db_to_linear(17.3)) - 17.3).abs() < 1e-12);
    }

    #[test]
    fn rate_radius_inverts_shannon() {
        let m = NetworkModel::reference();
        let r = m.rate_radius(3.0).unwrap();
        assert!((m.shannon_rate(m.snr_point(r), true) - 3.0).abs() < 1e-12);
    }
}
