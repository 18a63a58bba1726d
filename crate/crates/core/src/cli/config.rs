//! Experiment configuration files.
//!
//! TOML with dotted keys, for example `model.tx_power = 2.0`. Unknown keys
//! are rejected. Thresholds accept a linear ratio or a string with a `dB`
//! suffix.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::apps::HetNetModel;
use crate::error::{Error, Result};
use crate::model::{db_to_linear, disc_intensity, NetworkModel, NoiseCalibration};
use crate::trace::{FadingModel, DEFAULT_COHERENCE_TIME, DEFAULT_DT};

/// Version of every CSV and JSON schema written by the CLI.
pub const SCHEMA_VERSION: u32 = 1;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: u64,
    pub replications: u64,
    pub output: PathBuf,
    pub model: ModelConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub fading: FadingConfig,
    #[serde(default)]
    pub sinr: SinrConfig,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
    #[serde(default)]
    pub streaming: StreamingSection,
    #[serde(default)]
    pub sharedrate: SharedRateConfig,
    #[serde(default)]
    pub fluid: FluidConfig,
    #[serde(default)]
    pub download: DownloadConfig,
    #[serde(default)]
    pub hetnet: HetNetConfig,
    #[serde(default)]
    pub cox: CoxConfig,
}

/// Network parameters. Give exactly one of `node_intensity` and
/// `node_disc_radius` (one node per disc of that radius), and exactly one of
/// `noise_power` and `snr_edge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub node_intensity: Option<f64>,
    pub node_disc_radius: Option<f64>,
    #[serde(default)]
    pub user_intensity: f64,
    pub tx_power: f64,
    pub noise_power: Option<f64>,
    pub snr_edge: Option<f64>,
    #[serde(default = "default_edge_quantile")]
    pub edge_quantile: f64,
    pub pathloss_exponent: f64,
    pub velocity: f64,
    #[serde(default = "one")]
    pub bandwidth_const: f64,
    /// Path-loss exponent used to calibrate the noise from `snr_edge`;
    /// defaults to `pathloss_exponent`.
    pub calibration_exponent: Option<f64>,
}

fn default_edge_quantile() -> f64 {
    0.9
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn node_intensity(&self) -> Result<f64> {
        match (self.node_intensity, self.node_disc_radius) {
            (Some(l), None) => Ok(l),
            (None, Some(r)) if r > 0.0 => Ok(disc_intensity(r)),
            (None, Some(r)) => Err(config_err(format!(
                "model.node_disc_radius must be > 0, got {r}"
            ))),
            _ => Err(config_err(
                "give exactly one of model.node_intensity and model.node_disc_radius",
            )),
        }
    }

    pub fn build(&self) -> Result<NetworkModel> {
        let lambda = self.node_intensity()?;
        let noise = match (self.noise_power, self.snr_edge) {
            (Some(w), None) => w,
            (None, Some(s)) => NoiseCalibration::new(self.edge_quantile, s)?.noise_power(
                lambda,
                self.tx_power,
                self.calibration_exponent.unwrap_or(self.pathloss_exponent),
            )?,
            _ => {
                return Err(config_err(
                    "give exactly one of model.noise_power and model.snr_edge",
                ))
            }
        };
        NetworkModel::new(
            lambda,
            self.user_intensity,
            self.tx_power,
            noise,
            self.pathloss_exponent,
            self.velocity,
            self.bandwidth_const,
        )
    }
}

/// An SNR threshold written as a linear ratio or as `"<x> dB"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Linear(f64),
    Text(String),
}

impl GammaSpec {
    pub fn linear(&self) -> Result<f64> {
        let g = match self {
            GammaSpec::Linear(g) => *g,
            GammaSpec::Text(s) => {
                let t = s.trim();
                let num = t
                    .strip_suffix("dB")
                    .or_else(|| t.strip_suffix("db"))
                    .ok_or_else(|| {
                        config_err(format!("threshold `{s}`: strings need a dB suffix"))
                    })?;
                let db: f64 = num
                    .trim()
                    .parse()
                    .map_err(|_| config_err(format!("threshold `{s}` is not a number of dB")))?;
                db_to_linear(db)
            }
        };
        if g.is_finite() && g > 0.0 {
            Ok(g)
        } else {
            Err(config_err(format!(
                "threshold must be a positive ratio, got {g}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub gamma: Vec<GammaSpec>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            gamma: vec![GammaSpec::Linear(1.0)],
        }
    }
}

impl ThresholdConfig {
    pub fn linear(&self) -> Result<Vec<f64>> {
        if self.gamma.is_empty() {
            return Err(config_err("thresholds.gamma is empty"));
        }
        self.gamma.iter().map(GammaSpec::linear).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    /// Seconds of travel per replication.
    pub duration: f64,
    /// Sampling step of sampled traces.
    pub dt: f64,
    /// Heading in degrees from the x axis.
    pub heading_deg: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            duration: 2_000.0,
            dt: DEFAULT_DT,
            heading_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingChoice {
    None,
    Rayleigh,
    Hyperexp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingConfig {
    pub kind: FadingChoice,
    /// Power-gain variance of the hyperexponential law (>= 1).
    pub variance: Option<f64>,
    pub coherence_time: f64,
    /// Variances swept by `asymptotics`.
    pub sweep_variances: Vec<f64>,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            kind: FadingChoice::None,
            variance: None,
            coherence_time: DEFAULT_COHERENCE_TIME,
            sweep_variances: Vec::new(),
        }
    }
}

impl FadingConfig {
    pub fn model(&self) -> Result<FadingModel> {
        match (self.kind, self.variance) {
            (FadingChoice::None, None) => Ok(FadingModel::none()),
            (FadingChoice::Rayleigh, None) => FadingModel::rayleigh(self.coherence_time),
            (FadingChoice::Hyperexp, Some(v)) => {
                FadingModel::hyperexp_with_variance(v, self.coherence_time)
            }
            (FadingChoice::Hyperexp, None) => Err(config_err(
                "fading.kind = \"hyperexp\" needs fading.variance",
            )),
            (_, Some(_)) => Err(config_err(
                "fading.variance applies only to fading.kind = \"hyperexp\"",
            )),
        }
    }

    /// Fading law of a sweep entry: Rayleigh at variance 1, else hyperexponential.
    pub fn sweep_model(&self, variance: f64) -> Result<FadingModel> {
        if variance == 1.0 {
            FadingModel::rayleigh(self.coherence_time)
        } else {
            FadingModel::hyperexp_with_variance(variance, self.coherence_time)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinrConfig {
    /// Also write a SINR trace from `trace`.
    pub enabled: bool,
    /// Path-loss exponents swept by `asymptotics`; the noise stays at the
    /// configured model's value.
    pub betas: Vec<f64>,
    /// Interference truncation radius; defaults to max(20 r, 10/√λ).
    pub interference_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsConfig {
    /// Interarrivals per K-S test on the threshold grid.
    pub samples: usize,
    /// Loads λπr² for the low-threshold rescaling.
    pub low_loads: Vec<f64>,
    pub low_samples: usize,
    /// Emit empirical CDF points.
    pub ecdf: bool,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            low_loads: vec![4.0, 5.0, 6.0],
            low_samples: 500,
            ecdf: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreamingSection {
    /// η, playback rate in bits/s.
    pub playback_rate: f64,
    /// User densities ξ/λ of the load-factor curves.
    pub xi_over_lambda: Vec<f64>,
    /// Log-spaced γ range and point count of the curves.
    pub gamma_range: [f64; 2],
    pub gamma_points: usize,
    /// User densities ξ (per m²) of the ρ(γ*, ξ) = 1 level set; empty skips it.
    pub level_set_users: Vec<f64>,
    pub level_set_node_range: [f64; 2],
}

impl Default for StreamingSection {
    fn default() -> Self {
        Self {
            playback_rate: 1.0,
            xi_over_lambda: vec![0.0, 1.0, 4.0, 10.0],
            gamma_range: [1e-4, 1e6],
            gamma_points: 201,
            level_set_users: Vec::new(),
            level_set_node_range: [1e-8, 1e-3],
        }
    }
}

/// Snapshot study of the shared rate S at the first threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharedRateConfig {
    /// Snapshots for the tail fit and P(N = 0 | S > s), at the model's ξ.
    pub samples: usize,
    pub tail_points: usize,
    pub zero_sharing_probes: Vec<f64>,
    /// User densities ξ/λ of the var(S) table.
    pub variance_xi_over_lambda: Vec<f64>,
    pub variance_samples: usize,
}

impl Default for SharedRateConfig {
    fn default() -> Self {
        Self {
            samples: 2_000_000,
            tail_points: 8,
            zero_sharing_probes: vec![1.0, 4.0, 8.0, 12.0],
            variance_xi_over_lambda: vec![5.0, 25.0, 50.0, 75.0, 100.0],
            variance_samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidConfig {
    /// σ, buffer fill rate over playback rate while covered.
    pub sigma: f64,
    /// Load λπr² of the coverage process feeding the buffer.
    pub load: f64,
    pub s: Vec<f64>,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            load: 0.3,
            s: vec![0.01, 0.1],
        }
    }
}

/// File-size rate δ (per bit) and service rate κ (bits/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DownloadConfig {
    pub pairs: Vec<[f64; 2]>,
    pub s: Vec<f64>,
    /// Seconds of travel per replication.
    pub horizon: f64,
}

impl Default for DownloadConfig {
    fn default() -> Self {
        Self {
            pairs: vec![[1e-6, 5e4], [1e-7, 1e5]],
            s: vec![0.01, 0.05, 0.1],
            horizon: 100_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HetNetConfig {
    /// Micro densities λ̂/λ.
    pub micro_over_macro: Vec<f64>,
    /// Micro transmit power p̂/p.
    pub micro_power_ratio: f64,
    /// Seconds of travel per Monte Carlo replication.
    pub duration: f64,
    /// Points of the closed-form λ̂ sweep, log-spaced over `sweep_range` (λ̂/λ).
    pub sweep_points: usize,
    pub sweep_range: [f64; 2],
}

impl Default for HetNetConfig {
    fn default() -> Self {
        Self {
            micro_over_macro: vec![0.0, 1.0, 10.0],
            micro_power_ratio: 1.0 / 256.0,
            duration: 4_000.0,
            sweep_points: 61,
            sweep_range: [1e-2, 1e3],
        }
    }
}

impl HetNetConfig {
    pub fn model(&self, macro_model: &NetworkModel, ratio: f64) -> Result<HetNetModel> {
        let h = HetNetModel::from_macro(
            macro_model,
            ratio * macro_model.node_intensity,
            self.micro_power_ratio * macro_model.tx_power,
        );
        h.validate()?;
        Ok(h)
    }
}

/// Roads with λ_r (per m) and λ_t users per m of road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoxConfig {
    pub line_intensity: Vec<f64>,
    pub line_user_intensity: f64,
}

impl Default for CoxConfig {
    fn default() -> Self {
        Self {
            line_intensity: vec![1.0 / 1600.0, 1.0 / 800.0, 1.0 / 400.0, 1.0 / 200.0],
            line_user_intensity: 0.02,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Checks every section that any command may read.
    pub fn validate(&self) -> Result<()> {
        if self.scenario.trim().is_empty() {
            return Err(config_err("scenario is empty"));
        }
        if self.replications == 0 {
            return Err(config_err("replications must be >= 1"));
        }
        self.model.build()?;
        self.thresholds.linear()?;
        let t = &self.trajectory;
        if !(t.duration.is_finite() && t.duration > 0.0) {
            return Err(config_err(format!(
                "trajectory.duration must be > 0, got {}",
                t.duration
            )));
        }
        if !(t.dt.is_finite() && t.dt > 0.0 && t.dt <= t.duration) {
            return Err(config_err(format!(
                "trajectory.dt must lie in (0, duration], got {}",
                t.dt
            )));
        }
        if !t.heading_deg.is_finite() {
            return Err(config_err("trajectory.heading_deg must be finite"));
        }
        self.fading.model()?;
        for &v in &self.fading.sweep_variances {
            self.fading.sweep_model(v)?;
        }
        if self.sinr.betas.iter().any(|&b| !(b > 2.0)) {
            return Err(config_err("sinr.betas must all exceed 2"));
        }
        if self.sinr.interference_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(config_err("sinr.interference_radius must be > 0"));
        }
        let a = &self.asymptotics;
        if a.samples < crate::stats::KS_MIN_SAMPLES || a.low_samples < crate::stats::KS_MIN_SAMPLES
        {
            return Err(config_err(format!(
                "asymptotics sample sizes must be >= {}",
                crate::stats::KS_MIN_SAMPLES
            )));
        }
        if a.low_loads.iter().any(|&l| !(l > 0.0)) {
            return Err(config_err("asymptotics.low_loads must be > 0"));
        }
        let s = &self.streaming;
        if !(s.playback_rate > 0.0) || s.xi_over_lambda.iter().any(|&x| !(x >= 0.0)) {
            return Err(config_err(
                "streaming.playback_rate must be > 0 and xi_over_lambda >= 0",
            ));
        }
        if !(s.gamma_range[0] > 0.0 && s.gamma_range[1] > s.gamma_range[0]) || s.gamma_points < 2 {
            return Err(config_err(
                "streaming.gamma_range must be increasing and positive with >= 2 points",
            ));
        }
        if !(s.level_set_node_range[0] > 0.0
            && s.level_set_node_range[1] > s.level_set_node_range[0])
        {
            return Err(config_err(
                "streaming.level_set_node_range must be increasing and positive",
            ));
        }
        let sr = &self.sharedrate;
        if sr.tail_points < 3
            || sr.variance_samples < 100
            || sr.variance_xi_over_lambda.iter().any(|&x| !(x > 0.0))
        {
            return Err(config_err(
                "sharedrate needs tail_points >= 3, variance_samples >= 100 and positive densities",
            ));
        }
        if !(self.fluid.sigma > 1.0 && self.fluid.load > 0.0) {
            return Err(config_err(
                "fluid.sigma must exceed 1 and fluid.load must be > 0",
            ));
        }
        let d = &self.download;
        if d.pairs.iter().flatten().any(|&x| !(x > 0.0)) || !(d.horizon > 0.0) {
            return Err(config_err(
                "download.pairs and download.horizon must be positive",
            ));
        }
        if self.fluid.s.iter().chain(&d.s).any(|&x| !(x >= 0.0)) {
            return Err(config_err("transform arguments s must be >= 0"));
        }
        let h = &self.hetnet;
        if h.micro_over_macro.iter().any(|&x| !(x >= 0.0))
            || !(h.micro_power_ratio > 0.0)
            || !(h.duration > 0.0)
        {
            return Err(config_err(
                "hetnet ratios, power ratio and duration must be valid",
            ));
        }
        if !(h.sweep_range[0] > 0.0 && h.sweep_range[1] > h.sweep_range[0]) || h.sweep_points < 2 {
            return Err(config_err(
                "hetnet.sweep_range must be increasing and positive with >= 2 points",
            ));
        }
        if self.cox.line_intensity.iter().any(|&x| !(x > 0.0))
            || !(self.cox.line_user_intensity > 0.0)
        {
            return Err(config_err("cox intensities must be > 0"));
        }
        Ok(())
    }
}
