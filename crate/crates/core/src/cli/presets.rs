//! Named scenario presets, stored as config text so they go through the same
//! parser and validation as user files.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

const BASE: &str = r#"
seed = 1
replications = 200
model.node_disc_radius = 200.0
model.tx_power = 2.0
model.snr_edge = 1.7717272e-3
model.pathloss_exponent = 4.0
model.velocity = 16.0
model.bandwidth_const = 1.0
trajectory.duration = 2000.0
trajectory.dt = 0.01
"#;

/// Noise with λπ(p/w)^{1/2} = 1, so the load at γ = 1 is one.
const UNIT_LOAD_NOISE: &str = r#"
seed = 1
replications = 200
model.node_disc_radius = 200.0
model.tx_power = 2.0
model.noise_power = 1.25e-9
model.pathloss_exponent = 4.0
model.velocity = 16.0
model.bandwidth_const = 1.0
"#;

const PRESETS: &[(&str, &str, &str)] = &[
    (
        "paper-sec6-default",
        "one node per 200 m disc, p = 2 W, β = 4, v = 16 m/s, dt = 0.01 s, γ = 1",
        r#"
scenario = "paper-sec6-default"
output = "out/sec6-default"
model.user_intensity = 7.957747154594767e-6
thresholds.gamma = [1.0]
hetnet.micro_over_macro = [0.0, 1.0, 10.0]
"#,
    ),
    (
        "paper-fig5",
        "rescaled up-crossing interarrivals over a threshold grid",
        r#"
scenario = "paper-fig5"
output = "out/interarrivals"
thresholds.gamma = ["-10 dB", "0 dB", "10 dB", "20 dB", "30 dB", "40 dB", "50 dB"]
asymptotics.samples = 1000
asymptotics.low_loads = [4.0, 5.0, 6.0]
asymptotics.low_samples = 500
"#,
    ),
    (
        "paper-fig7",
        "pass threshold against fading variance with suppressed crossings",
        r#"
scenario = "paper-fig7"
output = "out/fading"
thresholds.gamma = ["0 dB", "10 dB", "20 dB", "30 dB", "40 dB"]
fading.sweep_variances = [1.0, 2.0, 4.0, 8.0, 16.0]
fading.coherence_time = 0.007
asymptotics.samples = 1000
asymptotics.low_loads = []
"#,
    ),
    (
        "paper-fig8",
        "SINR pass threshold against path-loss exponent, noise fixed at β = 4",
        r#"
scenario = "paper-fig8"
output = "out/sinr"
thresholds.gamma = ["0 dB", "10 dB", "20 dB", "30 dB", "40 dB"]
sinr.betas = [4.0, 3.75, 3.5, 3.25, 3.0]
asymptotics.samples = 1000
asymptotics.low_loads = []
"#,
    ),
    (
        "paper-fig9",
        "streaming load factor against γ with unit load at γ = 1, ξ/λ in {0, 1, 4, 10}",
        r#"
scenario = "paper-fig9"
output = "out/streaming"
streaming.playback_rate = 1.0
streaming.xi_over_lambda = [0.0, 1.0, 4.0, 10.0]
streaming.gamma_range = [1e-4, 1e6]
streaming.gamma_points = 201
"#,
    ),
    (
        "paper-fig10",
        "node density needed for ρ(γ*, ξ) = 1 against user density",
        r#"
scenario = "paper-fig10"
output = "out/level-set"
streaming.playback_rate = 1.0
streaming.xi_over_lambda = []
streaming.level_set_users = [1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4]
streaming.level_set_node_range = [1e-9, 1e-2]
"#,
    ),
    (
        "paper-fig11",
        "two-tier coverage: mean on time and volume fraction against micro density",
        r#"
scenario = "paper-fig11"
output = "out/two-tier"
replications = 100
thresholds.gamma = [0.009393517093963185]
hetnet.micro_over_macro = [0.0, 1.0, 10.0]
hetnet.micro_power_ratio = 0.00390625
hetnet.duration = 4000.0
streaming.xi_over_lambda = [1.0, 4.0, 10.0]
"#,
    ),
    (
        "paper-download",
        "download-time and fluid busy-period transforms against simulation",
        r#"
scenario = "paper-download"
output = "out/download"
replications = 100
download.pairs = [[1e-6, 5e4], [1e-7, 1e5]]
download.s = [0.01, 0.05, 0.1]
download.horizon = 100000.0
fluid.sigma = 2.0
fluid.load = 0.3
fluid.s = [0.01, 0.1]
"#,
    ),
    (
        "paper-cox",
        "mean sharing number of Cox road users against Poisson users",
        r#"
scenario = "paper-cox"
output = "out/cox"
replications = 4000
thresholds.gamma = [0.009393517093963185]
cox.line_intensity = [0.000625, 0.00125, 0.0025, 0.005]
cox.line_user_intensity = 0.02
"#,
    ),
];

/// (name, description) of every preset.
pub fn list() -> impl Iterator<Item = (&'static str, &'static str)> {
    PRESETS.iter().map(|(n, d, _)| (*n, *d))
}

/// Config text of preset `name`.
pub fn text(name: &str) -> Result<String> {
    let (_, _, body) = PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    let base = if name == "paper-fig9" || name == "paper-fig10" {
        UNIT_LOAD_NOISE
    } else {
        BASE
    };
    Ok(merge(base, body))
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(&text(name)?)
}

/// Base keys overridden by any key the body sets.
fn merge(base: &str, body: &str) -> String {
    let key = |line: &str| line.split('=').next().map(|k| k.trim().to_string());
    let body_keys: Vec<String> = body
        .lines()
        .filter(|l| l.contains('='))
        .filter_map(key)
        .collect();
    let mut out: Vec<&str> = base
        .lines()
        .filter(|l| !l.contains('=') || key(l).is_none_or(|k| !body_keys.contains(&k)))
        .collect();
    out.extend(body.lines());
    out.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkModel;

    #[test]
    fn every_preset_loads() {
        for (name, _) in list() {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.scenario, name);
        }
        assert!(load("nope").is_err());
    }

    #[test]
    fn default_preset_is_the_reference_model() {
        let cfg = load("paper-sec6-default").unwrap();
        let m = cfg.model.build().unwrap();
        let r = NetworkModel::reference();
        assert!((m.noise_power / r.noise_power - 1.0).abs() < 1e-12);
        assert_eq!(m.node_intensity, r.node_intensity);
        assert_eq!(cfg.trajectory.dt, 0.01);
        assert_eq!(m.velocity, 16.0);
    }

    #[test]
    fn unit_load_presets() {
        for name in ["paper-fig9", "paper-fig10"] {
            let m = load(name).unwrap().model.build().unwrap();
            let b = m.load(m.coverage_radius(1.0).unwrap());
            assert!((b - 1.0).abs() < 1e-9, "{name}: {b}");
        }
    }

    #[test]
    fn two_tier_preset_threshold_gives_200m() {
        let cfg = load("paper-fig11").unwrap();
        let m = cfg.model.build().unwrap();
        let g = cfg.thresholds.linear().unwrap()[0];
        assert!((m.coverage_radius(g).unwrap() - 200.0).abs() < 0.01);
    }

    #[test]
    fn merge_overrides_base_keys() {
        let cfg = load("paper-fig11").unwrap();
        assert_eq!(cfg.replications, 100);
    }
}
