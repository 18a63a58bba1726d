//! Streaming load factor ρ(γ, ξ), its maximiser γ* for several user densities
//! and the node density needed for ρ(γ*, ξ) = 1.

use poisson_mobility::apps::{find_gamma_star, level_set_rho1, load_factor, StreamingConfig};
use poisson_mobility::model::{linear_to_db, NetworkModel};
use poisson_mobility::Result;

fn main() -> Result<()> {
    // Noise chosen so the load at γ = 1 is one.
    let base = NetworkModel::reference();
    let model = NetworkModel {
        noise_power: 1.25e-9,
        ..base
    };
    let cfg = StreamingConfig::new(model, 1.0)?;
    let lam = model.node_intensity;

    for k in [0.0, 1.0, 4.0, 10.0] {
        let c = cfg.with_user_intensity(k * lam);
        let star = find_gamma_star(&c)?;
        let curve: Vec<String> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&g| Ok(format!("{:.3}", load_factor(g, &c)?)))
            .collect::<Result<_>>()?;
        println!(
            "ξ = {k:>4}λ: γ* = {:7.3} ({:5.2} dB), ρ(γ*) = {:.4}; ρ at γ = 0.1, 1, 10, 100: {}",
            star.gamma,
            linear_to_db(star.gamma),
            star.rho,
            curve.join(", ")
        );
    }

    let users = [1e-6, 1e-5, 1e-4];
    for (xi, p) in users.iter().zip(level_set_rho1(&cfg, &users, 1e-9, 1e-2)) {
        let p = p?;
        println!(
            "ξ = {xi:.0e}: ρ = 1 needs λ = {:.3e} (γ* = {:.2})",
            p.node_intensity, p.gamma_star
        );
    }
    Ok(())
}
