//! Two-tier network with low-power micro nodes: coverage statistics and the
//! streaming optimum as the micro density grows.

use poisson_mobility::apps::{
    find_gamma_star_with, hetnet_load_factor, hetnet_on_stats, simulate_hetnet_coverage,
    HetNetModel, GAMMA_RANGE,
};
use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::stats::Summary;
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let lam = model.node_intensity;
    let gamma = 0.009393517093963185;
    println!("macro radius {:.1} m", model.coverage_radius(gamma)?);

    for ratio in [0.0, 1.0, 4.0, 10.0, 30.0] {
        let h = HetNetModel::from_macro(&model, ratio * lam, model.tx_power / 256.0);
        let cf = hetnet_on_stats(&h, gamma)?;
        let mut p = Summary::new();
        let seeds = SeedStream::new(ratio as u64);
        for i in 0..20 {
            p.push(simulate_hetnet_coverage(&h, gamma, 4_000.0, &mut seeds.rng(i))?.on_fraction());
        }
        let star = find_gamma_star_with(
            |g| hetnet_load_factor(g, &h, 4.0 * lam, model.bandwidth_const, 1.0),
            GAMMA_RANGE.0,
            GAMMA_RANGE.1,
        )?;
        println!(
            "λ̂ = {ratio:>4}λ: p_on {:.4} (mc {:.4}), mean on {:6.2} s, mean off {:6.2} s, γ* at ξ = 4λ: {:.3}",
            cf.p_on, p.mean, cf.mean_on, cf.mean_off, star.gamma
        );
    }
    Ok(())
}
