//! Stationary shared rate S = R/(1+N): tail exponent of P(S > s), the
//! share of the tail with no competing users, and var(S) against user density.

use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::sharedrate::{conditional_zero_sharing, sample_snapshot, tail_exponent_high};
use poisson_mobility::sharing::SharingKind;
use poisson_mobility::stats::Summary;
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let lam = model.node_intensity;
    let r = model.coverage_radius(1.0)?;
    let seeds = SeedStream::new(9);

    let mut rng = seeds.rng(0);
    let mut pairs = Vec::new();
    for _ in 0..1_000_000 {
        let snap = sample_snapshot(lam, lam, r, &mut rng)?;
        pairs.push((snap.shared(&model, r, SharingKind::Exact), snap.n_exact));
    }
    let shared: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tail = tail_exponent_high(&shared, 8)?;
    println!(
        "−log P(S > s)/s slope {:.3} ± {:.3} (2/β = {})",
        tail.slope,
        tail.slope_std_err,
        2.0 / model.pathloss_exponent
    );
    for s in [1.0, 4.0, 8.0, tail.thresholds[0]] {
        let c = conditional_zero_sharing(&pairs, s)?;
        println!(
            "P(N = 0 | S > {s:.1}) = {:.4} ({} samples)",
            c.probability, c.conditioned
        );
    }

    for k in [5.0, 25.0, 100.0] {
        let mut rng = seeds.substream(k as u64).rng(0);
        let mut s = Summary::new();
        for _ in 0..100_000 {
            s.push(sample_snapshot(lam, k * lam, r, &mut rng)?.shared(
                &model,
                r,
                SharingKind::Exact,
            ));
        }
        println!(
            "ξ = {k:>5}λ: E[S] = {:.4}, var(S) = {:.4}",
            s.mean,
            s.variance()
        );
    }
    Ok(())
}
