//! Users on roads (a Poisson line process) share their node with more users
//! than Poisson users of the same planar density.

use std::f64::consts::PI;

use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::sharing::{cox_mean_sharing, expected_jm_area, sample_cox_sharing};
use poisson_mobility::stats::Summary;
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let lam = model.node_intensity;
    let r = 200.0;
    let users_per_m = 0.02;
    let area = expected_jm_area(lam, r)?;
    for roads in [1.0 / 1600.0, 1.0 / 400.0] {
        let mut mc = Summary::new();
        let mut rng = SeedStream::new(2).rng(0);
        for _ in 0..2_000 {
            mc.push(sample_cox_sharing(roads, users_per_m, lam, r, &mut rng)? as f64);
        }
        println!(
            "roads {roads:.2e}/m: Cox mean {:.3} (mc {:.3} ± {:.3}), Poisson users of equal density {:.3}",
            cox_mean_sharing(roads, users_per_m, lam, r)?,
            mc.mean,
            mc.std_err(),
            PI * roads * users_per_m * area
        );
    }
    Ok(())
}
