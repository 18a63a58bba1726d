//! Rescaled up-crossing interarrivals against Exp(1) at high thresholds, with
//! and without Rayleigh fading, and for the SINR.

use poisson_mobility::mginf::rescale_high;
use poisson_mobility::model::{db_to_linear, NetworkModel};
use poisson_mobility::rng::SeedStream;
use poisson_mobility::stats::ks_test_exp1;
use poisson_mobility::trace::interarrival::{
    coverage_interarrivals, fading_dead_time, fading_interarrivals, normalize_by_mean,
    sinr_interarrivals,
};
use poisson_mobility::trace::{FadingModel, DEFAULT_COHERENCE_TIME, DEFAULT_DT};
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let n = 300;
    for db in [0.0, 20.0, 40.0] {
        let g = db_to_linear(db);
        let f = rescale_high(&model, g)?;
        let r = model.coverage_radius(g)?;

        let exact: Vec<f64> = coverage_interarrivals(&model, r, n, SeedStream::new(1))?
            .iter()
            .map(|x| x * f)
            .collect();
        let fading = FadingModel::rayleigh(DEFAULT_COHERENCE_TIME)?;
        let faded = normalize_by_mean(&fading_interarrivals(
            &model,
            g,
            fading,
            DEFAULT_DT,
            fading_dead_time(&model, g)?,
            n,
            SeedStream::new(2),
        )?);
        let sinr: Vec<f64> = sinr_interarrivals(&model, g, DEFAULT_DT, n, SeedStream::new(3))?
            .iter()
            .map(|x| x * f)
            .collect();

        for (name, xs) in [("exact", exact), ("rayleigh", faded), ("sinr", sinr)] {
            let ks = ks_test_exp1(&xs)?;
            println!(
                "{db:>4} dB {name:<9} D = {:.4} (critical {:.4}) {}",
                ks.d,
                ks.critical,
                if ks.pass { "pass" } else { "fail" }
            );
        }
    }
    Ok(())
}
