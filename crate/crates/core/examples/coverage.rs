//! On/off coverage of a mobile at SNR threshold γ = 1: simulated on-fraction
//! and on/off means against the M/G/∞ closed forms.

use poisson_mobility::mginf::MGInfParams;
use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::stats::{mc_harness, ratio_estimate, Summary};
use poisson_mobility::trace::simulate_coverage;
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let r = model.coverage_radius(1.0)?;
    let q = MGInfParams::for_model(&model, r)?;
    println!("r = {r:.2} m, load λπr² = {:.4}", q.load);

    let runs = mc_harness(200, SeedStream::new(1), |_, rng| {
        simulate_coverage(model.node_intensity, model.velocity, r, 2_000.0, rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let p_on = Summary::from_slice(&runs.iter().map(|r| r.on_fraction()).collect::<Vec<_>>());
    let sums = |xs: Vec<f64>| (xs.iter().sum::<f64>(), xs.len() as f64);
    let on = ratio_estimate(
        &runs
            .iter()
            .map(|r| sums(r.on_durations()))
            .collect::<Vec<_>>(),
    );
    let off = ratio_estimate(
        &runs
            .iter()
            .map(|r| sums(r.off_durations()))
            .collect::<Vec<_>>(),
    );

    println!(
        "p_on      {:.4} ± {:.4}  (closed form {:.4})",
        p_on.mean,
        p_on.std_err(),
        q.on_probability()
    );
    println!(
        "mean on   {:.3} ± {:.3} s  (closed form {:.3} s)",
        on.value,
        on.std_err,
        q.busy_mean()
    );
    println!(
        "mean off  {:.3} ± {:.3} s  (closed form {:.3} s)",
        off.value,
        off.std_err,
        q.idle_mean()
    );
    Ok(())
}
