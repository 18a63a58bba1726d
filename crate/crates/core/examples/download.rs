//! File download times and the fluid playout-buffer busy period: transforms
//! built from busy-period samples against direct simulation.

use poisson_mobility::apps::{
    download_laplace, fluid_busy_laplace_estimate, simulate_download, simulate_fluid_busy,
    EmpiricalLaplace,
};
use poisson_mobility::mginf::MGInfParams;
use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::trace::interarrival::radius_for_load;
use poisson_mobility::trace::simulate_coverage;
use poisson_mobility::Result;

/// Complete on intervals of `runs` independent coverage traces.
fn on_intervals(
    model: &NetworkModel,
    r: f64,
    runs: u64,
    seed: u64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let seeds = SeedStream::new(seed);
    (0..runs)
        .map(|i| {
            let rec = simulate_coverage(
                model.node_intensity,
                model.velocity,
                r,
                100_000.0,
                &mut seeds.rng(i),
            )?;
            let mut iv = rec.on_intervals();
            if rec.initially_on && !iv.is_empty() {
                iv.remove(0);
            }
            Ok(iv)
        })
        .collect()
}

fn busy_samples(runs: &[Vec<(f64, f64)>]) -> Result<EmpiricalLaplace> {
    EmpiricalLaplace::new(runs.iter().flatten().map(|(a, b)| b - a).collect())
}

fn main() -> Result<()> {
    let model = NetworkModel::reference();
    let r = model.coverage_radius(1.0)?;
    let idle = MGInfParams::for_model(&model, r)?.idle_law().rate;
    let busy = busy_samples(&on_intervals(&model, r, 20, 1)?)?;
    let runs = on_intervals(&model, r, 20, 2)?;

    let (delta, kappa) = (1e-6, 5e4);
    let mut rng = SeedStream::new(3).rng(0);
    let mut times = Vec::new();
    for iv in &runs {
        times.extend(simulate_download(iv, delta, kappa, &mut rng)?);
    }
    let direct = EmpiricalLaplace::new(times)?;
    println!("download, mean file 1 Mb at 50 kb/s while covered:");
    for s in [0.01, 0.05, 0.1] {
        let t = download_laplace(s, delta, kappa, idle, &busy)?;
        let d = direct.estimate(s);
        println!(
            "  s = {s:<5} L_T = {:.4} ± {:.4}, simulated {:.4} ± {:.4}",
            t.value, t.std_err, d.value, d.std_err
        );
    }

    let sigma = 2.0;
    let rf = radius_for_load(&model, 0.3);
    let idle_f = MGInfParams::for_model(&model, rf)?.idle_law().rate;
    let busy_f = busy_samples(&on_intervals(&model, rf, 20, 4)?)?;
    let fluid: Vec<f64> = on_intervals(&model, rf, 20, 5)?
        .iter()
        .flat_map(|iv| simulate_fluid_busy(iv, sigma))
        .collect();
    let direct_f = EmpiricalLaplace::new(fluid)?;
    println!("fluid buffer busy period, σ = {sigma}, load 0.3:");
    for s in [0.01, 0.1] {
        let t = fluid_busy_laplace_estimate(s, sigma, idle_f, &busy_f)?;
        let d = direct_f.estimate(s);
        println!(
            "  s = {s:<5} transform {:.4} ± {:.4}, simulated {:.4} ± {:.4}",
            t.value, t.std_err, d.value, d.std_err
        );
    }
    Ok(())
}
