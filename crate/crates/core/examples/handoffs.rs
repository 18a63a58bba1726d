//! Serving-node changes along one trajectory: handoffs, SNR maxima and
//! Johnson–Mehl edge crossings against their intensities.

use std::f64::consts::PI;

use poisson_mobility::geometry::FieldSample;
use poisson_mobility::model::NetworkModel;
use poisson_mobility::sharing::{jm_crossing_intensity, jm_edge_crossings, SharingKind};
use poisson_mobility::trace::{Track, Trajectory};
use poisson_mobility::Result;

fn main() -> Result<()> {
    let model = NetworkModel::reference()
        .with_user_intensity(4.0 * NetworkModel::reference().node_intensity);
    let lam = model.node_intensity;
    let r = model.coverage_radius(1.0)?;
    let duration = 50_000.0;

    let traj = Trajectory::along_x(model.velocity, duration)?;
    let field = FieldSample::sample(lam, model.user_intensity, traj.padded_window(r, lam)?, 11)?;
    let track = Track::new(&field.nodes, traj);

    let handoffs = track.handoffs();
    let maxima = track.interior_maxima();
    let jm = jm_edge_crossings(&field, &track, r, SharingKind::Exact);

    let rate = |n: usize| n as f64 / duration;
    println!(
        "handoffs/s      {:.5}  (4v√λ/π = {:.5})",
        rate(handoffs.len()),
        4.0 * model.velocity * lam.sqrt() / PI
    );
    println!(
        "SNR maxima/s    {:.5}  (v√λ = {:.5})",
        rate(maxima.len()),
        model.velocity * lam.sqrt()
    );
    println!(
        "JM crossings/s  {:.6}  (closed form {:.6})",
        rate(jm.crossings),
        jm_crossing_intensity(lam, model.velocity, r)
    );
    println!(
        "sharing jumps at JM crossings: {} of {}",
        jm.sharing_jumps, jm.crossings
    );
    if let Some(h) = handoffs.first() {
        println!(
            "first handoff at {:.2} s: node {} -> {} at {:.1} m",
            h.time, h.from, h.to, h.distance
        );
    }
    Ok(())
}
