//! Sharing number along a trajectory and the Johnson–Mehl cell statistics
//! behind it: mean cell area and chord length by quadrature and Monte Carlo.

use poisson_mobility::geometry::FieldSample;
use poisson_mobility::model::NetworkModel;
use poisson_mobility::rng::SeedStream;
use poisson_mobility::sharing::{
    expected_chord_length, expected_jm_area, sample_tagged_cell, sharing_trace, upper_sharing_trace,
};
use poisson_mobility::stats::Summary;
use poisson_mobility::trace::{Track, Trajectory};
use poisson_mobility::Result;

fn main() -> Result<()> {
    let base = NetworkModel::reference();
    let lam = base.node_intensity;
    let model = base.with_user_intensity(10.0 * lam);
    let r = (1.0 / (lam * std::f64::consts::PI)).sqrt();

    let mut rng = SeedStream::new(3).rng(0);
    let mut area = Summary::new();
    let mut chord = Summary::new();
    for _ in 0..4_000 {
        let cell = sample_tagged_cell(lam, r, &mut rng)?;
        area.push(cell.area);
        chord.push(cell.chord);
    }
    println!(
        "E[JM area]  {:.0} m²  (mc {:.0} ± {:.0})",
        expected_jm_area(lam, r)?,
        area.mean,
        area.std_err()
    );
    println!(
        "E[chord]    {:.2} m   (mc {:.2} ± {:.2})",
        expected_chord_length(lam, r)?,
        chord.mean,
        chord.std_err()
    );

    let traj = Trajectory::along_x(model.velocity, 1_000.0)?;
    let field = FieldSample::sample(lam, model.user_intensity, traj.padded_window(r, lam)?, 5)?;
    let track = Track::new(&field.nodes, traj);
    let n = sharing_trace(&field, &track, r);
    let upper = upper_sharing_trace(&field, &track, r);
    println!(
        "sharing number over 1000 s: {} jumps, upper bound {} jumps",
        n.jump_count(),
        upper.jump_count()
    );
    for (t0, t1, v) in n.pieces().into_iter().take(8) {
        println!(
            "  [{t0:8.2}, {t1:8.2}) N = {v} (upper {})",
            upper.value_at(t0)
        );
    }
    Ok(())
}
