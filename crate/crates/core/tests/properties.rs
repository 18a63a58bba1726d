use proptest::prelude::*;

use poisson_mobility::geometry::{brute_force_nearest, FieldSample, Point, Window};
use poisson_mobility::mginf::MGInfParams;
use poisson_mobility::model::{NetworkModel, NoiseCalibration};
use poisson_mobility::sharedrate::shared_rate_trace;
use poisson_mobility::sharing::{
    jm_edge_crossings, sharing_trace, upper_sharing_trace, SharingKind,
};
use poisson_mobility::stats::{ks_test, Summary};
use poisson_mobility::trace::{coverage_intervals, CrossingRecord, FadingModel, Track, Trajectory};

/// Models with load λπr² in [0.01, 20] at γ = 1.
fn model() -> impl Strategy<Value = NetworkModel> {
    (
        1e-6..1e-4f64,
        0.0..1e-3f64,
        0.1..10.0f64,
        0.01..20.0f64,
        2.1..6.0f64,
        1.0..40.0f64,
        0.5..2.0f64,
    )
        .prop_map(|(l, x, p, load, b, v, a)| {
            let r = (load / (l * std::f64::consts::PI)).sqrt();
            NetworkModel::new(l, x, p, p * r.powf(-b), b, v, a).unwrap()
        })
}

fn points(n: usize, half: f64) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(
        (-half..half, -half..half).prop_map(|(x, y)| Point::new(x, y)),
        1..n,
    )
}

/// Sorted disjoint intervals inside [0, 100].
fn intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(0.0..100.0f64, 0..20).prop_map(|mut xs| {
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.chunks_exact(2)
            .map(|c| (c[0], c[1]))
            .filter(|(a, b)| b > a)
            .collect()
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn threshold_radius_round_trip(m in model(), log_g in -3.0..3.0f64, step in 0.01..1.0f64) {
        let g = 10f64.powf(log_g);
        let r = m.coverage_radius(g).unwrap();
        prop_assert!(rel(m.snr_point(r), g) < 1e-12);
        prop_assert!(m.coverage_radius(g * (1.0 + step)).unwrap() < r);
    }

    #[test]
    fn dimensionless_quantities_are_scale_invariant(m in model(), log_g in -1.0..1.0f64, c in 0.1..10.0f64) {
        let g = 10f64.powf(log_g);
        let s = m.rescaled(c);
        let r = m.coverage_radius(g).unwrap();
        let rs = s.coverage_radius(g).unwrap();
        prop_assert!(rel(rs, c * r) < 1e-12);
        let a = MGInfParams::for_model(&m, r).unwrap();
        let b = MGInfParams::for_model(&s, rs).unwrap();
        prop_assert!(rel(a.load, b.load) < 1e-12);
        prop_assert!(rel(a.nu, b.nu) < 1e-12);
        prop_assert!(rel(m.coverage_probability(r), s.coverage_probability(rs)) < 1e-12);
        prop_assert!(rel(a.busy_mean(), b.busy_mean()) < 1e-12);
    }

    #[test]
    fn arrival_rate_times_mean_service_is_the_load(l in 1e-7..1e-4f64, v in 0.1..50.0f64, r in 1.0..1000.0f64) {
        let p = MGInfParams::new(l, v, r).unwrap();
        prop_assert!(rel(p.arrival_rate * p.mean_service, p.load) < 1e-14);
        prop_assert!(p.nu > 0.0 && p.nu <= 1.0);
        if p.load < 30.0 {
            prop_assert!(p.nu < 1.0);
        }
    }

    #[test]
    fn noise_calibration_matches_edge_snr(q in 0.05..0.99f64, snr in 1e-4..1e2f64, l in 1e-7..1e-3f64, p in 0.1..10.0f64, b in 2.1..6.0f64) {
        let c = NoiseCalibration::new(q, snr).unwrap();
        let d = c.edge_distance(l).unwrap();
        prop_assert!(rel(d, (-(1.0 - q).ln() / (std::f64::consts::PI * l)).sqrt()) < 1e-12);
        let w = c.noise_power(l, p, b).unwrap();
        prop_assert!(rel(p * d.powf(-b) / w, snr) < 1e-12);
    }

    #[test]
    fn crossing_record_consistency(iv in intervals()) {
        let rec = CrossingRecord::from_intervals(1.0, &iv, 0.0, 100.0);
        prop_assert!(rec.is_interleaved());
        let on = rec.on_durations();
        let off = rec.off_durations();
        let v = rec.interarrivals();
        prop_assert_eq!(v.len(), rec.up_times.len().saturating_sub(1));
        // Consecutive up-crossings are one on plus one off duration apart.
        for (k, w) in rec.up_times.windows(2).enumerate() {
            let down = rec.down_times.iter().find(|&&d| d > w[0]).unwrap();
            prop_assert!((v[k] - (w[1] - w[0])).abs() < 1e-9);
            prop_assert!(((down - w[0]) + (w[1] - down) - v[k]).abs() < 1e-9);
        }
        let total_on: f64 = iv.iter().map(|(a, b)| b - a).sum();
        prop_assert!((rec.on_fraction() * 100.0 - total_on).abs() < 1e-9);
        prop_assert!(on.iter().chain(&off).all(|&x| x > 0.0));
    }

    #[test]
    fn nearest_node_is_brute_force_argmin(nodes in points(60, 500.0), q in points(20, 600.0)) {
        let w = Window::new(-500.0, -500.0, 500.0, 500.0).unwrap();
        let f = FieldSample::from_points(nodes.clone(), Vec::new(), w, 0);
        for p in q {
            let (i, d) = f.nearest_node(p).unwrap();
            let (j, e) = brute_force_nearest(&nodes, p).unwrap();
            // Ties may pick either index but never a farther node.
            prop_assert!(i == j || (d - e).abs() < 1e-9);
            prop_assert_eq!(d, e);
        }
    }

    #[test]
    fn sharing_and_rate_orderings(nodes in points(40, 800.0), users in points(200, 800.0), y in -300.0..300.0f64, log_g in -1.0..1.5f64) {
        let m = NetworkModel::reference();
        let g = 10f64.powf(log_g);
        let r = m.coverage_radius(g).unwrap();
        let w = Window::new(-800.0, -800.0, 800.0, 800.0).unwrap();
        let f = FieldSample::from_points(nodes.clone(), users, w, 0);
        let traj = Trajectory::new(Point::new(-600.0, y), Point::new(1.0, 0.0), m.velocity, 75.0).unwrap();
        let track = Track::new(&f.nodes, traj);
        let n = sharing_trace(&f, &track, r);
        let nu = upper_sharing_trace(&f, &track, r);
        for (t0, t1, _) in n.pieces().into_iter().chain(nu.pieces()) {
            for t in [t0, 0.5 * (t0 + t1)] {
                prop_assert!(nu.value_at(t) >= n.value_at(t), "t = {}", t);
            }
        }
        let counts = jm_edge_crossings(&f, &track, r, SharingKind::Exact);
        prop_assert!(counts.sharing_jumps <= counts.crossings);

        let exact = shared_rate_trace(&f, &track, &m, g, 0.05, SharingKind::Exact).unwrap();
        let upper = shared_rate_trace(&f, &track, &m, g, 0.05, SharingKind::Upper).unwrap();
        for k in 0..exact.len() {
            prop_assert!(upper.shared[k] <= exact.shared[k] + 1e-12);
            prop_assert!(exact.shared[k] <= exact.rate[k] + 1e-12);
            if exact.rate[k] == 0.0 {
                prop_assert_eq!(exact.shared[k], 0.0);
            }
        }
        // Inside each coverage interval the nearest node is within r; between them it is not.
        let iv = coverage_intervals(&nodes, &traj, r);
        let mut bounds = vec![0.0];
        for &(a, b) in &iv {
            bounds.extend([a, b]);
        }
        bounds.push(traj.duration);
        for (k, w) in bounds.windows(2).enumerate() {
            if w[1] - w[0] < 1e-6 {
                continue;
            }
            let d = brute_force_nearest(&nodes, traj.position(0.5 * (w[0] + w[1]))).unwrap().1;
            prop_assert_eq!(d <= r, k % 2 == 1);
        }
    }

    #[test]
    fn hyperexp_fading_has_unit_mean_and_requested_variance(v in 1.0..64.0f64) {
        let f = FadingModel::hyperexp_with_variance(v, 0.007).unwrap();
        prop_assert!((f.mean() - 1.0).abs() < 1e-12);
        prop_assert!(rel(f.variance(), v) < 1e-9);
    }

    #[test]
    fn ks_statistic_is_a_sup_distance(xs in prop::collection::vec(0.0..10.0f64, 1..200)) {
        let r = ks_test(&xs, |x| -(-x).exp_m1(), "exp1").unwrap();
        let n = xs.len() as f64;
        prop_assert!(r.d >= 0.5 / n - 1e-12 && r.d <= 1.0);
    }

    #[test]
    fn summary_merge_is_order_independent(xs in prop::collection::vec(-1e3..1e3f64, 2..300), split in 0.0..1.0f64) {
        let k = ((xs.len() as f64) * split) as usize;
        let whole = Summary::from_slice(&xs);
        let mut a = Summary::from_slice(&xs[..k]);
        a.merge(&Summary::from_slice(&xs[k..]));
        let mut b = Summary::from_slice(&xs[k..]);
        b.merge(&Summary::from_slice(&xs[..k]));
        for s in [a, b] {
            prop_assert_eq!(s.n, whole.n);
            prop_assert!((s.mean - whole.mean).abs() <= 1e-9 * (1.0 + whole.mean.abs()));
            prop_assert!((s.variance() - whole.variance()).abs() <= 1e-7 * (1.0 + whole.variance()));
        }
    }
}
