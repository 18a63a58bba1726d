//! Sharing-number processes, the Johnson–Mehl crossing intensity, integral
//! geometry of the conditioned Johnson–Mehl cell and Cox-process sharing means.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::geometry::{sample_poisson_points, FieldSample, LineField, Point, Window};
use crate::model::NetworkModel;
use crate::quad::{integrate, Quadrature, Tolerance};
use crate::rng::Rng;
use crate::trace::Track;

/// Piecewise-constant integer process on [start, end].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub start: f64,
    pub end: f64,
    pub initial: u32,
    /// Strictly increasing jump times.
    pub times: Vec<f64>,
    /// `values[k]` holds on [times[k], times[k+1]).
    pub values: Vec<u32>,
}

impl StepTrace {
    /// Builds a trace from contiguous pieces (t0, t1, value), merging equal
    /// neighbours and dropping empty pieces.
    pub fn from_pieces(
        start: f64,
        end: f64,
        pieces: impl IntoIterator<Item = (f64, f64, u32)>,
    ) -> Self {
        let mut initial = None;
        let mut current = 0;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (t0, t1, v) in pieces {
            if t1 <= t0 {
                continue;
            }
            match initial {
                None => {
                    initial = Some(v);
                    current = v;
                }
                Some(_) if v != current => {
                    times.push(t0);
                    values.push(v);
                    current = v;
                }
                Some(_) => {}
            }
        }
        Self {
            start,
            end,
            initial: initial.unwrap_or(0),
            times,
            values,
        }
    }

    pub fn constant(start: f64, end: f64, value: u32) -> Self {
        Self {
            start,
            end,
            initial: value,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn value_at(&self, t: f64) -> u32 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            self.initial
        } else {
            self.values[k - 1]
        }
    }

    pub fn jump_count(&self) -> usize {
        self.times.len()
    }

    /// (t0, t1, value) for every constancy interval.
    pub fn pieces(&self) -> Vec<(f64, f64, u32)> {
        let mut out = Vec::with_capacity(self.times.len() + 1);
        let mut t = self.start;
        let mut v = self.initial;
        for (&s, &w) in self.times.iter().zip(&self.values) {
            out.push((t, s, v));
            t = s;
            v = w;
        }
        out.push((t, self.end, v));
        out
    }

    pub fn sample(&self, t0: f64, dt: f64, n: usize) -> Vec<u32> {
        (0..n).map(|k| self.value_at(t0 + k as f64 * dt)).collect()
    }

    /// CSV with columns time,value: one row for the initial value and one per jump.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "value"])?;
        w.write_record([self.start.to_string(), self.initial.to_string()])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which user count is attached to the serving node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SharingKind {
    /// Users in the Johnson–Mehl cell of the serving node.
    Exact,
    /// Users in the disc of radius r_γ around the serving node.
    Upper,
}

fn node_count(field: &FieldSample, node: usize, radius: f64, kind: SharingKind) -> u32 {
    match kind {
        SharingKind::Exact => field.jm_user_count(node, radius),
        SharingKind::Upper => field.disc_user_count(node, radius),
    }
}

/// Sharing process along `track`, exact at every instant: on each serving
/// segment the count is constant while served and zero otherwise.
pub fn sharing_process(
    field: &FieldSample,
    track: &Track,
    radius: f64,
    kind: SharingKind,
) -> StepTrace {
    let v = track.velocity();
    let mut pieces = Vec::with_capacity(3 * track.segments.len());
    for seg in &track.segments {
        let i = seg.node;
        let h2 = radius * radius - track.offset2[i];
        let (lo, hi) = if h2 > 0.0 {
            let h = h2.sqrt();
            (
                (track.along[i] - h).max(seg.s0),
                (track.along[i] + h).min(seg.s1),
            )
        } else {
            (seg.s1, seg.s1)
        };
        if hi > lo {
            let n = node_count(field, i, radius, kind);
            pieces.push((seg.s0 / v, lo / v, 0));
            pieces.push((lo / v, hi / v, n));
            pieces.push((hi / v, seg.s1 / v, 0));
        } else {
            pieces.push((seg.s0 / v, seg.s1 / v, 0));
        }
    }
    StepTrace::from_pieces(0.0, track.duration(), pieces)
}

/// N(t): users in the Johnson–Mehl cell of the serving node while served.
pub fn sharing_trace(field: &FieldSample, track: &Track, radius: f64) -> StepTrace {
    sharing_process(field, track, radius, SharingKind::Exact)
}

/// N̂(t): users within r_γ of the serving node while served.
pub fn upper_sharing_trace(field: &FieldSample, track: &Track, radius: f64) -> StepTrace {
    sharing_process(field, track, radius, SharingKind::Upper)
}

/// Brute-force value of the sharing process at time `t`.
pub fn sharing_at(
    field: &FieldSample,
    track: &Track,
    radius: f64,
    kind: SharingKind,
    t: f64,
) -> u32 {
    let q = track.trajectory.position(t);
    match field.nearest_node(q) {
        Some((i, d)) if d <= radius => {
            let c = field.nodes[i];
            field
                .users
                .iter()
                .filter(|u| {
                    u.dist2(c) <= radius * radius
                        && (kind == SharingKind::Upper || field.in_johnson_mehl(**u, i, radius))
                })
                .count() as u32
        }
        _ => 0,
    }
}

/// Handoffs at serving distance at most `radius` (crossings of internal
/// Johnson–Mehl edges), and how many of them change the sharing number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeCrossingCount {
    pub crossings: usize,
    pub sharing_jumps: usize,
}

pub fn jm_edge_crossings(
    field: &FieldSample,
    track: &Track,
    radius: f64,
    kind: SharingKind,
) -> EdgeCrossingCount {
    let mut out = EdgeCrossingCount::default();
    for h in track.handoffs() {
        if h.distance <= radius {
            out.crossings += 1;
            if node_count(field, h.from, radius, kind) != node_count(field, h.to, radius, kind) {
                out.sharing_jumps += 1;
            }
        }
    }
    out
}

/// Intensity of Johnson–Mehl cell edge crossings,
/// (4v√λ/π)(erf(√(λπ) r) − 2√λ r e^{−λπr²}).
pub fn jm_crossing_intensity(node_intensity: f64, velocity: f64, radius: f64) -> f64 {
    let sl = node_intensity.sqrt();
    4.0 * velocity * sl / PI
        * (libm::erf((node_intensity * PI).sqrt() * radius)
            - 2.0 * sl * radius * (-node_intensity * PI * radius * radius).exp())
}

pub fn jm_crossing_intensity_for(model: &NetworkModel, radius: f64) -> f64 {
    jm_crossing_intensity(model.node_intensity, model.velocity, radius)
}

/// Upper integration limit of the distance from the tagged user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InnerLimit {
    /// x cos α + √(r² − x² sin² α), the chord of the coverage disc.
    #[default]
    SinSquared,
    /// x cos α + √(r² − x² sin α), clamped at zero.
    Printed,
}

impl InnerLimit {
    fn upper(self, x: f64, alpha: f64, r: f64) -> f64 {
        let s = alpha.sin();
        let d = match self {
            InnerLimit::SinSquared => r * r - x * x * s * s,
            InnerLimit::Printed => r * r - x * x * s,
        };
        (x * alpha.cos() + d.max(0.0).sqrt()).max(0.0)
    }
}

/// Area of B(0, x) ∪ B(Q, z) where |Q| = u, the angle between Q and the node
/// X (|X| = x) is α and z = |Q − X|.
pub fn union_area(x: f64, alpha: f64, u: f64) -> f64 {
    let z2 = (u * u + x * x - 2.0 * u * x * alpha.cos()).max(0.0);
    let z = z2.sqrt();
    if z <= 1e-12 * x.max(u) {
        return PI * x * x;
    }
    let f = (x * alpha.sin()).atan2(u - x * alpha.cos());
    u * x * alpha.sin() + (PI - alpha) * x * x + (PI - f) * z2
}

/// Area of the union of two discs of radii r1, r2 at center distance d.
pub fn disc_union_area(d: f64, r1: f64, r2: f64) -> f64 {
    let (a1, a2) = (PI * r1 * r1, PI * r2 * r2);
    if d >= r1 + r2 {
        return a1 + a2;
    }
    if d <= (r1 - r2).abs() {
        return a1.max(a2);
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let lens = r1 * r1 * (c1 - c1.sin() * c1.cos()) + r2 * r2 * (c2 - c2.sin() * c2.cos());
    a1 + a2 - lens
}

/// Options for the conditioned Johnson–Mehl quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JmQuadrature {
    pub rel_tol: f64,
    pub limit: InnerLimit,
}

impl Default for JmQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            limit: InnerLimit::SinSquared,
        }
    }
}

/// ∫_0^r x ∫_0^π ∫_0^{U} u^k e^{−λ·union} du dα dx with k ∈ {0, 1}.
fn jm_triple(lambda: f64, r: f64, weight_u: bool, opts: JmQuadrature) -> Result<Quadrature> {
    positive("node_intensity", lambda)?;
    positive("radius", r)?;
    let inner_tol = Tolerance::relative(opts.rel_tol * 1e-2);
    let mid_tol = Tolerance::relative(opts.rel_tol * 1e-1);
    let mut evaluations = 0;
    let mut converged = true;
    let outer = integrate(
        |x| {
            let mid = integrate(
                |alpha| {
                    let top = opts.limit.upper(x, alpha, r);
                    if top <= 0.0 {
                        return 0.0;
                    }
                    let q = integrate(
                        |u| {
                            let w = if weight_u { u } else { 1.0 };
                            w * (-lambda * union_area(x, alpha, u)).exp()
                        },
                        0.0,
                        top,
                        inner_tol,
                    );
                    evaluations += q.evaluations;
                    converged &= q.converged;
                    q.value
                },
                0.0,
                PI,
                mid_tol,
            );
            converged &= mid.converged;
            x * mid.value
        },
        0.0,
        r,
        Tolerance::relative(opts.rel_tol),
    );
    Ok(Quadrature {
        evaluations,
        converged: converged && outer.converged,
        ..outer
    })
}

fn checked(q: Quadrature, rel_tol: f64) -> Result<Quadrature> {
    if q.converged && q.relative_error() <= rel_tol {
        Ok(q)
    } else {
        Err(Error::Quadrature {
            achieved: q.relative_error(),
            requested: rel_tol,
        })
    }
}

/// E[Ĵ]: expected area of the Johnson–Mehl cell containing a tagged user,
/// conditioned on the user being within r of its node.
pub fn expected_jm_area_with(lambda: f64, r: f64, opts: JmQuadrature) -> Result<Quadrature> {
    let q = jm_triple(lambda, r, true, opts)?;
    let c = 4.0 * lambda * PI / -(-lambda * PI * r * r).exp_m1();
    checked(
        Quadrature {
            value: c * q.value,
            error: c * q.error,
            ..q
        },
        opts.rel_tol,
    )
}

pub fn expected_jm_area(lambda: f64, r: f64) -> Result<f64> {
    Ok(expected_jm_area_with(lambda, r, JmQuadrature::default())?.value)
}

/// E[l]: expected length of a uniformly oriented line through the tagged user
/// inside its conditioned Johnson–Mehl cell.
pub fn expected_chord_length_with(lambda: f64, r: f64, opts: JmQuadrature) -> Result<Quadrature> {
    let q = jm_triple(lambda, r, false, opts)?;
    let c = (2.0 / PI) * 2.0 * lambda * PI / -(-lambda * PI * r * r).exp_m1();
    checked(
        Quadrature {
            value: c * q.value,
            error: c * q.error,
            ..q
        },
        opts.rel_tol,
    )
}

pub fn expected_chord_length(lambda: f64, r: f64) -> Result<f64> {
    Ok(expected_chord_length_with(lambda, r, JmQuadrature::default())?.value)
}

/// Tabulated λE[Ĵ] as a function of the load λπr², which it depends on alone.
/// Cubic interpolation in (log load, log value); below the table the cell is
/// the disc to first order, above it the value is flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmAreaTable {
    log_load: Vec<f64>,
    log_value: Vec<f64>,
}

impl JmAreaTable {
    pub const MIN_LOAD: f64 = 1e-4;
    pub const MAX_LOAD: f64 = 60.0;

    pub fn build(points_per_decade: usize) -> Result<Self> {
        let (a, b) = (Self::MIN_LOAD.ln(), Self::MAX_LOAD.ln());
        let n = ((b - a) / 10f64.ln() * points_per_decade as f64).ceil() as usize + 1;
        let log_load: Vec<f64> = (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect();
        let log_value = log_load
            .par_iter()
            .map(|&l| {
                let rho = l.exp();
                let r = (rho / PI).sqrt();
                expected_jm_area_with(
                    1.0,
                    r,
                    JmQuadrature {
                        rel_tol: 1e-8,
                        ..Default::default()
                    },
                )
                .map(|q| q.value.ln())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            log_load,
            log_value,
        })
    }

    /// Shared table with eight points per decade.
    pub fn global() -> &'static JmAreaTable {
        static TABLE: OnceLock<JmAreaTable> = OnceLock::new();
        TABLE.get_or_init(|| JmAreaTable::build(8).expect("Johnson–Mehl area table"))
    }

    /// λE[Ĵ] at load λπr².
    pub fn scaled_area(&self, load: f64) -> f64 {
        if load <= 0.0 {
            return 0.0;
        }
        let x = load.ln();
        let n = self.log_load.len();
        if x <= self.log_load[0] {
            return load * (self.log_value[0] - self.log_load[0]).exp();
        }
        if x >= self.log_load[n - 1] {
            return self.log_value[n - 1].exp();
        }
        let k = self.log_load.partition_point(|&l| l <= x).clamp(1, n - 1) - 1;
        let y = |i: isize| -> f64 {
            let i = i.clamp(0, n as isize - 1) as usize;
            self.log_value[i]
        };
        let h = self.log_load[1] - self.log_load[0];
        let t = (x - self.log_load[k]) / h;
        let k = k as isize;
        let (p0, p1, p2, p3) = (y(k - 1), y(k), y(k + 1), y(k + 2));
        let (p0, p3) = (
            if k == 0 { 2.0 * p1 - p2 } else { p0 },
            if k + 2 >= n as isize {
                2.0 * p2 - p1
            } else {
                p3
            },
        );
        let t2 = t * t;
        let t3 = t2 * t;
        let v = 0.5
            * (2.0 * p1
                + (p2 - p0) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
                + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3);
        v.exp()
    }

    /// E[Ĵ] for intensity λ and radius r.
    pub fn area(&self, lambda: f64, r: f64) -> f64 {
        self.scaled_area(lambda * PI * r * r) / lambda
    }
}

/// Mean number of other Cox-process users sharing the tagged user's cell,
/// πλ_rλ_t E[Ĵ] + λ_t E[l].
pub fn cox_mean_sharing(
    line_intensity: f64,
    line_user_intensity: f64,
    lambda: f64,
    r: f64,
) -> Result<f64> {
    non_negative("line_intensity", line_intensity)?;
    non_negative("line user_intensity", line_user_intensity)?;
    if line_user_intensity == 0.0 {
        return Ok(0.0);
    }
    let area = expected_jm_area(lambda, r)?;
    let chord = expected_chord_length(lambda, r)?;
    Ok(PI * line_intensity * line_user_intensity * area + line_user_intensity * chord)
}

/// E[1/(N+1)] for N ~ Poisson(μ), (1 − e^{−μ})/μ.
pub fn poisson_harmonic_mean(mu: f64) -> f64 {
    if mu < 1e-8 {
        1.0 - 0.5 * mu
    } else {
        -(-mu).exp_m1() / mu
    }
}

/// One replication of the tagged-user experiment: a user at the origin, a
/// Poisson node pattern around it, conditioned on the user being covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggedCell {
    pub node_distance: f64,
    pub area: f64,
    pub chord: f64,
}

fn tagged_window(lambda: f64, r: f64) -> Result<Window> {
    Window::centered(Point::new(0.0, 0.0), 3.0 * r + 3.0 / lambda.sqrt())
}

/// Samples node patterns until the origin is within `r` of its nearest node
/// and measures the cell area and a uniformly oriented chord through the origin.
pub fn sample_tagged_cell(lambda: f64, r: f64, rng: &mut Rng) -> Result<TaggedCell> {
    let window = tagged_window(lambda, r)?;
    loop {
        let nodes = sample_poisson_points(lambda, &window, rng)?;
        let field = FieldSample::from_points(nodes, Vec::new(), window, 0);
        let origin = Point::new(0.0, 0.0);
        if let Some((i, d)) = field.nearest_node(origin) {
            if d <= r {
                let theta = rng.random::<f64>() * PI;
                let dir = Point::new(theta.cos(), theta.sin());
                return Ok(TaggedCell {
                    node_distance: d,
                    area: field.jm_cell_area(i, r),
                    chord: field.jm_chord_length(origin, dir, i, r),
                });
            }
        }
    }
}

/// Number of other Cox users in the tagged user's conditioned cell: roads of
/// a Poisson line process plus the tagged user's own road through the origin.
pub fn sample_cox_sharing(
    line_intensity: f64,
    line_user_intensity: f64,
    lambda: f64,
    r: f64,
    rng: &mut Rng,
) -> Result<u32> {
    let window = tagged_window(lambda, r)?;
    let origin = Point::new(0.0, 0.0);
    loop {
        let nodes = sample_poisson_points(lambda, &window, rng)?;
        let probe = FieldSample::from_points(nodes, Vec::new(), window, 0);
        let Some((i, d)) = probe.nearest_node(origin) else {
            continue;
        };
        if d > r {
            continue;
        }
        let roads = LineField::sample(line_intensity, line_user_intensity, window, rng)?;
        let mut users = roads.user_points();
        let theta = rng.random::<f64>() * PI;
        let dir = Point::new(theta.cos(), theta.sin());
        let reach = 4.0 * r;
        let k = crate::geometry::poisson_count(line_user_intensity * 2.0 * reach, rng)?;
        for _ in 0..k {
            let t = (2.0 * rng.random::<f64>() - 1.0) * reach;
            users.push(dir.scale(t));
        }
        let field = FieldSample::from_points(probe.nodes, users, window, 0);
        return Ok(field.jm_user_count(i, r));
    }
}
