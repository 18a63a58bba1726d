//! Exact serving-node envelope along a straight trajectory.
//!
//! In track coordinates a node at along-track position `a` and offset `b` is at
//! squared distance (s-a)² + b² from the mobile at arc length `s`. Minimizing
//! over nodes is a lower envelope of lines in `s`, so the serving sequence and
//! every handoff point are computed exactly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, positive, Result};
use crate::geometry::{query_padding, Point, Window};

/// Straight constant-velocity path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Point,
    /// Unit heading.
    pub direction: Point,
    pub velocity: f64,
    pub duration: f64,
}

impl Trajectory {
    pub fn new(start: Point, direction: Point, velocity: f64, duration: f64) -> Result<Self> {
        positive("velocity", velocity)?;
        positive("duration", duration)?;
        let n = direction.norm2().sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(invalid("direction", "must be a nonzero finite vector"));
        }
        Ok(Self {
            start,
            direction: direction.scale(1.0 / n),
            velocity,
            duration,
        })
    }

    /// Path along the x axis from the origin.
    pub fn along_x(velocity: f64, duration: f64) -> Result<Self> {
        Self::new(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            velocity,
            duration,
        )
    }

    pub fn length(&self) -> f64 {
        self.velocity * self.duration
    }

    pub fn position(&self, t: f64) -> Point {
        self.start.add(self.direction.scale(self.velocity * t))
    }

    pub fn end(&self) -> Point {
        self.position(self.duration)
    }

    /// (along-track, signed perpendicular) coordinates of `p`.
    pub fn to_track(&self, p: Point) -> (f64, f64) {
        let rel = p.sub(self.start);
        (rel.dot(self.direction), self.direction.cross(rel))
    }

    /// Window padded by `pad` around the path.
    pub fn window(&self, pad: f64) -> Result<Window> {
        Window::around_segment(self.start, self.end(), pad)
    }

    /// Window with the standard padding for coverage radius `radius`.
    pub fn padded_window(&self, radius: f64, node_intensity: f64) -> Result<Window> {
        self.window(query_padding(radius, node_intensity))
    }
}

/// Stretch of arc length [s0, s1] served by `node`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServingSegment {
    pub node: usize,
    pub s0: f64,
    pub s1: f64,
}

/// Nodes in track coordinates with the exact serving envelope.
#[derive(Debug, Clone)]
pub struct Track {
    pub trajectory: Trajectory,
    /// Along-track coordinate of every node.
    pub along: Vec<f64>,
    /// Squared perpendicular offset of every node.
    pub offset2: Vec<f64>,
    pub segments: Vec<ServingSegment>,
}

/// Arc length where nodes i and j are equidistant.
fn breakpoint(ai: f64, bi2: f64, aj: f64, bj2: f64) -> f64 {
    0.5 * (ai + aj) + (bj2 - bi2) / (2.0 * (aj - ai))
}

impl Track {
    pub fn new(nodes: &[Point], trajectory: Trajectory) -> Self {
        let mut along = Vec::with_capacity(nodes.len());
        let mut offset2 = Vec::with_capacity(nodes.len());
        for &p in nodes {
            let (a, b) = trajectory.to_track(p);
            along.push(a);
            offset2.push(b * b);
        }
        let segments = envelope(&along, &offset2, trajectory.length());
        Self {
            trajectory,
            along,
            offset2,
            segments,
        }
    }

    pub fn velocity(&self) -> f64 {
        self.trajectory.velocity
    }

    pub fn length(&self) -> f64 {
        self.trajectory.length()
    }

    pub fn duration(&self) -> f64 {
        self.trajectory.duration
    }

    /// Squared distance from arc position `s` to `node`.
    pub fn dist2(&self, node: usize, s: f64) -> f64 {
        let d = s - self.along[node];
        d * d + self.offset2[node]
    }

    /// Index of the segment containing arc position `s`.
    pub fn segment_at(&self, s: f64) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let k = self.segments.partition_point(|seg| seg.s1 < s);
        Some(k.min(self.segments.len() - 1))
    }

    /// Serving node and distance at time `t`.
    pub fn serving_at(&self, t: f64) -> Option<(usize, f64)> {
        let s = t * self.velocity();
        self.segment_at(s).map(|k| {
            let n = self.segments[k].node;
            (n, self.dist2(n, s).sqrt())
        })
    }

    /// Times where the serving node changes.
    pub fn handoff_times(&self) -> Vec<f64> {
        self.segments
            .iter()
            .skip(1)
            .map(|seg| seg.s0 / self.velocity())
            .collect()
    }

    /// Handoffs with the serving distance at the switch point.
    pub fn handoffs(&self) -> Vec<Handoff> {
        self.segments
            .windows(2)
            .map(|w| Handoff {
                time: w[1].s0 / self.velocity(),
                from: w[0].node,
                to: w[1].node,
                distance: self.dist2(w[1].node, w[1].s0).sqrt(),
            })
            .collect()
    }

    /// Times at which the serving distance has an interior minimum.
    pub fn interior_maxima(&self) -> Vec<f64> {
        self.segments
            .iter()
            .filter(|seg| seg.s0 < self.along[seg.node] && self.along[seg.node] < seg.s1)
            .map(|seg| self.along[seg.node] / self.velocity())
            .collect()
    }

    /// Time intervals on which the serving distance is at most `radius_of(node)`.
    pub fn level_set(&self, radius_of: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
        let v = self.velocity();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for seg in &self.segments {
            let r = radius_of(seg.node);
            let h2 = r * r - self.offset2[seg.node];
            if !(h2 > 0.0) {
                continue;
            }
            let h = h2.sqrt();
            let a = self.along[seg.node];
            let lo = (a - h).max(seg.s0);
            let hi = (a + h).min(seg.s1);
            if hi > lo {
                push_merged(&mut out, lo / v, hi / v);
            }
        }
        out
    }
}

/// A serving-node change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Handoff {
    pub time: f64,
    pub from: usize,
    pub to: usize,
    /// Distance from the switch point to either node.
    pub distance: f64,
}

/// Appends [lo, hi] to a sorted interval list, merging touching intervals.
pub(crate) fn push_merged(out: &mut Vec<(f64, f64)>, lo: f64, hi: f64) {
    const EPS: f64 = 1e-12;
    if let Some(last) = out.last_mut() {
        if lo <= last.1 + EPS {
            last.1 = last.1.max(hi);
            return;
        }
    }
    out.push((lo, hi));
}

/// Lower envelope over [0, len] of the distance functions; ties at equal
/// distance go to the lowest node index.
fn envelope(along: &[f64], offset2: &[f64], len: f64) -> Vec<ServingSegment> {
    if along.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..along.len()).collect();
    order.sort_by(|&i, &j| {
        along[i]
            .total_cmp(&along[j])
            .then(offset2[i].total_cmp(&offset2[j]))
            .then(i.cmp(&j))
    });
    order.dedup_by(|j, i| along[*i] == along[*j]);
    // hull[k] is optimal on [start[k], start[k+1]].
    let mut hull: Vec<usize> = Vec::with_capacity(order.len());
    let mut start: Vec<f64> = Vec::with_capacity(order.len());
    for &j in &order {
        loop {
            let Some(&top) = hull.last() else {
                hull.push(j);
                start.push(f64::NEG_INFINITY);
                break;
            };
            let x = breakpoint(along[top], offset2[top], along[j], offset2[j]);
            let st = *start.last().unwrap();
            if x <= st {
                hull.pop();
                start.pop();
                continue;
            }
            hull.push(j);
            start.push(x);
            break;
        }
    }
    let mut segs = Vec::new();
    for k in 0..hull.len() {
        let s0 = start[k].max(0.0);
        let s1 = if k + 1 < hull.len() {
            start[k + 1].min(len)
        } else {
            len
        };
        if s1 > s0 {
            segs.push(ServingSegment {
                node: hull[k],
                s0,
                s1,
            });
        }
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{brute_force_nearest, FieldSample};

    #[test]
    fn single_node() {
        let traj = Trajectory::along_x(10.0, 10.0).unwrap();
        let t = Track::new(&[Point::new(40.0, 5.0)], traj);
        assert_eq!(t.segments.len(), 1);
        assert!(t.handoff_times().is_empty());
        assert_eq!(t.interior_maxima(), vec![4.0]);
        let (n, d) = t.serving_at(4.0).unwrap();
        assert_eq!((n, d), (0, 5.0));
    }

    #[test]
    fn two_nodes_switch_at_bisector() {
        let traj = Trajectory::along_x(1.0, 100.0).unwrap();
        let t = Track::new(&[Point::new(20.0, 3.0), Point::new(60.0, -7.0)], traj);
        let h = t.handoff_times();
        assert_eq!(h.len(), 1);
        let s = h[0];
        let d0 = (s - 20.0f64).hypot(3.0);
        let d1 = (s - 60.0f64).hypot(7.0);
        assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn envelope_matches_brute_force() {
        for seed in 0..10 {
            let traj = Trajectory::new(Point::new(100.0, 200.0), Point::new(1.0, 0.3), 16.0, 200.0)
                .unwrap();
            let w = traj.window(800.0).unwrap();
            let f = FieldSample::sample(1.0 / (std::f64::consts::PI * 4e4), 0.0, w, seed).unwrap();
            let track = Track::new(&f.nodes, traj);
            for k in 0..4000 {
                let t = k as f64 * 0.05;
                let (n, d) = track.serving_at(t).unwrap();
                let (bn, bd) = brute_force_nearest(&f.nodes, traj.position(t)).unwrap();
                assert!((d - bd).abs() < 1e-6 * bd.max(1.0), "seed {seed} t {t}");
                if n != bn {
                    // Only acceptable right at a handoff.
                    let near = track.handoff_times().iter().any(|&h| (h - t).abs() < 1e-9);
                    assert!(near, "seed {seed} t {t}: {n} vs {bn}");
                }
            }
        }
    }

    #[test]
    fn level_set_merges() {
        let traj = Trajectory::along_x(1.0, 100.0).unwrap();
        let t = Track::new(
            &[
                Point::new(20.0, 0.0),
                Point::new(30.0, 0.0),
                Point::new(80.0, 0.0),
            ],
            traj,
        );
        let ls = t.level_set(|_| 6.0);
        assert_eq!(ls, vec![(14.0, 36.0), (74.0, 86.0)]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let traj = Trajectory::along_x(1.0, 10.0).unwrap();
        let t = Track::new(&[Point::new(5.0, 2.0), Point::new(5.0, -2.0)], traj);
        assert_eq!(t.segments.len(), 1);
        assert_eq!(t.segments[0].node, 0);
    }
}
