//! Spatial randomness: Poisson node and user fields, a Poisson line process
//! carrying users, and exact nearest-node and Johnson–Mehl queries.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Largest Poisson mean the samplers accept.
pub const MAX_EXPECTED_POINTS: f64 = 5.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, o: Point) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, o: Point) -> f64 {
        self.dist2(o).sqrt()
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let w = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        if [x_min, y_min, x_max, y_max].iter().any(|v| !v.is_finite())
            || x_max <= x_min
            || y_max <= y_min
        {
            return Err(invalid("window", format!("degenerate window {w:?}")));
        }
        Ok(w)
    }

    /// Square of half-side `half` centered at `c`.
    pub fn centered(c: Point, half: f64) -> Result<Self> {
        Self::new(c.x - half, c.y - half, c.x + half, c.y + half)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn padded(&self, pad: f64) -> Window {
        Window {
            x_min: self.x_min - pad,
            y_min: self.y_min - pad,
            x_max: self.x_max + pad,
            y_max: self.y_max + pad,
        }
    }

    /// Bounding box of a segment, padded.
    pub fn around_segment(a: Point, b: Point, pad: f64) -> Result<Window> {
        Window::new(
            a.x.min(b.x) - pad,
            a.y.min(b.y) - pad,
            a.x.max(b.x) + pad,
            a.y.max(b.y) + pad,
        )
    }
}

/// Padding that makes boundary effects negligible for a query at coverage
/// radius `radius`: max(5 r, 3/√λ).
pub fn query_padding(radius: f64, node_intensity: f64) -> f64 {
    (5.0 * radius).max(3.0 / node_intensity.sqrt())
}

pub(crate) fn poisson_count(mean: f64, rng: &mut Rng) -> Result<usize> {
    non_negative("expected point count", mean)?;
    if mean > MAX_EXPECTED_POINTS {
        return Err(invalid(
            "intensity",
            format!("expected point count {mean:.3e} exceeds the limit {MAX_EXPECTED_POINTS:.1e}"),
        ));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| invalid("intensity", e.to_string()))?;
    Ok(d.sample(rng) as usize)
}

/// Homogeneous Poisson points of the given intensity in `window`.
pub fn sample_poisson_points(intensity: f64, window: &Window, rng: &mut Rng) -> Result<Vec<Point>> {
    non_negative("intensity", intensity)?;
    let n = poisson_count(intensity * window.area(), rng)?;
    Ok((0..n)
        .map(|_| {
            Point::new(
                window.x_min + rng.random::<f64>() * window.width(),
                window.y_min + rng.random::<f64>() * window.height(),
            )
        })
        .collect())
}

/// Seeded variant of [`sample_poisson_points`].
pub fn sample_poisson_field(intensity: f64, window: &Window, seed: u64) -> Result<Vec<Point>> {
    sample_poisson_points(intensity, window, &mut rng_from_seed(seed))
}

/// Uniform grid bucketing for nearest-neighbor and range queries.
#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    /// Builds an index over `points` with cells of side about `cell`.
    pub fn build(points: &[Point], window: &Window, cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 {
            cell
        } else {
            window.width().max(window.height())
        };
        let nx = ((window.width() / cell).ceil() as usize).clamp(1, 4096);
        let ny = ((window.height() / cell).ceil() as usize).clamp(1, 4096);
        let cell = (window.width() / nx as f64).max(window.height() / ny as f64);
        let mut idx = Self {
            origin: Point::new(window.x_min, window.y_min),
            cell,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            items: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| idx.cell_of(p)).collect();
        for &c in &cells {
            idx.starts[c + 1] += 1;
        }
        for c in 0..nx * ny {
            idx.starts[c + 1] += idx.starts[c];
        }
        let mut fill = idx.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            idx.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        idx
    }

    fn coords(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    fn cell_of(&self, p: Point) -> usize {
        let (cx, cy) = self.coords(p);
        let cx = cx.clamp(0, self.nx as i64 - 1) as usize;
        let cy = cy.clamp(0, self.ny as i64 - 1) as usize;
        cy * self.nx + cx
    }

    fn bucket(&self, cx: i64, cy: i64) -> &[u32] {
        if cx < 0 || cy < 0 || cx >= self.nx as i64 || cy >= self.ny as i64 {
            return &[];
        }
        let c = cy as usize * self.nx + cx as usize;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Nearest point by expanding rings; ties go to the lowest index.
    pub fn nearest(&self, points: &[Point], q: Point) -> Option<(usize, f64)> {
        if points.is_empty() {
            return None;
        }
        let (cx, cy) = self.coords(q);
        let mut best: Option<(f64, u32)> = None;
        let max_ring = {
            let fx = (cx.max(self.nx as i64 - 1 - cx)).max(cx.abs());
            let fy = (cy.max(self.ny as i64 - 1 - cy)).max(cy.abs());
            fx.max(fy) + 1
        };
        let consider = |i: u32, best: &mut Option<(f64, u32)>| {
            let d2 = q.dist2(points[i as usize]);
            match *best {
                Some((bd, bi)) if d2 > bd || (d2 == bd && i >= bi) => {}
                _ => *best = Some((d2, i)),
            }
        };
        for k in 0..=max_ring {
            if k == 0 {
                for &i in self.bucket(cx, cy) {
                    consider(i, &mut best);
                }
            } else {
                for dx in -k..=k {
                    for &i in self.bucket(cx + dx, cy - k) {
                        consider(i, &mut best);
                    }
                    for &i in self.bucket(cx + dx, cy + k) {
                        consider(i, &mut best);
                    }
                }
                for dy in (-k + 1)..k {
                    for &i in self.bucket(cx - k, cy + dy) {
                        consider(i, &mut best);
                    }
                    for &i in self.bucket(cx + k, cy + dy) {
                        consider(i, &mut best);
                    }
                }
            }
            if let Some((bd, _)) = best {
                let reach = k as f64 * self.cell;
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(d2, i)| (i as usize, d2.sqrt()))
    }

    /// Indices of points within `radius` of `c` (inclusive), in index order.
    pub fn within(&self, points: &[Point], c: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(points, c, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Calls `f(index, squared distance)` for every point within `radius` of `c`.
    pub fn for_each_within(
        &self,
        points: &[Point],
        c: Point,
        radius: f64,
        mut f: impl FnMut(usize, f64),
    ) {
        let r2 = radius * radius;
        let (x0, y0) = self.coords(Point::new(c.x - radius, c.y - radius));
        let (x1, y1) = self.coords(Point::new(c.x + radius, c.y + radius));
        let (x0, y0) = (x0.max(0), y0.max(0));
        let (x1, y1) = (x1.min(self.nx as i64 - 1), y1.min(self.ny as i64 - 1));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &i in self.bucket(cx, cy) {
                    let d2 = c.dist2(points[i as usize]);
                    if d2 <= r2 {
                        f(i as usize, d2);
                    }
                }
            }
        }
    }
}

/// Exhaustive nearest point; ties go to the lowest index.
pub fn brute_force_nearest(points: &[Point], q: Point) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, &p) in points.iter().enumerate() {
        let d2 = q.dist2(p);
        if best.is_none_or(|(bd, _)| d2 < bd) {
            best = Some((d2, i));
        }
    }
    best.map(|(d2, i)| (i, d2.sqrt()))
}

/// One realization of the node and static-user patterns.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub nodes: Vec<Point>,
    pub users: Vec<Point>,
    pub window: Window,
    pub seed: u64,
    node_index: GridIndex,
    user_index: GridIndex,
}

impl FieldSample {
    /// Samples nodes at intensity `lambda` and users at intensity `xi`.
    pub fn sample(lambda: f64, xi: f64, window: Window, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let nodes = sample_poisson_points(lambda, &window, &mut rng)?;
        let users = sample_poisson_points(xi, &window, &mut rng)?;
        Ok(Self::from_points(nodes, users, window, seed))
    }

    pub fn from_points(nodes: Vec<Point>, users: Vec<Point>, window: Window, seed: u64) -> Self {
        let node_cell = (window.area() / (nodes.len().max(1) as f64)).sqrt();
        let user_cell = (window.area() / (users.len().max(1) as f64)).sqrt() * 2.0;
        let node_index = GridIndex::build(&nodes, &window, node_cell);
        let user_index = GridIndex::build(&users, &window, user_cell);
        Self {
            nodes,
            users,
            window,
            seed,
            node_index,
            user_index,
        }
    }

    /// Index and distance of the node closest to `q`.
    pub fn nearest_node(&self, q: Point) -> Option<(usize, f64)> {
        self.node_index.nearest(&self.nodes, q)
    }

    pub fn nodes_within(&self, c: Point, radius: f64) -> Vec<usize> {
        self.node_index.within(&self.nodes, c, radius)
    }

    /// Calls `f(node, squared distance)` for every node within `radius` of `c`.
    pub fn nodes_within_for_each(&self, c: Point, radius: f64, f: impl FnMut(usize, f64)) {
        self.node_index.for_each_within(&self.nodes, c, radius, f);
    }

    pub fn users_within(&self, c: Point, radius: f64) -> Vec<usize> {
        self.user_index.within(&self.users, c, radius)
    }

    /// True iff `q` is in the Voronoi cell of node `i` and within `radius` of it.
    pub fn in_johnson_mehl(&self, q: Point, i: usize, radius: f64) -> bool {
        if q.dist2(self.nodes[i]) > radius * radius {
            return false;
        }
        matches!(self.nearest_node(q), Some((j, _)) if j == i)
    }

    /// Users inside the Johnson–Mehl cell of node `i`.
    pub fn jm_user_count(&self, i: usize, radius: f64) -> u32 {
        let mut n = 0;
        self.user_index
            .for_each_within(&self.users, self.nodes[i], radius, |u, _| {
                if matches!(self.nearest_node(self.users[u]), Some((j, _)) if j == i) {
                    n += 1;
                }
            });
        n
    }

    /// Users within `radius` of node `i`, regardless of association.
    pub fn disc_user_count(&self, i: usize, radius: f64) -> u32 {
        let mut n = 0;
        self.user_index
            .for_each_within(&self.users, self.nodes[i], radius, |_, _| n += 1);
        n
    }

    /// Exact area of the Johnson–Mehl cell of node `i`.
    pub fn jm_cell_area(&self, i: usize, radius: f64) -> f64 {
        let c = self.nodes[i];
        let mut poly = vec![
            Point::new(-radius, -radius),
            Point::new(radius, -radius),
            Point::new(radius, radius),
            Point::new(-radius, radius),
        ];
        for j in self.nodes_within(c, 2.0 * radius) {
            if j == i {
                continue;
            }
            let d = self.nodes[j].sub(c);
            // Keep points p (relative to c) with p·d <= |d|²/2.
            poly = clip_half_plane(&poly, d, 0.5 * d.norm2());
            if poly.is_empty() {
                return 0.0;
            }
        }
        polygon_disc_area(&poly, radius)
    }

    /// Length of the line through `q` with unit direction `dir` inside the
    /// Johnson–Mehl cell of node `i`.
    pub fn jm_chord_length(&self, q: Point, dir: Point, i: usize, radius: f64) -> f64 {
        let c = self.nodes[i];
        let rel = q.sub(c);
        // Disc: |rel + t dir|² <= r².
        let b = rel.dot(dir);
        let disc = b * b - (rel.norm2() - radius * radius);
        if disc <= 0.0 {
            return 0.0;
        }
        let h = disc.sqrt();
        let (mut lo, mut hi) = (-b - h, -b + h);
        for j in self.nodes_within(c, 2.0 * radius) {
            if j == i {
                continue;
            }
            let d = self.nodes[j].sub(c);
            // (rel + t dir)·d <= |d|²/2.
            let slope = dir.dot(d);
            let rhs = 0.5 * d.norm2() - rel.dot(d);
            if slope > 0.0 {
                hi = hi.min(rhs / slope);
            } else if slope < 0.0 {
                lo = lo.max(rhs / slope);
            } else if rhs < 0.0 {
                return 0.0;
            }
            if hi <= lo {
                return 0.0;
            }
        }
        hi - lo
    }

    /// Writes the field as CSV with a commented header carrying seed and window.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# poisson-mobility field v1")?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(
            out,
            "# window={},{},{},{}",
            self.window.x_min, self.window.y_min, self.window.x_max, self.window.y_max
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "x", "y"])?;
        for p in &self.nodes {
            w.write_record(["node", &p.x.to_string(), &p.y.to_string()])?;
        }
        for p in &self.users {
            w.write_record(["user", &p.x.to_string(), &p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut seed = None;
        let mut window = None;
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(s) = meta.strip_prefix("seed=") {
                    seed = Some(
                        s.parse::<u64>()
                            .map_err(|e| Error::Config(format!("bad seed: {e}")))?,
                    );
                } else if let Some(s) = meta.strip_prefix("window=") {
                    let v: Vec<f64> = s
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Config(format!("bad window: {e}")))?;
                    if v.len() != 4 {
                        return Err(Error::Config("window needs 4 values".into()));
                    }
                    window = Some(Window::new(v[0], v[1], v[2], v[3])?);
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let window = window.ok_or_else(|| Error::Config("missing window header".into()))?;
        let seed = seed.ok_or_else(|| Error::Config("missing seed header".into()))?;
        let mut nodes = Vec::new();
        let mut users = Vec::new();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        for rec in r.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Config("short row".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad coordinate: {e}")))
            };
            let p = Point::new(parse(1)?, parse(2)?);
            match rec.get(0) {
                Some("node") => nodes.push(p),
                Some("user") => users.push(p),
                other => return Err(Error::Config(format!("unknown point kind {other:?}"))),
            }
        }
        Ok(Self::from_points(nodes, users, window, seed))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Sutherland–Hodgman clip of a convex polygon to {p: p·n <= c}.
pub fn clip_half_plane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let fa = a.dot(n) - c;
        let fb = b.dot(n) - c;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push(a.add(b.sub(a).scale(t)));
        }
    }
    out
}

/// Signed area of the intersection of the disc of radius `r` at the origin
/// with the triangle (0, a, b).
fn triangle_disc_area(a: Point, b: Point, r: f64) -> f64 {
    let r2 = r * r;
    let d = b.sub(a);
    // |a + t d|² = r²
    let qa = d.norm2();
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(d);
    let qc = a.norm2() - r2;
    let mut cuts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.push(1.0);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let p = a.add(d.scale(w[0]));
        let q = a.add(d.scale(w[1]));
        let mid = a.add(d.scale(0.5 * (w[0] + w[1])));
        let lim = r2 * (1.0 + 1e-12);
        if mid.norm2() <= r2 && p.norm2() <= lim && q.norm2() <= lim {
            area += 0.5 * p.cross(q);
        } else {
            area += 0.5 * r2 * p.cross(q).atan2(p.dot(q));
        }
    }
    area
}

/// Area of a simple polygon (vertices relative to the disc center) intersected
/// with the disc of radius `r`.
pub fn polygon_disc_area(poly: &[Point], r: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..poly.len() {
        s += triangle_disc_area(poly[k], poly[(k + 1) % poly.len()], r);
    }
    s.abs()
}

/// Roads of a Poisson line process, each carrying a 1-D Poisson user pattern.
#[derive(Debug, Clone)]
pub struct LineField {
    /// (θ, r): the line {x : x·(cos θ, sin θ) = r}.
    pub lines: Vec<(f64, f64)>,
    /// User coordinates along each line, measured from the foot point r·(cos θ, sin θ)
    /// in direction (−sin θ, cos θ).
    pub offsets: Vec<Vec<f64>>,
    pub line_intensity: f64,
    pub user_intensity: f64,
    pub window: Window,
}

impl LineField {
    /// Samples lines hitting the disc circumscribing `window`, and users on
    /// them, keeping only users inside `window`.
    pub fn sample(
        line_intensity: f64,
        user_intensity: f64,
        window: Window,
        rng: &mut Rng,
    ) -> Result<Self> {
        non_negative("line_intensity", line_intensity)?;
        non_negative("line user_intensity", user_intensity)?;
        let c = window.center();
        let big_r = 0.5 * (window.width().hypot(window.height()));
        let n_lines = poisson_count(line_intensity * PI * 2.0 * big_r, rng)?;
        let mut lines = Vec::with_capacity(n_lines);
        let mut offsets = Vec::with_capacity(n_lines);
        for _ in 0..n_lines {
            let theta = rng.random::<f64>() * PI;
            let n = Point::new(theta.cos(), theta.sin());
            let dir = Point::new(-theta.sin(), theta.cos());
            let off = rng.random::<f64>() * 2.0 * big_r - big_r;
            let r = c.dot(n) + off;
            let half = (big_r * big_r - off * off).max(0.0).sqrt();
            let tc = c.dot(dir);
            let k = poisson_count(user_intensity * 2.0 * half, rng)?;
            let foot = n.scale(r);
            let mut us = Vec::with_capacity(k);
            for _ in 0..k {
                let t = tc - half + rng.random::<f64>() * 2.0 * half;
                if window.contains(foot.add(dir.scale(t))) {
                    us.push(t);
                }
            }
            us.sort_by(f64::total_cmp);
            lines.push((theta, r));
            offsets.push(us);
        }
        Ok(Self {
            lines,
            offsets,
            line_intensity,
            user_intensity,
            window,
        })
    }

    pub fn sample_seeded(
        line_intensity: f64,
        user_intensity: f64,
        window: Window,
        seed: u64,
    ) -> Result<Self> {
        Self::sample(
            line_intensity,
            user_intensity,
            window,
            &mut rng_from_seed(seed),
        )
    }

    /// Planar intensity of the users, πλ_rλ_t.
    pub fn planar_intensity(&self) -> f64 {
        PI * self.line_intensity * self.user_intensity
    }

    pub fn user_points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for (&(theta, r), us) in self.lines.iter().zip(&self.offsets) {
            let foot = Point::new(r * theta.cos(), r * theta.sin());
            let dir = Point::new(-theta.sin(), theta.cos());
            out.extend(us.iter().map(|&t| foot.add(dir.scale(t))));
        }
        out
    }
}
