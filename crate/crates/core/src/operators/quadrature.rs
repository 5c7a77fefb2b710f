//! Quadrature over net cells and over reflected kernel balls.
//!
//! 1-D parts are integrated with Gauss-Legendre rules on pieces split at
//! every cell boundary and kernel kink, so cell-wise constant integrands
//! times the quadratic kernel profile are integrated exactly. 2-D cells
//! are integrated with the jittered strata that produced the net weights;
//! 2-D balls use a product rule over each disk.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{unit_ball_volume, Edge, Locus, PointRef, Shape, SpaceModel};
use crate::sampling::{Net, Strata};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Clone, Debug)]
struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new(m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        Rule { x, w }
    }

    /// `sum w f(node)` mapped to `[a, b]`.
    fn apply(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        half * self
            .x
            .iter()
            .zip(&self.w)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Quadrature settings shared by all continuous integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    /// Gauss-Legendre nodes per 1-D piece.
    pub order: usize,
    /// Nodes per direction on each 2-D disk piece.
    pub planar_order: usize,
    /// 2-D outer probe budget; `None` replays the net's weight probes so
    /// per-cell sums equal the weights.
    pub probes: Option<usize>,
    pub exec: Exec,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            order: 4,
            planar_order: 12,
            probes: None,
            exec: Exec::default(),
        }
    }
}

/// Kernel radial profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Profile {
    /// `r^-n phi(t)` with `phi(t) = (n+2)/(2 nu_n) (1 - t^2)`.
    Phi,
    /// Indicator of the ball.
    Flat,
}

impl Profile {
    fn value(self, dim: usize, r: f64, d: f64) -> f64 {
        if d >= r {
            return 0.0;
        }
        match self {
            Profile::Flat => 1.0,
            Profile::Phi => {
                let t = d / r;
                let n = dim as f64;
                (n + 2.0) / (2.0 * unit_ball_volume(dim)) * (1.0 - t * t) / r.powi(dim as i32)
            }
        }
    }
}

/// Cell boundaries of the 1-D parts, sorted, for splitting integrals.
#[derive(Clone, Debug)]
pub struct CellLayout {
    /// Per part: `(a, b, cell)` intervals covering the chart in order.
    cells: Vec<Vec<(f64, f64, usize)>>,
    /// Per part: interior cell boundaries.
    breaks: Vec<Vec<f64>>,
}

impl CellLayout {
    pub fn new(space: &SpaceModel, net: &Net) -> Self {
        let mut cells = Vec::with_capacity(space.parts.len());
        let mut breaks = Vec::with_capacity(space.parts.len());
        for part in &space.parts {
            let (c, b) = match part.shape {
                Shape::Segment { length } | Shape::Circle { length } => {
                    cells_1d(&part.shape, length, net, part.id)
                }
                _ => (Vec::new(), Vec::new()),
            };
            cells.push(c);
            breaks.push(b);
        }
        CellLayout { cells, breaks }
    }

    fn breaks_in(&self, part: usize, a: f64, b: f64) -> &[f64] {
        let br = &self.breaks[part];
        let lo = br.partition_point(|&x| x <= a);
        let hi = br.partition_point(|&x| x < b);
        &br[lo..hi.max(lo)]
    }
}

fn cells_1d(shape: &Shape, length: f64, net: &Net, part: usize) -> (Vec<(f64, f64, usize)>, Vec<f64>) {
    let mut idx = net.part_indices(part);
    let x = |i: usize| net.points[i].coords[0];
    idx.sort_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
    idx.dedup_by(|a, b| x(*a) == x(*b));
    let n = idx.len();
    let periodic = shape.is_periodic();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let xi = x(idx[k]);
        let left = if k > 0 {
            0.5 * (x(idx[k - 1]) + xi)
        } else if periodic {
            0.5 * (x(idx[n - 1]) - length + xi)
        } else {
            0.0
        };
        let right = if k + 1 < n {
            0.5 * (xi + x(idx[k + 1]))
        } else if periodic {
            0.5 * (xi + x(idx[0]) + length)
        } else {
            length
        };
        if n == 1 && periodic {
            out.push((0.0, length, idx[0]));
        } else if left < 0.0 {
            out.push((left + length, length, idx[k]));
            out.push((0.0, right, idx[k]));
        } else if right > length {
            out.push((left, length, idx[k]));
            out.push((0.0, right - length, idx[k]));
        } else {
            out.push((left, right, idx[k]));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let breaks = out.iter().skip(1).map(|c| c.0).collect();
    (out, breaks)
}

/// Outer quadrature: probes with weights, grouped by the cell they lie in.
#[derive(Clone, Debug)]
pub struct CellProbes {
    pub points: Vec<PointRef>,
    pub weights: Vec<f64>,
    pub cell: Vec<usize>,
}

impl CellProbes {
    /// Probes for every cell. 1-D pieces are additionally split at the
    /// given distances from the gluing loci so a collar indicator is
    /// constant on each piece.
    pub fn build(space: &SpaceModel, net: &Net, layout: &CellLayout, quad: &Quadrature, collar: &[f64]) -> Result<Self> {
        let rule = Rule::new(quad.order);
        let mut out = CellProbes {
            points: Vec::new(),
            weights: Vec::new(),
            cell: Vec::new(),
        };
        let total = space.total_volume();
        for part in &space.parts {
            match part.shape {
                Shape::Segment { length } | Shape::Circle { length } => {
                    let mut cuts: Vec<f64> = Vec::new();
                    for (_, locus) in &part.glued {
                        if let Locus::Point(at) = locus {
                            for d in collar {
                                for p in [at - d, at + d] {
                                    let p = if part.shape.is_periodic() { p.rem_euclid(length) } else { p };
                                    if p > 0.0 && p < length {
                                        cuts.push(p);
                                    }
                                }
                            }
                        }
                    }
                    cuts.sort_by(f64::total_cmp);
                    for &(a, b, i) in &layout.cells[part.id] {
                        let mut edges = vec![a];
                        edges.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
                        edges.push(b);
                        for w in edges.windows(2) {
                            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                            for (x, wt) in rule.x.iter().zip(&rule.w) {
                                out.points.push(PointRef::on(part.id, mid + half * x));
                                out.weights.push(half * wt);
                                out.cell.push(i);
                            }
                        }
                    }
                }
                shape => {
                    let (probes, seed) = match quad.probes {
                        Some(p) => (p, net.weight_seed),
                        None => (net.weight_probes, net.weight_seed),
                    };
                    let share = shape.volume() / total;
                    let budget = ((probes as f64) * share).ceil().max(1.0) as usize;
                    let strata = Strata::new(&shape, budget);
                    let area = strata.area();
                    let rows = quad.exec.map_range(strata.n[1], |j| {
                        strata
                            .row(seed, part.id, j)
                            .into_iter()
                            .map(|c| {
                                let p = PointRef { part: part.id, coords: c };
                                net.locate(&p).map(|i| (p, i))
                            })
                            .collect::<Vec<_>>()
                    });
                    for row in rows {
                        for item in row {
                            let (p, i) = item.ok_or_else(|| {
                                Error::usage(format!("a probe in part {} lies in no cell", part.id))
                            })?;
                            out.points.push(p);
                            out.weights.push(area);
                            out.cell.push(i);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature mass of each cell.
    pub fn cell_mass(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (w, &c) in self.weights.iter().zip(&self.cell) {
            m[c] += w;
        }
        m
    }
}

/// `int k(c, y) g(y) dy` over the reflected ball of radius `r` around `c`
/// inside `c`'s part: the plain ball weighted by `profile(d)` plus the
/// reflected ball weighted by `profile(d~)`.
pub(crate) fn ball_integral(
    space: &SpaceModel,
    layout: &CellLayout,
    quad: &Quadrature,
    centre: &PointRef,
    r: f64,
    profile: Profile,
    g: &dyn Fn(&PointRef) -> f64,
) -> f64 {
    let part = &space.parts[centre.part];
    match part.shape {
        Shape::Segment { length } | Shape::Circle { length } => {
            ball_1d(space, layout, quad, centre, length, r, profile, g)
        }
        Shape::Rectangle { width, height } | Shape::Torus { width, height } => {
            ball_2d(space, quad, centre, width, height, r, profile, g)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn ball_1d(
    space: &SpaceModel,
    layout: &CellLayout,
    quad: &Quadrature,
    centre: &PointRef,
    length: f64,
    r: f64,
    profile: Profile,
    g: &dyn Fn(&PointRef) -> f64,
) -> f64 {
    let part = centre.part;
    let shape = space.parts[part].shape;
    let mask = space.reflecting_boundary(part);
    let c = centre.coords[0];
    let rule = Rule::new(quad.order);
    let mut pieces: Vec<(f64, f64, Option<u8>)> = Vec::new();
    if shape.is_periodic() {
        if 2.0 * r >= length {
            pieces.push((0.0, length, None));
        } else {
            let (a, b) = (c - r, c + r);
            if a < 0.0 {
                pieces.push((a + length, length, None));
                pieces.push((0.0, b, None));
            } else if b > length {
                pieces.push((a, length, None));
                pieces.push((0.0, b - length, None));
            } else {
                pieces.push((a, b, None));
            }
        }
    } else {
        pieces.push(((c - r).max(0.0), (c + r).min(length), None));
        if mask.contains(0) && c < r {
            pieces.push((0.0, (r - c).min(length), Some(0)));
        }
        if mask.contains(1) && length - c < r {
            pieces.push(((length - (r - (length - c))).max(0.0), length, Some(1)));
        }
    }
    let both = mask.contains(0) && mask.contains(1);
    let mut total = 0.0;
    for (a, b, end) in pieces {
        if b <= a {
            continue;
        }
        let mut edges = vec![a];
        edges.extend_from_slice(layout.breaks_in(part, a, b));
        if both && end.is_some() && a < 0.5 * length && 0.5 * length < b {
            let pos = edges.partition_point(|&x| x < 0.5 * length);
            edges.insert(pos, 0.5 * length);
        }
        edges.push(b);
        for w in edges.windows(2) {
            total += rule.apply(w[0], w[1], |y| {
                let q = PointRef::on(part, y);
                let weight = match end {
                    None => profile.value(1, r, shape.distance(&[c, 0.0], &[y, 0.0])),
                    Some(e) => {
                        let via0 = c + y;
                        let via1 = 2.0 * length - c - y;
                        let mine = if e == 0 { via0 } else { via1 };
                        let other_wins = if e == 0 {
                            both && via1 < via0
                        } else {
                            mask.contains(0) && via0 <= via1
                        };
                        if other_wins {
                            0.0
                        } else {
                            profile.value(1, r, mine)
                        }
                    }
                };
                if weight == 0.0 {
                    0.0
                } else {
                    weight * g(&q)
                }
            });
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn ball_2d(
    space: &SpaceModel,
    quad: &Quadrature,
    centre: &PointRef,
    w: f64,
    h: f64,
    r: f64,
    profile: Profile,
    g: &dyn Fn(&PointRef) -> f64,
) -> f64 {
    let part = centre.part;
    let shape = space.parts[part].shape;
    let periodic = shape.is_periodic();
    let mask = space.reflecting_boundary(part);
    let c = centre.coords;
    let rule = Rule::new(quad.planar_order);
    let mut discs: Vec<([f64; 2], Option<Edge>)> = vec![(c, None)];
    for e in Edge::ALL {
        if mask.contains(e.bit()) {
            let (depth, t) = e.frame(w, h, &c);
            if depth < r {
                discs.push((e.unframe(w, h, -depth, t), Some(e)));
            }
        }
    }
    let mirrors: Vec<[f64; 2]> = discs.iter().skip(1).map(|d| d.0).collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for (k, &(z, edge)) in discs.iter().enumerate() {
        let mut cuts = vec![-half_pi, half_pi];
        if !periodic {
            for xe in [0.0, w] {
                let s = (xe - z[0]) / r;
                if s.abs() < 1.0 {
                    cuts.push(s.asin());
                }
            }
            for ye in [0.0, h] {
                let dy = ye - z[1];
                if dy.abs() < r {
                    let s = (r * r - dy * dy).sqrt() / r;
                    cuts.push(s.asin());
                    cuts.push(-s.asin());
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for seg in cuts.windows(2) {
            let tmid = 0.5 * (seg[0] + seg[1]);
            let xmid = z[0] + r * tmid.sin();
            if !periodic && !(0.0..=w).contains(&xmid) {
                continue;
            }
            total += rule.apply(seg[0], seg[1], |t| {
                let x = z[0] + r * t.sin();
                let half = r * t.cos();
                let (mut y0, mut y1) = (z[1] - half, z[1] + half);
                if !periodic {
                    y0 = y0.max(0.0);
                    y1 = y1.min(h);
                }
                if y1 <= y0 {
                    return 0.0;
                }
                // dx = r cos t dt = half dt
                half * rule.apply(y0, y1, |y| {
                            let raw = [x, y];
                            let d = (x - z[0]).hypot(y - z[1]);
                            let weight = match edge {
                                None => profile.value(2, r, d),
                                Some(_) => {
                                    // the nearest mirror centre owns the point
                                    let owner = mirrors
                                        .iter()
                                        .enumerate()
                                        .map(|(i, m)| ((raw[0] - m[0]).hypot(raw[1] - m[1]), i))
                                        .fold((f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 { b } else { a })
                                        .1;
                                    if owner + 1 != k {
                                        0.0
                                    } else {
                                        profile.value(2, r, shape.reflected_distance(&c, &raw, mask))
                                    }
                                }
                            };
                            if weight == 0.0 {
                                return 0.0;
                            }
                            let coords = if periodic {
                                [x.rem_euclid(w), y.rem_euclid(h)]
                            } else {
                                raw
                            };
                            weight * g(&PointRef { part, coords })
                        })
            });
        }
    }
    total
}
