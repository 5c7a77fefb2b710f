//! Epsilon-nets and their partition weights.
//!
//! Cells are nearest-point (within part) Voronoi cells clipped to the
//! covering ball, ties going to the lower index. 1-D cells are exact
//! intervals; 2-D cell volumes come from stratified Monte Carlo.

mod csv;

pub use self::csv::{net_csv_string, parse_net_csv, read_net_csv, write_net_csv};

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{Edge, Locus, PointRef, Shape, SpaceModel, INFINITE};
use crate::spatial::BucketIndex;

/// Default number of Monte Carlo probes for 2-D weights (over all parts).
pub const DEFAULT_MC_PROBES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Cell-centred lattice with spacing at most `target_epsilon`.
    Grid,
    /// Uniform random points, repaired by farthest-point insertion.
    UniformRandom,
    /// Uniform base plus extra points piling up within
    /// `target_epsilon * locus_bias` of the boundary and gluing loci.
    Clustered { locus_bias: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub strategy: Strategy,
    pub seed: u64,
    pub target_epsilon: f64,
    /// Base number of random points; defaults to `vol / eps^n` per part.
    pub count: Option<usize>,
    /// Monte Carlo probe budget for 2-D weights.
    pub mc_probes: usize,
}

impl SamplerConfig {
    pub fn new(strategy: Strategy, seed: u64, target_epsilon: f64) -> Self {
        SamplerConfig {
            strategy,
            seed,
            target_epsilon,
            count: None,
            mc_probes: DEFAULT_MC_PROBES,
        }
    }

    pub fn grid(target_epsilon: f64) -> Self {
        Self::new(Strategy::Grid, 0, target_epsilon)
    }
}

/// An epsilon-net with cell weights.
#[derive(Clone, Debug)]
pub struct Net {
    pub points: Vec<PointRef>,
    pub weights: Vec<f64>,
    /// Certified covering radius.
    pub epsilon: f64,
    /// Standard error of the largest 2-D Monte Carlo cell weight (0 in 1-D).
    pub weight_sigma: f64,
    /// Probe budget and seed of the 2-D weight estimate, so quadrature can
    /// replay the same probes.
    pub weight_probes: usize,
    pub weight_seed: u64,
    locator: Vec<BucketIndex>,
}

impl Net {
    /// Wraps precomputed points and weights after checking them against the
    /// space. `epsilon` must be a covering radius of the points.
    pub fn from_parts(
        space: &SpaceModel,
        points: Vec<PointRef>,
        weights: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::usage(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::usage("net has no points"));
        }
        for p in &points {
            space.check_interior(p)?;
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::usage(format!(
                "weight {i} is not positive: {}",
                weights[i]
            )));
        }
        let locator = build_locator(space, &points, epsilon);
        Ok(Net {
            points,
            weights,
            epsilon,
            weight_sigma: 0.0,
            weight_probes: DEFAULT_MC_PROBES,
            weight_seed: 0,
            locator,
        })
    }

    /// Builds a net from points alone: certifies the covering radius and
    /// assigns weights.
    pub fn from_points(space: &SpaceModel, points: Vec<PointRef>, exec: Exec) -> Result<Self> {
        for p in &points {
            space.check_interior(p)?;
        }
        let eps = certified_radius(space, &points, None)?;
        let (weights, sigma) =
            assign_weights_with(space, &points, eps, DEFAULT_MC_PROBES, 0, exec)?;
        let mut net = Net::from_parts(space, points, weights, eps)?;
        net.weight_sigma = sigma;
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the cell containing `p`: nearest net point of the same
    /// part within `epsilon`, ties to the lower index.
    pub fn locate(&self, p: &PointRef) -> Option<usize> {
        self.locator
            .get(p.part)?
            .nearest_within(&p.coords, self.epsilon)
            .map(|(i, _)| i)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices of the points of one part, in net order.
    pub fn part_indices(&self, part: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.points[i].part == part)
            .collect()
    }
}

fn build_locator(space: &SpaceModel, points: &[PointRef], eps: f64) -> Vec<BucketIndex> {
    space
        .parts
        .iter()
        .map(|part| {
            BucketIndex::new(
                part.shape,
                eps,
                points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.part == part.id)
                    .map(|(i, p)| (i, p.coords)),
            )
        })
        .collect()
}

fn part_scale(shape: &Shape) -> f64 {
    match *shape {
        Shape::Segment { length } | Shape::Circle { length } => length,
        Shape::Rectangle { width, height } | Shape::Torus { width, height } => width.min(height),
    }
}

fn part_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `(0, len)`.
fn open_uniform(rng: &mut ChaCha8Rng, len: f64) -> f64 {
    loop {
        let v = rng.random::<f64>() * len;
        if v > 0.0 && v < len {
            return v;
        }
    }
}

pub fn sample_net(space: &SpaceModel, cfg: &SamplerConfig) -> Result<Net> {
    sample_net_with(space, cfg, Exec::default())
}

pub fn sample_net_with(space: &SpaceModel, cfg: &SamplerConfig, exec: Exec) -> Result<Net> {
    let eps = cfg.target_epsilon;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::usage(format!("target epsilon must be positive, got {eps}")));
    }
    let min_scale = space
        .parts
        .iter()
        .map(|p| part_scale(&p.shape))
        .fold(INFINITE, f64::min);
    if eps >= min_scale / 4.0 {
        return Err(Error::usage(format!(
            "target epsilon {eps} must be below a quarter of the smallest part scale {min_scale}"
        )));
    }
    if let Strategy::Clustered { locus_bias } = cfg.strategy {
        if !(locus_bias >= 1.0 && locus_bias.is_finite()) {
            return Err(Error::usage(format!("locus bias must be >= 1, got {locus_bias}")));
        }
        if eps * locus_bias >= min_scale / 2.0 {
            return Err(Error::usage(format!(
                "clustering collar {} exceeds half the smallest part scale",
                eps * locus_bias
            )));
        }
    }

    let mut points = Vec::new();
    for part in &space.parts {
        let pts = match cfg.strategy {
            Strategy::Grid => grid_part(&part.shape, eps),
            Strategy::UniformRandom | Strategy::Clustered { .. } => {
                let mut rng = part_rng(cfg.seed, part.id as u64);
                let base = cfg
                    .count
                    .map(|c| {
                        let share = part.shape.volume() / space.total_volume();
                        ((c as f64) * share).round().max(1.0) as usize
                    })
                    .unwrap_or_else(|| {
                        (part.shape.volume() / eps.powi(part.shape.dim() as i32)).ceil() as usize
                    });
                let ext = part.shape.extents();
                let mut pts: Vec<[f64; 2]> = (0..base)
                    .map(|_| {
                        if part.shape.dim() == 1 {
                            [open_uniform(&mut rng, ext[0]), 0.0]
                        } else {
                            [open_uniform(&mut rng, ext[0]), open_uniform(&mut rng, ext[1])]
                        }
                    })
                    .collect();
                if let Strategy::Clustered { locus_bias } = cfg.strategy {
                    pts.extend(cluster_part(space, part.id, eps, locus_bias, &mut rng));
                }
                pts.retain(|c| space.check_interior(&PointRef { part: part.id, coords: *c }).is_ok());
                pts
            }
        };
        let pts = if cfg.strategy == Strategy::Grid {
            pts
        } else {
            repair_part(space, part.id, pts, eps)?
        };
        points.extend(pts.into_iter().map(|coords| PointRef {
            part: part.id,
            coords,
        }));
    }
    let certified = certified_radius(space, &points, Some(eps))?;
    if certified > eps * (1.0 + 1e-12) {
        return Err(Error::numerical(format!(
            "sampled net covers only to radius {certified} > target {eps}"
        )));
    }
    let (weights, sigma) = assign_weights_with(space, &points, certified, cfg.mc_probes, cfg.seed, exec)?;
    let mut net = Net::from_parts(space, points, weights, certified)?;
    net.weight_sigma = sigma;
    net.weight_probes = cfg.mc_probes;
    net.weight_seed = cfg.seed;
    Ok(net)
}

fn grid_part(shape: &Shape, eps: f64) -> Vec<[f64; 2]> {
    let ext = shape.extents();
    let count = |len: f64| ((len / eps) - 1e-9).ceil().max(1.0) as usize;
    if shape.dim() == 1 {
        let n = count(ext[0]);
        let h = ext[0] / n as f64;
        (0..n).map(|k| [(k as f64 + 0.5) * h, 0.0]).collect()
    } else {
        let (nx, ny) = (count(ext[0]), count(ext[1]));
        let (hx, hy) = (ext[0] / nx as f64, ext[1] / ny as f64);
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                out.push([(i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy]);
            }
        }
        out
    }
}

/// Extra points near every boundary component and gluing locus of a part,
/// with depth `w * U^2` for collar width `w = eps * bias`.
fn cluster_part(
    space: &SpaceModel,
    part: usize,
    eps: f64,
    bias: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    let desc = &space.parts[part];
    let width = eps * bias;
    let n = desc.shape.dim() as i32;
    let extra = |measure: f64| ((bias - 1.0) * measure / eps.powi(n)).ceil() as usize;
    let depth = |rng: &mut ChaCha8Rng| {
        let u = open_uniform(rng, 1.0);
        width * u * u
    };
    let mut out = Vec::new();
    match desc.shape {
        Shape::Segment { length } => {
            for end in [0.0, length] {
                for _ in 0..extra(width) {
                    let s = depth(rng);
                    out.push([if end == 0.0 { s } else { length - s }, 0.0]);
                }
            }
        }
        Shape::Circle { length } => {
            for (_, locus) in &desc.glued {
                if let Locus::Point(at) = *locus {
                    for _ in 0..extra(2.0 * width) {
                        let s = depth(rng);
                        let x = if rng.random::<bool>() { at + s } else { at - s };
                        out.push([x.rem_euclid(length), 0.0]);
                    }
                }
            }
        }
        Shape::Rectangle { width: w, height: h } => {
            for edge in Edge::ALL {
                let len = edge.length(w, h);
                for _ in 0..extra(width * len) {
                    let d = depth(rng);
                    let t = open_uniform(rng, len);
                    out.push(edge.unframe(w, h, d, t));
                }
            }
        }
        Shape::Torus { .. } => {}
    }
    out
}

#[derive(Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Farthest-point insertion until the part is covered to radius `eps`.
fn repair_part(space: &SpaceModel, part: usize, mut pts: Vec<[f64; 2]>, eps: f64) -> Result<Vec<[f64; 2]>> {
    let shape = space.parts[part].shape;
    let budget = 4 * (shape.volume() / eps.powi(shape.dim() as i32)).ceil() as usize + 1000;
    if shape.dim() == 1 {
        repair_1d(space, part, &mut pts, eps, budget)?;
    } else {
        repair_2d(space, part, &mut pts, eps, budget)?;
    }
    Ok(pts)
}

fn repair_1d(space: &SpaceModel, part: usize, pts: &mut Vec<[f64; 2]>, eps: f64, budget: usize) -> Result<()> {
    let shape = space.parts[part].shape;
    let len = shape.extents()[0];
    let periodic = shape.is_periodic();
    let usable = |x: f64| {
        space
            .check_interior(&PointRef::on(part, x))
            .is_ok()
    };
    if pts.is_empty() {
        pts.push([0.5 * len, 0.0]);
    }
    let mut xs: Vec<f64> = pts.iter().map(|c| c[0]).collect();
    xs.sort_by(f64::total_cmp);
    // Gaps as (covering radius, left, right); ends of a segment use the
    // boundary itself as a zero-width neighbour.
    let mut heap: BinaryHeap<(Key, Key, Key)> = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<(Key, Key, Key)>, a: f64, b: f64| {
        let r = if a <= 0.0 && !periodic {
            b
        } else if b >= len && !periodic {
            len - a
        } else {
            0.5 * (b - a)
        };
        heap.push((Key(r), Key(a), Key(b)));
    };
    for w in xs.windows(2) {
        push(&mut heap, w[0], w[1]);
    }
    if periodic {
        push(&mut heap, xs[xs.len() - 1], xs[0] + len);
    } else {
        push(&mut heap, 0.0, xs[0]);
        push(&mut heap, xs[xs.len() - 1], len);
    }
    let mut inserted = 0;
    while let Some((Key(r), Key(a), Key(b))) = heap.pop() {
        if r <= eps {
            break;
        }
        if inserted >= budget {
            return Err(Error::numerical(format!(
                "net repair on part {part} exceeded {budget} insertions (largest gap radius {r})"
            )));
        }
        let mut x = 0.5 * (a + b);
        if !usable(x.rem_euclid(len)) {
            x += 1e-3 * (b - a);
        }
        let stored = if periodic { x.rem_euclid(len) } else { x };
        pts.push([stored, 0.0]);
        inserted += 1;
        push(&mut heap, a, x);
        push(&mut heap, x, b);
    }
    Ok(())
}

/// Regular probe lattice of cell centres with step at most `step`.
struct ProbeGrid {
    n: [usize; 2],
    s: [f64; 2],
}

impl ProbeGrid {
    fn new(shape: &Shape, step: f64) -> Self {
        let ext = shape.extents();
        let nx = (ext[0] / step).ceil().max(1.0) as usize;
        let ny = (ext[1] / step).ceil().max(1.0) as usize;
        ProbeGrid {
            n: [nx, ny],
            s: [ext[0] / nx as f64, ext[1] / ny as f64],
        }
    }

    fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.s[0], (j as f64 + 0.5) * self.s[1]]
    }

    /// Any chart point is within this distance of a probe centre.
    fn slack(&self) -> f64 {
        0.5 * self.s[0].hypot(self.s[1])
    }
}

fn repair_2d(space: &SpaceModel, part: usize, pts: &mut Vec<[f64; 2]>, eps: f64, budget: usize) -> Result<()> {
    let shape = space.parts[part].shape;
    let grid = ProbeGrid::new(&shape, eps / 10.0);
    let target = eps - grid.slack();
    let reach = 3.0 * eps;
    let [nx, ny] = grid.n;
    let mut dist = vec![INFINITE; nx * ny];
    let periodic = shape.is_periodic();
    let update = |dist: &mut [f64], c: &[f64; 2]| {
        let span = [
            (reach / grid.s[0]).ceil() as isize,
            (reach / grid.s[1]).ceil() as isize,
        ];
        let ci = (c[0] / grid.s[0]).floor() as isize;
        let cj = (c[1] / grid.s[1]).floor() as isize;
        let axis = |center: isize, span: isize, n: usize| -> Vec<usize> {
            if periodic && 2 * span + 1 >= n as isize {
                return (0..n).collect();
            }
            (center - span..=center + span)
                .filter_map(|k| {
                    if periodic {
                        Some(k.rem_euclid(n as isize) as usize)
                    } else if k >= 0 && (k as usize) < n {
                        Some(k as usize)
                    } else {
                        None
                    }
                })
                .collect()
        };
        for j in axis(cj, span[1], ny) {
            for i in axis(ci, span[0], nx) {
                let d = shape.distance(c, &grid.center(i, j));
                let slot = &mut dist[j * nx + i];
                if d < *slot {
                    *slot = d;
                }
            }
        }
    };
    for c in pts.iter() {
        update(&mut dist, c);
    }
    let mut heap: BinaryHeap<(Key, Reverse<usize>)> = dist
        .iter()
        .enumerate()
        .map(|(k, d)| (Key(*d), Reverse(k)))
        .collect();
    let mut inserted = 0;
    while let Some((Key(d), Reverse(k))) = heap.pop() {
        if d != dist[k] {
            heap.push((Key(dist[k]), Reverse(k)));
            continue;
        }
        if d <= target {
            break;
        }
        if inserted >= budget {
            return Err(Error::numerical(format!(
                "net repair on part {part} exceeded {budget} insertions"
            )));
        }
        let c = grid.center(k % nx, k / nx);
        if space.check_interior(&PointRef { part, coords: c }).is_err() {
            return Err(Error::numerical(format!("repair probe {c:?} is not interior")));
        }
        pts.push(c);
        inserted += 1;
        update(&mut dist, &c);
        heap.push((Key(dist[k]), Reverse(k)));
    }
    Ok(())
}

/// Upper bound on the covering radius of `points` over the whole space.
/// Exact in 1-D; in 2-D a probe lattice with step `hint / 10` (or derived
/// from the point density) plus the lattice slack.
pub fn certified_radius(space: &SpaceModel, points: &[PointRef], hint: Option<f64>) -> Result<f64> {
    let mut radius: f64 = 0.0;
    for part in &space.parts {
        let coords: Vec<[f64; 2]> = points
            .iter()
            .filter(|p| p.part == part.id)
            .map(|p| p.coords)
            .collect();
        if coords.is_empty() {
            return Err(Error::usage(format!("part {} has no net points", part.id)));
        }
        let r = match part.shape {
            Shape::Segment { length } | Shape::Circle { length } => {
                let mut xs: Vec<f64> = coords.iter().map(|c| c[0]).collect();
                xs.sort_by(f64::total_cmp);
                let mut r: f64 = 0.0;
                for w in xs.windows(2) {
                    r = r.max(0.5 * (w[1] - w[0]));
                }
                if part.shape.is_periodic() {
                    r.max(0.5 * (xs[0] + length - xs[xs.len() - 1]))
                } else {
                    r.max(xs[0]).max(length - xs[xs.len() - 1])
                }
            }
            shape => {
                let spacing = (shape.volume() / coords.len() as f64).sqrt();
                let step = hint.unwrap_or(spacing) / 10.0;
                let grid = ProbeGrid::new(&shape, step);
                let index = BucketIndex::new(shape, spacing, coords.iter().copied().enumerate());
                let max = Exec::default()
                    .map_range(grid.n[1], |j| {
                        let mut m: f64 = 0.0;
                        for i in 0..grid.n[0] {
                            m = m.max(nearest_distance(&index, &shape, &grid.center(i, j), spacing));
                        }
                        m
                    })
                    .into_iter()
                    .fold(0.0, f64::max);
                max + grid.slack()
            }
        };
        radius = radius.max(r);
    }
    Ok(radius)
}

/// Distance to the nearest indexed point, growing the search radius from
/// `start` until something is found.
fn nearest_distance(index: &BucketIndex, shape: &Shape, c: &[f64; 2], start: f64) -> f64 {
    let ext = shape.extents();
    let diam = ext[0].hypot(ext[1]);
    let mut r = start.max(1e-12);
    loop {
        if let Some((_, d)) = index.nearest_within(c, r) {
            return d;
        }
        if r > diam {
            return INFINITE;
        }
        r *= 2.0;
    }
}

/// Cell weights `mu_i = vol(V_i)` for the clipped Voronoi partition.
pub fn assign_weights(space: &SpaceModel, points: &[PointRef], eps: f64) -> Result<Vec<f64>> {
    assign_weights_with(space, points, eps, DEFAULT_MC_PROBES, 0, Exec::default()).map(|(w, _)| w)
}

/// As [`assign_weights`], also returning the largest per-cell Monte Carlo
/// standard error (0 for exact 1-D cells).
pub fn assign_weights_with(
    space: &SpaceModel,
    points: &[PointRef],
    eps: f64,
    probes: usize,
    seed: u64,
    exec: Exec,
) -> Result<(Vec<f64>, f64)> {
    let mut weights = vec![0.0; points.len()];
    let mut sigma2 = vec![0.0; points.len()];
    let total_volume = space.total_volume();
    for part in &space.parts {
        let idx: Vec<usize> = (0..points.len())
            .filter(|&i| points[i].part == part.id)
            .collect();
        if idx.is_empty() {
            return Err(Error::usage(format!("part {} has no net points", part.id)));
        }
        match part.shape {
            Shape::Segment { length } | Shape::Circle { length } => {
                weights_1d(&part.shape, length, points, &idx, eps, &mut weights)?
            }
            shape => {
                let share = shape.volume() / total_volume;
                let budget = ((probes as f64) * share).ceil().max(1.0) as usize;
                weights_2d(
                    &shape,
                    part.id,
                    points,
                    &idx,
                    eps,
                    budget,
                    seed,
                    exec,
                    &mut weights,
                    &mut sigma2,
                )?
            }
        }
    }
    if let Some(i) = weights.iter().position(|w| *w <= 0.0) {
        return Err(Error::usage(format!(
            "cell {i} at {:?} has zero volume (duplicate point?)",
            points[i].coords
        )));
    }
    let sigma = sigma2.iter().fold(0.0f64, |m, s| m.max(s.sqrt()));
    Ok((weights, sigma))
}

fn weights_1d(
    shape: &Shape,
    length: f64,
    points: &[PointRef],
    idx: &[usize],
    eps: f64,
    weights: &mut [f64],
) -> Result<()> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| {
        points[a].coords[0]
            .total_cmp(&points[b].coords[0])
            .then(a.cmp(&b))
    });
    let n = order.len();
    let periodic = shape.is_periodic();
    let x = |k: usize| points[order[k]].coords[0];
    let mut covered = 0.0;
    for k in 0..n {
        let xi = x(k);
        let left = if k > 0 {
            0.5 * (x(k - 1) + xi)
        } else if periodic {
            0.5 * (x(n - 1) - length + xi)
        } else {
            0.0
        };
        let right = if k + 1 < n {
            0.5 * (xi + x(k + 1))
        } else if periodic {
            0.5 * (xi + x(0) + length)
        } else {
            length
        };
        let (left, right) = if n == 1 && periodic {
            (xi - 0.5 * length, xi + 0.5 * length)
        } else {
            (left, right)
        };
        // a duplicate coordinate belongs to its lower-index twin
        let dup = k > 0 && x(k - 1) == xi;
        let w = if dup {
            0.0
        } else {
            right.min(xi + eps) - left.max(xi - eps)
        };
        weights[order[k]] = w.max(0.0);
        covered += w.max(0.0);
    }
    if (covered - length).abs() > 1e-9 * length {
        return Err(Error::usage(format!(
            "points do not cover the part to radius {eps}: cells cover {covered} of {length}"
        )));
    }
    Ok(())
}

/// Strata layout for one 2-D part: `n[0] x n[1]` cells of size `s`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Strata {
    pub n: [usize; 2],
    pub s: [f64; 2],
}

impl Strata {
    pub fn new(shape: &Shape, budget: usize) -> Self {
        let ext = shape.extents();
        let nx = ((budget as f64) * ext[0] / ext[1]).sqrt().ceil().max(1.0) as usize;
        let ny = (budget as f64 / nx as f64).ceil().max(1.0) as usize;
        Strata {
            n: [nx, ny],
            s: [ext[0] / nx as f64, ext[1] / ny as f64],
        }
    }

    pub fn area(&self) -> f64 {
        self.s[0] * self.s[1]
    }

    /// One jittered probe per stratum of row `j`, from a stream fixed by
    /// `(seed, part, j)`.
    pub fn row(&self, seed: u64, part: usize, j: usize) -> Vec<[f64; 2]> {
        let mut rng = part_rng(seed ^ 0x9e37_79b9_7f4a_7c15, ((part as u64) << 32) | j as u64);
        (0..self.n[0])
            .map(|i| {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                // keep probes strictly inside the chart
                let x = ((i as f64 + u) * self.s[0]).max(1e-300);
                let y = ((j as f64 + v) * self.s[1]).max(1e-300);
                [x, y]
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn weights_2d(
    shape: &Shape,
    part: usize,
    points: &[PointRef],
    idx: &[usize],
    eps: f64,
    budget: usize,
    seed: u64,
    exec: Exec,
    weights: &mut [f64],
    sigma2: &mut [f64],
) -> Result<()> {
    let strata = Strata::new(shape, budget);
    let diag = strata.s[0].hypot(strata.s[1]);
    let index = BucketIndex::new(*shape, eps, idx.iter().map(|&i| (i, points[i].coords)));
    let rows: Vec<Result<Vec<(usize, bool)>>> = exec.map_range(strata.n[1], |j| {
        strata
            .row(seed, part, j)
            .into_iter()
            .map(|c| {
                let mut first = (usize::MAX, INFINITE);
                let mut second = INFINITE;
                index.for_each_candidate(&c, eps, |id, p| {
                    let d = shape.distance(&c, p);
                    if d < first.1 || (d == first.1 && id < first.0) {
                        second = first.1;
                        first = (id, d);
                    } else if d < second {
                        second = d;
                    }
                });
                if first.1 > eps {
                    return Err(Error::usage(format!(
                        "probe {c:?} of part {part} is farther than {eps} from every point"
                    )));
                }
                let uncertain = second - first.1 < diag || first.1 > eps - diag;
                Ok((first.0, uncertain))
            })
            .collect()
    });
    let area = strata.area();
    for row in rows {
        for (cell, uncertain) in row? {
            weights[cell] += area;
            if uncertain {
                sigma2[cell] += 0.25 * area * area;
            }
        }
    }
    Ok(())
}

/// Quality report for a net.
#[derive(Clone, Debug, PartialEq)]
pub struct NetReport {
    /// Largest probe-to-net distance (a lower bound on the true radius).
    pub covering_radius: f64,
    pub min_separation: f64,
    /// `|sum mu - vol| / vol`.
    pub weight_sum_residual: f64,
    /// True when some probe is farther than `net.epsilon` from the net.
    pub covering_violation: bool,
    pub probe_step: f64,
}

pub fn verify_net(space: &SpaceModel, net: &Net) -> NetReport {
    let step = net.epsilon / 10.0;
    let mut covering: f64 = 0.0;
    let mut min_sep = INFINITE;
    for part in &space.parts {
        let shape = part.shape;
        let idx = net.part_indices(part.id);
        if idx.is_empty() {
            covering = INFINITE;
            continue;
        }
        let index = BucketIndex::new(shape, net.epsilon, idx.iter().map(|&i| (i, net.points[i].coords)));
        let ext = shape.extents();
        let count = |len: f64| (len / step).ceil().max(1.0) as usize;
        let (nx, ny) = if shape.dim() == 1 {
            (count(ext[0]), 0)
        } else {
            (count(ext[0]), count(ext[1]))
        };
        let last_x = if shape.is_periodic() { nx - 1 } else { nx };
        let last_y = if shape.is_periodic() { ny.saturating_sub(1) } else { ny };
        let row_max = Exec::default().map_range(last_y + 1, |j| {
            let y = if ny == 0 { 0.0 } else { j as f64 * ext[1] / ny as f64 };
            let mut m: f64 = 0.0;
            for i in 0..=last_x {
                let c = [i as f64 * ext[0] / nx as f64, y];
                m = m.max(nearest_distance(&index, &shape, &c, net.epsilon));
            }
            m
        });
        covering = row_max.into_iter().fold(covering, f64::max);
        for &i in &idx {
            let c = net.points[i].coords;
            let mut r = 2.0 * net.epsilon;
            let diam = ext[0].hypot(ext[1]);
            loop {
                let mut best = INFINITE;
                index.for_each_candidate(&c, r, |j, p| {
                    if j != i {
                        best = best.min(shape.distance(&c, p));
                    }
                });
                if best <= r || r > diam {
                    min_sep = min_sep.min(best);
                    break;
                }
                r *= 2.0;
            }
        }
    }
    let vol = space.total_volume();
    NetReport {
        covering_radius: covering,
        min_separation: min_sep,
        weight_sum_residual: (net.total_weight() - vol).abs() / vol,
        covering_violation: covering > net.epsilon * (1.0 + 1e-12),
        probe_step: step,
    }
}
