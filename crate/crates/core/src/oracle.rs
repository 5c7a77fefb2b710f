//! Brute-force validators, independent of the main code paths: boundary
//! scans for reflected distances, a finite-element metric-graph solver, and
//! Monte Carlo ball volumes.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Edge, Locus, PointRef, Shape, SpaceKind, SpaceModel, INFINITE};
use crate::spectra::dense::{eigen_dense_symmetric, DenseMatrix};
use crate::spectra::reference::{EigenFn, Mode, Provenance, ReferenceSpectrum};

/// `min_z d(p,z) + d(z,q)` over reflecting boundary points spaced at most
/// `h` apart (corners and segment ends included).
pub fn brute_reflected_distance(space: &SpaceModel, p: &PointRef, q: &PointRef, h: f64) -> Result<f64> {
    if p.part != q.part {
        return Err(Error::usage("brute reflected distance needs points of one part"));
    }
    if !(h > 0.0) {
        return Err(Error::usage("boundary step must be positive"));
    }
    let part = space.part(p.part)?;
    let mask = space.reflecting_boundary(p.part);
    let shape = part.shape;
    let mut best = INFINITE;
    let mut visit = |z: [f64; 2]| {
        best = best.min(shape.distance(&p.coords, &z) + shape.distance(&z, &q.coords));
    };
    match shape {
        Shape::Segment { length } => {
            if mask.contains(0) {
                visit([0.0, 0.0]);
            }
            if mask.contains(1) {
                visit([length, 0.0]);
            }
        }
        Shape::Rectangle { width, height } => {
            for edge in Edge::ALL {
                if !mask.contains(edge.bit()) {
                    continue;
                }
                let len = edge.length(width, height);
                let n = (len / h).ceil() as usize;
                for k in 0..=n {
                    visit(edge.unframe(width, height, 0.0, len * k as f64 / n as f64));
                }
            }
        }
        Shape::Circle { .. } | Shape::Torus { .. } => {}
    }
    Ok(best)
}

/// Monte Carlo estimate of `vol{y : d(p,y) < r} + vol{y : d~(p,y) < r}`
/// and its standard error. Both balls lie in the `d`-ball, so probes are
/// drawn from the box of half-width `r` around `p`.
pub fn mc_ball_volume(space: &SpaceModel, p: &PointRef, r: f64, probes: usize, seed: u64) -> Result<(f64, f64)> {
    space.check_interior(p)?;
    if probes < 2 {
        return Err(Error::usage("need at least two probes"));
    }
    let shape = space.part(p.part)?.shape;
    let mask = space.reflecting_boundary(p.part);
    let ext = shape.extents();
    let dim = shape.dim();
    let mut lo = [0.0; 2];
    let mut hi = [0.0; 2];
    for a in 0..dim {
        if shape.is_periodic() {
            if 2.0 * r >= ext[a] {
                return Err(Error::usage("ball wraps around a periodic part"));
            }
            lo[a] = p.coords[a] - r;
            hi[a] = p.coords[a] + r;
        } else {
            lo[a] = (p.coords[a] - r).max(0.0);
            hi[a] = (p.coords[a] + r).min(ext[a]);
        }
    }
    let box_vol: f64 = (0..dim).map(|a| hi[a] - lo[a]).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..probes {
        let mut y = [0.0; 2];
        for a in 0..dim {
            let v = lo[a] + rng.random::<f64>() * (hi[a] - lo[a]);
            y[a] = if shape.is_periodic() { v.rem_euclid(ext[a]) } else { v };
        }
        let mut x = 0.0;
        if shape.distance(&p.coords, &y) < r {
            x += 1.0;
        }
        if !shape.on_boundary(&y) && shape.reflected_distance(&p.coords, &y, mask) < r {
            x += 1.0;
        }
        sum += x;
        sum2 += x * x;
    }
    let n = probes as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((box_vol * mean, box_vol * (var / n).sqrt()))
}

/// Lumped-mass linear finite elements on a metric graph with uniform
/// element length `h`. Vertex nodes are shared by every incident branch,
/// which imposes continuity; the natural boundary condition gives the
/// Kirchhoff flux balance and Neumann conditions at free ends.
pub struct FdGraph {
    h: f64,
    mass: Vec<f64>,
    /// per part: node index of each grid position
    part_nodes: Vec<Vec<usize>>,
    periodic: Vec<bool>,
    specials: Vec<usize>,
    chains: Vec<Chain>,
    /// direct element couplings between special nodes
    links: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

struct Chain {
    nodes: Vec<usize>,
    start: Option<usize>,
    end: Option<usize>,
}

fn divides(len: f64, h: f64) -> Option<usize> {
    let n = len / h;
    let r = n.round();
    if r >= 1.0 && (n - r).abs() <= 1e-6 {
        Some(r as usize)
    } else {
        None
    }
}

impl FdGraph {
    pub fn new(space: &SpaceModel, h: f64) -> Result<Self> {
        if space.kind != SpaceKind::MetricGraph
            && !matches!(space.kind, SpaceKind::Interval { .. } | SpaceKind::Circle { .. })
        {
            return Err(Error::usage("finite-difference oracle needs a 1-D space"));
        }
        if !(h > 0.0) {
            return Err(Error::usage("fd step must be positive"));
        }
        let mut next = 0usize;
        let mut vertex_node: Vec<Option<usize>> = vec![None; space.gluing.len()];
        let mut part_nodes = Vec::new();
        let mut periodic = Vec::new();
        let mut specials = Vec::new();
        let mut is_special_pos: Vec<Vec<bool>> = Vec::new();
        for part in &space.parts {
            let (len, circ) = match part.shape {
                Shape::Segment { length } => (length, false),
                Shape::Circle { length } => (length, true),
                _ => return Err(Error::usage("metric graph parts must be 1-D")),
            };
            let n = divides(len, h).ok_or_else(|| {
                Error::usage(format!("fd step {h} does not divide part length {len}"))
            })?;
            if circ && n < 3 {
                return Err(Error::usage("fd step too coarse for a circle"));
            }
            let count = if circ { n } else { n + 1 };
            let mut nodes = vec![usize::MAX; count];
            let mut special = vec![false; count];
            for (vid, locus) in &part.glued {
                let Locus::Point(at) = *locus else {
                    return Err(Error::usage("metric graph gluing must be at points"));
                };
                let k = if at == 0.0 {
                    0
                } else {
                    divides(at, h).ok_or_else(|| {
                        Error::usage(format!("fd step {h} does not divide gluing position {at}"))
                    })?
                };
                let node = *vertex_node[*vid].get_or_insert_with(|| {
                    let id = next;
                    next += 1;
                    specials.push(id);
                    id
                });
                nodes[k % count] = node;
                special[k % count] = true;
            }
            if part.glued.is_empty() {
                // anchor every chain at a special node
                let id = next;
                next += 1;
                specials.push(id);
                nodes[0] = id;
                special[0] = true;
            }
            for slot in nodes.iter_mut() {
                if *slot == usize::MAX {
                    *slot = next;
                    next += 1;
                }
            }
            part_nodes.push(nodes);
            periodic.push(circ);
            is_special_pos.push(special);
        }
        let mut mass = vec![0.0; next];
        let mut degree = vec![0usize; next];
        let mut chains = Vec::new();
        let mut links = Vec::new();
        for (pi, nodes) in part_nodes.iter().enumerate() {
            let count = nodes.len();
            let elems = if periodic[pi] { count } else { count - 1 };
            for e in 0..elems {
                let (a, b) = (nodes[e], nodes[(e + 1) % count]);
                mass[a] += 0.5 * h;
                mass[b] += 0.5 * h;
                degree[a] += 1;
                degree[b] += 1;
                if is_special_pos[pi][e] && is_special_pos[pi][(e + 1) % count] {
                    links.push((a, b));
                }
            }
            // split positions into runs of non-special nodes
            let special = &is_special_pos[pi];
            let first = special.iter().position(|&s| s).expect("every part has a special node");
            if periodic[pi] {
                let mut k = first;
                loop {
                    let mut run = Vec::new();
                    let mut j = (k + 1) % count;
                    while !special[j] {
                        run.push(nodes[j]);
                        j = (j + 1) % count;
                    }
                    if !run.is_empty() {
                        chains.push(Chain {
                            nodes: run,
                            start: Some(nodes[k]),
                            end: Some(nodes[j]),
                        });
                    }
                    k = j;
                    if k == first {
                        break;
                    }
                }
            } else {
                if first > 0 {
                    // tail from the free end at 0 up to the first special
                    let run: Vec<usize> = (0..first).rev().map(|j| nodes[j]).collect();
                    chains.push(Chain {
                        nodes: run,
                        start: Some(nodes[first]),
                        end: None,
                    });
                }
                let mut k = first;
                loop {
                    let mut run = Vec::new();
                    let mut j = k + 1;
                    while j < count && !special[j] {
                        run.push(nodes[j]);
                        j += 1;
                    }
                    if !run.is_empty() {
                        chains.push(Chain {
                            nodes: run,
                            start: Some(nodes[k]),
                            end: if j < count { Some(nodes[j]) } else { None },
                        });
                    }
                    if j >= count {
                        break;
                    }
                    k = j;
                }
            }
        }
        Ok(FdGraph {
            h,
            mass,
            part_nodes,
            periodic,
            specials,
            chains,
            links,
            degree,
        })
    }

    pub fn nodes(&self) -> usize {
        self.mass.len()
    }

    fn diag(&self, node: usize, sigma: f64) -> f64 {
        self.degree[node] as f64 / self.h - sigma * self.mass[node]
    }

    /// Factorises `K - sigma M`; returns the number of negative pivots and
    /// the factor for solves.
    fn factor(&self, sigma: f64) -> Result<(usize, Factor)> {
        let c = -1.0 / self.h;
        let tiny = 1e-300;
        let ns = self.specials.len();
        let slot: std::collections::HashMap<usize, usize> =
            self.specials.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut schur = DenseMatrix::zeros(ns);
        for (i, &s) in self.specials.iter().enumerate() {
            schur.set(i, i, self.diag(s, sigma));
        }
        for &(a, b) in &self.links {
            let (i, j) = (slot[&a], slot[&b]);
            schur.set(i, j, schur.get(i, j) + c);
            if i != j {
                schur.set(j, i, schur.get(j, i) + c);
            }
        }
        let mut negatives = 0;
        let mut pivots = Vec::with_capacity(self.chains.len());
        for chain in &self.chains {
            let m = chain.nodes.len();
            let mut d = Vec::with_capacity(m);
            for (i, &node) in chain.nodes.iter().enumerate() {
                let mut v = self.diag(node, sigma);
                if i > 0 {
                    v -= c * c / d[i - 1];
                }
                if v == 0.0 {
                    v = -tiny;
                }
                if v < 0.0 {
                    negatives += 1;
                }
                d.push(v);
            }
            let solve = |rhs: &mut [f64]| chain_solve(&d, c, rhs);
            let mut e1 = vec![0.0; m];
            e1[0] = 1.0;
            solve(&mut e1);
            let mut em = vec![0.0; m];
            em[m - 1] = 1.0;
            solve(&mut em);
            let (t11, tmm, t1m) = (e1[0], em[m - 1], em[0]);
            let a = chain.start.map(|s| slot[&s]);
            let b = chain.end.map(|s| slot[&s]);
            let mut add = |i: usize, j: usize, v: f64| schur.set(i, j, schur.get(i, j) - c * c * v);
            match (a, b) {
                (Some(i), Some(j)) if i == j => add(i, i, t11 + tmm + 2.0 * t1m),
                (Some(i), Some(j)) => {
                    add(i, i, t11);
                    add(j, j, tmm);
                    add(i, j, t1m);
                    add(j, i, t1m);
                }
                (Some(i), None) => add(i, i, t11),
                (None, Some(j)) => add(j, j, tmm),
                (None, None) => {}
            }
            pivots.push(d);
        }
        let s = eigen_dense_symmetric(&schur)?;
        negatives += s.eigenvalues.iter().filter(|&&v| v < 0.0).count();
        Ok((
            negatives,
            Factor {
                pivots,
                schur,
                slot,
                c,
            },
        ))
    }

    /// Number of generalised eigenvalues below `sigma`.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        Ok(self.factor(sigma)?.0)
    }

    /// Largest generalised eigenvalue bound (Gershgorin).
    fn upper_bound(&self) -> f64 {
        (0..self.nodes())
            .map(|i| 2.0 * self.degree[i] as f64 / self.h / self.mass[i])
            .fold(0.0, f64::max)
    }

    /// Lowest `count` eigenvalues by bisection on the inertia.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        let count = count.min(self.nodes());
        let top = self.upper_bound() * 1.01 + 1.0;
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let (mut lo, mut hi) = (-1.0, top);
            if let Some(&prev) = out.last() {
                lo = prev - 1e-9 * (1.0 + f64::abs(prev));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
                    break;
                }
                if self.count_below(mid)? > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// M-orthonormal nodal eigenvectors for a cluster of `mult` eigenvalues
    /// at `lambda`, by block inverse iteration.
    pub fn eigenvectors(&self, lambda: f64, mult: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let sigma = lambda - 1e-7 * (1.0 + lambda.abs());
        let (_, fac) = self.factor(sigma)?;
        let n = self.nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut block: Vec<Vec<f64>> = (0..mult)
            .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        for _ in 0..4 {
            for v in block.iter_mut() {
                let mut rhs: Vec<f64> = v.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
                self.solve(&fac, &mut rhs)?;
                *v = rhs;
            }
            self.m_orthonormalize(&mut block);
        }
        Ok(block)
    }

    fn m_orthonormalize(&self, block: &mut [Vec<f64>]) {
        let mdot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).zip(&self.mass).map(|((x, y), m)| x * y * m).sum()
        };
        for i in 0..block.len() {
            for _ in 0..2 {
                for j in 0..i {
                    let c = mdot(&block[i], &block[j]);
                    let (head, tail) = block.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= c * y;
                    }
                }
            }
            let nrm = mdot(&block[i], &block[i]).sqrt();
            block[i].iter_mut().for_each(|x| *x /= nrm);
        }
    }

    fn solve(&self, fac: &Factor, rhs: &mut [f64]) -> Result<()> {
        let mut g: Vec<f64> = self.specials.iter().map(|&s| rhs[s]).collect();
        let mut w_chains = Vec::with_capacity(self.chains.len());
        for (chain, d) in self.chains.iter().zip(&fac.pivots) {
            let mut w: Vec<f64> = chain.nodes.iter().map(|&k| rhs[k]).collect();
            chain_solve(d, fac.c, &mut w);
            let m = w.len();
            if let Some(s) = chain.start {
                g[fac.slot[&s]] -= fac.c * w[0];
            }
            if let Some(s) = chain.end {
                g[fac.slot[&s]] -= fac.c * w[m - 1];
            }
            w_chains.push(w);
        }
        let sv = dense_solve(&fac.schur, &g)?;
        for (i, &s) in self.specials.iter().enumerate() {
            rhs[s] = sv[i];
        }
        for (chain, d) in self.chains.iter().zip(&fac.pivots) {
            let m = chain.nodes.len();
            let mut f = vec![0.0; m];
            if let Some(s) = chain.start {
                f[0] -= fac.c * sv[fac.slot[&s]];
            }
            if let Some(s) = chain.end {
                f[m - 1] -= fac.c * sv[fac.slot[&s]];
            }
            let mut corr = f;
            for (k, &node) in chain.nodes.iter().enumerate() {
                corr[k] += rhs[node];
            }
            chain_solve(d, fac.c, &mut corr);
            for (k, &node) in chain.nodes.iter().enumerate() {
                rhs[node] = corr[k];
            }
        }
        Ok(())
    }

    /// Piecewise-linear interpolant of nodal values.
    pub fn interpolant(self: &Arc<Self>, values: Vec<f64>) -> EigenFn {
        let g = Arc::clone(self);
        Arc::new(move |p: &PointRef| {
            let nodes = &g.part_nodes[p.part];
            let count = nodes.len();
            let t = p.coords[0] / g.h;
            let k = (t.floor() as usize).min(if g.periodic[p.part] { count - 1 } else { count - 2 });
            let frac = t - k as f64;
            let a = values[nodes[k]];
            let b = values[nodes[(k + 1) % count]];
            a + frac * (b - a)
        })
    }
}

struct Factor {
    pivots: Vec<Vec<f64>>,
    schur: DenseMatrix,
    slot: std::collections::HashMap<usize, usize>,
    c: f64,
}

/// Solves `T x = b` in place for the chain matrix with pivots `d` and
/// constant off-diagonal `c`.
fn chain_solve(d: &[f64], c: f64, b: &mut [f64]) {
    let m = d.len();
    for i in 1..m {
        b[i] -= (c / d[i - 1]) * b[i - 1];
    }
    for i in 0..m {
        b[i] /= d[i];
    }
    for i in (0..m.saturating_sub(1)).rev() {
        b[i] -= (c / d[i]) * b[i + 1];
    }
}

/// Gaussian elimination with partial pivoting for a small dense system.
fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 {
            return Err(Error::numerical("singular vertex system in fd oracle"));
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (x[r] - s) / m[r][r];
    }
    Ok(x)
}

/// Lowest `k_max + 1` eigenvalues of the lumped finite-element problem with
/// step `h`.
pub fn fd_metric_graph_spectrum(space: &SpaceModel, h: f64, k_max: usize) -> Result<ReferenceSpectrum> {
    let g = FdGraph::new(space, h)?;
    let eigenvalues = g.eigenvalues(k_max + 1)?;
    Ok(ReferenceSpectrum {
        provenance: vec![Provenance::FdOracle; eigenvalues.len()],
        eigenvalues,
    })
}

/// Largest `d` dividing every part length and gluing coordinate, searched
/// as `min_length / j`.
fn common_step(space: &SpaceModel) -> Option<f64> {
    let mut values = Vec::new();
    for part in &space.parts {
        values.push(part.shape.volume());
        for (_, locus) in &part.glued {
            if let Locus::Point(at) = *locus {
                if at > 0.0 {
                    values.push(at);
                }
            }
        }
    }
    let min = values.iter().copied().fold(INFINITE, f64::min);
    (1..=1000)
        .map(|j| min / j as f64)
        .find(|&d| values.iter().all(|&v| divides(v, d).is_some()))
}

/// Reference modes from two finite-element solves (`h` and `h/2`) combined
/// by Richardson extrapolation; eigenfunctions interpolate the fine vectors.
pub fn fd_reference_modes(space: &SpaceModel, need: usize) -> Result<Vec<Mode>> {
    let base = common_step(space)
        .ok_or_else(|| Error::usage("part lengths have no common finite-difference step"))?;
    let min_len = space.parts.iter().map(|p| p.shape.volume()).fold(INFINITE, f64::min);
    let target = (min_len / 400.0).min(base);
    let h = base / (base / target).ceil();
    let coarse = FdGraph::new(space, h)?;
    let fine = Arc::new(FdGraph::new(space, 0.5 * h)?);
    let count = need + 8;
    let lc = coarse.eigenvalues(count)?;
    let lf = fine.eigenvalues(count)?;
    let values: Vec<f64> = lc
        .iter()
        .zip(&lf)
        .map(|(c, f)| {
            let v = (4.0 * f - c) / 3.0;
            if v.abs() < 1e-9 { 0.0 } else { v }
        })
        .collect();
    let mut modes = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        let tol = 1e-4 * (1.0 + values[i].abs());
        while j < values.len() && (values[j] - values[i]).abs() <= tol {
            j += 1;
        }
        if j == values.len() && i > 0 {
            // the last cluster may be cut off
            break;
        }
        let lambda = values[i..j].iter().sum::<f64>() / (j - i) as f64;
        let vecs = fine.eigenvectors(lf[i], j - i, i as u64)?;
        modes.push(Mode {
            lambda,
            provenance: Provenance::FdOracle,
            basis: vecs.into_iter().map(|v| fine.interpolant(v)).collect(),
        });
        i = j;
    }
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn brute_interval() {
        let s = SpaceModel::interval(1.0).unwrap();
        let d = brute_reflected_distance(&s, &PointRef::on(0, 0.1), &PointRef::on(0, 0.2), 1e-4).unwrap();
        assert!((d - 0.3).abs() <= 1e-4);
    }

    #[test]
    fn brute_rectangle_edge_mirror() {
        let s = SpaceModel::rectangle(1.0, 1.0).unwrap();
        let h = 1e-3;
        let d = brute_reflected_distance(
            &s,
            &PointRef::planar(0, 0.1, 0.5),
            &PointRef::planar(0, 0.2, 0.5),
            h,
        )
        .unwrap();
        assert!((d - 0.3).abs() <= h);
    }

    #[test]
    fn brute_circle_is_infinite() {
        let s = SpaceModel::circle(1.0).unwrap();
        let d = brute_reflected_distance(&s, &PointRef::on(0, 0.1), &PointRef::on(0, 0.3), 1e-3).unwrap();
        assert_eq!(d, INFINITE);
    }

    #[test]
    fn ball_volumes() {
        let s = SpaceModel::interval(1.0).unwrap();
        for x in [0.5, 0.03] {
            let (v, sd) = mc_ball_volume(&s, &PointRef::on(0, x), 0.1, 200_000, 9).unwrap();
            assert!((v - 0.2).abs() <= 3.0 * sd + 1e-12, "x={x}: {v} +- {sd}");
        }
        let r = SpaceModel::rectangle(1.0, 1.0).unwrap();
        let (v, sd) = mc_ball_volume(&r, &PointRef::planar(0, 0.5, 0.5), 0.05, 200_000, 9).unwrap();
        assert!((v - PI * 0.0025).abs() <= 3.0 * sd);
    }

    #[test]
    fn fd_interval_and_glued_examples() {
        let h = 1e-3;
        let i = fd_metric_graph_spectrum(&SpaceModel::interval(1.0).unwrap(), h, 2).unwrap();
        assert!(i.eigenvalues[0].abs() < 1e-8);
        assert!((i.eigenvalues[1] / (PI * PI) - 1.0).abs() < 1e-4);
        let c = fd_metric_graph_spectrum(&SpaceModel::two_circles(1.0, 1.0).unwrap(), h, 4).unwrap();
        assert!((c.eigenvalues[1] / (PI * PI) - 1.0).abs() < 1e-4);
        for l in &c.eigenvalues[2..5] {
            assert!((l / (4.0 * PI * PI) - 1.0).abs() < 1e-4);
        }
        let cs = fd_metric_graph_spectrum(&SpaceModel::circle_with_segment(1.0, 1.0).unwrap(), h, 1).unwrap();
        let want = 2.0 * (3f64.sqrt() / 3.0).acos();
        assert!((cs.eigenvalues[1].sqrt() - want).abs() < 1e-4);
    }

    #[test]
    fn fd_is_second_order() {
        let space = SpaceModel::two_circles(2.0, 1.0).unwrap();
        let l = |h: f64| fd_metric_graph_spectrum(&space, h, 5).unwrap().eigenvalues;
        let (a, b, c) = (l(0.02), l(0.01), l(0.005));
        for k in 1..=5 {
            let ratio = (a[k] - b[k]) / (b[k] - c[k]);
            assert!((3.5..=4.5).contains(&ratio), "k={k} ratio {ratio}");
        }
    }

    #[test]
    fn fd_rejects_incompatible_step() {
        assert!(FdGraph::new(&SpaceModel::interval(1.0).unwrap(), 0.3).is_err());
    }

    #[test]
    fn fd_modes_match_secular_reference_on_a_path() {
        // a three-segment path through two vertices: a plain interval of
        // length 2.5 in disguise
        let space = SpaceModel::metric_graph(
            vec![
                Shape::Segment { length: 1.0 },
                Shape::Segment { length: 0.5 },
                Shape::Segment { length: 1.0 },
            ],
            vec![vec![(0, 1.0), (1, 0.0)], vec![(1, 0.5), (2, 0.0)]],
        )
        .unwrap();
        let modes = fd_reference_modes(&space, 4).unwrap();
        for (k, m) in modes.iter().take(4).enumerate() {
            let want = (k as f64 * PI / 2.5).powi(2);
            assert!((m.lambda - want).abs() < 1e-6 * (1.0 + want), "{k}: {} vs {want}", m.lambda);
            assert_eq!(m.basis.len(), 1);
        }
        // eigenfunction of mode 1 is cos(pi s / 2.5) up to sign and scale
        let f = &modes[1].basis[0];
        let s = |part: usize, x: f64| f(&PointRef::on(part, x));
        let ratio = s(2, 0.5) / (PI * 2.0 / 2.5).cos();
        let base = s(0, 0.2) / (PI * 0.2 / 2.5).cos();
        assert!((ratio - base).abs() < 1e-3 * base.abs());
    }
}
