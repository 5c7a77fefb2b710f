//! Exact Neumann/Kirchhoff spectra of the catalog spaces.
//!
//! Single parts use closed forms. Metric graphs whose parts all meet at one
//! vertex (loops and pendant segments) are solved through the vertex
//! secular equation; other graphs fall back to the finite-difference
//! oracle.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Locus, PointRef, Shape, SpaceKind, SpaceModel};
use crate::oracle;

/// A real-valued function on the space.
type LocalMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub type EigenFn = Arc<dyn Fn(&PointRef) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    SecularRoot,
    FdOracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::SecularRoot => "secular-root",
            Provenance::FdOracle => "fd-oracle",
        }
    }
}

/// One eigenvalue together with a (not necessarily orthonormal) basis of
/// its eigenfunctions; the multiplicity is the basis length.
#[derive(Clone)]
pub struct Mode {
    pub lambda: f64,
    pub provenance: Provenance,
    pub basis: Vec<EigenFn>,
}

impl std::fmt::Debug for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mode")
            .field("lambda", &self.lambda)
            .field("provenance", &self.provenance)
            .field("multiplicity", &self.basis.len())
            .finish()
    }
}

/// Eigenvalues repeated by multiplicity, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSpectrum {
    pub eigenvalues: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

/// Relative threshold for treating eigenvalues as one cluster.
pub fn cluster_tolerance(lambda: f64) -> f64 {
    1e-6 * (1.0 + lambda.abs())
}

impl ReferenceSpectrum {
    /// `(value, multiplicity)` clusters of the listed values.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.eigenvalues {
            match out.last_mut() {
                Some((c, m)) if (v - *c).abs() <= cluster_tolerance(*c) => *m += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// The lowest `k_max + 1` eigenvalues (indices `0..=k_max`).
pub fn reference_spectrum(space: &SpaceModel, k_max: usize) -> Result<ReferenceSpectrum> {
    let modes = reference_modes(space, k_max)?;
    let mut eigenvalues = Vec::with_capacity(k_max + 1);
    let mut provenance = Vec::with_capacity(k_max + 1);
    'outer: for m in &modes {
        for _ in 0..m.basis.len() {
            if eigenvalues.len() > k_max {
                break 'outer;
            }
            eigenvalues.push(m.lambda);
            provenance.push(m.provenance);
        }
    }
    Ok(ReferenceSpectrum {
        eigenvalues,
        provenance,
    })
}

/// Basis of the full eigenspace containing the `k`-th eigenvalue.
pub fn reference_eigenspace(space: &SpaceModel, k: usize) -> Result<(f64, Vec<EigenFn>)> {
    let modes = reference_modes(space, k)?;
    let mut seen = 0;
    let mut target = None;
    for m in &modes {
        seen += m.basis.len();
        if seen > k {
            target = Some(m.lambda);
            break;
        }
    }
    let lambda = target.ok_or_else(|| Error::numerical("reference spectrum too short"))?;
    let basis = modes
        .iter()
        .filter(|m| (m.lambda - lambda).abs() <= cluster_tolerance(lambda))
        .flat_map(|m| m.basis.iter().cloned())
        .collect();
    Ok((lambda, basis))
}

/// Modes sorted by eigenvalue, covering at least indices `0..=k_max` and
/// every mode in the cluster of index `k_max`.
pub fn reference_modes(space: &SpaceModel, k_max: usize) -> Result<Vec<Mode>> {
    let need = k_max + 1;
    let mut bound = match space.dim {
        1 => (PI * (need as f64 + 2.0) / space.total_volume().max(1e-300)).powi(2),
        _ => 4.0 * PI * (need as f64 + 4.0) / space.total_volume().max(1e-300),
    };
    for _ in 0..64 {
        let mut modes = modes_below(space, bound, need)?;
        modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let mut count = 0;
        let mut cut = None;
        for (i, m) in modes.iter().enumerate() {
            count += m.basis.len();
            if count >= need {
                cut = Some(i);
                break;
            }
        }
        if let Some(i) = cut {
            let last = modes[i].lambda;
            if last + cluster_tolerance(last) < bound {
                modes.retain(|m| m.lambda <= last + cluster_tolerance(last));
                return Ok(merge_clusters(modes));
            }
        }
        bound *= 2.0;
    }
    Err(Error::numerical("could not enumerate enough reference eigenvalues"))
}

/// Orders modes and makes values within the cluster tolerance identical.
fn merge_clusters(mut modes: Vec<Mode>) -> Vec<Mode> {
    modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut i = 0;
    while i < modes.len() {
        let base = modes[i].lambda;
        let mut j = i + 1;
        while j < modes.len() && (modes[j].lambda - base).abs() <= cluster_tolerance(base) {
            modes[j].lambda = base;
            j += 1;
        }
        i = j;
    }
    modes
}

fn f1(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> EigenFn {
    Arc::new(move |p: &PointRef| g(p.coords[0]))
}

fn f2(g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> EigenFn {
    Arc::new(move |p: &PointRef| g(p.coords[0], p.coords[1]))
}

fn on_part(part: usize, g: EigenFn) -> EigenFn {
    Arc::new(move |p: &PointRef| if p.part == part { g(p) } else { 0.0 })
}

fn modes_below(space: &SpaceModel, bound: f64, need: usize) -> Result<Vec<Mode>> {
    let closed = |lambda: f64, basis: Vec<EigenFn>| Mode {
        lambda,
        provenance: Provenance::ClosedForm,
        basis,
    };
    let mut out = Vec::new();
    match space.kind {
        SpaceKind::Interval { length } => {
            let mut k = 0usize;
            loop {
                let w = k as f64 * PI / length;
                if w * w > bound {
                    break;
                }
                out.push(closed(w * w, vec![f1(move |x| (w * x).cos())]));
                k += 1;
            }
        }
        SpaceKind::Circle { length } => {
            out.push(closed(0.0, vec![f1(|_| 1.0)]));
            let mut k = 1usize;
            loop {
                let w = 2.0 * PI * k as f64 / length;
                if w * w > bound {
                    break;
                }
                out.push(closed(
                    w * w,
                    vec![f1(move |x| (w * x).cos()), f1(move |x| (w * x).sin())],
                ));
                k += 1;
            }
        }
        SpaceKind::FlatRectangle { width, height } => {
            for (p, q, lambda) in lattice(PI / width, PI / height, bound, false) {
                let (wx, wy) = (p as f64 * PI / width, q as f64 * PI / height);
                out.push(closed(lambda, vec![f2(move |x, y| (wx * x).cos() * (wy * y).cos())]));
            }
        }
        SpaceKind::FlatTorus { width, height } => {
            for (p, q, lambda) in lattice(2.0 * PI / width, 2.0 * PI / height, bound, true) {
                let (wx, wy) = (2.0 * PI * p as f64 / width, 2.0 * PI * q as f64 / height);
                if p == 0 && q == 0 {
                    out.push(closed(0.0, vec![f2(|_, _| 1.0)]));
                } else {
                    out.push(closed(
                        lambda,
                        vec![
                            f2(move |x, y| (wx * x + wy * y).cos()),
                            f2(move |x, y| (wx * x + wy * y).sin()),
                        ],
                    ));
                }
            }
        }
        SpaceKind::BookPages {
            pages,
            width,
            height,
        } => {
            for (p, q, lambda) in lattice(PI / width, PI / height, bound, false) {
                let (wx, wy) = (p as f64 * PI / width, q as f64 * PI / height);
                out.push(closed(lambda, vec![f2(move |x, y| (wx * x).cos() * (wy * y).cos())]));
            }
            // modes vanishing on the spine, with page amplitudes summing to zero
            let mut p = 0usize;
            loop {
                let wx = (p as f64 + 0.5) * PI / width;
                if wx * wx > bound {
                    break;
                }
                let mut q = 0usize;
                loop {
                    let wy = q as f64 * PI / height;
                    let lambda = wx * wx + wy * wy;
                    if lambda > bound {
                        break;
                    }
                    let basis = (1..pages)
                        .map(|b| {
                            let amps = helmert_row(pages, b);
                            Arc::new(move |pt: &PointRef| {
                                amps[pt.part] * (wx * pt.coords[0]).sin() * (wy * pt.coords[1]).cos()
                            }) as EigenFn
                        })
                        .collect();
                    out.push(closed(lambda, basis));
                    q += 1;
                }
                p += 1;
            }
        }
        SpaceKind::MetricGraph => match single_vertex_star(space) {
            Some(star) => out.extend(star.modes_below(bound)?),
            None => out.extend(oracle::fd_reference_modes(space, need)?),
        },
    }
    Ok(out)
}

/// Amplitudes of the `b`-th Helmert contrast over `m` pages: orthonormal
/// vectors summing to zero.
fn helmert_row(m: usize, b: usize) -> Vec<f64> {
    let s = 1.0 / ((b * (b + 1)) as f64).sqrt();
    (0..m)
        .map(|j| {
            if j < b {
                s
            } else if j == b {
                -(b as f64) * s
            } else {
                0.0
            }
        })
        .collect()
}

/// Lattice points `(p, q)` with `(p*sx)^2 + (q*sy)^2 <= bound`; with
/// `signed` the torus representatives (one of each `+-` pair) are listed.
fn lattice(sx: f64, sy: f64, bound: f64, signed: bool) -> Vec<(i64, i64, f64)> {
    let pmax = (bound.sqrt() / sx).floor() as i64;
    let qmax = (bound.sqrt() / sy).floor() as i64;
    let mut out = Vec::new();
    for p in 0..=pmax {
        let qlo = if signed && p > 0 { -qmax } else { 0 };
        for q in qlo..=qmax {
            let lambda = (p as f64 * sx).powi(2) + (q as f64 * sy).powi(2);
            if lambda <= bound {
                out.push((p, q, lambda));
            }
        }
    }
    out
}

/// Metric graph whose parts are all attached once to a single vertex:
/// circles through the vertex (loops) and segments with one glued end.
struct Star {
    /// `(part, glued coordinate, length)`
    loops: Vec<(usize, f64, f64)>,
    /// `(part, glued at the far end, length)`
    segments: Vec<(usize, bool, f64)>,
}

fn single_vertex_star(space: &SpaceModel) -> Option<Star> {
    if space.gluing.len() != 1 {
        return None;
    }
    let mut star = Star {
        loops: Vec::new(),
        segments: Vec::new(),
    };
    for part in &space.parts {
        if part.glued.len() != 1 {
            return None;
        }
        let Locus::Point(at) = part.glued[0].1 else {
            return None;
        };
        match part.shape {
            Shape::Circle { length } => star.loops.push((part.id, at, length)),
            Shape::Segment { length } => star.segments.push((part.id, at != 0.0, length)),
            _ => return None,
        }
    }
    Some(star)
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (1.0 + x.abs()) {
        Some(r as i64)
    } else {
        None
    }
}

impl Star {
    fn secular(&self, w: f64) -> f64 {
        let loops: f64 = self.loops.iter().map(|(_, _, l)| 2.0 * (0.5 * w * l).tan()).sum();
        let segs: f64 = self.segments.iter().map(|(_, _, l)| (w * l).tan()).sum();
        loops + segs
    }

    /// Wave numbers in `(0, wmax]` where some term of the secular function
    /// has a pole, sorted and deduplicated.
    fn poles(&self, wmax: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for &(_, _, l) in &self.loops {
            let mut n = 0;
            loop {
                let w = (2 * n + 1) as f64 * PI / l;
                if w > wmax {
                    break;
                }
                out.push(w);
                n += 1;
            }
        }
        for &(_, _, l) in &self.segments {
            let mut n = 0;
            loop {
                let w = (n as f64 + 0.5) * PI / l;
                if w > wmax {
                    break;
                }
                out.push(w);
                n += 1;
            }
        }
        dedup_sorted(out)
    }

    /// Wave numbers where some part admits a mode vanishing at the vertex.
    fn candidates(&self, wmax: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for &(_, _, l) in &self.loops {
            let mut n = 1;
            loop {
                let w = n as f64 * PI / l;
                if w > wmax {
                    break;
                }
                out.push(w);
                n += 1;
            }
        }
        for &(_, _, l) in &self.segments {
            let mut n = 0;
            loop {
                let w = (n as f64 + 0.5) * PI / l;
                if w > wmax {
                    break;
                }
                out.push(w);
                n += 1;
            }
        }
        dedup_sorted(out)
    }

    fn loop_offset(at: f64, l: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (x - at).rem_euclid(l)
    }

    fn segment_depth(far: bool, l: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| if far { l - x } else { x }
    }

    /// Eigenfunction that is nonzero at the vertex.
    fn vertex_mode(&self, w: f64) -> EigenFn {
        let loops: Vec<(usize, f64, f64)> = self.loops.clone();
        let segs: Vec<(usize, bool, f64)> = self.segments.clone();
        Arc::new(move |p: &PointRef| {
            for &(part, at, l) in &loops {
                if part == p.part {
                    let x = Self::loop_offset(at, l)(p.coords[0]);
                    return (w * (x - 0.5 * l)).cos() / (0.5 * w * l).cos();
                }
            }
            for &(part, far, l) in &segs {
                if part == p.part {
                    let t = Self::segment_depth(far, l)(p.coords[0]);
                    return (w * (l - t)).cos() / (w * l).cos();
                }
            }
            0.0
        })
    }

    /// Modes vanishing at the vertex for wave number `w`.
    fn vertex_free_modes(&self, w: f64) -> Vec<EigenFn> {
        let mut basis = Vec::new();
        // (part, weight in the Kirchhoff sum, local coordinate map)
        let mut active: Vec<(usize, f64, LocalMap)> = Vec::new();
        for &(part, at, l) in &self.loops {
            if let Some(n) = near_integer(w * l / PI) {
                let local: LocalMap = Arc::new(Self::loop_offset(at, l));
                if n % 2 == 0 {
                    let lc = local.clone();
                    basis.push(on_part(part, f1(move |x| (w * lc(x)).sin())));
                } else {
                    active.push((part, 2.0, local));
                }
            }
        }
        for &(part, far, l) in &self.segments {
            if near_integer(w * l / PI - 0.5).is_some() {
                active.push((part, 1.0, Arc::new(Self::segment_depth(far, l))));
            }
        }
        if active.len() >= 2 {
            let (p1, g1, m1) = active[0].clone();
            for (pb, gb, mb) in active.iter().skip(1).cloned() {
                let m1 = m1.clone();
                basis.push(Arc::new(move |p: &PointRef| {
                    if p.part == p1 {
                        gb * (w * m1(p.coords[0])).sin()
                    } else if p.part == pb {
                        -g1 * (w * mb(p.coords[0])).sin()
                    } else {
                        0.0
                    }
                }) as EigenFn);
            }
        }
        basis
    }

    fn modes_below(&self, bound: f64) -> Result<Vec<Mode>> {
        let wmax = bound.sqrt();
        let mut modes = vec![Mode {
            lambda: 0.0,
            provenance: Provenance::ClosedForm,
            basis: vec![f1(|_| 1.0)],
        }];
        // one secular root between consecutive poles, none before the first
        let mut limit = wmax * 1.5 + 10.0;
        let mut poles = self.poles(limit);
        while poles.last().is_none_or(|&p| p <= wmax) {
            limit *= 2.0;
            poles = self.poles(limit);
        }
        for pair in poles.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a >= wmax {
                break;
            }
            let w = bisect(|w| self.secular(w), a, b);
            if w <= wmax {
                modes.push(Mode {
                    lambda: w * w,
                    provenance: Provenance::SecularRoot,
                    basis: vec![self.vertex_mode(w)],
                });
            }
        }
        for w in self.candidates(wmax) {
            let basis = self.vertex_free_modes(w);
            if !basis.is_empty() {
                modes.push(Mode {
                    lambda: w * w,
                    provenance: Provenance::ClosedForm,
                    basis,
                });
            }
        }
        Ok(modes)
    }
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs().max(1.0));
    v
}

/// Root of an increasing function with a pole at each end of `(a, b)`.
fn bisect(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        // just right of a pole the function is very negative
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
