//! Catalog of exactly computable model spaces and their metric primitives.
//!
//! A [`SpaceModel`] is a collection of flat parts, optionally glued together
//! along codimension-one loci: points of 1-D parts (metric graphs) or full
//! rectangle edges (book pages). Distances are always measured inside a
//! single part; crossing a gluing locus is expressed through mirror images.

mod shape;

pub use shape::{BoundaryMask, Edge, Shape, INFINITE};

use crate::error::{Error, Result};

pub type PartId = usize;

/// Exponent of the collar `rho^(3/4)` inside which mirror images exist.
pub const COLLAR_EXPONENT: f64 = 0.75;

/// A point given by its part and chart coordinates. 1-D parts use
/// `coords[0]` as arclength and keep `coords[1] = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRef {
    pub part: PartId,
    pub coords: [f64; 2],
}

impl PointRef {
    pub fn on(part: PartId, s: f64) -> Self {
        PointRef {
            part,
            coords: [s, 0.0],
        }
    }

    pub fn planar(part: PartId, x: f64, y: f64) -> Self {
        PointRef {
            part,
            coords: [x, y],
        }
    }
}

/// Direction of travel away from a gluing locus along one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

/// Where a part touches a gluing vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Locus {
    /// A chart point of a 1-D part (segment end or marked circle point).
    Point(f64),
    /// A full edge of a rectangle part.
    Edge(Edge),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchEnd {
    pub part: PartId,
    pub locus: Locus,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingVertex {
    pub id: usize,
    pub branch_ends: Vec<BranchEnd>,
}

impl GluingVertex {
    /// Distinct `(part, locus)` attachments of this vertex.
    pub fn attachments(&self) -> Vec<(PartId, Locus)> {
        let mut out: Vec<(PartId, Locus)> = Vec::new();
        for b in &self.branch_ends {
            if !out.iter().any(|(p, l)| *p == b.part && *l == b.locus) {
                out.push((b.part, b.locus));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartDescriptor {
    pub id: PartId,
    pub shape: Shape,
    /// Manifold boundary of the part itself (gluing loci included).
    pub boundary: BoundaryMask,
    /// `(vertex id, locus)` for every gluing attachment of this part.
    pub glued: Vec<(usize, Locus)>,
}

/// Catalog label of a space, with its defining parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    Interval { length: f64 },
    Circle { length: f64 },
    FlatRectangle { width: f64, height: f64 },
    FlatTorus { width: f64, height: f64 },
    MetricGraph,
    BookPages { pages: usize, width: f64, height: f64 },
}

/// A space from the catalog. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceModel {
    pub kind: SpaceKind,
    pub parts: Vec<PartDescriptor>,
    pub gluing: Vec<GluingVertex>,
    pub dim: usize,
    /// Whether reflected distances also reflect at boundary portions that
    /// lie in the gluing locus.
    pub reflect_at_gluing: bool,
}

/// Attachment of a 1-D part to a metric-graph vertex: the part and the
/// chart coordinate of the glued point.
pub type GraphAttachment = (PartId, f64);

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} must be positive and finite, got {v}")))
    }
}

fn single_part(kind: SpaceKind, shape: Shape) -> SpaceModel {
    SpaceModel {
        kind,
        dim: shape.dim(),
        parts: vec![PartDescriptor {
            id: 0,
            shape,
            boundary: shape.full_boundary(),
            glued: Vec::new(),
        }],
        gluing: Vec::new(),
        reflect_at_gluing: true,
    }
}

impl SpaceModel {
    pub fn interval(length: f64) -> Result<Self> {
        positive("interval length", length)?;
        Ok(single_part(SpaceKind::Interval { length }, Shape::Segment { length }))
    }

    pub fn circle(length: f64) -> Result<Self> {
        positive("circle length", length)?;
        Ok(single_part(SpaceKind::Circle { length }, Shape::Circle { length }))
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        positive("rectangle width", width)?;
        positive("rectangle height", height)?;
        Ok(single_part(
            SpaceKind::FlatRectangle { width, height },
            Shape::Rectangle { width, height },
        ))
    }

    pub fn torus(width: f64, height: f64) -> Result<Self> {
        positive("torus width", width)?;
        positive("torus height", height)?;
        Ok(single_part(
            SpaceKind::FlatTorus { width, height },
            Shape::Torus { width, height },
        ))
    }

    /// Metric graph built from segments and circles. Each vertex lists the
    /// parts it glues together with the chart coordinate of the glued point
    /// (segment ends must be `0` or `L`).
    pub fn metric_graph(shapes: Vec<Shape>, vertices: Vec<Vec<GraphAttachment>>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::usage("metric graph needs at least one part"));
        }
        let mut parts = Vec::with_capacity(shapes.len());
        for (id, shape) in shapes.into_iter().enumerate() {
            match shape {
                Shape::Segment { length } | Shape::Circle { length } => {
                    positive("metric graph part length", length)?
                }
                _ => {
                    return Err(Error::usage(
                        "metric graph parts must be segments or circles",
                    ))
                }
            }
            parts.push(PartDescriptor {
                id,
                shape,
                boundary: shape.full_boundary(),
                glued: Vec::new(),
            });
        }
        let mut gluing = Vec::with_capacity(vertices.len());
        for (vid, attachments) in vertices.into_iter().enumerate() {
            let mut ends = Vec::new();
            for (part, at) in attachments {
                let p = parts.get_mut(part).ok_or_else(|| {
                    Error::usage(format!("vertex {vid} references unknown part {part}"))
                })?;
                match p.shape {
                    Shape::Segment { length } => {
                        let side = if at == 0.0 {
                            Side::Plus
                        } else if at == length {
                            Side::Minus
                        } else {
                            return Err(Error::usage(format!(
                                "segment {part} can only be glued at 0 or {length}, got {at}"
                            )));
                        };
                        ends.push(BranchEnd {
                            part,
                            locus: Locus::Point(at),
                            side,
                        });
                    }
                    Shape::Circle { length } => {
                        if !(0.0..length).contains(&at) {
                            return Err(Error::usage(format!(
                                "circle {part} gluing point {at} outside [0, {length})"
                            )));
                        }
                        for side in [Side::Plus, Side::Minus] {
                            ends.push(BranchEnd {
                                part,
                                locus: Locus::Point(at),
                                side,
                            });
                        }
                    }
                    _ => unreachable!(),
                }
                if p.glued.iter().any(|(_, l)| *l == Locus::Point(at)) {
                    return Err(Error::usage(format!(
                        "point {at} of part {part} is glued twice"
                    )));
                }
                p.glued.push((vid, Locus::Point(at)));
            }
            let v = GluingVertex {
                id: vid,
                branch_ends: ends,
            };
            if v.attachments().len() < 2 {
                return Err(Error::usage(format!(
                    "vertex {vid} must join at least two distinct branch ends"
                )));
            }
            gluing.push(v);
        }
        Ok(SpaceModel {
            kind: SpaceKind::MetricGraph,
            dim: 1,
            parts,
            gluing,
            reflect_at_gluing: true,
        })
    }

    /// Two circles glued at their coordinate-0 points.
    pub fn two_circles(first: f64, second: f64) -> Result<Self> {
        Self::metric_graph(
            vec![
                Shape::Circle { length: first },
                Shape::Circle { length: second },
            ],
            vec![vec![(0, 0.0), (1, 0.0)]],
        )
    }

    /// A segment `[0, segment]` whose end at `segment` is glued to the
    /// coordinate-0 point of a circle. Part 0 is the segment, part 1 the
    /// circle.
    pub fn circle_with_segment(circle: f64, segment: f64) -> Result<Self> {
        Self::metric_graph(
            vec![
                Shape::Segment { length: segment },
                Shape::Circle { length: circle },
            ],
            vec![vec![(0, segment), (1, 0.0)]],
        )
    }

    /// `pages` copies of `[0,width] x [0,height]` sharing their `x = 0` edge.
    pub fn book_pages(pages: usize, width: f64, height: f64) -> Result<Self> {
        positive("page width", width)?;
        positive("page height", height)?;
        if pages < 2 {
            return Err(Error::usage("book needs at least two pages"));
        }
        let shape = Shape::Rectangle { width, height };
        let parts = (0..pages)
            .map(|id| PartDescriptor {
                id,
                shape,
                boundary: shape.full_boundary(),
                glued: vec![(0, Locus::Edge(Edge::Left))],
            })
            .collect();
        let ends = (0..pages)
            .map(|part| BranchEnd {
                part,
                locus: Locus::Edge(Edge::Left),
                side: Side::Plus,
            })
            .collect();
        Ok(SpaceModel {
            kind: SpaceKind::BookPages {
                pages,
                width,
                height,
            },
            dim: 2,
            parts,
            gluing: vec![GluingVertex {
                id: 0,
                branch_ends: ends,
            }],
            reflect_at_gluing: true,
        })
    }

    pub fn with_reflect_at_gluing(mut self, reflect: bool) -> Self {
        self.reflect_at_gluing = reflect;
        self
    }

    pub fn part(&self, id: PartId) -> Result<&PartDescriptor> {
        self.parts
            .get(id)
            .ok_or_else(|| Error::usage(format!("unknown part {id}")))
    }

    pub fn is_glued(&self) -> bool {
        !self.gluing.is_empty()
    }

    pub fn part_volume(&self, id: PartId) -> Result<f64> {
        Ok(self.part(id)?.shape.volume())
    }

    pub fn total_volume(&self) -> f64 {
        self.parts.iter().map(|p| p.shape.volume()).sum()
    }

    /// Boundary portions used for reflection in a part.
    pub fn reflecting_boundary(&self, id: PartId) -> BoundaryMask {
        let part = &self.parts[id];
        if self.reflect_at_gluing {
            return part.boundary;
        }
        part.glued
            .iter()
            .fold(part.boundary, |m, (_, locus)| match (*locus, part.shape) {
                (Locus::Point(at), Shape::Segment { .. }) => {
                    if at == 0.0 {
                        m.without(0)
                    } else {
                        m.without(1)
                    }
                }
                (Locus::Edge(e), _) => m.without(e.bit()),
                _ => m,
            })
    }

    /// Manifold boundary of a part minus its gluing loci.
    pub fn free_boundary(&self, id: PartId) -> BoundaryMask {
        let part = &self.parts[id];
        part.glued
            .iter()
            .fold(part.boundary, |m, (_, locus)| match (*locus, part.shape) {
                (Locus::Point(at), Shape::Segment { .. }) => {
                    if at == 0.0 {
                        m.without(0)
                    } else {
                        m.without(1)
                    }
                }
                (Locus::Edge(e), _) => m.without(e.bit()),
                _ => m,
            })
    }

    /// Checks that `p` lies in its part's chart domain.
    pub fn check_point(&self, p: &PointRef) -> Result<()> {
        let part = self.part(p.part)?;
        if !part.shape.in_chart(&p.coords) {
            return Err(Error::usage(format!(
                "point {:?} outside the chart of part {}",
                p.coords, p.part
            )));
        }
        Ok(())
    }

    /// Checks that `p` is a valid net vertex: in its chart, off the manifold
    /// boundary and off every gluing locus.
    pub fn check_interior(&self, p: &PointRef) -> Result<()> {
        self.check_point(p)?;
        let part = &self.parts[p.part];
        if part.shape.on_boundary(&p.coords) {
            return Err(Error::usage(format!(
                "point {:?} lies on the boundary of part {}",
                p.coords, p.part
            )));
        }
        if self.distance_to_gluing(p) == 0.0 {
            return Err(Error::usage(format!(
                "point {:?} lies on a gluing locus of part {}",
                p.coords, p.part
            )));
        }
        Ok(())
    }

    /// Intrinsic distance inside a single part.
    pub fn part_distance(&self, p: &PointRef, q: &PointRef) -> Result<f64> {
        if p.part != q.part {
            return Err(Error::usage(format!(
                "part_distance needs points of one part, got {} and {}",
                p.part, q.part
            )));
        }
        Ok(self.part(p.part)?.shape.distance(&p.coords, &q.coords))
    }

    /// Reflected distance inside a single part: the shortest path that
    /// touches the part's (reflecting) boundary. [`INFINITE`] when that
    /// boundary is empty.
    pub fn reflected_part_distance(&self, p: &PointRef, q: &PointRef) -> Result<f64> {
        if p.part != q.part {
            return Err(Error::usage(format!(
                "reflected distance needs points of one part, got {} and {}",
                p.part, q.part
            )));
        }
        let shape = self.part(p.part)?.shape;
        for x in [p, q] {
            if shape.on_boundary(&x.coords) {
                return Err(Error::usage(format!(
                    "reflected distance is defined for interior points only, got {:?}",
                    x.coords
                )));
            }
        }
        Ok(shape.reflected_distance(&p.coords, &q.coords, self.reflecting_boundary(p.part)))
    }

    /// Offset and side of `p` relative to one locus of its own part.
    fn locus_offset(&self, p: &PointRef, locus: Locus) -> (f64, Side, f64) {
        let shape = self.parts[p.part].shape;
        match (locus, shape) {
            (Locus::Point(at), Shape::Circle { length }) => {
                let mut delta = (p.coords[0] - at) % length;
                if delta < 0.0 {
                    delta += length;
                }
                if delta <= 0.5 * length {
                    (delta, Side::Plus, 0.0)
                } else {
                    (length - delta, Side::Minus, 0.0)
                }
            }
            (Locus::Point(at), Shape::Segment { .. }) => {
                let s = (p.coords[0] - at).abs();
                let side = if at == 0.0 { Side::Plus } else { Side::Minus };
                (s, side, 0.0)
            }
            (Locus::Edge(e), Shape::Rectangle { width, height }) => {
                let (depth, t) = e.frame(width, height, &p.coords);
                (depth, Side::Plus, t)
            }
            _ => (INFINITE, Side::Plus, 0.0),
        }
    }

    /// Distance from `p` to the gluing loci of its part.
    pub fn distance_to_gluing(&self, p: &PointRef) -> f64 {
        self.parts[p.part]
            .glued
            .iter()
            .map(|(_, l)| self.locus_offset(p, *l).0)
            .fold(INFINITE, f64::min)
    }

    /// `(distance to the free manifold boundary, distance to the gluing
    /// locus)`, both measured inside `p`'s part.
    pub fn boundary_offsets(&self, p: &PointRef) -> Result<(f64, f64)> {
        self.check_point(p)?;
        let shape = self.parts[p.part].shape;
        let free = shape.distance_to_boundary(&p.coords, self.free_boundary(p.part));
        Ok((free, self.distance_to_gluing(p)))
    }

    /// Largest distance between distinct loci sharing a part that still
    /// keeps their collars apart. `INFINITE` when no part carries two loci.
    pub fn gluing_separation(&self) -> f64 {
        let mut sep = INFINITE;
        for part in &self.parts {
            for (a, (_, la)) in part.glued.iter().enumerate() {
                for (_, lb) in part.glued.iter().skip(a + 1) {
                    let d = match (*la, *lb, part.shape) {
                        (Locus::Point(x), Locus::Point(y), shape) => {
                            shape.distance(&[x, 0.0], &[y, 0.0])
                        }
                        (Locus::Edge(_), Locus::Edge(_), _) => 0.0,
                        _ => INFINITE,
                    };
                    sep = sep.min(d);
                }
            }
        }
        sep
    }

    /// Validates `rho` against the gluing geometry: collars of different
    /// loci must not meet, and mirror images must stay inside their parts.
    pub fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::usage(format!("rho must be positive, got {rho}")));
        }
        if !self.is_glued() {
            return Ok(());
        }
        let collar = rho.powf(COLLAR_EXPONENT);
        let need = 2.0 * collar + 2.0 * rho;
        let sep = self.gluing_separation();
        if need >= sep {
            return Err(Error::usage(format!(
                "rho = {rho} too large: gluing loci are {sep} apart but need more than {need}"
            )));
        }
        for part in self.parts.iter().filter(|p| !p.glued.is_empty()) {
            let room = match part.shape {
                Shape::Circle { length } => 0.5 * length,
                Shape::Segment { length } => length,
                Shape::Rectangle { width, height } => part
                    .glued
                    .iter()
                    .map(|(_, l)| match l {
                        Locus::Edge(Edge::Left | Edge::Right) => width,
                        Locus::Edge(_) => height,
                        Locus::Point(_) => INFINITE,
                    })
                    .fold(INFINITE, f64::min),
                Shape::Torus { .. } => INFINITE,
            };
            if collar >= room {
                return Err(Error::usage(format!(
                    "rho = {rho} too large: mirror collar {collar} does not fit in part {}",
                    part.id
                )));
            }
        }
        Ok(())
    }

    /// Mirror images of `p` in every part glued to its own part, for points
    /// within `rho^(3/4)` of the shared locus. The first entry is `p` itself.
    ///
    /// Images keep the distance to the locus. When the target part meets
    /// the locus from two sides (a circle through the vertex), the side is
    /// fixed: a two-sided source keeps its side, a one-sided source maps to
    /// [`Side::Plus`].
    pub fn mirror_images(&self, p: &PointRef, rho: f64) -> Result<Vec<PointRef>> {
        self.check_point(p)?;
        let collar = rho.powf(COLLAR_EXPONENT);
        let mut out = vec![*p];
        let part = &self.parts[p.part];
        for (vid, locus) in &part.glued {
            let (s, side, t) = self.locus_offset(p, *locus);
            if s >= collar {
                continue;
            }
            let vertex = &self.gluing[*vid];
            let own_sides = vertex
                .branch_ends
                .iter()
                .filter(|b| b.part == p.part && b.locus == *locus)
                .count();
            let canonical_side = if own_sides > 1 { side } else { Side::Plus };
            for (target, tlocus) in vertex.attachments() {
                if target == p.part || out.iter().any(|q| q.part == target) {
                    continue;
                }
                let sides: Vec<Side> = vertex
                    .branch_ends
                    .iter()
                    .filter(|b| b.part == target && b.locus == tlocus)
                    .map(|b| b.side)
                    .collect();
                let tside = if sides.contains(&canonical_side) {
                    canonical_side
                } else {
                    sides[0]
                };
                out.push(self.place(target, tlocus, s, tside, t));
            }
        }
        Ok(out)
    }

    fn place(&self, part: PartId, locus: Locus, s: f64, side: Side, t: f64) -> PointRef {
        match (locus, self.parts[part].shape) {
            (Locus::Point(at), Shape::Circle { length }) => {
                let mut x = match side {
                    Side::Plus => at + s,
                    Side::Minus => at - s,
                };
                if x < 0.0 {
                    x += length;
                }
                if x >= length {
                    x -= length;
                }
                PointRef::on(part, x)
            }
            (Locus::Point(at), Shape::Segment { .. }) => {
                if at == 0.0 {
                    PointRef::on(part, s)
                } else {
                    PointRef::on(part, at - s)
                }
            }
            (Locus::Edge(e), Shape::Rectangle { width, height }) => {
                let c = e.unframe(width, height, s, t);
                PointRef::planar(part, c[0], c[1])
            }
            _ => unreachable!("locus kind does not match part shape"),
        }
    }

    /// Short human-readable label used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            SpaceKind::Interval { length } => format!("interval({length})"),
            SpaceKind::Circle { length } => format!("circle({length})"),
            SpaceKind::FlatRectangle { width, height } => format!("rectangle({width},{height})"),
            SpaceKind::FlatTorus { width, height } => format!("torus({width},{height})"),
            SpaceKind::BookPages {
                pages,
                width,
                height,
            } => format!("book_pages({pages},{width},{height})"),
            SpaceKind::MetricGraph => {
                let parts: Vec<String> = self
                    .parts
                    .iter()
                    .map(|p| match p.shape {
                        Shape::Segment { length } => format!("S{length}"),
                        Shape::Circle { length } => format!("C{length}"),
                        _ => "?".into(),
                    })
                    .collect();
                format!("metric_graph({})", parts.join("+"))
            }
        }
    }
}

/// Volume of the unit ball in `R^n` for the dimensions used here.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            // pi^(n/2) / Gamma(n/2 + 1) via the two-step recurrence
            let mut v = [1.0, 2.0];
            for k in 2..=n {
                let next = v[0] * 2.0 * std::f64::consts::PI / k as f64;
                v = [v[1], next];
            }
            v[1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn part_distance_examples() {
        let i = SpaceModel::interval(1.0).unwrap();
        assert!(close(
            i.part_distance(&PointRef::on(0, 0.2), &PointRef::on(0, 0.7)).unwrap(),
            0.5
        ));
        let c = SpaceModel::circle(1.0).unwrap();
        assert!(close(
            c.part_distance(&PointRef::on(0, 0.1), &PointRef::on(0, 0.9)).unwrap(),
            0.2
        ));
        let r = SpaceModel::rectangle(1.0, 1.0).unwrap();
        assert!(close(
            r.part_distance(&PointRef::planar(0, 0.0, 0.0), &PointRef::planar(0, 0.75, 1.0))
                .unwrap(),
            1.25
        ));
    }

    #[test]
    fn part_distance_rejects_mixed_parts() {
        let g = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let err = g.part_distance(&PointRef::on(0, 0.1), &PointRef::on(1, 0.1));
        assert!(matches!(err, Err(Error::Usage(_))));
    }

    #[test]
    fn reflected_distance_examples() {
        let i = SpaceModel::interval(1.0).unwrap();
        let d = i
            .reflected_part_distance(&PointRef::on(0, 0.1), &PointRef::on(0, 0.2))
            .unwrap();
        assert!(close(d, 0.3));
        let c = SpaceModel::circle(1.0).unwrap();
        let d = c
            .reflected_part_distance(&PointRef::on(0, 0.3), &PointRef::on(0, 0.4))
            .unwrap();
        assert_eq!(d, INFINITE);
        let r = SpaceModel::rectangle(1.0, 1.0).unwrap();
        let d = r
            .reflected_part_distance(&PointRef::planar(0, 0.1, 0.5), &PointRef::planar(0, 0.2, 0.5))
            .unwrap();
        assert!(close(d, 0.3));
        let err = i.reflected_part_distance(&PointRef::on(0, 0.0), &PointRef::on(0, 0.2));
        assert!(matches!(err, Err(Error::Usage(_))));
    }

    #[test]
    fn mirror_images_two_circles() {
        let g = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let imgs = g.mirror_images(&PointRef::on(0, 0.05), 0.2).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[0], PointRef::on(0, 0.05));
        assert_eq!(imgs[1].part, 1);
        assert!(close(imgs[1].coords[0], 0.05));
        // minus side stays on the minus side
        let imgs = g.mirror_images(&PointRef::on(0, 0.97), 0.2).unwrap();
        assert!(close(imgs[1].coords[0], 0.97));
        let imgs = g.mirror_images(&PointRef::on(0, 0.5), 0.2).unwrap();
        assert_eq!(imgs, vec![PointRef::on(0, 0.5)]);
    }

    #[test]
    fn mirror_images_segment_to_circle_uses_plus_side() {
        let g = SpaceModel::circle_with_segment(1.0, 1.0).unwrap();
        let imgs = g.mirror_images(&PointRef::on(0, 0.95), 0.2).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[1].part, 1);
        assert!(close(imgs[1].coords[0], 0.05));
        // and back from either circle side onto the segment
        let back = g.mirror_images(&PointRef::on(1, 0.95), 0.2).unwrap();
        assert!(close(back[1].coords[0], 0.95));
    }

    #[test]
    fn mirror_images_book_pages() {
        let b = SpaceModel::book_pages(3, 1.0, 1.0).unwrap();
        let imgs = b.mirror_images(&PointRef::planar(1, 0.02, 0.4), 0.1).unwrap();
        assert_eq!(imgs.len(), 3);
        for q in &imgs[1..] {
            assert_ne!(q.part, 1);
            assert!(close(q.coords[0], 0.02) && close(q.coords[1], 0.4));
        }
    }

    #[test]
    fn boundary_offsets_examples() {
        let i = SpaceModel::interval(1.0).unwrap();
        assert_eq!(i.boundary_offsets(&PointRef::on(0, 0.3)).unwrap(), (0.3, INFINITE));
        let g = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let (b, s) = g.boundary_offsets(&PointRef::on(0, 0.1)).unwrap();
        assert_eq!(b, INFINITE);
        assert!(close(s, 0.1));
        let cs = SpaceModel::circle_with_segment(1.0, 1.0).unwrap();
        let (b, s) = cs.boundary_offsets(&PointRef::on(0, 0.25)).unwrap();
        assert!(close(b, 0.25) && close(s, 0.75));
    }

    #[test]
    fn volumes() {
        assert_eq!(SpaceModel::interval(1.0).unwrap().total_volume(), 1.0);
        let g = SpaceModel::two_circles(2.0, 1.0).unwrap();
        assert_eq!(g.total_volume(), 3.0);
        assert_eq!(g.part_volume(0).unwrap(), 2.0);
        assert_eq!(SpaceModel::book_pages(3, 1.0, 1.0).unwrap().total_volume(), 3.0);
    }

    #[test]
    fn reflect_at_gluing_switch() {
        let cs = SpaceModel::circle_with_segment(1.0, 1.0).unwrap();
        let (p, q) = (PointRef::on(0, 0.9), PointRef::on(0, 0.95));
        assert!(close(cs.reflected_part_distance(&p, &q).unwrap(), 0.15));
        let cs = cs.with_reflect_at_gluing(false);
        assert!(close(cs.reflected_part_distance(&p, &q).unwrap(), 1.85));
    }

    #[test]
    fn invalid_constructions() {
        assert!(SpaceModel::interval(0.0).is_err());
        assert!(SpaceModel::book_pages(1, 1.0, 1.0).is_err());
        assert!(SpaceModel::metric_graph(
            vec![Shape::Segment { length: 1.0 }, Shape::Segment { length: 1.0 }],
            vec![vec![(0, 0.5), (1, 0.0)]]
        )
        .is_err());
        assert!(SpaceModel::metric_graph(
            vec![Shape::Circle { length: 1.0 }],
            vec![vec![(0, 0.0)]]
        )
        .is_err());
    }

    #[test]
    fn rho_guard() {
        let g = SpaceModel::two_circles(1.0, 1.0).unwrap();
        assert!(g.check_rho(0.05).is_ok());
        assert!(g.check_rho(0.6).is_err());
        let path = SpaceModel::metric_graph(
            vec![
                Shape::Segment { length: 1.0 },
                Shape::Segment { length: 0.3 },
                Shape::Segment { length: 1.0 },
            ],
            vec![vec![(0, 1.0), (1, 0.0)], vec![(1, 0.3), (2, 0.0)]],
        )
        .unwrap();
        assert!((path.gluing_separation() - 0.3).abs() < 1e-15);
        assert!(path.check_rho(0.05).is_err());
        assert!(path.check_rho(0.01).is_ok());
    }

    #[test]
    fn unit_balls() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }
}
