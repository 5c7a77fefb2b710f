//! Flat model shapes and their intrinsic metrics.

use std::cmp::Ordering;

/// Distance value used when a set is empty (no boundary to reflect at, no
/// gluing locus to measure to).
pub const INFINITE: f64 = f64::INFINITY;

/// Which portions of a part's manifold boundary take part in reflection.
///
/// Segments use bit 0 for the end at 0 and bit 1 for the end at `L`.
/// Rectangles use one bit per [`Edge`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BoundaryMask(pub u8);

impl BoundaryMask {
    pub const NONE: BoundaryMask = BoundaryMask(0);

    pub fn contains(self, bit: u8) -> bool {
        self.0 & (1 << bit) != 0
    }

    pub fn with(self, bit: u8) -> Self {
        BoundaryMask(self.0 | (1 << bit))
    }

    pub fn without(self, bit: u8) -> Self {
        BoundaryMask(self.0 & !(1 << bit))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Rectangle edges in chart coordinates `[0,w] x [0,h]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    /// `x = 0`
    Left,
    /// `x = w`
    Right,
    /// `y = 0`
    Bottom,
    /// `y = h`
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn bit(self) -> u8 {
        match self {
            Edge::Left => 0,
            Edge::Right => 1,
            Edge::Bottom => 2,
            Edge::Top => 3,
        }
    }

    /// `(depth, tangential)` coordinates of `c` relative to this edge.
    pub fn frame(self, w: f64, h: f64, c: &[f64; 2]) -> (f64, f64) {
        match self {
            Edge::Left => (c[0], c[1]),
            Edge::Right => (w - c[0], c[1]),
            Edge::Bottom => (c[1], c[0]),
            Edge::Top => (h - c[1], c[0]),
        }
    }

    /// Inverse of [`Edge::frame`].
    pub fn unframe(self, w: f64, h: f64, depth: f64, tangential: f64) -> [f64; 2] {
        match self {
            Edge::Left => [depth, tangential],
            Edge::Right => [w - depth, tangential],
            Edge::Bottom => [tangential, depth],
            Edge::Top => [tangential, h - depth],
        }
    }

    pub fn length(self, w: f64, h: f64) -> f64 {
        match self {
            Edge::Left | Edge::Right => h,
            Edge::Bottom | Edge::Top => w,
        }
    }
}

/// Shape of a single part. All shapes are flat, so every metric quantity is
/// available in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Segment { length: f64 },
    Circle { length: f64 },
    Rectangle { width: f64, height: f64 },
    Torus { width: f64, height: f64 },
}

fn canonical<'a>(a: &'a [f64; 2], b: &'a [f64; 2]) -> (&'a [f64; 2], &'a [f64; 2]) {
    // Fix the argument order so that d(a,b) and d(b,a) run the exact same
    // floating-point operations.
    let ord = a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]));
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn wrap_gap(d: f64, period: f64) -> f64 {
    let d = d.abs() % period;
    d.min(period - d)
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Segment { .. } | Shape::Circle { .. } => 1,
            Shape::Rectangle { .. } | Shape::Torus { .. } => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Shape::Segment { length } | Shape::Circle { length } => length,
            Shape::Rectangle { width, height } | Shape::Torus { width, height } => width * height,
        }
    }

    /// Chart extents `[ext0, ext1]` (`ext1 = 0` for 1-D shapes).
    pub fn extents(&self) -> [f64; 2] {
        match *self {
            Shape::Segment { length } | Shape::Circle { length } => [length, 0.0],
            Shape::Rectangle { width, height } | Shape::Torus { width, height } => [width, height],
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Shape::Circle { .. } | Shape::Torus { .. })
    }

    /// Full manifold boundary of the shape.
    pub fn full_boundary(&self) -> BoundaryMask {
        match self {
            Shape::Segment { .. } => BoundaryMask(0b11),
            Shape::Rectangle { .. } => BoundaryMask(0b1111),
            Shape::Circle { .. } | Shape::Torus { .. } => BoundaryMask::NONE,
        }
    }

    /// True when `c` lies in the chart domain (closed for segments and
    /// rectangles, half-open for periodic shapes).
    pub fn in_chart(&self, c: &[f64; 2]) -> bool {
        let ok = |v: f64| v.is_finite();
        match *self {
            Shape::Segment { length } => ok(c[0]) && (0.0..=length).contains(&c[0]),
            Shape::Circle { length } => ok(c[0]) && (0.0..length).contains(&c[0]),
            Shape::Rectangle { width, height } => {
                ok(c[0])
                    && ok(c[1])
                    && (0.0..=width).contains(&c[0])
                    && (0.0..=height).contains(&c[1])
            }
            Shape::Torus { width, height } => {
                ok(c[0]) && ok(c[1]) && (0.0..width).contains(&c[0]) && (0.0..height).contains(&c[1])
            }
        }
    }

    /// True when `c` is on the manifold boundary of the shape.
    pub fn on_boundary(&self, c: &[f64; 2]) -> bool {
        match *self {
            Shape::Segment { length } => c[0] <= 0.0 || c[0] >= length,
            Shape::Rectangle { width, height } => {
                c[0] <= 0.0 || c[0] >= width || c[1] <= 0.0 || c[1] >= height
            }
            Shape::Circle { .. } | Shape::Torus { .. } => false,
        }
    }

    /// Intrinsic distance within the shape.
    pub fn distance(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        let (a, b) = canonical(a, b);
        match *self {
            Shape::Segment { .. } => (a[0] - b[0]).abs(),
            Shape::Circle { length } => wrap_gap(a[0] - b[0], length),
            Shape::Rectangle { .. } => (a[0] - b[0]).hypot(a[1] - b[1]),
            Shape::Torus { width, height } => {
                wrap_gap(a[0] - b[0], width).hypot(wrap_gap(a[1] - b[1], height))
            }
        }
    }

    /// `inf_z (d(a,z) + d(z,b))` over the boundary portions selected by
    /// `mask`; [`INFINITE`] when that set is empty.
    pub fn reflected_distance(&self, a: &[f64; 2], b: &[f64; 2], mask: BoundaryMask) -> f64 {
        let (a, b) = canonical(a, b);
        match *self {
            Shape::Segment { length } => {
                let mut best = INFINITE;
                if mask.contains(0) {
                    best = best.min(a[0] + b[0]);
                }
                if mask.contains(1) {
                    best = best.min((length - a[0]) + (length - b[0]));
                }
                best
            }
            Shape::Rectangle { width, height } => {
                let mut best = INFINITE;
                for edge in Edge::ALL {
                    if mask.contains(edge.bit()) {
                        best = best.min(edge_reflection(width, height, edge, a, b));
                    }
                }
                best
            }
            Shape::Circle { .. } | Shape::Torus { .. } => INFINITE,
        }
    }

    /// Distance from `c` to the boundary portions selected by `mask`.
    pub fn distance_to_boundary(&self, c: &[f64; 2], mask: BoundaryMask) -> f64 {
        match *self {
            Shape::Segment { length } => {
                let mut best = INFINITE;
                if mask.contains(0) {
                    best = best.min(c[0]);
                }
                if mask.contains(1) {
                    best = best.min(length - c[0]);
                }
                best
            }
            Shape::Rectangle { width, height } => Edge::ALL
                .iter()
                .filter(|e| mask.contains(e.bit()))
                .map(|e| e.frame(width, height, c).0)
                .fold(INFINITE, f64::min),
            Shape::Circle { .. } | Shape::Torus { .. } => INFINITE,
        }
    }
}

/// Minimum of `|a-z| + |z-b|` over `z` on one rectangle edge.
///
/// The straight path from the mirror image of `a` to `b` realises the
/// minimum when it crosses the edge inside the segment; otherwise the
/// objective is convex along the edge and the minimum sits at the nearer
/// corner.
fn edge_reflection(w: f64, h: f64, edge: Edge, a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let (da, ta) = edge.frame(w, h, a);
    let (db, tb) = edge.frame(w, h, b);
    let len = edge.length(w, h);
    let depth = da + db;
    if depth > 0.0 {
        let cross = ta + (tb - ta) * (da / depth);
        if (0.0..=len).contains(&cross) {
            return depth.hypot(tb - ta);
        }
        let corner = if cross < 0.0 { 0.0 } else { len };
        return da.hypot(ta - corner) + db.hypot(tb - corner);
    }
    (ta - tb).abs()
}
