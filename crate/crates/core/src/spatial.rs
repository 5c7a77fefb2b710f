//! Uniform bucket grid over one part's chart, for fixed-radius neighbor
//! queries.

use crate::geometry::Shape;

#[derive(Clone, Debug)]
pub struct BucketIndex {
    shape: Shape,
    counts: [usize; 2],
    width: [f64; 2],
    starts: Vec<usize>,
    items: Vec<(usize, [f64; 2])>,
}

impl BucketIndex {
    /// Indexes `points` (tagged with caller ids) using buckets whose edge is
    /// at least `cell` (capped so the grid stays small for tiny cells).
    pub fn new(shape: Shape, cell: f64, points: impl IntoIterator<Item = (usize, [f64; 2])>) -> Self {
        let ext = shape.extents();
        let dim = shape.dim();
        let limit = if dim == 1 { 1 << 22 } else { 1 << 11 };
        let mut counts = [1usize; 2];
        let mut width = [ext[0].max(f64::MIN_POSITIVE), 1.0];
        for a in 0..dim {
            let n = if cell > 0.0 && cell.is_finite() {
                ((ext[a] / cell).floor() as usize).clamp(1, limit)
            } else {
                1
            };
            counts[a] = n;
            width[a] = ext[a] / n as f64;
        }
        let pts: Vec<(usize, [f64; 2])> = points.into_iter().collect();
        let nbuckets = counts[0] * counts[1];
        let mut starts = vec![0usize; nbuckets + 1];
        let keys: Vec<usize> = pts
            .iter()
            .map(|(_, c)| Self::key_of(counts, width, c))
            .collect();
        for &k in &keys {
            starts[k + 1] += 1;
        }
        for b in 0..nbuckets {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut items = vec![(0usize, [0.0; 2]); pts.len()];
        for (p, &k) in pts.into_iter().zip(&keys) {
            items[fill[k]] = p;
            fill[k] += 1;
        }
        BucketIndex {
            shape,
            counts,
            width,
            starts,
            items,
        }
    }

    fn axis_bucket(counts: [usize; 2], width: [f64; 2], a: usize, v: f64) -> usize {
        let b = (v / width[a]).floor();
        if b <= 0.0 {
            0
        } else {
            (b as usize).min(counts[a] - 1)
        }
    }

    fn key_of(counts: [usize; 2], width: [f64; 2], c: &[f64; 2]) -> usize {
        let bx = Self::axis_bucket(counts, width, 0, c[0]);
        let by = if counts[1] > 1 {
            Self::axis_bucket(counts, width, 1, c[1])
        } else {
            0
        };
        by * counts[0] + bx
    }

    fn axis_range(&self, a: usize, v: f64, r: f64) -> Vec<usize> {
        let n = self.counts[a];
        if n == 1 {
            return vec![0];
        }
        let b = Self::axis_bucket(self.counts, self.width, a, v) as isize;
        let span = (r / self.width[a]).ceil() as isize;
        if self.shape.is_periodic() {
            if 2 * span + 1 >= n as isize {
                return (0..n).collect();
            }
            (b - span..=b + span)
                .map(|k| k.rem_euclid(n as isize) as usize)
                .collect()
        } else {
            let lo = (b - span).max(0) as usize;
            let hi = ((b + span) as usize).min(n - 1);
            (lo..=hi).collect()
        }
    }

    /// Calls `f(id, coords)` for every indexed point whose bucket may hold
    /// points within distance `r` of `c`. Callers filter by exact distance.
    pub fn for_each_candidate(&self, c: &[f64; 2], r: f64, mut f: impl FnMut(usize, &[f64; 2])) {
        let xs = self.axis_range(0, c[0], r);
        let ys = if self.counts[1] > 1 {
            self.axis_range(1, c[1], r)
        } else {
            vec![0]
        };
        for &by in &ys {
            for &bx in &xs {
                let k = by * self.counts[0] + bx;
                for (id, p) in &self.items[self.starts[k]..self.starts[k + 1]] {
                    f(*id, p);
                }
            }
        }
    }

    /// Nearest indexed point within distance `r` (ties to the lower id).
    pub fn nearest_within(&self, c: &[f64; 2], r: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_candidate(c, r, |id, p| {
            let d = self.shape.distance(c, p);
            if d > r {
                return;
            }
            match best {
                Some((bid, bd)) if bd < d || (bd == d && bid < id) => {}
                _ => best = Some((id, d)),
            }
        });
        best
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(shape: Shape, pts: &[[f64; 2]], c: &[f64; 2], r: f64) -> Vec<usize> {
        (0..pts.len())
            .filter(|&i| shape.distance(c, &pts[i]) < r)
            .collect()
    }

    #[test]
    fn candidates_cover_exact_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in [
            Shape::Segment { length: 1.0 },
            Shape::Circle { length: 1.0 },
            Shape::Rectangle {
                width: 1.0,
                height: 0.7,
            },
            Shape::Torus {
                width: 1.0,
                height: 0.7,
            },
        ] {
            let ext = shape.extents();
            let pts: Vec<[f64; 2]> = (0..400)
                .map(|_| [rng.random::<f64>() * ext[0], rng.random::<f64>() * ext[1]])
                .collect();
            let idx = BucketIndex::new(shape, 0.1, pts.iter().copied().enumerate());
            for _ in 0..50 {
                let c = [rng.random::<f64>() * ext[0], rng.random::<f64>() * ext[1]];
                for r in [0.05, 0.1, 0.27] {
                    let mut got = Vec::new();
                    idx.for_each_candidate(&c, r, |id, p| {
                        if shape.distance(&c, p) < r {
                            got.push(id)
                        }
                    });
                    got.sort_unstable();
                    assert_eq!(got, brute(shape, &pts, &c, r), "{shape:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let shape = Shape::Segment { length: 1.0 };
        let idx = BucketIndex::new(shape, 0.1, vec![(4, [0.4, 0.0]), (2, [0.6, 0.0])]);
        assert_eq!(idx.nearest_within(&[0.5, 0.0], 0.2).map(|x| x.0), Some(2));
        assert_eq!(idx.nearest_within(&[0.5, 0.0], 0.05), None);
    }
}
