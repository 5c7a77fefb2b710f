//! Graph Laplacians on epsilon-nets.
//!
//! `(Lu)_i = scale * sum_j m_ij mu_j (u_j - u_i)` with
//! `scale = 2(n+2) / (nu_n rho^(n+2))`. The multiplicity `m_ij` counts how
//! many of the balls attached to `x_i` contain `x_j`: the plain ball
//! (closed variant), plus the reflected ball (boundary variant), for every
//! mirror image of `x_i` (glued variant). Directed counts are symmetrised.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{unit_ball_volume, PointRef, SpaceModel};
use crate::sampling::Net;
use crate::sparse::CsrMatrix;
use crate::spatial::BucketIndex;
use crate::spectra::lanczos::SymOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Plain ball only.
    Closed,
    /// Plain and reflected ball in the point's own part.
    Boundary,
    /// Plain and reflected balls around every mirror image.
    Glued,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Closed => "closed",
            Variant::Boundary => "boundary",
            Variant::Glued => "glued",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Variant::Closed),
            "boundary" => Ok(Variant::Boundary),
            "glued" => Ok(Variant::Glued),
            other => Err(Error::Config(format!(
                "unknown variant `{other}` (expected closed, boundary or glued)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphLaplacian {
    pub dim: usize,
    pub rho: f64,
    pub scale: f64,
    pub weights: Vec<f64>,
    pub variant: Variant,
    /// Symmetric multiplicities `m_ij`, diagonal dropped.
    pub multiplicity: CsrMatrix,
    pub warnings: Vec<String>,
    pub exec: Exec,
}

/// `2(n+2) / (nu_n rho^(n+2))`.
pub fn laplacian_scale(dim: usize, rho: f64) -> f64 {
    2.0 * (dim as f64 + 2.0) / (unit_ball_volume(dim) * rho.powi(dim as i32 + 2))
}

/// The balls attached to `p` by the variant: `(centre, with reflection)`.
fn centres(space: &SpaceModel, p: &PointRef, rho: f64, variant: Variant) -> Result<Vec<PointRef>> {
    match variant {
        Variant::Closed | Variant::Boundary => Ok(vec![*p]),
        Variant::Glued => space.mirror_images(p, rho),
    }
}

fn count_pair(space: &SpaceModel, centre: &PointRef, q: &PointRef, rho: f64, variant: Variant) -> f64 {
    let shape = space.parts[centre.part].shape;
    let mut w = 0.0;
    if shape.distance(&centre.coords, &q.coords) < rho {
        w += 1.0;
        if variant != Variant::Closed {
            let mask = space.reflecting_boundary(centre.part);
            if shape.reflected_distance(&centre.coords, &q.coords, mask) < rho {
                w += 1.0;
            }
        }
    }
    w
}

/// `w_{i->j}`: how many balls attached to `x_i` contain `x_j`.
pub fn directed_multiplicity(
    space: &SpaceModel,
    net: &Net,
    i: usize,
    j: usize,
    rho: f64,
    variant: Variant,
) -> Result<f64> {
    let (p, q) = (&net.points[i], &net.points[j]);
    Ok(centres(space, p, rho, variant)?
        .iter()
        .filter(|c| c.part == q.part)
        .map(|c| count_pair(space, c, q, rho, variant))
        .sum())
}

impl GraphLaplacian {
    pub fn build(space: &SpaceModel, net: &Net, rho: f64, variant: Variant) -> Result<Self> {
        Self::build_with(space, net, rho, variant, Exec::default())
    }

    pub fn build_with(space: &SpaceModel, net: &Net, rho: f64, variant: Variant, exec: Exec) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::usage(format!("rho must be positive, got {rho}")));
        }
        if variant == Variant::Glued {
            space.check_rho(rho)?;
        }
        let mut warnings = Vec::new();
        if rho <= 4.0 * net.epsilon {
            warnings.push(format!(
                "rho = {rho} is not above 4 * epsilon = {}; error bounds assume rho > 4 epsilon",
                4.0 * net.epsilon
            ));
        }
        let n = net.len();
        let indexes: Vec<BucketIndex> = space
            .parts
            .iter()
            .map(|part| {
                BucketIndex::new(
                    part.shape,
                    rho,
                    net.points
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| p.part == part.id)
                        .map(|(i, p)| (i, p.coords)),
                )
            })
            .collect();
        let rows: Vec<Result<Vec<(usize, f64)>>> = exec.map_range(n, |i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for c in centres(space, &net.points[i], rho, variant)? {
                indexes[c.part].for_each_candidate(&c.coords, rho, |j, coords| {
                    if j == i {
                        return;
                    }
                    let q = PointRef { part: c.part, coords: *coords };
                    let w = count_pair(space, &c, &q, rho, variant);
                    if w > 0.0 {
                        row.push((j, w));
                    }
                });
            }
            Ok(row)
        });
        let mut triplets = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            for (j, w) in row? {
                triplets.push((i, j, 0.5 * w));
                triplets.push((j, i, 0.5 * w));
            }
        }
        let multiplicity = CsrMatrix::from_triplets(n, triplets);
        Ok(GraphLaplacian {
            dim: space.dim,
            rho,
            scale: laplacian_scale(space.dim, rho),
            weights: net.weights.clone(),
            variant,
            multiplicity,
            warnings,
            exec,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::usage(format!(
                "vector has length {} but the net has {} points",
                u.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `(Lu)_i = scale * sum_j m_ij mu_j (u_j - u_i)`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let m = &self.multiplicity;
        let mu = &self.weights;
        let s = self.scale;
        Ok(self.exec.map_range(self.len(), |i| {
            s * m.row(i).map(|(j, w)| w * mu[j] * (u[j] - u[i])).sum::<f64>()
        }))
    }

    /// `(scale/2) sum_ij m_ij mu_i mu_j (u_j - u_i)^2`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let m = &self.multiplicity;
        let mu = &self.weights;
        let rows = self.exec.map_range(self.len(), |i| {
            mu[i] * m.row(i).map(|(j, w)| w * mu[j] * (u[j] - u[i]).powi(2)).sum::<f64>()
        });
        Ok(0.5 * self.scale * rows.iter().sum::<f64>())
    }

    /// `<u, v>_mu`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.weights)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    /// `A = D^(1/2) (-L) D^(-1/2)` with `D = diag(mu)`, symmetric.
    pub fn to_weighted_symmetric(&self) -> Result<WeightedSymmetric> {
        if let Some(i) = self.weights.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::usage(format!("weight {i} is not positive")));
        }
        let sqrt_mu: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut triplets = Vec::with_capacity(self.multiplicity.nnz() + self.len());
        for i in 0..self.len() {
            let mut diag = 0.0;
            for (j, w) in self.multiplicity.row(i) {
                diag += w * self.weights[j];
                triplets.push((i, j, -self.scale * w * sqrt_mu[i] * sqrt_mu[j]));
            }
            triplets.push((i, i, self.scale * diag));
        }
        Ok(WeightedSymmetric {
            matrix: CsrMatrix::from_triplets(self.len(), triplets),
            sqrt_mu,
            exec: self.exec,
        })
    }

    /// Entries of `L` as `i j value` lines after a `N scale variant` header.
    pub fn triplet_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {:.16e} {}", self.len(), self.scale, self.variant.as_str());
        for i in 0..self.len() {
            let mut diag = 0.0;
            let mut entries = Vec::new();
            for (j, w) in self.multiplicity.row(i) {
                let v = self.scale * w * self.weights[j];
                diag -= v;
                entries.push((j, v));
            }
            entries.push((i, diag));
            entries.sort_by_key(|e| e.0);
            for (j, v) in entries {
                let _ = writeln!(out, "{i} {j} {v:.16e}");
            }
        }
        out
    }

    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.triplet_text())?;
        Ok(())
    }
}

/// The symmetric similarity transform of `-L` and the data to map its
/// eigenvectors back (`v = D^(-1/2) w`).
#[derive(Clone, Debug)]
pub struct WeightedSymmetric {
    pub matrix: CsrMatrix,
    pub sqrt_mu: Vec<f64>,
    exec: Exec,
}

impl WeightedSymmetric {
    pub fn to_net_function(&self, w: &[f64]) -> Vec<f64> {
        w.iter().zip(&self.sqrt_mu).map(|(x, s)| x / s).collect()
    }
}

impl SymOp for WeightedSymmetric {
    fn dim(&self) -> usize {
        self.matrix.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y, self.exec)
    }

    fn norm_bound(&self) -> f64 {
        self.matrix.norm_inf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_net, SamplerConfig, Strategy};

    fn three_point() -> (SpaceModel, Net) {
        let s = SpaceModel::interval(1.0).unwrap();
        let pts = [0.25, 0.5, 0.75].iter().map(|&x| PointRef::on(0, x)).collect();
        let net = Net::from_parts(&s, pts, vec![0.375, 0.25, 0.375], 0.25).unwrap();
        (s, net)
    }

    #[test]
    fn directed_examples() {
        let s = SpaceModel::interval(1.0).unwrap();
        let pts = vec![PointRef::on(0, 0.5), PointRef::on(0, 0.6), PointRef::on(0, 0.05), PointRef::on(0, 0.1)];
        let net = Net::from_parts(&s, pts, vec![0.25; 4], 0.5).unwrap();
        assert_eq!(directed_multiplicity(&s, &net, 0, 1, 0.3, Variant::Boundary).unwrap(), 1.0);
        assert_eq!(directed_multiplicity(&s, &net, 2, 3, 0.3, Variant::Boundary).unwrap(), 2.0);
        assert_eq!(directed_multiplicity(&s, &net, 2, 3, 0.3, Variant::Closed).unwrap(), 1.0);

        let g = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let pts = vec![PointRef::on(0, 0.05), PointRef::on(1, 0.1), PointRef::on(0, 0.5), PointRef::on(1, 0.5)];
        let net = Net::from_parts(&g, pts, vec![0.5; 4], 0.5).unwrap();
        assert_eq!(directed_multiplicity(&g, &net, 0, 1, 0.3, Variant::Glued).unwrap(), 1.0);
        assert_eq!(directed_multiplicity(&g, &net, 0, 1, 0.3, Variant::Boundary).unwrap(), 0.0);
    }

    #[test]
    fn three_point_interval() {
        let (s, net) = three_point();
        let l = GraphLaplacian::build(&s, &net, 0.3, Variant::Boundary).unwrap();
        assert!((l.scale - 6.0 / (2.0 * 0.027)).abs() < 1e-9);
        assert_eq!(l.multiplicity.get(0, 1), 1.0);
        assert_eq!(l.multiplicity.get(1, 2), 1.0);
        assert_eq!(l.multiplicity.get(0, 2), 0.0);
        let l6 = GraphLaplacian::build(&s, &net, 0.6, Variant::Boundary).unwrap();
        assert_eq!(l6.multiplicity.get(0, 2), 1.0);
        assert_eq!(l6.multiplicity.get(0, 1), 1.0);
        assert_eq!(l6.multiplicity.get(0, 0), 0.0);
        // hand expansion of L e_1
        let lu = l.apply(&[1.0, 0.0, 0.0]).unwrap();
        let s = l.scale;
        assert!((lu[0] + s * 0.25).abs() < 1e-12);
        assert!((lu[1] - s * 0.375).abs() < 1e-12);
        assert!(lu[2].abs() < 1e-12);
    }

    #[test]
    fn two_point_energy() {
        let s = SpaceModel::interval(1.0).unwrap();
        let pts = vec![PointRef::on(0, 0.4), PointRef::on(0, 0.6)];
        let net = Net::from_parts(&s, pts, vec![1.0, 1.0], 0.6).unwrap();
        let l = GraphLaplacian::build(&s, &net, 0.3, Variant::Closed).unwrap();
        let sc = l.scale;
        assert_eq!(l.apply(&[0.0, 1.0]).unwrap(), vec![sc, -sc]);
        assert!((l.dirichlet_energy(&[0.0, 1.0]).unwrap() - sc).abs() < 1e-9 * sc);
    }

    #[test]
    fn constants_and_energy_identity() {
        let s = SpaceModel::interval(1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::new(Strategy::UniformRandom, 4, 0.02)).unwrap();
        let l = GraphLaplacian::build(&s, &net, 0.1, Variant::Boundary).unwrap();
        let ones = vec![1.0; net.len()];
        assert!(l.apply(&ones).unwrap().iter().all(|v| v.abs() <= 1e-9 * l.scale));
        let u: Vec<f64> = net.points.iter().map(|p| (3.0 * p.coords[0]).sin()).collect();
        let lu = l.apply(&u).unwrap();
        let lhs = -l.inner(&lu, &u);
        let rhs = l.dirichlet_energy(&u).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn symmetric_transform() {
        let (s, net) = three_point();
        let l = GraphLaplacian::build(&s, &net, 0.3, Variant::Boundary).unwrap();
        let a = l.to_weighted_symmetric().unwrap();
        assert!(a.matrix.asymmetry() < 1e-12);
    }

    #[test]
    fn triplet_header() {
        let (s, net) = three_point();
        let l = GraphLaplacian::build(&s, &net, 0.3, Variant::Boundary).unwrap();
        let text = l.triplet_text();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("3 ") && first.ends_with(" boundary"));
        assert_eq!(text.lines().count(), 1 + 7);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("glued".parse::<Variant>().unwrap(), Variant::Glued);
        assert!("other".parse::<Variant>().is_err());
    }

    #[test]
    fn warns_when_rho_small() {
        let s = SpaceModel::interval(1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::grid(0.02)).unwrap();
        let l = GraphLaplacian::build(&s, &net, 0.03, Variant::Boundary).unwrap();
        assert_eq!(l.warnings.len(), 1);
    }
}
