//! Maps between net functions and functions on the space: discretisation
//! `P`, lifting `P*`, the smoothing operator `I` and error measures.

mod kernel;
mod quadrature;

pub use kernel::{
    alpha, continuous_energy, lifted_energy, smooth, smoothing_gap, theta, EnergyReport, KernelConfig, Region,
};
pub use quadrature::{gauss_legendre, CellLayout, CellProbes, Quadrature};

use crate::error::{Error, Result};
use crate::geometry::{PointRef, SpaceModel};
use crate::sampling::Net;
use crate::spectra::reference::EigenFn;

use kernel::check_len;

/// `Pf(x_i)`: the average of `f` over each cell.
pub fn discretize(
    space: &SpaceModel,
    net: &Net,
    quad: &Quadrature,
    f: &(dyn Fn(&PointRef) -> f64 + Sync),
) -> Result<Vec<f64>> {
    let layout = CellLayout::new(space, net);
    let probes = CellProbes::build(space, net, &layout, quad, &[])?;
    let values = quad.exec.map_range(probes.len(), |k| f(&probes.points[k]));
    let mut sum = vec![0.0; net.len()];
    for ((v, w), &c) in values.iter().zip(&probes.weights).zip(&probes.cell) {
        sum[c] += w * v;
    }
    let mass = probes.cell_mass(net.len());
    if let Some(i) = mass.iter().position(|m| *m <= 0.0) {
        return Err(Error::usage(format!("cell {i} received no quadrature probes")));
    }
    Ok(sum.iter().zip(&mass).map(|(s, m)| s / m).collect())
}

/// The piecewise-constant lift `P* u`.
#[derive(Clone, Copy, Debug)]
pub struct Lifted<'a> {
    net: &'a Net,
    u: &'a [f64],
}

impl<'a> Lifted<'a> {
    pub fn eval(&self, p: &PointRef) -> Result<f64> {
        self.net
            .locate(p)
            .map(|i| self.u[i])
            .ok_or_else(|| Error::usage(format!("point {:?} of part {} lies in no cell", p.coords, p.part)))
    }
}

pub fn lift<'a>(net: &'a Net, u: &'a [f64]) -> Result<Lifted<'a>> {
    check_len(net, u)?;
    Ok(Lifted { net, u })
}

/// `||u||_{L^2(X)} = sqrt(sum mu_i u_i^2)`.
pub fn discrete_norm(net: &Net, u: &[f64]) -> f64 {
    u.iter().zip(&net.weights).map(|(v, m)| m * v * v).sum::<f64>().sqrt()
}

/// `||f||_{L^2}` by cell quadrature.
pub fn l2_norm(space: &SpaceModel, net: &Net, quad: &Quadrature, f: &(dyn Fn(&PointRef) -> f64 + Sync)) -> Result<f64> {
    let layout = CellLayout::new(space, net);
    let probes = CellProbes::build(space, net, &layout, quad, &[])?;
    let v = quad.exec.map_range(probes.len(), |k| f(&probes.points[k]).powi(2));
    Ok(v.iter().zip(&probes.weights).map(|(v, w)| v * w).sum::<f64>().sqrt())
}

/// `||P*u - Pi P*u|| / ||P*u||` with `Pi` the `L^2` projection onto the
/// span of `basis`.
pub fn eigenspace_error(space: &SpaceModel, net: &Net, quad: &Quadrature, u: &[f64], basis: &[EigenFn]) -> Result<f64> {
    check_len(net, u)?;
    if basis.is_empty() {
        return Err(Error::usage("empty reference eigenspace"));
    }
    let layout = CellLayout::new(space, net);
    let probes = CellProbes::build(space, net, &layout, quad, &[])?;
    let m = basis.len();
    let rows: Vec<Vec<f64>> = quad
        .exec
        .map_range(probes.len(), |k| basis.iter().map(|f| f(&probes.points[k])).collect());
    let mut gram = vec![vec![0.0; m]; m];
    let mut proj = vec![0.0; m];
    let mut norm2 = 0.0;
    for ((row, w), &c) in rows.iter().zip(&probes.weights).zip(&probes.cell) {
        norm2 += w * u[c] * u[c];
        for a in 0..m {
            proj[a] += w * u[c] * row[a];
            for b in 0..m {
                gram[a][b] += w * row[a] * row[b];
            }
        }
    }
    if !(norm2 > 0.0) {
        return Err(Error::usage("eigenspace error of the zero function"));
    }
    let y = solve_spd(gram, proj.clone())?;
    let captured: f64 = proj.iter().zip(&y).map(|(p, q)| p * q).sum();
    Ok(((norm2 - captured).max(0.0) / norm2).sqrt())
}

/// Cholesky solve of a small symmetric positive definite system.
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) {
            return Err(Error::numerical("reference basis is linearly dependent"));
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Ok(b)
}
