//! Eigensolvers and reference spectra.

pub mod dense;
pub mod lanczos;
pub mod reference;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::laplacian::GraphLaplacian;

use self::lanczos::{eigen_lanczos, LanczosConfig};

/// Lowest eigenpairs of a symmetric problem, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub residuals: Vec<f64>,
    pub residual_bound: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Rows `k,lambda,residual`.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("k,lambda,residual\n");
        for (k, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{k},{l:.16e},{r:.16e}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub dense_cutoff: usize,
    pub max_iter: usize,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let l = LanczosConfig::new(1);
        SolverOptions {
            tol: l.tol,
            seed: l.seed,
            dense_cutoff: l.dense_cutoff,
            max_iter: l.max_iter,
            max_restarts: l.max_restarts,
        }
    }
}

/// Eigenpairs `0..=k` of `-L`, eigenvectors orthonormal in `<.,.>_mu`.
pub fn solve_graph_spectrum(l: &GraphLaplacian, k: usize, opts: &SolverOptions) -> Result<Spectrum> {
    let n = l.len();
    if k + 1 > n {
        return Err(Error::usage(format!("k = {k} needs at least {} net points, have {n}", k + 1)));
    }
    let a = l.to_weighted_symmetric()?;
    let cfg = LanczosConfig {
        k: k + 1,
        tol: opts.tol,
        seed: opts.seed,
        max_iter: opts.max_iter,
        dense_cutoff: opts.dense_cutoff,
        max_restarts: opts.max_restarts,
    };
    let sym = match eigen_lanczos(&a, &cfg, l.exec) {
        Ok(s) => s,
        Err(Error::NotConverged {
            requested,
            converged,
            iterations,
            partial,
        }) => {
            return Err(Error::NotConverged {
                requested,
                converged,
                iterations,
                partial: Box::new(back_transform(l, &a, *partial)?),
            })
        }
        Err(e) => return Err(e),
    };
    back_transform(l, &a, sym)
}

fn back_transform(l: &GraphLaplacian, a: &crate::laplacian::WeightedSymmetric, sym: Spectrum) -> Result<Spectrum> {
    let mut eigenvalues = sym.eigenvalues;
    let ws = sym.eigenvectors.unwrap_or_default();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(ws.len());
    for w in &ws {
        let mut v = a.to_net_function(w);
        for prev in &vectors {
            let c = l.inner(&v, prev);
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= c * p;
            }
        }
        let nv = l.inner(&v, &v).sqrt();
        if !(nv > 0.0) {
            return Err(Error::numerical("eigenvector collapsed during mu-orthonormalisation"));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        vectors.push(v);
    }
    if let Some(l0) = eigenvalues.first_mut() {
        if l0.abs() <= 1e-9 * l.scale {
            *l0 = 0.0;
        }
    }
    let mut residuals = Vec::with_capacity(vectors.len());
    for (lam, v) in eigenvalues.iter().zip(&vectors) {
        let lv = l.apply(v)?;
        let r: f64 = lv
            .iter()
            .zip(v)
            .map(|(p, q)| (-p - lam * q).powi(2))
            .sum::<f64>()
            .sqrt();
        residuals.push(r / l.scale);
    }
    let residual_bound = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
        residuals,
        residual_bound,
    })
}

/// `||du||^2 / <u,u>_mu`.
pub fn rayleigh_quotient(l: &GraphLaplacian, u: &[f64]) -> Result<f64> {
    let mass = l.inner(u, u);
    if !(mass > 0.0) {
        return Err(Error::usage("Rayleigh quotient of the zero vector"));
    }
    Ok(l.dirichlet_energy(u)? / mass)
}
