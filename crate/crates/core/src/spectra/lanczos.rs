//! Lanczos iteration with full reorthogonalisation for the lowest
//! eigenpairs of a symmetric operator.
//!
//! One Krylov run finds at most one copy of each eigenvalue, so converged
//! pairs are locked and the iteration restarts in their orthogonal
//! complement until a restart finds nothing new below the current `k`-th
//! value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;

use super::dense::{eigen_dense_symmetric, tridiagonal_eigenvalues, DenseMatrix};
use super::Spectrum;

/// A symmetric linear operator accessed through products.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Any upper bound on the spectral norm.
    fn norm_bound(&self) -> f64;
}

impl SymOp for DenseMatrix {
    fn dim(&self) -> usize {
        DenseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn norm_bound(&self) -> f64 {
        self.norm_inf()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosConfig {
    /// Number of lowest eigenpairs wanted.
    pub k: usize,
    /// Residual tolerance relative to the operator norm bound.
    pub tol: f64,
    pub seed: u64,
    /// Krylov dimension cap per run (0 picks a default from `k` and `N`).
    pub max_iter: usize,
    /// Largest dimension handled by the dense solver instead.
    pub dense_cutoff: usize,
    /// Restarts allowed after the first run.
    pub max_restarts: usize,
}

impl LanczosConfig {
    pub fn new(k: usize) -> Self {
        LanczosConfig {
            k,
            tol: 1e-10,
            seed: 0x5eed,
            max_iter: 0,
            dense_cutoff: 512,
            max_restarts: 8,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against every vector in `basis`.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>], exec: Exec) {
    for _ in 0..2 {
        let coeffs = exec.map_range(basis.len(), |j| dot(&basis[j], v));
        for (c, b) in coeffs.iter().zip(basis) {
            axpy(-c, b, v);
        }
    }
}

/// Eigenvector of the tridiagonal matrix for the (approximate) eigenvalue
/// `theta`, by inverse iteration with partial pivoting.
fn tridiagonal_eigenvector(alpha: &[f64], beta: &[f64], theta: f64, tnorm: f64) -> Vec<f64> {
    let m = alpha.len();
    if m == 1 {
        return vec![1.0];
    }
    let tiny = f64::EPSILON * tnorm.max(f64::MIN_POSITIVE);
    // LU of (T - theta I) with row interchanges: three upper bands.
    let mut u0 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut u2 = vec![0.0; m];
    let mut mult = vec![0.0; m];
    let mut swapped = vec![false; m];
    let mut diag = alpha[0] - theta;
    let mut sup = if m > 1 { beta[0] } else { 0.0 };
    for i in 0..m - 1 {
        let sub = beta[i];
        let next_diag = alpha[i + 1] - theta;
        let next_sup = if i + 1 < m - 1 { beta[i + 1] } else { 0.0 };
        if diag.abs() >= sub.abs() {
            let piv = if diag == 0.0 { tiny } else { diag };
            let l = sub / piv;
            mult[i] = l;
            u0[i] = piv;
            u1[i] = sup;
            u2[i] = 0.0;
            diag = next_diag - l * sup;
            sup = next_sup;
        } else {
            let l = diag / sub;
            mult[i] = l;
            swapped[i] = true;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            diag = sup - l * next_diag;
            sup = -l * next_sup;
        }
    }
    u0[m - 1] = if diag == 0.0 { tiny } else { diag };
    let solve = |b: &mut Vec<f64>| {
        for i in 0..m - 1 {
            if swapped[i] {
                b.swap(i, i + 1);
            }
            let bi = b[i];
            b[i + 1] -= mult[i] * bi;
        }
        for i in (0..m).rev() {
            let mut s = b[i];
            if i + 1 < m {
                s -= u1[i] * b[i + 1];
            }
            if i + 2 < m {
                s -= u2[i] * b[i + 2];
            }
            let p = if u0[i].abs() < tiny { tiny.copysign(u0[i]) } else { u0[i] };
            b[i] = s / p;
        }
    };
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + ((i * 7919) % 13) as f64 * 1e-3).collect();
    for _ in 0..3 {
        solve(&mut x);
        let n = norm(&x);
        if !(n.is_finite() && n > 0.0) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= n);
    }
    x
}

/// Lowest `cfg.k` eigenpairs of `op` (Euclidean-orthonormal vectors).
pub fn eigen_lanczos(op: &dyn SymOp, cfg: &LanczosConfig, exec: Exec) -> Result<Spectrum> {
    let n = op.dim();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::usage(format!(
            "requested {} eigenpairs of a {n}-dimensional operator",
            cfg.k
        )));
    }
    if n <= cfg.dense_cutoff || cfg.k == n {
        return dense_lowest(op, cfg.k);
    }
    let anorm = op.norm_bound().max(f64::MIN_POSITIVE);
    let max_iter = if cfg.max_iter == 0 {
        n.min(600.max(40 * cfg.k))
    } else {
        cfg.max_iter.min(n)
    };
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_vecs: Vec<Vec<f64>> = Vec::new();
    let mut total_iter = 0;
    for restart in 0..=cfg.max_restarts {
        let kth_before = if locked_vals.len() >= cfg.k {
            Some(locked_vals[cfg.k - 1])
        } else {
            None
        };
        let room = n - locked_vecs.len();
        if room == 0 {
            break;
        }
        let want = cfg.k.min(room);
        let run = lanczos_run(op, &locked_vecs, want, cfg, restart as u64, max_iter.min(room), anorm, exec)?;
        total_iter += run.iterations;
        let found_new_low = match kth_before {
            Some(kth) => run
                .values
                .iter()
                .any(|&v| v < kth - cfg.tol * anorm),
            None => !run.values.is_empty(),
        };
        for (v, x) in run.values.into_iter().zip(run.vectors) {
            locked_vals.push(v);
            locked_vecs.push(x);
        }
        let mut order: Vec<usize> = (0..locked_vals.len()).collect();
        order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
        locked_vals = order.iter().map(|&i| locked_vals[i]).collect();
        locked_vecs = order.iter().map(|&i| locked_vecs[i].clone()).collect();
        if !run.converged {
            let partial = finish(op, locked_vals, locked_vecs, cfg.k, anorm);
            return Err(Error::NotConverged {
                requested: cfg.k,
                converged: partial.eigenvalues.len(),
                iterations: total_iter,
                partial: Box::new(partial),
            });
        }
        if kth_before.is_some() && !found_new_low {
            break;
        }
    }
    if locked_vals.len() < cfg.k {
        let partial = finish(op, locked_vals, locked_vecs, cfg.k, anorm);
        return Err(Error::NotConverged {
            requested: cfg.k,
            converged: partial.eigenvalues.len(),
            iterations: total_iter,
            partial: Box::new(partial),
        });
    }
    Ok(finish(op, locked_vals, locked_vecs, cfg.k, anorm))
}

fn finish(op: &dyn SymOp, vals: Vec<f64>, vecs: Vec<Vec<f64>>, k: usize, anorm: f64) -> Spectrum {
    let take = vals.len().min(k);
    let n = op.dim();
    let mut residuals = Vec::with_capacity(take);
    let mut y = vec![0.0; n];
    for (lam, x) in vals.iter().zip(&vecs).take(take) {
        op.apply(x, &mut y);
        let r = y
            .iter()
            .zip(x)
            .map(|(a, b)| (a - lam * b).powi(2))
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    let residual_bound = residuals.iter().fold(0.0f64, |m, r| m.max(*r)) / anorm;
    Spectrum {
        eigenvalues: vals.into_iter().take(take).collect(),
        eigenvectors: Some(vecs.into_iter().take(take).collect()),
        residuals,
        residual_bound,
    }
}

fn dense_lowest(op: &dyn SymOp, k: usize) -> Result<Spectrum> {
    let n = op.dim();
    let mut a = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            a.set(i, j, col[i]);
        }
    }
    let mut s = eigen_dense_symmetric(&a)?;
    s.eigenvalues.truncate(k);
    s.residuals.truncate(k);
    if let Some(v) = s.eigenvectors.as_mut() {
        v.truncate(k);
    }
    s.residual_bound = s.residuals.iter().fold(0.0f64, |m, r| m.max(*r)) / a.norm_inf().max(f64::MIN_POSITIVE);
    Ok(s)
}

struct Run {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    converged: bool,
    iterations: usize,
}

#[allow(clippy::too_many_arguments)]
fn lanczos_run(
    op: &dyn SymOp,
    locked: &[Vec<f64>],
    want: usize,
    cfg: &LanczosConfig,
    restart: u64,
    max_iter: usize,
    anorm: f64,
    exec: Exec,
) -> Result<Run> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    orthogonalize(&mut q, locked, exec);
    let qn = norm(&q);
    if qn == 0.0 {
        return Err(Error::numerical("Lanczos start vector vanished after deflation"));
    }
    q.iter_mut().for_each(|v| *v /= qn);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let check_every = 10;
    let breakdown = 1e-12 * anorm;
    loop {
        let m = basis.len();
        op.apply(&basis[m - 1], &mut w);
        let a = dot(&w, &basis[m - 1]);
        alpha.push(a);
        // full reorthogonalisation against the locked set and the basis
        orthogonalize(&mut w, locked, exec);
        orthogonalize(&mut w, &basis, exec);
        let b = norm(&w);
        let exhausted = b <= breakdown || m >= n - locked.len();
        let at_cap = m >= max_iter;
        if exhausted || at_cap || (m >= want && m.is_multiple_of(check_every)) {
            let ritz = ritz_pairs(&alpha, &beta, want, b, anorm)?;
            let done = ritz.iter().filter(|(_, r, _)| *r <= cfg.tol * anorm).count();
            if exhausted || done >= want || at_cap {
                let converged = exhausted || done >= want;
                let keep: Vec<&(f64, f64, Vec<f64>)> = if exhausted {
                    ritz.iter().collect()
                } else {
                    ritz.iter().filter(|(_, r, _)| *r <= cfg.tol * anorm).collect()
                };
                let mut values = Vec::new();
                let mut vectors = Vec::new();
                for (theta, _, s) in keep {
                    let mut x = vec![0.0; n];
                    for (sj, vj) in s.iter().zip(&basis) {
                        axpy(*sj, vj, &mut x);
                    }
                    orthogonalize(&mut x, locked, exec);
                    orthogonalize(&mut x, &vectors, exec);
                    let xn = norm(&x);
                    if xn < 0.5 {
                        // lost to a nearly repeated Ritz value
                        continue;
                    }
                    x.iter_mut().for_each(|v| *v /= xn);
                    if !exhausted {
                        // the |b * s_m| estimate can be fooled by inexact s
                        let mut ax = vec![0.0; n];
                        op.apply(&x, &mut ax);
                        axpy(-theta, &x, &mut ax);
                        if norm(&ax) > cfg.tol * anorm {
                            continue;
                        }
                    }
                    values.push(*theta);
                    vectors.push(x);
                }
                return Ok(Run {
                    values,
                    vectors,
                    converged,
                    iterations: m,
                });
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|v| *v /= b);
        basis.push(std::mem::replace(&mut w, vec![0.0; n]));
    }
}

/// Lowest `want` Ritz triples `(theta, residual, s)` of the current
/// tridiagonal matrix, with `s` normalised and residual `|b * s_m|`.
fn ritz_pairs(alpha: &[f64], beta: &[f64], want: usize, b: f64, anorm: f64) -> Result<Vec<(f64, f64, Vec<f64>)>> {
    let vals = tridiagonal_eigenvalues(alpha, beta)?;
    let m = alpha.len();
    let mut out: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for &theta in vals.iter().take(want) {
        let mut s = tridiagonal_eigenvector(alpha, beta, theta, anorm);
        // separate vectors of nearly equal Ritz values
        for (t2, _, s2) in &out {
            if (theta - t2).abs() <= 1e-8 * anorm {
                let c = dot(&s, s2);
                axpy(-c, s2, &mut s);
            }
        }
        let sn = norm(&s);
        if sn > 0.0 {
            s.iter_mut().for_each(|v| *v /= sn);
        }
        let r = (b * s[m - 1]).abs();
        out.push((theta, r, s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl SymOp for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
        fn norm_bound(&self) -> f64 {
            self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
        }
    }

    struct Path(usize);

    impl SymOp for Path {
        fn dim(&self) -> usize {
            self.0
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let n = self.0;
            for i in 0..n {
                let mut v = 0.0;
                if i > 0 {
                    v += x[i] - x[i - 1];
                }
                if i + 1 < n {
                    v += x[i] - x[i + 1];
                }
                y[i] = v;
            }
        }
        fn norm_bound(&self) -> f64 {
            4.0
        }
    }

    fn iterative(k: usize) -> LanczosConfig {
        LanczosConfig {
            dense_cutoff: 0,
            ..LanczosConfig::new(k)
        }
    }

    #[test]
    fn diagonal_lowest_three() {
        let op = Diag((0..100).map(|i| i as f64).collect());
        let s = eigen_lanczos(&op, &iterative(3), Exec::Sequential).unwrap();
        for (k, l) in s.eigenvalues.iter().enumerate() {
            assert!((l - k as f64).abs() < 1e-10, "{l}");
        }
    }

    #[test]
    fn path_graph_closed_form() {
        let n = 100;
        let s = eigen_lanczos(&Path(n), &iterative(5), Exec::Sequential).unwrap();
        for (k, l) in s.eigenvalues.iter().enumerate() {
            let want = 2.0 * (1.0 - (k as f64 * std::f64::consts::PI / n as f64).cos());
            assert!((l - want).abs() < 1e-10, "k={k}: {l} vs {want}");
        }
    }

    #[test]
    fn finds_repeated_eigenvalues() {
        let mut d: Vec<f64> = (0..200).map(|i| 1.0 + i as f64).collect();
        d[5] = 0.5;
        d[9] = 0.5;
        d[17] = 0.5;
        let s = eigen_lanczos(&Diag(d), &iterative(4), Exec::Sequential).unwrap();
        assert_eq!(s.eigenvalues.len(), 4);
        for l in &s.eigenvalues[..3] {
            assert!((l - 0.5).abs() < 1e-10, "{:?}", s.eigenvalues);
        }
        assert!((s.eigenvalues[3] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let op = Diag((0..300).map(|i| (i as f64).powi(2)).collect());
        let cfg = LanczosConfig {
            max_iter: 12,
            max_restarts: 0,
            ..iterative(6)
        };
        match eigen_lanczos(&op, &cfg, Exec::Sequential) {
            Err(Error::NotConverged { requested, partial, .. }) => {
                assert_eq!(requested, 6);
                assert!(partial.eigenvalues.len() < 6);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn tridiagonal_inverse_iteration() {
        let alpha = vec![2.0; 30];
        let beta = vec![-1.0; 29];
        let vals = tridiagonal_eigenvalues(&alpha, &beta).unwrap();
        let s = tridiagonal_eigenvector(&alpha, &beta, vals[0], 4.0);
        // T s = theta s
        for i in 0..30 {
            let mut t = alpha[i] * s[i];
            if i > 0 {
                t += beta[i - 1] * s[i - 1];
            }
            if i + 1 < 30 {
                t += beta[i] * s[i + 1];
            }
            assert!((t - vals[0] * s[i]).abs() < 1e-12);
        }
    }
}
