//! Spectrum runs, convergence sweeps, variant comparisons and oracle checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{PointRef, SpaceModel};
use crate::laplacian::{GraphLaplacian, Variant};
use crate::operators::{eigenspace_error, Quadrature};
use crate::oracle::{brute_reflected_distance, fd_metric_graph_spectrum, mc_ball_volume};
use crate::sampling::{sample_net_with, Net};
use crate::spectra::reference::{reference_modes, reference_spectrum, Provenance};
use crate::spectra::{solve_graph_spectrum, Spectrum};

use super::config::ExperimentConfig;

/// One line of `report.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub eps: f64,
    pub rho: f64,
    pub n: usize,
    pub k: usize,
    pub lambda_gamma: f64,
    pub lambda_ref: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// `None` when the reference cluster of `k` is not fully inside `0..=k_max`.
    pub eigfn_err: Option<f64>,
    pub wall_ms: u64,
}

/// Everything produced by one `(eps, rho)` run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub eps: f64,
    pub rho: f64,
    pub net: Net,
    pub laplacian: GraphLaplacian,
    pub spectrum: Spectrum,
    pub provenance: Vec<Provenance>,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
}

/// Relative error, falling back to the absolute error for a zero reference.
pub fn relative_error(value: f64, reference: f64) -> f64 {
    let abs = (value - reference).abs();
    if reference.abs() > 0.0 {
        abs / reference.abs()
    } else {
        abs
    }
}

pub fn run_spectrum(cfg: &ExperimentConfig, eps: f64, rho: f64, exec: Exec) -> Result<RunOutput> {
    run_spectrum_with(cfg, eps, rho, cfg.variant()?, cfg.reflect_at_gluing, exec)
}

/// [`run_spectrum`] with the variant and gluing reflection overridden.
pub fn run_spectrum_with(
    cfg: &ExperimentConfig,
    eps: f64,
    rho: f64,
    variant: Variant,
    reflect_at_gluing: bool,
    exec: Exec,
) -> Result<RunOutput> {
    let start = Instant::now();
    let space = cfg.space.build(reflect_at_gluing).map_err(|e| e.in_stage("geometry"))?;
    let scfg = cfg.sampler.config(eps)?;
    let net = sample_net_with(&space, &scfg, exec).map_err(|e| e.in_stage("sampling"))?;
    let laplacian =
        GraphLaplacian::build_with(&space, &net, rho, variant, exec).map_err(|e| e.in_stage("laplacian"))?;
    let k_max = cfg.k_max.min(net.len().saturating_sub(1));
    let spectrum =
        solve_graph_spectrum(&laplacian, k_max, &cfg.solver.options()).map_err(|e| e.in_stage("solver"))?;
    let modes = reference_modes(&space, k_max).map_err(|e| e.in_stage("reference"))?;

    let mut warnings = laplacian.warnings.clone();
    if k_max < cfg.k_max {
        warnings.push(format!("k_max reduced to {k_max}: net has {} points", net.len()));
    }
    let quad = Quadrature {
        exec,
        ..Quadrature::default()
    };
    let vectors = spectrum.eigenvectors.as_ref();
    let mut lambda_ref = Vec::with_capacity(k_max + 1);
    let mut provenance = Vec::with_capacity(k_max + 1);
    let mut eigfn = vec![None; k_max + 1];
    let mut index = 0;
    for mode in &modes {
        let (lo, hi) = (index, index + mode.basis.len());
        index = hi;
        for _ in lo..hi.min(k_max + 1) {
            lambda_ref.push(mode.lambda);
            provenance.push(mode.provenance);
        }
        if cfg.eigfn_errors && hi <= k_max + 1 {
            if let Some(vs) = vectors {
                for (k, slot) in eigfn.iter_mut().enumerate().take(hi).skip(lo) {
                    let e = eigenspace_error(&space, &net, &quad, &vs[k], &mode.basis)
                        .map_err(|e| e.in_stage("eigenfunctions"))?;
                    *slot = Some(e);
                }
            }
        }
        if lo > k_max {
            break;
        }
    }
    if lambda_ref.len() < k_max + 1 {
        return Err(Error::numerical("reference spectrum shorter than requested").in_stage("reference"));
    }
    let wall_ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let rows = (0..=k_max)
        .map(|k| {
            let lg = spectrum.eigenvalues[k];
            let lr = lambda_ref[k];
            Row {
                eps,
                rho,
                n: net.len(),
                k,
                lambda_gamma: lg,
                lambda_ref: lr,
                abs_err: (lg - lr).abs(),
                rel_err: relative_error(lg, lr),
                eigfn_err: eigfn[k],
                wall_ms,
            }
        })
        .collect();
    Ok(RunOutput {
        eps,
        rho,
        net,
        laplacian,
        spectrum,
        provenance,
        rows,
        warnings,
    })
}

/// Least-squares fit of `log(rel_err)` against `log(rho)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rate {
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub index: usize,
    pub eps: f64,
    pub rho: f64,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Successful runs in schedule order.
    pub runs: Vec<RunOutput>,
    pub failures: Vec<Failure>,
    pub rates: Vec<Rate>,
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn rows(&self) -> Vec<Row> {
        self.runs.iter().flat_map(|r| r.rows.iter().cloned()).collect()
    }

    pub fn rate(&self, k: usize) -> Option<&Rate> {
        self.rates.iter().find(|r| r.k == k)
    }
}

/// Slope and intercept of the least-squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn fit_rates(runs: &[RunOutput], k_max: usize) -> Vec<Rate> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for r in runs {
            if let Some(row) = r.rows.get(k) {
                if row.rel_err > 0.0 && row.rel_err.is_finite() {
                    xs.push(r.rho.ln());
                    ys.push(row.rel_err.ln());
                }
            }
        }
        if xs.len() >= 3 {
            if let Some((slope, intercept)) = fit_line(&xs, &ys) {
                out.push(Rate {
                    k,
                    slope,
                    intercept,
                    points: xs.len(),
                });
            }
        }
    }
    out
}

pub fn run_sweep(cfg: &ExperimentConfig, exec: Exec) -> Result<SweepReport> {
    run_sweep_with(cfg, cfg.variant()?, cfg.reflect_at_gluing, exec)
}

/// Runs every schedule point (in parallel when `exec` allows) and fits
/// rates. A failing point is recorded and the sweep continues.
pub fn run_sweep_with(cfg: &ExperimentConfig, variant: Variant, reflect: bool, exec: Exec) -> Result<SweepReport> {
    let points = cfg.points()?;
    let results = exec.map_range(points.len(), |i| {
        let (eps, rho) = points[i];
        run_spectrum_with(cfg, eps, rho, variant, reflect, exec)
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(r) => runs.push(r),
            Err(e) => failures.push(Failure {
                index: i,
                eps: points[i].0,
                rho: points[i].1,
                message: e.to_string(),
                exit_code: e.exit_code(),
            }),
        }
    }
    let mut warnings = cfg.warnings();
    let rates = fit_rates(&runs, cfg.k_max);
    if runs.len() < 3 {
        warnings.push(format!("only {} successful points; rates need at least 3", runs.len()));
    }
    Ok(SweepReport {
        runs,
        failures,
        rates,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub labels: [String; 2],
    pub sweeps: [SweepReport; 2],
}

/// Two sweeps differing in the variant, or in `reflect_at_gluing` when the
/// config lists two flag values.
pub fn compare(cfg: &ExperimentConfig, exec: Exec) -> Result<CompareReport> {
    let (settings, labels): (Vec<(Variant, bool)>, Vec<String>) = match &cfg.compare.reflect_at_gluing {
        Some(flags) => {
            let v = cfg.variant()?;
            (
                flags.iter().map(|&f| (v, f)).collect(),
                flags.iter().map(|f| format!("reflect_at_gluing={f}")).collect(),
            )
        }
        None => {
            let vs = cfg
                .compare
                .variants
                .iter()
                .map(|s| s.parse::<Variant>())
                .collect::<Result<Vec<_>>>()?;
            (
                vs.iter().map(|&v| (v, cfg.reflect_at_gluing)).collect(),
                vs.iter().map(|v| v.as_str().to_string()).collect(),
            )
        }
    };
    let a = run_sweep_with(cfg, settings[0].0, settings[0].1, exec)?;
    let b = run_sweep_with(cfg, settings[1].0, settings[1].1, exec)?;
    Ok(CompareReport {
        labels: [labels[0].clone(), labels[1].clone()],
        sweeps: [a, b],
    })
}

/// One oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub check: &'static str,
    pub index: usize,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        (self.value - self.reference).abs() <= self.tolerance
    }
}

/// Independent checks on the configured space: finite-difference spectra
/// for 1-D spaces, brute-force reflected distances and Monte Carlo ball
/// volumes for 2-D parts.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    let space = cfg.space_model()?;
    let o = &cfg.oracle;
    let mut rows = Vec::new();
    if space.dim == 1 {
        let fd = fd_metric_graph_spectrum(&space, o.fd_step, cfg.k_max).map_err(|e| e.in_stage("oracle"))?;
        let reference = reference_spectrum(&space, cfg.k_max).map_err(|e| e.in_stage("reference"))?;
        for (k, (v, r)) in fd.eigenvalues.iter().zip(&reference.eigenvalues).enumerate() {
            // second-order scheme: error about lambda^2 h^2 / 12
            let tol = (1e-9f64).max(r * r * o.fd_step * o.fd_step / 6.0);
            rows.push(OracleRow {
                check: "fd_eigenvalue",
                index: k,
                value: *v,
                reference: *r,
                tolerance: tol,
            });
        }
        return Ok(rows);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    for part in &space.parts {
        let ext = part.shape.extents();
        let draw = |rng: &mut ChaCha8Rng| loop {
            let p = PointRef::planar(part.id, rng.random::<f64>() * ext[0], rng.random::<f64>() * ext[1]);
            if space.check_interior(&p).is_ok() {
                return p;
            }
        };
        for i in 0..o.pairs {
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let analytic = space.reflected_part_distance(&p, &q)?;
            let brute = brute_reflected_distance(&space, &p, &q, o.boundary_step)?;
            if analytic.is_finite() || brute.is_finite() {
                rows.push(OracleRow {
                    check: "reflected_distance",
                    index: part.id * o.pairs + i,
                    value: analytic,
                    reference: brute,
                    tolerance: o.boundary_step,
                });
            }
        }
        let centre = PointRef::planar(part.id, 0.5 * ext[0], 0.5 * ext[1]);
        let r = 0.1 * ext[0].min(ext[1]);
        let (est, sigma) = mc_ball_volume(&space, &centre, r, o.mc_probes, o.seed)?;
        rows.push(OracleRow {
            check: "ball_volume",
            index: part.id,
            value: est,
            reference: std::f64::consts::PI * r * r,
            tolerance: 3.0 * sigma.max(f64::EPSILON),
        });
    }
    Ok(rows)
}

/// The space and net of the first schedule point, for net export.
pub fn sample_only(cfg: &ExperimentConfig, exec: Exec) -> Result<(SpaceModel, Net)> {
    let space = cfg.space_model()?;
    let (eps, _) = cfg.points()?[0];
    let net = sample_net_with(&space, &cfg.sampler.config(eps)?, exec).map_err(|e| e.in_stage("sampling"))?;
    Ok((space, net))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "k_max = 3\n{extra}\n[space]\nkind = \"interval\"\nlength = 1.0\n[schedule]\nrho = [0.2, 0.1, 0.05]\n"
        ))
        .unwrap()
    }

    #[test]
    fn line_fit() {
        let (s, i) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15);
        assert!(fit_line(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn interval_run_rows() {
        let c = cfg("");
        let out = run_spectrum(&c, 0.001, 0.05, Exec::Sequential).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert_eq!(out.rows[0].lambda_gamma, 0.0);
        assert!(out.rows[1].rel_err < 0.05);
        assert!(out.rows[1].eigfn_err.unwrap() < 0.1);
        assert_eq!(out.rows[1].wall_ms, 0);
        assert!(out.provenance.iter().all(|p| *p == Provenance::ClosedForm));
    }

    #[test]
    fn sweep_records_failures_and_continues() {
        let mut c = cfg("");
        c.schedule.rho = Some(vec![0.2, 0.1, 0.05, -0.0]);
        assert!(c.points().is_err());
        c.schedule.rho = Some(vec![0.2, 0.1, 0.05]);
        c.epsilon.rule = "fixed".into();
        c.epsilon.value = Some(0.3);
        let rep = run_sweep(&c, Exec::Sequential).unwrap();
        assert_eq!(rep.failures.len(), 3);
        assert!(rep.runs.is_empty());
        assert!(rep.rates.is_empty());
    }

    #[test]
    fn oracle_on_interval() {
        let c = cfg("");
        let rows = run_oracle(&c).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.passed()), "{rows:?}");
    }
}
