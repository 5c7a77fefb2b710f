//! CSV reports and the metadata sidecar.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::sampling::write_net_csv;

use super::config::ExperimentConfig;
use super::run::{CompareReport, OracleRow, Rate, Row, RunOutput, SweepReport};

pub const REPORT_HEADER: &str = "eps,rho,N,k,lambda_gamma,lambda_ref,abs_err,rel_err,eigfn_err,wall_ms";
pub const RATES_HEADER: &str = "k,slope,intercept,points";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_csv(rows: &[Row]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(r.eps),
            num(r.rho),
            r.n,
            r.k,
            num(r.lambda_gamma),
            num(r.lambda_ref),
            num(r.abs_err),
            num(r.rel_err),
            r.eigfn_err.map(num).unwrap_or_default(),
            r.wall_ms
        );
    }
    out
}

pub fn rates_csv(rates: &[Rate]) -> String {
    let mut out = String::from(RATES_HEADER);
    out.push('\n');
    for r in rates {
        let _ = writeln!(out, "{},{},{},{}", r.k, num(r.slope), num(r.intercept), r.points);
    }
    out
}

pub fn compare_csv(rep: &CompareReport) -> String {
    let mut out = format!(
        "# a = {}, b = {}\neps,rho,k,rel_err_a,rel_err_b,ratio_b_over_a\n",
        rep.labels[0], rep.labels[1]
    );
    for ra in &rep.sweeps[0].runs {
        let Some(rb) = rep.sweeps[1].runs.iter().find(|r| r.rho == ra.rho && r.eps == ra.eps) else {
            continue;
        };
        for (a, b) in ra.rows.iter().zip(&rb.rows) {
            let ratio = if a.rel_err > 0.0 { b.rel_err / a.rel_err } else { f64::NAN };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                num(a.eps),
                num(a.rho),
                a.k,
                num(a.rel_err),
                num(b.rel_err),
                num(ratio)
            );
        }
    }
    out
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from("check,index,value,reference,abs_diff,tolerance,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.check,
            r.index,
            num(r.value),
            num(r.reference),
            num((r.value - r.reference).abs()),
            num(r.tolerance),
            r.passed()
        );
    }
    out
}

fn quoted(s: &str) -> String {
    format!("{s:?}")
}

/// `key = value` lines describing how a report was produced.
pub fn meta_text(cfg: &ExperimentConfig, runs: &[&RunOutput], warnings: &[String], failures: &[String]) -> String {
    let mut out = String::new();
    let space = cfg.space_model().map(|s| s.label()).unwrap_or_default();
    let _ = writeln!(out, "space = {}", quoted(&space));
    let _ = writeln!(out, "variant = {}", quoted(&cfg.variant));
    let _ = writeln!(out, "reflect_at_gluing = {}", cfg.reflect_at_gluing);
    let _ = writeln!(out, "sampler = {}", quoted(&cfg.sampler.strategy));
    let _ = writeln!(out, "sampler_seed = {}", cfg.sampler.seed);
    let _ = writeln!(out, "solver_seed = {}", cfg.solver.seed);
    let _ = writeln!(out, "k_max = {}", cfg.k_max);
    for (i, r) in runs.iter().enumerate() {
        let prov: Vec<String> = r.provenance.iter().map(|p| quoted(p.as_str())).collect();
        let _ = writeln!(out, "[[run]]\nindex = {i}\neps = {}\nrho = {}\nN = {}", num(r.eps), num(r.rho), r.net.len());
        let _ = writeln!(out, "certified_epsilon = {}", num(r.net.epsilon));
        let _ = writeln!(out, "residual_bound = {}", num(r.spectrum.residual_bound));
        let _ = writeln!(out, "provenance = [{}]", prov.join(", "));
        let w: Vec<String> = r.warnings.iter().map(|s| quoted(s)).collect();
        let _ = writeln!(out, "warnings = [{}]", w.join(", "));
    }
    let w: Vec<String> = warnings.iter().map(|s| quoted(s)).collect();
    let f: Vec<String> = failures.iter().map(|s| quoted(s)).collect();
    let _ = writeln!(out, "[summary]\nwarnings = [{}]\nfailures = [{}]", w.join(", "), f.join(", "));
    out
}

/// Writes `report.csv`, `net.csv`, `spectrum.csv` and `meta.toml` for one run.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, run: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), report_csv(&run.rows))?;
    write_net_csv(&run.net, &dir.join("net.csv"))?;
    run.spectrum.write_csv(&dir.join("spectrum.csv"))?;
    if cfg.export_matrix {
        run.laplacian.write_triplets(&dir.join("matrix.txt"))?;
    }
    std::fs::write(dir.join("meta.toml"), meta_text(cfg, &[run], &cfg.warnings(), &[]))?;
    Ok(())
}

fn failure_lines(rep: &SweepReport) -> Vec<String> {
    rep.failures
        .iter()
        .map(|f| format!("point {} (eps {}, rho {}): {}", f.index, f.eps, f.rho, f.message))
        .collect()
}

/// Writes `report.csv`, `rates.csv`, per-point spectra, the net of the last
/// point and `meta.toml` for a sweep.
pub fn write_sweep(dir: &Path, cfg: &ExperimentConfig, rep: &SweepReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), report_csv(&rep.rows()))?;
    std::fs::write(dir.join("rates.csv"), rates_csv(&rep.rates))?;
    for (i, r) in rep.runs.iter().enumerate() {
        r.spectrum.write_csv(&dir.join(format!("spectrum_{i}.csv")))?;
        if cfg.export_matrix {
            r.laplacian.write_triplets(&dir.join(format!("matrix_{i}.txt")))?;
        }
    }
    if let Some(last) = rep.runs.last() {
        write_net_csv(&last.net, &dir.join("net.csv"))?;
    }
    let runs: Vec<&RunOutput> = rep.runs.iter().collect();
    std::fs::write(dir.join("meta.toml"), meta_text(cfg, &runs, &rep.warnings, &failure_lines(rep)))?;
    Ok(())
}

pub fn write_compare(dir: &Path, cfg: &ExperimentConfig, rep: &CompareReport) -> Result<()> {
    for (label, sweep) in ["a", "b"].iter().zip(&rep.sweeps) {
        write_sweep(&dir.join(label), cfg, sweep)?;
    }
    std::fs::write(dir.join("compare.csv"), compare_csv(rep))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_layout() {
        let row = Row {
            eps: 0.001,
            rho: 0.05,
            n: 500,
            k: 1,
            lambda_gamma: 9.9,
            lambda_ref: 9.87,
            abs_err: 0.03,
            rel_err: 0.003,
            eigfn_err: None,
            wall_ms: 0,
        };
        let text = report_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), REPORT_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[2], "500");
        assert_eq!(fields[8], "");
        assert_eq!(fields[0], "1.0000000000000000e-3");
    }
}
