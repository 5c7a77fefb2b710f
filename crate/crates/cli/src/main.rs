use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reflap::harness::report::{oracle_csv, write_compare, write_run, write_sweep};
use reflap::harness::{compare, parse_config, run_oracle, run_spectrum, run_sweep, ExperimentConfig};
use reflap::{exec, Error, Exec};

#[derive(Parser)]
#[command(name = "reflap", version, about = "Spectra of boundary- and gluing-corrected graph Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues at the first schedule point.
    Spectrum(Common),
    /// Sweep the rho schedule and fit convergence rates.
    Converge(Common),
    /// Two sweeps differing in variant or gluing reflection.
    Compare(Common),
    /// Independent checks of the reference spectra and distances.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampler seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. 1 runs everything on the calling thread.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> reflap::Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = parse_config(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.sampler.seed = seed;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }

    fn exec(&self) -> reflap::Result<Exec> {
        match self.threads {
            Some(0) => Err(Error::Config("--threads must be at least 1".into())),
            Some(1) => Ok(Exec::Sequential),
            _ => Ok(Exec::Parallel),
        }
    }
}

fn warn(lines: &[String]) {
    for w in lines {
        eprintln!("warning: {w}");
    }
}

fn spectrum(cfg: &ExperimentConfig, out: &Path, exec: Exec) -> reflap::Result<()> {
    let (eps, rho) = cfg.points()?[0];
    warn(&cfg.warnings());
    let run = run_spectrum(cfg, eps, rho, exec)?;
    warn(&run.warnings);
    write_run(out, cfg, &run)?;
    for r in &run.rows {
        println!("k={} lambda={:.10} ref={:.10} rel_err={:.3e}", r.k, r.lambda_gamma, r.lambda_ref, r.rel_err);
    }
    Ok(())
}

fn converge(cfg: &ExperimentConfig, out: &Path, exec: Exec) -> reflap::Result<i32> {
    let rep = run_sweep(cfg, exec)?;
    warn(&rep.warnings);
    write_sweep(out, cfg, &rep)?;
    for r in &rep.rates {
        println!("k={} slope={:.4} points={}", r.k, r.slope, r.points);
    }
    Ok(report_failures(&rep.failures))
}

fn report_failures(failures: &[reflap::harness::run::Failure]) -> i32 {
    for f in failures {
        eprintln!("error: point {} (rho {}): {}", f.index, f.rho, f.message);
    }
    failures.iter().map(|f| f.exit_code).max().unwrap_or(0)
}

fn run(cli: Cli) -> reflap::Result<i32> {
    let common = match &cli.command {
        Command::Spectrum(c) | Command::Converge(c) | Command::Compare(c) | Command::Oracle(c) => c,
    };
    let (cfg, out) = common.load()?;
    let ex = common.exec()?;
    let body = || -> reflap::Result<i32> {
        match &cli.command {
            Command::Spectrum(_) => spectrum(&cfg, &out, ex).map(|_| 0),
            Command::Converge(_) => converge(&cfg, &out, ex),
            Command::Compare(_) => {
                let rep = compare(&cfg, ex)?;
                write_compare(&out, &cfg, &rep)?;
                let a = report_failures(&rep.sweeps[0].failures);
                Ok(a.max(report_failures(&rep.sweeps[1].failures)))
            }
            Command::Oracle(_) => {
                let rows = run_oracle(&cfg)?;
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("oracle.csv"), oracle_csv(&rows))?;
                let failed = rows.iter().filter(|r| !r.passed()).count();
                println!("{} checks, {failed} failed", rows.len());
                Ok(if failed > 0 { 3 } else { 0 })
            }
        }
    };
    match common.threads {
        Some(n) if n > 1 => exec::with_threads(n, body),
        _ => body(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
