use reflap::geometry::{PointRef, SpaceModel};
use reflap::harness::report::{rates_csv, report_csv, write_run, write_sweep, REPORT_HEADER};
use reflap::harness::{run_spectrum, run_sweep, ExperimentConfig};
use reflap::laplacian::{GraphLaplacian, Variant};
use reflap::sampling::{read_net_csv, sample_net, Net, SamplerConfig, Strategy};
use reflap::{Error, Exec};

const SWEEP: &str = r#"
k_max = 3

[space]
kind = "interval"
length = 1.0

[sampler]
strategy = "uniform_random"
seed = 17

[schedule]
rho = [0.1, 0.05, 0.025]
"#;

#[test]
fn sweep_output_is_reproducible_across_executors() {
    let cfg = ExperimentConfig::parse(SWEEP).unwrap();
    let a = run_sweep(&cfg, Exec::Parallel).unwrap();
    let b = run_sweep(&cfg, Exec::Sequential).unwrap();
    let c = run_sweep(&cfg, Exec::Parallel).unwrap();
    assert_eq!(report_csv(&a.rows()), report_csv(&b.rows()));
    assert_eq!(report_csv(&a.rows()), report_csv(&c.rows()));
    assert_eq!(rates_csv(&a.rates), rates_csv(&b.rates));
    assert_eq!(a.rows().len(), 12);
    assert!(a.rate(1).unwrap().slope > 0.8);
}

#[test]
fn sweep_writes_files() {
    let cfg = ExperimentConfig::parse(&format!("export_matrix = true\n{SWEEP}")).unwrap();
    let rep = run_sweep(&cfg, Exec::Parallel).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_sweep(dir.path(), &cfg, &rep).unwrap();
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().next().unwrap(), REPORT_HEADER);
    assert_eq!(report.lines().count(), 13);
    let rates = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 4);
    for i in 0..3 {
        assert!(dir.path().join(format!("spectrum_{i}.csv")).exists());
        let m = std::fs::read_to_string(dir.path().join(format!("matrix_{i}.txt"))).unwrap();
        assert!(m.lines().next().unwrap().ends_with("boundary"));
    }
    let (pts, mu) = read_net_csv(&dir.path().join("net.csv")).unwrap();
    assert_eq!(pts, rep.runs[2].net.points);
    assert_eq!(mu, rep.runs[2].net.weights);
    let meta = std::fs::read_to_string(dir.path().join("meta.toml")).unwrap();
    assert!(meta.contains("sampler_seed = 17"));
    assert!(meta.contains("closed-form"));
}

#[test]
fn spectrum_run_files_and_stage_errors() {
    let cfg = ExperimentConfig::parse(SWEEP).unwrap();
    let run = run_spectrum(&cfg, 0.0025, 0.05, Exec::Parallel).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &cfg, &run).unwrap();
    for f in ["report.csv", "net.csv", "spectrum.csv", "meta.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().next().unwrap(), "k,lambda,residual");

    let err = run_spectrum(&cfg, 0.3, 0.05, Exec::Parallel).unwrap_err();
    assert!(err.to_string().starts_with("sampling:"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn glued_rho_guard_is_a_laplacian_error() {
    let cfg = ExperimentConfig::parse(
        "variant = \"glued\"\n[space]\nkind = \"circle_with_segment\"\ncircle = 1.0\nsegment = 1.0\n\
         [schedule]\nrho = [0.6]\n[epsilon]\nrule = \"fixed\"\nvalue = 0.01\n",
    )
    .unwrap();
    let err = run_spectrum(&cfg, 0.01, 0.6, Exec::Sequential).unwrap_err();
    assert!(err.to_string().starts_with("laplacian:"), "{err}");
    assert!(matches!(err.root(), Error::Usage(_)));
}

#[test]
fn boundary_interval_is_half_of_even_circle_extension() {
    let interval = SpaceModel::interval(1.0).unwrap();
    let circle = SpaceModel::circle(2.0).unwrap();
    let half = sample_net(&interval, &SamplerConfig::new(Strategy::UniformRandom, 3, 0.01)).unwrap();
    let mut pts = half.points.clone();
    pts.extend(half.points.iter().map(|p| PointRef::on(0, 2.0 - p.coords[0])));
    let mut mu = half.weights.clone();
    mu.extend(half.weights.iter().copied());
    let doubled = Net::from_parts(&circle, pts, mu, half.epsilon).unwrap();
    let u: Vec<f64> = half.points.iter().map(|p| (5.0 * p.coords[0]).cos()).collect();
    let mut even = u.clone();
    even.extend(u.iter().copied());
    for rho in [0.05, 0.1, 0.2] {
        let eb = GraphLaplacian::build(&interval, &half, rho, Variant::Boundary)
            .unwrap()
            .dirichlet_energy(&u)
            .unwrap();
        let ec = GraphLaplacian::build(&circle, &doubled, rho, Variant::Closed)
            .unwrap()
            .dirichlet_energy(&even)
            .unwrap();
        assert!((eb - 0.5 * ec).abs() <= 1e-9 * eb, "rho {rho}: {eb} vs {ec}");
    }
}

#[test]
fn glued_circles_converge_towards_reference() {
    let cfg = ExperimentConfig::parse(
        "variant = \"glued\"\nk_max = 1\neigfn_errors = false\n[space]\nkind = \"two_circles\"\nfirst = 1.0\nsecond = 1.0\n\
         [sampler]\nstrategy = \"grid\"\n[schedule]\nrho = [0.1, 0.05, 0.025]\n[epsilon]\nrule = \"fixed\"\nvalue = 0.0005\n",
    )
    .unwrap();
    let rep = run_sweep(&cfg, Exec::Parallel).unwrap();
    let errs: Vec<f64> = rep.runs.iter().map(|r| r.rows[1].rel_err).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}
