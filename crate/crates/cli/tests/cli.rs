use std::path::Path;
use std::process::Command;

const CONFIG: &str = r#"
k_max = 2

[space]
kind = "interval"
length = 1.0

[sampler]
strategy = "uniform_random"

[schedule]
rho = [0.1, 0.05, 0.025]
"#;

fn reflap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_reflap")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn converge_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CONFIG);
    let out = dir.path().join("out");
    let o = reflap(&["converge", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("eps,rho,N,k,lambda_gamma,lambda_ref,abs_err,rel_err,eigfn_err,wall_ms\n"));
    let rates = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().next(), Some("k,slope,intercept,points"));
    assert!(out.join("net.csv").exists());
}

#[test]
fn seed_flag_changes_net_and_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CONFIG);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = reflap(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed, "--threads", "1"]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(out.join("net.csv")).unwrap()
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("2", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &format!("colour = \"red\"\n{CONFIG}"));
    let o = reflap(&["spectrum", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let o = reflap(&["spectrum", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = reflap(&["spectrum"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_failures_exit_with_their_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = CONFIG.replace("[schedule]", "[epsilon]\nrule = \"fixed\"\nvalue = 0.3\n[schedule]");
    let cfg = write(dir.path(), "c.toml", &text);
    let o = reflap(&["converge", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CONFIG);
    let out = dir.path().join("o");
    let o = reflap(&["oracle", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(out.join("oracle.csv")).unwrap().contains("fd_eigenvalue"));
    let o = reflap(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cmp = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert!(cmp.starts_with("# a = closed, b = boundary"));
    assert!(out.join("a/report.csv").exists() && out.join("b/report.csv").exists());
}
