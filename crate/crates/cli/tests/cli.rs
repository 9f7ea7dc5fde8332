use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn paraexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paraexp")).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const PRICE: &str = r#"
[model]
preset = "black_scholes"

[scheme]
orders = [0, 2]

[payoff]
kind = "bump"
center = 0.0
width = 0.25

[evaluation]
points = [[0.0], [0.1]]
horizons = [0.5, 1.0]

[oracle]
kind = "exact"
"#;

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn lists_every_preset() {
    let out = paraexp(&["list-presets"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    for name in ["black_scholes", "cev_smoothed", "tanh_localvol", "heston_like_2d", "killed_localvol"] {
        assert!(stdout.contains(name), "{name} missing from\n{stdout}");
    }
}

#[test]
fn validates_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PRICE);
    let out = paraexp(&["validate-config", "--config", &config]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).ends_with("ok\n"));
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &PRICE.replace("[oracle]", "[oracle]\nflavour = 1"));
    let out = paraexp(&["validate-config", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("flavour"), "{}", text(&out.stderr));

    let config = write_config(dir.path(), &PRICE.replace("width = 0.25", "width = -1.0"));
    let out = paraexp(&["price", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("width"), "{}", text(&out.stderr));
}

#[test]
fn price_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PRICE);
    let csv = dir.path().join("prices.csv");
    let out = paraexp(&["price", "--config", &config, "--out", csv.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let body = fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next(),
        Some("order,t,x,maturity,value,terms,oracle,oracle_error,abs_error")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    for row in rows {
        let abs_error: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(abs_error < 1e-12, "{row}");
    }
    let sidecar = fs::read_to_string(dir.path().join("prices.json")).unwrap();
    assert!(sidecar.contains("\"command\": \"price\""));
    assert!(sidecar.contains("black_scholes"));
}

#[test]
fn oracle_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &PRICE.replace("kind = \"exact\"", "kind = \"fd\""));
    let out = paraexp(&["price", "--config", &config, "--oracle", "exact", "--quiet"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    // exact oracle rows sit at the error floor
    for row in stdout.lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        assert!(fields[7].parse::<f64>().unwrap() <= 1e-14, "{row}");
        assert!(fields[8].parse::<f64>().unwrap() < 1e-12, "{row}");
    }
}

#[test]
fn unknown_oracle_is_rejected_by_the_parser() {
    let out = paraexp(&["price", "--config", "missing.toml", "--oracle", "guess"]);
    assert_eq!(out.status.code(), Some(2));
}
