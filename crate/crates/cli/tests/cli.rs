use std::process::{Command, Output};

fn tracelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn hc1_check_reports_zero_residual() {
    for ty in ["A1", "A2"] {
        let o = tracelab(&["hc1-check", "--type", ty]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains("OK residual=0"));
    }
}

#[test]
fn theta_at_nonsplit_trace() {
    let o = tracelab(&["theta", "--p", "5", "--b", "1", "--N", "4", "--s", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "4/5");
    assert_eq!(v["torus_class"], "unramified_quad");
    assert!(stderr(&o).contains("4/5"));
}

#[test]
fn negative_trace_is_accepted() {
    let o = tracelab(&["theta", "--p", "5", "--b", "-1", "--N", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["theta", "--p", "4", "--b", "1", "--N", "4"][..],
        &["theta", "--p", "5"][..],
        &["no-such-command"][..],
        &["poisson", "--format", "csv"][..],
        &["ffl-sympow", "--q", "3", "--modulus", "t^2+1", "--character", "0"][..],
        &["getz-decompose", "--component", "6:1/2"][..],
    ] {
        let o = tracelab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn model_breakdown_at_higher_precision_is_a_falsification() {
    let o = tracelab(&["breakdown-fit", "--pmax", "97", "--N", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FALSIFIED"));
}

#[test]
fn breakdown_fit_identities() {
    let o = tracelab(&["breakdown-fit", "--pmax", "97"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fit"]["identities_hold"], true);
    assert!(stderr(&o).contains("a1+b1=1 a2+b2+c2=0"));
}

#[test]
fn csv_breakdown_has_header_and_rows() {
    let o = tracelab(&["torus-breakdown", "--primes", "3,5,7"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().get(0), Some("p"));
    assert_eq!(rdr.records().count(), 3);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["getz-decompose", "--random", "50", "--seed", "7"];
    assert_eq!(tracelab(&args).stdout, tracelab(&args).stdout);
    let args = ["poisson", "--sp", "inf,2,3", "--t", "0.7", "--level", "3:-1"];
    let (a, b) = (tracelab(&args), tracelab(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("tracelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("serie.csv");
    let o = tracelab(&["ffl-serie", "--q", "3", "--modulus", "t^2+1", "--dmax", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("q,modulus,character,d,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_supplies_command_and_flags() {
    let dir = std::env::temp_dir().join(format!("tracelab-cfg-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("theta.cfg");
    std::fs::write(&cfg, "# nonsplit trace\ncommand = theta\np = 5\nb = 0\nN = 4\n").unwrap();
    let o = tracelab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"6/5\""));
    let o = tracelab(&["--config", cfg.to_str().unwrap(), "--b", "1"]);
    assert!(stdout(&o).contains("\"4/5\""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_all_subset_passes() {
    let o = tracelab(&["verify-all", "--only", "1,3,5,7,8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_all_passes() {
    let o = tracelab(&["verify-all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
