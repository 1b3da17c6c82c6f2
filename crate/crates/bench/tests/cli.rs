use std::fs;
use std::process::{Command, Output};

fn rbfpde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbfpde")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn csv_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("run{i}.csv")).display().to_string()).collect();
    for p in &paths {
        let o = rbfpde(&["run", "--problem", "helmholtz2d-d1", "--method", "bpm", "--boundary-nodes", "33", "--out", p]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains("wall_time"));
    assert!(text.lines().nth(1).unwrap().starts_with("helmholtz2d-d1,bpm,33,0,"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("case.cfg");
    fs::write(
        &cfg,
        "# homogeneous sweep\nproblem = helmholtz2d-homogeneous\nmethod = bkm\nschedule = 12, 24\nformat = csv\n",
    )
    .unwrap();
    let cfg = cfg.display().to_string();
    let o = rbfpde(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    let text = stdout(&o);
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(counts, ["12", "24"]);
    let o = rbfpde(&["sweep", "--config", &cfg, "--schedule", "16,20,28", "--format", "markdown", "--timing"]);
    let text = stdout(&o);
    assert!(text.starts_with("| problem |"));
    assert!(text.contains("time (s)"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn errors_are_reported_with_a_failing_status() {
    let o = rbfpde(&["run", "--problem", "no-such-problem"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-problem"));
    let o = rbfpde(&["run", "--problem", "helmholtz2d-d1", "--solver", "qr"]);
    assert!(!o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "problem = laplace2d\nlattice = nine\n").unwrap();
    let o = rbfpde(&["run", "--config", &cfg.display().to_string()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    // a run that fails inside the solver still writes its record
    let o = rbfpde(&["run", "--problem", "convdiff2d-p540", "--method", "bpm", "--boundary-nodes", "25"]);
    assert!(!o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().contains("NaN"));
}

#[test]
fn list_shows_every_problem() {
    let o = rbfpde(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let registry = rbfpde_bench::Registry::builtin().unwrap();
    assert_eq!(text.lines().count(), registry.problems().len());
    assert!(text.contains("convdiff2d-p36"));
    assert!(text.contains("P=36.0000"));
}

#[test]
fn custom_registry_replaces_the_builtin_one() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("registry.toml");
    fs::write(
        &reg,
        "[[problem]]\nid = \"mild\"\nfamily = \"x2-exp\"\ndomain = \"unit-square\"\nsigma = 1.0\npeclet = 2.0\ndirichlet_fraction = 0.5\n",
    )
    .unwrap();
    let reg = reg.display().to_string();
    let o = rbfpde(&["--registry", &reg, "list"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = rbfpde(&["--registry", &reg, "run", "--problem", "mild", "--method", "bpm", "--boundary-nodes", "41"]);
    assert!(o.status.success());
    let err: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!(err < 1e-3);
}
