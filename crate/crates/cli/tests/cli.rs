use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples").join(format!("{name}.lgpac"))
}

fn lgpac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgpac")).args(args).env_remove("LGPAC_SOLVER_TOL").output().unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_the_inverter() {
    let out = lgpac(&["validate", path(&example("inverter"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn diagnostics_exit_with_one_and_point_at_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.lgpac");
    std::fs::write(&file, "const a : rstream = 1\nwire a -> b.in1\n").unwrap();
    let out = lgpac(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("2:11: error: unknown module 'b'"), "{err}");
}

#[test]
fn simulated_inverter_halves_at_time_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("inv.csv");
    let out = lgpac(&["simulate", path(&example("inverter")), "--t-end", "10", "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x,channel,value\n"));
    let row = text.lines().find(|l| l.starts_with("1,,a,")).expect("row for a at t = 1");
    let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 0.5).abs() < 1e-6, "{row}");
}

#[test]
fn simulation_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = lgpac(&["simulate", path(&example("feedback")), "--out", path(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn zeta_limit_is_certified_at_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("zeta.csv");
    let out = lgpac(&["limit", path(&example("zeta")), "--tau", "16", "--out", path(&csv), "--strict"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains(": certified"), "{stdout}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 17);
    let at = |x: f64| rows.iter().find(|r| r.0 == x).unwrap().1;
    assert!((at(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-6);
    assert!((at(4.0) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-6);
}

#[test]
fn strict_mode_reports_uncertified_limits() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("slow.lgpac");
    // gap 1/9 - 1/10 at tau = 8 exceeds 2^-8
    let src = "modulus T = linear 1\n\
               time t : rstream\n\
               const one : rscalar = 1\n\
               const m1 : rstream = -1\n\
               mul sq : rstream { in1 = a; in2 = a }\n\
               mul neg : rstream { in1 = sq; in2 = m1 }\n\
               integrator a : rstream { c = one; u = neg; v = t }\n\
               limit A : rscalar { in = a } modulus T\n\
               output A = A\n";
    std::fs::write(&file, src).unwrap();
    let relaxed = lgpac(&["limit", path(&file), "--tau", "8"]);
    assert_eq!(relaxed.status.code(), Some(0), "{}", String::from_utf8_lossy(&relaxed.stderr));
    let strict = lgpac(&["limit", path(&file), "--tau", "8", "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn blow_up_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("blowup.lgpac");
    // a' = a^2 with a(0) = 1 leaves every bound before t = 1
    let src = "time t : rstream\n\
               const one : rscalar = 1\n\
               mul sq : rstream { in1 = a; in2 = a }\n\
               integrator a : rstream { c = one; u = sq; v = t }\n\
               output a = a\n";
    std::fs::write(&file, src).unwrap();
    let out = lgpac(&["simulate", path(&file), "--t-end", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_compares_against_references() {
    let out = lgpac(&["oracle", path(&example("inverter")), "--against", "closed-form"]);
    assert_eq!(out.status.code(), Some(0));
    let err: f64 = String::from_utf8(out.stdout).unwrap().lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err < 1e-6);

    let out = lgpac(&["oracle", path(&example("zeta")), "--against", "zeta"]);
    assert_eq!(out.status.code(), Some(0));
    let err: f64 = String::from_utf8(out.stdout).unwrap().trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err < 2f64.powi(-16) + 1e-5);
}

#[test]
fn tolerance_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_lgpac"))
        .args(["simulate", path(&example("inverter"))])
        .env("LGPAC_SOLVER_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let coarse = Command::new(env!("CARGO_BIN_EXE_lgpac"))
        .args(["simulate", path(&example("inverter"))])
        .env("LGPAC_SOLVER_TOL", "1e-4")
        .output()
        .unwrap();
    assert_eq!(coarse.status.code(), Some(0));
}

#[test]
fn exported_examples_match_the_shipped_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgpac(&["export-examples", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let mut count = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        let shipped = example(p.file_stem().unwrap().to_str().unwrap());
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&shipped).unwrap(), "{}", p.display());
        count += 1;
    }
    assert_eq!(count, 19);
}
