use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gifs(args: &[&str]) -> Output {
    gifs_env(args, &[])
}

fn gifs_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gifs"));
    cmd.args(args).env_remove("GIFS_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(path).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn grid_run_outputs_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let (stats, cert, image) = (tmp(&dir, "s.csv"), tmp(&dir, "c.csv"), tmp(&dir, "a.ppm"));
    let out = gifs(&[
        "run", "--builtin", "A", "--algo", "grid", "--schedule", "quad", "--steps", "8", "--verify",
        "--stats", path_str(&stats), "--certificate", path_str(&cert), "--out", path_str(&image),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&stats).unwrap(), golden("grid_a_quad8_stats.csv"));
    assert_eq!(fs::read_to_string(&cert).unwrap(), golden("grid_a_quad8_certificate.csv"));
    assert!(golden("grid_a_quad8_stats.csv").starts_with("step,points,tuples,millis,eps_k,bound_k\n"));
    assert!(golden("grid_a_quad8_certificate.csv").lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(fs::metadata(&image).unwrap().len(), 15 + 800 * 800 * 3);
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let (stats, image) = (tmp(&dir, &format!("{threads}.csv")), tmp(&dir, &format!("{threads}.ppm")));
        let out = gifs_env(
            &[
                "run", "--builtin", "C", "--algo", "grid-round", "--schedule", "quad", "--steps", "9",
                "--stats", path_str(&stats), "--out", path_str(&image), "--width", "300", "--height", "200",
            ],
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert_eq!(out.status.code(), Some(0));
        files.push((fs::read(stats).unwrap(), fs::read(image).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn budget_exhaustion_exits_three_with_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let stats = tmp(&dir, "s.csv");
    let out = gifs_env(
        &["run", "--builtin", "A", "--algo", "det", "--steps", "5", "--stats", path_str(&stats)],
        &[("GIFS_BUDGET", "1000")],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partial"));
    assert_eq!(fs::read_to_string(&stats).unwrap().lines().count(), 1 + 2);
}

#[test]
fn configuration_errors_exit_one() {
    for args in [
        vec!["run", "--builtin", "A", "--algo", "grid", "--steps", "3"],
        vec!["run", "--builtin", "Z", "--algo", "det", "--steps", "3"],
        vec!["run", "--builtin", "A", "--algo", "det"],
        vec!["run", "--builtin", "A", "--algo", "det", "--steps", "2", "--schedule", "quad"],
        vec!["run", "--builtin", "A", "--algo", "grid", "--schedule", "cubic", "--steps", "2"],
        vec!["run", "--builtin", "A", "--algo", "det", "--steps", "2", "--seed", "0.5"],
        vec!["run", "--algo", "det", "--steps", "2"],
        vec!["cost", "--maps", "3", "--order", "2", "--dim", "2", "--contraction", "1.5"],
        vec!["frobnicate"],
    ] {
        let out = gifs(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn certification_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let exported = gifs(&["export", "--builtin", "A"]);
    let text = String::from_utf8(exported.stdout).unwrap();
    let bad = tmp(&dir, "bad.gifs");
    fs::write(&bad, text.replacen("0.2 0 0 0.2 0", "2.0 0 0 0.2 0", 1)).unwrap();
    let out = gifs(&["run", "--system", path_str(&bad), "--algo", "det", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // B leaves the cube slightly; files are strict unless projection is requested.
    let b = tmp(&dir, "b.gifs");
    fs::write(&b, gifs(&["export", "--builtin", "B"]).stdout).unwrap();
    let strict = gifs(&["run", "--system", path_str(&b), "--algo", "det", "--steps", "1"]);
    assert_eq!(strict.status.code(), Some(2));
    let projected = gifs(&["run", "--system", path_str(&b), "--project-range", "--algo", "det", "--steps", "1"]);
    assert_eq!(projected.status.code(), Some(0));
}

#[test]
fn compare_identical_configs_gives_zero() {
    let out = gifs(&[
        "compare", "--builtin", "A", "--a-algo", "grid", "--a-schedule", "quad", "--a-steps", "6",
        "--b-algo", "grid", "--b-schedule", "quad", "--b-steps", "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("quantity,value\n"));
    assert!(csv.lines().any(|l| l == "h,0"), "{csv}");
}

#[test]
fn compare_deterministic_and_grid_within_bounds() {
    let out = gifs(&[
        "compare", "--builtin", "B", "--a-algo", "det", "--a-steps", "3", "--b-algo", "grid", "--b-schedule",
        "quad", "--b-steps", "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let value = |q: &str| -> f64 {
        csv.lines().find_map(|l| l.strip_prefix(&format!("{q},"))).unwrap().parse().unwrap()
    };
    assert!(value("h") <= value("bound_sum"));
}

#[test]
fn cost_table_matches_golden_file() {
    let out = gifs(&["cost", "--maps", "3", "--order", "2", "--dim", "2", "--contraction", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("cost_ratio.csv"));
}

#[test]
fn schedule_and_export_round_trip() {
    let out = gifs(&["schedule", "--builtin", "A", "--schedule", "quad", "--steps", "4"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1\n4\n9\n16\n");

    let dir = tempfile::tempdir().unwrap();
    let sched = tmp(&dir, "s.txt");
    fs::write(&sched, "# custom\n2\n5\n11\n").unwrap();
    let spec = format!("file:{}", path_str(&sched));
    let stats = tmp(&dir, "stats.csv");
    let out = gifs(&[
        "run", "--builtin", "A", "--algo", "grid", "--schedule", &spec, "--stats", path_str(&stats),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&stats).unwrap().lines().count(), 4);

    let system = tmp(&dir, "a.gifs");
    fs::write(&system, gifs(&["export", "--builtin", "A"]).stdout).unwrap();
    let a = gifs(&["run", "--system", path_str(&system), "--algo", "grid", "--schedule", "quad", "--steps", "5"]);
    let b = gifs(&["run", "--builtin", "A", "--algo", "grid", "--schedule", "quad", "--steps", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stderr, b.stderr);
}
