use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use approx::assert_relative_eq;

fn nlvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlvar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn energy_of_named_profiles() {
    let o = nlvar(&["energy", "--integrand", "half-square", "--profile", "linear", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "energy") - 0.5).abs() < 1e-13);

    let o = nlvar(&["energy", "--integrand", "two-well-bare", "--profile", "zero"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "energy"), 0.25);
}

#[test]
fn bad_specifications_exit_2() {
    for args in [
        &["energy", "--integrand", "nope", "--profile", "linear"][..],
        &["energy", "--integrand", "half-square"][..],
        &["energy", "--profile", "linear", "--n", "1"][..],
        &["energy", "--profile", "linear", "--bc", "0"][..],
        &["reproduce", "fig9"][..],
        &["frobnicate"][..],
        &["energy", "--input", "/nonexistent/curve.csv"][..],
    ] {
        assert_eq!(nlvar(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn overflowing_curve_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("big.csv");
    fs::write(&curve, "x,u\n0,0\n0.5,1e200\n1,1\n").unwrap();
    let o = nlvar(&["energy", "--integrand", "half-square", "--input", path_str(&curve)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn iteration_cap_exits_4_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvar(&["minimize", "--problem", "problem1", "--n", "32", "--max-iters", "1", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    assert_eq!(field(&text, "iters"), 1.0);
    assert!(text.contains("converged = false"));
    assert!(dir.path().join("minimizer.csv").exists());
}

#[test]
fn minimized_curve_round_trips_through_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvar(&["minimize", "--problem", "problem1", "--n", "64", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let reported = field(&stdout(&o), "energy");
    let curve = dir.path().join("minimizer.csv");
    let o = nlvar(&["energy", "--integrand", "half-square", "--input", path_str(&curve)]);
    assert_eq!(o.status.code(), Some(0));
    assert_relative_eq!(field(&stdout(&o), "energy"), reported, max_relative = 1e-12);
    assert!(reported < 0.5);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# linear profile\nintegrand = power:2\nprofile = linear\nn = 16\n").unwrap();
    let o = nlvar(&["energy", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "energy") - 1.0).abs() < 1e-13);

    let o = nlvar(&["energy", "--config", path_str(&cfg), "--integrand", "half-square"]);
    assert!((field(&stdout(&o), "energy") - 0.5).abs() < 1e-13);

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(nlvar(&["energy", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn residual_table_is_odd_for_the_linear_function() {
    let o = nlvar(&["residual", "--integrand", "half-square", "--profile", "linear", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip_while(|l| *l != "x,residual")
        .skip(1)
        .take_while(|l| !l.contains('='))
        .map(|l| {
            let (x, r) = l.split_once(',').unwrap();
            (x.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 7);
    for i in 0..7 {
        assert!((rows[i].1 + rows[6 - i].1).abs() < 1e-12);
    }
    assert_eq!(rows[3], (0.5, 0.0));
    assert!(field(&text, "norm_sup_with_boundary") >= field(&text, "norm_sup"));
}

#[test]
fn reproduce_is_idempotent() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = nlvar(&["reproduce", "fig2-problem1", "--n", "32", "--svg", "--out", path_str(dir.path())]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "fig2_minimizer.svg"));
    for name in names {
        let left = fs::read(a.path().join(&name)).unwrap();
        let right = fs::read(b.path().join(&name)).unwrap();
        assert!(left == right, "{name:?} differs between runs");
    }
}

#[test]
fn bolza_warns_about_non_convexity() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvar(&["reproduce", "fig4-bolza", "--n", "16", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o).to_lowercase();
    assert!(text.contains("convex"));
    assert!(dir.path().join("fig4_zero_n32.csv").exists());
}
