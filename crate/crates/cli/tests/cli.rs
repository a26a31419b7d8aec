use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

fn dimdist(dir: &Path, args: &[&str], config: &str) -> Run {
    std::fs::write(dir.join("run.toml"), config).unwrap();
    let out = dir.join("out");
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_dimdist"))
        .args(args)
        .arg("--config")
        .arg(dir.join("run.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
        out,
    }
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

#[test]
fn strict_net_on_a_fine_grid_is_clean() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(dir.path(), &["net", "--strict"], "[input]\ngenerator = \"grid(1025,1)\"\n");
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("violations: 0"), "{}", run.stdout);
    let report = json(run.out.join("verification.json"));
    assert_eq!(report["mode"], "strict");
    assert_eq!(report["fatal"], 0);
    assert!(run.out.join("system.json").exists());
}

#[test]
fn relaxed_net_reports_containment_flags() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(dir.path(), &["net", "--relaxed"], "[input]\ngenerator = \"cantor(1/3,6)\"\n");
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("(iv) flags: "), "{}", run.stdout);
    let report = json(run.out.join("verification.json"));
    assert_eq!(report["mode"], "relaxed");
}

#[test]
fn malformed_csv_is_an_input_error_with_its_row() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("pts.csv"), "x,y\n0,0\n1,0\n1,oops\n").unwrap();
    let run = dimdist(dir.path(), &["net"], "[input]\npoints = \"pts.csv\"\n");
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("row 4"), "{}", run.stderr);
}

#[test]
fn bad_config_values_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(dir.path(), &["dims"], "thetas = [1.5]\n[input]\ngenerator = \"grid(3,1)\"\n");
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("theta"), "{}", run.stderr);
    let run = dimdist(dir.path(), &["dims"], "[input]\npoints = \"missing.csv\"\n");
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("does not exist"), "{}", run.stderr);
    let run = dimdist(dir.path(), &["dims"], "[deltas]\nstart = 0.5\nratio = 2.0\n[input]\ngenerator = \"grid(3,1)\"\n");
    assert_eq!(run.code, 2);
}

#[test]
fn cantor_box_dimension_via_theta_one() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(
        dir.path(),
        &["dims"],
        "thetas = [1.0]\n[input]\ngenerator = \"cantor(1/3,10)\"\n[deltas]\nstart = 0.25\ncount = 10\n",
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = json(run.out.join("dims.json"));
    let v = report["intermediate"][0]["value"].as_f64().unwrap();
    assert!((v - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{v}");
    let csv = std::fs::read_to_string(run.out.join("theta_1.csv")).unwrap();
    assert!(csv.starts_with("delta,s\n"));
    assert!(run.out.join("box.csv").exists() && run.out.join("hausdorff.csv").exists());
}

#[test]
fn sequence_set_half_intermediate_dimension() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(dir.path(), &["dims"], "thetas = [0.5]\n[input]\ngenerator = \"sequence_set(1,2000)\"\n");
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(run.out.join("dims.json"))["intermediate"][0]["value"].as_f64().unwrap();
    assert!((v - 1.0 / 3.0).abs() < 0.1, "{v}");
}

#[test]
fn singleton_dimensions_are_zero() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("one.csv"), "0.3,0.7\n").unwrap();
    let run = dimdist(dir.path(), &["dims"], "[input]\npoints = \"one.csv\"\n");
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = json(run.out.join("dims.json"));
    assert_eq!(report["box"]["value"].as_f64(), Some(0.0));
    assert_eq!(report["hausdorff"]["value"].as_f64(), Some(0.0));
    for e in report["intermediate"].as_array().unwrap() {
        assert_eq!(e["value"].as_f64(), Some(0.0));
    }
}

#[test]
fn identity_experiment_on_cantor_passes() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(
        dir.path(),
        &["experiment"],
        "thetas = [1.0]\n[input]\ngenerator = \"cantor(1/3,8)\"\n[map]\nkind = \"identity\"\n[holder]\np = 2.0\nalpha = 1.0\n",
    );
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let report = json(run.out.join("experiment_theta_1.json"));
    assert_eq!(report["violations"], 0);
}

#[test]
fn square_root_experiment_stays_below_the_bound() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(
        dir.path(),
        &["experiment", "--threads", "2"],
        "thetas = [0.25, 0.5, 1.0]\n[input]\ngenerator = \"sequence_set(2,2000)\"\n[map]\nkind = \"power(1/2)\"\n[holder]\np = 2.0\nalpha = 0.5\n",
    );
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let summary = json(run.out.join("experiment.json"));
    for s in summary.as_array().unwrap() {
        assert_eq!(s["violations"], 0);
        assert!(s["image_headline"].as_f64().unwrap() <= s["bound_headline"].as_f64().unwrap() + 0.05);
    }
    let csv = std::fs::read_to_string(run.out.join("experiment_theta_0.5.csv")).unwrap();
    assert!(csv.starts_with("delta,empirical,bound\n"));
}

#[test]
fn coarse_grid_has_no_usable_scales() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(
        dir.path(),
        &["experiment"],
        "thetas = [0.25]\n[input]\ngenerator = \"sequence_set(2,2000)\"\n[map]\nkind = \"power(1/2)\"\n[deltas]\nstart = 0.9\nratio = 0.95\ncount = 2\n",
    );
    assert_eq!(run.code, 4, "{}{}", run.stdout, run.stderr);
    assert!(run.stdout.contains("no usable scales"));
    assert!(run.out.join("experiment.json").exists());
}

#[test]
fn understated_holder_data_reports_violations_with_exit_3() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(
        dir.path(),
        &["experiment"],
        "thetas = [1.0]\n[input]\ngenerator = \"sequence_set(2,2000)\"\n[map]\nkind = \"power(1/2)\"\n[holder]\np = 2.0\nalpha = 1.0\n",
    );
    assert_eq!(run.code, 3, "{}{}", run.stdout, run.stderr);
    assert!(run.out.join("experiment_theta_1.json").exists());
}

#[test]
fn bounds_evaluates_formulas() {
    let dir = TempDir::new().unwrap();
    let run = dimdist(dir.path(), &["bounds"], "[bound]\nvariant = \"thm11\"\nd = 0.5\np = 2.0\nalpha = 0.5\n");
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout.trim(), "6.6666666666666663e-1");
    let run = dimdist(dir.path(), &["bounds"], "[bound]\nvariant = \"thm11\"\nd = 0.5\np = 0.5\nalpha = 0.5\n");
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("hypothesis"), "{}", run.stderr);
}

#[test]
fn gradient_and_profile_from_map_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("src.csv"), "0\n1\n2\n3\n").unwrap();
    std::fs::write(dir.path().join("dst.csv"), "0\n2\n").unwrap();
    std::fs::write(dir.path().join("map.csv"), "source,target\n0,0\n1,0\n2,1\n3,1\n").unwrap();
    let config = "[input]\npoints = \"src.csv\"\n[target]\npoints = \"dst.csv\"\n[map]\nfile = \"map.csv\"\n\
                  [holder]\np = 2.0\nalpha = 1.0\n[gradient]\ns = 1.0\np = \"inf\"\n";
    let run = dimdist(dir.path(), &["gradient"], config);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let g = json(run.out.join("gradient.json"));
    // largest quotient is d_Y/d = 2/1 on the pair (1, 2)
    assert_eq!(g["seminorm"].as_f64(), Some(1.0));
    let run = dimdist(dir.path(), &["holder"], config);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.out.join("profile.csv").exists());
}

#[test]
fn generate_writes_points_and_reruns_are_identical() {
    let dir = TempDir::new().unwrap();
    let first = dimdist(dir.path(), &["generate", "cantor(1/3,4)"], "");
    assert_eq!(first.code, 0, "{}", first.stderr);
    let a = std::fs::read_to_string(first.out.join("points.csv")).unwrap();
    assert_eq!(a.lines().count(), 33);
    let second = dimdist(dir.path(), &["generate"], "[input]\ngenerator = \"cantor(1/3,4)\"\n");
    assert_eq!(std::fs::read_to_string(second.out.join("points.csv")).unwrap(), a);

    let config = "thetas = [0.5]\n[input]\ngenerator = \"sequence_set(1,300)\"\n";
    dimdist(dir.path(), &["dims"], config);
    let x = std::fs::read(dir.path().join("out/dims.json")).unwrap();
    dimdist(dir.path(), &["dims", "--threads", "1"], config);
    assert_eq!(std::fs::read(dir.path().join("out/dims.json")).unwrap(), x);
}
