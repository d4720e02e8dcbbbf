//! End-to-end runs of the `fermat` binary on scenario files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stationary_fermat::registry::parse_model;
use stationary_fermat::variational::arrival_times;
use stationary_fermat::{DiscretePath, StationaryModel, Topology};
use tempfile::TempDir;

const FLAT: &str = r#"
model = "flat"
kappa = 0.0
p = { y = [0.0, 0.0], t = 0.0 }
q = { y = [3.0, 4.0], t = 0.0 }

[solver]
segments = 40

[seeds]
random = 2
"#;

fn read_table_file(path: &Path, topology: Topology) -> stationary_fermat::Result<DiscretePath> {
    DiscretePath::read_table(fs::File::open(path).unwrap(), topology)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermat"))
        .args(args)
        .current_dir(dir)
        .env_remove("FERMAT_OUT_DIR")
        .output()
        .unwrap()
}

fn scenario(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_writes_reproducible_tables() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "flat.toml", FLAT);
    let a = run(dir.path(), &["solve", &file, "--out", "a", "--quiet"]);
    let b = run(dir.path(), &["solve", &file, "--out", "b", "--quiet"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    for name in ["summary.csv", "records.json", "paths/record-000-z.csv", "paths/record-000-geodesic.csv"] {
        let (x, y) = (fs::read(dir.path().join("a").join(name)).unwrap(), fs::read(dir.path().join("b").join(name)).unwrap());
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn path_tables_reproduce_the_summary() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "flat.toml", FLAT);
    assert_eq!(run(dir.path(), &["solve", &file, "--out", "o", "-q"]).status.code(), Some(0));
    let out = dir.path().join("o");
    let mut summary = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let row = summary.records().next().unwrap().unwrap();
    let t_plus: f64 = row[1].parse().unwrap();
    assert!((t_plus - 5.0).abs() < 1e-6);

    let model = parse_model("flat").unwrap();
    let z = read_table_file(&out.join("paths/record-000-z.csv"), model.topology()).unwrap();
    let ev = arrival_times(&model, &z, 0.0).unwrap();
    assert_eq!(ev.t_plus, t_plus);
    let g = read_table_file(&out.join("paths/record-000-geodesic.csv"), model.topology()).unwrap();
    assert_eq!(g.end().t, z.end().t + t_plus);

    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("records.json")).unwrap()).unwrap();
    assert_eq!(json["model"], "flat");
    assert_eq!(json["records"][0]["arrival"]["t_plus"].as_f64().unwrap(), t_plus);
}

#[test]
fn segments_override_reaches_the_tables() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "flat.toml", FLAT);
    assert_eq!(run(dir.path(), &["solve", &file, "--out", "o", "--segments", "12", "--seed", "9", "-q"]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("o/paths/record-000-z.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 13);
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "flat.toml", FLAT);
    let status = Command::new(env!("CARGO_BIN_EXE_fermat"))
        .args(["validate", &file, "-q"])
        .current_dir(dir.path())
        .env("FERMAT_OUT_DIR", dir.path().join("from-env"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("from-env/validation.json").exists());
}

#[test]
fn parse_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let bad_syntax = scenario(&dir, "a.toml", "model = \"flat\"\nkappa = [0.0,\n");
    let unknown_key = scenario(&dir, "b.toml", &format!("{FLAT}\n[solver2]\nx = 1\n"));
    let unknown_model = scenario(&dir, "c.toml", &FLAT.replace("\"flat\"", "\"sphere(2)\""));
    for f in [&bad_syntax, &unknown_key, &unknown_model] {
        let o = run(dir.path(), &["solve", f, "--out", "o"]);
        assert_eq!(o.status.code(), Some(2), "{f}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(dir.path(), &["solve", &bad_syntax]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(run(dir.path(), &["solve", "missing.toml"]).status.code(), Some(2));
}

#[test]
fn inadmissible_energy_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "hot.toml", &FLAT.replace("kappa = 0.0", "kappa = 0.1"));
    assert_eq!(run(dir.path(), &["validate", &file, "--out", "o"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["solve", &file, "--out", "o"]).status.code(), Some(3));
    assert!(!dir.path().join("o/summary.csv").exists());
}

#[test]
fn no_convergence_exits_with_4() {
    let dir = TempDir::new().unwrap();
    let text = FLAT.replace("segments = 40", "segments = 40\nmax_iters = 1\ngrad_tol = 1e-14")
        .replace("random = 2", "random = 2\nstraight = false");
    let file = scenario(&dir, "stuck.toml", &text);
    let o = run(dir.path(), &["solve", &file, "--out", "o", "-q"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_is_monotone_in_energy() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "sweep.toml", &FLAT.replace("kappa = 0.0", "kappa = [0.0, -0.5, -2.0]"));
    let o = run(dir.path(), &["sweep", &file, "--out", "o", "-q"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(dir.path().join("o/sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    let expected = [5.0, 26f64.sqrt(), 29f64.sqrt()];
    assert_eq!(rows.len(), 3);
    for (row, want) in rows.iter().zip(expected) {
        let t: f64 = row[2].parse().unwrap();
        assert!((t - want).abs() < 1e-6, "{t} vs {want}");
        assert_eq!(&row[row.len() - 1], "true");
    }
    for i in 0..3 {
        assert!(dir.path().join(format!("o/kappa-{i:03}/summary.csv")).exists());
    }

    let empty = scenario(&dir, "empty.toml", &FLAT.replace("kappa = 0.0", "kappa = []"));
    assert_eq!(run(dir.path(), &["sweep", &empty, "--out", "e"]).status.code(), Some(2));
}
