use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_treelight"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn");
    out.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn column(csv: &str, k: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn gen_then_check() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(d.path(), &["gen", "--q", "2", "--z", "3", "--seed", "42", "-o", "gate.json"]), 0);
    let gate: serde_json::Value = serde_json::from_str(&read(d.path(), "gate.json")).unwrap();
    assert!(gate["metadata"]["tree_unitarity_residual"].as_f64().unwrap() < 1e-10);
    let trace = read(d.path(), "gate.json.trace.csv");
    assert!(trace.starts_with("iteration,residual\n"));
    assert!(d.path().join("gate.json.manifest.json").exists());
    assert_eq!(run(d.path(), &["check", "gate.json"]), 0);
    // generic gates are not maximum velocity
    assert_eq!(run(d.path(), &["check", "gate.json", "--max-velocity", "2:1"]), 1);
}

#[test]
fn kim_gate_is_clifford_at_half_pi_field() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(d.path(), &["kim", "--z", "3", "--h", "pi/2", "-o", "kim.json"]), 0);
    assert_eq!(run(d.path(), &["check", "kim.json", "--clifford", "--max-velocity", "2:1"]), 0);
    assert_eq!(run(d.path(), &["kim", "--z", "3", "--h", "pi/8", "-o", "kim8.json"]), 0);
    assert_eq!(run(d.path(), &["check", "kim8.json", "--clifford"]), 1);
}

#[test]
fn entropy_example() {
    let d = TempDir::new().unwrap();
    let args = ["entropy", "--model", "kim", "--z", "3", "--r", "7", "--tree", "unrooted", "-o", "ee.csv"];
    assert_eq!(run(d.path(), &args), 0);
    let csv = read(d.path(), "ee.csv");
    assert!(csv.starts_with("t,S_sim_ln2,S_formula_ln2,region_descriptor\n"));
    let s = column(&csv, 1);
    for t in (0..=6).step_by(2) {
        assert_eq!(s[t], 384.0 * (1.0 - 0.5f64.powi(t as i32)), "t={t}");
    }
    assert_eq!(column(&csv, 2), s);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(d.path(), &["gen", "--bogus"]), 2);
    assert_eq!(run(d.path(), &["entropy", "--J", "pi/8", "-o", "x.csv"]), 2);
    assert_eq!(run(d.path(), &["geom", "--graph", "torus:3", "-o", "g.csv"]), 2);
    assert_eq!(run(d.path(), &["check", "missing.json"]), 2);
    // a two-iteration budget cannot converge
    assert_eq!(run(d.path(), &["gen", "--max-iter", "2", "-o", "g.json"]), 3);
    assert!(d.path().join("g.json.trace.csv").exists());
    assert!(!d.path().join("g.json").exists());
}

#[test]
fn kim_otoc_asymptote() {
    let d = TempDir::new().unwrap();
    let args = ["otoc", "--model", "kim", "--h", "0.6", "--e", "1", "--e-tilde", "2", "--alpha", "xz", "--beta", "y", "--steps", "8", "-o", "o.csv"];
    assert_eq!(run(d.path(), &args), 0);
    let m: serde_json::Value = serde_json::from_str(&read(d.path(), "o.csv.manifest.json")).unwrap();
    let v = m["results"]["asymptote"]["value"].as_f64().unwrap();
    assert!((v + 0.5).abs() < 1e-8, "{v}");
    assert_eq!(column(&read(d.path(), "o.csv"), 0).len(), 9);
}

#[test]
fn geom_square_lattice() {
    let d = TempDir::new().unwrap();
    let args = ["geom", "--graph", "grid:5x5", "--i", "0", "--j", "24", "--delta", "--check-pairs", "-o", "g.csv"];
    assert_eq!(run(d.path(), &args), 0);
    let sizes = column(&read(d.path(), "g.csv"), 1);
    assert_eq!(sizes, vec![1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
    let rep: serde_json::Value = serde_json::from_str(&read(d.path(), "g.csv.json")).unwrap();
    assert_eq!(rep["hyperbolicity"]["delta"].as_f64(), Some(4.0));
}

#[test]
fn outputs_are_byte_reproducible() {
    let suites: [(&[&str], &[&str]); 7] = [
        (&["gen", "--seed", "7", "-o", "out"], &["out", "out.trace.csv"]),
        (&["kim", "--z", "4", "--h", "pi/2", "-o", "out"], &["out"]),
        (&["corr", "--model", "haar", "--seed", "5", "--oracle", "--heatmap", "hm.csv", "-o", "out"], &["out", "hm.csv"]),
        (&["otoc", "--model", "tree-unitary", "--seed", "3", "--steps", "20", "-o", "out"], &["out"]),
        (&["entropy", "--tree", "rooted", "--r", "4", "--shift", "shifted", "-o", "out"], &["out"]),
        (&["geom", "--graph", "patch:7:3:1", "--delta", "--check-pairs", "-o", "out"], &["out", "out.json"]),
        (&["bound", "--instances", "6", "--gates", "2", "--seed", "11", "-o", "out"], &["out"]),
    ];
    for (args, files) in suites {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(run(a.path(), args), 0, "{args:?}");
        assert_eq!(run(b.path(), args), 0, "{args:?}");
        for f in files {
            let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
            assert!(!x.is_empty());
            assert!(x == y, "{args:?}: {f} differs between runs");
        }
    }
}
