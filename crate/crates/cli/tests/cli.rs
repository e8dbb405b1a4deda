use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gq"))
        .args(args)
        .current_dir(dir)
        .env_remove("GQ_THREADS")
        .output()
        .expect("spawn gq")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV data rows, skipping the `#` config line and the header.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn gen_accepts_prime_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = gq(&["gen", "--scheme", "highrate", "--n", "257", "--sigma2", "1", "--out", "cb.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cb = read_json(&dir.path().join("cb.json"));
    assert_eq!(cb["N"], 257);
    assert_eq!(cb["scheme"], "HighRateGQ");
    assert_eq!(cb["centroids"].as_array().unwrap().len(), 257);
    assert_eq!(cb["metadata"]["config"]["sigma2"], 1.0);
    let line = String::from_utf8_lossy(&o.stdout);
    assert!(line.contains("N=257") && line.contains("D_hr="), "{line}");
}

#[test]
fn gen_rect_rejects_non_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = gq(&["gen", "--scheme", "rect", "--n", "257"], dir.path());
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("257") && e.contains("any N"), "{e}");
}

#[test]
fn gen_lloydmax_records_convergence_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = gq(&["gen", "--scheme", "lloydmax", "--n", "64", "--trace", "t.csv", "--out", "lm.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cb = read_json(&dir.path().join("lm.json"));
    assert_eq!(cb["metadata"]["converged"], true);
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let d: Vec<f64> = data_rows(&trace).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d.len() > 2);
    assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn eval_is_deterministic_and_matches_high_rate_distortion() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gq(&["gen", "--scheme", "highrate", "--n", "256", "--out", "cb.json"], dir.path())), 0);
    let a = gq(&["eval", "cb.json", "--seed", "7", "--out", "a.json", "--voronoi", "v.csv"], dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = gq(&["eval", "cb.json", "--seed", "7", "--out", "b.json"], dir.path());
    assert_eq!(code(&b), 0);
    let ra = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(ra, std::fs::read(dir.path().join("b.json")).unwrap());

    let report = read_json(&dir.path().join("a.json"));
    let mse = report["mse"].as_f64().unwrap();
    let d_hr = 2.0 * std::f64::consts::PI / 768.0;
    assert!((mse / d_hr - 1.0).abs() < 0.03, "{mse}");
    assert_eq!(report["samples_used"], 1_000_000);
    assert_eq!(report["seed"], 7);

    let v = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    let mut cells: Vec<String> = data_rows(&v).into_iter().map(|r| r[0].clone()).collect();
    cells.dedup();
    assert_eq!(cells.len(), 256);
}

#[test]
fn eval_thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gq(&["gen", "--scheme", "polar", "--n", "24", "--out", "p.json"], dir.path())), 0);
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_gq"))
            .args(["eval", "p.json", "--samples", "200000", "--out", out])
            .current_dir(dir.path())
            .env("GQ_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run("1", "one.json"), run("3", "three.json"));
    let o = Command::new(env!("CARGO_BIN_EXE_gq"))
        .args(["rd"])
        .env("GQ_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn eval_cells_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gq(&["gen", "--scheme", "highrate", "--n", "32", "--out", "cb.json"], dir.path())), 0);
    let o = gq(
        &["eval", "cb.json", "--samples", "10000", "--cells", "c.csv", "--grid", "--grid-m", "512", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = data_rows(&std::fs::read_to_string(dir.path().join("c.csv")).unwrap());
    assert_eq!(rows.len(), 32);
    let p: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-7);
    let report = read_json(&dir.path().join("r.json"));
    assert!(report["metadata"]["grid_mse"].as_f64().unwrap() > 0.0);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage
    assert_eq!(code(&gq(&["gen", "--scheme", "spiral", "--n", "4"], dir.path())), 1);
    assert_eq!(code(&gq(&["gen", "--scheme", "highrate", "--n", "0"], dir.path())), 1);
    assert_eq!(code(&gq(&["nonsense"], dir.path())), 1);
    assert_eq!(code(&gq(&["profile", "--schemes", "polar"], dir.path())), 1);
    // data / format
    assert_eq!(code(&gq(&["eval", "missing.json"], dir.path())), 2);
    std::fs::write(dir.path().join("bad.json"), r#"{"scheme":"LBG","N":2,"sigma2":1,"centroids":[[0,0]]}"#).unwrap();
    let o = gq(&["eval", "bad.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("centroids"));
    std::fs::write(dir.path().join("bad.toml"), "samples = \"many\"\n").unwrap();
    assert_eq!(code(&gq(&["rd", "--config", "bad.toml"], dir.path())), 2);
    // numerical: a centroid far outside the grid owns no grid points
    std::fs::write(
        dir.path().join("far.json"),
        r#"{"scheme":"LBG","N":2,"sigma2":1,"centroids":[[0,0],[100,0]]}"#,
    )
    .unwrap();
    let o = gq(&["eval", "far.json", "--samples", "10000", "--cells", "c.csv", "--grid-m", "256"], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gq(&["gen", "--scheme", "highrate", "--n", "8", "--out", "cb.json"], dir.path())), 0);
    std::fs::write(dir.path().join("c.toml"), "seed = 5\nsamples = 20000\n").unwrap();
    let o = gq(&["eval", "cb.json", "--config", "c.toml", "--samples", "30000", "--out", "r.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["seed"], 5);
    assert_eq!(r["samples_used"], 30000);
    assert_eq!(r["metadata"]["config"]["samples"], 30000);
}

#[test]
fn sweep_keeps_going_past_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = gq(
        &["sweep", "--schemes", "rect,highrate,polar", "--ns", "5,4", "--samples", "20000", "--grid-m", "256", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("# {"));
    let header = text.lines().nth(1).unwrap();
    assert!(header.starts_with("scheme,N,rate_bits,mse,mse_db,ci_halfwidth,seed"));
    let rows = data_rows(&text);
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let want = [("highrate", "4"), ("highrate", "5"), ("rect", "4"), ("rect", "5"), ("polar", "4"), ("polar", "5")];
    assert_eq!(keys, want.map(|(a, b)| (a.to_string(), b.to_string())));
    let rect5 = &rows[3];
    assert!(rect5[3].is_empty() && !rect5[11].is_empty());
    for r in rows.iter().filter(|r| !r[3].is_empty()) {
        let mse: f64 = r[3].parse().unwrap();
        let d_rd: f64 = r[10].parse().unwrap();
        assert!(mse >= d_rd);
    }
}

#[test]
fn profile_and_rd_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = gq(&["profile", "--schemes", "highrate", "--ns", "16,64", "--out", "p.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = data_rows(&std::fs::read_to_string(dir.path().join("p.csv")).unwrap());
    assert_eq!(rows.len(), 80);
    let m: Vec<f64> = rows[..16].iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(m.windows(2).all(|w| w[1] > w[0]));

    let o = gq(&["rd", "--rates", "0,8"], dir.path());
    assert_eq!(code(&o), 0);
    let rows = data_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 3.90625e-3);
    assert_eq!(code(&gq(&["rd", "--rates", "-1"], dir.path())), 1);
}
