use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use critwave::io;
use critwave::profile::{RadialProfile, ScaledW};
use critwave::{FieldState, RadialMesh};

fn critwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critwave"))
        .current_dir(dir)
        .env_remove("CRITWAVE_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_series_and_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "data.family = near_w\ndata.delta = -0.1\nt_end = 1\nmesh.rmax = 40\nanalysis.g_radii = 5, 10\n",
    )
    .unwrap();
    let o = critwave(dir.path(), &["simulate", "--config", "run.cfg", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    assert_eq!(
        series.lines().next().unwrap(),
        "t,E,sup_u,mu,nu,lambda1,f,z1,z2,Z,d,g_R5,g_R10"
    );
    assert_eq!(series.lines().count(), 12);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "Completed");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "series.csv" && f["rows"] == 11));
}

#[test]
fn simulate_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(dir.path(), &["simulate", "--config", "missing.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    fs::write(dir.path().join("bad.cfg"), "data.family = near_w\ndata.delta = -0.1\ncfl = 2\n").unwrap();
    assert_eq!(code(&critwave(dir.path(), &["simulate", "--config", "bad.cfg"])), 2);
    assert_eq!(code(&critwave(dir.path(), &["simulate"])), 2);
}

#[test]
fn blow_up_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"data": {"family": "near_w", "delta": 0.1}, "mesh": {"h": 0.04, "rmax": 40}}"#,
    )
    .unwrap();
    let o = critwave(dir.path(), &["simulate", "--config", "run.json", "--out", "o", "--quiet"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "BlowUpDetected");
    let t_star = report["t_star"].as_f64().unwrap();
    assert!(t_star > 1.0 && t_star < 2.0, "{t_star}");
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "data.family = bump\ndata.amp = 0.5\ndata.sigma = 1\nt_end = 2\nmesh.rmax = 20\nseed = 3\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        assert_eq!(code(&critwave(dir.path(), &["simulate", "--config", "run.cfg", "--out", out])), 0);
    }
    for f in ["series.csv", "report.json", "snapshots/frame_00020.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn env_sets_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "data.family = bump\ndata.amp = 0.1\ndata.sigma = 1\nt_end = 0.2\nmesh.rmax = 10\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_critwave"))
        .current_dir(dir.path())
        .env("CRITWAVE_OUT", "from_env")
        .args(["simulate", "--config", "run.cfg"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("from_env/report.json").exists());
}

#[test]
fn dalembert_check_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(dir.path(), &["dalembert", "check", "--n", "1000", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let worst: f64 = text.split_whitespace().last().unwrap().parse().unwrap();
    assert!(worst >= 0.5 - 1e-12, "{text}");
    let o = critwave(dir.path(), &["dalembert", "check", "--n", "0"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn dalembert_evolve_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.csv"), "s,f0,f1\n").unwrap();
    let o = critwave(dir.path(), &["dalembert", "evolve", "--input", "empty.csv", "--t", "2", "--out", "e"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(dir.path().join("e/evolved.csv")).unwrap(), "s,f0,f1\n");

    // f0 = 0, f1 = 1 on [1, 2]: at t = 3, f = 1/2 on [2, 4].
    fs::write(dir.path().join("step.csv"), "s,f0,f1\n0,0,0\n1,0,1\n2,0,\n").unwrap();
    let o = critwave(dir.path(), &["dalembert", "evolve", "--input", "step.csv", "--t", "3", "--out", "s"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("s/evolved.csv")).unwrap();
    let row = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap_or(0.0)).collect::<Vec<_>>())
        .find(|r| r[0] == 3.0)
        .expect("a breakpoint between the shells");
    assert!((row[1] - 0.5).abs() < 1e-12, "{text}");

    fs::write(dir.path().join("bad.csv"), "s,f0,f1\n0,1,0\n1,0,\n").unwrap();
    let o = critwave(dir.path(), &["dalembert", "evolve", "--input", "bad.csv", "--t", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn analyze_stationary_w() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("w/snapshots");
    fs::create_dir_all(&snaps).unwrap();
    let mesh = Arc::new(RadialMesh::uniform(0.01, 40.0).unwrap());
    let w = ScaledW::new(1.0, 1.0);
    let mut index = String::from("index,t,file\n");
    for k in 0..6 {
        let t = 0.1 * k as f64;
        let frame = FieldState::from_profiles(mesh.clone(), t, |r| w.value(r), |_| 0.0);
        let name = format!("frame_{k:05}.csv");
        io::write_snapshot(fs::File::create(snaps.join(&name)).unwrap(), &frame).unwrap();
        index.push_str(&format!("{k},{t},{name}\n"));
    }
    fs::write(snaps.join("times.csv"), index).unwrap();

    let o = critwave(dir.path(), &["analyze", "w", "--out", "an", "--ball-radii", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(dir.path().join("an/series.csv")).unwrap();
    let header: Vec<&str> = series.lines().next().unwrap().split(',').collect();
    let d_col = header.iter().position(|c| *c == "d").unwrap();
    assert_eq!(header.last(), Some(&"ball1"));
    let rows: Vec<&str> = series.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let d: f64 = row.split(',').nth(d_col).unwrap().parse().unwrap();
        assert!(d.abs() < 1e-3, "{row}");
    }
    assert_eq!(code(&critwave(dir.path(), &["analyze", "nowhere"])), 2);
}

#[test]
fn profiles_two_bubbles() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(
        dir.path(),
        &["profiles", "--synthetic", "1:1,-1:0.001", "--seed", "4", "--out", "p"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dec: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p/decomposition.json")).unwrap()).unwrap();
    let profiles = dec["profiles"].as_array().unwrap();
    assert_eq!(profiles.len(), 2);
    assert_eq!(profiles[0]["iota"], 1);
    assert_eq!(profiles[1]["iota"], -1);
    assert!(dec["defects"]["grad_defect"].is_number());

    // The written snapshot decomposes the same way when read back.
    let o = critwave(dir.path(), &["profiles", "--snapshot", "p/snapshot.csv", "--out", "q"]);
    assert_eq!(code(&o), 0);
    let again: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("q/decomposition.json")).unwrap()).unwrap();
    assert_eq!(again["profiles"].as_array().unwrap().len(), 2);

    assert_eq!(code(&critwave(dir.path(), &["profiles", "--synthetic", "2:1"])), 2);
    assert_eq!(code(&critwave(dir.path(), &["profiles"])), 2);
}

#[test]
fn sweep_over_delta() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.cfg"), "data.family = near_w\ndata.delta = 0\n").unwrap();
    let o = critwave(
        dir.path(),
        &["sweep", "--config", "t.cfg", "--grid", "data.delta=-0.1,0,0.1", "--jobs", "3", "--out", "sw"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let agg = fs::read_to_string(dir.path().join("sw/aggregate.csv")).unwrap();
    let rows: Vec<Vec<&str>> = agg.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(agg.lines().next().unwrap(), "cell,data.delta,outcome,t_star,nu_hat,error");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "Completed");
    assert_eq!(rows[2][2], "BlowUpDetected");
    assert!(rows[2][3].parse::<f64>().unwrap() < 20.0);
    // The unperturbed sample of W sits an O(h²) distance from the stationary
    // state, so its late-time fate is resolution dependent; it must still run.
    assert!(rows[1][2] == "Completed" || rows[1][2] == "BlowUpDetected");
    assert!(dir.path().join("sw/cell_002/report.json").exists());

    // A failing cell is recorded while the others still count.
    let o = critwave(
        dir.path(),
        &["sweep", "--config", "t.cfg", "--grid", "data.delta=-0.1,oops", "--out", "sw2"],
    );
    assert_eq!(code(&o), 0);
    let agg = fs::read_to_string(dir.path().join("sw2/aggregate.csv")).unwrap();
    assert!(agg.lines().nth(2).unwrap().contains("failed"));
}
