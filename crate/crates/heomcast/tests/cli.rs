use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn heomcast(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heomcast"))
        .arg("--out-dir")
        .arg(out)
        .args(["--workers", "2", "--seed", "9"])
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = heomcast(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed:\n{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let gen = ["generate", "--n-samples", "10", "--depth", "4", "--dt-ps", "0.001"];
    let text = ok(out, &gen);
    assert!(text.contains("manifest:"), "{text}");
    assert_eq!(fs::read_dir(out.join("trajectories")).unwrap().count(), 10);
    let manifest = fs::read_to_string(out.join("manifest.csv")).unwrap();
    assert!(manifest.starts_with("# seed=9 mode=random requested=10 actual=10 sites=2 dt_ps=0.001 t_total_ps=1 K=4"));
    // second run reuses everything
    ok(out, &gen);
    assert_eq!(fs::read_to_string(out.join("manifest.csv")).unwrap(), manifest);

    let text = ok(out, &["split"]);
    assert!(text.starts_with("train 7 / val 1 / test 2"), "{text}");

    // 1001 points, 201 + 600 per window: 201 offsets × 2 sites × 10, every 10th kept
    let text = ok(out, &["window", "--stride", "10"]);
    assert!(text.starts_with("420 windows (201 input + 600 target points)"), "{text}");
    let windows = fs::read_to_string(out.join("windows_all.csv")).unwrap();
    assert_eq!(windows.lines().count(), 421);
    ok(out, &["window", "--split", "test", "--stride", "10"]);
    assert_eq!(fs::read_to_string(out.join("windows_test.csv")).unwrap().lines().count(), 85);

    let traj = out.join("trajectories/traj_000000.csv");
    let model = out.join("models/p1.txt");
    let text = ok(
        out,
        &["fit", "--input", traj.to_str().unwrap(), "--column", "P1", "--points", "201", "--output", model.to_str().unwrap()],
    );
    assert!(text.starts_with("selected (") || text.contains("fallback"), "{text}");
    let pred = out.join("pred.csv");
    ok(out, &["predict", "--model", model.to_str().unwrap(), "--horizon", "50", "--output", pred.to_str().unwrap()]);
    let pred = fs::read_to_string(pred).unwrap();
    assert_eq!(pred.lines().count(), 51);
    assert!(pred.starts_with("step,value\n1,"));
    for line in pred.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    let text = ok(
        out,
        &["benchmark", "--horizon", "100", "--horizon", "600", "--stride", "50", "--p-max", "2", "--q-max", "1"],
    );
    assert!(text.contains("naive") && text.contains("sarima"), "{text}");
    let report = fs::read_to_string(out.join("benchmark.csv")).unwrap();
    let rows: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "model,levels,horizon,mse_mean,mse_std,sec_per_sample,n");
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("naive,2,100,") && rows[4].starts_with("sarima,2,600,"));
    assert!(out.join("benchmark_sarima_h600_samples.csv").exists());

    let text = ok(out, &["audit", "--horizon", "600", "--systems", "3", "--stride", "100", "--p-max", "2", "--q-max", "1"]);
    assert!(text.starts_with("3 systems x 600 steps"), "{text}");
    let audit = fs::read_to_string(out.join("audit.csv")).unwrap();
    assert!(audit.contains("source_id,offset,step,sum_deviation,min_population"));
}

#[test]
fn fmo_template_and_demo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = out.join("fmo.toml");
    let c = cfg.to_str().unwrap();
    ok(out, &["fmo", "--config", c, "--template"]);
    assert!(!heomcast(out, &["fmo", "--config", c, "--template"]).status.success());

    let text = ok(
        out,
        &["fmo", "--config", c, "--depth", "3", "--check-depth", "2", "--t-total-ps", "0.05", "--dt-ps", "0.0005", "--lin-ps", "0.02"],
    );
    assert!(text.contains("K=2 vs K=3"), "{text}");
    assert!(text.contains("site 3:"), "{text}");
    for f in ["fmo_trajectory.csv", "fmo_forecast.csv", "fmo_plot.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let forecast = fs::read_to_string(out.join("fmo_forecast.csv")).unwrap();
    // zero couplings: site 1 stays full
    for line in forecast.lines().skip(1) {
        assert_eq!(line.split(',').nth(1).unwrap(), "1");
    }

    let o = heomcast(out, &["fmo", "--config", c, "--depth", "20", "--t-total-ps", "0.01"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("try --depth"), "{err}");
}

#[test]
fn bad_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = heomcast(out, &["benchmark"]);
    assert!(!o.status.success());
    let o = heomcast(out, &["generate", "--n-samples", "1", "--mode", "sobol"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown sampling mode"));
    let o = heomcast(out, &["fmo", "--config", out.join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
}
