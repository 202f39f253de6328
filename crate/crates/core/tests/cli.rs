use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hocrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hocrip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&hocrip(&["--help"])), 0);
    let help = String::from_utf8(hocrip(&["--help"]).stdout).unwrap();
    assert!(help.contains("t,re,im") && help.contains("Exit codes"));
    assert_eq!(code(&hocrip(&[])), 1);
    assert_eq!(code(&hocrip(&["gen", "--length", "0"])), 1);
    assert_eq!(code(&hocrip(&["frobnicate"])), 1);
}

#[test]
fn gen_writes_samples_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocrip(&["gen", "--kind", "hoc3", "--alpha", "golden", "--length", "1024", "--out-dir", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sequence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert_eq!(lines[1], "t,re,im");
    assert_eq!(lines.len(), 2 + 1024);

    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["command"], "gen");
    assert_eq!(m["config"]["args"]["length"], 1024);
    assert_eq!(m["outputs"][0]["file"], "sequence.csv");
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["timestamp_utc"].as_str().unwrap().ends_with("+00:00"));
}

#[test]
fn gen_rejects_bad_alpha() {
    let dir = tempfile::tempdir().unwrap();
    for alpha in ["pi", "1,1,2,4", "1,1,2,8"] {
        let o = hocrip(&["gen", "--alpha", alpha, "--length", "4", "--out-dir", out_dir(dir.path())]);
        assert_eq!(code(&o), 1, "alpha {alpha}");
    }
}

#[test]
fn same_flags_give_identical_digests() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = hocrip(&["gen", "--kind", "prbs", "--length", "300", "--format", "bin", "--out-dir", out_dir(d.path())]);
        assert_eq!(code(&o), 0);
    }
    let da = json(&a.path().join("manifest.json"))["outputs"].clone();
    let db = json(&b.path().join("manifest.json"))["outputs"].clone();
    assert_eq!(da, db);
}

#[test]
fn acf_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocrip(&[
        "acf", "--spec", "hoc3:golden", "--spec", "sine:golden", "--spec", "prbs",
        "--lengths", "2^6..2^8", "--out-dir", out_dir(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("acf_comparison.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n,hoc3_golden,sine_golden,prbs");
    assert_eq!(lines.len(), 4);
    assert!(dir.path().join("acf_hoc3_golden.csv").exists());
    let summary = json(&dir.path().join("acf_summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["specs"].as_array().unwrap().len(), 3);

    let one = tempfile::tempdir().unwrap();
    assert_eq!(code(&hocrip(&["acf", "--spec", "pulse", "--lengths", "100", "--out-dir", out_dir(one.path())])), 0);
    let t = fs::read_to_string(one.path().join("acf_comparison.csv")).unwrap();
    assert_eq!(t.lines().count(), 2);

    assert_eq!(code(&hocrip(&["acf", "--spec", "chirp9", "--out-dir", out_dir(one.path())])), 1);
}

#[test]
fn rip_reports_certified_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocrip(&["rip", "--spec", "pulse", "--n", "16", "--p", "12", "--subsets", "0", "--out-dir", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("rip_report.json"));
    assert_eq!(r["report"]["q"], 12);
    assert_eq!(r["report"]["sampled_eigs"].as_array().unwrap().len(), 0);

    let o = hocrip(&["rip", "--n", "256", "--subsets", "5", "--seed", "3", "--out-dir", out_dir(dir.path())]);
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("rip_report.json"));
    assert!(r["report"]["q"].as_u64().unwrap() >= 2);
    assert!(r["report"]["r_bound"].as_f64().unwrap() < 1.0);
}

#[test]
fn cond_config_errors_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let run = dir.path().join("run");
    let rerun = dir.path().join("rerun");

    fs::write(&cfg, "n_values = [10, 20]\ntrials = 0\n").unwrap();
    assert_eq!(code(&hocrip(&["cond", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir(&run)])), 1);
    fs::write(&cfg, "n_values = [10]\ntrials = 3\ncolour = \"blue\"\n").unwrap();
    assert_eq!(code(&hocrip(&["cond", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir(&run)])), 1);
    assert_eq!(code(&hocrip(&["cond", "--config", "/nonexistent.toml", "--out-dir", out_dir(&run)])), 1);
    assert_eq!(code(&hocrip(&["cond", "--preset", "huge", "--out-dir", out_dir(&run)])), 1);

    fs::write(&cfg, "n_values = [10, 20]\np_rule = \"2n\"\nq_rule = \"n/5\"\ntrials = 6\nseed = 5\n").unwrap();
    let o = hocrip(&["cond", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir(&run)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(run.join("cond_cells.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,trial,cond,cond_eig,lambda_min,lambda_max");
    assert_eq!(csv.lines().count(), 1 + 12);

    // The resolved config lives in the manifest, so replay works without the file.
    fs::remove_file(&cfg).unwrap();
    let manifest = run.join("manifest.json");
    let o = hocrip(&["replay", "--manifest", manifest.to_str().unwrap(), "--out-dir", out_dir(&rerun)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(run.join("cond_cells.csv")).unwrap(),
        fs::read(rerun.join("cond_cells.csv")).unwrap()
    );

    // A tampered digest is detected.
    let mut m = json(&manifest);
    m["outputs"][0]["sha256"] = Value::String("0".repeat(64));
    fs::write(&manifest, serde_json::to_string(&m).unwrap()).unwrap();
    let o = hocrip(&["replay", "--manifest", manifest.to_str().unwrap(), "--out-dir", out_dir(&rerun)]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("DIFFERS"));
}

#[test]
fn numtheory_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_dir(dir.path());
    assert_eq!(code(&hocrip(&["numtheory", "convergents", "--alpha", "golden", "--k", "10", "--out-dir", d])), 0);
    let c = json(&dir.path().join("numtheory_convergents.json"));
    let dens: Vec<String> = c["convergents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["denominator"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(dens, ["1", "1", "2", "3", "5", "8", "13", "21", "34", "55", "89"]);

    assert_eq!(code(&hocrip(&["numtheory", "ostrowski", "--m", "10", "--beta", "golden-1", "--out-dir", d])), 0);
    let o = json(&dir.path().join("numtheory_ostrowski.json"));
    assert_eq!(o["reconstructed"], "10");
    assert_eq!(o["constraints_ok"], true);
    // Zeckendorf: 10 = 8 + 2
    let coeffs: Vec<&str> = o["coefficients"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let dens: Vec<&str> = o["denominators"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let used: Vec<&str> = coeffs.iter().zip(&dens).filter(|(c, _)| **c != "0").map(|(_, d)| *d).collect();
    assert_eq!(used, ["2", "8"]);

    assert_eq!(code(&hocrip(&["numtheory", "types", "--n", "10000", "--out-dir", d])), 0);
    let t = json(&dir.path().join("numtheory_types.json"));
    assert_eq!(t["violations"], 0);

    assert_eq!(code(&hocrip(&["numtheory", "phi", "--n", "200", "--tau-max", "4", "--out-dir", d])), 0);
    assert_eq!(json(&dir.path().join("numtheory_phi.json"))["rows"].as_array().unwrap().len(), 4);

    assert_eq!(code(&hocrip(&["numtheory", "khinchin", "--n", "1000", "--out-dir", d])), 0);
    assert_eq!(code(&hocrip(&["numtheory", "ostrowski", "--m", "-3", "--out-dir", d])), 1);
    assert_eq!(code(&hocrip(&["numtheory", "phi", "--n", "10", "--lambda", "1/2", "--out-dir", d])), 1);
}

#[test]
fn identify_reports_and_rejects_oversparse() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_dir(dir.path());
    let o = hocrip(&["identify", "--n", "200", "--p", "400", "--k", "5", "--trials", "5", "--out-dir", d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("identify_report.json"));
    assert_eq!(r["report"]["support_recovery_rate"], 1.0);

    let o = hocrip(&["identify", "--k", "5", "--sigma", "100", "--trials", "3", "--out-dir", d]);
    assert_eq!(code(&o), 0);
    assert!(json(&dir.path().join("identify_report.json"))["report"]["median_rel_error"].as_f64().unwrap() > 0.1);

    assert_eq!(code(&hocrip(&["identify", "--n", "10", "--k", "11", "--out-dir", d])), 1);
    assert_eq!(code(&hocrip(&["identify", "--spec", "hoc3:golden", "--out-dir", d])), 1);
}
