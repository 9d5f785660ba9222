use std::path::Path;
use std::process::{Command, Output};

fn pwsmf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwsmf"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_reproduces_both_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let tonic = pwsmf(dir.path(), &["simulate", "--I", "0.4260", "--g", "1.2308", "--N", "1000"]);
    assert!(tonic.status.success());
    assert!(stdout(&tonic).contains("regime=Tonic"), "{}", stdout(&tonic));
    let bursting = pwsmf(dir.path(), &["simulate", "--I", "0.1893", "--g", "1.2308", "--N", "1000"]);
    assert!(bursting.status.success());
    assert!(stdout(&bursting).contains("regime=Bursting"), "{}", stdout(&bursting));
    for f in ["network.csv", "spikes.csv", "meanfield.csv"] {
        assert!(dir.path().join(f).exists());
    }
    assert!(read(&dir.path().join("spikes.csv")).starts_with("neuron_id,t_spike\n"));
    assert!(read(&dir.path().join("meanfield.csv")).starts_with("time,s,w,H\n"));
}

#[test]
fn zero_duration_gives_an_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwsmf(dir.path(), &["simulate", "--duration", "0", "--N", "10"]);
    assert!(o.status.success());
    let net = read(&dir.path().join("network.csv"));
    assert!(net.lines().count() <= 2);
    assert_eq!(read(&dir.path().join("spikes.csv")), "neuron_id,t_spike\n");
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "simulate", "--N", "200", "--duration", "200"];
    assert!(pwsmf(a.path(), &args).status.success());
    assert!(pwsmf(b.path(), &args).status.success());
    for f in ["network.csv", "spikes.csv", "meanfield.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pwsmf(dir.path(), &["equilibria", "--g-grid", "0:2:3", "--I-grid", "0.3"]).status.success());
    let text = read(&dir.path().join("equilibria.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("g,I,branch,s,w,reality,kind,tr,det"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mantissa = row[3].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
    let x: f64 = row[3].parse().unwrap();
    assert_eq!(format!("{x:.16e}"), row[3]);
}

#[test]
fn invalid_model_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("broken.toml");
    std::fs::write(&model, "kind = \"izhikevich\"\ng = \"one\"\n").unwrap();
    let out = dir.path().join("out");
    let o = pwsmf(&out, &["--model", model.to_str().unwrap(), "diagram"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid parameters"));
    assert!(!out.exists());

    let o = pwsmf(&out, &["--model", "no-such-model", "curves"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pwsmf(&out, &["simulate", "--dt", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn diagram_writes_curves_and_codim_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwsmf(dir.path(), &["diagram", "--g-grid", "0:4:41"]);
    assert!(o.status.success());
    for f in ["sn.csv", "hopf.csv", "grazing.csv", "snlc.csv", "codim.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let codim: serde_json::Value = serde_json::from_str(&read(&dir.path().join("codim.json"))).unwrap();
    assert_eq!(codim["codim2"].as_array().unwrap().len(), 2);
    assert!(codim["codim3"].is_null());

    let o = pwsmf(dir.path(), &["--set", "tau_w=2.6", "diagram", "--g-grid", "0:4:41"]);
    assert!(o.status.success());
    let codim: serde_json::Value = serde_json::from_str(&read(&dir.path().join("codim.json"))).unwrap();
    assert_eq!(codim["codim3"]["label"], "Codim3");
}

#[test]
fn beb_scan_lists_the_four_types() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwsmf(dir.path(), &["beb-scan"]);
    assert!(o.status.success());
    let types: Vec<String> = read(&dir.path().join("beb.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_owned())
        .collect();
    assert_eq!(types, ["Persistence", "HomoclinicPersistence", "SNIC_BEB", "NonsmoothSaddleNode"]);
    assert!(dir.path().join("branches.csv").exists());
}

#[test]
fn hysteresis_only_above_g_star() {
    let dir = tempfile::tempdir().unwrap();
    let g_star = 1.7119565217391304f64;
    let above = pwsmf(dir.path(), &["hysteresis", "--g", &(g_star + 1.0).to_string()]);
    assert!(above.status.success());
    assert!(!stdout(&above).contains("mismatch=none"), "{}", stdout(&above));
    let below = pwsmf(dir.path(), &["hysteresis", "--g", &(g_star - 1.0).to_string()]);
    assert!(below.status.success());
    assert!(stdout(&below).contains("mismatch=none"), "{}", stdout(&below));
}

#[test]
fn cycle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwsmf(dir.path(), &["limit-cycle", "--g", "1.2308", "--I", "0.1893"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("nonsmooth=true"));
    let o = pwsmf(dir.path(), &["grazing", "--g", "1.0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&dir.path().join("grazing.json"))).unwrap();
    assert!(v["grazing"]["cycle"]["min_h"].as_f64().unwrap().abs() < 1e-9);
    let o = pwsmf(dir.path(), &["limit-cycle", "--g", "1.2308", "--I", "0.0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn meanfield_systems() {
    let dir = tempfile::tempdir().unwrap();
    for system in ["full", "reduced", "quiescent"] {
        let o = pwsmf(dir.path(), &["meanfield", "--system", system, "--duration", "300"]);
        assert!(o.status.success(), "{system}");
    }
    let o = pwsmf(
        dir.path(),
        &["meanfield", "--system", "embedded", "--epsilon", "1e-2", "--duration", "300", "--I", "0.1893"],
    );
    assert!(o.status.success());
    assert!(read(&dir.path().join("crossings.csv")).starts_with("time,direction\n"));
}
