//! Drives the installed binary end to end through every verb.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatnet"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("heatnet-cli-test-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const CHAIN_CONFIG: &str = r#"
[lattice]
dim = 1
n = 5
k0 = 10.0
mass_mean = 1.0
mass_spread = 0.2
seed = 42

[reservoirs]
temperatures = [2.0, 1.0]
gamma0 = 0.3
cutoff = "infinite"
statistics = "quantum"
"#;

const SCALING_CONFIG: &str = r#"
[lattice]
dim = 1
n = 4
k0 = 10.0
mass_spread = 0.2
seed = 42

[reservoirs]
temperatures = [1.05, 0.95]
gamma0 = 0.5
cutoff = "infinite"
statistics = "classical"

[scaling]
sizes = [4, 6, 8]
gamma0 = [0.5]
realizations = 3
seed = 9
"#;

#[test]
fn state_heat_verify_round_trip() {
    let dir = workdir("verbs");
    let cfg = dir.join("chain.toml");
    fs::write(&cfg, CHAIN_CONFIG).unwrap();

    let out = bin()
        .args(["state", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "state: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["sites"], 5);
    assert_eq!(doc["local_temperatures"].as_array().unwrap().len(), 5);
    assert_eq!(doc["xx"].as_array().unwrap().len(), 5);

    let out = bin().args(["heat", "--config"]).arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "heat: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let net = doc["net"].as_array().unwrap();
    assert_eq!(net.len(), 2);
    // hot side emits, cold side absorbs
    assert!(net[0].as_f64().unwrap() > 0.0);
    assert!(net[1].as_f64().unwrap() < 0.0);

    let out = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "verify: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = workdir("badkey");
    let cfg = dir.join("bad.toml");
    fs::write(
        &cfg,
        CHAIN_CONFIG.replace("gamma0 = 0.3", "gamma0 = 0.3\ntypo_key = 1"),
    )
    .unwrap();
    let out = bin()
        .args(["state", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn scaling_csv_is_deterministic() {
    let dir = workdir("scaling");
    let cfg = dir.join("scaling.toml");
    fs::write(&cfg, SCALING_CONFIG).unwrap();

    let mut runs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "4")] {
        let prefix = dir.join(name);
        let out = bin()
            .args(["scaling", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&prefix)
            .args(["--threads", threads])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "scaling: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        runs.push(fs::read(prefix.with_extension("csv")).unwrap());
    }
    // identical bytes regardless of worker count
    assert_eq!(runs[0], runs[1]);

    let csv = String::from_utf8(runs[0].clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "gamma0,N,realization,J_over_dT");
    assert_eq!(lines.count(), 3 * 3); // sizes x realizations

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a.json")).unwrap()).unwrap();
    assert!(summary["sweeps"][0]["slope"].is_number());
}
