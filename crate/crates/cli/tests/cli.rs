//! End-to-end checks of the binary: exit codes, bit-exact CSV headers,
//! byte-deterministic reruns, and output-directory resolution.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopcache"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "coopcache {args:?} failed:\n{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL_PARAMS: &str = "
[params]
users = 10
clusters = 2
library = 12
popular_files = 6
user_cache = 1
cluster_cache = 3
beta = 0.8
mean_file_size_mbit = 4.0
arrival_rate = 0.5
d2d_rate_mbps = 120.0
cell_rate_mbps = 50.0
backhaul_rate_mbps = 5.0
";

fn header_of(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn beta_sweep_headers_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "beta.scenario",
        &format!(
            "{SMALL_PARAMS}
[scenario]
schemes = [\"cpf\", \"rc\", \"gca\"]
sweep = \"beta\"
grid = [0.3, 0.9]
rc_replications = 5

[sim]
num_requests = 20000
seed = 11
"
        ),
    );
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    run_ok(&["run", scenario.to_str().unwrap(), "--out", out_a.to_str().unwrap()]);
    run_ok(&["run", scenario.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    assert_eq!(
        header_of(&out_a.join("delay_vs_beta.csv")),
        "scheme,beta,n_cache,analytic_delay_s,sim_delay_s,sim_ci95_s,stable"
    );
    assert_eq!(
        header_of(&out_a.join("throughput_vs_beta.csv")),
        "scheme,x,per_request_throughput_bps"
    );
    for name in ["delay_vs_beta.csv", "throughput_vs_beta.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    // every scheme appears at every grid point, in declaration order
    let rows = fs::read_to_string(out_a.join("delay_vs_beta.csv")).unwrap();
    let tags: Vec<&str> = rows.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(tags, ["cpf", "cpf", "rc", "rc", "gca", "gca"]);
}

#[test]
fn cache_sweep_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "cache.scenario",
        &format!(
            "{SMALL_PARAMS}
[scenario]
schemes = [\"cpf\"]
sweep = \"n-cache\"
grid = [2, 4, 6]
"
        ),
    );
    let out = tmp.path().join("out");
    run_ok(&["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(
        header_of(&out.join("gain_vs_cache.csv")),
        "n_cache,delay_coop_s,delay_noncoop_s,gain,baseline_unstable"
    );
    assert_eq!(
        header_of(&out.join("energy_vs_cache.csv")),
        "n_cache,e_lc_j_per_s,e_rc_j_per_s,gain"
    );
    assert_eq!(
        header_of(&out.join("throughput_vs_cache.csv")),
        "scheme,x,per_request_throughput_bps"
    );
    let gain = fs::read_to_string(out.join("gain_vs_cache.csv")).unwrap();
    assert_eq!(gain.lines().count(), 4);
}

#[test]
fn outage_and_scaling_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "outage.scenario",
        "
[params]
users = 12
clusters = 12
library = 12
popular_files = 6
user_cache = 1
beta = 0.5
mean_file_size_mbit = 4.0
arrival_rate = 0.5
d2d_rate_mbps = 120.0
cell_rate_mbps = 50.0
backhaul_rate_mbps = 5.0
rho_scale = 1.0

[scenario]
sweep = \"y\"
grid = [1, 2, 3, 4, 6, 12]

[scaling]
betas = [0.5]
m_grid = [1000, 10000]
y_grid = [1, 2, 4]
",
    );
    let out = tmp.path().join("out");
    run_ok(&["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(
        header_of(&out.join("outage_vs_y.csv")),
        "y,p_outage_coop,p_outage_noncoop,p_outage_noncoop_approx"
    );
    assert_eq!(
        header_of(&out.join("scaling_vs_m.csv")),
        "m,gamma,t_sum_bound_bps,loglog_slope"
    );
    assert_eq!(fs::read_to_string(out.join("outage_vs_y.csv")).unwrap().lines().count(), 7);
    assert!(out.join("tsum_vs_y.csv").exists());
}

#[test]
fn greedy_trace_emits_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), "trace.scenario", SMALL_PARAMS);
    let out = tmp.path().join("out");
    run_ok(&["greedy-trace", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("greedy_trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,cluster,file,marginal_s"));
    // 2 clusters x 3 slots, steps numbered from 1
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.split(',').next().unwrap(), (i + 1).to_string());
    }
}

#[test]
fn custom_placement_scenario_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = scenarios_dir().join("custom-placement.scenario");
    let out = tmp.path().join("out");
    run_ok(&["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rows = fs::read_to_string(out.join("delay_vs_beta.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);
    assert!(rows.lines().skip(1).all(|l| l.starts_with("custom,")));
}

#[test]
fn out_dir_falls_back_to_environment_variable() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "env.scenario",
        &format!(
            "{SMALL_PARAMS}
[scenario]
sweep = \"beta\"
grid = [0.5]
"
        ),
    );
    let out = tmp.path().join("from-env");
    let status = bin()
        .args(["run", scenario.to_str().unwrap()])
        .env("COOPCACHE_OUT_DIR", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("delay_vs_beta.csv").exists());
}

#[test]
fn scenario_outputs_key_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-key");
    let scenario = write_scenario(
        tmp.path(),
        "key.scenario",
        &format!(
            "{SMALL_PARAMS}
[scenario]
sweep = \"beta\"
grid = [0.5]
outputs = \"{}\"
",
            out.display()
        ),
    );
    run_ok(&["run", scenario.to_str().unwrap()]);
    assert!(out.join("delay_vs_beta.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    // missing file
    let out = bin().args(["run", "no-such.scenario"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // unparseable TOML
    let bad = write_scenario(tmp.path(), "bad.scenario", "[params\nusers=");
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // unsorted grid
    let unsorted = write_scenario(
        tmp.path(),
        "unsorted.scenario",
        &format!("{SMALL_PARAMS}\n[scenario]\nsweep = \"beta\"\ngrid = [0.9, 0.3]\n"),
    );
    let out = bin().args(["run", unsorted.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // usage error
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_and_reports_json() {
    let out = run_ok(&["verify", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 6);
    for c in checks {
        assert!(c["pass"].as_bool().unwrap(), "{}", c["name"]);
        assert!(!c["measured"].as_str().unwrap().is_empty());
    }
}
