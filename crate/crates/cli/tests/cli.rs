use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cbw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbw"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("cbw runs")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap_or("")
        .to_string()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn gen_graph_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = cbw(tmp.path(), &["gen-graph", "--seed", "7", "--out-dir", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["graph.csv", "graph.txt", "scm.txt"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    assert_eq!(header(&tmp.path().join("a/graph.csv")), "kind,from,to");
}

#[test]
fn discover_on_xor_writes_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cbw(
        tmp.path(),
        &["discover", "--example", "xor", "--out-dir", "d"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = tmp.path().join("d");
    assert_eq!(
        header(&d.join("ledger.csv")),
        "ordinal,Z,X,outcome,samples_spent"
    );
    assert_eq!(header(&d.join("pomis.csv")), "pomis,size");
    assert_eq!(header(&d.join("phase_samples.csv")), "stage,samples");
    let budget = fs::read_to_string(d.join("budget.txt")).unwrap();
    assert!(budget.contains("a=") && budget.contains("rounds="));
}

#[test]
fn discover_audit_exports_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let scm = tmp.path().join("toy.scm");
    fs::write(
        &scm,
        "node A 2\nnode Y 2\nreward Y\nedge A Y\nnoise A 0.5 0.5\nnoise Y 1 0\n\
         mech A 0 0\nmech A 1 1\nmech Y 0,0 0\nmech Y 0,1 1\nmech Y 1,0 1\nmech Y 1,1 0\n",
    )
    .unwrap();
    let o = cbw(
        tmp.path(),
        &["discover", "--scm", "toy.scm", "--audit", "--out-dir", "d"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        header(&tmp.path().join("d/store.csv")),
        "intervention_key,sample_index,var,value"
    );
    let family = fs::read_to_string(tmp.path().join("d/pomis.csv")).unwrap();
    assert_eq!(family, "pomis,size\n\"{A}\",1\n");
}

#[test]
fn bandit_short_horizon_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cbw(
        tmp.path(),
        &["bandit", "--example", "xor", "--horizon", "10"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon 10"));
}

#[test]
fn bandit_writes_regret_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "horizon_multiple = 2\n");
    let o = cbw(
        tmp.path(),
        &[
            "bandit",
            "--example",
            "xor",
            "--config",
            &cfg,
            "--stride",
            "100000",
            "--out-dir",
            "r",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = tmp.path().join("r");
    assert_eq!(
        header(&r.join("regret.csv")),
        "round,arm_key,reward,inst_regret,cum_regret"
    );
    assert_eq!(header(&r.join("arms.csv")), "arm_key,pulls,empirical_mean");
}

#[test]
fn bad_configuration_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "rho = 0\n");
    assert_eq!(
        cbw(tmp.path(), &["exp-arms", "--config", &cfg])
            .status
            .code(),
        Some(2)
    );
    let cfg = write_config(tmp.path(), "unknown_key = 1\n");
    assert_eq!(
        cbw(tmp.path(), &["exp-samples", "--config", &cfg])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cbw(tmp.path(), &["exp-arms", "--config", "missing.cfg"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn capacity_error_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "n = 64\nk = 100000\ntrials = 1\n");
    let o = cbw(tmp.path(), &["exp-arms", "--config", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn experiments_emit_headers_and_repeat_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n = 3\nrho = 0.5\nrho_l = 0.5\ntrials = 1\nhorizon_multiple = 2\nstride = 50000\n",
    );
    for out in ["a", "b"] {
        for cmd in ["exp-samples", "exp-arms", "exp-regret"] {
            let o = cbw(
                tmp.path(),
                &[cmd, "--config", &cfg, "--seed", "5", "--out-dir", out],
            );
            assert!(
                o.status.success(),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let a = tmp.path().join("a");
    assert_eq!(
        header(&a.join("samples.csv")),
        "n,rho,rho_l,trial,samples_observable,samples_full_latents,samples_pomis"
    );
    assert!(header(&a.join("samples_summary.csv")).starts_with("n,rho,rho_l,trials,mean_"));
    assert_eq!(
        header(&a.join("arms.csv")),
        "n,pomis_arm_count,naive_arm_count,samples_pomis"
    );
    assert_eq!(
        header(&a.join("regret.csv")),
        "round,cum_regret_pomis,cum_regret_full"
    );
    for f in [
        "samples.csv",
        "samples_summary.csv",
        "arms.csv",
        "regret.csv",
        "regret_trials.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f} differs between runs"
        );
    }
}
