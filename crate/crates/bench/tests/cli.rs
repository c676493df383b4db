use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lazycg_bench::tracefile::{OnlineFile, TraceFile};

fn lazycg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazycg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const COMPARISON: &str = r#"
output_dir = "out"

[domain]
kind = "simplex"
n = 6

[objective]
kind = "regression"
density = 0.6
rows = 4
seed = 3

[[run]]
name = "lazy"
algorithm = "lazy_cg_parameter_free"
epsilon = 1e-5
max_iters = 3000

[[run]]
name = "vanilla"
algorithm = "vanilla_fw"
epsilon = 1e-5
max_iters = 3000
"#;

#[test]
fn lazy_run_uses_fewer_lp_calls_than_vanilla() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COMPARISON);
    let out = lazycg(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("lazy: lazy_cg_parameter_free"));
    assert!(stdout(&out).contains("cache_hit_rate="));
    let lazy = TraceFile::read(&dir.path().join("out/lazy.csv")).unwrap();
    let vanilla = TraceFile::read(&dir.path().join("out/vanilla.csv")).unwrap();
    let rows = lazy.records.len().min(vanilla.records.len());
    assert!(rows > 10);
    let (a, b) = (&lazy.records[rows - 1], &vanilla.records[rows - 1]);
    assert_eq!(a.t, b.t);
    assert!(a.lp_calls < b.lp_calls, "{} vs {}", a.lp_calls, b.lp_calls);
}

#[test]
fn sweep_writes_one_trace_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COMPARISON);
    let out = lazycg(
        &["sweep", cfg.to_str().unwrap(), "--param", "K=1,1.1,2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for k in ["1", "1.1", "2"] {
        for run in ["lazy", "vanilla"] {
            let p = dir.path().join(format!("out/{run}_K={k}.csv"));
            let t = TraceFile::read(&p).unwrap();
            assert_eq!(t.run.name, format!("{run}_K={k}"));
        }
    }
    let bad = lazycg(&["sweep", cfg.to_str().unwrap(), "--param", "bogus=1"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &COMPARISON.replace("n = 6", "n = \"six\""));
    let out = lazycg(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());

    // solver-level configuration errors surface before anything is written
    let cfg = write_config(
        dir.path(),
        &COMPARISON.replace("epsilon = 1e-5\nmax_iters = 3000\n\n[[run]]", "step = \"schedule\"\n\n[[run]]"),
    );
    let out = lazycg(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());

    let missing = lazycg(&["run", "nope.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn runs_are_reproducible_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COMPARISON);
    let strip = |p: &Path| {
        let mut t = TraceFile::read(p).unwrap();
        for r in t.records.iter_mut() {
            r.elapsed_s = 0.0;
        }
        t.solver_time_s = 0.0;
        t.oracle_time_s = 0.0;
        t
    };
    assert!(lazycg(&["run", cfg.to_str().unwrap(), "--output-dir", "a"], dir.path()).status.success());
    assert!(lazycg(&["run", cfg.to_str().unwrap(), "--output-dir", "b"], dir.path()).status.success());
    assert_eq!(strip(&dir.path().join("a/lazy.csv")), strip(&dir.path().join("b/lazy.csv")));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COMPARISON);
    let out = lazycg(
        &["run", cfg.to_str().unwrap(), "--no-cache", "--seed", "5", "--output-dir", "nc"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let t = TraceFile::read(&dir.path().join("nc/lazy.csv")).unwrap();
    assert_eq!(t.records.last().unwrap().cache_hits, 0);
    // K = 1 rules out the augmentation oracle
    let out = lazycg(&["run", cfg.to_str().unwrap(), "--oracle", "augmentation"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lazycg(&["run", cfg.to_str().unwrap(), "--time-limit", "0"], dir.path());
    assert!(out.status.success());
    let t = TraceFile::read(&dir.path().join("out/lazy.csv")).unwrap();
    assert!(t.run.truncated);
}

const TEXTBOOK: &str = r#"
output_dir = "out"

[domain]
kind = "simplex"
n = 3

[objective]
kind = "regression"
density = 1.0
rows = 3
seed = 4

[[run]]
name = "textbook"
algorithm = "lazy_cg_textbook"
step = "schedule"
max_iters = 200
"#;

#[test]
fn verify_passes_on_textbook_trace_and_catches_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TEXTBOOK);
    let cfg = cfg.to_str().unwrap();
    assert!(lazycg(&["run", cfg], dir.path()).status.success());
    let trace = dir.path().join("out/textbook.csv");
    let ok = lazycg(&["verify", trace.to_str().unwrap(), cfg], dir.path());
    assert!(ok.status.success(), "{}{}", stdout(&ok), stderr(&ok));
    assert!(stdout(&ok).contains("textbook: pass"));

    let mut file = TraceFile::read(&trace).unwrap();
    file.records[6].phi *= 1.5;
    file.records[9].phi *= 0.5;
    let bad = dir.path().join("out/corrupt.csv");
    file.write(&bad).unwrap();
    let out = lazycg(&["verify", bad.to_str().unwrap(), cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("fail at row t=7"), "{}", stdout(&out));
}

#[test]
fn verify_online_trace_on_the_cube() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[domain]
kind = "hypercube"
n = 3

[objective]
kind = "linear_stream"
rounds = 150
seed = 2

[[run]]
name = "online"
algorithm = "lazy_online_cg"

[[run]]
name = "adversarial"
algorithm = "run_adversarial"
"#,
    );
    let cfg = cfg.to_str().unwrap();
    let out = lazycg(&["run", cfg], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("regret="));
    for name in ["online", "adversarial"] {
        let trace = dir.path().join(format!("traces/{name}.csv"));
        let companion = OnlineFile::read(&dir.path().join(format!("traces/{name}.online.csv"))).unwrap();
        assert_eq!(companion.records.len(), 150);
        let out = lazycg(&["verify", trace.to_str().unwrap(), cfg], dir.path());
        assert!(out.status.success(), "{}", stdout(&out));
        assert!(stdout(&out).contains(&format!("{name}: pass")));
    }
}

#[test]
fn verify_skips_bounds_on_large_domains() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[domain]
kind = "hypercube"
n = 20

[objective]
kind = "identity"
seed = 1

[[run]]
name = "big"
algorithm = "lazy_cg_parameter_free"
"#,
    );
    let cfg = cfg.to_str().unwrap();
    assert!(lazycg(&["run", cfg], dir.path()).status.success());
    let trace = dir.path().join("traces/big.csv");
    let out = lazycg(&["verify", trace.to_str().unwrap(), cfg], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("skipped: oracle-contract checks only"));
}

#[test]
fn verify_rejects_unknown_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TEXTBOOK);
    let cfg_s = cfg.to_str().unwrap();
    assert!(lazycg(&["run", cfg_s], dir.path()).status.success());
    let other = write_config(dir.path(), &TEXTBOOK.replace("name = \"textbook\"", "name = \"other\""));
    let trace = dir.path().join("out/textbook.csv");
    let out = lazycg(&["verify", trace.to_str().unwrap(), other.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
