use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wickgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wickgp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const SMALL_SIM: &[&str] = &["--set", "K=12", "--set", "N_list=6", "--set", "t_final=0.05"];

#[test]
fn simulate_writes_outputs_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let mut args = vec!["simulate", "--out", out.to_str().unwrap(), "--set", "R=2"];
    args.extend_from_slice(SMALL_SIM);
    let o = wickgp(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[PASS] blowups"));
    for f in ["runs.csv", "observables_r0_N6.csv", "observables_r1_N6.csv", "summary.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let s = summary(&out);
    assert_eq!(s["kind"], "simulate");
    assert_eq!(s["pass"], true);
    assert_eq!(s["config"]["K"], 12);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let common = [
        "--set", "K=16", "--set", "N_list=4,6,8", "--set", "R=4", "--set", "t_final=0.05", "--out",
    ];
    let mut first = vec!["converge_N"];
    first.extend_from_slice(&common);
    first.extend_from_slice(&[out.to_str().unwrap(), "--threads", "1"]);
    wickgp(&first);
    let a = dir_bytes(&out);
    fs::remove_dir_all(&out).unwrap();
    let mut second = vec!["converge_N"];
    second.extend_from_slice(&common);
    second.extend_from_slice(&[out.to_str().unwrap(), "--threads", "3"]);
    wickgp(&second);
    let b = dir_bytes(&out);
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.cfg");
    fs::write(
        &cfg,
        "# small noisy run\nkind = simulate\nK = 12\nN_list = 6\nt_final = 0.02\nlambda = -1\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let o = wickgp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "dt=0.002",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["seed"], 9);
    assert_eq!(s["config"]["dt"], 0.002);
    assert_eq!(s["config"]["lambda"], -1.0);

    // the file names a different study than the subcommand
    let o = wickgp(&["converge_N", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = wickgp(&["simulate", "--set", "bogus=1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let o = wickgp(&["simulate", "--set", "N_list=8,4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = wickgp(&["simulate", "--set", "kind=converge_N"]);
    assert_eq!(o.status.code(), Some(2));

    let o = wickgp(&["no_such_study"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn checkpoint_then_resume_matches_one_long_run() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = tmp.path().join("state.json");
    let (half, full, resumed) = (tmp.path().join("half"), tmp.path().join("full"), tmp.path().join("resumed"));
    let mut args = vec!["simulate", "--set", "K=12", "--set", "N_list=6", "--set", "lambda=-1"];
    args.extend_from_slice(&["--set", "record_every=10"]);

    let mut a = args.clone();
    let ck = format!("checkpoint_out={}", ckpt.display());
    a.extend_from_slice(&["--set", "t_final=0.05", "--set", &ck, "--out", half.to_str().unwrap()]);
    assert_eq!(wickgp(&a).status.code(), Some(0));

    let mut b = args.clone();
    b.extend_from_slice(&["--set", "t_final=0.1", "--out", full.to_str().unwrap()]);
    assert_eq!(wickgp(&b).status.code(), Some(0));

    let mut c = args.clone();
    let rf = format!("resume_from={}", ckpt.display());
    c.extend_from_slice(&["--set", "t_final=0.1", "--set", &rf, "--out", resumed.to_str().unwrap()]);
    assert_eq!(wickgp(&c).status.code(), Some(0));

    let last_row = |dir: &Path| {
        let text = fs::read_to_string(dir.join("observables_r0_N6.csv")).unwrap();
        text.lines().last().unwrap().to_string()
    };
    assert_eq!(last_row(&full), last_row(&resumed));
}

#[test]
fn zero_noise_levels_coincide() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("z");
    let o = wickgp(&[
        "converge_N",
        "--set", "noise=zero",
        "--set", "K=16",
        "--set", "N_list=4,6,8",
        "--set", "R=2",
        "--set", "lambda=-1",
        "--set", "t_final=0.1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out);
    assert_eq!(s["fits"]["gap"]["status"], "degenerate");
    let gaps = fs::read_to_string(out.join("gaps.csv")).unwrap();
    for line in gaps.lines().skip(1) {
        let gap: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap < 1e-9, "{line}");
    }
}

#[test]
fn focusing_gate_admits_zero_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    let o = wickgp(&[
        "focusing_gate",
        "--set", "noise=zero",
        "--set", "K=12",
        "--set", "N_list=6",
        "--set", "R=2",
        "--set", "t_final=0.05",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out);
    assert_eq!(s["metrics"]["pass_fraction_L0.1"], 1.0);
    assert_eq!(s["metrics"]["admitted_runs"], 2.0);
}

#[test]
fn help_lists_every_study() {
    let o = wickgp(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in [
        "simulate", "converge_N", "noise_rates", "wick_rates", "diverging_bound", "inequalities", "focusing_gate",
    ] {
        assert!(text.contains(name), "{name} missing from help");
    }
}
