//! End-to-end checks of the `move-bench` binary.

use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_move-bench"))
}

#[test]
fn gen_is_byte_identical_and_prints_banner() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bench()
            .args(["gen", "--paradigm", "move", "--sampling", "sparse9", "--budget", "1500", "--seed", "7", "--jobs", "1"])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out).unwrap(), String::from_utf8(o.stdout).unwrap())
    };
    let (a, stdout) = run("a.ds");
    let (b, _) = run("b.ds");
    assert_eq!(a, b);
    assert!(stdout.starts_with("# move-bench gen"));
    assert!(stdout.contains("motion.v_max = 0.05"));
    assert!(stdout.contains("# --seed 7"));
}

#[test]
fn train_and_eval_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("d.ds");
    let ck = dir.path().join("p.ckpt");
    let ev = dir.path().join("eval");
    let ok = |c: &mut Command| {
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    ok(bench().args(["gen", "--budget", "1000", "--seed", "1", "--out"]).arg(&ds));
    let out = ok(bench()
        .args(["train", "--policy", "bc", "--steps", "50", "--set", "train.batch_size=16", "--dataset"])
        .arg(&ds)
        .arg("--out")
        .arg(&ck));
    assert!(out.contains("train.steps = 50"));
    assert!(out.contains("train.batch_size = 16"));
    ok(bench().args(["eval", "--grid", "2", "--episodes", "1", "--checkpoint"]).arg(&ck).arg("--out").arg(&ev));
    assert!(ev.join("summary.json").is_file());
}

#[test]
fn usage_errors_exit_with_two() {
    let o = bench().args(["train", "--dataset", "missing.ds", "--out", "x.ckpt"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.ds"));

    let o = bench().args(["gen", "--bogus", "--out", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let o = bench()
        .args(["gen", "--set", "motion.v_max=-1", "--out"])
        .arg(dir.path().join("x.ds"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x.ds").exists());

    let o = bench().args(["gen", "--set", "motion.nope=1", "--out", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "# slower objects\nmotion.v_max = 0.02\n").unwrap();
    let o = bench()
        .args(["gen", "--budget", "1000", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("d.ds"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("motion.v_max = 0.02"));
}
