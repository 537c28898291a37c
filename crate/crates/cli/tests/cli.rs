use std::path::Path;
use std::process::{Command, Output};

fn cesn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cesn")).args(args).env_remove("CESN_SEED").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn selftest_passes() {
    let out = cesn(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("selftest:"));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn train_then_predict_recovers_training_label() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = cesn(&["synth", "--task", "sinusoid", "--classes", "3", "--train-per-class", "6", "--test-per-class", "2", "--out", p(&data), "--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = data.join("manifest.txt");
    let before = std::fs::read(&manifest).unwrap();

    let model = dir.path().join("model.txt");
    let out = cesn(&[
        "train", "--data", p(&manifest), "--model", p(&model), "--resample", "none", "--aperture", "100", "--reservoir-size", "20",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let text = std::fs::read_to_string(&manifest).unwrap();
    let line = text.lines().find(|l| l.contains(",train,")).unwrap();
    let mut fields = line.split(',');
    let (rel, label) = (fields.next().unwrap(), fields.next().unwrap());
    let out = cesn(&["predict", "--model", p(&model), "--input", p(&data.join(rel))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(1), Some(label), "{row}");

    let eval_csv = dir.path().join("eval.csv");
    let out = cesn(&["eval", "--model", p(&model), "--data", p(&manifest), "--split", "train", "--out", p(&eval_csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(eval_csv.exists() && dir.path().join("eval.confusion.csv").exists());
    assert_eq!(std::fs::read(&manifest).unwrap(), before, "inputs must not change");
}

#[test]
fn sweep_is_deterministic_and_job_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let out = cesn(&[
            "sweep", "--axis", "reservoir-size", "--grid", "2,10,60", "--trials", "20", "--seed", "1", "--jobs", jobs, "--out", p(&path),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(dir.path().join(name.replace(".csv", ".runtime.csv")).exists());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "4");
    let b = run("b.csv", "4");
    let c = run("c.csv", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("axis,cell,split,family,class,stat,value\n"));
    assert!(text.contains("reservoir_size,60,test,combined,all,mean,"));
}

#[test]
fn emitted_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let first = dir.path().join("first.csv");
    let out = cesn(&[
        "sweep", "--axis", "ablation", "--trials", "2", "--task", "sinusoid", "--classes", "3", "--resample", "linear", "--seed", "7",
        "--out", p(&first), "--emit-config", p(&cfg),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let second = dir.path().join("second.csv");
    let out = cesn(&["sweep", "--config", p(&cfg), "--out", p(&second)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
}

#[test]
fn seed_comes_from_environment_unless_given() {
    let dir = tempfile::tempdir().unwrap();
    let emit = |env_seed: Option<&str>, extra: &[&str]| {
        let cfg = dir.path().join("c.cfg");
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cesn"));
        cmd.args(["synth", "--out", p(&dir.path().join("d")), "--emit-config", p(&cfg)]).args(extra);
        match env_seed {
            Some(s) => cmd.env("CESN_SEED", s),
            None => cmd.env_remove("CESN_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(cfg).unwrap()
    };
    assert!(emit(None, &[]).contains("seed=1\n"));
    assert!(emit(Some("42"), &[]).contains("seed=42\n"));
    assert!(emit(Some("42"), &["--seed", "5"]).contains("seed=5\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cesn(&[])), 1);
    assert_eq!(code(&cesn(&["frobnicate"])), 1);
    assert_eq!(code(&cesn(&["--help"])), 0);
    assert_eq!(code(&cesn(&["--version"])), 0);

    let out = cesn(&["train", "--data", "x", "--model", "y", "--grid", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--grid"));
    let out = cesn(&["sweep", "--activation", "relu"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--activation"));
    assert_eq!(code(&cesn(&["train", "--data", "x"])), 1);

    let missing = dir.path().join("missing.txt");
    let out = cesn(&["train", "--data", p(&missing), "--model", p(&dir.path().join("m"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.txt"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "#schema: a\npath,label,split,kind\nx.csv,c,train\n").unwrap();
    let out = cesn(&["train", "--data", p(&bad), "--model", p(&dir.path().join("m"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.txt:3"), "{}", stderr(&out));
    assert!(!dir.path().join("m").exists());
}
