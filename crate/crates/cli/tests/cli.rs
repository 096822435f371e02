use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gencomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gencomp"))
        .args(args)
        .output()
        .expect("spawn gencomp")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gencomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run_to(path: &Path, args: &[&str]) -> Vec<u8> {
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--out", p]);
    let out = gencomp(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn phase_is_byte_identical_across_runs() {
    let cfg = scratch("phase.cfg");
    std::fs::write(&cfg, "family = edg\nn = 8\nr = 1\nm = 12, 30\ntrials = 3\n").unwrap();
    let args = ["phase", "--config", cfg.to_str().unwrap(), "--seed", "42"];
    let a = run_to(&scratch("a.csv"), &args);
    let b = run_to(&scratch("b.csv"), &args);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.lines().any(|l| l.starts_with("row_type,")));
    assert_eq!(text.lines().filter(|l| l.starts_with("summary,")).count(), 2);
}

#[test]
fn other_subcommands_are_deterministic() {
    for (name, args) in [
        ("edg", vec!["edg", "--n", "8", "--r", "2", "--m", "60", "--trials", "2"]),
        (
            "audit",
            vec!["audit", "--set", "family=entry", "--set", "n=5", "--set", "r=1", "--set", "batch_mode=full", "--trials", "2"],
        ),
        ("diagnose", vec!["diagnose", "--set", "family=hankel", "--set", "n=6", "--set", "r=2"]),
        ("bound", vec!["bound", "--set", "family=edg", "--set", "n=10", "--beta", "1.5"]),
    ] {
        let a = run_to(&scratch(&format!("{name}1.out")), &args);
        let b = run_to(&scratch(&format!("{name}2.out")), &args);
        assert!(!a.is_empty(), "{name}");
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn flags_override_config_file() {
    let cfg = scratch("seeded.cfg");
    std::fs::write(&cfg, "family = entry\nn = 5\nr = 1\nm = 20\ntrials = 4\nseed = 1\n").unwrap();
    let out = gencomp(&["phase", "--config", cfg.to_str().unwrap(), "--trials", "2", "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# seed=9\n"));
    assert!(text.contains("# trials=2\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("trial,")).count(), 2);
}

#[test]
fn unwritable_output_fails_before_running() {
    let out = gencomp(&["phase", "--out", "/nonexistent-dir/x.csv", "--set", "n=40", "--set", "m=100000"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonexistent-dir"));
}

#[test]
fn bad_input_is_reported() {
    assert!(!gencomp(&["phase", "--trials", "0"]).status.success());
    assert!(!gencomp(&["bound", "--beta", "1.0"]).status.success());
    assert!(!gencomp(&["phase", "--set", "nonsense"]).status.success());
}
