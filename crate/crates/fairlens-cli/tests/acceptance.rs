//! Acceptance: assess with a fixed seed, run twice, produces byte-identical
//! reports once the timestamp field is stripped.
//!
//! Run with `cargo test -p fairlens-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn run_ok(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_fairlens"))
        .args(args)
        .output()
        .expect("binary should spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn strip_timestamp(report: &str) -> String {
    report
        .lines()
        .filter(|line| !line.trim_start().starts_with("\"timestamp\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn acceptance_10_assess_is_deterministic() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();

    run_ok(&[
        "generate",
        "--spec",
        "kind=discrete_joint; n=2000; joint_table=[[0.375, 0.125], [0.125, 0.375]]; noise_dim=2; seed=6",
        "--out-prefix",
        &s(&p("data")),
    ]);
    std::fs::write(
        p("fast.toml"),
        "[mine]\nbatch_size = 128\nmap_dim = 8\nstats_hidden = [32, 32]\nmax_iters = 1200\nconvergence_window = 100\n",
    )
    .unwrap();

    let assess = |out: &str, seed: &str| {
        run_ok(&[
            "assess",
            "--representations",
            &s(&p("data.reps.csv")),
            "--attributes",
            &s(&p("data.attrs.txt")),
            "--metrics",
            "rlb,entropy,dcor2",
            "--config",
            &s(&p("fast.toml")),
            "--seed",
            seed,
            "--out",
            &s(&p(out)),
        ]);
    };
    assess("a.json", "7");
    assess("b.json", "7");
    assess("c.json", "8");

    let a = std::fs::read_to_string(p("a.json")).unwrap();
    let b = std::fs::read_to_string(p("b.json")).unwrap();
    let c = std::fs::read_to_string(p("c.json")).unwrap();
    assert_eq!(
        strip_timestamp(&a),
        strip_timestamp(&b),
        "same seed must give byte-identical reports modulo the timestamp"
    );
    assert_ne!(
        strip_timestamp(&a),
        strip_timestamp(&c),
        "a different seed must actually change the report"
    );

    // the stripped line really was the timestamp and nothing else
    let differing: Vec<&str> = a
        .lines()
        .zip(b.lines())
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.trim_start())
        .collect();
    assert!(
        differing.iter().all(|l| l.starts_with("\"timestamp\":")),
        "unexpected differing lines: {differing:?}"
    );

    let elapsed = start.elapsed().as_secs_f64();
    println!("acceptance 10 assess_determinism: PASS ({elapsed:.1}s)");
}
