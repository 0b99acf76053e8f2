//! Byte-level determinism: every subcommand must produce identical stdout
//! and identical written artifacts regardless of the worker-thread count,
//! and across repeated runs.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

/// One full session touching every subcommand. Artifact names are relative,
/// so each run resolves them inside its own temp directory; reports echo no
/// paths, so the bytes must agree across directories too.
const SCRIPT: &[(&str, &[&str])] = &[
    ("orders", &["orders", "--a", "1", "--p", "2", "--q", "7", "--n-max", "10", "--certify"]),
    ("orbit", &["orbit", "--a", "1", "--p", "3", "--q", "2", "--n", "6"]),
    (
        "measure bernoulli",
        &[
            "measure", "--kind", "bernoulli", "--p", "3", "--probs", "1/2,1/3,1/6", "--depth",
            "6", "--write", "m.json",
        ],
    ),
    (
        "measure sine",
        &["measure", "--kind", "sine", "--delta", "0.1", "--depth", "10", "--write", "s.json"],
    ),
    ("check rational", &["check", "--measure", "m.json"]),
    ("check float", &["check", "--measure", "s.json"]),
    ("nu", &["nu", "--measure", "m.json", "--level", "2", "--write-measure", "nu.json"]),
    (
        "phi",
        &["phi", "--measure", "m.json", "--level", "2", "--out", "report.json"],
    ),
    ("fourier", &["fourier", "--measure", "s.json", "--m-max", "32", "--csv", "f.csv"]),
    ("weyl", &["weyl", "--measure", "m.json", "--q", "2", "--m", "1", "--level", "2"]),
    (
        "rigidity",
        &[
            "rigidity", "--measure", "m.json", "--q", "2", "--m", "1", "--n-from", "2",
            "--n-to", "3", "--csv", "r.csv",
        ],
    ),
    ("imbalance", &["imbalance", "--alpha", "0.5", "--n-max", "40", "--csv", "i.csv"]),
    (
        "transfer",
        &[
            "transfer", "--p", "2", "--epsilon", "0.5", "--grid", "1024", "--tol", "1e-8",
            "--code-depth", "6", "--write-measure", "t.json",
        ],
    ),
];

const ARTIFACTS: &[&str] =
    &["m.json", "s.json", "nu.json", "report.json", "f.csv", "r.csv", "i.csv", "t.json"];

fn run_script(jobs: &str) -> (TempDir, Vec<Vec<u8>>) {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::with_capacity(SCRIPT.len());
    for (name, args) in SCRIPT {
        let out = Command::new(env!("CARGO_BIN_EXE_balgeo"))
            .current_dir(dir.path())
            .args(*args)
            .args(["--jobs", jobs])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "{name} failed under --jobs {jobs}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(out.stdout);
    }
    (dir, outputs)
}

fn artifact_bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("artifact {name} missing: {e}"))
}

#[test]
fn every_command_is_byte_deterministic_across_thread_counts() {
    let (dir_serial, out_serial) = run_script("1");
    let (dir_wide, out_wide) = run_script("8");
    let (dir_again, out_again) = run_script("8");

    for (i, (name, _)) in SCRIPT.iter().enumerate() {
        assert_eq!(
            out_serial[i], out_wide[i],
            "stdout differs between --jobs 1 and --jobs 8 for: {name}"
        );
        assert_eq!(out_wide[i], out_again[i], "stdout differs between repeated runs for: {name}");
    }
    for name in ARTIFACTS {
        let serial = artifact_bytes(dir_serial.path(), name);
        let wide = artifact_bytes(dir_wide.path(), name);
        let again = artifact_bytes(dir_again.path(), name);
        assert_eq!(serial, wide, "artifact differs between --jobs 1 and --jobs 8: {name}");
        assert_eq!(wide, again, "artifact differs between repeated runs: {name}");
    }

    println!(
        "PASS determinism: {} commands and {} artifacts byte-identical across --jobs 1, --jobs 8, and a repeated run",
        SCRIPT.len(),
        ARTIFACTS.len()
    );
}
