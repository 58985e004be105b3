//! Acceptance run: one line per criterion E0–E8 with the pinned
//! tolerances of the default configuration. Fails if any criterion fails.

use std::io::Write;

use multicorn_cli::config::Config;
use multicorn_cli::experiments::{run_experiment, EXPERIMENT_IDS};

#[test]
fn acceptance_e0_to_e8() {
    let cfg = Config::default();
    let mut out = std::io::stdout().lock();
    // Start below the harness's "test … " prefix.
    writeln!(out).unwrap();
    let mut failed = Vec::new();
    for id in EXPERIMENT_IDS {
        let m = run_experiment(id, &cfg, None).expect("registered experiment");
        let verdict = if m.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{id} {verdict} ({}/{} checks, {:.2} s) {}",
            m.verdicts.iter().filter(|v| v.passed).count(),
            m.verdicts.len(),
            m.runtime_seconds,
            m.title
        )
        .unwrap();
        for v in m.failed_verdicts() {
            writeln!(out, "    failed: {}: measured {} (threshold {})", v.criterion, v.measured, v.threshold).unwrap();
        }
        for e in &m.errors {
            writeln!(out, "    error: {e}").unwrap();
        }
        if !m.passed {
            failed.push(id);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
