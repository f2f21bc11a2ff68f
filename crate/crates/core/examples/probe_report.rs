//! Drives the same pipelines as the `qhlab` binary: a refinement sweep of
//! the theorem probe over combs, then a full report on the disk written to
//! a directory as JSON, CSV and SVG.
//!
//! Run with `cargo run --release --example probe_report [out-dir]`.

use qhlab::run::{execute, Command, RunConfig};

fn main() -> qhlab::Result<()> {
    let comb = RunConfig {
        pairs: 60,
        samples: 60,
        ..RunConfig::for_corpus("comb")
            .param("n", &[2.0, 4.0, 8.0])
            .with_hs(&[0.08, 0.04])
    };
    let doc = execute(Command::ProbeTheorem, &comb)?;
    print!("{}", doc.tables["probe"].to_csv());
    for c in &doc.checks {
        println!(
            "{:<28} {:<36} {}",
            c.scope,
            c.check.name,
            if c.passed { "ok" } else { "FAILED" }
        );
    }

    let out = std::env::args().nth(1).unwrap_or_else(|| "qhlab-out".into());
    let disk = RunConfig {
        out: out.into(),
        svg: true,
        ..RunConfig::for_corpus("disk").with_hs(&[0.02])
    };
    let report = execute(Command::Report, &disk)?;
    for path in report.write(&disk.out)? {
        println!("wrote {}", path.display());
    }
    println!("violations: {:?}", report.violations);
    Ok(())
}
