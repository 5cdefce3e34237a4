//! Runs the thirteen acceptance criteria at full grid sizes and prints one
//! line per criterion. Set `GS_QUICK=1` for the reduced grids.

use std::process::ExitCode;

use groundstate::verify::{verify_all, VerifyOptions};

fn main() -> ExitCode {
    let quick = std::env::var("GS_QUICK").map(|v| v == "1").unwrap_or(false);
    let report = verify_all(&VerifyOptions { quick, seed: 0 });
    println!("\nacceptance criteria ({} grids)", if quick { "quick" } else { "full" });
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!("{}/{} passed\n", report.passed, report.criteria.len());
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        for c in report.criteria.iter().filter(|c| !c.passed) {
            for m in &c.measurements {
                println!("  {:>2} {:<48} {:>12.4e} {} {}", c.id, m.name, m.value, m.bound, if m.ok { "" } else { "FAILED" });
            }
        }
        ExitCode::FAILURE
    }
}
