//! Runs every acceptance criterion at full scale and prints one line each.

use std::process::ExitCode;

use semiplug::acceptance::{run_acceptance, Tier};
use semiplug::par::Execution;

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let tier = match std::env::var("SEMIPLUG_ACCEPTANCE_TIER").as_deref() {
        Ok("fast") => Tier::Fast,
        _ => Tier::Full,
    };
    let report = run_acceptance(tier, SEED, Execution::default());
    println!("acceptance suite, {} tier, seed {SEED}", tier.name());
    for line in report.lines() {
        println!("{line}");
    }
    for line in report.timing_lines() {
        println!("  time {line}");
    }
    if report.all_passed() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("some criteria failed");
        ExitCode::FAILURE
    }
}
