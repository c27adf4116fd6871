//! Runs every acceptance criterion and prints one line per criterion.

use std::process::ExitCode;

use dephasing_cli::acceptance::run_all_with;

fn main() -> ExitCode {
    let results = run_all_with(|r| println!("{r}"));
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
