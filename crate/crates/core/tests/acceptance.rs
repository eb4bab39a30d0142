//! Acceptance suite, one line per criterion. Runs without the libtest
//! harness so the lines are always printed. Set `FLATFIBER_SLOW=1` to extend
//! the fiber structure checks to degrees 4 and 5.

use std::process::ExitCode;

use flatfiber::acceptance::{run, Scope};

fn main() -> ExitCode {
    let slow = std::env::var("FLATFIBER_SLOW").is_ok_and(|v| v == "1");
    let results = run(Scope::All, slow);
    for c in &results {
        println!("{}", c.line());
    }
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", results.len(), results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
