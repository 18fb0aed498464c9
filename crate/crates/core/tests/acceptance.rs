//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Plain `main` so the lines show up without `--nocapture`.

use std::process::ExitCode;

use ivpp_core::exec::Execution;
use ivpp_core::verify;

fn main() -> ExitCode {
    let results = verify::run_all(Execution::from_env());
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {}/{} passed", results.len(), results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
