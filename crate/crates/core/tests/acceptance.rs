use std::process::ExitCode;

use difflab::acceptance::{run_suite, Suite};

fn main() -> ExitCode {
    let rows = run_suite(Suite::Acceptance);
    for row in &rows {
        println!("{}", row.line());
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{} of {} criteria passed", rows.len() - failed, rows.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
