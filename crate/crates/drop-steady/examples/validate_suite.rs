//! Runs the built-in self-checks and prints the pass/fail table.

use drop_steady::validate::{format_table, run_validation, ValidateOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = run_validation(&ValidateOptions::default())?;
    print!("{}", format_table(&rows));
    Ok(())
}
