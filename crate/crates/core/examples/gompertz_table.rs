//! Writes a synthetic Gompertz life table (ages 30 to 119) to standard output.
//!
//! ```text
//! cargo run -p annuity-core --example gompertz_table > gompertz.csv
//! ```

use annuity_core::LifeTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = LifeTable::gompertz(30, 119, 3e-5, 1.1)?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
