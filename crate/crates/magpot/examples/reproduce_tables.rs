//! Reproduce the analytic tables against the bundled reference data and
//! print the comparison CSV. Pass table numbers to choose (default 2 3 6).

use magpot::harness::{bundled_reference, reproduce_table, rows_to_csv, TableOptions};

fn main() -> magpot::Result<()> {
    let mut tables: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if tables.is_empty() {
        tables = vec![2, 3, 6];
    }
    let refs = bundled_reference();
    for k in tables {
        let rows = reproduce_table(k, &refs, &TableOptions::default())?;
        print!("{}", rows_to_csv(&rows)?);
        let failed = rows.iter().filter(|r| r.failed()).count();
        eprintln!("table {k}: {} rows, {failed} outside tolerance", rows.len());
    }
    Ok(())
}
