//! Fraction of rays still inside the UU cavity as a function of time.
//!
//! `cargo run --release --example survival`

use cavity_chaos::analysis::{escape_scan, survival_curve, ScanGrid};
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::build_cavity;

fn main() -> cavity_chaos::Result<()> {
    let geom = build_cavity(&preset("UU").expect("preset"))?;
    let records = escape_scan(&geom, &ScanGrid::new(0.001, 0.024, 4_000), 20_000)?;
    let curve = survival_curve(&records)?;

    let mut next_report = 1.0;
    for (t, frac) in &curve {
        if *t >= next_report {
            println!("t = {t:>9.2} s   surviving {frac:.4}");
            next_report *= 2.0;
        }
    }
    Ok(())
}
