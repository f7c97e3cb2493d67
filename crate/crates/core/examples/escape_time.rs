//! Escape time against launch height in the UU cavity, with the windows of
//! continuity and the capped (repeller) launches summarised.
//!
//! `cargo run --release --example escape_time`

use cavity_chaos::analysis::{capped_density, escape_scan, windows_of_continuity, ScanGrid};
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::build_cavity;

fn main() -> cavity_chaos::Result<()> {
    let geom = build_cavity(&preset("UU").expect("preset"))?;
    let grid = ScanGrid::new(0.0125, 0.0135, 2_000);
    let records = escape_scan(&geom, &grid, 60_000)?;

    let capped: Vec<_> = records.iter().filter(|r| r.capped).collect();
    println!("{} of {} launches reach the bounce cap", capped.len(), records.len());
    if let Some(r) = capped.first() {
        println!(
            "first capped launch y0 = {:.9}: cap reached at t = {:.1} s",
            r.y0, r.escape_time
        );
    }
    println!("capped density: {:.3e} per metre", capped_density(&records));

    for w in windows_of_continuity(&records, 50.0, 50) {
        println!(
            "window y0 in [{:.6}, {:.6}] ({} samples)",
            records[w.start].y0,
            records[w.end - 1].y0,
            w.len()
        );
    }
    Ok(())
}
