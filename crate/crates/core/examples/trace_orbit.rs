//! Follow one ray through the UU cavity and print its first bounces.
//!
//! `cargo run --example trace_orbit -- 0.0123`

use cavity_chaos::cli_io::preset;
use cavity_chaos::dynamics::{trace, RayState};
use cavity_chaos::geometry::build_cavity;

fn main() -> cavity_chaos::Result<()> {
    let y0: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0123);
    let geom = build_cavity(&preset("UU").expect("preset"))?;
    let result = trace(RayState::launch(&geom, y0, 0.0), &geom, 60_000)?;

    for (i, e) in result.events.iter().take(12).enumerate() {
        println!(
            "{:>3}  t = {:>9.5} s  z = {:.6}  y = {:+.6}  {}",
            i + 1,
            e.t,
            e.point.x,
            e.point.y,
            e.surface.name()
        );
    }
    println!(
        "{} bounces, outcome {:?}, last bounce at {:.3} s, path {:.3} m",
        result.events.len(),
        result.outcome,
        result.last_bounce_time(),
        result.path_length
    );
    Ok(())
}
