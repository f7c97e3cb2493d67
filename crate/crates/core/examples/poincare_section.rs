//! Surface of section at the left mirror for the soft-chaos cavity (an orbit
//! trapped on a KAM island) and for the UU cavity, printed as CSV.
//!
//! `cargo run --release --example poincare_section > sos.csv`

use cavity_chaos::analysis::sos_collect;
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::build_cavity;

fn main() -> cavity_chaos::Result<()> {
    println!("config,y0,bounce_index,y,vy");
    for (name, y0) in [("fig2b", 1e-3), ("fig2b", 4e-3), ("fig2a", 1e-4)] {
        let geom = build_cavity(&preset(name).expect("preset"))?;
        let points = sos_collect(&geom, y0, 0.0, 2_000)?;
        for p in &points {
            println!("{name},{y0},{},{:.12e},{:.12e}", p.bounce_index, p.y, p.v_y);
        }
        eprintln!("{name} y0 = {y0}: {} section points", points.len());
    }
    Ok(())
}
