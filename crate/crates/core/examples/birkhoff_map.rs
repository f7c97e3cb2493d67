//! Area preservation of the return map to the left mirror in Birkhoff
//! coordinates (arc length, tangential velocity).
//!
//! `cargo run --release --example birkhoff_map`

use cavity_chaos::analysis::return_map_jacobian;
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::build_cavity;

fn main() -> cavity_chaos::Result<()> {
    for name in ["UU", "SS", "MM"] {
        let geom = build_cavity(&preset(name).expect("preset"))?;
        for (s, p) in [(0.002, 0.001), (-0.004, 0.003), (0.01, -0.002)] {
            match return_map_jacobian(&geom, s, p, 1e-7)? {
                Some(j) => {
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    println!("{name} (s, p) = ({s:+.3}, {p:+.3}): det J = {det:.10}");
                }
                None => println!("{name} (s, p) = ({s:+.3}, {p:+.3}): no return"),
            }
        }
    }
    Ok(())
}
