//! Largest Lyapunov exponent averaged over long-lived orbits.
//!
//! `cargo run --release --example repeller_lyapunov -- UU`

use cavity_chaos::analysis::{pairs_check_default, repeller_lyapunov, LyapunovParams, RepellerSearch, ScanGrid};
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::{build_cavity, classify};

fn main() -> cavity_chaos::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "UU".to_owned());
    let cfg = preset(&name).unwrap_or_else(|| panic!("unknown preset {name}"));
    let geom = build_cavity(&cfg)?;

    let search = RepellerSearch::new(ScanGrid::new(0.001, 0.024, 1_000), 60_000, 3);
    let est = repeller_lyapunov(&geom, &search, 10, true, &LyapunovParams::default())?;

    for o in &est.orbits {
        println!("  y0 = {:.12}  lambda1 = {:.5}", o.y0, o.lambda1());
    }
    println!(
        "{} ({}): lambda1 = {:.5} +- {:.5} 1/s over {} orbits, exponent sum {:.2e}, pairs rule {}",
        name,
        classify(&cfg).label(),
        est.lambda1,
        est.stderr,
        est.n_orbits,
        est.exponent_sum,
        if pairs_check_default(&est)? { "holds" } else { "fails" }
    );
    Ok(())
}
