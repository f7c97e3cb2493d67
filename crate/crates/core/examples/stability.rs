//! Paraxial stability of the six named cavities.
//!
//! Run with `cargo run --example stability`.

use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::classify;

fn main() {
    println!(
        "{:<6} {:>8} {:>8} {:>8} {:>9}",
        "config", "m_left", "m_right", "M_left", "lam0_left"
    );
    for name in ["UU", "US", "SS", "MM", "SM", "UM"] {
        let cfg = preset(name).expect("built-in preset");
        let report = classify(&cfg);
        let show = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"));
        println!(
            "{:<6} {:>8.4} {:>8.4} {:>8} {:>9}   -> {}",
            name,
            report.left.half_trace,
            report.right.half_trace,
            show(report.left.magnification),
            show(report.left.lambda0),
            report.label()
        );
    }
}
