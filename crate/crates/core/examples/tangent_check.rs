//! Tangent dynamics checks: the growth rate along the axial orbit against the
//! paraxial prediction, and exact against finite-difference propagation.
//!
//! `cargo run --release --example tangent_check`

use cavity_chaos::analysis::{axial_growth_rate, TangentMethod};
use cavity_chaos::cli_io::preset;
use cavity_chaos::dynamics::{shadow_step, step, tangent_step, RayState, TangentVector, SHADOW_SEPARATION};
use cavity_chaos::geometry::{build_cavity, classify};

fn main() -> cavity_chaos::Result<()> {
    let cfg = preset("UU").expect("preset");
    let geom = build_cavity(&cfg)?;
    let predicted = classify(&cfg).left.lambda0.expect("unstable sub-cavity");
    for method in [TangentMethod::Exact, TangentMethod::Shadow] {
        let rate = axial_growth_rate(&geom, 2_000, method)?;
        println!("axial growth ({method:?}): {rate:.6} 1/s, paraxial {predicted:.6} 1/s");
    }

    let mut state = RayState::launch(&geom, 0.011, 0.0);
    let mut exact = TangentVector::transverse(&state.vel, 1.0, 0.0);
    for _ in 0..30 {
        let (next, Some(event)) = step(&state, &geom)? else {
            break;
        };
        let shadow = shadow_step(&state, &exact, &event, &geom, SHADOW_SEPARATION)?;
        exact = tangent_step(&state, &exact, &event)?;
        let diff: f64 = exact
            .to_array()
            .iter()
            .zip(shadow.to_array())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!(
            "bounce {:>2} on {:<13} |dX| = {:.4e}  relative gap {:.2e}",
            next.bounces,
            event.surface.name(),
            exact.norm(),
            diff / exact.norm()
        );
        state = next;
    }
    Ok(())
}
