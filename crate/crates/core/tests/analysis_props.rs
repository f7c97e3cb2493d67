use cavity_chaos::analysis::{
    escape_scan, find_long_lived, lyapunov_estimate, return_map_jacobian, sos_collect, survival_curve, LyapunovParams,
    RepellerSearch, ScanGrid, TangentMethod,
};
use cavity_chaos::cli_io::preset;
use cavity_chaos::geometry::{build_cavity, CavityGeometry};
use proptest::prelude::*;

fn cavity(name: &str) -> CavityGeometry {
    build_cavity(&preset(name).unwrap()).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn return_map_preserves_area(
        which in 0usize..6,
        s in -0.015f64..0.015,
        p in -0.01f64..0.01,
    ) {
        let name = ["UU", "US", "SS", "MM", "SM", "UM"][which];
        let geom = cavity(name);
        if let Some(j) = return_map_jacobian(&geom, s, p, 1e-7).unwrap() {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            prop_assert!((det - 1.0).abs() < 1e-6, "{} at ({}, {}): det {}", name, s, p, det);
        }
    }
}

#[test]
fn escape_scan_is_independent_of_worker_count() {
    let geom = cavity("UU");
    let grid = ScanGrid::new(0.0125, 0.0135, 400);
    let runs: Vec<_> = [1, 2, 3, 8]
        .into_iter()
        .map(|threads| in_pool(threads, || escape_scan(&geom, &grid, 20_000).unwrap()))
        .collect();
    for other in &runs[1..] {
        assert_eq!(&runs[0], other);
    }
}

#[test]
fn reversed_grid_gives_reversed_records() {
    let geom = cavity("MM");
    let grid = ScanGrid::new(0.002, 0.02, 301);
    let forward = escape_scan(&geom, &grid, 5_000).unwrap();
    let mut backward = escape_scan(&geom, &grid.reversed(), 5_000).unwrap();
    backward.reverse();
    assert_eq!(forward, backward);
}

#[test]
fn lyapunov_estimate_is_independent_of_worker_count() {
    let geom = cavity("UU");
    let search = RepellerSearch::new(ScanGrid::new(0.001, 0.024, 300), 20_000, 1);
    let sample = find_long_lived(&geom, &search).unwrap().thinned(4);
    assert!(!sample.is_empty());
    let params = LyapunovParams {
        bounces: 3_000,
        ..LyapunovParams::default()
    };
    let one = in_pool(1, || lyapunov_estimate(&geom, &sample, &params).unwrap());
    let many = in_pool(4, || lyapunov_estimate(&geom, &sample, &params).unwrap());
    assert_eq!(one, many);
}

#[test]
fn exact_and_shadow_exponents_agree() {
    let geom = cavity("UU");
    let search = RepellerSearch::new(ScanGrid::new(0.001, 0.024, 300), 20_000, 1);
    let sample = find_long_lived(&geom, &search).unwrap().thinned(4);
    let exact = lyapunov_estimate(
        &geom,
        &sample,
        &LyapunovParams {
            bounces: 5_000,
            ..LyapunovParams::default()
        },
    )
    .unwrap();
    let shadow = lyapunov_estimate(
        &geom,
        &sample,
        &LyapunovParams {
            bounces: 5_000,
            method: TangentMethod::Shadow,
            ..LyapunovParams::default()
        },
    )
    .unwrap();
    let combined = (exact.stderr.powi(2) + shadow.stderr.powi(2)).sqrt();
    assert!(
        (exact.lambda1 - shadow.lambda1).abs() <= combined.max(1e-6 * exact.lambda1),
        "exact {} shadow {} combined stderr {}",
        exact.lambda1,
        shadow.lambda1,
        combined
    );
}

#[test]
fn survival_curve_is_monotone_from_one() {
    let geom = cavity("UU");
    let records = escape_scan(&geom, &ScanGrid::new(0.001, 0.024, 500), 10_000).unwrap();
    let curve = survival_curve(&records).unwrap();
    assert_eq!(curve[0], (0.0, 1.0));
    for pair in curve.windows(2) {
        assert!(pair[1].0 >= pair[0].0);
        assert!(pair[1].1 <= pair[0].1);
    }
    let capped = records.iter().filter(|r| r.capped).count() as f64 / records.len() as f64;
    assert!((curve.last().unwrap().1 - capped).abs() < 1e-12);
}

#[test]
fn axial_section_point_is_fixed_in_every_cavity() {
    for name in ["UU", "US", "SS", "MM", "SM", "UM"] {
        let points = sos_collect(&cavity(name), 0.0, 0.0, 50).unwrap();
        assert_eq!(points.len(), 50, "{name}");
        assert!(points.iter().all(|p| p.y == 0.0 && p.v_y == 0.0), "{name}");
    }
}
