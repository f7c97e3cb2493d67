use cavity_chaos::geometry::{build_cavity, classify, half_trace, magnification, CavityConfig, Stability, SurfaceId};
use nalgebra::Matrix2;
use proptest::prelude::*;

/// Round trip through a sub-cavity written out as a product of ray-transfer
/// matrices: free flight, convex mirror, free flight, concave mirror.
fn round_trip_matrix(big_r: f64, r: f64, l: f64) -> Matrix2<f64> {
    let flight = Matrix2::new(1.0, l, 0.0, 1.0);
    let concave = Matrix2::new(1.0, 0.0, -2.0 / big_r, 1.0);
    let convex = Matrix2::new(1.0, 0.0, 2.0 / r, 1.0);
    concave * flight * convex * flight
}

/// Random cavities satisfying every construction invariant.
fn valid_config() -> impl Strategy<Value = CavityConfig> {
    (
        0.5f64..5.0,
        0.05f64..0.95,
        0.01f64..0.49,
        0.01f64..0.49,
        0.05f64..0.95,
        0.1f64..0.95,
    )
        .prop_map(|(big_r, r_frac, ll_frac, lr_frac, a_frac, b_frac)| {
            let r = r_frac * big_r;
            let b = b_frac * 0.2 * r.min(big_r);
            let a = a_frac * b.min(r);
            CavityConfig {
                concave_radius: big_r,
                convex_radius: r,
                l_left: ll_frac * big_r,
                l_right: lr_frac * big_r,
                element_aperture: a,
                mirror_aperture: b,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn half_trace_equals_matrix_product(big_r in 0.2f64..10.0, r_frac in 0.01f64..1.0, l_frac in 0.001f64..0.999) {
        let r = r_frac * big_r;
        let l = l_frac * big_r;
        let m = half_trace(big_r, r, l);
        let product = round_trip_matrix(big_r, r, l);
        let from_product = 0.5 * product.trace();
        prop_assert!((product.determinant() - 1.0).abs() < 1e-9);
        let rel = (m - from_product).abs() / m.abs().max(1.0);
        prop_assert!(rel < 1e-12, "m = {m}, product gives {from_product}, rel {rel:e}");
    }
}

proptest! {
    #[test]
    fn magnification_monotone(m1 in 1.0f64..50.0, dm in 0.0f64..10.0) {
        let lo = magnification(m1).unwrap();
        let hi = magnification(m1 + dm).unwrap();
        prop_assert!(lo >= 1.0);
        prop_assert!(hi >= lo);
    }

    #[test]
    fn magnification_refuses_stable(m in -1.0f64..0.999_999) {
        prop_assert!(magnification(m).is_err());
    }

    #[test]
    fn classify_label_swaps_under_mirroring(cfg in valid_config()) {
        let label: Vec<char> = classify(&cfg).label().chars().collect();
        let mirrored: Vec<char> = classify(&cfg.mirrored()).label().chars().collect();
        prop_assert_eq!(label.len(), 2);
        prop_assert_eq!(mirrored, vec![label[1], label[0]]);
    }

    #[test]
    fn unstable_sub_cavities_carry_magnification(cfg in valid_config()) {
        let report = classify(&cfg);
        for sub in [report.left, report.right] {
            let unstable = sub.stability == Stability::Unstable;
            prop_assert_eq!(sub.magnification.is_some(), unstable);
            prop_assert_eq!(sub.lambda0.is_some(), unstable);
            if let Some(lambda0) = sub.lambda0 {
                prop_assert!(lambda0 > 0.0);
            }
        }
    }

    #[test]
    fn built_cavity_places_vertices_exactly(cfg in valid_config()) {
        let geom = build_cavity(&cfg).unwrap();
        let left_convex = geom.arc(SurfaceId::LeftConvex);
        let right_convex = geom.arc(SurfaceId::RightConvex);
        prop_assert_eq!(left_convex.vertex.x, cfg.l_left);
        prop_assert_eq!(left_convex.vertex.y, 0.0);
        prop_assert_eq!(geom.arc(SurfaceId::LeftConcave).vertex.x, 0.0);

        let a = cfg.element_aperture;
        for y in [a, -a] {
            let p = left_convex.point_at(y);
            let q = right_convex.point_at(y);
            prop_assert!((p - q).norm() < 1e-15, "edges differ by {:e}", (p - q).norm());
        }
        prop_assert!((geom.total_length - (cfg.l_left + cfg.l_right + 2.0 * geom.sagitta)).abs() < 1e-15);
    }
}

#[test]
fn invalid_configs_name_their_invariant() {
    let uu = CavityConfig::new(1.0, 0.25, 0.04, 0.04);
    let cases = [
        (
            CavityConfig {
                convex_radius: -0.25,
                ..uu
            },
            "all parameters > 0",
        ),
        (
            CavityConfig {
                element_aperture: 0.3,
                ..uu
            },
            "a < r",
        ),
        (
            CavityConfig {
                mirror_aperture: 1.5,
                element_aperture: 0.003,
                convex_radius: 0.9,
                ..uu
            },
            "b < R",
        ),
        (
            CavityConfig {
                element_aperture: 0.03,
                ..uu
            },
            "a < b",
        ),
        (CavityConfig { l_left: 1.2, ..uu }, "l_left < R"),
        (CavityConfig { l_right: 1.0, ..uu }, "l_right < R"),
    ];
    for (cfg, invariant) in cases {
        let err = build_cavity(&cfg).unwrap_err();
        assert!(err.to_string().contains(invariant), "{err} should mention {invariant}");
        assert_eq!(err.exit_code(), 1);
    }
}
