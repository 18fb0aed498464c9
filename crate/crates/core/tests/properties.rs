use proptest::prelude::*;

use ivpp_core::builtin::{f2d, f3d};
use ivpp_core::decomp::{decompose, Method};
use ivpp_core::dsl::{format_map, parse_map, DslError};
use ivpp_core::ext::ExtendedComplex;
use ivpp_core::ivpp2d::branches;
use ivpp_core::lv::{lv_diagonal_coordinate, lv_recurrence};
use ivpp_core::PointD;

const VARS: [&str; 3] = ["x", "y", "z"];

fn poly_expr(dim: usize) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0..dim).prop_map(|i| VARS[i].to_string()),
        (1i32..20).prop_map(|k| k.to_string()),
        (1u32..99).prop_map(|k| format!("0.{k:02}")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}+{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn component(dim: usize) -> impl Strategy<Value = String> {
    (poly_expr(dim), proptest::option::of(poly_expr(dim))).prop_map(|(n, d)| match d {
        // shifted so the denominator is never identically zero
        Some(d) => format!("({n})/(1+({d})^2)"),
        None => n,
    })
}

fn map_source() -> impl Strategy<Value = String> {
    (1usize..=3).prop_flat_map(|dim| {
        proptest::collection::vec(component(dim), dim).prop_map(move |comps| {
            let mut s = format!("dim {dim};\n");
            for (i, c) in comps.iter().enumerate() {
                s.push_str(&format!("{}' = {c};\n", VARS[i]));
            }
            s
        })
    })
}

fn token_soup() -> impl Strategy<Value = String> {
    let tokens = prop_oneof![
        Just("dim"),
        Just("2"),
        Just(";"),
        Just("x"),
        Just("y"),
        Just("'"),
        Just("="),
        Just("("),
        Just(")"),
        Just("+"),
        Just("-"),
        Just("*"),
        Just("/"),
        Just("^"),
        Just(" "),
        Just("inv"),
        Just("0.5"),
        Just("\n"),
        Just("#"),
        Just("q"),
    ];
    proptest::collection::vec(tokens, 1..24).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn format_then_parse_is_identity(src in map_source()) {
        let spec = parse_map(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let text = format_map(&spec);
        let back = parse_map(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, spec, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn diagnostics_point_inside_the_input(src in token_soup()) {
        if let Err(DslError::Parse(d)) = parse_map(&src) {
            prop_assert!(d.offset < src.len(), "offset {} of {:?}", d.offset, src);
            prop_assert!(!d.expected.is_empty(), "{:?}", d);
            prop_assert!(d.line >= 1 && d.column >= 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn plane_invariant_is_conserved(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        prop_assume!((1.0 - x).abs() > 1e-3 && (1.0 - y).abs() > 1e-3);
        let map = f2d();
        let p = PointD::real(&[x, y]);
        let q = map.apply(&p).unwrap();
        let (a, b) = (map.invariant_values(&p).unwrap(), map.invariant_values(&q).unwrap());
        prop_assert!((a[0] - b[0]).norm() <= 1e-9 * a[0].norm().max(1.0));
    }

    #[test]
    fn lotka_volterra_invariants_are_conserved(x in -4.0f64..4.0, y in -4.0f64..4.0, z in -4.0f64..4.0) {
        let map = f3d();
        let p = PointD::real(&[x, y, z]);
        let Ok(q) = map.apply(&p) else { return Ok(()) };
        prop_assume!(q.is_finite());
        let (Ok(a), Ok(b)) = (map.invariant_values(&p), map.invariant_values(&q)) else { return Ok(()) };
        let scale = q.finite_coords().unwrap().iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assume!(scale < 1e3);
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).norm() <= 1e-8 * u.norm().max(1.0), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn recurrence_is_an_involution(x in -50.0f64..50.0) {
        let v = ExtendedComplex::real(x);
        prop_assert!(lv_recurrence(lv_recurrence(v)).chordal(&v) < 1e-10);
        // conjugate to w -> -w
        let w = lv_diagonal_coordinate(v);
        let w1 = lv_diagonal_coordinate(lv_recurrence(v));
        let neg = match w { ExtendedComplex::Finite(c) => ExtendedComplex::from(-c), inf => inf };
        prop_assert!(w1.chordal(&neg) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn components_move_by_sigma(x in -20.0f64..20.0) {
        let map = f2d();
        for n in 3..=6 {
            for b in branches(n).unwrap() {
                let d = decompose(&b, Method::Analytic).unwrap();
                // stay clear of boundaries, where rounding decides the side
                prop_assume!(d.cuts.iter().all(|c| (c - x).abs() > 1e-6));
                let Ok(q) = map.apply(&b.point_real(x)) else { continue };
                let image = q.coord(0).re();
                prop_assume!(d.cuts.iter().all(|c| (c - image).abs() > 1e-6));
                prop_assert_eq!(d.classify(image), d.sigma[d.classify(x)], "n={} m={} x={}", n, b.m, x);
            }
        }
    }
}

#[test]
fn sigma_has_exact_order_n() {
    for n in 3..=6u32 {
        for b in branches(n).unwrap() {
            let d = decompose(&b, Method::Analytic).unwrap();
            assert_eq!(d.components.len(), n as usize);
            let mut power: Vec<usize> = (0..d.sigma.len()).collect();
            for k in 1..=n {
                power = power.iter().map(|&i| d.sigma[i]).collect();
                let identity = power.iter().enumerate().all(|(i, &j)| i == j);
                assert_eq!(identity, k == n, "n={n} m={} k={k}", b.m);
            }
        }
    }
}
