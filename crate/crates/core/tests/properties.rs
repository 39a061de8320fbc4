mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use tfpilot::prelude::*;
use tfpilot::scenario::nmse;

use common::{filter, max_diff, to_sparse, twisted};

fn coprime_root(len: usize) -> impl Strategy<Value = i64> {
    (1i64..200).prop_filter("root must be coprime to L", move |r| common::gcd(*r, len as i64) == 1)
}

fn odd_len_and_root() -> impl Strategy<Value = (usize, i64)> {
    (1usize..60).prop_map(|h| 2 * h + 1).prop_flat_map(|len| (Just(len), coprime_root(len)))
}

fn small_grid() -> impl Strategy<Value = ComplexGrid> {
    (1usize..5, 1usize..5, -3i64..3, -3i64..3).prop_flat_map(|(r, c, r0, c0)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), r * c).prop_map(move |v| {
            let data = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            ComplexGrid::from_vec(
                Span::new(r0, r0 + r as i64 - 1).unwrap(),
                Span::new(c0, c0 + c as i64 - 1).unwrap(),
                Spacing::default(),
                data,
            )
            .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn zc_is_unit_energy_constant_amplitude((len, root) in odd_len_and_root()) {
        let s = zc_sequence(len, root).unwrap();
        let e: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e - 1.0).abs() < 1e-12);
        for v in &s {
            prop_assert!((v.norm() - 1.0 / (len as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn zc_periodic_acf_is_delta((len, root) in odd_len_and_root()) {
        let s = zc_sequence(len, root).unwrap();
        let acf = periodic_xcorr(&s, &s).unwrap();
        prop_assert!((acf[0] - 1.0).norm() < 1e-10);
        for v in &acf[1..] {
            prop_assert!(v.norm() < 1e-9);
        }
    }

    #[test]
    fn twisted_conv_matches_brute_force(x in small_grid(), y in small_grid(), alpha in -1.0f64..1.0) {
        let pc = PhaseCoupling::new(alpha).unwrap();
        prop_assert!(max_diff(&twisted_conv(&x, &y, pc), &twisted(&to_sparse(&x), &to_sparse(&y), alpha)) < 1e-12);
    }

    #[test]
    fn twisted_conv_is_bilinear(x in small_grid(), y in small_grid(), z in small_grid(), alpha in -0.5f64..0.5, a in -2.0f64..2.0) {
        let pc = PhaseCoupling::new(alpha).unwrap();
        let s = Complex64::new(a, 0.5);
        let lhs = twisted_conv(&x.scale(s), &y, pc);
        prop_assert!(lhs.max_abs_diff(&twisted_conv(&x, &y, pc).scale(s)) < 1e-12);
        // additivity in the second argument
        let yz = sum(&y, &z);
        let lhs = twisted_conv(&x, &yz, pc);
        let rhs = sum(&twisted_conv(&x, &y, pc), &twisted_conv(&x, &z, pc));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn matched_filter_matches_brute_force(y in small_grid(), x in small_grid(), alpha in -0.5f64..0.5) {
        let pc = PhaseCoupling::new(alpha).unwrap();
        prop_assert!(max_diff(&filter_output(&y, &x, pc), &filter(&to_sparse(&y), &to_sparse(&x), alpha)) < 1e-12);
    }

    #[test]
    fn single_tap_is_recovered(row in -40i64..40, col in -5i64..60, re in -2.0f64..2.0, im in -2.0f64..2.0,
                               alpha in -3.0f64..3.0, stacked in any::<bool>()) {
        let sp = Spacing::default();
        let x = if stacked { stacked_zc(5, 7, &[1, 2, 3, 4, 5], sp).unwrap() } else { separable_zc(5, 7, 2, 3, sp).unwrap() };
        let pc = PhaseCoupling::new(alpha).unwrap();
        let tap = GridIndex::new(row, col);
        let v = Complex64::new(re, im);
        let h = ComplexGrid::delta(tap, sp).scale(v);
        let q = filter_output(&twisted_conv(&h, &x, pc), &x, pc);
        prop_assert!((q.at(tap) - v).norm() < 1e-9);
    }

    #[test]
    fn dump_round_trips(g in small_grid()) {
        let back = ComplexGrid::from_dump_str(&g.to_dump_string()).unwrap();
        prop_assert_eq!(back.rows(), g.rows());
        prop_assert_eq!(back.cols(), g.cols());
        prop_assert!(back.max_abs_diff(&g) < 1e-8);
    }

    #[test]
    fn complex_format_round_trips(re in -1e12f64..1e12, im in -1e12f64..1e12) {
        let v = Complex64::new(re, im);
        let back = tfpilot::parse_complex(&tfpilot::fmt_complex(v)).unwrap();
        prop_assert!((back - v).norm() <= 1e-8 * v.norm().max(1e-300));
    }

    #[test]
    fn nmse_is_scale_covariant(pairs in prop::collection::vec((0.5f64..10.0, -10.0f64..10.0), 1..40), c in 0.01f64..100.0) {
        let t: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let e: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let a = nmse(&t, &e).unwrap();
        let ts: Vec<f64> = t.iter().map(|v| v * c).collect();
        let es: Vec<f64> = e.iter().map(|v| v * c).collect();
        let b = nmse(&ts, &es).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn closed_form_bounds_brute_force(u in -16i64..17, r in prop::sample::select(vec![1i64, 2, 3, 5, 16])) {
        let n = 17i64;
        let overlap = n - u.abs();
        for w in 0..=overlap {
            let b = common::windowed_acf(r, n, u, (-u).max(0), w);
            prop_assert!((zc_acf_closed_form(u, w as usize, n as usize, r) - b).abs() < 1e-9);
        }
    }
}

fn sum(a: &ComplexGrid, b: &ComplexGrid) -> ComplexGrid {
    let rows = Span::new(a.rows().lo().min(b.rows().lo()), a.rows().hi().max(b.rows().hi())).unwrap();
    let cols = Span::new(a.cols().lo().min(b.cols().lo()), a.cols().hi().max(b.cols().hi())).unwrap();
    ComplexGrid::from_fn(rows, cols, a.spacing(), |r, c| a.get(r, c) + b.get(r, c))
}
