//! Randomized invariants of the quantizer, the analytic error curves, and
//! spin states.

use proptest::prelude::*;

use spinquant::problem::SpinState;
use spinquant::quantizer::Quantizer;
use spinquant::theory::{error_random_point, error_worst_case, FieldStats};

fn spin() -> impl Strategy<Value = i8> {
    prop_oneof![Just(-1i8), Just(1i8)]
}

proptest! {
    #[test]
    fn quantizer_levels_bounded_and_sign_aligned(
        m in 1u8..=16,
        step in 0.01f64..2.0,
        l0 in 0.001f64..2.0,
        x in -60.0f64..60.0,
    ) {
        let q = Quantizer::with_central_width(m, l0, step).unwrap();
        let k = q.level(x);
        prop_assert!(k.unsigned_abs() <= m);
        prop_assert!(k as f64 * x >= 0.0, "level {} disagrees in sign with {}", k, x);
        prop_assert_eq!(q.value(x), k as f64 * step);
    }

    #[test]
    fn quantizer_levels_monotone(
        m in 1u8..=16,
        step in 0.01f64..2.0,
        l0 in 0.001f64..2.0,
        a in -60.0f64..60.0,
        b in -60.0f64..60.0,
    ) {
        let q = Quantizer::with_central_width(m, l0, step).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(q.level(lo) <= q.level(hi));
    }

    #[test]
    fn closed_form_error_is_a_probability_and_monotone(
        r1 in -1.0f64..=1.0,
        r2 in -1.0f64..=1.0,
    ) {
        let p1 = error_worst_case(r1).unwrap();
        let p2 = error_worst_case(r2).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1));
        if r1 <= r2 {
            prop_assert!(p1 >= p2 - 1e-12);
        }
    }

    #[test]
    fn quadrature_error_is_a_probability(
        mx in -4.0f64..4.0,
        my in -4.0f64..4.0,
        rho in -0.999f64..0.999,
    ) {
        let stats = FieldStats {
            mean_exact: mx,
            mean_quant: my,
            dev_exact: 1.0,
            dev_quant: 1.0,
            rho,
        };
        let p = error_random_point(&stats);
        prop_assert!((0.0..=1.0).contains(&p), "p = {}", p);
    }

    #[test]
    fn spin_state_rejects_non_unit_entries(v in proptest::collection::vec(-2i8..=2, 1..40)) {
        let ok = v.iter().all(|&s| s == 1 || s == -1);
        prop_assert_eq!(SpinState::new(v).is_ok(), ok);
    }

    #[test]
    fn hamming_counts_exactly_the_flipped_sites(
        cells in proptest::collection::vec((spin(), any::<bool>()), 1..50),
    ) {
        let a: Vec<i8> = cells.iter().map(|&(s, _)| s).collect();
        let b: Vec<i8> = cells.iter().map(|&(s, f)| if f { -s } else { s }).collect();
        let expected = cells.iter().filter(|&&(_, f)| f).count();
        let sa = SpinState::new(a).unwrap();
        let sb = SpinState::new(b).unwrap();
        prop_assert_eq!(sa.hamming(&sb), expected);
        prop_assert_eq!(sb.hamming(&sa), expected);
    }
}
