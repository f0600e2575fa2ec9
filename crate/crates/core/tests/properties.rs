use proptest::prelude::*;

use bubblecalc::bubble::{
    comparability_bound, eval_bubble, grad_norm_sq, gradient, BubbleParams, HalfSpacePoint,
};
use bubblecalc::cap_threshold::{b_cap, c_of_r, cap_angle};
use bubblecalc::half_space_moments::b_closed_form;
use bubblecalc::mountain_pass::EnergyTriple;
use bubblecalc::q_form::{build_q, quadratic_value, TestVector};
use bubblecalc::quadrature::QuadratureSpec;
use bubblecalc::special_functions::{j_integral_oracle, TrigIntegralTable};

fn point(n: u32) -> impl Strategy<Value = HalfSpacePoint> {
    (
        prop::collection::vec(-5.0..5.0f64, n as usize - 1),
        0.0..5.0f64,
    )
        .prop_map(|(y_bar, y_n)| HalfSpacePoint::new(y_bar, y_n).unwrap())
}

fn bubble_case() -> impl Strategy<Value = (BubbleParams, HalfSpacePoint)> {
    (3u32..=10, 0.05..5.0f64, -3.0..5.0f64).prop_flat_map(|(n, eps, t)| {
        let p = BubbleParams::new(n, eps, t).unwrap();
        point(n).prop_map(move |y| (p, y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bubble_scaling_law((p, y) in bubble_case()) {
        let n = p.n() as f64;
        let unit = p.with_eps(1.0).unwrap();
        let lhs = eval_bubble(&p, &y);
        let rhs = p.eps().powf(0.5 * (2.0 - n)) * eval_bubble(&unit, &y.scaled(1.0 / p.eps()));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn gradient_norm_consistent((p, y) in bubble_case()) {
        let g2 = grad_norm_sq(&p, &y);
        let from_vector: f64 = gradient(&p, &y).iter().map(|g| g * g).sum();
        prop_assert!(g2 >= 0.0);
        prop_assert!((g2 - from_vector).abs() <= 1e-12 * g2.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn comparability_holds((p, y) in bubble_case()) {
        let b = comparability_bound(&p, &y);
        prop_assert!(b.holds(), "lhs {} rhs {}", b.lhs, b.rhs);
    }

    #[test]
    fn t_star_is_stationary_maximum(
        n in 3u32..=12,
        e in 0.1..10.0f64,
        a in 0.1..10.0f64,
        b in -2.0..2.0f64,
    ) {
        let tr = EnergyTriple::new(n, e, a, b).unwrap();
        let ts = tr.t_star().unwrap();
        // f' = t·(2a − …); compare against the size of its first term
        let c = tr.coefficients();
        let scale = 2.0 * c.a * ts;
        prop_assert!(tr.f_prime(ts).abs() <= 1e-10 * scale, "f'(t*) = {}", tr.f_prime(ts));
        prop_assert!(tr.f_second_at_star().unwrap() < 0.0);
        let m = tr.max_value().unwrap().value;
        for t in [0.5 * ts, 0.9 * ts, 1.1 * ts, 2.0 * ts] {
            prop_assert!(tr.eval_f(t).unwrap() < m);
        }
    }

    #[test]
    fn j_recursion_matches_quadrature(k in 0u32..=10, l in 0u32..=10, t in 0.0..6.0f64) {
        let rec = TrigIntegralTable::new(t).get(k, l);
        let quad = j_integral_oracle(k as i64, l as i64, t, &QuadratureSpec::default()).unwrap();
        prop_assert!((rec - quad).abs() <= 1e-10 * quad.abs(), "{rec} vs {quad}");
    }

    #[test]
    fn j_table_independent_of_fill_order(
        t in 0.0..6.0f64,
        order in prop::collection::vec((0u32..=9, 0u32..=9), 1..20),
    ) {
        let mut warm = TrigIntegralTable::new(t);
        for &(k, l) in &order {
            warm.get(k, l);
        }
        let (k, l) = order[0];
        prop_assert_eq!(warm.get(k, l), TrigIntegralTable::new(t).get(k, l));
    }

    #[test]
    fn q_forms_agree(n in 7u32..=12, t in 0.0..4.0f64) {
        let q = build_q(n, t).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (q.form1[(i, j)], q.form2[(i, j)]);
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn v_q_bar_v_routes_agree(n in 7u32..=12, t in 0.0..4.0f64, a in 0.0..1.5f64) {
        let v = quadratic_value(&build_q(n, t).unwrap(), &TestVector::new(a, t)).unwrap();
        let scale = v.via_closed_form.abs().max(1e-3);
        prop_assert!((v.via_matrix - v.via_closed_form).abs() <= 1e-10 * scale);
    }

    #[test]
    fn cap_round_trip(n in 3u32..=12, c in -50.0..-1e-3f64) {
        let r = cap_angle(n, c);
        prop_assert!(r > std::f64::consts::FRAC_PI_2 && r < std::f64::consts::PI);
        prop_assert!((c_of_r(n, r) - c).abs() <= 1e-12 * c.abs().max(1.0));
        let b = b_closed_form(n, -c / (n as f64 - 2.0)).unwrap();
        prop_assert!((b_cap(n, r) - b).abs() <= 1e-12 * b);
    }
}
