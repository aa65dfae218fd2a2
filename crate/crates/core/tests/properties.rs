use proptest::prelude::*;

use vrhb::data::{parse_libsvm_str, reference_eigenpairs, standardize, synthetic_spectrum, to_libsvm_string};
use vrhb::linalg::{dot, norm};
use vrhb::matrix::{covariance_matvec, minibatch_matvec, project_orthogonal, rayleigh_quotient};
use vrhb::rate::{closed_form_pair, g_of_eta, p_poly, q_poly};
use vrhb::solvers::{stability_rescale, IterateState};
use vrhb::{DataMatrix, MiniBatch};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

prop_compose! {
    fn dataset()(d in 1usize..6, n in 2usize..12)
        (values in prop::collection::vec(-3.0f64..3.0, d * n), d in Just(d), n in Just(n)) -> DataMatrix {
        DataMatrix::dense(d, n, values).unwrap()
    }
}

prop_compose! {
    fn dataset_and_vectors()(data in dataset())
        (u in prop::collection::vec(-1.0f64..1.0, data.d()), v in prop::collection::vec(-1.0f64..1.0, data.d()), data in Just(data))
        -> (DataMatrix, Vec<f64>, Vec<f64>) {
        (data, u, v)
    }
}

/// LIBSVM text with sorted, distinct, 1-based indices.
fn libsvm_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::collection::btree_map(1usize..20, -100.0f64..100.0, 1..6), 1..8).prop_map(|rows| {
        rows.iter()
            .map(|r| {
                let feats: Vec<String> = r.iter().filter(|(_, v)| **v != 0.0).map(|(k, v)| format!("{k}:{v}")).collect();
                format!("1 {}", feats.join(" "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn full_batch_matvec_is_the_covariance((data, _u, v) in dataset_and_vectors()) {
        let a = minibatch_matvec(&data, &MiniBatch::full(data.n()), &v).unwrap();
        let b = covariance_matvec(&data, &v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * norm(&b).max(1e-300));
        }
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal(w in prop::collection::vec(-1.0f64..1.0, 4), v in prop::collection::vec(-1.0f64..1.0, 4)) {
        prop_assume!(norm(&w) > 1e-3);
        let p = project_orthogonal(&w, &v).unwrap();
        let pp = project_orthogonal(&w, &p).unwrap();
        for (a, b) in p.iter().zip(&pp) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert!(dot(&p, &w).abs() <= 1e-12 * norm(&v) * norm(&w));
    }

    #[test]
    fn implied_covariance_is_symmetric_psd((data, u, v) in dataset_and_vectors()) {
        let cu = covariance_matvec(&data, &u).unwrap();
        let cv = covariance_matvec(&data, &v).unwrap();
        let scale = norm(&u) * norm(&v) * norm(&cu).max(norm(&cv)).max(1.0);
        prop_assert!((dot(&u, &cv) - dot(&v, &cu)).abs() <= 1e-12 * scale);
        if norm(&u) > 0.0 {
            prop_assert!(rayleigh_quotient(&data, &u).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sparse_and_dense_agree((data, u, v) in dataset_and_vectors()) {
        let sparse = data.to_sparse();
        let a = covariance_matvec(&data, &v).unwrap();
        let b = covariance_matvec(&sparse, &v).unwrap();
        let batch = MiniBatch::new((0..data.n()).step_by(2).collect(), data.n()).unwrap();
        let c = minibatch_matvec(&data, &batch, &u).unwrap();
        let e = minibatch_matvec(&sparse, &batch, &u).unwrap();
        for (x, y) in a.iter().zip(&b).chain(c.iter().zip(&e)) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn real_regime_closed_forms_match(beta in 0.01f64..2.0, excess in 1.001f64..5.0, t in 0i64..=40) {
        let alpha = 4.0 * beta * excess;
        let (p, q) = closed_form_pair(t, alpha, beta).unwrap();
        prop_assert!(rel(p, p_poly(t, alpha, beta).unwrap()) <= 1e-9);
        prop_assert!(rel(q, q_poly(t, alpha, beta).unwrap()) <= 1e-9);
    }

    #[test]
    fn double_root_identities(beta in prop::sample::select(vec![0.25_f64, 0.81, 1.0]), t in 0i64..=40) {
        let bt = beta.powi(t as i32);
        let k = (t + 1) as f64;
        // The recurrence loses a few digits near the double root.
        prop_assert!(rel(p_poly(t, 4.0 * beta, beta).unwrap(), bt) <= 1e-10);
        prop_assert!(rel(q_poly(t, 4.0 * beta, beta).unwrap(), k * k * bt) <= 1e-10);
    }

    #[test]
    fn oscillatory_values_are_dominated(beta in 0.01f64..1.5, frac in 0.0f64..0.999, t in 0i64..=40) {
        let alpha = 4.0 * beta * frac;
        let slack = 1e-12;
        let pd = p_poly(t, 4.0 * beta, beta).unwrap();
        let qd = q_poly(t, 4.0 * beta, beta).unwrap();
        prop_assert!(p_poly(t, alpha, beta).unwrap() <= pd * (1.0 + slack));
        prop_assert!(q_poly(t, alpha, beta).unwrap() <= qd * (1.0 + slack));
    }

    #[test]
    fn g_decreases_in_eta(l1 in 0.1f64..3.0, ratio in 0.05f64..0.99, m in 1usize..=40) {
        let l2 = l1 * ratio;
        let gs: Vec<f64> = (1..=100).map(|k| g_of_eta(k as f64 / 100.0, l1, l2, m).unwrap()).collect();
        prop_assert!(gs.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(gs.iter().all(|&g| g >= gs[99]));
    }

    #[test]
    fn standardize_gives_zero_mean_unit_sd(data in dataset()) {
        let s = standardize(&data).unwrap();
        let n = s.n() as f64;
        for j in 0..s.d() {
            let col: Vec<f64> = (0..s.n()).map(|i| s.column_dense(i)[j]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() <= 1e-10);
            prop_assert!(sd == 0.0 || (sd - 1.0).abs() <= 1e-10, "sd {sd}");
        }
    }

    #[test]
    fn libsvm_round_trip(text in libsvm_text()) {
        let a = parse_libsvm_str(&text).unwrap();
        let b = parse_libsvm_str(&to_libsvm_string(&a)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn synthetic_spectrum_round_trip(
        tail in prop::collection::vec(0.01f64..0.8, 1..5),
        extra in 0usize..20,
        seed in any::<u64>(),
    ) {
        let mut spectrum = vec![1.0];
        let mut tail = tail;
        tail.sort_by(|a, b| b.partial_cmp(a).unwrap());
        spectrum.extend(tail);
        let d = spectrum.len();
        let (data, exact) = synthetic_spectrum(&spectrum, d + extra, seed).unwrap();
        let r = reference_eigenpairs(&data, 2).unwrap();
        prop_assert!((r.lambda1() - spectrum[0]).abs() <= 1e-10);
        prop_assert!((r.lambda2() - spectrum[1]).abs() <= 1e-10);
        prop_assert!(dot(r.u1(), exact.u1()).abs() >= 1.0 - 1e-8);
    }

    #[test]
    fn rescaling_restores_unit_norm(
        prev in prop::collection::vec(-1e6f64..1e6, 5),
        cur in prop::collection::vec(-1e6f64..1e6, 5),
    ) {
        prop_assume!(norm(&cur) > 1e-6);
        let mut st = IterateState::at_anchor(vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0; 5], 0);
        st.w_prev = prev.clone();
        st.w_cur = cur.clone();
        let s = stability_rescale(&mut st).unwrap();
        prop_assert!((norm(&st.w_cur) - 1.0).abs() <= 1e-9);
        for (a, b) in st.w_prev.iter().zip(&prev) {
            prop_assert!((a * s - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
