//! Property tests for the linear algebra kernels and the reductions.

mod common;

use atsroot::designs::{setting_hypothesis, trace_selector, vech, Setting, SettingSpec};
use atsroot::matrix::{kronecker, least_squares, relative_frobenius_gap, svd};
use atsroot::reduction::{canonical_reduce, kronecker_reduce, same_solution_set, unscaled_companion};
use atsroot::{check_equivalence, reduce, reduce_homogeneous, AtsContext, DenseMatrix, Hypothesis, Variant};
use common::{ats_oracle, forms_oracle, rel_gap};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c)
            .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
    })
}

fn exact(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |data| DenseMatrix::new(rows, cols, data).unwrap())
}

/// Product of two random factors, so rank deficiency is common.
fn hypothesis_matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..=9, 1usize..=7, 1usize..=7).prop_flat_map(|(m, d, k)| {
        (
            prop::collection::vec(-3.0f64..3.0, m * k),
            prop::collection::vec(-3.0f64..3.0, k * d),
        )
            .prop_map(move |(a, b)| {
                let a = DenseMatrix::new(m, k, a).unwrap();
                let b = DenseMatrix::new(k, d, b).unwrap();
                a.matmul(&b).unwrap()
            })
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

fn orthogonality_gap(q: &DenseMatrix) -> f64 {
    q.gram().sub(&DenseMatrix::identity(q.cols())).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn svd_reconstructs(a in matrix(9, 9)) {
        let dec = svd(&a).unwrap();
        let scale = 1.0 + a.frobenius_norm();
        prop_assert!(dec.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-10 * scale);
        prop_assert!(orthogonality_gap(&dec.u) < 1e-10);
        prop_assert!(orthogonality_gap(&dec.vt.transpose()) < 1e-10);
        prop_assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_matches_nalgebra(a in matrix(8, 8)) {
        let dec = svd(&a).unwrap();
        let na = nalgebra::DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice());
        let mut expected: Vec<f64> = na.singular_values().iter().copied().collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        let tol = 1e-10 * (1.0 + expected[0]);
        for (s, e) in dec.singular_values.iter().zip(&expected) {
            prop_assert!((s - e).abs() <= tol, "{s} vs {e}");
        }
    }

    #[test]
    fn kronecker_mixed_product(
        (a, b, c, e) in (1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3)
            .prop_flat_map(|(r1, k1, c1, r2, k2, c2)| {
                (exact(r1, k1), exact(r2, k2), exact(k1, c1), exact(k2, c2))
            }),
    ) {
        // (A (x) B)(C (x) E) = AC (x) BE.
        let lhs = kronecker(&a, &b).unwrap().matmul(&kronecker(&c, &e).unwrap()).unwrap();
        let rhs = kronecker(&a.matmul(&c).unwrap(), &b.matmul(&e).unwrap()).unwrap();
        prop_assert!(relative_frobenius_gap(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn least_squares_solves_consistent_systems(h in hypothesis_matrix(), theta in vector(7)) {
        let theta = &theta[..h.cols()];
        let y = h.matvec(theta).unwrap();
        let sol = least_squares(&h, &y).unwrap();
        let fitted = h.matvec(&sol.solution).unwrap();
        let gap: f64 = fitted.iter().zip(&y).map(|(f, v)| (f - v).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(gap <= 1e-9 * (1.0 + ny));
        prop_assert!(sol.residual_norm <= 1e-9 * (1.0 + ny));
    }

    #[test]
    fn homogeneous_reduction_preserves_all_forms(
        h in hypothesis_matrix(), x in vector(7), sigma_seed in 0u64..1000,
    ) {
        let d = h.cols();
        let x = &x[..d];
        let mut rng = common::rng(sigma_seed);
        let sigma = common::random_psd(&mut rng, d);
        let l = reduce_homogeneous(&h).unwrap();
        prop_assert!(l.rows() <= h.rows().min(d));
        prop_assert!(relative_frobenius_gap(&l.gram(), &h.gram()).unwrap() < 1e-10);
        if l.rows() > 0 {
            let full = AtsContext::homogeneous(h.clone(), Some(sigma.clone())).unwrap();
            let compact = AtsContext::homogeneous(l, Some(sigma.clone())).unwrap();
            let (q, _, _) = forms_oracle(x, &h, &vec![0.0; h.rows()], &sigma);
            for v in Variant::ALL {
                let (a, b) = (full.evaluate(x, v), compact.evaluate(x, v));
                match (a, b) {
                    (Ok(a), Ok(b)) => prop_assert!(rel_gap(a, b) < 1e-8 || (a - b).abs() < 1e-10 * (1.0 + q)),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{v}: {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn compact_root_has_the_same_kernel(h in hypothesis_matrix(), theta in vector(7)) {
        // H theta = 0 iff L theta = 0: compare projections onto the kernel.
        let l = reduce_homogeneous(&h).unwrap();
        let theta = &theta[..h.cols()];
        let hn: f64 = h.matvec(theta).unwrap().iter().map(|v| v * v).sum();
        let ln: f64 = if l.rows() == 0 { 0.0 } else { l.matvec(theta).unwrap().iter().map(|v| v * v).sum() };
        prop_assert!((hn - ln).abs() <= 1e-9 * (1.0 + hn));
    }

    #[test]
    fn scaled_reduction_preserves_standardized_forms(
        h in hypothesis_matrix(), theta in vector(7), x in vector(7), seed in 0u64..1000,
    ) {
        let d = h.cols();
        let y = h.matvec(&theta[..d]).unwrap();
        let hyp = Hypothesis::new(h.clone(), y.clone()).unwrap();
        let red = reduce(&hyp).unwrap();
        prop_assume!(red.ell() > 0);
        let report = check_equivalence(&hyp, &red.as_hypothesis().unwrap()).unwrap();
        prop_assert!(report.ats_s_equal, "{report:?}");
        prop_assert_eq!(report.same_solution_set, Some(true));

        let mut rng = common::rng(seed);
        let sigma = common::random_psd(&mut rng, d);
        let full = AtsContext::new(h, y, Some(sigma.clone())).unwrap();
        let compact = AtsContext::new(red.l.clone(), red.y_tilde.clone(), Some(sigma)).unwrap();
        let x = &x[..d];
        for v in [Variant::AtsS, Variant::AtsF] {
            if let (Ok(a), Ok(b)) = (full.evaluate(x, v), compact.evaluate(x, v)) {
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unscaled_pair_differs_by_a_constant(
        h in hypothesis_matrix(), y in vector(9), x1 in vector(7), x2 in vector(7),
    ) {
        let y = y[..h.rows()].to_vec();
        let hyp = Hypothesis::new(h.clone(), y.clone()).unwrap();
        let (l0, y0) = unscaled_companion(&hyp).unwrap();
        prop_assume!(l0.rows() > 0);
        let d = h.cols();
        let diff = |x: &[f64]| ats_oracle(x, &l0, &y0) - ats_oracle(x, &h, &y);
        let (a, b) = (diff(&x1[..d]), diff(&x2[..d]));
        let scale = 1.0 + ats_oracle(&x1[..d], &h, &y) + ats_oracle(&x2[..d], &h, &y);
        prop_assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
    }

    #[test]
    fn different_gram_means_a_witness_exists(h in hypothesis_matrix(), bump in 0.05f64..1.0) {
        // Adding a row changes the Gram matrix unless the row is zero.
        let d = h.cols();
        let extra: Vec<f64> = (0..d).map(|j| bump * (j as f64 + 1.0)).collect();
        let bigger = h.vstack(&DenseMatrix::row_vector(&extra)).unwrap();
        let report = check_equivalence(
            &Hypothesis::homogeneous(h.clone()).unwrap(),
            &Hypothesis::homogeneous(bigger.clone()).unwrap(),
        ).unwrap();
        prop_assert!(!report.ats_equal);
        // The extra row itself is a witness direction.
        let gap = ats_oracle(&extra, &bigger, &vec![0.0; bigger.rows()]) - ats_oracle(&extra, &h, &vec![0.0; h.rows()]);
        prop_assert!(gap > 0.0);
    }

    #[test]
    fn canonical_reduce_ignores_row_operations(h in hypothesis_matrix(), seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let q = loop {
            let q = common::gaussian(&mut rng, h.rows(), h.rows());
            let s = svd(&q).unwrap().singular_values;
            if s[s.len() - 1] > 1e-2 * s[0] {
                break q;
            }
        };
        let a = canonical_reduce(&h).unwrap();
        let b = canonical_reduce(&q.matmul(&h).unwrap()).unwrap();
        prop_assert_eq!(a.shape(), b.shape());
        let same = a.as_slice().iter().zip(b.as_slice()).all(|(u, v)| u.to_bits() == v.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn kronecker_reduce_matches_gram(w in hypothesis_matrix(), s in hypothesis_matrix()) {
        prop_assume!(w.cols() * s.cols() <= 30);
        let l = kronecker_reduce(&w, &s).unwrap();
        let full = kronecker(&w, &s).unwrap();
        let target = full.gram();
        if l.rows() == 0 {
            prop_assert!(target.max_abs() < 1e-9);
        } else {
            prop_assert!(relative_frobenius_gap(&l.gram(), &target).unwrap() < 1e-9);
        }
    }

    #[test]
    fn trace_selector_reads_the_trace(p in 2usize..7, data in prop::collection::vec(-3.0f64..3.0, 36)) {
        let v = DenseMatrix::from_fn(p, p, |i, j| data[i.min(j) * 6 + i.max(j)]);
        let h = trace_selector(p);
        let t: f64 = h.iter().zip(vech(&v).unwrap()).map(|(a, b)| a * b).sum();
        prop_assert!((t - v.trace()).abs() < 1e-12);
    }
}

#[test]
fn setting_c_accepts_covariances_with_the_right_trace() {
    let spec = SettingSpec::new(Setting::C, 4, 2.5).unwrap();
    let hyp = setting_hypothesis(&spec).unwrap();
    let mut rng = common::rng(5);
    for _ in 0..20 {
        let v = common::random_psd(&mut rng, 4);
        let v = v.scale(2.5 / v.trace());
        let x = vech(&v).unwrap();
        let fitted = hyp.h().matvec(&x).unwrap();
        for (f, y) in fitted.iter().zip(hyp.y()) {
            assert!((f - y).abs() < 1e-12);
        }
    }
}

#[test]
fn settings_have_expected_rank() {
    for q in [2, 3, 7] {
        for (setting, expected) in [(Setting::A, 1), (Setting::B, 2 * q), (Setting::C, 1)] {
            let hyp = setting_hypothesis(&SettingSpec::new(setting, q, 1.0).unwrap()).unwrap();
            assert_eq!(hyp.rank().unwrap(), expected, "{setting} {q}");
        }
    }
}

#[test]
fn reduction_keeps_solution_set_for_settings() {
    for setting in [Setting::A, Setting::B, Setting::C] {
        let hyp = setting_hypothesis(&SettingSpec::new(setting, 4, 1.0).unwrap()).unwrap();
        let red = reduce(&hyp).unwrap().as_hypothesis().unwrap();
        assert!(same_solution_set(&hyp, &red).unwrap(), "{setting}");
    }
}
