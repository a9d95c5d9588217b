//! Dense linear algebra checked against nalgebra.

use dynreg::haar::{column_norm_sq, haar_matrix, HaarPreconditioner};
use dynreg::linalg::{
    embed_comparator, power_iteration, symmetric_eigenvalues, weighted_norm_sq, ComparatorSequence, DenseMatrix,
    DifferenceOperator, DifferencePreconditioner, Preconditioner,
};
use dynreg::verify::wolkowicz_upper_bound;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

fn symmetric(n: usize, vals: &[f64]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m.set(i, j, vals[k]);
            m.set(j, i, vals[k]);
            k += 1;
        }
    }
    m
}

fn sym_strategy() -> impl Strategy<Value = DenseMatrix> {
    (1usize..24).prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n * (n + 1) / 2).prop_map(move |v| symmetric(n, &v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match(a in sym_strategy()) {
        let ours = symmetric_eigenvalues(&a).unwrap();
        let mut theirs: Vec<f64> = SymmetricEigen::new(to_na(&a)).eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = a.frobenius().max(1.0);
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn moment_bound_dominates(a in sym_strategy()) {
        let top = SymmetricEigen::new(to_na(&a)).eigenvalues.max();
        prop_assert!(wolkowicz_upper_bound(&a).unwrap() >= top - 1e-10 * a.frobenius().max(1.0));
    }

    #[test]
    fn inverse_matches(a in sym_strategy(), shift in 1.0f64..10.0) {
        // Diagonal shift keeps it comfortably invertible.
        let n = a.rows();
        let m = a.add(&DenseMatrix::identity(n).scale(a.frobenius() + shift)).unwrap();
        let ours = m.inverse().unwrap();
        let theirs = to_na(&m).try_inverse().unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((ours.get(i, j) - theirs[(i, j)]).abs() <= 1e-12 * theirs.amax().max(1.0));
            }
        }
    }

    #[test]
    fn weighted_norm_is_kronecker_quadratic(t in 1usize..24, d in 1usize..4, vals in prop::collection::vec(-2.0f64..2.0, 96)) {
        let pts: Vec<Vec<f64>> = (0..t).map(|s| (0..d).map(|j| vals[(s * d + j) % vals.len()]).collect()).collect();
        let seq = ComparatorSequence::new(pts).unwrap();
        let p = DifferencePreconditioner::new(t);
        let s = to_na(&p.dense());
        let m = s.kronecker(&DMatrix::<f64>::identity(d, d));
        let u = DVector::from_vec(embed_comparator(&seq).as_slice().to_vec());
        let want = (u.transpose() * &m * &u)[(0, 0)];
        let got = weighted_norm_sq(&embed_comparator(&seq), &p).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
    }
}

#[test]
fn difference_closed_forms() {
    for t in 1..=40 {
        let s = to_na(&DifferenceOperator::new(t).dense());
        let gram = s.transpose() * &s;
        let inv = gram.clone().try_inverse().unwrap();
        let ours = DifferencePreconditioner::new(t);
        let closed = to_na(&ours.dense_inverse());
        assert!((&inv - &closed).amax() <= 1e-9, "T = {t}");
        assert!((to_na(&ours.dense()) - gram).amax() == 0.0);
        assert!((inv.trace() - (t * (t + 1) / 2) as f64).abs() <= 1e-9);
        let mut x = vec![0.0; t];
        let mut y = vec![0.0; t];
        for (i, v) in x.iter_mut().enumerate() {
            *v = (i as f64 * 0.7).sin();
        }
        ours.apply_inverse(&x, &mut y);
        let want = &closed * DVector::from_vec(x.clone());
        for i in 0..t {
            assert!((y[i] - want[i]).abs() <= 1e-9 * want.amax().max(1.0));
        }
    }
}

#[test]
fn haar_columns_are_orthogonal() {
    for n in 0..=7u32 {
        let h = to_na(&haar_matrix(n).unwrap());
        let gram = h.transpose() * &h;
        let len = 1usize << n;
        for i in 0..len {
            for j in 0..len {
                let want = if i == j { column_norm_sq(i, len) } else { 0.0 };
                assert_eq!(gram[(i, j)], want, "n = {n}, ({i}, {j})");
            }
        }
    }
}

#[test]
fn haar_preconditioner_inverts_hht() {
    for n in 0..=6u32 {
        let t = 1usize << n;
        let h = to_na(&haar_matrix(n).unwrap());
        let hht = &h * h.transpose();
        let p = HaarPreconditioner::new(t).unwrap();
        assert!((to_na(&p.dense_inverse()) - &hht).amax() <= 1e-12);
        let s = hht.clone().try_inverse().unwrap();
        assert!((to_na(&p.dense()) - s).amax() <= 1e-10, "T = {t}");
        for k in 1..=t {
            assert_eq!(p.inverse_diag(k), hht[(k - 1, k - 1)]);
        }
    }
}

#[test]
fn power_iteration_finds_top_eigenvalue() {
    for t in [2, 5, 17, 40] {
        let p = DifferencePreconditioner::new(t);
        let got = power_iteration(t, |x, y| p.apply_inverse(x, y), 1e-12, 100_000).unwrap();
        let want = SymmetricEigen::new(to_na(&p.dense_inverse())).eigenvalues.max();
        assert!((got - want).abs() <= 1e-8 * want, "T = {t}: {got} vs {want}");
    }
}
