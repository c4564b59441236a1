use ecdg::algebra::{
    cholesky, eig_decompose, is_antisymmetric, pairing_coupler, pairwise_sum, sign_split, EigenPairing, Mat, SymMatrix,
};
use ecdg::systems;
use ecdg::EcdgError;
use proptest::prelude::*;

fn sym_from(n: usize, vals: &[f64]) -> SymMatrix {
    let mut m = Mat::zeros(n, n);
    let mut t = 0;
    for i in 0..n {
        for j in 0..=i {
            m[(i, j)] = vals[t];
            m[(j, i)] = vals[t];
            t += 1;
        }
    }
    SymMatrix::new(m).unwrap()
}

fn random_sym() -> impl Strategy<Value = SymMatrix> {
    (1usize..=8).prop_flat_map(|n| {
        proptest::collection::vec(-5.0f64..5.0, n * (n + 1) / 2).prop_map(move |v| sym_from(n, &v))
    })
}

fn orthogonality_defect(s: &Mat) -> f64 {
    s.transpose().matmul(s).sub(&Mat::identity(s.rows())).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eig_reconstructs_and_is_oriented(m in random_sym()) {
        let e = eig_decompose(&m, 1e-12).unwrap();
        let scale = e.lambdas.iter().fold(1e-300f64, |a, l| a.max(l.abs()));
        let rec = e.reconstruct();
        prop_assert!(rec.sub(m.mat()).max_abs() <= 1e-11 * scale.max(m.mat().max_abs()));
        prop_assert!(orthogonality_defect(&e.s) <= 1e-12);
        prop_assert!((e.s.det() - 1.0).abs() <= 1e-12);
        for w in e.lambdas.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let pos = e.lambdas.iter().filter(|&&l| l > 0.0).count();
        let neg = e.lambdas.iter().filter(|&&l| l < 0.0).count();
        prop_assert_eq!(e.r + e.s_pairs, pos.max(neg));
        prop_assert_eq!(e.s_pairs, pos.min(neg));
        prop_assert_eq!(e.zero_count, m.n() - pos - neg);
        for &(i, j) in &e.pairs {
            prop_assert!(e.lambdas[i] > 0.0 && e.lambdas[j] < 0.0);
        }
    }

    #[test]
    fn eig_is_deterministic(m in random_sym()) {
        let a = eig_decompose(&m, 1e-12).unwrap();
        let b = eig_decompose(&m, 1e-12).unwrap();
        prop_assert_eq!(a.s.as_slice(), b.s.as_slice());
        prop_assert_eq!(a.lambdas, b.lambdas);
    }

    #[test]
    fn coupler_is_antisymmetric_for_paired_spectra(
        pos in proptest::collection::vec(0.1f64..4.0, 1..4),
        neg in proptest::collection::vec(0.1f64..4.0, 1..4),
        zeros in 0usize..3,
        angles in proptest::collection::vec(-3.0f64..3.0, 30),
    ) {
        // Equal counts of positive and negative eigenvalues in a random frame.
        let n_pairs = pos.len().min(neg.len());
        let mut d: Vec<f64> = pos[..n_pairs].to_vec();
        d.extend(std::iter::repeat(0.0).take(zeros));
        d.extend(neg[..n_pairs].iter().map(|v| -v));
        let n = d.len();
        let mut q = Mat::identity(n);
        for (t, a) in angles.iter().enumerate() {
            let (i, j) = (t % n, (t * 7 + 1) % n);
            if i == j { continue; }
            let mut g = Mat::identity(n);
            g[(i, i)] = a.cos(); g[(j, j)] = a.cos();
            g[(i, j)] = -a.sin(); g[(j, i)] = a.sin();
            q = q.matmul(&g);
        }
        let m = SymMatrix::new(q.matmul(&Mat::diag(&d)).matmul(&q.transpose())).unwrap();
        let e = eig_decompose(&m, 1e-12).unwrap();
        prop_assert_eq!(e.r, 0);
        let c = pairing_coupler(&e).unwrap();
        let rep = is_antisymmetric(&c, 1e-13);
        prop_assert!(rep.holds, "violation {}", rep.violation);
    }

    #[test]
    fn sign_split_identities(m in random_sym()) {
        let s = sign_split(&m).unwrap();
        let scale = m.mat().max_abs().max(1e-300);
        prop_assert!(s.plus.add(&s.minus).sub(m.mat()).max_abs() <= 1e-12 * scale * m.n() as f64);
        prop_assert!(s.plus.sub(&s.minus).sub(&s.abs).max_abs() <= 1e-12 * scale * m.n() as f64);
    }

    #[test]
    fn pairwise_sum_matches_naive(v in proptest::collection::vec(-1.0f64..1.0, 0..300)) {
        let naive: f64 = v.iter().sum();
        prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-12);
    }
}

#[test]
fn identity_has_two_unpaired_positives() {
    let e = eig_decompose(&SymMatrix::diag(&[1.0, 1.0]), 1e-12).unwrap();
    assert_eq!(e.lambdas, vec![1.0, 1.0]);
    assert_eq!(e.s.as_slice(), Mat::identity(2).as_slice());
    assert_eq!((e.r, e.s_pairs), (2, 0));
}

#[test]
fn subsonic_acoustics_spectrum_is_paired() {
    let b1 = SymMatrix::from_rows(&[vec![0.5, 1.0], vec![1.0, 0.5]]).unwrap();
    let e = eig_decompose(&b1, 1e-12).unwrap();
    assert!((e.lambdas[0] - 1.5).abs() < 1e-14 && (e.lambdas[1] + 0.5).abs() < 1e-14);
    assert_eq!((e.r, e.s_pairs), (0, 1));
    // In the characteristic frame the coupler is (1/2) sqrt(0.75) R.
    let c = pairing_coupler(&e).unwrap();
    let rotated = e.s.transpose().matmul(&c).matmul(&e.s);
    assert!((rotated[(0, 1)] - 0.5 * 0.75f64.sqrt()).abs() < 1e-14);
    assert!((rotated[(0, 1)] - 0.433_012_701_892_219_3).abs() < 1e-15);
}

#[test]
fn elastic_normal_matrix_has_two_pairs_and_a_zero() {
    let sys = systems::elastodynamics(2.0, 1.0, 1.0).unwrap();
    let e = eig_decompose(&sys.b_n([1.0, 0.0]), 1e-12).unwrap();
    let expect = [1.0, 1.0, 0.0, -1.0, -1.0];
    for (l, x) in e.lambdas.iter().zip(expect) {
        assert!((l - x).abs() < 1e-13, "{:?}", e.lambdas);
    }
    assert_eq!((e.r, e.s_pairs, e.zero_count), (0, 2, 1));
}

#[test]
fn negative_majority_pairs_from_both_ends() {
    let e = eig_decompose(&SymMatrix::diag(&[2.0, -1.0, -3.0]), 1e-12).unwrap();
    assert!(e.majority_negative);
    assert_eq!((e.r, e.s_pairs), (1, 1));
    // Mirror of the positive-majority rule: the most negative eigenvalue stays
    // unpaired and the remaining negatives pair with the positives.
    assert_eq!(e.pairs, vec![(0, 1)]);
}

#[test]
fn antisymmetry_reports() {
    let z = is_antisymmetric(&Mat::zeros(3, 3), 1e-12);
    assert!(z.holds && z.violation == 0.0);
    assert!(is_antisymmetric(&Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]), 1e-12).holds);
    let s = is_antisymmetric(&Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]), 1e-12);
    assert!(!s.holds);
    assert_eq!(s.violation, 2.0);
}

#[test]
fn coupler_of_unit_pair_and_unpaired_error() {
    let p = EigenPairing::from_parts(vec![1.0, -1.0], Mat::identity(2), vec![(0, 1)]).unwrap();
    let c = pairing_coupler(&p).unwrap();
    assert_eq!(c.as_slice(), &[0.0, 0.5, -0.5, 0.0]);
    let e = eig_decompose(&SymMatrix::diag(&[1.0]), 1e-12).unwrap();
    assert!(matches!(pairing_coupler(&e), Err(EcdgError::UnpairedSpectrum { unpaired: 1 })));
}

#[test]
fn non_symmetric_input_is_rejected() {
    let m = Mat::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
    assert!(SymMatrix::new(m).is_err());
}

#[test]
fn cholesky_factor_reproduces_matrix() {
    let sys = systems::elastodynamics(2.0, 1.0, 1.0).unwrap();
    let l = cholesky(&sys.b0[0]).unwrap();
    let back = l.matmul(&l.transpose());
    assert!(back.sub(sys.b0[0].mat()).max_abs() < 1e-15);
    assert!(cholesky(&SymMatrix::diag(&[1.0, -1.0])).is_err());
}

#[test]
fn lu_inverse_roundtrip() {
    let a = Mat::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.3, -1.0, 2.0]]);
    let inv = a.inverse().unwrap();
    assert!(a.matmul(&inv).sub(&Mat::identity(3)).max_abs() < 1e-14);
    assert!(Mat::zeros(2, 2).inverse().is_err());
}
