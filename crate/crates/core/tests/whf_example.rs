use svarma_core::mat::Mat;
use svarma_core::polymat::{LaurentMat, PolyMat};
use svarma_core::scalar::{ratio, Rational};
use svarma_core::whf::{canonicalize, compose, normalize, smith_whf_factorize, NormalizationMode, WhfTriple};

fn q(rows: &[&[(i64, i64)]]) -> Mat<Rational> {
    Mat::from_rows(&rows.iter().map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect()).collect::<Vec<_>>())
}

fn example_triple() -> WhfTriple<Rational> {
    let p = PolyMat::from_coeffs(vec![
        q(&[&[(1, 1), (1, 4)], &[(1, 3), (1, 2)]]),
        q(&[&[(1, 2), (1, 3)], &[(1, 4), (1, 3)]]),
        q(&[&[(0, 1), (1, 3)], &[(0, 1), (1, 2)]]),
    ]);
    let f = LaurentMat::from_negative_powers(vec![
        q(&[&[(1, 1), (2, 1)], &[(3, 1), (4, 1)]]),
        q(&[&[(1, 2), (1, 5)], &[(1, 4), (1, 3)]]),
        q(&[&[(1, 6), (1, 7)], &[(0, 1), (0, 1)]]),
    ]);
    WhfTriple { p, indices: vec![2, 1], f, mode: NormalizationMode::Raw, row_permutation: None }
}

fn printed_p() -> PolyMat<Rational> {
    PolyMat::from_coeffs(vec![
        q(&[&[(1, 1), (0, 1)], &[(1, 3), (1, 1)]]),
        q(&[&[(1, 2), (0, 1)], &[(1, 4), (29, 60)]]),
        q(&[&[(0, 1), (11, 20)], &[(0, 1), (43, 40)]]),
    ])
}

fn printed_f() -> LaurentMat<Rational> {
    LaurentMat::from_negative_powers(vec![
        q(&[&[(13, 8), (17, 6)], &[(5, 4), (5, 3)]]),
        q(&[&[(125, 96), (457, 360)], &[(5, 48), (5, 36)]]),
        q(&[&[(19, 48), (1, 3)], &[(0, 1), (0, 1)]]),
    ])
}

fn printed_canonical() -> WhfTriple<Rational> {
    WhfTriple { p: printed_p(), indices: vec![2, 1], f: printed_f(), mode: NormalizationMode::Canonical, row_permutation: None }
}

/// The printed original factors and the printed canonical factors do not
/// compose to the same b(z): they differ only in the first row of the z^-2
/// coefficient of f, which the canonical transform maps to [11/48, 19/84].
#[test]
fn original_factors_differ_from_printed_only_in_f2_row_one() {
    let c = canonicalize(&example_triple()).unwrap();
    assert_eq!(c.p, printed_p());
    assert!(c.row_permutation.is_none());
    let mut expected = printed_f().negative_power_coeffs();
    expected[2][(0, 0)] = ratio(11, 48);
    expected[2][(0, 1)] = ratio(19, 84);
    assert_eq!(c.f, LaurentMat::from_negative_powers(expected));
    let b_orig = compose(&example_triple()).unwrap();
    let b_print = compose(&printed_canonical()).unwrap();
    assert_eq!(b_orig.coeff(2), b_print.coeff(2));
    assert_eq!(b_orig.coeff(3), b_print.coeff(3));
    assert_ne!(b_orig.coeff(0), b_print.coeff(0));
}

#[test]
fn factorizing_b_then_canonicalizing_matches_printed_fractions() {
    let b = compose(&printed_canonical()).unwrap();
    assert_eq!(b.degree(), 3);
    let raw = smith_whf_factorize(&b).unwrap();
    assert_eq!(raw.indices, vec![2, 1]);
    assert_eq!(compose(&raw).unwrap(), b);
    let c = canonicalize(&raw).unwrap();
    assert_eq!(c.p, printed_p());
    assert_eq!(c.f, printed_f());
    assert_eq!(compose(&c).unwrap(), b);
    assert_eq!(canonicalize(&c).unwrap(), c);
}

#[test]
fn b0_identity_folds_b0() {
    let c = printed_canonical();
    let (n, b0) = normalize(&c, NormalizationMode::B0Identity).unwrap();
    let expected = q(&[&[(1, 1), (0, 1)], &[(1, 3), (1, 1)]]).mul(&q(&[&[(19, 48), (1, 3)], &[(5, 48), (5, 36)]]));
    assert_eq!(b0, expected);
    // stacked (f_2 row 1; f_1 row 2) equals [[1,0],[-1/3,1]]
    let g0 = n.g().unwrap().coeff(0);
    assert_eq!(g0, q(&[&[(1, 1), (0, 1)], &[(-1, 3), (1, 1)]]));
    let (nat, f0) = normalize(&c, NormalizationMode::Natural).unwrap();
    assert_eq!(nat.f_coeff(0), Mat::identity(2));
    assert_eq!(compose(&nat).unwrap().mul_const(&f0).unwrap(), compose(&c).unwrap());
    assert_eq!(f0, printed_f().coeff(0));
}

