mod common;

use common::*;

#[test]
fn polya_gamma_means() {
    for (i, &(b, c)) in [(1.0, 0.0), (0.5, 1.0), (2.0, 3.0)].iter().enumerate() {
        let (m, target, se) = pg_mean_check(b, c, 50_000, 100 + i as u64);
        assert!((m - target).abs() < 5.0 * se, "PG({b},{c}): {m} vs {target} (se {se})");
    }
}

#[test]
fn tilting_identity() {
    for (i, &(a, b, psi)) in [(1.0, 1.0, -2.0), (0.0, 0.5, 1.0), (1.0, 1.0, 0.0)].iter().enumerate() {
        let (lhs, rhs, se, allow) = tilting_check(a, b, psi, 50_000, 200 + i as u64);
        assert!(
            (lhs - rhs).abs() <= 5.0 * se + allow,
            "a={a} b={b} psi={psi}: {lhs} vs {rhs} (se {se})"
        );
    }
}

#[test]
fn inverse_gamma_and_gaussian_moments() {
    let (m, t, se) = inv_gamma_check(4.0, 3.0, 200_000, 301);
    assert!((m - t).abs() < 5.0 * se);
    let ((m, t, se), (v, tv, vse)) = inv_gaussian_check(2.0, 3.0, 200_000, 302);
    assert!((m - t).abs() < 5.0 * se);
    assert!((v - tv).abs() < 5.0 * vse);
}
