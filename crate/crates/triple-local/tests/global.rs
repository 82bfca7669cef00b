use num_rational::Ratio;
use proptest::prelude::*;
use triple_local::global::{
    assemble_from_locals, enumerate_inputs, global_constant, is_fundamental, kronecker_symbol, nu, GlobalInput,
    LocalCase,
};
use triple_local::Error;

fn r(n: i128, d: i128) -> Ratio<i128> {
    Ratio::new(n, d)
}

fn g(d: i64, q1: i64, flag: bool) -> GlobalInput {
    GlobalInput::new(d, q1, flag).unwrap()
}

/// Fundamental discriminants straight from the definition.
fn fundamental_oracle(d: i64) -> bool {
    let squarefree = |n: i64| (2..).take_while(|k| k * k <= n.abs()).all(|k| n % (k * k) != 0);
    if d == 1 || d == 0 {
        return false;
    }
    if d.rem_euclid(4) == 1 {
        return squarefree(d);
    }
    d % 4 == 0 && matches!((d / 4).rem_euclid(4), 2 | 3) && squarefree(d / 4)
}

#[test]
fn fundamental_examples() {
    assert!(is_fundamental(-3));
    assert!(is_fundamental(-4));
    assert!(!is_fundamental(-12));
    for d in -500..500 {
        assert_eq!(is_fundamental(d), fundamental_oracle(d), "D = {d}");
    }
}

#[test]
fn nu_examples() {
    assert_eq!(nu(1), r(1, 1));
    assert_eq!(nu(6), r(12, 1));
    assert_eq!(nu(4), r(6, 1));
}

#[test]
fn kronecker_examples() {
    assert_eq!(kronecker_symbol(-4, 3), -1);
    assert_eq!(kronecker_symbol(-23, 1), 1);
    assert_eq!(kronecker_symbol(-3, 2), -1);
    assert_eq!(kronecker_symbol(-3, 3), 0);
}

#[test]
fn theorem_constant_examples() {
    assert_eq!(global_constant(&g(-3, 3, false)), r(1, 72));
    assert_eq!(global_constant(&g(-4, 4, true)), r(1, 128));
    assert_eq!(global_constant(&g(-4, 4, false)), r(3, 256));
    assert_eq!(global_constant(&g(-20, 4, true)), r(1, 3840));
}

#[test]
fn local_product_examples() {
    assert_eq!(assemble_from_locals(&g(-3, 1, false)), r(1, 96));
    assert_eq!(global_constant(&g(-3, 1, false)), r(1, 96));
    assert_eq!(assemble_from_locals(&g(-3, 3, false)), r(1, 72));
    assert_eq!(assemble_from_locals(&g(-8, 8, true)), r(1, 768));
}

#[test]
fn local_cases_follow_q1() {
    let cases = g(-20, 4, true).local_cases();
    assert_eq!(cases, vec![(2, 2, LocalCase::Supercuspidal { c: 2, unramified: true }), (5, 1, LocalCase::Spherical)]);
    let cases = g(-15, 3, false).local_cases();
    assert_eq!(cases, vec![(3, 1, LocalCase::Special), (5, 1, LocalCase::Spherical)]);
}

#[test]
fn invalid_inputs() {
    assert_eq!(GlobalInput::new(-12, 1, false), Err(Error::NotFundamental(-12)));
    assert!(matches!(GlobalInput::new(-20, 3, false), Err(Error::InvalidInput(_))));
}

#[test]
fn paths_agree_exactly_when_four_does_not_divide_q1() {
    for input in enumerate_inputs(-200).into_iter().filter(|x| x.q1 % 4 != 0) {
        assert_eq!(assemble_from_locals(&input), global_constant(&input), "{input:?}");
    }
}

#[test]
fn paths_differ_by_three_halves_when_four_divides_q1() {
    let mismatched: Vec<_> = enumerate_inputs(-200).into_iter().filter(|x| x.q1 % 4 == 0).collect();
    assert_eq!(mismatched.len(), 142);
    for input in mismatched {
        assert_eq!(global_constant(&input) / assemble_from_locals(&input), r(3, 2), "{input:?}");
    }
}

proptest! {
    #[test]
    fn kronecker_is_multiplicative(idx in 0usize..60, a in 1i64..400, b in 1i64..400) {
        let ds: Vec<i64> = (-400..0).filter(|d| is_fundamental(*d)).collect();
        let d = ds[idx % ds.len()];
        prop_assert_eq!(kronecker_symbol(d, a * b), kronecker_symbol(d, a) * kronecker_symbol(d, b));
    }

    #[test]
    fn kronecker_is_periodic(idx in 0usize..60, n in 1i64..400, k in 1i64..5) {
        let ds: Vec<i64> = (-400..0).filter(|d| is_fundamental(*d)).collect();
        let d = ds[idx % ds.len()];
        prop_assert_eq!(kronecker_symbol(d, n), kronecker_symbol(d, n + k * d.abs()));
    }

    #[test]
    fn nu_is_multiplicative(a in 1i64..300, b in 1i64..300) {
        prop_assume!(num_integer::gcd(a, b) == 1);
        prop_assert_eq!(nu(a * b), nu(a) * nu(b));
    }
}
