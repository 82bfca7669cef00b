use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triple_local::characters::{
    epsilon_factor, eval_psi, kronecker_component, primitive_root, AdditiveCharacter, MultiplicativeCharacter,
    RationalAngle, UnitChar,
};
use triple_local::padic::{pow, PadicScalar};
use triple_local::Error;

fn s(p: u64, n: i64) -> PadicScalar {
    PadicScalar::from_int(p, n)
}

fn quadratic(p: u64, level: u32) -> MultiplicativeCharacter {
    let unit = UnitChar::all_of_level(p, level).into_iter().find(|c| c.pow(2).is_trivial()).unwrap();
    MultiplicativeCharacter::from_unit(unit)
}

/// Direct Gauss-sum oracle: `q^{-cs} ω(p)^c Σ_u ω^{-1}(u) e^{2πi u / p^c}` with float exponentials.
fn epsilon_oracle(s_: f64, omega: &MultiplicativeCharacter) -> Complex64 {
    let p = omega.prime();
    let c = omega.conductor();
    let n = pow(p, c);
    let mut sum = Complex64::new(0.0, 0.0);
    for u in (1..n).filter(|u| u % p != 0) {
        let chi = omega.eval(&s(p, u as i64)).unwrap().inv();
        sum += chi * Complex64::from_polar(1.0, std::f64::consts::TAU * u as f64 / n as f64);
    }
    sum * omega.z.powi(c as i32) * (p as f64).powf(-(c as f64) * s_)
}

#[test]
fn psi_examples() {
    assert!(eval_psi(&s(5, 17)).unwrap().is_zero());
    assert_eq!(eval_psi(&PadicScalar::from_ratio(2, 1, 2).unwrap()).unwrap(), RationalAngle::new(1, 2));
    assert_eq!(eval_psi(&PadicScalar::from_ratio(3, 1, 3).unwrap()).unwrap(), RationalAngle::new(1, 3));
}

#[test]
fn character_value_examples() {
    let unram = MultiplicativeCharacter::unramified(7, Complex64::new(0.0, 1.0));
    assert!((unram.eval(&s(7, 3)).unwrap() - 1.0).norm() < 1e-15);

    let quad3 = quadratic(3, 1);
    assert!((quad3.eval(&s(3, 2)).unwrap() + 1.0).norm() < 1e-15);

    assert_eq!(primitive_root(5), 2);
    let quartic = UnitChar::from_angles(5, RationalAngle::new(1, 4), RationalAngle::zero()).unwrap();
    let omega = MultiplicativeCharacter::from_unit(quartic);
    assert!((omega.eval(&s(5, 2)).unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    assert!((omega.eval(&s(5, 4)).unwrap() + 1.0).norm() < 1e-15);
}

#[test]
fn product_conductors() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = UnitChar::random_of_level(5, 2, &mut rng).unwrap();
    assert!(w.mul(&w.inv()).is_trivial());
    assert_eq!(w.mul(&w.inv()).level(), 0);
    let w = MultiplicativeCharacter::from_unit(w);
    assert_eq!(w.mul(&MultiplicativeCharacter::unramified(5, Complex64::new(-1.0, 0.0))).conductor(), 2);

    for p in [3u64, 5] {
        let level2 = UnitChar::all_of_level(p, 2);
        let one_plus_p = s(p, 1 + p as i64);
        for a in &level2 {
            for b in &level2 {
                if a != b && a.angle(&one_plus_p).unwrap() == b.angle(&one_plus_p).unwrap() {
                    assert!(a.mul(&b.inv()).level() <= 1);
                }
            }
        }
    }
}

#[test]
fn exact_conductor_witness() {
    for p in [2u64, 3, 5] {
        for c in 1..=3u32 {
            for chi in UnitChar::all_of_level(p, c) {
                let step = pow(p, c.saturating_sub(1).max(if p == 2 { 1 } else { 0 }));
                let witness = (1..pow(p, c))
                    .filter(|k| k % step == 0)
                    .map(|k| 1 + k)
                    .any(|u| !chi.angle(&s(p, u as i64)).unwrap().is_zero());
                assert!(witness, "p={p} c={c} {chi:?}");
            }
        }
    }
}

#[test]
fn epsilon_of_quadratic_mod_3_is_i() {
    let eps = epsilon_factor(0.5, &quadratic(3, 1), &AdditiveCharacter::standard(3)).unwrap();
    assert!((eps - Complex64::new(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn epsilon_rejects_unramified() {
    let omega = MultiplicativeCharacter::trivial(3);
    assert_eq!(epsilon_factor(0.5, &omega, &AdditiveCharacter::standard(3)), Err(Error::Unramified));
}

#[test]
fn epsilon_matches_oracle_and_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi = AdditiveCharacter::standard(2);
    for p in [2u64, 3, 5] {
        let psi = if p == 2 { psi } else { AdditiveCharacter::standard(p) };
        for c in 1..=3u32 {
            for _ in 0..10 {
                let Some(omega) = triple_local::verify::random_unitary(p, c, &mut rng) else { continue };
                let eps1 = epsilon_factor(1.0, &omega, &psi).unwrap();
                assert!((eps1.norm() - (p as f64).powf(-(c as f64) / 2.0)).abs() < 1e-12);
                let half = epsilon_factor(0.5, &omega, &psi).unwrap();
                assert!(((half * half.conj()).re - 1.0).abs() < 1e-12);
                assert!((half - epsilon_oracle(0.5, &omega)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn kronecker_components() {
    let c3 = kronecker_component(-3, 3).unwrap();
    assert_eq!(c3.conductor(), 1);
    assert!((c3.eval(&s(3, 2)).unwrap() + 1.0).norm() < 1e-15);

    let c4 = kronecker_component(-4, 2).unwrap();
    assert_eq!(c4.conductor(), 2);
    assert!((c4.eval(&s(2, 3)).unwrap() + 1.0).norm() < 1e-15);

    let c8 = kronecker_component(-8, 2).unwrap();
    assert_eq!(c8.conductor(), 3);
    for (u, want) in [(3, 1.0), (5, -1.0), (7, -1.0)] {
        assert!((c8.eval(&s(2, u)).unwrap() - want).norm() < 1e-15, "u = {u}");
    }

    assert_eq!(kronecker_component(-12, 2), Err(Error::NotFundamental(-12)));
}

fn arb_char() -> impl Strategy<Value = (u64, u32, u64)> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 0u32..4, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn psi_is_additive(p in prop::sample::select(vec![2u64, 3, 5, 7]), a in -5000i64..5000, b in -5000i64..5000, ea in -4i64..3, eb in -4i64..3) {
        let x = s(p, a).mul(&PadicScalar::uniformizer_pow(p, ea));
        let y = s(p, b).mul(&PadicScalar::uniformizer_pow(p, eb));
        if let Ok(sum) = x.add(&y) {
            let lhs = eval_psi(&sum).unwrap();
            let rhs = eval_psi(&x).unwrap().add(&eval_psi(&y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn characters_are_multiplicative((p, level, seed) in arb_char(), a in 1i64..100_000, b in 1i64..100_000, ea in -3i64..4, eb in -3i64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assume!(a % p as i64 != 0 && b % p as i64 != 0);
        let Some(omega) = triple_local::verify::random_unitary(p, level, &mut rng) else { return Ok(()) };
        let x = s(p, a).mul(&PadicScalar::uniformizer_pow(p, ea));
        let y = s(p, b).mul(&PadicScalar::uniformizer_pow(p, eb));
        let lhs = omega.eval(&x.mul(&y)).unwrap();
        let rhs = omega.eval(&x).unwrap() * omega.eval(&y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
