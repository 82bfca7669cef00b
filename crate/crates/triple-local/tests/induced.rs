use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triple_local::characters::{eval_psi, zeta, MultiplicativeCharacter, UnitChar};
use triple_local::induced::{eval_newform_induced, whittaker_point, InducedRepSpec, WhittakerEvaluator};
use triple_local::padic::{Mat2, PadicScalar};
use triple_local::verify::{random_unitary, random_unramified};

fn s(p: u64, n: i64) -> PadicScalar {
    PadicScalar::from_int(p, n)
}

fn unit_at(p: u64, v: i64, u: i64) -> PadicScalar {
    s(p, u).mul(&PadicScalar::uniformizer_pow(p, v))
}

fn principal(p: u64, m: u32, seed: u64) -> InducedRepSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi1 = random_unitary(p, m, &mut rng).unwrap();
    let chi2 = random_unramified(p, &mut rng);
    InducedRepSpec::principal(chi1, chi2).unwrap()
}

fn steinberg(p: u64, sign: f64) -> InducedRepSpec {
    InducedRepSpec::steinberg(MultiplicativeCharacter::unramified(p, Complex64::new(sign, 0.0))).unwrap()
}

#[test]
fn principal_newform_values() {
    let rep = principal(3, 2, 1);
    let InducedRepSpec::Principal { chi1, chi2 } = rep else { unreachable!() };
    let (a, d) = (unit_at(3, 1, 2), unit_at(3, -1, 4));
    let borel = Mat2::new(a, s(3, 5), PadicScalar::zero(3), d);
    let got = eval_newform_induced(&rep, &borel.mul(&Mat2::gamma(3, 0)).unwrap()).unwrap();
    let want = chi1.eval(&a).unwrap() * chi2.eval(&d).unwrap() * (a.abs() / d.abs()).sqrt();
    assert!((got - want).norm() < 1e-14);
    assert_eq!(eval_newform_induced(&rep, &borel.mul(&Mat2::gamma(3, 1)).unwrap()).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn steinberg_newform_at_identity() {
    for p in [2u64, 3, 5] {
        let v = eval_newform_induced(&steinberg(p, 1.0), &Mat2::identity(p)).unwrap();
        assert!((v + p as f64).norm() < 1e-14);
    }
}

#[test]
fn whittaker_closed_examples() {
    let rep = principal(2, 2, 5);
    let ev = WhittakerEvaluator::new(rep, false, 0);
    let w1 = ev.closed(&s(2, 1), 2).unwrap();
    assert!((w1.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!((ev.bruteforce(&s(2, 1), 2).unwrap() - w1).norm() < 1e-12);
    assert_eq!(ev.closed(&unit_at(2, -3, 1), 0).unwrap(), Complex64::new(0.0, 0.0));

    let st = WhittakerEvaluator::new(steinberg(3, -1.0), false, 2);
    let y = unit_at(3, -3, 2);
    let omega3 = MultiplicativeCharacter::unramified(3, Complex64::new(-1.0, 0.0));
    let want = -zeta(3.0, 2.0).powf(-0.5)
        * eval_psi(&y).unwrap().to_complex()
        * omega3.eval(&y.mul(&PadicScalar::uniformizer_pow(3, -2))).unwrap()
        * y.mul(&PadicScalar::uniformizer_pow(3, 3)).abs();
    assert!((st.closed(&y, 0).unwrap() - want).norm() < 1e-14);
}

#[test]
fn spherical_value_at_one() {
    for p in [2u64, 3] {
        let q = p as f64;
        let omega3 = MultiplicativeCharacter::unramified(p, Complex64::from_polar(q.powf(0.2), 0.7));
        let ev = WhittakerEvaluator::new(InducedRepSpec::spherical(omega3).unwrap(), false, 0);
        let want = zeta(q, 2.0).sqrt() / zeta(q, 1.0) / omega3.mul(&omega3).l_factor(1.0);
        assert!((ev.bruteforce(&s(p, 1), 0).unwrap() - want).norm() < 1e-12);
        assert!((ev.closed(&s(p, 1), 0).unwrap() - want).norm() < 1e-14);
    }
}

#[test]
fn spherical_rejects_modulus_outside_strip() {
    let omega3 = MultiplicativeCharacter::unramified(2, Complex64::new(2f64.sqrt(), 0.0));
    assert!(InducedRepSpec::spherical(omega3).is_err());
}

#[test]
fn principal_bruteforce_matches_closed_small_grid() {
    for seed in 0..3 {
        let rep = principal(3, 1, seed);
        for ev in [WhittakerEvaluator::new(rep, false, 0), WhittakerEvaluator::new(rep, false, 0).dual()] {
            for j in 0..=1 {
                for v in -3..=3 {
                    for u in [1, 2, 4, 5] {
                        let y = unit_at(3, v, u);
                        let a = ev.bruteforce(&y, j).unwrap();
                        let b = ev.closed(&y, j).unwrap();
                        assert!((a - b).norm() < 1e-10, "seed={seed} j={j} v={v} u={u}: {a} vs {b}");
                    }
                }
            }
        }
    }
}

#[test]
fn dual_is_conjugate_for_unitary_characters() {
    let rep = principal(5, 1, 9);
    let plain = WhittakerEvaluator::new(rep, false, 0);
    let dual = plain.dual();
    for j in 0..=1 {
        for v in -2..=2 {
            let y = unit_at(5, v, 3);
            assert!((dual.bruteforce(&y, j).unwrap() - plain.bruteforce(&y, j).unwrap().conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn interior_cells_supported_on_one_shell() {
    let rep = principal(2, 3, 11);
    let ev = WhittakerEvaluator::new(rep, false, 0);
    for j in 1..3u32 {
        for v in -5..=2i64 {
            let w = ev.bruteforce(&unit_at(2, v, 3), j).unwrap();
            if v != j as i64 - 3 {
                assert!(w.norm() < 1e-12, "j={j} v={v}: {w}");
            }
        }
    }
}

#[test]
fn left_unipotent_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let reps = [principal(3, 1, 2), steinberg(3, 1.0), steinberg(2, -1.0)];
    for rep in reps {
        for conj in [false, true] {
            let ev = WhittakerEvaluator::new(rep, conj, 1);
            for _ in 0..20 {
                let p = rep.prime();
                let u = rng.gen_range(1..50) * p as i64 + rng.gen_range(1..p as i64);
                let y = unit_at(p, rng.gen_range(-2..3), u);
                let j = rng.gen_range(0..=1);
                let x = unit_at(p, rng.gen_range(-2..2), rng.gen_range(1..50) * p as i64 + 1);
                let g = whittaker_point(&y, j, 1).unwrap();
                let moved = Mat2::n_of(x).mul(&g).unwrap();
                let psi = eval_psi(&x).unwrap();
                let psi = if conj { psi.neg() } else { psi }.to_complex();
                let lhs = ev.bruteforce_at(&moved).unwrap();
                let rhs = psi * ev.bruteforce_at(&g).unwrap();
                assert!((lhs - rhs).norm() < 1e-11, "{lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn unit_character_of_principal_is_ramified() {
    let InducedRepSpec::Principal { chi1, .. } = principal(2, 2, 4) else { unreachable!() };
    assert!(UnitChar::all_of_level(2, 2).contains(&chi1.unit));
}
