use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triple_local::characters::UnitChar;
use triple_local::kirillov::{sc_integral, EpsilonData, KirillovEngine, KirillovVector};
use triple_local::padic::{Mat2, PadicScalar};
use triple_local::verify::{fourier_levels, level_shift_cases};
use triple_local::{verify::VerifyConfig, Error};

fn s(p: u64, n: i64) -> PadicScalar {
    PadicScalar::from_int(p, n)
}

fn pw(p: u64, k: i64) -> PadicScalar {
    PadicScalar::uniformizer_pow(p, k)
}

fn engine(p: u64, c: u32, c1_negative: bool, seed: u64) -> KirillovEngine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KirillovEngine::new(EpsilonData::random(p, c, c1_negative, 4, &mut rng).unwrap(), false)
}

#[test]
fn borel_identity_and_shift() {
    let e = engine(3, 2, false, 1);
    let v = KirillovVector::newform(3);
    let same = e.act_borel(&v, &s(3, 1), &PadicScalar::zero(3), &s(3, 1)).unwrap();
    assert!(same.distance(&v) < 1e-15);
    let shifted = e.act_borel(&v, &pw(3, -2), &PadicScalar::zero(3), &s(3, 1)).unwrap();
    assert_eq!(shifted.shells(), vec![2]);
    assert!(shifted.distance(&KirillovVector::shell_indicator(3, 2)) < 1e-15);
}

#[test]
fn additive_twist_fourier_coefficient() {
    for p in [2u64, 3, 5] {
        let e = engine(p, 2, false, 2);
        let b = pw(p, -1);
        let v = e.act_borel(&KirillovVector::newform(p), &s(p, 1), &b, &s(p, 1)).unwrap();
        let got = v.coefficient(0, &UnitChar::trivial(p));
        assert!((got + 1.0 / (p as f64 - 1.0)).norm() < 1e-14, "p={p}: {got}");
    }
}

#[test]
fn w_on_newform() {
    for c1_negative in [false, true] {
        let e = engine(2, 3, c1_negative, 3);
        let v = e.act_w(&KirillovVector::newform(2)).unwrap();
        assert_eq!(v.shells(), vec![-3]);
        let c1 = if c1_negative { -1.0 } else { 1.0 };
        assert!(v.distance(&KirillovVector::shell_indicator(2, -3).scale(Complex64::new(c1, 0.0))) < 1e-15);
    }
}

#[test]
fn w_relocation_for_level_one_character() {
    let e = engine(3, 3, false, 4);
    let nu = UnitChar::all_of_level(3, 1)[0];
    let (r, nu2, _) = e.eps.w_on_basis(0, &nu).unwrap();
    assert_eq!(r, -3);
    assert_eq!(nu2, nu.inv());
}

#[test]
fn w_squared_is_identity_on_basis() {
    for p in [2u64, 3] {
        for c in 2..=3 {
            let e = engine(p, c, c == 3, 5);
            for nu in UnitChar::all_up_to(p, 3) {
                for r in -4..=4 {
                    let v = KirillovVector::basis(p, r, nu);
                    match e.act_w(&v) {
                        Ok(once) => assert!(e.act_w(&once).unwrap().distance(&v) < 1e-15),
                        Err(Error::ExceptionalKirillov { .. }) => assert!(p == 2 && c == 2 * nu.level()),
                        Err(other) => panic!("{other}"),
                    }
                }
            }
        }
    }
}

#[test]
fn exceptional_case_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let eps = EpsilonData::random(2, 4, false, 3, &mut rng).unwrap();
    let nu = UnitChar::all_of_level(2, 2)[0];
    assert!(matches!(eps.w_on_basis(0, &nu), Err(Error::ExceptionalKirillov { c: 4, level: 2 })));
}

#[test]
fn epsilon_data_rejects_inconsistent_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps = EpsilonData::random(3, 2, false, 2, &mut rng).unwrap();
    assert!(EpsilonData::new(3, 1, 2, Default::default()).is_err());
    let nu = UnitChar::all_of_level(3, 2)[0];
    assert!((eps.angle(&nu).unwrap().add(&eps.angle(&nu.inv()).unwrap())).is_zero());
}

#[test]
fn borel_action_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for p in [2u64, 3] {
        let e = engine(p, 2, false, 9);
        let v = KirillovVector::newform(p);
        for _ in 0..20 {
            let draw = |rng: &mut ChaCha8Rng| {
                let u = rng.gen_range(1..30) * p as i64 + 1;
                let a = s(p, u).mul(&pw(p, rng.gen_range(-1..2)));
                let b = s(p, rng.gen_range(1..30)).mul(&pw(p, rng.gen_range(-2..1)));
                Mat2::new(a, b, PadicScalar::zero(p), s(p, 1))
            };
            let (g, h) = (draw(&mut rng), draw(&mut rng));
            let gh = g.mul(&h).unwrap();
            let step = e.act_borel(&e.act_borel(&v, &h.a, &h.b, &h.d).unwrap(), &g.a, &g.b, &g.d).unwrap();
            let direct = e.act_borel(&v, &gh.a, &gh.b, &gh.d).unwrap();
            assert!(step.distance(&direct) < 1e-12);
        }
    }
}

#[test]
fn whittaker_vectors_have_stated_support() {
    for p in [2u64, 3] {
        for c in 2..=3u32 {
            let e = engine(p, c, false, 10);
            for l in 0..=1u32 {
                let far = e.whittaker_sc(l, c + l).unwrap();
                assert!(far.distance(&KirillovVector::shell_indicator(p, l as i64)) < 1e-14);
            }
            for j in 0..c {
                let v = e.whittaker_sc(0, j).unwrap();
                let shell = (2 * j as i64 - c as i64).min(0);
                assert_eq!(v.shells(), vec![shell], "p={p} c={c} j={j}");
                if shell < 0 {
                    assert_eq!(v.level_components(shell), BTreeSet::from([c - j]), "p={p} c={c} j={j}");
                }
            }
        }
    }
}

#[test]
fn whittaker_integrals() {
    for p in [2u64, 3] {
        for c in 2..=3u32 {
            for c1_negative in [false, true] {
                let e = engine(p, c, c1_negative, 11);
                let c1 = if c1_negative { -1.0 } else { 1.0 };
                let far = e.whittaker_sc(0, c).unwrap();
                assert!((sc_integral(&far, &s(p, 1)).unwrap() - 1.0).norm() < 1e-14);
                let new = e.whittaker_sc(0, 0).unwrap();
                assert!(sc_integral(&new, &PadicScalar::zero(p)).unwrap().norm() < 1e-14);
                assert!((sc_integral(&new, &s(p, -1)).unwrap() - c1).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn level_component_examples() {
    let e = engine(3, 2, false, 13);
    assert_eq!(KirillovVector::newform(3).level_components(0), BTreeSet::from([0]));
    let twisted = e.act_borel(&KirillovVector::newform(3), &s(3, 1), &pw(3, -2), &s(3, 1)).unwrap();
    assert!(twisted.level_components(0).is_subset(&BTreeSet::from([2])));
    let nu = UnitChar::all_of_level(3, 1)[0];
    let v = e.act_borel(&KirillovVector::basis(3, 0, nu), &s(3, 1), &pw(3, -1), &s(3, 1)).unwrap();
    assert!(v.level_components(0).is_subset(&BTreeSet::from([0, 1])));
}

#[test]
fn engine_levels_match_fourier_oracle() {
    let cases = level_shift_cases(&VerifyConfig::default());
    assert_eq!(cases.len(), 200);
    let e2 = engine(2, 2, false, 14);
    let e3 = engine(3, 2, false, 14);
    for (p, _n, e, chi, b) in cases.into_iter().take(60) {
        let engine = if p == 2 { &e2 } else { &e3 };
        let beta = s(p, b as i64).mul(&pw(p, e));
        let v = engine.act_borel(&KirillovVector::basis(p, 0, chi), &s(p, 1), &beta, &s(p, 1)).unwrap();
        assert_eq!(v.level_components(0), fourier_levels(&chi, e, b), "p={p} e={e} {chi:?}");
    }
}
