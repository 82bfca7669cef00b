use proptest::prelude::*;
use triple_local::padic::{decompose_corner, max_precision, Mat2, PadicError, PadicScalar};

fn s(p: u64, n: i64) -> PadicScalar {
    PadicScalar::from_int(p, n)
}

/// Agreement on every digit both operands know.
fn close(x: &PadicScalar, y: &PadicScalar) -> bool {
    match (x.val(), y.val()) {
        (None, None) => true,
        (Some(vx), Some(vy)) => {
            let k = x.precision().min(y.precision());
            vx == vy && x.unit_residue(k).unwrap() == y.unit_residue(k).unwrap()
        }
        (Some(v), None) | (None, Some(v)) => {
            let known = if x.is_zero() { y.precision() } else { x.precision() };
            v >= known as i64
        }
    }
}

fn mat_close(a: &Mat2, b: &Mat2) -> bool {
    close(&a.a, &b.a) && close(&a.b, &b.b) && close(&a.c, &b.c) && close(&a.d, &b.d)
}

#[test]
fn valuation_examples() {
    assert_eq!(s(2, 12).val(), Some(2));
    assert_eq!(s(5, 1).val(), Some(0));
    assert_eq!(PadicScalar::from_ratio(3, 1, 3).unwrap().val(), Some(-1));
    assert_eq!(PadicScalar::zero(3).val(), None);
}

#[test]
fn field_operation_examples() {
    let third = PadicScalar::from_ratio(3, 1, 3).unwrap();
    let prod = third.mul(&s(3, 3));
    assert_eq!(prod.val(), Some(0));
    assert_eq!(prod.unit_residue(max_precision(3)).unwrap(), 1);

    assert_eq!(s(2, 1).add(&s(2, 1)).unwrap().val(), Some(1));

    let inv = s(5, 2).inv().unwrap();
    assert_eq!(inv.val(), Some(0));
    assert_eq!(inv.unit_residue(1).unwrap(), 3);
    assert_eq!(inv.mul(&s(5, 2)).unit_residue(max_precision(5)).unwrap(), 1);

    assert_eq!(PadicScalar::zero(7).inv(), Err(PadicError::DivisionByZero));
}

#[test]
fn exact_cancellation_is_zero() {
    let x = PadicScalar::from_ratio(3, 7, 9).unwrap();
    assert!(x.sub(&x).unwrap().is_zero());
}

#[test]
fn decompose_identity_and_unit_corner() {
    let id = Mat2::identity(3);
    let dec = decompose_corner(&id, 2).unwrap();
    assert_eq!(dec.j, 2);
    assert!(dec.k.in_k1(2).unwrap());
    assert!(mat_close(&dec.borel(), &id));

    let g = Mat2::lower(s(3, 1));
    assert_eq!(decompose_corner(&g, 2).unwrap().j, 0);
}

#[test]
fn decompose_big_cell_matches_diagonal_form() {
    // g = w n(x) a(y) γ_0 with v(x + y) ≤ min(−m, v(y)): Borel part diag(y/(x+y), x+y).
    let p = 3;
    let m = 2;
    let x = PadicScalar::from_ratio(p, 5, 27).unwrap();
    let y = s(p, 2);
    let g = Mat2::w(p).mul(&Mat2::n_of(x)).unwrap().mul(&Mat2::a_of(y)).unwrap().mul(&Mat2::gamma(p, 0)).unwrap();
    let dec = decompose_corner(&g, m).unwrap();
    assert_eq!(dec.j, 0);
    let xy = x.add(&y).unwrap();
    assert!(close(&dec.a, &y.div(&xy).unwrap()));
    assert!(close(&dec.d, &xy));
}

fn arb_matrix() -> impl Strategy<Value = (u64, [i64; 4], [i64; 4])> {
    (prop::sample::select(vec![2u64, 3, 5]), prop::array::uniform4(-500i64..500), prop::array::uniform4(-2i64..3))
}

fn build(p: u64, ints: [i64; 4], shifts: [i64; 4]) -> Mat2 {
    let e = |i: usize| s(p, ints[i]).mul(&PadicScalar::uniformizer_pow(p, shifts[i]));
    Mat2::new(e(0), e(1), e(2), e(3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decomposition_round_trips((p, ints, shifts) in arb_matrix(), m in 0u32..4) {
        let g = build(p, ints, shifts);
        let det = g.det();
        prop_assume!(matches!(det, Ok(ref d) if !d.is_zero()));
        let dec = decompose_corner(&g, m).unwrap();
        prop_assert!(dec.j <= m);
        prop_assert!(dec.k.in_k1(m).unwrap());
        let back = dec.borel().mul(&Mat2::gamma(p, dec.j as i64)).unwrap().mul(&dec.k).unwrap();
        prop_assert!(mat_close(&back, &g), "{:?} vs {:?}", back, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cell_index_is_right_k1_invariant((p, ints, shifts) in arb_matrix(), m in 0u32..4, seed in any::<u64>()) {
        use rand::SeedableRng;
        let g = build(p, ints, shifts);
        prop_assume!(matches!(g.det(), Ok(ref d) if !d.is_zero()));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = triple_local::haar::random_k1(p, m, &mut rng);
        let j0 = decompose_corner(&g, m).unwrap().j;
        let j1 = decompose_corner(&g.mul(&k).unwrap(), m).unwrap().j;
        prop_assert_eq!(j0, j1);
    }

    #[test]
    fn valuations_combine(p in prop::sample::select(vec![2u64, 3, 5, 7]), a in -10_000i64..10_000, b in -10_000i64..10_000, ea in -3i64..4, eb in -3i64..4) {
        prop_assume!(a != 0 && b != 0);
        let x = s(p, a).mul(&PadicScalar::uniformizer_pow(p, ea));
        let y = s(p, b).mul(&PadicScalar::uniformizer_pow(p, eb));
        prop_assert_eq!(x.mul(&y).val().unwrap(), x.val().unwrap() + y.val().unwrap());
        match x.add(&y) {
            Ok(sum) => {
                let lo = x.val().unwrap().min(y.val().unwrap());
                prop_assert!(sum.val().is_none_or(|v| v >= lo));
                if x.val() != y.val() {
                    prop_assert_eq!(sum.val(), Some(lo));
                }
            }
            Err(e) => {
                let underflow = matches!(e, PadicError::PrecisionUnderflow { .. });
                prop_assert!(underflow);
            }
        }
    }

    #[test]
    fn inverse_is_inverse(p in prop::sample::select(vec![2u64, 3, 5, 7]), a in 1i64..100_000, e in -4i64..5) {
        let x = s(p, a).mul(&PadicScalar::uniformizer_pow(p, e));
        let one = x.mul(&x.inv().unwrap());
        prop_assert_eq!(one.val(), Some(0));
        prop_assert_eq!(one.unit_residue(one.precision()).unwrap(), 1);
    }
}
