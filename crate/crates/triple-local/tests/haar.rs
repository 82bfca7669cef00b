use num_complex::Complex64;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triple_local::characters::eval_psi;
use triple_local::haar::{
    integrate_additive, integrate_k, integrate_mult, k_weights, k_weights_exact, psi_shell_integral_exact, units_mod,
    ShellFunction,
};
use triple_local::padic::{pow, Mat2};
use triple_local::Error;

/// `∫_{p^m Z_p^×} ψ dx` by summing `e^{2πi u/p^N}` over residues at depth `N = max(−m, 0) + 2`.
fn shell_oracle(p: u64, m: i64) -> Complex64 {
    let depth = (-m).max(0) as u32 + 2;
    let modulus = pow(p, depth);
    let vol = (p as f64).powi(-(m as i32) - depth as i32);
    let mut total = Complex64::new(0.0, 0.0);
    for u in (1..modulus).filter(|u| u % p != 0) {
        let frac = if m >= 0 { 0.0 } else { (u % pow(p, (-m) as u32)) as f64 / pow(p, (-m) as u32) as f64 };
        total += Complex64::from_polar(vol, std::f64::consts::TAU * frac);
    }
    total
}

#[test]
fn psi_shell_integrals_match_oracle() {
    for p in [2u64, 3, 5, 7] {
        for m in -4..=4i64 {
            let exact = psi_shell_integral_exact(p, m);
            let got = *exact.numer() as f64 / *exact.denom() as f64;
            assert!((shell_oracle(p, m) - got).norm() < 1e-12, "p={p} m={m}");
        }
    }
}

#[test]
fn additive_examples() {
    for p in [2u64, 3, 5] {
        let q = p as f64;
        let one = integrate_additive(p, 0, 1, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((one - (1.0 - 1.0 / q)).norm() < 1e-14);
        let psi = |x: &_| Ok(eval_psi(x)?.to_complex());
        assert!((integrate_additive(p, -1, 1, psi).unwrap() + 1.0).norm() < 1e-14);
        assert!(integrate_additive(p, -2, 2, psi).unwrap().norm() < 1e-14);
        assert_eq!(psi_shell_integral_exact(p, -1), Ratio::from_integer(-1));
    }
}

#[test]
fn multiplicative_examples() {
    let one = |_: &_| Ok(Complex64::new(1.0, 0.0));
    for r in -3..=3 {
        assert!((integrate_mult(5, r, 2, one).unwrap() - 1.0).norm() < 1e-14);
    }
    let psi = |x: &_| Ok(eval_psi(x)?.to_complex());
    assert!((integrate_mult(7, 0, 1, psi).unwrap() - 1.0).norm() < 1e-14);
    assert!((integrate_mult(3, -1, 1, psi).unwrap() + 0.5).norm() < 1e-14);
}

#[test]
fn refinement_detects_insufficient_depth() {
    let psi = |x: &_| Ok(eval_psi(x)?.to_complex());
    assert!(matches!(integrate_additive(3, -3, 1, psi), Err(Error::DepthInsufficient(1))));
    let table = ShellFunction::from_fn(3, -3, 3, |x| eval_psi(x).unwrap().to_complex());
    assert_eq!(table.values.len(), units_mod(3, 3).count());
    assert!(table.integrate_additive().norm() < 1e-12);
}

#[test]
fn k_weight_examples() {
    assert_eq!(k_weights_exact(2, 2), vec![Ratio::new(2, 3), Ratio::new(1, 6), Ratio::new(1, 6)]);
    assert_eq!(k_weights_exact(5, 0), vec![Ratio::from_integer(1)]);
    for p in [2u64, 3, 5, 7] {
        for m in 0..=6 {
            let total: Ratio<i128> = k_weights_exact(p, m).into_iter().sum();
            assert_eq!(total, Ratio::from_integer(1), "p={p} m={m}");
        }
    }
}

#[test]
fn k_integral_of_constant_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Mat2::identity(3);
    let v = integrate_k(3, 2, &g, |_| Ok(Complex64::new(1.0, 0.0)), &mut rng).unwrap();
    assert!((v - 1.0).norm() < 1e-14);
    assert!((k_weights(3, 2).iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn k_integral_rejects_non_invariant_integrand() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = Mat2::identity(3);
    let f = |h: &Mat2| Ok(Complex64::new(h.b.unit_residue(2).map(|u| u as f64).unwrap_or(0.0), 0.0));
    assert!(matches!(integrate_k(3, 1, &g, f, &mut rng), Err(Error::NotInvariant(_))));
}
