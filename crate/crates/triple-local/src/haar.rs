//! Haar measures on Q_p, Q_p^× and K = GL(2, Z_p), realized as exact finite sums.
//!
//! Additive measure gives `Z_p` volume 1; multiplicative measure gives every
//! shell `p^r Z_p^×` volume 1; the measure on `K` has total mass 1.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{pow, Mat2, PadicScalar};

/// Units modulo `p^n` in increasing order.
pub fn units_mod(p: u64, n: u32) -> impl Iterator<Item = u64> {
    (1..pow(p, n).max(2)).filter(move |u| u % p != 0)
}

/// Sum in `Q(ζ_n)`, `n = p^k`, kept in the power basis `1, ζ, …, ζ^{φ(n)−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CycloSum {
    p: u64,
    n: u64,
    coeffs: Vec<Ratio<i64>>,
}

impl CycloSum {
    pub fn new(p: u64, k: u32) -> Self {
        let n = pow(p, k);
        Self { p, n, coeffs: vec![Ratio::zero(); n as usize] }
    }

    /// Adds `w · ζ_n^e`.
    pub fn add_term(&mut self, e: u64, w: Ratio<i64>) {
        self.coeffs[(e % self.n) as usize] += w;
    }

    /// Rewrites `ζ^e` with `e ≥ (p−1)n/p` using `Σ_{i<p} ζ^{e0 + i n/p} = 0`.
    pub fn reduce(&mut self) {
        if self.n == 1 {
            return;
        }
        let step = self.n / self.p;
        for e in (self.p - 1) * step..self.n {
            let w = std::mem::replace(&mut self.coeffs[e as usize], Ratio::zero());
            if w.is_zero() {
                continue;
            }
            let e0 = e - (self.p - 1) * step;
            for i in 0..self.p - 1 {
                self.coeffs[(e0 + i * step) as usize] -= w;
            }
        }
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<Ratio<i64>> {
        let mut s = self.clone();
        s.reduce();
        s.coeffs[1..].iter().all(|c| c.is_zero()).then(|| s.coeffs[0])
    }
}

/// `∫_{p^m Z_p^×} ψ(x) dx` computed exactly in the cyclotomic field.
pub fn psi_shell_integral_exact(p: u64, m: i64) -> Ratio<i64> {
    let depth = if m < 0 { (-m) as u32 } else { 0 };
    let mut sum = CycloSum::new(p, depth);
    let q = p as i64;
    let vol = if m >= 0 { Ratio::new(1, q.pow(m as u32) * q.pow(1)) } else { Ratio::from_integer(1) };
    if m >= 0 {
        for _ in units_mod(p, 1) {
            sum.add_term(0, vol);
        }
    } else {
        for u in units_mod(p, depth) {
            sum.add_term(u, vol);
        }
    }
    sum.as_rational().expect("shell integral of ψ is rational")
}

/// Function on the shell `p^r Z_p^×`, tabulated on units modulo `p^depth`.
#[derive(Clone, Debug)]
pub struct ShellFunction {
    pub p: u64,
    pub r: i64,
    pub depth: u32,
    pub values: Vec<Complex64>,
}

impl ShellFunction {
    pub fn from_fn(p: u64, r: i64, depth: u32, f: impl Fn(&PadicScalar) -> Complex64) -> Self {
        let prec = crate::padic::max_precision(p);
        let values = units_mod(p, depth).map(|u| f(&PadicScalar::from_parts(p, r, u as i128, prec))).collect();
        Self { p, r, depth, values }
    }

    pub fn try_from_fn(p: u64, r: i64, depth: u32, f: impl Fn(&PadicScalar) -> Result<Complex64>) -> Result<Self> {
        let prec = crate::padic::max_precision(p);
        let values =
            units_mod(p, depth).map(|u| f(&PadicScalar::from_parts(p, r, u as i128, prec))).collect::<Result<_>>()?;
        Ok(Self { p, r, depth, values })
    }

    /// `∫ f dx` with each class `p^r(u + p^N Z_p)` of volume `q^{-r-N}`.
    pub fn integrate_additive(&self) -> Complex64 {
        let q = self.p as f64;
        pairwise_sum(&self.values) * q.powi(-(self.r as i32) - self.depth as i32)
    }

    /// `∫ f d^×x`, the average over classes.
    pub fn integrate_mult(&self) -> Complex64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn refined<F>(p: u64, r: i64, depth: u32, f: &F, mult: bool) -> Result<Complex64>
where
    F: Fn(&PadicScalar) -> Result<Complex64>,
{
    let coarse = ShellFunction::try_from_fn(p, r, depth, f)?;
    let fine = ShellFunction::try_from_fn(p, r, depth + 1, f)?;
    let (a, b) = if mult {
        (coarse.integrate_mult(), fine.integrate_mult())
    } else {
        (coarse.integrate_additive(), fine.integrate_additive())
    };
    if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
        return Err(Error::DepthInsufficient(depth));
    }
    Ok(a)
}

/// Additive shell integral, rejected if refining the depth changes it.
pub fn integrate_additive<F>(p: u64, r: i64, depth: u32, f: F) -> Result<Complex64>
where
    F: Fn(&PadicScalar) -> Result<Complex64>,
{
    refined(p, r, depth, &f, false)
}

/// Multiplicative shell integral, rejected if refining the depth changes it.
pub fn integrate_mult<F>(p: u64, r: i64, depth: u32, f: F) -> Result<Complex64>
where
    F: Fn(&PadicScalar) -> Result<Complex64>,
{
    refined(p, r, depth, &f, true)
}

/// Coset weights `A_0, …, A_m` of `K1(p^m)\K` against `γ_j`, as exact rationals.
pub fn k_weights_exact(p: u64, m: u32) -> Vec<Ratio<i128>> {
    if m == 0 {
        return vec![Ratio::from_integer(1)];
    }
    let q = p as i128;
    let base = Ratio::new(q, q + 1);
    (0..=m)
        .map(|j| {
            let qj = Ratio::new(1, q.pow(j));
            if j == 0 {
                base
            } else if j < m {
                base * qj * Ratio::new(q - 1, q)
            } else {
                base * qj
            }
        })
        .collect()
}

pub fn k_weights(p: u64, m: u32) -> Vec<f64> {
    k_weights_exact(p, m).iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
}

/// Random element of `K1(p^m)` with small integer entries.
pub fn random_k1<R: Rng>(p: u64, m: u32, rng: &mut R) -> Mat2 {
    let bound = pow(p, 6) as i64;
    loop {
        let unit = |rng: &mut R| loop {
            let u = rng.gen_range(1..bound);
            if u % p as i64 != 0 {
                break u;
            }
        };
        let a = unit(rng);
        let b = rng.gen_range(0..bound);
        let c = rng.gen_range(0..bound) * pow(p, m) as i64;
        let d = 1 + rng.gen_range(0..bound) * pow(p, m) as i64;
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det % p as i128 != 0 {
            let s = |x: i64| PadicScalar::from_int(p, x);
            return Mat2::new(s(a), s(b), s(c), s(d));
        }
    }
}

/// `∫_K f(g k) dk` for right `K1(p^m)`-invariant `f`, checked on 8 random `k`.
pub fn integrate_k<F, R>(p: u64, m: u32, g: &Mat2, f: F, rng: &mut R) -> Result<Complex64>
where
    F: Fn(&Mat2) -> Result<Complex64>,
    R: Rng,
{
    let weights = k_weights(p, m);
    let mut total = Complex64::zero();
    for (j, w) in weights.iter().enumerate() {
        let h = g.mul(&Mat2::gamma(p, j as i64))?;
        let value = f(&h)?;
        for _ in 0..8 {
            let k = random_k1(p, m, rng);
            let moved = f(&h.mul(&k)?)?;
            if (moved - value).norm() > 1e-12 * (1.0 + value.norm()) {
                return Err(Error::NotInvariant(format!("cell j = {j}: {value} vs {moved}")));
            }
        }
        total += value * *w;
    }
    Ok(total)
}
