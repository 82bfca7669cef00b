//! The additive character ψ, characters of Q_p^× and epsilon factors.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::global::{is_fundamental, kronecker_symbol};
use crate::padic::{ord, pow, PadicError, PadicScalar};

/// A rational number modulo 1 standing for `e^{2πit}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalAngle(Ratio<i64>);

impl RationalAngle {
    pub fn new(num: i64, den: i64) -> Self {
        Self::from_ratio(Ratio::new(num, den))
    }

    pub fn from_ratio(t: Ratio<i64>) -> Self {
        let (n, d) = (*t.numer(), *t.denom());
        Self(Ratio::new(n.rem_euclid(d), d))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn value(&self) -> Ratio<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_ratio(self.0 + o.0)
    }

    pub fn neg(&self) -> Self {
        Self::from_ratio(-self.0)
    }

    pub fn scale(&self, k: i64) -> Self {
        let (n, d) = (*self.0.numer() as i128, *self.0.denom() as i128);
        let num = (n * k as i128).rem_euclid(d);
        Self(Ratio::new(num as i64, d as i64))
    }

    pub fn to_complex(&self) -> Complex64 {
        let t = *self.0.numer() as f64 / *self.0.denom() as f64;
        Complex64::from_polar(1.0, TAU * t)
    }
}

/// The standard unramified additive character, optionally conjugated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditiveCharacter {
    pub p: u64,
    pub conjugate: bool,
}

impl AdditiveCharacter {
    pub fn standard(p: u64) -> Self {
        Self { p, conjugate: false }
    }

    pub fn conjugated(&self) -> Self {
        Self { p: self.p, conjugate: !self.conjugate }
    }

    pub fn eval(&self, x: &PadicScalar) -> Result<RationalAngle> {
        let t = eval_psi(x)?;
        Ok(if self.conjugate { t.neg() } else { t })
    }
}

/// `ψ(x) = e^{2πi·{x}}` with `{x}` the principal part of `x`.
pub fn eval_psi(x: &PadicScalar) -> Result<RationalAngle> {
    let (num, den) = x.principal_part()?;
    Ok(RationalAngle::new(num as i64, den as i64))
}

/// Smallest primitive root modulo `p²` (hence modulo every `p^k`) for odd `p`.
pub fn primitive_root(p: u64) -> u64 {
    assert!(p > 2);
    let phi = p - 1;
    let factors: Vec<u64> = (2..=phi).filter(|d| phi.is_multiple_of(*d) && crate::padic::is_prime(*d)).collect();
    let pw = |b: u64, mut e: u64, m: u64| {
        let (mut r, mut b) = (1u128, b as u128 % m as u128);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % m as u128;
            }
            b = b * b % m as u128;
            e >>= 1;
        }
        r as u64
    };
    (2..p)
        .find(|&g| factors.iter().all(|f| pw(g, phi / f, p) != 1) && pw(g, phi, p * p) != 1)
        .expect("primitive root exists")
}

type DlogTable = Arc<Vec<(u32, u32)>>;

/// Discrete logarithms on `(Z/p^k)^×`: odd `p` against the primitive root,
/// `p = 2` as exponents of `(−1, 5)`.
fn dlog_table(p: u64, k: u32) -> DlogTable {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), DlogTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(p, k)) {
        return t.clone();
    }
    let modulus = pow(p, k);
    let mut table = vec![(u32::MAX, u32::MAX); modulus as usize];
    if p == 2 {
        if k <= 2 {
            for u in (1..modulus).step_by(2) {
                table[u as usize] = (((u % 4) == 3) as u32, 0);
            }
        } else {
            let mut five = 1u64;
            for e1 in 0..pow(2, k - 2) as u32 {
                table[five as usize] = (0, e1);
                table[((modulus - five) % modulus) as usize] = (1, e1);
                five = five * 5 % modulus;
            }
        }
    } else {
        let g = primitive_root(p);
        let mut x = 1u64;
        for e in 0..(modulus / p * (p - 1)) as u32 {
            table[x as usize] = (0, e);
            x = ((x as u128 * g as u128) % modulus as u128) as u64;
        }
    }
    let t = Arc::new(table);
    cache.lock().unwrap().insert((p, k), t.clone());
    t
}

/// Character of `Z_p^×`, stored by its angles on the fixed generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitChar {
    p: u64,
    main: RationalAngle,
    sign: RationalAngle,
}

impl UnitChar {
    pub fn trivial(p: u64) -> Self {
        Self { p, main: RationalAngle::zero(), sign: RationalAngle::zero() }
    }

    /// Odd `p`: angle at the primitive root. `p = 2`: angles at `−1` and `5`.
    pub fn from_angles(p: u64, main: RationalAngle, sign: RationalAngle) -> Result<Self> {
        let ok_den = |t: &RationalAngle, allowed: u64| {
            let mut d = *t.value().denom() as u64;
            while d.is_multiple_of(p) {
                d /= p;
            }
            allowed.is_multiple_of(d)
        };
        let valid =
            if p == 2 { sign.scale(2).is_zero() && ok_den(&main, 1) } else { sign.is_zero() && ok_den(&main, p - 1) };
        if !valid {
            return Err(Error::InvalidInput(format!("angles {main:?}, {sign:?} do not define a character mod {p}^k")));
        }
        Ok(Self { p, main, sign })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn main_angle(&self) -> RationalAngle {
        self.main
    }

    pub fn sign_angle(&self) -> RationalAngle {
        self.sign
    }

    /// Conductor exponent of the character on `Z_p^×`.
    pub fn level(&self) -> u32 {
        let p = self.p as i64;
        let den = *self.main.value().denom();
        if self.p == 2 {
            if self.main.is_zero() {
                return if self.sign.is_zero() { 0 } else { 2 };
            }
            return 2 + ord(2, den as i128);
        }
        if self.main.is_zero() {
            return 0;
        }
        let mut k = 1;
        while ((p - 1) * p.pow(k - 1)) % den != 0 {
            k += 1;
        }
        k
    }

    pub fn is_trivial(&self) -> bool {
        self.main.is_zero() && self.sign.is_zero()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p);
        Self { p: self.p, main: self.main.add(&o.main), sign: self.sign.add(&o.sign) }
    }

    pub fn inv(&self) -> Self {
        Self { p: self.p, main: self.main.neg(), sign: self.sign.neg() }
    }

    pub fn pow(&self, k: i64) -> Self {
        Self { p: self.p, main: self.main.scale(k), sign: self.sign.scale(k) }
    }

    /// Angle at the unit whose residue modulo `p^k` is `u`, for any `k ≥ level`.
    pub fn angle_of_residue(&self, u: u64) -> RationalAngle {
        let level = self.level();
        if level == 0 {
            return RationalAngle::zero();
        }
        let r = u % pow(self.p, level);
        let (e0, e1) = dlog_table(self.p, level)[r as usize];
        debug_assert!(e0 != u32::MAX, "residue {u} is not a unit mod {}", self.p);
        self.sign.scale(e0 as i64).add(&self.main.scale(e1 as i64))
    }

    /// Angle at the unit part of `x`.
    pub fn angle(&self, x: &PadicScalar) -> Result<RationalAngle> {
        let level = self.level();
        if level == 0 {
            return Ok(RationalAngle::zero());
        }
        Ok(self.angle_of_residue(x.unit_residue(level)?))
    }

    /// Every character of `Z_p^×` with level at most `bound`.
    pub fn all_up_to(p: u64, bound: u32) -> Vec<Self> {
        if p == 2 {
            if bound < 2 {
                return vec![Self::trivial(2)];
            }
            let steps = if bound >= 3 { pow(2, bound - 2) as i64 } else { 1 };
            let mut out = Vec::new();
            for s in 0..2 {
                for t in 0..steps {
                    out.push(Self { p, main: RationalAngle::new(t, steps), sign: RationalAngle::new(s, 2) });
                }
            }
            return out;
        }
        if bound == 0 {
            return vec![Self::trivial(p)];
        }
        let order = ((p - 1) * pow(p, bound - 1)) as i64;
        (0..order).map(|t| Self { p, main: RationalAngle::new(t, order), sign: RationalAngle::zero() }).collect()
    }

    /// Characters of level exactly `level`.
    pub fn all_of_level(p: u64, level: u32) -> Vec<Self> {
        Self::all_up_to(p, level).into_iter().filter(|c| c.level() == level).collect()
    }

    pub fn random_of_level<R: Rng>(p: u64, level: u32, rng: &mut R) -> Option<Self> {
        let all = Self::all_of_level(p, level);
        if all.is_empty() {
            None
        } else {
            Some(all[rng.gen_range(0..all.len())])
        }
    }
}

/// Character of Q_p^×: a unit character together with the value at `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplicativeCharacter {
    pub unit: UnitChar,
    pub z: Complex64,
}

impl MultiplicativeCharacter {
    pub fn new(unit: UnitChar, z: Complex64) -> Self {
        Self { unit, z }
    }

    /// Unit character extended by `χ(p) = 1`.
    pub fn from_unit(unit: UnitChar) -> Self {
        Self { unit, z: Complex64::new(1.0, 0.0) }
    }

    pub fn unramified(p: u64, z: Complex64) -> Self {
        Self { unit: UnitChar::trivial(p), z }
    }

    pub fn trivial(p: u64) -> Self {
        Self::unramified(p, Complex64::new(1.0, 0.0))
    }

    pub fn prime(&self) -> u64 {
        self.unit.prime()
    }

    pub fn conductor(&self) -> u32 {
        self.unit.level()
    }

    pub fn is_unitary(&self) -> bool {
        (self.z.norm() - 1.0).abs() < 1e-12
    }

    pub fn eval(&self, x: &PadicScalar) -> Result<Complex64> {
        let v = x.val().ok_or(PadicError::DivisionByZero)?;
        Ok(self.z.powi(v as i32) * self.unit.angle(x)?.to_complex())
    }

    /// Value at `p^v · u` with `u` given by its residue.
    pub fn eval_parts(&self, v: i64, u: u64) -> Complex64 {
        self.z.powi(v as i32) * self.unit.angle_of_residue(u).to_complex()
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { unit: self.unit.mul(&o.unit), z: self.z * o.z }
    }

    pub fn inv(&self) -> Self {
        Self { unit: self.unit.inv(), z: self.z.inv() }
    }

    /// `L(s, χ)`, equal to 1 for ramified `χ`.
    pub fn l_factor(&self, s: f64) -> Complex64 {
        if self.conductor() > 0 {
            return Complex64::new(1.0, 0.0);
        }
        let q = self.prime() as f64;
        (Complex64::new(1.0, 0.0) - self.z * q.powf(-s)).inv()
    }
}

/// `ζ(s) = (1 − q^{-s})^{-1}`.
pub fn zeta(q: f64, s: f64) -> f64 {
    1.0 / (1.0 - q.powf(-s))
}

/// `ε(s, ω, ψ) = ∫_{p^{-c}Z_p^×} ω^{-1}(x)ψ(x)|x|^{-s} dx` for ramified `ω`.
pub fn epsilon_factor(s: f64, omega: &MultiplicativeCharacter, psi: &AdditiveCharacter) -> Result<Complex64> {
    let c = omega.conductor();
    if c == 0 {
        return Err(Error::Unramified);
    }
    let p = omega.prime();
    let modulus = pow(p, c);
    let mut sum = Complex64::new(0.0, 0.0);
    for u in (1..modulus).filter(|u| u % p != 0) {
        let psi_angle = RationalAngle::new(u as i64, modulus as i64);
        let psi_angle = if psi.conjugate { psi_angle.neg() } else { psi_angle };
        sum += omega.unit.angle_of_residue(u).neg().add(&psi_angle).to_complex();
    }
    let q = p as f64;
    Ok(sum * omega.z.powi(c as i32) * q.powf(-(c as f64) * s))
}

/// Local component at `p` of the quadratic character `n ↦ (D/n)`.
pub fn kronecker_component(d: i64, p: u64) -> Result<MultiplicativeCharacter> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if d % p as i64 != 0 {
        return Err(Error::InvalidInput(format!("{p} does not divide {d}")));
    }
    let k = ord(p, d as i128);
    let pk = pow(p, k) as i64;
    let rest = d.abs() / pk;
    let value_at = |r: i64| -> i64 {
        let mut n = r;
        while n % rest != 1 % rest {
            n += pk;
        }
        kronecker_symbol(d, n)
    };
    let half = |x: i64| RationalAngle::new(if x == -1 { 1 } else { 0 }, 2);
    let unit = if p == 2 {
        let sign = half(value_at(pk - 1));
        let main = if k >= 3 { half(value_at(5)) } else { RationalAngle::zero() };
        UnitChar::from_angles(2, main, sign)?
    } else {
        let g = primitive_root(p) as i64;
        UnitChar::from_angles(p, half(value_at(g)), RationalAngle::zero())?
    };
    Ok(MultiplicativeCharacter::from_unit(unit))
}

impl Serialize for RationalAngle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}
