//! Kirillov model of a supercuspidal representation with trivial central character.
//!
//! Vectors are finite sums of basis functions `e_{r,ν}(x) = ν(x p^{-r}) 1_{v(x) = r}`,
//! with unit characters extended by `ν(p) = 1`. The Borel subgroup acts by
//! shell shifts and `ψ`-twists re-expanded through Gauss sums; `w` acts through
//! the constants `C_ν` of an [`EpsilonData`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;

use crate::characters::{epsilon_factor, zeta, AdditiveCharacter, MultiplicativeCharacter, RationalAngle, UnitChar};
use crate::error::{Error, Result};
use crate::haar::ShellFunction;
use crate::padic::{Mat2, PadicError, PadicScalar};

/// Coefficients below this modulus are dropped after cancellation.
pub const COEFF_EPS: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct KirillovVector {
    p: u64,
    shells: BTreeMap<i64, BTreeMap<UnitChar, Complex64>>,
}

impl KirillovVector {
    pub fn zero(p: u64) -> Self {
        Self { p, shells: BTreeMap::new() }
    }

    pub fn basis(p: u64, r: i64, nu: UnitChar) -> Self {
        let mut v = Self::zero(p);
        v.add_term(r, nu, Complex64::new(1.0, 0.0));
        v
    }

    /// `1_{p^r Z_p^×}`.
    pub fn shell_indicator(p: u64, r: i64) -> Self {
        Self::basis(p, r, UnitChar::trivial(p))
    }

    /// The new vector `1_{Z_p^×}`.
    pub fn newform(p: u64) -> Self {
        Self::shell_indicator(p, 0)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn add_term(&mut self, r: i64, nu: UnitChar, a: Complex64) {
        *self.shells.entry(r).or_default().entry(nu).or_insert(Complex64::new(0.0, 0.0)) += a;
    }

    fn pruned(mut self) -> Self {
        for shell in self.shells.values_mut() {
            shell.retain(|_, a| a.norm() > COEFF_EPS);
        }
        self.shells.retain(|_, s| !s.is_empty());
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &UnitChar, &Complex64)> {
        self.shells.iter().flat_map(|(r, s)| s.iter().map(move |(nu, a)| (*r, nu, a)))
    }

    pub fn shells(&self) -> Vec<i64> {
        self.shells.keys().copied().collect()
    }

    pub fn coefficient(&self, r: i64, nu: &UnitChar) -> Complex64 {
        self.shells.get(&r).and_then(|s| s.get(nu)).copied().unwrap_or_default()
    }

    /// Largest level appearing on shell `r`.
    pub fn max_level(&self, r: i64) -> u32 {
        self.shells.get(&r).map_or(0, |s| s.keys().map(|nu| nu.level()).max().unwrap_or(0))
    }

    /// Levels of the characters with nonzero coefficient on shell `r`.
    pub fn level_components(&self, r: i64) -> BTreeSet<u32> {
        self.shells
            .get(&r)
            .map(|s| s.iter().filter(|(_, a)| a.norm() > 1e-9).map(|(nu, _)| nu.level()).collect())
            .unwrap_or_default()
    }

    pub fn eval(&self, x: &PadicScalar) -> Result<Complex64> {
        let Some(v) = x.val() else { return Ok(Complex64::new(0.0, 0.0)) };
        let Some(shell) = self.shells.get(&v) else { return Ok(Complex64::new(0.0, 0.0)) };
        let mut total = Complex64::new(0.0, 0.0);
        for (nu, a) in shell {
            total += a * nu.angle(x)?.to_complex();
        }
        Ok(total)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = self.clone();
        for shell in out.shells.values_mut() {
            for a in shell.values_mut() {
                *a *= k;
            }
        }
        out
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut keys: BTreeSet<(i64, UnitChar)> = self.terms().map(|(r, nu, _)| (r, *nu)).collect();
        keys.extend(other.terms().map(|(r, nu, _)| (r, *nu)));
        keys.iter().map(|(r, nu)| (self.coefficient(*r, nu) - other.coefficient(*r, nu)).norm()).fold(0.0, f64::max)
    }
}

/// `∫_{Z_p^×} μ(u) ψ(b u) d^×u` for `b = p^e · unit`.
pub fn gauss_coefficient(mu: &UnitChar, e: i64, b_unit: &PadicScalar) -> Result<Complex64> {
    let p = mu.prime();
    let q = p as f64;
    let level = mu.level() as i64;
    if level == 0 {
        return Ok(match e {
            e if e >= 0 => Complex64::new(1.0, 0.0),
            -1 => Complex64::new(-1.0 / (q - 1.0), 0.0),
            _ => Complex64::new(0.0, 0.0),
        });
    }
    if e != -level {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let eps = cached_epsilon(mu)?;
    Ok(zeta(q, 1.0) * mu.angle(b_unit)?.neg().to_complex() * eps)
}

/// `ε(1, μ^{-1}, ψ)` with `μ(p) = 1`, memoized.
fn cached_epsilon(mu: &UnitChar) -> Result<Complex64> {
    static CACHE: OnceLock<Mutex<HashMap<UnitChar, Complex64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(mu) {
        return Ok(*v);
    }
    let chi = MultiplicativeCharacter::from_unit(mu.inv());
    let v = epsilon_factor(1.0, &chi, &AdditiveCharacter::standard(mu.prime()))?;
    cache.lock().unwrap().insert(*mu, v);
    Ok(v)
}

/// Constants `C_ν` of the `w`-action for characters up to a level bound.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonData {
    p: u64,
    c: u32,
    level_bound: u32,
    angles: BTreeMap<UnitChar, RationalAngle>,
}

impl EpsilonData {
    /// Validates `C_ν C_{ν^{-1}} = 1` for every stored pair and `C_1 = ±1`.
    pub fn new(p: u64, c: u32, level_bound: u32, angles: BTreeMap<UnitChar, RationalAngle>) -> Result<Self> {
        if c < 2 {
            return Err(Error::InvalidInput(format!("supercuspidal conductor must be at least 2, got {c}")));
        }
        for nu in UnitChar::all_up_to(p, level_bound) {
            let a = angles.get(&nu).ok_or(Error::MissingEpsilon(nu.level()))?;
            let b = angles.get(&nu.inv()).ok_or(Error::MissingEpsilon(nu.level()))?;
            if !a.add(b).is_zero() {
                return Err(Error::InvalidInput(format!("C_ν C_ν⁻¹ ≠ 1 at {nu:?}")));
            }
        }
        let one = angles.get(&UnitChar::trivial(p)).ok_or(Error::MissingEpsilon(0))?;
        if !one.scale(2).is_zero() {
            return Err(Error::InvalidInput("C_1 must be ±1".into()));
        }
        Ok(Self { p, c, level_bound, angles })
    }

    /// Random data with the given `C_1`, random phases paired as `C_{ν^{-1}} = C_ν^{-1}`.
    pub fn random<R: Rng>(p: u64, c: u32, c1_negative: bool, level_bound: u32, rng: &mut R) -> Result<Self> {
        let mut angles = BTreeMap::new();
        for nu in UnitChar::all_up_to(p, level_bound) {
            if angles.contains_key(&nu) {
                continue;
            }
            let angle = if nu.is_trivial() {
                RationalAngle::new(c1_negative as i64, 2)
            } else if nu.inv() == nu {
                RationalAngle::new(rng.gen_range(0..2), 2)
            } else {
                RationalAngle::new(rng.gen_range(0..720), 720)
            };
            angles.insert(nu, angle);
            angles.insert(nu.inv(), angle.neg());
        }
        Self::new(p, c, level_bound, angles)
    }

    /// Same data with every `C_ν` for `ν ≠ 1` replaced by fresh random phases.
    pub fn rerandomized<R: Rng>(&self, rng: &mut R) -> Result<Self> {
        Self::random(self.p, self.c, self.c1() < 0.0, self.level_bound, rng)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn conductor(&self) -> u32 {
        self.c
    }

    pub fn level_bound(&self) -> u32 {
        self.level_bound
    }

    pub fn c1(&self) -> f64 {
        self.angle(&UnitChar::trivial(self.p)).map(|a| a.to_complex().re).unwrap_or(1.0)
    }

    pub fn angle(&self, nu: &UnitChar) -> Result<RationalAngle> {
        self.angles.get(nu).copied().ok_or(Error::MissingEpsilon(nu.level()))
    }

    /// Image of `e_{r,ν}` under `w`: shell, character and phase.
    pub fn w_on_basis(&self, r: i64, nu: &UnitChar) -> Result<(i64, UnitChar, RationalAngle)> {
        let n = nu.level();
        if self.p == 2 && self.c == 2 * n && self.c >= 4 {
            return Err(Error::ExceptionalKirillov { c: self.c, level: n });
        }
        let shift = self.c.max(2 * n) as i64;
        Ok((-r - shift, nu.inv(), self.angle(nu)?))
    }
}

/// Kirillov model for `ψ` or `ψ̄`, sharing the same `C_ν`.
#[derive(Clone, Debug)]
pub struct KirillovEngine {
    pub eps: EpsilonData,
    pub conj_psi: bool,
}

impl KirillovEngine {
    pub fn new(eps: EpsilonData, conj_psi: bool) -> Self {
        Self { eps, conj_psi }
    }

    pub fn prime(&self) -> u64 {
        self.eps.prime()
    }

    /// `(π(α β; 0 δ) φ)(x) = ψ(β x / δ) φ(α x / δ)`.
    pub fn act_borel(
        &self,
        v: &KirillovVector,
        a: &PadicScalar,
        b: &PadicScalar,
        d: &PadicScalar,
    ) -> Result<KirillovVector> {
        let p = v.prime();
        let lambda = a.div(d)?;
        let beta = if self.conj_psi { b.div(d)?.neg() } else { b.div(d)? };
        let vl = lambda.val().ok_or(PadicError::DivisionByZero)?;
        let mut scaled = KirillovVector::zero(p);
        for (r, nu, coeff) in v.terms() {
            scaled.add_term(r - vl, *nu, coeff * nu.angle(&lambda)?.to_complex());
        }
        if beta.is_zero() {
            return Ok(scaled.pruned());
        }
        let vb = beta.val().unwrap();
        let b_unit = beta.unit_part()?;
        let mut out = KirillovVector::zero(p);
        for (r, chi, coeff) in scaled.terms() {
            let e = vb + r;
            if e >= 0 {
                out.add_term(r, *chi, *coeff);
                continue;
            }
            if e == -1 {
                out.add_term(r, *chi, coeff * gauss_coefficient(&UnitChar::trivial(p), e, &b_unit)?);
            }
            for mu in UnitChar::all_of_level(p, (-e) as u32) {
                let nu = chi.mul(&mu.inv());
                out.add_term(r, nu, coeff * gauss_coefficient(&mu, e, &b_unit)?);
            }
        }
        Ok(out.pruned())
    }

    pub fn act_w(&self, v: &KirillovVector) -> Result<KirillovVector> {
        let mut out = KirillovVector::zero(v.prime());
        for (r, nu, coeff) in v.terms() {
            let (r2, nu2, angle) = self.eps.w_on_basis(r, nu)?;
            out.add_term(r2, nu2, coeff * angle.to_complex());
        }
        Ok(out.pruned())
    }

    /// `π(g) v` through `g = (det/C, A; 0, C) · w · n(D/C)` when `C ≠ 0`.
    pub fn act(&self, v: &KirillovVector, g: &Mat2) -> Result<KirillovVector> {
        let p = v.prime();
        let one = PadicScalar::one(p);
        if g.c.is_zero() {
            return self.act_borel(v, &g.a, &g.b, &g.d);
        }
        let t = g.d.div(&g.c)?;
        let v1 = self.act_borel(v, &one, &t, &one)?;
        let v2 = self.act_w(&v1)?;
        self.act_borel(&v2, &g.det()?.div(&g.c)?, &g.a, &g.c)
    }

    /// `y ↦ (π(a(p^{-l})) φ_0)(a(y) γ_j)` as a Kirillov vector.
    pub fn whittaker_sc(&self, l: u32, j: u32) -> Result<KirillovVector> {
        let p = self.prime();
        let shift = PadicScalar::uniformizer_pow(p, -(l as i64));
        let newform = KirillovVector::newform(p);
        if j >= self.eps.conductor() + l {
            let one = PadicScalar::one(p);
            return self.act_borel(&newform, &shift, &PadicScalar::zero(p), &one);
        }
        let g = Mat2::gamma(p, j as i64).mul(&Mat2::a_of(shift))?;
        self.act(&newform, &g)
    }
}

/// `∫ v(y) ψ(b y) d^×y`, summed shell by shell over representatives.
pub fn sc_integral(v: &KirillovVector, b: &PadicScalar) -> Result<Complex64> {
    let p = v.prime();
    let mut total = Complex64::new(0.0, 0.0);
    for r in v.shells() {
        let twist = b.val().map_or(0, |vb| -(vb + r));
        let depth = (v.max_level(r) as i64).max(twist).max(1) as u32;
        let shell = ShellFunction::try_from_fn(p, r, depth, |y| {
            let psi = crate::characters::eval_psi(&b.mul(y))?.to_complex();
            Ok(v.eval(y)? * psi)
        })?;
        total += shell.integrate_mult();
    }
    Ok(total)
}

/// Levels the level-shift lemma allows after multiplying a level-`n` shell
/// function by `ψ(bx)`, where `e = v(b) + r`: level `n` when `e ≥ −max(n, 1)`,
/// level `−e` when `e < −n`, and every level below `n` when `e = −n`.
pub fn level_shift_lemma(p: u64, n: u32, e: i64) -> BTreeSet<u32> {
    let realizable = |k: &u32| !(p == 2 && *k == 1);
    let mut out = BTreeSet::new();
    if e >= -(n.max(1) as i64) {
        out.insert(n);
    }
    if e < -(n as i64) {
        out.insert((-e) as u32);
    }
    if e == -(n as i64) {
        out.extend(0..n);
    }
    out.into_iter().filter(realizable).collect()
}

/// Levels actually present for a single level-`n` character. At `p = 2` with
/// `e = −n ≤ −2` the level-`n` part cancels: two level-`n` characters always
/// differ by one of lower level.
pub fn level_shift_rule(p: u64, n: u32, e: i64) -> BTreeSet<u32> {
    let mut out = level_shift_lemma(p, n, e);
    if p == 2 && n >= 2 && e == -(n as i64) {
        out.remove(&n);
    }
    out
}
