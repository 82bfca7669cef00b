//! Local trilinear constants `I′` for `π1 = ω1 ⊞ ω2`, `π2 = π̃1` and a third
//! representation that is Steinberg, spherical or supercuspidal.
//!
//! The brute-force path integrates `φ1 · W2 · W3` over the torus and the cells
//! `a(y) γ_j` of `K`, normalizes by Whittaker pairings and L-factors, and is
//! compared against the closed forms. A second path for supercuspidal `π3`
//! integrates products of normalized matrix coefficients over the Borel.

use std::cell::RefCell;
use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{zeta, MultiplicativeCharacter};
use crate::error::{Error, Result};
use crate::global::{LocalCase, Rational};
use crate::haar::{k_weights, pairwise_sum, units_mod};
use crate::induced::{eval_newform_induced, InducedRepSpec, WhittakerEvaluator};
use crate::kirillov::{EpsilonData, KirillovEngine, KirillovVector};
use crate::padic::{max_precision, Mat2, PadicScalar};

/// Closed-form `I′` at a prime `p` with `m = ord_p(D)`, exactly.
pub fn closed_form_exact(p: i64, m: u32, case: LocalCase) -> Rational {
    let base = Rational::new(1, (p as i128).pow(m));
    let bump = Rational::new(p as i128 + 1, p as i128);
    match case {
        LocalCase::Special => base * bump,
        LocalCase::Spherical => base,
        LocalCase::Supercuspidal { unramified: true, .. } => base,
        LocalCase::Supercuspidal { unramified: false, .. } => base * bump,
    }
}

/// The third representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Pi3Kind {
    /// `St ⊗ ω3` with `ω3² = 1` unramified.
    Steinberg { omega3: MultiplicativeCharacter },
    /// `ω3 ⊞ ω3^{-1}` with `q^{-1/2} < |ω3(p)| < q^{1/2}`.
    Spherical { omega3: MultiplicativeCharacter },
    /// Supercuspidal with trivial central character; `unramified` marks `π3 ≃ π3 ⊗ η`.
    Supercuspidal { eps: EpsilonData, unramified: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pi3Label {
    Steinberg,
    Spherical,
    Supercuspidal,
}

/// Which copy of the Rankin–Selberg functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `ℓ(φ1, W2, π3(a(p^{-l1})) W3)` against `ψ`.
    Plain,
    /// `ℓ(φ̃1, W̃2, π̃3(a(p^{-l2})) W̃3)` against `ψ̄`.
    Tilde,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalTripleSpec {
    pub omega1: MultiplicativeCharacter,
    pub omega2: MultiplicativeCharacter,
    pub pi3: Pi3Kind,
    pub l1: u32,
    pub l2: u32,
}

impl LocalTripleSpec {
    /// Checks the characters and `π3`, but not the translate range.
    pub fn new(
        omega1: MultiplicativeCharacter,
        omega2: MultiplicativeCharacter,
        pi3: Pi3Kind,
        l1: u32,
        l2: u32,
    ) -> Result<Self> {
        let p = omega1.prime();
        let m = omega1.conductor();
        if m == 0 {
            return Err(Error::InvalidInput("ω1 must be ramified".into()));
        }
        if omega2.prime() != p || omega2.conductor() != 0 {
            return Err(Error::InvalidInput("ω2 must be unramified at the same prime".into()));
        }
        if !omega1.is_unitary() || !omega2.is_unitary() {
            return Err(Error::InvalidInput("ω1 and ω2 must be unitary".into()));
        }
        match &pi3 {
            Pi3Kind::Steinberg { omega3 } => {
                check_prime(p, omega3.prime())?;
                InducedRepSpec::steinberg(*omega3)?;
            }
            Pi3Kind::Spherical { omega3 } => {
                check_prime(p, omega3.prime())?;
                InducedRepSpec::spherical(*omega3)?;
            }
            Pi3Kind::Supercuspidal { eps, .. } => {
                check_prime(p, eps.prime())?;
                if eps.conductor() > m {
                    return Err(Error::InvalidInput(format!("c(π3) = {} exceeds m = {m}", eps.conductor())));
                }
            }
        }
        Ok(Self { omega1, omega2, pi3, l1, l2 })
    }

    pub fn prime(&self) -> u64 {
        self.omega1.prime()
    }

    pub fn m(&self) -> u32 {
        self.omega1.conductor()
    }

    pub fn label(&self) -> Pi3Label {
        match self.pi3 {
            Pi3Kind::Steinberg { .. } => Pi3Label::Steinberg,
            Pi3Kind::Spherical { .. } => Pi3Label::Spherical,
            Pi3Kind::Supercuspidal { .. } => Pi3Label::Supercuspidal,
        }
    }

    /// `c(π3)`.
    pub fn c3(&self) -> u32 {
        match &self.pi3 {
            Pi3Kind::Steinberg { .. } => 1,
            Pi3Kind::Spherical { .. } => 0,
            Pi3Kind::Supercuspidal { eps, .. } => eps.conductor(),
        }
    }

    /// Largest admissible translate exponent.
    pub fn l_max(&self) -> u32 {
        match self.pi3 {
            Pi3Kind::Steinberg { .. } => self.m() - 1,
            Pi3Kind::Spherical { .. } => self.m(),
            Pi3Kind::Supercuspidal { .. } => self.m() - self.c3(),
        }
    }

    pub fn check_range(&self) -> Result<()> {
        let top = self.l_max();
        if self.l1 > top || self.l2 > top {
            return Err(Error::OutOfRange(format!("(l1, l2) = ({}, {}) outside [0, {top}]²", self.l1, self.l2)));
        }
        Ok(())
    }

    pub fn local_case(&self) -> LocalCase {
        match self.pi3 {
            Pi3Kind::Steinberg { .. } => LocalCase::Special,
            Pi3Kind::Spherical { .. } => LocalCase::Spherical,
            Pi3Kind::Supercuspidal { unramified, .. } => LocalCase::Supercuspidal { c: self.c3(), unramified },
        }
    }

    fn pi1(&self) -> InducedRepSpec {
        InducedRepSpec::Principal { chi1: self.omega1, chi2: self.omega2 }
    }

    fn pi3_induced(&self) -> Option<InducedRepSpec> {
        match self.pi3 {
            Pi3Kind::Steinberg { omega3 } => Some(InducedRepSpec::Steinberg { omega3 }),
            Pi3Kind::Spherical { omega3 } => Some(InducedRepSpec::Spherical { omega3 }),
            Pi3Kind::Supercuspidal { .. } => None,
        }
    }
}

fn check_prime(p: u64, other: u64) -> Result<()> {
    if p != other {
        return Err(Error::InvalidInput(format!("prime mismatch: {p} vs {other}")));
    }
    Ok(())
}

enum Third {
    Induced(WhittakerEvaluator),
    Kirillov(KirillovEngine),
}

/// `φ1` and `W2` on one side, with `φ1 W2 (a(y) γ_j)` memoized per unit class.
struct InducedPair {
    phi: InducedRepSpec,
    w2: WhittakerEvaluator,
    memo: RefCell<HashMap<(u32, i64, u64), Complex64>>,
}

impl InducedPair {
    fn new(spec: &LocalTripleSpec, side: Side) -> Self {
        let plain = WhittakerEvaluator::new(spec.pi1(), false, 0);
        let (phi, w2) = match side {
            Side::Plain => (spec.pi1(), plain.dual()),
            Side::Tilde => (spec.pi1().inverse(), plain),
        };
        Self { phi, w2, memo: RefCell::new(HashMap::new()) }
    }

    fn phi(&self, y: &PadicScalar, j: u32) -> Result<Complex64> {
        eval_newform_induced(&self.phi, &Mat2::a_of(*y).mul(&Mat2::gamma(y.prime(), j as i64))?)
    }

    fn value(&self, j: u32, r: i64, u: u64) -> Result<Complex64> {
        if let Some(v) = self.memo.borrow().get(&(j, r, u)) {
            return Ok(*v);
        }
        let y = unit_point(self.phi.prime(), r, u);
        let phi = self.phi(&y, j)?;
        let v = if phi.norm() == 0.0 { phi } else { phi * self.w2.bruteforce(&y, j)? };
        self.memo.borrow_mut().insert((j, r, u), v);
        Ok(v)
    }
}

fn third_factor(spec: &LocalTripleSpec, side: Side, l: u32) -> Third {
    match (&spec.pi3, spec.pi3_induced()) {
        (_, Some(rep)) => {
            let ev = WhittakerEvaluator::new(rep, false, l);
            Third::Induced(if side == Side::Tilde { ev.dual() } else { ev })
        }
        (Pi3Kind::Supercuspidal { eps, .. }, None) => {
            Third::Kirillov(KirillovEngine::new(eps.clone(), side == Side::Tilde))
        }
        _ => unreachable!("induced kinds are handled above"),
    }
}

/// Characteristic roots of `r ↦ W(a(p^r))` for large `r`.
fn whittaker_roots(rep: &InducedRepSpec) -> Vec<Complex64> {
    let q = rep.prime() as f64;
    match rep {
        InducedRepSpec::Principal { chi2, .. } => vec![chi2.z / q.sqrt()],
        InducedRepSpec::Steinberg { omega3 } => vec![omega3.z / q],
        InducedRepSpec::Spherical { omega3 } => vec![omega3.z / q.sqrt(), omega3.z.inv() / q.sqrt()],
    }
}

/// `Σ_{n ≥ 0} S(n)` for a sequence annihilated by `∏ (x − ρ_i)`, given its first
/// `k + 2` terms; the last two terms must obey the recurrence.
pub fn recurrence_tail(roots: &[Complex64], values: &[Complex64]) -> Result<Complex64> {
    let k = roots.len();
    if values.len() != k + 2 {
        return Err(Error::InvalidInput(format!("need {} terms, got {}", k + 2, values.len())));
    }
    // Coefficients of ∏ (1 − ρ_i t), lowest degree first.
    let mut qpoly = vec![Complex64::new(1.0, 0.0)];
    for rho in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); qpoly.len() + 1];
        for (i, c) in qpoly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * rho;
        }
        qpoly = next;
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for n in k..k + 2 {
        let residual: Complex64 = (0..=k).map(|i| qpoly[i] * values[n - i]).sum();
        if residual.norm() > 1e-11 * scale.max(1e-300) {
            return Err(Error::TailNotLocked(format!("residual {:.3e} at term {n}", residual.norm())));
        }
    }
    let numer: Complex64 = (0..k).map(|d| (0..=d).map(|i| qpoly[i] * values[d - i]).sum::<Complex64>()).sum();
    let denom: Complex64 = qpoly.iter().sum();
    Ok(numer / denom)
}

fn unit_point(p: u64, r: i64, u: u64) -> PadicScalar {
    PadicScalar::from_parts(p, r, u as i128, max_precision(p))
}

/// `∫_{v(y) = r} F(y) d^×y / |y|` for `F` invariant under `1 + p^depth`.
fn shell_mean(p: u64, r: i64, depth: u32, f: impl Fn(u64, &PadicScalar) -> Result<Complex64>) -> Result<Complex64> {
    let values = units_mod(p, depth).map(|u| f(u, &unit_point(p, r, u))).collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&values) / values.len() as f64 * (p as f64).powi(r as i32))
}

/// `∫_{F^×} φ1 W2 W3 (a(y) γ_j) d^×y / |y|` for one cell.
fn cell_integral(spec: &LocalTripleSpec, pair: &InducedPair, third: &Third, l: u32, j: u32) -> Result<Complex64> {
    let p = spec.prime();
    let m = spec.m();
    let depth = m.max(spec.c3() + l).max(1);
    let lowest = -((m + l + 3) as i64);
    match third {
        Third::Induced(w3) => {
            let integrand = |r: i64| {
                move |u: u64, y: &PadicScalar| -> Result<Complex64> {
                    let front = pair.value(j, r, u)?;
                    if front.norm() == 0.0 {
                        return Ok(front);
                    }
                    Ok(front * w3.bruteforce(y, j)?)
                }
            };
            let tail_start = l as i64 + 2;
            let mut total = Complex64::new(0.0, 0.0);
            for r in lowest..tail_start {
                total += shell_mean(p, r, depth, integrand(r))?;
            }
            let roots = whittaker_roots(&w3.rep);
            let tail = (0..roots.len() as i64 + 2)
                .map(|n| shell_mean(p, tail_start + n, depth, integrand(tail_start + n)))
                .collect::<Result<Vec<_>>>()?;
            Ok(total + recurrence_tail(&roots, &tail)?)
        }
        Third::Kirillov(engine) => {
            let support = |r: i64| -> Result<bool> {
                for u in units_mod(p, depth) {
                    if pair.phi(&unit_point(p, r, u), j)?.norm() > 0.0 {
                        return Ok(true);
                    }
                }
                Ok(false)
            };
            let mut w3 = None;
            let mut total = Complex64::new(0.0, 0.0);
            for r in lowest..=0 {
                if !support(r)? {
                    continue;
                }
                if w3.is_none() {
                    w3 = Some(engine.whittaker_sc(l, j)?);
                }
                let w3 = w3.as_ref().unwrap();
                if !w3.shells().contains(&r) {
                    continue;
                }
                let d = depth.max(w3.max_level(r));
                total += shell_mean(p, r, d, |u, y| Ok(pair.value(j, r, u)? * w3.eval(y)?))?;
            }
            if let Some(w3) = &w3 {
                if w3.shells().iter().any(|&r| r < lowest || r > 0) {
                    return Err(Error::OutOfRange(format!(
                        "Kirillov support {:?} leaves the scanned shells",
                        w3.shells()
                    )));
                }
            }
            Ok(total)
        }
    }
}

/// `ℓ_RS` for each translate exponent in `ls`, sharing the `φ1 W2` values.
pub fn ell_rs_translates(spec: &LocalTripleSpec, side: Side, ls: &[u32]) -> Result<Vec<Complex64>> {
    let p = spec.prime();
    let m = spec.m();
    let pair = InducedPair::new(spec, side);
    let weights = k_weights(p, m);
    let norm = zeta(p as f64, 1.0).sqrt();
    ls.iter()
        .map(|&l| {
            let third = third_factor(spec, side, l);
            let mut total = Complex64::new(0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                total += cell_integral(spec, &pair, &third, l, j as u32)? * *w;
            }
            Ok(total * norm)
        })
        .collect()
}

/// `ℓ_RS = ζ(1)^{1/2} Σ_j A_j ∫ φ1 W2 W3 (a(y) γ_j) d^×y / |y|`.
pub fn ell_rs(spec: &LocalTripleSpec, side: Side) -> Result<Complex64> {
    let l = match side {
        Side::Plain => spec.l1,
        Side::Tilde => spec.l2,
    };
    Ok(ell_rs_translates(spec, side, &[l])?[0])
}

/// `I(φ ⊗ φ̃) = ℓ_RS(plain) · ℓ_RS(tilde)`.
pub fn local_i(spec: &LocalTripleSpec) -> Result<Complex64> {
    Ok(ell_rs(spec, Side::Plain)? * ell_rs(spec, Side::Tilde)?)
}

/// `∫ W(a(y)) W̃(a(y)) d^×y` for an induced newform and its contragredient.
fn induced_pairing(rep: InducedRepSpec) -> Result<Complex64> {
    let plain = WhittakerEvaluator::new(rep, false, 0);
    let dual = plain.dual();
    let p = rep.prime();
    let at = |r: i64| -> Result<Complex64> {
        let y = PadicScalar::uniformizer_pow(p, r);
        Ok(plain.bruteforce(&y, 0)? * dual.bruteforce(&y, 0)?)
    };
    let tail_start = 2;
    let mut total = Complex64::new(0.0, 0.0);
    for r in -(rep.conductor() as i64 + 3)..tail_start {
        total += at(r)?;
    }
    let roots: Vec<Complex64> = whittaker_roots(&rep)
        .iter()
        .flat_map(|a| whittaker_roots(&rep.inverse()).into_iter().map(move |b| a * b))
        .collect();
    let tail = (0..roots.len() as i64 + 2).map(|n| at(tail_start + n)).collect::<Result<Vec<_>>>()?;
    Ok(total + recurrence_tail(&roots, &tail)?)
}

fn kirillov_pairing(v: &KirillovVector, w: &KirillovVector) -> Result<Complex64> {
    let p = v.prime();
    let mut total = Complex64::new(0.0, 0.0);
    for r in v.shells() {
        let depth = v.max_level(r).max(w.max_level(r)).max(1);
        let values = units_mod(p, depth)
            .map(|u| {
                let y = unit_point(p, r, u);
                Ok(v.eval(&y)? * w.eval(&y)?)
            })
            .collect::<Result<Vec<_>>>()?;
        total += pairwise_sum(&values) / values.len() as f64;
    }
    Ok(total)
}

/// Newform pairings `⟨W_{π_i}, W̃_{π_i}⟩` for `i = 1, 2, 3`.
pub fn norms(spec: &LocalTripleSpec) -> Result<[Complex64; 3]> {
    let n1 = induced_pairing(spec.pi1())?;
    let n2 = induced_pairing(spec.pi1().inverse())?;
    let n3 = match (&spec.pi3, spec.pi3_induced()) {
        (_, Some(rep)) => induced_pairing(rep)?,
        (Pi3Kind::Supercuspidal { eps, .. }, None) => {
            let plain = KirillovEngine::new(eps.clone(), false).whittaker_sc(0, eps.conductor())?;
            let dual = KirillovEngine::new(eps.clone(), true).whittaker_sc(0, eps.conductor())?;
            kirillov_pairing(&plain, &dual)?
        }
        _ => unreachable!("induced kinds are handled above"),
    };
    Ok([n1, n2, n3])
}

/// `L(s, π_i, Ad)` for `i = 1, 2, 3`.
pub fn adjoint_l(spec: &LocalTripleSpec, s: f64) -> [Complex64; 3] {
    let q = spec.prime() as f64;
    let z = Complex64::new(zeta(q, s), 0.0);
    let third = match &spec.pi3 {
        Pi3Kind::Steinberg { .. } => Complex64::new(zeta(q, s + 1.0), 0.0),
        Pi3Kind::Spherical { omega3 } => {
            let sq = omega3.mul(omega3);
            z * sq.l_factor(s) * sq.inv().l_factor(s)
        }
        Pi3Kind::Supercuspidal { unramified: true, .. } => Complex64::new(1.0 / (1.0 + q.powf(-s)), 0.0),
        Pi3Kind::Supercuspidal { unramified: false, .. } => Complex64::new(1.0, 0.0),
    };
    [z, z, third]
}

/// `L(s, π1 ⊗ π2 ⊗ π3)`.
pub fn triple_l(spec: &LocalTripleSpec, s: f64) -> Complex64 {
    match &spec.pi3 {
        Pi3Kind::Steinberg { omega3 } => omega3.l_factor(s + 0.5).powi(2),
        Pi3Kind::Spherical { omega3 } => (omega3.l_factor(s) * omega3.inv().l_factor(s)).powi(2),
        Pi3Kind::Supercuspidal { .. } => Complex64::new(1.0, 0.0),
    }
}

/// `L(1, Ad)³ / (ζ(2)² L(1/2, π1 ⊗ π2 ⊗ π3))`.
pub fn l_normalization(spec: &LocalTripleSpec) -> Complex64 {
    let q = spec.prime() as f64;
    let ad = adjoint_l(spec, 1.0);
    ad[0] * ad[1] * ad[2] / (zeta(q, 2.0).powi(2) * triple_l(spec, 0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bruteforce,
    Closed,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// One evaluation of `I′`, in the shape printed by the command line.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct LocalConstantRecord {
    pub p: u64,
    pub m: u32,
    pub kind: Pi3Label,
    pub l1: u32,
    pub l2: u32,
    pub I_prime_bruteforce: Option<ComplexValue>,
    pub I_prime_closed: Option<ComplexValue>,
    pub abs_err: Option<f64>,
    pub wall_time_ms: f64,
}

/// `I′` from the Rankin–Selberg integrals: `L-normalization · I / ∏ norms`.
pub fn bruteforce_i_prime(spec: &LocalTripleSpec) -> Result<Complex64> {
    let [n1, n2, n3] = norms(spec)?;
    Ok(l_normalization(spec) * local_i(spec)? / (n1 * n2 * n3))
}

pub fn closed_i_prime(spec: &LocalTripleSpec) -> Rational {
    closed_form_exact(spec.prime() as i64, spec.m(), spec.local_case())
}

/// `I′` for every `(l1, l2) ∈ ls²`, computing each `ℓ_RS` once.
pub fn i_prime_grid(spec: &LocalTripleSpec, ls: &[u32]) -> Result<Vec<(u32, u32, Complex64)>> {
    let plain = ell_rs_translates(spec, Side::Plain, ls)?;
    let tilde = ell_rs_translates(spec, Side::Tilde, ls)?;
    let [n1, n2, n3] = norms(spec)?;
    let scale = l_normalization(spec) / (n1 * n2 * n3);
    let mut out = Vec::with_capacity(ls.len() * ls.len());
    for (a, l1) in plain.iter().zip(ls) {
        for (b, l2) in tilde.iter().zip(ls) {
            out.push((*l1, *l2, scale * a * b));
        }
    }
    Ok(out)
}

/// `I′` with the translate range enforced.
pub fn local_i_prime(spec: &LocalTripleSpec, mode: Mode) -> Result<LocalConstantRecord> {
    spec.check_range()?;
    local_i_prime_unchecked(spec, mode)
}

/// `I′` for any translate exponents, including those past the stated range.
pub fn local_i_prime_unchecked(spec: &LocalTripleSpec, mode: Mode) -> Result<LocalConstantRecord> {
    let start = Instant::now();
    let brute = match mode {
        Mode::Closed => None,
        _ => Some(bruteforce_i_prime(spec)?),
    };
    let closed = match mode {
        Mode::Bruteforce => None,
        _ => {
            let r = closed_i_prime(spec);
            Some(Complex64::new(*r.numer() as f64 / *r.denom() as f64, 0.0))
        }
    };
    let abs_err = brute.zip(closed).map(|(a, b)| (a - b).norm());
    Ok(LocalConstantRecord {
        p: spec.prime(),
        m: spec.m(),
        kind: spec.label(),
        l1: spec.l1,
        l2: spec.l2,
        I_prime_bruteforce: brute.map(Into::into),
        I_prime_closed: closed.map(Into::into),
        abs_err,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Normalized matrix coefficient of `π1` at `n(x) a(p^r) γ_j`, from its case table.
pub fn phi1_coefficient(spec: &LocalTripleSpec, x: &PadicScalar, r: i64, j: u32) -> Result<Complex64> {
    let p = spec.prime();
    let m = spec.m();
    let (w1, w2) = (spec.omega1, spec.omega2);
    let zero = Complex64::new(0.0, 0.0);
    let y = PadicScalar::uniformizer_pow(p, r);
    let q = p as f64;
    let vx = x.val();
    if j >= m {
        let big = |bound: i64| vx.is_none_or(|v| v >= bound);
        return Ok(if r >= 0 && big(0) {
            w2.eval(&y)? * q.powf(-r as f64 / 2.0)
        } else if r <= 0 && big(r) {
            w2.eval(&y)? * q.powf(r as f64 / 2.0)
        } else {
            zero
        });
    }
    let ratio = w1.inv().mul(&w2);
    if j == 0 {
        let s = x.add(&y)?;
        return Ok(match s.val() {
            Some(vs) if vs <= (-(m as i64)).min(r) => {
                w1.eval(&y)? * q.powf(-r as f64 / 2.0) * ratio.eval(&s)? * q.powi(-vs as i32)
            }
            _ => zero,
        });
    }
    let j = j as i64;
    if r > j - m as i64 || vx.is_some_and(|v| v < r + m as i64 - j - 1) {
        return Ok(zero);
    }
    let arg = PadicScalar::one(p).add(&x.mul(&PadicScalar::uniformizer_pow(p, j - r)))?;
    Ok(w2.eval(&y)? * q.powf(r as f64 / 2.0) * ratio.eval(&arg)?)
}

/// Normalized matrix coefficient `⟨π3(n(t)) V, W̃3⟩ = ∫_{Z_p^×} ψ(t y) V(y) d^×y`.
fn phi3_coefficient(engine: &KirillovEngine, v: &KirillovVector, t: &PadicScalar) -> Result<Complex64> {
    let p = engine.prime();
    let one = PadicScalar::one(p);
    let moved = engine.act_borel(v, &one, t, &one)?;
    Ok(moved.coefficient(0, &crate::characters::UnitChar::trivial(p)))
}

fn scalar_from(p: u64, k: u64, e: i64) -> PadicScalar {
    PadicScalar::from_i128(p, k as i128).mul(&PadicScalar::uniformizer_pow(p, e))
}

/// Weighted cell contributions `A_j ∫_{Z\B} ∏ Φ_{π_i}(b γ_j) db` for supercuspidal `π3`.
pub fn matrix_coefficient_cells(spec: &LocalTripleSpec) -> Result<Vec<Complex64>> {
    let Pi3Kind::Supercuspidal { eps, .. } = &spec.pi3 else {
        return Err(Error::InvalidInput("matrix coefficients are tabulated for supercuspidal π3 only".into()));
    };
    if eps.conductor() >= 4 {
        return Err(Error::OutOfRange(format!("c(π3) = {} ≥ 4", eps.conductor())));
    }
    let p = spec.prime();
    let q = p as f64;
    let m = spec.m();
    let l2 = spec.l2 as i64;
    let engine = KirillovEngine::new(eps.clone(), false);
    let weights = k_weights(p, m);
    let mut cells = Vec::with_capacity(weights.len());
    for (j, w) in weights.iter().enumerate() {
        let j = j as u32;
        let base = engine.whittaker_sc(spec.l1, j)?;
        let mut cell = Complex64::new(0.0, 0.0);
        for s in base.shells() {
            let r = s - l2;
            let shift = PadicScalar::uniformizer_pow(p, r + l2);
            let v = engine.act_borel(&base, &shift, &PadicScalar::zero(p), &PadicScalar::one(p))?;
            let reach = (v.max_level(0) as i64).max(1);
            let lowest = -l2 - reach;
            let coarse = -l2;
            let fine = (r + m as i64).max(coarse);
            let per_coarse = crate::padic::pow(p, (fine - coarse) as u32);
            let mut shell = Complex64::new(0.0, 0.0);
            for k0 in 0..crate::padic::pow(p, (coarse - lowest) as u32) {
                let x0 = scalar_from(p, k0, lowest);
                let t = x0.mul(&PadicScalar::uniformizer_pow(p, l2));
                let phi3 = phi3_coefficient(&engine, &v, &t)?;
                if phi3.norm() < 1e-14 {
                    continue;
                }
                let mut inner = Vec::with_capacity(per_coarse as usize);
                for k1 in 0..per_coarse {
                    let x = x0.add(&scalar_from(p, k1, coarse))?;
                    let phi1 = phi1_coefficient(spec, &x, r, j)?;
                    inner.push(phi1 * phi1.conj());
                }
                shell += phi3 * pairwise_sum(&inner) * q.powi(-fine as i32);
            }
            cell += shell * q.powi(r as i32);
        }
        cells.push(cell * *w);
    }
    Ok(cells)
}

/// `I / ⟨φ, φ̃⟩` through matrix coefficients.
pub fn matrix_coefficient_i(spec: &LocalTripleSpec) -> Result<Complex64> {
    Ok(matrix_coefficient_cells(spec)?.iter().sum())
}
