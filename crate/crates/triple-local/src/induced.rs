//! Induced models of principal series, Steinberg and spherical representations.
//!
//! Whittaker values come in two independent flavours: the piecewise closed
//! forms, and a brute-force evaluation of
//! `W(g) = ζ(2)^{1/2}/ζ(1) ∫ φ(w n(x) g) ψ^{-1}(x) dx`
//! that only uses the induced newform and group invariance.
//!
//! The brute-force sum splits `x ∈ Q_p` into three regions, each justified by
//! an invariance of the integrand `f(x) = φ(w n(x) g)`:
//! * `x ∈ p^{k0} Z_p`, on which `f` is constant (`g^{-1} n(δ) g ∈ K1`);
//! * shells `v(x) ≤ −t0`, where `w n(x) = n(−1/x) diag(1/x, x) n̄(1/x)` and
//!   `g^{-1} n̄(1/x) g ∈ K1`, so `f` is a character of `x` times `φ(g)`;
//! * the shells in between, where `f(xu) = f(x)` for `u ∈ 1 + p^{Nr}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{epsilon_factor, eval_psi, zeta, AdditiveCharacter, MultiplicativeCharacter};
use crate::error::{Error, Result};
use crate::haar::units_mod;
use crate::padic::{decompose_corner, max_precision, pow, Mat2, PadicScalar};

/// An induced representation together with the conductor of its newform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InducedRepSpec {
    /// `χ1 ⊞ χ2` with `χ2` unramified.
    Principal { chi1: MultiplicativeCharacter, chi2: MultiplicativeCharacter },
    /// `St ⊗ ω3` with `ω3` unramified.
    Steinberg { omega3: MultiplicativeCharacter },
    /// `ω3 ⊞ ω3^{-1}` with `ω3` unramified.
    Spherical { omega3: MultiplicativeCharacter },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RepKind {
    Principal,
    Steinberg,
    Spherical,
}

impl InducedRepSpec {
    pub fn principal(chi1: MultiplicativeCharacter, chi2: MultiplicativeCharacter) -> Result<Self> {
        if chi2.conductor() != 0 {
            return Err(Error::InvalidInput("second inducing character must be unramified".into()));
        }
        Ok(Self::Principal { chi1, chi2 })
    }

    pub fn steinberg(omega3: MultiplicativeCharacter) -> Result<Self> {
        if omega3.conductor() != 0 || (omega3.z * omega3.z - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidInput("Steinberg twist must be unramified with square 1".into()));
        }
        Ok(Self::Steinberg { omega3 })
    }

    pub fn spherical(omega3: MultiplicativeCharacter) -> Result<Self> {
        let q = omega3.prime() as f64;
        let r = omega3.z.norm();
        if omega3.conductor() != 0 || !(r > q.powf(-0.5) && r < q.powf(0.5)) {
            return Err(Error::OutOfRange(format!("|ω3(p)| = {r} outside (q^-1/2, q^1/2)")));
        }
        Ok(Self::Spherical { omega3 })
    }

    pub fn kind(&self) -> RepKind {
        match self {
            Self::Principal { .. } => RepKind::Principal,
            Self::Steinberg { .. } => RepKind::Steinberg,
            Self::Spherical { .. } => RepKind::Spherical,
        }
    }

    pub fn prime(&self) -> u64 {
        match self {
            Self::Principal { chi1, .. } => chi1.prime(),
            Self::Steinberg { omega3 } | Self::Spherical { omega3 } => omega3.prime(),
        }
    }

    pub fn conductor(&self) -> u32 {
        match self {
            Self::Principal { chi1, chi2 } => chi1.conductor() + chi2.conductor(),
            Self::Steinberg { .. } => 1,
            Self::Spherical { .. } => 0,
        }
    }

    /// The representation induced from the inverse characters.
    pub fn inverse(&self) -> Self {
        match *self {
            Self::Principal { chi1, chi2 } => Self::Principal { chi1: chi1.inv(), chi2: chi2.inv() },
            Self::Steinberg { omega3 } => Self::Steinberg { omega3: omega3.inv() },
            Self::Spherical { omega3 } => Self::Spherical { omega3: omega3.inv() },
        }
    }

    /// `φ((a b; 0 d) g) = δ(a, d) φ(g)`.
    pub fn borel_char(&self, a: &PadicScalar, d: &PadicScalar) -> Result<Complex64> {
        let ratio = a.abs() / d.abs();
        Ok(match self {
            Self::Principal { chi1, chi2 } => chi1.eval(a)? * chi2.eval(d)? * ratio.sqrt(),
            Self::Steinberg { omega3 } => omega3.eval(&a.mul(d))? * ratio,
            Self::Spherical { omega3 } => omega3.eval(a)? * omega3.inv().eval(d)? * ratio.sqrt(),
        })
    }

    /// Level of the unit character `x ↦ δ(1/x, x)`.
    fn asymptotic_level(&self) -> u32 {
        match self {
            Self::Principal { chi1, chi2 } => chi1.inv().mul(chi2).conductor(),
            _ => 0,
        }
    }

    /// Level of the unit character `u ↦ δ(1, u)`.
    fn right_level(&self) -> u32 {
        match self {
            Self::Principal { chi2, .. } => chi2.conductor(),
            _ => 0,
        }
    }
}

/// Newform of the induced model, evaluated through the corner decomposition.
pub fn eval_newform_induced(rep: &InducedRepSpec, g: &Mat2) -> Result<Complex64> {
    let c = rep.conductor();
    let dec = decompose_corner(g, c)?;
    let base = rep.borel_char(&dec.a, &dec.d)?;
    Ok(match rep {
        InducedRepSpec::Principal { .. } if c > 0 && dec.j > 0 => Complex64::new(0.0, 0.0),
        InducedRepSpec::Steinberg { .. } if dec.j == 1 => base * -(rep.prime() as f64),
        _ => base,
    })
}

/// `g_{y,j,l} = a(y) γ_j a(p^{-l})`.
pub fn whittaker_point(y: &PadicScalar, j: u32, l: u32) -> Result<Mat2> {
    let p = y.prime();
    let g = Mat2::a_of(*y).mul(&Mat2::gamma(p, j as i64))?;
    Ok(g.mul(&Mat2::a_of(PadicScalar::uniformizer_pow(p, -(l as i64))))?)
}

/// Whittaker function of the translate `π(a(p^{-l})) φ` against `ψ` or `ψ̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhittakerEvaluator {
    pub rep: InducedRepSpec,
    pub conj_psi: bool,
    pub l: u32,
}

fn val_ratio(x: &PadicScalar, y: &PadicScalar, det: i64) -> Option<i64> {
    Some(x.val()? + y.val()? - det)
}

impl WhittakerEvaluator {
    pub fn new(rep: InducedRepSpec, conj_psi: bool, l: u32) -> Self {
        Self { rep, conj_psi, l }
    }

    /// The contragredient evaluator: inverse characters against the conjugate `ψ`.
    pub fn dual(&self) -> Self {
        Self { rep: self.rep.inverse(), conj_psi: !self.conj_psi, l: self.l }
    }

    fn prefactor(&self) -> f64 {
        let q = self.rep.prime() as f64;
        zeta(q, 2.0).sqrt() / zeta(q, 1.0)
    }

    /// `ψ^{∓1}(x)` appearing in the defining integral.
    fn kernel(&self, x: &PadicScalar) -> Result<Complex64> {
        let t = eval_psi(x)?;
        Ok(if self.conj_psi { t } else { t.neg() }.to_complex())
    }

    /// Brute-force value at `a(y) γ_j` after translating by `a(p^{-l})`.
    pub fn bruteforce(&self, y: &PadicScalar, j: u32) -> Result<Complex64> {
        self.bruteforce_at(&whittaker_point(y, j, self.l)?)
    }

    /// Brute-force value of the newform's Whittaker function at `g0`.
    pub fn bruteforce_at(&self, g0: &Mat2) -> Result<Complex64> {
        let rep = &self.rep;
        let p = rep.prime();
        let c = rep.conductor() as i64;
        let det = g0.det()?;
        let vd = det.val().ok_or(crate::padic::PadicError::Singular)?;
        let (a, b, cc, d) = (&g0.a, &g0.b, &g0.c, &g0.d);
        let max_of = |terms: &[Option<i64>]| terms.iter().flatten().copied().max();

        let k0 = max_of(&[
            val_ratio(d, d, vd).map(|v| -v),
            val_ratio(cc, cc, vd).map(|v| c - v),
            val_ratio(cc, d, vd).map(|v| c - v),
        ])
        .expect("invertible matrix has a nonzero bottom row");
        if k0 < 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let t0 = max_of(&[
            val_ratio(b, b, vd).map(|v| -v),
            val_ratio(a, a, vd).map(|v| c - v),
            val_ratio(a, b, vd).map(|v| c - v),
        ])
        .expect("invertible matrix has a nonzero top row");
        let nr = max_of(&[
            Some(1),
            Some(rep.right_level() as i64),
            val_ratio(d, a, vd).map(|v| -v),
            val_ratio(d, b, vd).map(|v| -v),
            val_ratio(cc, a, vd).map(|v| c - v),
            val_ratio(cc, b, vd).map(|v| c - v),
        ])
        .unwrap();

        let prec = max_precision(p);
        let q = p as f64;
        let w = Mat2::w(p);
        let f = |x: &PadicScalar| -> Result<Complex64> { eval_newform_induced(rep, &w.mul(&Mat2::n_of(*x))?.mul(g0)?) };

        let mut total = f(&PadicScalar::zero(p))? * q.powi(-k0 as i32);

        let asym_top = (-t0).min(k0 - 1);
        let asym_bottom = -(rep.asymptotic_level().max(1) as i64);
        if asym_top >= asym_bottom {
            let at_g0 = eval_newform_induced(rep, g0)?;
            if at_g0.norm() > 0.0 {
                let lvl = rep.asymptotic_level() as i64;
                for s in asym_bottom..=asym_top {
                    let depth = lvl.max(-s).max(1) as u32;
                    let mut shell = Complex64::new(0.0, 0.0);
                    for u in units_mod(p, depth) {
                        let x = PadicScalar::from_parts(p, s, u as i128, prec);
                        let xi = x.inv()?;
                        shell += rep.borel_char(&xi, &x)? * self.kernel(&x)?;
                    }
                    total += shell * at_g0 * q.powi(-(s as i32) - depth as i32);
                }
            }
        }

        for s in (-t0 + 1)..k0 {
            let kappa = (s + nr).min(k0);
            if kappa < 0 {
                continue;
            }
            let depth = (kappa - s) as u32;
            let mut shell = Complex64::new(0.0, 0.0);
            for u in units_mod(p, depth) {
                let x = PadicScalar::from_parts(p, s, u as i128, prec);
                let fx = f(&x)?;
                if fx.norm() > 0.0 {
                    shell += fx * self.kernel(&x)?;
                }
            }
            total += shell * q.powi(-kappa as i32);
        }
        Ok(total * self.prefactor())
    }

    /// Piecewise closed form at `a(y) γ_j` after translating by `a(p^{-l})`.
    pub fn closed(&self, y: &PadicScalar, j: u32) -> Result<Complex64> {
        let p = self.rep.prime();
        let q = p as f64;
        let vy = y.val().ok_or(crate::padic::PadicError::DivisionByZero)?;
        let zero = Complex64::new(0.0, 0.0);
        let s_psi = |x: &PadicScalar| -> Result<Complex64> {
            let t = eval_psi(x)?;
            Ok(if self.conj_psi { t.neg() } else { t }.to_complex())
        };
        let l = self.l as i64;
        let ji = j as i64;
        let pw = |k: i64| PadicScalar::uniformizer_pow(p, k);
        match self.rep {
            InducedRepSpec::Principal { chi1, chi2 } => {
                if self.l != 0 {
                    return Err(Error::OutOfRange("principal series values are tabulated for l = 0".into()));
                }
                let m = chi1.conductor() as i64;
                let k = self.prefactor();
                if ji >= m {
                    return Ok(if vy >= 0 { chi2.eval(y)? * y.abs().sqrt() * k } else { zero });
                }
                if ji == 0 {
                    if vy < -m {
                        return Ok(zero);
                    }
                    let psi_eps = AdditiveCharacter { p, conjugate: !self.conj_psi };
                    let eps = epsilon_factor(1.0, &chi1.mul(&chi2.inv()), &psi_eps)?;
                    return Ok(chi1.eval(y)? * y.abs().sqrt() * s_psi(y)? * eps * k);
                }
                if vy != ji - m {
                    return Ok(zero);
                }
                let mix = chi1.inv().mul(&chi2);
                let depth = (m - ji) as u32;
                let mut sum = zero;
                for x in 0..pow(p, depth) {
                    let arg = PadicScalar::from_int(p, 1 + (x * pow(p, j)) as i64);
                    let xy = PadicScalar::from_int(p, x as i64).mul(y).neg();
                    sum += mix.eval(&arg)? * s_psi(&xy)?;
                }
                Ok(chi2.eval(y)? * y.abs().sqrt() * sum * q.powi(-(depth as i32)) * k)
            }
            InducedRepSpec::Steinberg { omega3 } => {
                let k = zeta(q, 2.0).powf(-0.5);
                let shifted = y.mul(&pw(-l));
                if ji <= l {
                    if vy < 2 * ji - l - 1 {
                        return Ok(zero);
                    }
                    let mag = y.mul(&pw(l - 2 * ji + 1)).abs();
                    Ok(-k * s_psi(&y.mul(&pw(-ji)))? * omega3.eval(&shifted)? * mag)
                } else {
                    if vy < l {
                        return Ok(zero);
                    }
                    Ok(k * omega3.eval(&shifted)? * shifted.abs())
                }
            }
            InducedRepSpec::Spherical { omega3 } => {
                let k = zeta(q, 2.0).sqrt() / zeta(q, 1.0) / omega3.mul(&omega3).l_factor(1.0);
                let divisor_sum = |n: i64| -> Complex64 {
                    (0..=n).map(|i| omega3.z.powi(i as i32) * omega3.z.powi(-((n - i) as i32))).sum()
                };
                if ji <= l {
                    if vy < 2 * ji - l {
                        return Ok(zero);
                    }
                    let mag = y.mul(&pw(l - 2 * ji)).abs().sqrt();
                    Ok(k * s_psi(&y.mul(&pw(-ji)))? * mag * divisor_sum(vy + l - 2 * ji))
                } else {
                    if vy < l {
                        return Ok(zero);
                    }
                    Ok(k * y.mul(&pw(-l)).abs().sqrt() * divisor_sum(vy - l))
                }
            }
        }
    }
}
