//! Truncated arithmetic in Q_p and the 2×2 matrices acting on it.
//!
//! A nonzero scalar is `p^v · u` where `u` is a unit known modulo `p^prec`.
//! Zero is a separate variant with infinite valuation; any sum whose known
//! digits cancel completely is reported as zero.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

/// Errors raised by p-adic arithmetic and matrix decompositions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("precision {got} fell below the floor {floor}")]
    PrecisionUnderflow { got: u32, floor: u32 },
    #[error("need {need} known digits, have {have}")]
    InsufficientPrecision { need: i64, have: i64 },
    #[error("mixed primes {0} and {1}")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not a supported prime")]
    BadPrime(u64),
    #[error("matrix is not invertible")]
    Singular,
}

pub type Result<T> = std::result::Result<T, PadicError>;

static PRECISION_FLOOR: AtomicU32 = AtomicU32::new(8);

/// Sets the minimum relative precision an addition may produce.
pub fn set_precision_floor(floor: u32) {
    PRECISION_FLOOR.store(floor.max(1), Ordering::Relaxed);
}

pub fn precision_floor() -> u32 {
    PRECISION_FLOOR.load(Ordering::Relaxed)
}

/// Largest `k` with `p^k < 2^62`, so products of residues fit in `u128`.
pub fn max_precision(p: u64) -> u32 {
    let mut k = 0;
    let mut acc: u64 = 1;
    while let Some(next) = acc.checked_mul(p) {
        if next >= 1 << 62 {
            break;
        }
        acc = next;
        k += 1;
    }
    k
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn pow(p: u64, k: u32) -> u64 {
    p.pow(k)
}

/// p-adic valuation of a nonzero integer.
pub fn ord(p: u64, mut n: i128) -> u32 {
    assert!(n != 0, "ord of zero");
    let mut k = 0;
    while n % p as i128 == 0 {
        n /= p as i128;
        k += 1;
    }
    k
}

fn inv_mod(a: u64, modulus: u64) -> u64 {
    let (mut r0, mut r1) = (modulus as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(modulus as i128) as u64
}

fn mul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 * b as u128) % modulus as u128) as u64
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Repr {
    Zero,
    Unit { v: i64, u: u64, prec: u32 },
}

/// Element of Q_p at finite relative precision.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    repr: Repr,
}

impl PadicScalar {
    pub fn zero(p: u64) -> Self {
        Self { p, repr: Repr::Zero }
    }

    pub fn one(p: u64) -> Self {
        Self::uniformizer_pow(p, 0)
    }

    /// `p^k`, exact at maximal precision.
    pub fn uniformizer_pow(p: u64, k: i64) -> Self {
        Self { p, repr: Repr::Unit { v: k, u: 1, prec: max_precision(p) } }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::from_i128(p, n as i128)
    }

    pub fn from_i128(p: u64, n: i128) -> Self {
        if n == 0 {
            return Self::zero(p);
        }
        let v = ord(p, n);
        let prec = max_precision(p);
        let modulus = pow(p, prec) as i128;
        let u = (n / (p as i128).pow(v)).rem_euclid(modulus) as u64;
        Self { p, repr: Repr::Unit { v: v as i64, u, prec } }
    }

    /// `num / den` for integers with `den ≠ 0`.
    pub fn from_ratio(p: u64, num: i64, den: i64) -> Result<Self> {
        Self::from_int(p, num).div(&Self::from_int(p, den))
    }

    /// `p^v · u` with `u` an integer prime to `p`, read modulo `p^prec`.
    pub fn from_parts(p: u64, v: i64, u: i128, prec: u32) -> Self {
        assert!(u % p as i128 != 0, "unit part divisible by p");
        let prec = prec.min(max_precision(p)).max(1);
        let u = u.rem_euclid(pow(p, prec) as i128) as u64;
        Self { p, repr: Repr::Unit { v, u, prec } }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// Valuation, `None` standing for +∞.
    pub fn val(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero => None,
            Repr::Unit { v, .. } => Some(v),
        }
    }

    /// Valuation with zero mapped to `i64::MAX`.
    pub fn val_or_max(&self) -> i64 {
        self.val().unwrap_or(i64::MAX)
    }

    /// Relative precision; `u32::MAX` for zero.
    pub fn precision(&self) -> u32 {
        match self.repr {
            Repr::Zero => u32::MAX,
            Repr::Unit { prec, .. } => prec,
        }
    }

    /// Unit part reduced modulo `p^k`.
    pub fn unit_residue(&self, k: u32) -> Result<u64> {
        match self.repr {
            Repr::Zero => Err(PadicError::DivisionByZero),
            Repr::Unit { u, prec, .. } => {
                if k > prec {
                    return Err(PadicError::InsufficientPrecision { need: k as i64, have: prec as i64 });
                }
                Ok(u % pow(self.p, k))
            }
        }
    }

    /// The unit `x / p^v(x)`.
    pub fn unit_part(&self) -> Result<Self> {
        match self.repr {
            Repr::Zero => Err(PadicError::DivisionByZero),
            Repr::Unit { u, prec, .. } => Ok(Self { p: self.p, repr: Repr::Unit { v: 0, u, prec } }),
        }
    }

    /// `|x| = p^{-v(x)}`.
    pub fn abs(&self) -> f64 {
        match self.repr {
            Repr::Zero => 0.0,
            Repr::Unit { v, .. } => (self.p as f64).powi(-v as i32),
        }
    }

    /// Principal part `x mod Z_p` as `(numerator, p^k)`, zero when `x ∈ Z_p`.
    pub fn principal_part(&self) -> Result<(u64, u64)> {
        match self.repr {
            Repr::Zero => Ok((0, 1)),
            Repr::Unit { v, .. } if v >= 0 => Ok((0, 1)),
            Repr::Unit { v, u, prec } => {
                let k = (-v) as u32;
                if k > prec {
                    return Err(PadicError::InsufficientPrecision { need: k as i64, have: prec as i64 });
                }
                let modulus = pow(self.p, k);
                Ok((u % modulus, modulus))
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(PadicError::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        match self.repr {
            Repr::Zero => *self,
            Repr::Unit { v, u, prec } => {
                let modulus = pow(self.p, prec);
                Self { p: self.p, repr: Repr::Unit { v, u: (modulus - u) % modulus, prec } }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self.repr, other.repr) {
            (Repr::Unit { v: v1, u: u1, prec: n1 }, Repr::Unit { v: v2, u: u2, prec: n2 }) => {
                let prec = n1.min(n2);
                let u = mul_mod(u1, u2, pow(self.p, prec));
                Self { p: self.p, repr: Repr::Unit { v: v1 + v2, u, prec } }
            }
            _ => Self::zero(self.p),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self.repr {
            Repr::Zero => Err(PadicError::DivisionByZero),
            Repr::Unit { v, u, prec } => {
                let u = inv_mod(u, pow(self.p, prec));
                Ok(Self { p: self.p, repr: Repr::Unit { v: -v, u, prec } })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul(&other.inv()?))
    }

    /// Sum; fails if the surviving relative precision drops below the floor.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (x, y) = match (self.repr, other.repr) {
            (Repr::Zero, _) => return Ok(*other),
            (_, Repr::Zero) => return Ok(*self),
            (a @ Repr::Unit { v: va, .. }, b @ Repr::Unit { v: vb, .. }) => {
                if va <= vb {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        let (Repr::Unit { v: va, u: ua, prec: na }, Repr::Unit { v: vb, u: ub, prec: nb }) = (x, y) else {
            unreachable!()
        };
        let abs = (va + na as i64).min(vb + nb as i64);
        let rel = (abs - va) as u32;
        let modulus = pow(self.p, rel);
        let sum = if vb >= abs {
            ua % modulus
        } else {
            let shift = pow(self.p, (vb - va) as u32);
            ((ua as u128 + mul_mod(ub % modulus, shift, modulus) as u128) % modulus as u128) as u64
        };
        if sum == 0 {
            return Ok(Self::zero(self.p));
        }
        let k = ord(self.p, sum as i128);
        let prec = rel - k;
        let floor = precision_floor();
        if prec < floor {
            return Err(PadicError::PrecisionUnderflow { got: prec, floor });
        }
        let u = sum / pow(self.p, k);
        Ok(Self { p: self.p, repr: Repr::Unit { v: va + k as i64, u, prec } })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// True when `self ∈ p^k Z_p`, certified by the known digits.
    pub fn in_ideal(&self, k: i64) -> bool {
        self.val().is_none_or(|v| v >= k)
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Zero => write!(f, "0_{}", self.p),
            Repr::Unit { v, u, prec } => write!(f, "{}^{}·{} (mod {}^{})", self.p, v, u, self.p, prec),
        }
    }
}

/// Element of GL(2, Q_p) written `(a b; c d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mat2 {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub c: PadicScalar,
    pub d: PadicScalar,
}

impl Mat2 {
    pub fn new(a: PadicScalar, b: PadicScalar, c: PadicScalar, d: PadicScalar) -> Self {
        Self { a, b, c, d }
    }

    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    pub fn identity(p: u64) -> Self {
        let (o, z) = (PadicScalar::one(p), PadicScalar::zero(p));
        Self::new(o, z, z, o)
    }

    /// `w = (0 −1; 1 0)`.
    pub fn w(p: u64) -> Self {
        let (o, z) = (PadicScalar::one(p), PadicScalar::zero(p));
        Self::new(z, o.neg(), o, z)
    }

    /// `a(y) = diag(y, 1)`.
    pub fn a_of(y: PadicScalar) -> Self {
        let p = y.prime();
        Self::new(y, PadicScalar::zero(p), PadicScalar::zero(p), PadicScalar::one(p))
    }

    /// `n(x) = (1 x; 0 1)`.
    pub fn n_of(x: PadicScalar) -> Self {
        let p = x.prime();
        Self::new(PadicScalar::one(p), x, PadicScalar::zero(p), PadicScalar::one(p))
    }

    /// `(1 0; t 1)`.
    pub fn lower(t: PadicScalar) -> Self {
        let p = t.prime();
        Self::new(PadicScalar::one(p), PadicScalar::zero(p), t, PadicScalar::one(p))
    }

    /// `γ_j = (1 0; p^j 1)`.
    pub fn gamma(p: u64, j: i64) -> Self {
        Self::lower(PadicScalar::uniformizer_pow(p, j))
    }

    pub fn diag(a: PadicScalar, d: PadicScalar) -> Self {
        let p = a.prime();
        Self::new(a, PadicScalar::zero(p), PadicScalar::zero(p), d)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(Self::new(
            self.a.mul(&o.a).add(&self.b.mul(&o.c))?,
            self.a.mul(&o.b).add(&self.b.mul(&o.d))?,
            self.c.mul(&o.a).add(&self.d.mul(&o.c))?,
            self.c.mul(&o.b).add(&self.d.mul(&o.d))?,
        ))
    }

    pub fn det(&self) -> Result<PadicScalar> {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn inv(&self) -> Result<Self> {
        let det = self.det()?;
        if det.is_zero() {
            return Err(PadicError::Singular);
        }
        let di = det.inv()?;
        Ok(Self::new(self.d.mul(&di), self.b.neg().mul(&di), self.c.neg().mul(&di), self.a.mul(&di)))
    }

    /// Membership in `K1(p^m)`: integral, unit determinant, `c ∈ p^m`, `d ≡ 1 mod p^m`.
    pub fn in_k1(&self, m: u32) -> Result<bool> {
        let m = m as i64;
        if !(self.a.in_ideal(0) && self.b.in_ideal(0) && self.c.in_ideal(m) && self.d.in_ideal(0)) {
            return Ok(false);
        }
        if self.det()?.val() != Some(0) {
            return Ok(false);
        }
        let dm1 = self.d.sub(&PadicScalar::one(self.prime()))?;
        Ok(dm1.in_ideal(m))
    }
}

/// Output of [`decompose_corner`]: `g = (a b; 0 d) · γ_j · k`.
#[derive(Clone, Copy, Debug)]
pub struct CornerDecomposition {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub d: PadicScalar,
    pub j: u32,
    pub k: Mat2,
}

impl CornerDecomposition {
    pub fn borel(&self) -> Mat2 {
        Mat2::new(self.a, self.b, PadicScalar::zero(self.a.prime()), self.d)
    }
}

/// Writes `g = b · γ_j · k` with `b` upper triangular, `j ∈ [0, m]` and `k ∈ K1(p^m)`.
pub fn decompose_corner(g: &Mat2, m: u32) -> Result<CornerDecomposition> {
    let p = g.prime();
    let det = g.det()?;
    if det.is_zero() {
        return Err(PadicError::Singular);
    }
    let (c, d) = (g.c, g.d);
    let one = PadicScalar::one(p);
    let zero = PadicScalar::zero(p);
    let gap = match (c.val(), d.val()) {
        (None, _) => i64::MAX,
        (_, None) => i64::MIN,
        (Some(vc), Some(vd)) => vc - vd,
    };
    let mi = m as i64;
    let (j, k) = if gap <= 0 {
        let t = d.div(&c)?.sub(&one)?;
        (0, Mat2::new(one, t, zero, one))
    } else if gap >= mi || m == 0 {
        let t = c.div(&d)?.sub(&PadicScalar::uniformizer_pow(p, mi))?;
        (m, Mat2::new(one, zero, t, one))
    } else {
        let s = c.div(&d.mul(&PadicScalar::uniformizer_pow(p, gap)))?;
        (gap as u32, Mat2::diag(s, one))
    };
    certify_k1(&k, m)?;
    let gamma_inv = Mat2::lower(PadicScalar::uniformizer_pow(p, j as i64).neg());
    let borel = g.mul(&k.inv()?)?.mul(&gamma_inv)?;
    Ok(CornerDecomposition { a: borel.a, b: borel.b, d: borel.d, j, k })
}

fn certify_k1(k: &Mat2, m: u32) -> Result<()> {
    let mi = m as i64;
    let known = |x: &PadicScalar| x.val().map_or(i64::MAX, |v| v + x.precision() as i64);
    if k.c.val().is_some() && k.c.val_or_max() < mi && known(&k.c) < mi {
        return Err(PadicError::InsufficientPrecision { need: mi, have: known(&k.c) });
    }
    if !k.in_k1(m)? {
        return Err(PadicError::InsufficientPrecision { need: mi, have: known(&k.c) });
    }
    Ok(())
}
