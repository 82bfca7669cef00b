//! Fundamental discriminants and the global constant assembled from local factors.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::triple::closed_form_exact;

pub type Rational = Ratio<i128>;

/// Local type of the third representation at a prime dividing `|D|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalCase {
    Special,
    Spherical,
    Supercuspidal { c: u32, unramified: bool },
}

/// A validated global datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalInput {
    pub d: i64,
    pub q1: i64,
    pub unramified2: bool,
}

impl GlobalInput {
    pub fn new(d: i64, q1: i64, unramified2: bool) -> Result<Self> {
        if !is_fundamental(d) {
            return Err(Error::NotFundamental(d));
        }
        let q = d.abs();
        if q1 <= 0 || q % q1 != 0 {
            return Err(Error::InvalidInput(format!("{q1} does not divide {q}")));
        }
        for p in prime_factors(q1) {
            if p != 2 && q1 % (p * p) == 0 {
                return Err(Error::InvalidInput(format!("{p}² divides q1 = {q1}")));
            }
        }
        Ok(Self { d, q1, unramified2 })
    }

    pub fn q(&self) -> i64 {
        self.d.abs()
    }

    /// Local case at each prime `p | q` with `m_p = ord_p(D)`.
    pub fn local_cases(&self) -> Vec<(i64, u32, LocalCase)> {
        prime_factors(self.q())
            .into_iter()
            .map(|p| {
                let m = ord(self.q(), p);
                let e = ord(self.q1, p);
                let case = match e {
                    0 => LocalCase::Spherical,
                    1 => LocalCase::Special,
                    c => LocalCase::Supercuspidal { c, unramified: self.unramified2 },
                };
                (p, m, case)
            })
            .collect()
    }
}

fn ord(mut n: i64, p: i64) -> u32 {
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

pub fn prime_factors(mut n: i64) -> Vec<i64> {
    n = n.abs();
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn squarefree(n: i64) -> bool {
    let n = n.abs();
    prime_factors(n).iter().all(|p| n % (p * p) != 0)
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    if d.rem_euclid(4) == 1 {
        return squarefree(d);
    }
    if d % 4 == 0 {
        let e = d / 4;
        return matches!(e.rem_euclid(4), 2 | 3) && squarefree(e);
    }
    false
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker_symbol(a: i64, n: i64) -> i64 {
    if n == 0 {
        return (a.abs() == 1) as i64;
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0,
        }
    }
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// `ν_n = n ∏_{p | n} (1 + 1/p)`.
pub fn nu(n: i64) -> Rational {
    prime_factors(n)
        .into_iter()
        .fold(Rational::from_integer(n as i128), |acc, p| acc * Rational::new(p as i128 + 1, p as i128))
}

/// The theorem's coefficient `ν_{q1}/(8 q q1 ν_q)`, times 3/2 when `4 | q1` without the flag.
pub fn global_constant(g: &GlobalInput) -> Rational {
    let q = g.q() as i128;
    let base = nu(g.q1) / (Rational::from_integer(8 * q * g.q1 as i128) * nu(g.q()));
    if g.q1 % 4 == 0 && !g.unramified2 {
        base * Rational::new(3, 2)
    } else {
        base
    }
}

/// `(1/(8 ν_q)) ∏_{p | q} I′_p` with each `I′_p` from the local closed forms.
pub fn assemble_from_locals(g: &GlobalInput) -> Rational {
    let product = g
        .local_cases()
        .into_iter()
        .fold(Rational::from_integer(1), |acc, (p, m, case)| acc * closed_form_exact(p, m, case));
    product / (Rational::from_integer(8) * nu(g.q()))
}

/// Every valid `(D, q1, flag)` with `lo ≤ D < 0`.
pub fn enumerate_inputs(lo: i64) -> Vec<GlobalInput> {
    let mut out = Vec::new();
    for d in lo..0 {
        if !is_fundamental(d) {
            continue;
        }
        let q = d.abs();
        for q1 in (1..=q).filter(|q1| q % q1 == 0) {
            let flags: &[bool] = if q1 % 4 == 0 { &[false, true] } else { &[false] };
            for &flag in flags {
                if let Ok(g) = GlobalInput::new(d, q1, flag) {
                    out.push(g);
                }
            }
        }
    }
    out
}
