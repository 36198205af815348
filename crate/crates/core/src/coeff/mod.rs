//! Exact arithmetic in Z/p^m and in unramified extensions W(F_{p^f})/p^m.

mod ring;
mod unram;

pub use ring::{Coeff, CoeffRing};
pub use unram::{UnramCoeff, UnramCtx};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// p-adic valuation of an element known modulo p^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    /// The element is zero at the working precision.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "INFINITE"),
        }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The residue ring Z/p^m. Cheap to copy; all ring operations live here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zpm {
    p: u64,
    m: u32,
    q: u64,
}

impl Zpm {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidInput("precision m must be at least 1".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..m {
            q = q
                .checked_mul(p)
                .filter(|&v| v < (1u64 << 62))
                .ok_or_else(|| Error::InvalidInput(format!("{p}^{m} exceeds 2^62")))?;
        }
        Ok(Zpm { p, m, q })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }
    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }
    /// The modulus p^m.
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    pub fn from_bigint(&self, a: &BigInt) -> u64 {
        a.mod_floor(&BigInt::from(self.q)).to_u64().unwrap_or(0)
    }

    /// Signed representative in (-q/2, q/2].
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn valuation(&self, a: u64) -> Valuation {
        if a % self.q == 0 {
            return Valuation::Infinite;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        Valuation::Finite(v)
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (g, x, _) = ext_gcd(a as i128, self.q as i128);
        debug_assert_eq!(g, 1);
        Some(x.rem_euclid(self.q as i128) as u64)
    }

    /// p^k reduced, zero once k ≥ m.
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.m {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// Exact division by p^k of an element known to be divisible by p^k;
    /// the result is meaningful modulo p^(m-k) and returned reduced there.
    pub fn div_p_pow(&self, a: u64, k: u32) -> u64 {
        if k == 0 {
            return a;
        }
        let d = self.p.pow(k);
        debug_assert_eq!(a % d, 0);
        a / d
    }

    pub fn mod_p(&self, a: u64) -> u64 {
        a % self.p
    }

    pub fn elem(&self, value: i64) -> ModInt {
        ModInt {
            ctx: *self,
            value: self.from_i64(value),
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A residue in Z/p^m together with its context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    ctx: Zpm,
    value: u64,
}

impl ModInt {
    pub fn new(ctx: Zpm, value: i64) -> Self {
        ctx.elem(value)
    }
    pub fn value(&self) -> u64 {
        self.value
    }
    pub fn ctx(&self) -> Zpm {
        self.ctx
    }

    fn check(&self, other: &ModInt) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch(format!(
                "Z/{} vs Z/{}",
                self.ctx.q, other.ctx.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ModInt) -> Result<ModInt> {
        self.check(other)?;
        Ok(ModInt {
            ctx: self.ctx,
            value: self.ctx.add(self.value, other.value),
        })
    }
    pub fn sub(&self, other: &ModInt) -> Result<ModInt> {
        self.check(other)?;
        Ok(ModInt {
            ctx: self.ctx,
            value: self.ctx.sub(self.value, other.value),
        })
    }
    pub fn mul(&self, other: &ModInt) -> Result<ModInt> {
        self.check(other)?;
        Ok(ModInt {
            ctx: self.ctx,
            value: self.ctx.mul(self.value, other.value),
        })
    }
    pub fn inv_unit(&self) -> Result<ModInt> {
        let v = self.ctx.inv(self.value).ok_or(Error::NotAUnit)?;
        Ok(ModInt {
            ctx: self.ctx,
            value: v,
        })
    }
    pub fn valuation(&self) -> Valuation {
        self.ctx.valuation(self.value)
    }
}

impl fmt::Display for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Binomial coefficient C(c, j) reduced modulo p^m, for an arbitrary integer c.
///
/// Tracks the p-adic valuation of numerator and denominator separately so that
/// no division by a non-unit ever happens.
pub fn binomial_mod(ctx: &Zpm, c: &BigInt, j: u64) -> u64 {
    if j == 0 {
        return 1 % ctx.q;
    }
    let p = ctx.p;
    let pb = BigInt::from(p);
    let q = BigInt::from(ctx.q);
    let mut val: i64 = 0;
    let mut unit: u64 = 1 % ctx.q;
    for i in 0..j {
        let mut num = c - BigInt::from(i);
        if num.is_zero() {
            return 0;
        }
        while (&num % &pb).is_zero() {
            num /= &pb;
            val += 1;
        }
        let n = num.mod_floor(&q).to_u64().unwrap();
        unit = ctx.mul(unit, n);
        let mut den = i + 1;
        while den % p == 0 {
            den /= p;
            val -= 1;
        }
        unit = ctx.mul(unit, ctx.inv(den % ctx.q).expect("unit denominator"));
    }
    debug_assert!(val >= 0);
    if val >= ctx.m as i64 {
        0
    } else {
        ctx.mul(unit, ctx.p_pow(val as u32))
    }
}

/// Incremental binomial table C(c, 0..=n) mod p^m. Avoids the quadratic cost of
/// recomputing each coefficient from scratch.
pub fn binomial_table(ctx: &Zpm, c: &BigInt, n: usize) -> Vec<u64> {
    let p = ctx.p;
    let pb = BigInt::from(p);
    let q = BigInt::from(ctx.q);
    let mut out = Vec::with_capacity(n + 1);
    out.push(1 % ctx.q);
    let mut val: i64 = 0;
    let mut unit: u64 = 1 % ctx.q;
    let mut dead = false;
    for i in 0..n as u64 {
        if dead {
            out.push(0);
            continue;
        }
        let mut num = c - BigInt::from(i);
        if num.is_zero() {
            dead = true;
            out.push(0);
            continue;
        }
        while (&num % &pb).is_zero() {
            num /= &pb;
            val += 1;
        }
        if num.is_negative() {
            num = num.mod_floor(&q);
        }
        unit = ctx.mul(unit, (num % &q).to_u64().unwrap());
        let mut den = i + 1;
        while den % p == 0 {
            den /= p;
            val -= 1;
        }
        unit = ctx.mul(unit, ctx.inv(den % ctx.q).expect("unit denominator"));
        out.push(if val >= ctx.m as i64 {
            0
        } else {
            ctx.mul(unit, ctx.p_pow(val as u32))
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zpm_examples() {
        let z = Zpm::new(3, 2).unwrap();
        assert_eq!(z.add(7, 5), 3);
        assert_eq!(z.mul(2, 5), 1);
        assert_eq!(z.inv(2), Some(5));
        assert_eq!(z.inv(3), None);
        assert_eq!(z.valuation(6), Valuation::Finite(1));
        assert_eq!(z.valuation(0), Valuation::Infinite);
        assert!(Zpm::new(4, 1).is_err());
    }

    #[test]
    fn binomials_match_direct() {
        let z = Zpm::new(2, 3).unwrap();
        for c in -7i64..12 {
            let t = binomial_table(&z, &BigInt::from(c), 9);
            for (j, &v) in t.iter().enumerate() {
                assert_eq!(v, binomial_mod(&z, &BigInt::from(c), j as u64));
                // direct rational evaluation
                let mut num = BigInt::from(1);
                let mut den = BigInt::from(1);
                for i in 0..j as i64 {
                    num *= c - i;
                    den *= i + 1;
                }
                assert_eq!(v, z.from_bigint(&(num / den)));
            }
        }
    }
}
