//! Gauss norms and the perfectoid norm, reported as exact values of −log_p.

use super::{LaurentSeries, Mode};
use crate::coeff::Valuation;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Ramification index of the base; only unramified bases are supported.
const E: i64 = 1;

/// −log_p of a norm. The zero series has norm 0, i.e. log_p |0| = −∞, which
/// is recorded as `NegInfinite` and compares above every finite value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogNorm {
    Finite(BigRational),
    NegInfinite,
}

impl LogNorm {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            LogNorm::Finite(v) => Some(v),
            LogNorm::NegInfinite => None,
        }
    }

    /// Value for a product of norms.
    pub fn plus(&self, other: &LogNorm) -> LogNorm {
        match (self, other) {
            (LogNorm::Finite(a), LogNorm::Finite(b)) => LogNorm::Finite(a + b),
            _ => LogNorm::NegInfinite,
        }
    }

    fn min_with(self, v: BigRational) -> LogNorm {
        match self {
            LogNorm::NegInfinite => LogNorm::Finite(v),
            LogNorm::Finite(a) => LogNorm::Finite(if v < a { v } else { a }),
        }
    }
}

impl PartialOrd for LogNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogNorm {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogNorm::Finite(a), LogNorm::Finite(b)) => a.cmp(b),
            (LogNorm::Finite(_), LogNorm::NegInfinite) => Ordering::Less,
            (LogNorm::NegInfinite, LogNorm::Finite(_)) => Ordering::Greater,
            (LogNorm::NegInfinite, LogNorm::NegInfinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for LogNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogNorm::Finite(v) => write!(f, "{v}"),
            LogNorm::NegInfinite => write!(f, "NEG_INFINITE"),
        }
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl LaurentSeries {
    /// Exponent of variable j of a monomial as a rational number.
    fn exponent(&self, raw: i64) -> BigRational {
        rat(raw, self.ring().denom())
    }

    fn coeff_valuation(&self, c: &[u64]) -> BigRational {
        match self.ring().coeffs().valuation(c) {
            Valuation::Finite(v) => rat(v as i64, 1),
            Valuation::Infinite => unreachable!("stored coefficients are nonzero"),
        }
    }

    fn slope(&self) -> BigRational {
        let p = self.ring().p() as i64;
        rat(p, E * (p - 1))
    }

    /// −log_p |f|_{j,r} = min over monomials of r·p·i_j / (e(p−1)) + v_p(a).
    pub fn gauss_norm_jr(&self, j: usize, r: &BigRational) -> LogNorm {
        let s = self.slope() * r;
        self.terms().iter().fold(LogNorm::NegInfinite, |acc, (e, c)| {
            acc.min_with(&s * self.exponent(e[j]) + self.coeff_valuation(c))
        })
    }

    /// −log_p |f|_r, using min_j i_j per monomial (equivalently the maximum of
    /// the |·|_{j,r}).
    pub fn gauss_norm_r(&self, r: &BigRational) -> LogNorm {
        let s = self.slope() * r;
        self.terms().iter().fold(LogNorm::NegInfinite, |acc, (e, c)| {
            let mn = e.iter().copied().min().unwrap_or(0);
            acc.min_with(&s * self.exponent(mn) + self.coeff_valuation(c))
        })
    }

    fn require_perfect(&self) -> Result<()> {
        match self.ring().mode() {
            Mode::Perfect { .. } => Ok(()),
            Mode::Integral => Err(Error::ModeMismatch("perfectoid norm needs perfect mode".into())),
        }
    }

    /// −log_p |f|'_j = min over nonzero monomials of p·i_j / (e(p−1)).
    pub fn perfectoid_norm_j(&self, j: usize) -> Result<LogNorm> {
        self.require_perfect()?;
        let s = self.slope();
        Ok(self
            .terms()
            .keys()
            .fold(LogNorm::NegInfinite, |acc, e| acc.min_with(&s * self.exponent(e[j]))))
    }

    /// −log_p |f|' where |f|' = max_j |f|'_j.
    pub fn perfectoid_norm(&self) -> Result<LogNorm> {
        let mut out = LogNorm::NegInfinite;
        for j in 0..self.ring().nvars() {
            let v = self.perfectoid_norm_j(j)?;
            if v < out {
                out = v;
            }
        }
        Ok(out)
    }

    /// C(Y) = p/(p−1) · max over the support of |min_j i_j|; bounds
    /// |log_p |Y|_r| by r·C(Y) when Y is nonzero mod p.
    pub fn norm_exponent_bound(&self) -> BigRational {
        let mut best = BigRational::zero();
        for e in self.terms().keys() {
            let mn = self.exponent(e.iter().copied().min().unwrap_or(0)).abs();
            if mn > best {
                best = mn;
            }
        }
        self.slope() * best
    }
}
