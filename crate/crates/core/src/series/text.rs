//! Text syntax for exact series, e.g. `3*pi_a^-2*pi_b + 7 + 2*t*pi_a^(1/2)`.

use super::{Exps, LaurentSeries, SeriesRing};
use crate::coeff::{Coeff, CoeffRing};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use std::sync::Arc;

/// Names of the unramified generators: `t` when exactly one factor has
/// degree > 1, otherwise `t_<label>` for each such factor.
pub(crate) fn generator_names(ring: &SeriesRing) -> Vec<Option<String>> {
    let cr = ring.coeffs();
    let nontrivial: Vec<usize> = (0..cr.num_factors()).filter(|&a| cr.degrees()[a] > 1).collect();
    (0..cr.num_factors())
        .map(|a| {
            if cr.degrees()[a] == 1 {
                None
            } else if nontrivial.len() == 1 {
                Some("t".to_string())
            } else {
                Some(format!("t_{}", ring.labels()[a]))
            }
        })
        .collect()
}

fn format_exponent(num: i64, den: i64) -> Option<String> {
    let g = num.gcd(&den);
    let (n, d) = (num / g, den / g);
    match (n, d) {
        (0, _) => None,
        (1, 1) => Some(String::new()),
        (_, 1) => Some(format!("^{n}")),
        _ => Some(format!("^({n}/{d})")),
    }
}

/// Canonical rendering of the terms of a coefficient; used for both series
/// and plain coefficients.
pub(crate) fn format_terms(ring: &SeriesRing, terms: &[(Exps, Coeff)]) -> String {
    let cr = ring.coeffs();
    let names = generator_names(ring);
    let mut pieces = Vec::new();
    for (e, c) in terms {
        for (i, &v) in c.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let mut factors = Vec::new();
            for (a, &k) in cr.basis_exponents(i).iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = names[a].as_ref().expect("nonzero exponent on nontrivial factor");
                factors.push(if k == 1 { name.clone() } else { format!("{name}^{k}") });
            }
            for (a, &x) in e.iter().enumerate() {
                if let Some(s) = format_exponent(x, ring.denom()) {
                    factors.push(format!("pi_{}{}", ring.labels()[a], s));
                }
            }
            if v != 1 || factors.is_empty() {
                factors.insert(0, v.to_string());
            }
            pieces.push(factors.join("*"));
        }
    }
    if pieces.is_empty() {
        "0".to_string()
    } else {
        pieces.join(" + ")
    }
}

pub(crate) fn format_series(s: &LaurentSeries) -> String {
    let terms: Vec<(Exps, Coeff)> = s.terms().iter().map(|(e, c)| (e.clone(), c.clone())).collect();
    format_terms(s.ring(), &terms)
}

/// Render a single coefficient in the same syntax (no π factors).
pub fn format_coeff(ring: &SeriesRing, c: &Coeff) -> String {
    format_terms(ring, &[(ring.zero_exps(), c.clone())])
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }
    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at position {}", self.pos)))
    }
    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(txt.parse().unwrap())
    }
    fn small_int(&mut self) -> Result<i64> {
        let neg = self.eat(b'-');
        let v: i64 = self
            .integer()?
            .try_into()
            .map_err(|_| Error::Parse("exponent too large".into()))?;
        Ok(if neg { -v } else { v })
    }
    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }
    /// Exponent as a rational (num, den).
    fn exponent(&mut self) -> Result<(i64, i64)> {
        if self.eat(b'(') {
            let n = self.small_int()?;
            let d = if self.eat(b'/') { self.small_int()? } else { 1 };
            if !self.eat(b')') {
                return self.err("expected ')'");
            }
            if d <= 0 {
                return self.err("denominator must be positive");
            }
            Ok((n, d))
        } else {
            Ok((self.small_int()?, 1))
        }
    }
}

fn t_power(cr: &CoeffRing, factor: usize, k: u64) -> Coeff {
    let mut exps = vec![0usize; cr.num_factors()];
    exps[factor] = 1;
    let theta = cr.basis(cr.basis_index(&exps));
    cr.pow(&theta, k)
}

pub(crate) fn parse_series(ring: &Arc<SeriesRing>, text: &str) -> Result<LaurentSeries> {
    let cr = ring.coeffs().clone();
    let z = cr.zpm();
    let names = generator_names(ring);
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<(Exps, Coeff)> = Vec::new();
    let mut negate = p.eat(b'-');
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    loop {
        let mut coeff = cr.one();
        let mut exps = ring.zero_exps();
        loop {
            match p.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let v = z.from_bigint(&p.integer()?);
                    coeff = cr.scale(&coeff, v);
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let id = p.ident();
                    if let Some(label) = id.strip_prefix("pi_") {
                        let a = ring.index_of(label).map_err(|e| Error::Parse(e.to_string()))?;
                        let (n, d) = if p.eat(b'^') { p.exponent()? } else { (1, 1) };
                        if ring.denom() % d != 0 {
                            return p.err("exponent denominator not allowed in this mode");
                        }
                        exps[a] += n * (ring.denom() / d);
                    } else if id == "t" || id.starts_with("t_") {
                        let a = names
                            .iter()
                            .position(|nm| nm.as_deref() == Some(id.as_str()))
                            .ok_or_else(|| Error::Parse(format!("unknown generator {id}")))?;
                        let k = if p.eat(b'^') { p.small_int()? } else { 1 };
                        if k < 0 {
                            return p.err("negative power of a generator");
                        }
                        coeff = cr.mul(&coeff, &t_power(&cr, a, k as u64));
                    } else {
                        return Err(Error::Parse(format!("unknown symbol {id}")));
                    }
                }
                _ => return p.err("expected a factor"),
            }
            if !p.eat(b'*') {
                break;
            }
        }
        if negate {
            coeff = cr.neg(&coeff);
        }
        terms.push((exps, coeff));
        if p.eat(b'+') {
            negate = false;
        } else if p.eat(b'-') {
            negate = true;
        } else if p.peek().is_none() {
            break;
        } else {
            return p.err("unexpected character");
        }
    }
    Ok(LaurentSeries::from_terms(ring, terms))
}

/// Parse a coefficient (an expression without π factors).
pub fn parse_coeff(ring: &Arc<SeriesRing>, text: &str) -> Result<Coeff> {
    let s = parse_series(ring, text)?;
    if s.terms().keys().any(|e| e.iter().any(|&x| x != 0)) {
        return Err(Error::Parse(format!("{text:?} is not a constant")));
    }
    Ok(s.coeff(&ring.zero_exps()))
}
