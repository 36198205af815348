//! Univariate substitution tables: images of π^k under φ, γ_c and ψ as
//! Laurent polynomials over Z/p^m.

use crate::coeff::{binomial_table, Zpm};
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// Sparse univariate Laurent polynomial over Z/p^m.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    pub terms: BTreeMap<i64, u64>,
}

impl UniPoly {
    pub fn monomial(k: i64, c: u64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(k, c);
        }
        UniPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, z: &Zpm, k: i64, c: u64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(k).or_insert(0);
        *e = z.add(*e, c);
        if *e == 0 {
            self.terms.remove(&k);
        }
    }

    pub fn add_scaled(&mut self, z: &Zpm, other: &UniPoly, c: u64, shift: i64) {
        for (&k, &v) in &other.terms {
            self.add_term(z, k + shift, z.mul(v, c));
        }
    }

    /// Product, dropping exponents above `upto` when given.
    pub fn mul(&self, z: &Zpm, other: &UniPoly, upto: Option<i64>) -> UniPoly {
        let mut out = UniPoly::default();
        for (&a, &x) in &self.terms {
            for (&b, &y) in &other.terms {
                if upto.is_some_and(|u| a + b > u) {
                    break;
                }
                out.add_term(z, a + b, z.mul(x, y));
            }
        }
        out
    }

    pub fn pow(&self, z: &Zpm, mut e: u64, upto: Option<i64>) -> UniPoly {
        let mut acc = UniPoly::monomial(0, 1 % z.modulus());
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(z, &b, upto);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(z, &b, upto);
            }
        }
        acc
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
}

/// φ(π) = (1+π)^p − 1.
fn phi_of_pi(z: &Zpm) -> UniPoly {
    let c = binomial_table(z, &BigInt::from(z.p()), z.p() as usize);
    let mut out = UniPoly::default();
    for (j, &v) in c.iter().enumerate().skip(1) {
        out.add_term(z, j as i64, v);
    }
    out
}

/// φ(π)^{-1} = π^{-p} (1 + (u − 1))^{-1} with u − 1 divisible by p, so the
/// geometric series stops after m terms.
fn phi_of_pi_inv(z: &Zpm) -> UniPoly {
    let p = z.p() as i64;
    let phi = phi_of_pi(z);
    let mut um1 = UniPoly::default();
    for (&k, &v) in &phi.terms {
        if k != p {
            um1.add_term(z, k - p, v);
        }
    }
    let mut neg = UniPoly::default();
    for (&k, &v) in &um1.terms {
        neg.add_term(z, k, z.neg(v));
    }
    let mut sum = UniPoly::monomial(0, 1 % z.modulus());
    let mut term = sum.clone();
    for _ in 1..z.m() {
        term = term.mul(z, &neg, None);
        for (&k, &v) in &term.terms {
            sum.add_term(z, k, v);
        }
    }
    let mut out = UniPoly::default();
    out.add_scaled(z, &sum, 1, -p);
    out
}

/// Lowest exponent that can occur in φ(π)^k modulo p^m.
pub fn phi_lowest(p: i64, m: i64, k: i64) -> i64 {
    if k >= 0 {
        p * k - (p - 1) * k.min(m - 1)
    } else {
        p * k - (p - 1) * (m - 1)
    }
}

/// Lowest exponent that can occur in ψ(π^k) modulo p^m.
pub fn psi_lowest(p: i64, m: i64, k: i64) -> i64 {
    let c = (p - 1) * (m - 1);
    let v = (k - c).div_euclid(p);
    if k >= 0 {
        v.max(0)
    } else {
        v
    }
}

/// Cache of φ(π)^k, built lazily.
pub struct PhiTable {
    z: Zpm,
    base: UniPoly,
    base_inv: UniPoly,
    cache: BTreeMap<i64, UniPoly>,
}

impl PhiTable {
    pub fn new(z: Zpm) -> Self {
        PhiTable {
            base: phi_of_pi(&z),
            base_inv: phi_of_pi_inv(&z),
            z,
            cache: BTreeMap::new(),
        }
    }

    /// Exact φ(π)^k.
    pub fn power(&mut self, k: i64) -> &UniPoly {
        if !self.cache.contains_key(&k) {
            let v = if k >= 0 {
                self.base.pow(&self.z, k as u64, None)
            } else {
                self.base_inv.pow(&self.z, k.unsigned_abs(), None)
            };
            self.cache.insert(k, v);
        }
        &self.cache[&k]
    }
}

/// Images π^k ↦ ((1+π)^c − 1)^k truncated at a fixed exponent bound.
pub struct GammaTable {
    z: Zpm,
    /// w = ((1+π)^c − 1)/π, truncated to degree `len`.
    w: UniPoly,
    w_inv: Option<UniPoly>,
    len: i64,
    upto: Option<i64>,
    cache: BTreeMap<i64, UniPoly>,
}

impl GammaTable {
    /// `upto = None` requests exact images, valid only for 0 ≤ c and k ≥ 0.
    pub fn new(z: Zpm, c: &BigInt, upto: Option<i64>, min_k: i64) -> Self {
        let exact_deg = num_traits::ToPrimitive::to_i64(c).filter(|&v| (0..=4096).contains(&v));
        let need = match upto {
            Some(u) => (u - min_k).max(0),
            None => exact_deg.expect("exact gamma image needs a small nonnegative c"),
        };
        let bin = binomial_table(&z, c, need as usize + 1);
        let mut w = UniPoly::default();
        for j in 0..=need {
            w.add_term(&z, j, bin[j as usize + 1]);
        }
        GammaTable {
            z,
            w,
            w_inv: None,
            len: need,
            upto,
            cache: BTreeMap::new(),
        }
    }

    fn inverse_w(&mut self) -> &UniPoly {
        if self.w_inv.is_none() {
            let z = self.z;
            let len = self.len;
            let w0 = self.w.terms.get(&0).copied().unwrap_or(0);
            let w0_inv = z.inv(w0).expect("character value must be a unit");
            // Power-series inverse by the recurrence v_n = -w0^{-1} Σ_{j≥1} w_j v_{n-j}.
            let mut v = vec![0u64; len as usize + 1];
            v[0] = w0_inv;
            for n in 1..=len as usize {
                let mut s = 0u64;
                for j in 1..=n {
                    if let Some(&wj) = self.w.terms.get(&(j as i64)) {
                        s = z.add(s, z.mul(wj, v[n - j]));
                    }
                }
                v[n] = z.neg(z.mul(w0_inv, s));
            }
            let mut out = UniPoly::default();
            for (n, &x) in v.iter().enumerate() {
                out.add_term(&z, n as i64, x);
            }
            self.w_inv = Some(out);
        }
        self.w_inv.as_ref().unwrap()
    }

    /// γ(π)^k = π^k w^k, terms above the bound dropped.
    pub fn power(&mut self, k: i64) -> &UniPoly {
        if !self.cache.contains_key(&k) {
            let z = self.z;
            let rel = self.upto.map(|u| u - k);
            let body = if rel.is_some_and(|r| r < 0) {
                UniPoly::default()
            } else if k >= 0 {
                self.w.pow(&z, k as u64, rel)
            } else {
                let wi = self.inverse_w().clone();
                wi.pow(&z, k.unsigned_abs(), rel)
            };
            let mut out = UniPoly::default();
            out.add_scaled(&z, &body, 1, k);
            self.cache.insert(k, out);
        }
        &self.cache[&k]
    }
}

/// ψ(π^k) computed by repeated lift-and-subtract; exact modulo p^m.
pub struct PsiTable {
    z: Zpm,
    phi: PhiTable,
    cache: BTreeMap<i64, UniPoly>,
}

impl PsiTable {
    pub fn new(z: Zpm) -> Self {
        PsiTable {
            z,
            phi: PhiTable::new(z),
            cache: BTreeMap::new(),
        }
    }

    /// ψ of an arbitrary univariate Laurent polynomial.
    pub fn apply(&mut self, f: &UniPoly) -> UniPoly {
        let z = self.z;
        let p = z.p() as i64;
        let mut result = UniPoly::default();
        let mut cur = f.clone();
        // Each round multiplies the remainder by p, so m + 1 rounds suffice.
        for _ in 0..=z.m() {
            if cur.is_zero() {
                break;
            }
            let mut next = UniPoly::default();
            for (&k, &c) in &cur.terms {
                let j = k.div_euclid(p);
                let i = k.rem_euclid(p);
                let sign = if i % 2 == 0 { c } else { z.neg(c) };
                result.add_term(&z, j, sign);
                // remainder c π^i (π^{pj} − φ(π)^j)
                next.add_term(&z, i + p * j, c);
                let phij = self.phi.power(j).clone();
                next.add_scaled(&z, &phij, z.neg(c), i);
            }
            cur = next;
        }
        debug_assert!(cur.is_zero());
        result
    }

    pub fn power(&mut self, k: i64) -> &UniPoly {
        if !self.cache.contains_key(&k) {
            let v = self.apply(&UniPoly::monomial(k, 1 % self.z.modulus()));
            self.cache.insert(k, v);
        }
        &self.cache[&k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_powers_invert() {
        for (p, m) in [(2, 3), (3, 2), (5, 2)] {
            let z = Zpm::new(p, m).unwrap();
            let mut t = PhiTable::new(z);
            let a = t.power(3).clone();
            let b = t.power(-3).clone();
            assert_eq!(a.mul(&z, &b, None), UniPoly::monomial(0, 1));
            for k in -6..8 {
                let lo = t.power(k).min_exp().unwrap();
                assert!(lo >= phi_lowest(p as i64, m as i64, k), "p={p} m={m} k={k}");
            }
        }
    }

    #[test]
    fn psi_left_inverse_and_bounds() {
        for (p, m) in [(2, 3), (3, 2), (5, 3)] {
            let z = Zpm::new(p, m).unwrap();
            let mut s = PsiTable::new(z);
            let mut phi = PhiTable::new(z);
            for k in -7..9 {
                let img = phi.power(k).clone();
                assert_eq!(s.apply(&img), UniPoly::monomial(k, 1));
                let ps = s.power(k).clone();
                if let Some(lo) = ps.min_exp() {
                    assert!(lo >= psi_lowest(p as i64, m as i64, k), "p={p} m={m} k={k}");
                }
            }
        }
        let z = Zpm::new(2, 2).unwrap();
        let mut s = PsiTable::new(z);
        assert_eq!(s.power(1).clone(), UniPoly::monomial(0, 3));
    }

    #[test]
    fn gamma_three_mod_two() {
        let z = Zpm::new(2, 1).unwrap();
        let mut g = GammaTable::new(z, &BigInt::from(3), None, 0);
        let img = g.power(1).clone();
        let expect: Vec<(i64, u64)> = vec![(1, 1), (2, 1), (3, 1)];
        assert_eq!(img.terms.into_iter().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn gamma_negative_power_inverts() {
        let z = Zpm::new(3, 2).unwrap();
        let mut g = GammaTable::new(z, &BigInt::from(4), Some(10), -3);
        let a = g.power(2).clone();
        let b = g.power(-2).clone();
        // exactness of the product is limited by the lowest exponents (-2 and 2)
        let prod = a.mul(&z, &b, Some(8));
        assert_eq!(prod, UniPoly::monomial(0, 1));
    }
}
