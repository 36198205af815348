//! Shared generators for integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use phigamma::phigamma::ModuleElement;
use phigamma::series::{Exps, LaurentSeries, SeriesRing};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Base rings for operator checks: p ∈ {2, 3, 5}, m ≤ 3, one or two
/// variables, plus one ring with residue degree 2.
pub fn operator_rings() -> Vec<Arc<SeriesRing>> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        for m in 1..=3u32 {
            out.push(SeriesRing::integral(p, m, &["a"]).unwrap());
            out.push(SeriesRing::integral(p, m, &["a", "b"]).unwrap());
        }
    }
    out.push(SeriesRing::unramified(3, 2, &["a", "b"], &[2, 1]).unwrap());
    out
}

pub fn random_coeff(r: &SeriesRing, rng: &mut ChaCha8Rng) -> phigamma::coeff::Coeff {
    let q = r.zpm().modulus();
    (0..r.coeffs().dim()).map(|_| rng.gen_range(0..q)).collect()
}

/// An exact Laurent polynomial with up to `terms` monomials, exponents in [lo, hi].
pub fn random_poly(r: &Arc<SeriesRing>, rng: &mut ChaCha8Rng, terms: usize, lo: i64, hi: i64) -> LaurentSeries {
    let n = r.nvars();
    LaurentSeries::from_terms(
        r,
        (0..terms).map(|_| {
            let e: Exps = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
            (e, random_coeff(r, rng))
        }),
    )
}

/// A truncated series exact on [lo, hi] in every variable.
pub fn random_truncated(r: &Arc<SeriesRing>, rng: &mut ChaCha8Rng, terms: usize, lo: i64, hi: i64) -> LaurentSeries {
    let n = r.nvars();
    let f = random_poly(r, rng, terms, lo, hi + 4);
    LaurentSeries::truncated(
        r,
        f.terms().clone(),
        (0..n).map(|_| lo).collect(),
        (0..n).map(|_| hi).collect(),
    )
    .unwrap()
}

pub fn random_element(r: &Arc<SeriesRing>, rank: usize, rng: &mut ChaCha8Rng) -> ModuleElement {
    ModuleElement::new((0..rank).map(|_| random_poly(r, rng, 3, -3, 3)).collect())
}

/// A small p-adic unit for γ.
pub fn random_character(p: u64, rng: &mut ChaCha8Rng) -> BigInt {
    loop {
        let c = rng.gen_range(2..40u64);
        if c % p != 0 {
            return BigInt::from(c);
        }
    }
}
