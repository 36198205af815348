//! Truncated multivariate Laurent series over W(F_q)/p^m with per-variable
//! exactness windows, and the operators φ_α, γ_α, ψ_α acting on them.
//!
//! A series carries a window `[lo, hi]` per variable: its support is bounded
//! below by `lo`, and the coefficient of a monomial is asserted exact whenever
//! every exponent is at most `hi` (`hi = INF` means the series is an exact
//! Laurent polynomial). Equivalently a truncated series is an element of the
//! quotient by the monomials exceeding `hi` in some variable.

mod norms;
pub mod subst;
mod text;

pub use norms::LogNorm;
pub use text::{format_coeff, parse_coeff};

use crate::coeff::{Coeff, CoeffRing, Zpm};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use smallvec::SmallVec;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;
use subst::{phi_lowest, psi_lowest, GammaTable, PhiTable, PsiTable, UniPoly};

/// Exponent vector, one entry per variable. In perfect mode entries are
/// numerators over the fixed denominator p^k.
pub type Exps = SmallVec<[i64; 4]>;

/// Sentinel upper bound for exact series.
pub const INF: i64 = i64::MAX;

/// Default number of extra terms kept when an exact input has an infinite image.
pub const DEFAULT_CLIP: i64 = 16;

#[inline]
pub(crate) fn sat_add(a: i64, b: i64) -> i64 {
    if a == INF || b == INF {
        INF
    } else {
        a + b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Integral,
    /// Exponents in p^{-k}Z, coefficients mod p.
    Perfect { k: u32 },
}

/// Context shared by series: coefficients, ordered variable labels and mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesRing {
    coeffs: Arc<CoeffRing>,
    labels: Vec<String>,
    mode: Mode,
    denom: i64,
    clip: i64,
}

impl SeriesRing {
    pub fn new(coeffs: Arc<CoeffRing>, labels: Vec<String>, mode: Mode) -> Result<Arc<Self>> {
        if labels.len() != coeffs.num_factors() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} coefficient factors",
                labels.len(),
                coeffs.num_factors()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidInput("at least one variable is required".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(Error::InvalidInput(format!("bad variable label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidInput(format!("duplicate label {l}")));
            }
        }
        let denom = match mode {
            Mode::Integral => 1,
            Mode::Perfect { k } => {
                if coeffs.zpm().m() != 1 {
                    return Err(Error::ModeMismatch("perfect mode works modulo p (m = 1)".into()));
                }
                (coeffs.zpm().p() as i64).pow(k)
            }
        };
        Ok(Arc::new(SeriesRing {
            coeffs,
            labels,
            mode,
            denom,
            clip: DEFAULT_CLIP,
        }))
    }

    /// Integral-mode ring over Z/p^m with the given labels.
    pub fn integral(p: u64, m: u32, labels: &[&str]) -> Result<Arc<Self>> {
        let z = Zpm::new(p, m)?;
        Self::new(
            Arc::new(CoeffRing::scalar(z, labels.len())),
            labels.iter().map(|s| s.to_string()).collect(),
            Mode::Integral,
        )
    }

    /// Integral-mode ring with per-variable residue degrees.
    pub fn unramified(p: u64, m: u32, labels: &[&str], degrees: &[usize]) -> Result<Arc<Self>> {
        let z = Zpm::new(p, m)?;
        Self::new(
            Arc::new(CoeffRing::new(z, degrees)?),
            labels.iter().map(|s| s.to_string()).collect(),
            Mode::Integral,
        )
    }

    /// Perfect-mode ring over F_p with exponents in p^{-k}Z.
    pub fn perfect(p: u64, k: u32, labels: &[&str]) -> Result<Arc<Self>> {
        let z = Zpm::new(p, 1)?;
        Self::new(
            Arc::new(CoeffRing::scalar(z, labels.len())),
            labels.iter().map(|s| s.to_string()).collect(),
            Mode::Perfect { k },
        )
    }

    pub fn with_clip(self: &Arc<Self>, clip: i64) -> Arc<Self> {
        let mut r = (**self).clone();
        r.clip = clip.max(0);
        Arc::new(r)
    }

    pub fn coeffs(&self) -> &Arc<CoeffRing> {
        &self.coeffs
    }
    pub fn zpm(&self) -> Zpm {
        self.coeffs.zpm()
    }
    pub fn p(&self) -> u64 {
        self.zpm().p()
    }
    pub fn m(&self) -> u32 {
        self.zpm().m()
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn nvars(&self) -> usize {
        self.labels.len()
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    /// Denominator of exponents (1 in integral mode).
    pub fn denom(&self) -> i64 {
        self.denom
    }
    pub fn clip(&self) -> i64 {
        self.clip
    }
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable {label}")))
    }

    pub fn zero_exps(&self) -> Exps {
        SmallVec::from_elem(0, self.nvars())
    }
    pub fn inf_exps(&self) -> Exps {
        SmallVec::from_elem(INF, self.nvars())
    }

    /// Same coefficients and labels, all residue degrees 1 (used by restriction of scalars).
    pub fn base_ring(&self) -> Arc<SeriesRing> {
        let mut r = self.clone();
        r.coeffs = Arc::new(CoeffRing::scalar(self.zpm(), self.nvars()));
        Arc::new(r)
    }

    pub fn parse(self: &Arc<Self>, s: &str) -> Result<LaurentSeries> {
        text::parse_series(self, s)
    }

    pub(crate) fn require_integral(&self, what: &str) -> Result<()> {
        match self.mode {
            Mode::Integral => Ok(()),
            Mode::Perfect { .. } => Err(Error::ModeMismatch(format!("{what} needs integral mode"))),
        }
    }
}

/// A truncated Laurent series with its exactness window.
#[derive(Clone)]
pub struct LaurentSeries {
    ring: Arc<SeriesRing>,
    lo: Exps,
    hi: Exps,
    terms: BTreeMap<Exps, Coeff>,
}

impl PartialEq for LaurentSeries {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.lo == other.lo && self.hi == other.hi && self.terms == other.terms
    }
}
impl Eq for LaurentSeries {}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [lo={:?}, hi={:?}]", self, self.lo.as_slice(), self.hi.as_slice())
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", text::format_series(self))
    }
}

fn componentwise_min<'a>(n: usize, it: impl Iterator<Item = &'a Exps>) -> Option<Exps> {
    let mut out: Option<Exps> = None;
    for e in it {
        match out.as_mut() {
            None => out = Some(e.clone()),
            Some(o) => {
                for a in 0..n {
                    o[a] = o[a].min(e[a]);
                }
            }
        }
    }
    out
}

fn componentwise_max<'a>(n: usize, it: impl Iterator<Item = &'a Exps>) -> Option<Exps> {
    let mut out: Option<Exps> = None;
    for e in it {
        match out.as_mut() {
            None => out = Some(e.clone()),
            Some(o) => {
                for a in 0..n {
                    o[a] = o[a].max(e[a]);
                }
            }
        }
    }
    out
}

#[inline]
fn within(e: &[i64], hi: &[i64]) -> bool {
    e.iter().zip(hi).all(|(x, h)| x <= h)
}

impl LaurentSeries {
    // ---------- construction ----------

    /// Exact series from terms; the lower bound is the componentwise minimum
    /// of the support.
    pub fn from_terms(ring: &Arc<SeriesRing>, terms: impl IntoIterator<Item = (Exps, Coeff)>) -> Self {
        let cr = ring.coeffs.clone();
        let mut map: BTreeMap<Exps, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), ring.nvars());
            match map.get_mut(&e) {
                Some(old) => cr.add_assign(old, &c),
                None => {
                    map.insert(e, c);
                }
            }
        }
        map.retain(|_, c| !cr.is_zero(c));
        let lo = componentwise_min(ring.nvars(), map.keys()).unwrap_or_else(|| ring.zero_exps());
        LaurentSeries {
            ring: ring.clone(),
            lo,
            hi: ring.inf_exps(),
            terms: map,
        }
    }

    /// Truncated series; terms beyond `hi` are discarded.
    pub fn truncated(
        ring: &Arc<SeriesRing>,
        terms: impl IntoIterator<Item = (Exps, Coeff)>,
        lo: Exps,
        hi: Exps,
    ) -> Result<Self> {
        let mut s = Self::from_terms(ring, terms);
        for a in 0..ring.nvars() {
            if hi[a] < lo[a] {
                return Err(Error::EmptyWindow);
            }
        }
        if s.terms.keys().any(|e| e.iter().zip(&lo).any(|(x, l)| x < l)) {
            return Err(Error::InvalidInput("support below declared lower bound".into()));
        }
        s.terms.retain(|e, _| within(e, &hi));
        s.lo = lo;
        s.hi = hi;
        Ok(s)
    }

    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        Self::from_terms(ring, std::iter::empty())
    }

    /// The zero class on a window (all coefficients in the window known to vanish).
    pub fn zero_window(ring: &Arc<SeriesRing>, lo: Exps, hi: Exps) -> Self {
        LaurentSeries {
            ring: ring.clone(),
            lo,
            hi,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: Coeff) -> Self {
        Self::from_terms(ring, [(ring.zero_exps(), c)])
    }

    pub fn from_int(ring: &Arc<SeriesRing>, c: i64) -> Self {
        Self::constant(ring, ring.coeffs.from_i64(c))
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::from_int(ring, 1)
    }

    pub fn monomial(ring: &Arc<SeriesRing>, exps: &[i64], c: Coeff) -> Self {
        Self::from_terms(ring, [(SmallVec::from_slice(exps), c)])
    }

    /// The variable π_α (exact).
    pub fn var(ring: &Arc<SeriesRing>, alpha: usize) -> Self {
        let mut e = ring.zero_exps();
        e[alpha] = ring.denom;
        Self::from_terms(ring, [(e, ring.coeffs.one())])
    }

    /// (1 + π_α)^a for an integer a. Exact when 0 ≤ a ≤ 4096; otherwise the
    /// binomial series is kept up to exponent `clip` in α.
    pub fn one_plus_var_pow(ring: &Arc<SeriesRing>, alpha: usize, a: &BigInt) -> Result<Self> {
        ring.require_integral("one_plus_var_pow")?;
        let small = a.to_i64().filter(|v| (0..=4096).contains(v));
        let n = small.unwrap_or(ring.clip) as usize;
        let z = ring.zpm();
        let table = crate::coeff::binomial_table(&z, a, n);
        let terms = table.iter().enumerate().map(|(j, &c)| {
            let mut e = ring.zero_exps();
            e[alpha] = j as i64;
            (e, ring.coeffs.from_int(c))
        });
        let mut s = Self::from_terms(ring, terms);
        s.lo = ring.zero_exps();
        if small.is_none() {
            s.hi[alpha] = ring.clip;
        }
        Ok(s)
    }

    // ---------- accessors ----------

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }
    pub fn lo(&self) -> &Exps {
        &self.lo
    }
    pub fn hi(&self) -> &Exps {
        &self.hi
    }
    pub fn terms(&self) -> &BTreeMap<Exps, Coeff> {
        &self.terms
    }
    pub fn is_exact(&self) -> bool {
        self.hi.iter().all(|&h| h == INF)
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, e: &[i64]) -> Coeff {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| self.ring.coeffs.zero())
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Componentwise minimum of the support.
    pub fn support_min(&self) -> Option<Exps> {
        componentwise_min(self.ring.nvars(), self.terms.keys())
    }
    /// Componentwise maximum of the support.
    pub fn support_max(&self) -> Option<Exps> {
        componentwise_max(self.ring.nvars(), self.terms.keys())
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch("series rings differ".into()))
        }
    }

    /// Restrict the exactness window to at most `hi`.
    pub fn truncate(&self, hi: &[i64]) -> Self {
        let mut out = self.clone();
        for a in 0..hi.len() {
            out.hi[a] = out.hi[a].min(hi[a]);
        }
        let h = out.hi.clone();
        out.terms.retain(|e, _| within(e, &h));
        out
    }

    /// Weaken the lower bound to `lo` (must not exceed the current bound).
    pub fn lower_to(&self, lo: &[i64]) -> Self {
        let mut out = self.clone();
        for a in 0..lo.len() {
            out.lo[a] = out.lo[a].min(lo[a]);
        }
        out
    }

    /// Whether two series agree on their common window.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.witness_difference(other).is_none()
    }

    /// A monomial in the common window where the two series differ.
    pub fn witness_difference(&self, other: &Self) -> Option<Exps> {
        let hi: Exps = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        let zero = self.ring.coeffs.zero();
        for e in self.terms.keys().chain(other.terms.keys()) {
            if !within(e, &hi) {
                continue;
            }
            let a = self.terms.get(e).unwrap_or(&zero);
            let b = other.terms.get(e).unwrap_or(&zero);
            if a != b {
                return Some(e.clone());
            }
        }
        None
    }

    // ---------- ring operations ----------

    fn combine(&self, other: &Self, negate: bool) -> Result<Self> {
        self.check(other)?;
        let cr = &self.ring.coeffs;
        let n = self.ring.nvars();
        let lo: Exps = (0..n).map(|a| self.lo[a].min(other.lo[a])).collect();
        let hi: Exps = (0..n).map(|a| self.hi[a].min(other.hi[a])).collect();
        let mut terms: BTreeMap<Exps, Coeff> =
            self.terms.iter().filter(|(e, _)| within(e, &hi)).map(|(e, c)| (e.clone(), c.clone())).collect();
        for (e, c) in &other.terms {
            if !within(e, &hi) {
                continue;
            }
            let c = if negate { cr.neg(c) } else { c.clone() };
            match terms.get_mut(e) {
                Some(old) => cr.add_assign(old, &c),
                None => {
                    terms.insert(e.clone(), c);
                }
            }
        }
        terms.retain(|_, c| !cr.is_zero(c));
        Ok(LaurentSeries {
            ring: self.ring.clone(),
            lo,
            hi,
            terms,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn neg(&self) -> Self {
        let cr = &self.ring.coeffs;
        LaurentSeries {
            ring: self.ring.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), cr.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &[u64]) -> Self {
        let cr = &self.ring.coeffs;
        let mut terms: BTreeMap<Exps, Coeff> =
            self.terms.iter().map(|(e, x)| (e.clone(), cr.mul(x, c))).collect();
        terms.retain(|_, c| !cr.is_zero(c));
        LaurentSeries {
            ring: self.ring.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            terms,
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&self.ring.coeffs.from_i64(c))
    }

    /// Window of a product: `[L_f + L_g, min(U_f + L_g, U_g + L_f)]`.
    pub fn product_window(&self, other: &Self) -> (Exps, Exps) {
        let n = self.ring.nvars();
        let lo: Exps = (0..n).map(|a| self.lo[a] + other.lo[a]).collect();
        let hi: Exps = (0..n)
            .map(|a| sat_add(self.hi[a], other.lo[a]).min(sat_add(other.hi[a], self.lo[a])))
            .collect();
        (lo, hi)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (lo, hi) = self.product_window(other);
        if lo.iter().zip(&hi).any(|(l, h)| h < l) {
            return Err(Error::EmptyWindow);
        }
        let terms = mul_terms(&self.ring.coeffs, &self.terms, &other.terms, &hi);
        Ok(LaurentSeries {
            ring: self.ring.clone(),
            lo,
            hi,
            terms,
        })
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.ring);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    // ---------- operators ----------

    fn substitute(
        &self,
        alpha: usize,
        table: &mut dyn FnMut(i64) -> UniPoly,
        coeff_map: &dyn Fn(&Coeff) -> Coeff,
        lo: Exps,
        hi: Exps,
    ) -> Self {
        let cr = &self.ring.coeffs;
        let z = cr.zpm();
        let mut cache: HashMap<i64, UniPoly> = HashMap::new();
        let mut acc: HashMap<Exps, Coeff> = HashMap::new();
        for (e, c) in &self.terms {
            let img = cache.entry(e[alpha]).or_insert_with(|| table(e[alpha]));
            let c2 = coeff_map(c);
            for (&j, &t) in &img.terms {
                if j > hi[alpha] {
                    break;
                }
                let mut e2 = e.clone();
                e2[alpha] = j;
                let slot = acc.entry(e2).or_insert_with(|| cr.zero());
                if cr.is_scalar() {
                    slot[0] = z.add(slot[0], z.mul(c2[0], t));
                } else {
                    cr.add_scaled(slot, &c2, t);
                }
            }
        }
        let terms: BTreeMap<Exps, Coeff> = acc.into_iter().filter(|(_, c)| !cr.is_zero(c)).collect();
        LaurentSeries {
            ring: self.ring.clone(),
            lo,
            hi,
            terms,
        }
    }

    /// Output window of φ_α for a given input window.
    pub fn phi_window(ring: &SeriesRing, alpha: usize, lo: &[i64], hi: &[i64]) -> (Exps, Exps) {
        let p = ring.p() as i64;
        let mut lo2: Exps = SmallVec::from_slice(lo);
        let mut hi2: Exps = SmallVec::from_slice(hi);
        match ring.mode {
            Mode::Integral => {
                let m = ring.m() as i64;
                lo2[alpha] = phi_lowest(p, m, lo[alpha]);
                if hi[alpha] != INF {
                    hi2[alpha] = phi_lowest(p, m, hi[alpha] + 1) - 1;
                }
            }
            Mode::Perfect { .. } => {
                lo2[alpha] = p * lo[alpha];
                if hi[alpha] != INF {
                    hi2[alpha] = p * (hi[alpha] + 1) - 1;
                }
            }
        }
        (lo2, hi2)
    }

    /// φ_α: π_α ↦ (1+π_α)^p − 1 with the partial Frobenius on coefficients.
    /// In perfect mode this is the p-th power map in the variable α.
    pub fn phi(&self, alpha: usize) -> Self {
        let (lo, hi) = Self::phi_window(&self.ring, alpha, &self.lo, &self.hi);
        let cr = self.ring.coeffs.clone();
        let fmap = |c: &Coeff| cr.frobenius(c, alpha);
        match self.ring.mode {
            Mode::Integral => {
                let mut t = PhiTable::new(self.ring.zpm());
                self.substitute(alpha, &mut |k| t.power(k).clone(), &fmap, lo, hi)
            }
            Mode::Perfect { .. } => {
                let p = self.ring.p() as i64;
                self.substitute(alpha, &mut |k| UniPoly::monomial(p * k, 1), &fmap, lo, hi)
            }
        }
    }

    /// γ_α with character value c: π_α ↦ (1+π_α)^c − 1, coefficients fixed.
    ///
    /// Truncated inputs keep their window. An exact input keeps being exact
    /// when the image is a polynomial (0 ≤ c ≤ 64 and nonnegative exponents
    /// in α); otherwise the window is clipped at `max(support, 0) + clip`.
    pub fn gamma(&self, alpha: usize, c: &BigInt) -> Result<Self> {
        self.ring.require_integral("gamma")?;
        let p = BigInt::from(self.ring.p());
        if (c % &p).is_zero() {
            return Err(Error::InvalidInput(format!("character value {c} is not a p-adic unit")));
        }
        if self.terms.is_empty() {
            // Zero stays zero, exactly on the same window.
            return Ok(self.clone());
        }
        let lo = self.lo.clone();
        let mut hi = self.hi.clone();
        let small = c.to_i64().filter(|v| (0..=64).contains(v));
        let min_k = self.terms.keys().map(|e| e[alpha]).min().unwrap_or(0).min(lo[alpha]);
        let exact_poly = hi[alpha] == INF && small.is_some() && min_k >= 0;
        if hi[alpha] == INF && !exact_poly {
            let top = self.terms.keys().map(|e| e[alpha]).max().unwrap_or(0).max(0);
            hi[alpha] = top + self.ring.clip;
        }
        let upto = if exact_poly { None } else { Some(hi[alpha]) };
        let mut t = GammaTable::new(self.ring.zpm(), c, upto, min_k);
        Ok(self.substitute(alpha, &mut |k| t.power(k).clone(), &|c: &Coeff| c.clone(), lo, hi))
    }

    /// Output window of ψ_α for a given input window.
    pub fn psi_window(ring: &SeriesRing, alpha: usize, lo: &[i64], hi: &[i64]) -> (Exps, Exps) {
        let p = ring.p() as i64;
        let m = ring.m() as i64;
        let mut lo2: Exps = SmallVec::from_slice(lo);
        let mut hi2: Exps = SmallVec::from_slice(hi);
        lo2[alpha] = psi_lowest(p, m, lo[alpha]);
        if hi[alpha] != INF {
            hi2[alpha] = psi_lowest(p, m, hi[alpha] + 1) - 1;
        }
        (lo2, hi2)
    }

    /// ψ_α, the left inverse of φ_α singled out by ψ((1+π)^i φ(f)) = δ_{i0} f.
    /// Acts on coefficients through the inverse partial Frobenius.
    pub fn psi(&self, alpha: usize) -> Result<Self> {
        self.ring.require_integral("psi")?;
        let (lo, hi) = Self::psi_window(&self.ring, alpha, &self.lo, &self.hi);
        if hi[alpha] < lo[alpha] {
            return Err(Error::InsufficientWindow(format!(
                "psi in variable {} needs a wider input window",
                self.ring.labels[alpha]
            )));
        }
        let cr = self.ring.coeffs.clone();
        let mut t = PsiTable::new(self.ring.zpm());
        Ok(self.substitute(
            alpha,
            &mut |k| t.power(k).clone(),
            &|c: &Coeff| cr.frobenius_inv(c, alpha),
            lo,
            hi,
        ))
    }

    /// Coefficient of ∏ X_α^{-1} in f / ∏(1 + X_α).
    pub fn res(&self) -> Result<Coeff> {
        self.ring.require_integral("res")?;
        if let Some(a) = self.hi.iter().position(|&h| h < -1) {
            return Err(Error::InsufficientWindow(format!(
                "residue needs exactness at exponent -1 in {}",
                self.ring.labels[a]
            )));
        }
        let cr = &self.ring.coeffs;
        let mut acc = cr.zero();
        for (e, c) in &self.terms {
            if e.iter().all(|&x| x <= -1) {
                let flips: i64 = e.iter().map(|&x| -1 - x).sum();
                if flips % 2 == 0 {
                    cr.add_assign(&mut acc, c);
                } else {
                    cr.add_assign(&mut acc, &cr.neg(c));
                }
            }
        }
        Ok(acc)
    }

    /// (integral part, remainder): monomials whose exponents are all integers
    /// versus the rest.
    pub fn split_integral(&self) -> Result<(Self, Self)> {
        if self.ring.mode == Mode::Integral {
            return Err(Error::ModeMismatch("split_integral needs perfect mode".into()));
        }
        let d = self.ring.denom;
        let (int, frac): (BTreeMap<_, _>, BTreeMap<_, _>) = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.clone()))
            .partition(|(e, _)| e.iter().all(|x| x.rem_euclid(d) == 0));
        let mk = |terms| LaurentSeries {
            ring: self.ring.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            terms,
        };
        Ok((mk(int), mk(frac)))
    }

    /// Inverse of a unit, certified from the data available on the window.
    ///
    /// The reduction mod p must have a support whose componentwise minimum e0
    /// is itself a monomial with unit coefficient, and the unknown region must
    /// lie above e0. Then f = c π^{e0} (1 + h) and the inverse is the
    /// geometric series in h.
    pub fn try_invert(&self) -> Result<Self> {
        self.ring.require_integral("try_invert")?;
        let cr = &self.ring.coeffs;
        let z = cr.zpm();
        let n = self.ring.nvars();
        let exact = self.is_exact();
        let modp: Vec<&Exps> = self
            .terms
            .iter()
            .filter(|(_, c)| !cr.is_zero_mod_p(c))
            .map(|(e, _)| e)
            .collect();
        let Some(e0) = componentwise_min(n, modp.iter().copied()) else {
            return if exact {
                Err(Error::NotAUnit)
            } else {
                Err(Error::Inconclusive("reduction mod p vanishes on the window".into()))
            };
        };
        let c0 = self.coeff(&e0);
        if cr.is_zero_mod_p(&c0) {
            return if exact {
                Err(Error::NotAUnit)
            } else {
                Err(Error::Inconclusive("no dominant monomial on the window".into()))
            };
        }
        if !exact && n > 1 && e0 != self.lo {
            return Err(Error::Inconclusive(
                "unknown region is not dominated by the leading monomial".into(),
            ));
        }
        let c0_inv = match cr.inv(&c0) {
            Ok(v) => v,
            Err(_) if exact && cr.num_factors() <= 1 => return Err(Error::NotAUnit),
            Err(_) => {
                return Err(Error::Inconclusive("leading coefficient not certified as a unit".into()))
            }
        };
        // h = f / (c0 π^{e0}) - 1, relative exponents
        let mut h: BTreeMap<Exps, Coeff> = BTreeMap::new();
        for (e, c) in &self.terms {
            let rel: Exps = e.iter().zip(&e0).map(|(x, y)| x - y).collect();
            let v = cr.mul(c, &c0_inv);
            if rel.iter().all(|&x| x == 0) {
                let v = cr.sub(&v, &cr.one());
                if !cr.is_zero(&v) {
                    h.insert(rel, v);
                }
            } else {
                h.insert(rel, v);
            }
        }
        let m = z.m() as i64;
        // Only p-divisible terms of h can sit below zero; at most m-1 of them
        // survive in any product.
        let lv: Exps = (0..n).map(|a| (m - 1) * (self.lo[a] - e0[a]).min(0)).collect();
        let h_unit_part = h.iter().any(|(_, c)| !cr.is_zero_mod_p(c));
        let rel_hi: Exps = if exact && h_unit_part {
            let top = componentwise_max(n, h.keys()).unwrap_or_else(|| self.ring.zero_exps());
            (0..n).map(|a| top[a].max(0) + self.ring.clip).collect()
        } else if exact {
            self.ring.inf_exps()
        } else {
            (0..n)
                .map(|a| sat_add(self.hi[a] - e0[a], 2 * lv[a]))
                .collect()
        };
        let neg_h: BTreeMap<Exps, Coeff> = h.iter().map(|(e, c)| (e.clone(), cr.neg(c))).collect();
        let mut sum: BTreeMap<Exps, Coeff> = BTreeMap::new();
        sum.insert(self.ring.zero_exps(), cr.one());
        let mut term = sum.clone();
        let span: i64 = (0..n)
            .map(|a| if rel_hi[a] == INF { 0 } else { rel_hi[a] - lv[a] + 1 })
            .sum();
        let max_iter = (span + 1) * m + m + 2;
        let mut it = 0;
        while !term.is_empty() {
            term = mul_terms(cr, &term, &neg_h, &rel_hi);
            for (e, c) in &term {
                match sum.get_mut(e) {
                    Some(old) => cr.add_assign(old, c),
                    None => {
                        sum.insert(e.clone(), c.clone());
                    }
                }
            }
            it += 1;
            if it > max_iter {
                return Err(Error::Inconclusive("geometric series failed to terminate".into()));
            }
        }
        let terms = sum.into_iter().filter_map(|(e, c)| {
            let v = cr.mul(&c, &c0_inv);
            if cr.is_zero(&v) {
                None
            } else {
                Some((e.iter().zip(&e0).map(|(x, y)| x - y).collect::<Exps>(), v))
            }
        });
        let lo: Exps = (0..n).map(|a| lv[a] - e0[a]).collect();
        let hi: Exps = (0..n).map(|a| sat_add(rel_hi[a], -e0[a])).collect();
        let terms: BTreeMap<Exps, Coeff> = terms.collect();
        Ok(LaurentSeries {
            ring: self.ring.clone(),
            lo,
            hi,
            terms,
        })
    }

    /// Reduction of the coefficients into a ring with the same labels and a
    /// smaller precision m' ≤ m.
    pub fn reduce_precision(&self, target: &Arc<SeriesRing>) -> Result<Self> {
        if target.nvars() != self.ring.nvars() || target.p() != self.ring.p() || target.m() > self.ring.m() {
            return Err(Error::ContextMismatch("incompatible precision change".into()));
        }
        let q = target.zpm().modulus();
        let tc = &target.coeffs;
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.iter().map(|x| x % q).collect::<Coeff>()))
            .filter(|(_, c)| !tc.is_zero(c))
            .collect();
        Ok(LaurentSeries {
            ring: target.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            terms,
        })
    }

    /// Re-home the series into an equal ring (e.g. one with a different clip).
    pub fn with_ring(&self, ring: &Arc<SeriesRing>) -> Self {
        let mut out = self.clone();
        out.ring = ring.clone();
        out
    }

    /// Coordinates over the base ring Z/p^m: one series per coefficient basis element.
    pub fn coordinates(&self, base: &Arc<SeriesRing>) -> Vec<Self> {
        let d = self.ring.coeffs.dim();
        (0..d)
            .map(|i| {
                let terms = self.terms.iter().filter_map(|(e, c)| {
                    (c[i] != 0).then(|| (e.clone(), SmallVec::from_elem(c[i], 1)))
                });
                LaurentSeries {
                    ring: base.clone(),
                    lo: self.lo.clone(),
                    hi: self.hi.clone(),
                    terms: terms.collect(),
                }
            })
            .collect()
    }
}

/// Product of term maps keeping only exponents ≤ hi.
pub(crate) fn mul_terms(
    cr: &CoeffRing,
    a: &BTreeMap<Exps, Coeff>,
    b: &BTreeMap<Exps, Coeff>,
    hi: &[i64],
) -> BTreeMap<Exps, Coeff> {
    let z = cr.zpm();
    let n = hi.len();
    let mut acc: HashMap<Exps, Coeff> = HashMap::with_capacity(a.len() + b.len());
    // Bound for pruning: the minimal exponent of b in each variable.
    let bmin = componentwise_min(n, b.keys());
    for (ea, ca) in a {
        if let Some(bm) = &bmin {
            if (0..n).any(|k| hi[k] != INF && ea[k] + bm[k] > hi[k]) {
                continue;
            }
        }
        for (eb, cb) in b {
            let mut e: Exps = SmallVec::with_capacity(n);
            let mut ok = true;
            for k in 0..n {
                let s = ea[k] + eb[k];
                if s > hi[k] {
                    ok = false;
                    break;
                }
                e.push(s);
            }
            if !ok {
                continue;
            }
            if cr.is_scalar() {
                let v = z.mul(ca[0], cb[0]);
                let slot = acc.entry(e).or_insert_with(|| SmallVec::from_elem(0, 1));
                slot[0] = z.add(slot[0], v);
            } else {
                let v = cr.mul(ca, cb);
                match acc.get_mut(&e) {
                    Some(old) => cr.add_assign(old, &v),
                    None => {
                        acc.insert(e, v);
                    }
                }
            }
        }
    }
    acc.into_iter().filter(|(_, c)| !cr.is_zero(c)).collect()
}

#[cfg(test)]
mod tests;
