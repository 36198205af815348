use super::{Valuation, Zpm};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Context for W(F_{p^d})/p^m presented as (Z/p^m)[θ]/(P(θ)), where P is the
/// lexicographically least monic irreducible polynomial of degree d over F_p
/// (lifted with coefficients in [0, p)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnramCtx {
    zpm: Zpm,
    d: usize,
    /// Low coefficients c_0..c_{d-1} of the monic minimal polynomial.
    minpoly: Vec<u64>,
    /// Column j holds σ(θ^j).
    frob: Vec<Vec<u64>>,
    /// Column j holds σ^{-1}(θ^j).
    frob_inv: Vec<Vec<u64>>,
    /// Tr(θ^j) for the trace down to Z/p^m.
    traces: Vec<u64>,
}

// ---- polynomials over F_p, dense, little-endian, trimmed ----

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let z = Zpm::new(p, 1).expect("prime");
    z.inv(a % p).expect("nonzero")
}

fn fp_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = fp_inv(f[df], p);
    while r.len() > df {
        let k = r.len() - 1;
        let c = r[k] * lead_inv % p;
        if c != 0 {
            for (i, &fi) in f.iter().enumerate() {
                let idx = k - df + i;
                r[idx] = (r[idx] + p - c * fi % p) % p;
            }
        }
        trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_rem(&out, f, p)
}

fn fp_powmod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = fp_rem(&[1], f, p);
    let mut b = fp_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_mulmod(&acc, &b, f, p);
        }
        b = fp_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    acc
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn prime_factors(mut n: usize) -> Vec<usize> {
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

/// x^(p^k) mod f over F_p.
fn frob_power_of_x(k: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut x = fp_rem(&[0, 1], f, p);
    for _ in 0..k {
        x = fp_powmod(&x, p, f, p);
    }
    x
}

/// Rabin's irreducibility test for a monic polynomial over F_p.
pub(crate) fn is_irreducible_fp(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x = vec![0, 1];
    if fp_sub(&frob_power_of_x(d, f, p), &fp_rem(&x, f, p), p) != Vec::<u64>::new() {
        return false;
    }
    for q in prime_factors(d) {
        let h = fp_sub(&frob_power_of_x(d / q, f, p), &x, p);
        let g = fp_gcd(f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically least monic irreducible polynomial of degree d over F_p
/// (coefficients compared from x^{d-1} down to x^0). Returns c_0..c_{d-1}.
pub(crate) fn least_irreducible(p: u64, d: usize) -> Vec<u64> {
    let total = (p as u128).pow(d as u32);
    let mut n: u128 = 0;
    while n < total {
        let mut coeffs = vec![0u64; d + 1];
        let mut t = n;
        for c in coeffs.iter_mut().take(d) {
            *c = (t % p as u128) as u64;
            t /= p as u128;
        }
        coeffs[d] = 1;
        if is_irreducible_fp(&coeffs, p) {
            coeffs.truncate(d);
            return coeffs;
        }
        n += 1;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl UnramCtx {
    /// Context with the default (lexicographically least) defining polynomial.
    pub fn new(zpm: Zpm, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("residue degree must be at least 1".into()));
        }
        let minpoly = least_irreducible(zpm.p(), d);
        Self::with_minpoly(zpm, minpoly)
    }

    /// Context with an explicit monic defining polynomial given by its low
    /// coefficients; it must be irreducible modulo p.
    pub fn with_minpoly(zpm: Zpm, minpoly: Vec<u64>) -> Result<Self> {
        let d = minpoly.len();
        let p = zpm.p();
        let mut full: Vec<u64> = minpoly.iter().map(|c| c % p).collect();
        full.push(1);
        if d == 0 || !is_irreducible_fp(&full, p) {
            return Err(Error::InvalidInput("defining polynomial is not irreducible mod p".into()));
        }
        let minpoly: Vec<u64> = minpoly.iter().map(|&c| c % zpm.modulus()).collect();
        let mut ctx = UnramCtx {
            zpm,
            d,
            minpoly,
            frob: Vec::new(),
            frob_inv: Vec::new(),
            traces: Vec::new(),
        };
        ctx.init_frobenius();
        ctx.init_traces();
        Ok(ctx)
    }

    pub fn zpm(&self) -> Zpm {
        self.zpm
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn minpoly(&self) -> &[u64] {
        &self.minpoly
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.d]
    }
    pub fn one(&self) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = 1 % self.zpm.modulus();
        v
    }
    pub fn theta(&self) -> Vec<u64> {
        let mut v = self.zero();
        if self.d > 1 {
            v[1] = 1;
        } else {
            v[0] = self.zpm.neg(self.minpoly[0]);
        }
        v
    }

    /// Reduce a polynomial in θ of arbitrary length modulo the defining polynomial.
    pub fn reduce(&self, poly: &mut Vec<u64>) {
        let z = self.zpm;
        let d = self.d;
        while poly.len() > d {
            let k = poly.len() - 1;
            let c = poly[k];
            if c != 0 {
                for i in 0..d {
                    let idx = k - d + i;
                    poly[idx] = z.sub(poly[idx], z.mul(c, self.minpoly[i]));
                }
            }
            poly.pop();
        }
        poly.resize(d, 0);
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.zpm.add(x, y)).collect()
    }
    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.zpm.sub(x, y)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let z = self.zpm;
        let mut out = vec![0u64; 2 * self.d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = z.add(out[i + j], z.mul(x, y));
            }
        }
        self.reduce(&mut out);
        out
    }

    fn eval_minpoly(&self, s: &[u64]) -> Vec<u64> {
        // Horner: ((s + c_{d-1}) s + c_{d-2}) ...
        let mut acc = self.one();
        for i in (0..self.d).rev() {
            acc = self.mul(&acc, s);
            acc[0] = self.zpm.add(acc[0], self.minpoly[i]);
        }
        acc
    }

    fn eval_minpoly_derivative(&self, s: &[u64]) -> Vec<u64> {
        let z = self.zpm;
        let mut acc = self.zero();
        acc[0] = z.from_i64(self.d as i64);
        for i in (1..self.d).rev() {
            acc = self.mul(&acc, s);
            acc[0] = z.add(acc[0], z.mul(self.minpoly[i], i as u64 % z.modulus()));
        }
        acc
    }

    fn init_frobenius(&mut self) {
        let d = self.d;
        let p = self.zpm.p();
        if d == 1 {
            self.frob = vec![self.one()];
            self.frob_inv = vec![self.one()];
            return;
        }
        // Newton iteration for the root of P congruent to θ^p.
        let mut s = self.pow(&self.theta(), p);
        for _ in 0..=self.zpm.m() + 1 {
            let num = self.eval_minpoly(&s);
            if num.iter().all(|&c| c == 0) {
                break;
            }
            let den = self.eval_minpoly_derivative(&s);
            let den_inv = self.inv_unit(&den).expect("separable minimal polynomial");
            s = self.sub(&s, &self.mul(&num, &den_inv));
        }
        let mut cols = Vec::with_capacity(d);
        let mut cur = self.one();
        for _ in 0..d {
            cols.push(cur.clone());
            cur = self.mul(&cur, &s);
        }
        self.frob = cols;
        // σ^{-1} = σ^{d-1}
        let mut inv_cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut e = self.zero();
            e[j] = 1;
            for _ in 0..d - 1 {
                e = self.frobenius(&e);
            }
            inv_cols.push(e);
        }
        self.frob_inv = inv_cols;
    }

    fn init_traces(&mut self) {
        let z = self.zpm;
        let mut traces = Vec::with_capacity(self.d);
        let mut pw = self.one();
        for _ in 0..self.d {
            let mut t = 0u64;
            for i in 0..self.d {
                let mut b = self.zero();
                b[i] = 1;
                let prod = self.mul(&pw, &b);
                t = z.add(t, prod[i]);
            }
            traces.push(t);
            pw = self.mul(&pw, &self.theta());
        }
        self.traces = traces;
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn apply_matrix(&self, cols: &[Vec<u64>], a: &[u64]) -> Vec<u64> {
        let z = self.zpm;
        let mut out = self.zero();
        for (j, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(&cols[j]) {
                *o = z.add(*o, z.mul(x, c));
            }
        }
        out
    }

    /// The Witt-vector Frobenius σ, which reduces to x ↦ x^p mod p.
    pub fn frobenius(&self, a: &[u64]) -> Vec<u64> {
        if self.d == 1 {
            return a.to_vec();
        }
        self.apply_matrix(&self.frob, a)
    }

    pub fn frobenius_inv(&self, a: &[u64]) -> Vec<u64> {
        if self.d == 1 {
            return a.to_vec();
        }
        self.apply_matrix(&self.frob_inv, a)
    }

    /// Matrix of σ on the θ-power basis (column j = σ(θ^j)).
    pub fn frobenius_matrix(&self) -> &[Vec<u64>] {
        &self.frob
    }

    pub fn frobenius_inv_matrix(&self) -> &[Vec<u64>] {
        &self.frob_inv
    }

    pub fn valuation(&self, a: &[u64]) -> Valuation {
        a.iter()
            .map(|&c| self.zpm.valuation(c))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        a.iter().any(|&c| c % self.zpm.p() != 0)
    }

    pub fn inv_unit(&self, a: &[u64]) -> Result<Vec<u64>> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit);
        }
        let p = self.zpm.p();
        let abar: Vec<u64> = a.iter().map(|c| c % p).collect();
        let mut f: Vec<u64> = self.minpoly.iter().map(|c| c % p).collect();
        f.push(1);
        let inv0 = fp_inverse_mod(&abar, &f, p);
        let mut u = self.zero();
        for (i, c) in inv0.into_iter().enumerate() {
            u[i] = c;
        }
        // Newton: u <- u (2 - a u) doubles the precision each step.
        let mut prec = 1;
        while prec < self.zpm.m() {
            let au = self.mul(a, &u);
            let mut two_minus = self.zero();
            two_minus[0] = 2 % self.zpm.modulus();
            let t = self.sub(&two_minus, &au);
            u = self.mul(&u, &t);
            prec *= 2;
        }
        Ok(u)
    }

    /// Tr_{W(F_{p^d})/Z_p} reduced mod p^m.
    pub fn trace(&self, a: &[u64]) -> u64 {
        let z = self.zpm;
        a.iter()
            .zip(&self.traces)
            .fold(0, |acc, (&x, &t)| z.add(acc, z.mul(x, t)))
    }

    pub fn from_int(&self, c: u64) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = c % self.zpm.modulus();
        v
    }
}

/// Inverse of a modulo f over F_p via the extended Euclidean algorithm.
fn fp_inverse_mod(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    // Invariant: r_i ≡ s_i a (mod f)
    let mut r0 = f.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    while r1.len() > 1 || (r1.len() == 1 && r1[0] == 0) {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let qs = fp_mul(&q, &s1, p);
        let s2 = fp_sub(&s0, &qs, p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        if r1.is_empty() {
            break;
        }
    }
    let c = fp_inv(r1[0], p);
    let mut out: Vec<u64> = s1.iter().map(|&x| x * c % p).collect();
    out = fp_rem(&out, f, p);
    out
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = fp_inv(b[db], p);
    let mut q = vec![0u64; r.len().saturating_sub(db).max(1)];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1;
        let c = r[k] * lead_inv % p;
        q[k - db] = c;
        for (i, &bi) in b.iter().enumerate() {
            let idx = k - db + i;
            r[idx] = (r[idx] + p - c * bi % p) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

/// An element of W(F_{p^f})/p^m bundled with its context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnramCoeff {
    ctx: Arc<UnramCtx>,
    rep: Vec<u64>,
}

impl UnramCoeff {
    pub fn new(ctx: Arc<UnramCtx>, mut rep: Vec<u64>) -> Self {
        for c in rep.iter_mut() {
            *c %= ctx.zpm.modulus();
        }
        ctx.reduce(&mut rep);
        UnramCoeff { ctx, rep }
    }
    pub fn from_int(ctx: Arc<UnramCtx>, c: i64) -> Self {
        let v = ctx.from_int(ctx.zpm.from_i64(c));
        UnramCoeff { ctx, rep: v }
    }
    pub fn theta(ctx: Arc<UnramCtx>) -> Self {
        let v = ctx.theta();
        UnramCoeff { ctx, rep: v }
    }
    pub fn rep(&self) -> &[u64] {
        &self.rep
    }
    pub fn ctx(&self) -> &Arc<UnramCtx> {
        &self.ctx
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) && *self.ctx != *other.ctx {
            return Err(Error::ContextMismatch("unramified contexts differ".into()));
        }
        Ok(())
    }
    fn wrap(&self, rep: Vec<u64>) -> Self {
        UnramCoeff {
            ctx: self.ctx.clone(),
            rep,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.add(&self.rep, &other.rep)))
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.sub(&self.rep, &other.rep)))
    }
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.mul(&self.rep, &other.rep)))
    }
    pub fn inv_unit(&self) -> Result<Self> {
        Ok(self.wrap(self.ctx.inv_unit(&self.rep)?))
    }
    pub fn valuation(&self) -> Valuation {
        self.ctx.valuation(&self.rep)
    }
    pub fn frobenius(&self) -> Self {
        self.wrap(self.ctx.frobenius(&self.rep))
    }
    pub fn is_zero(&self) -> bool {
        self.rep.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for UnramCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &c) in self.rep.iter().enumerate() {
            if c == 0 {
                continue;
            }
            parts.push(match (i, c) {
                (0, _) => format!("{c}"),
                (1, 1) => "t".to_string(),
                (1, _) => format!("{c}*t"),
                (_, 1) => format!("t^{i}"),
                _ => format!("{c}*t^{i}"),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4(m: u32) -> Arc<UnramCtx> {
        Arc::new(UnramCtx::new(Zpm::new(2, m).unwrap(), 2).unwrap())
    }

    #[test]
    fn default_minpoly_f4() {
        assert_eq!(f4(1).minpoly(), &[1, 1]);
    }

    #[test]
    fn f4_examples() {
        let c = f4(1);
        let t = UnramCoeff::theta(c.clone());
        assert!(t.add(&t).unwrap().is_zero());
        assert_eq!(t.mul(&t).unwrap().rep(), &[1, 1]);
        assert_eq!(t.frobenius().rep(), &[1, 1]);
        assert_eq!(t.frobenius().frobenius(), t);
    }

    #[test]
    fn inverse_lifts() {
        let c = f4(2);
        let t = UnramCoeff::theta(c.clone());
        let u = t.inv_unit().unwrap();
        assert_eq!(t.mul(&u).unwrap(), UnramCoeff::from_int(c.clone(), 1));
        let two = UnramCoeff::from_int(c.clone(), 2);
        assert_eq!(two.inv_unit(), Err(Error::NotAUnit));
        assert_eq!(two.mul(&t).unwrap().valuation(), Valuation::Finite(1));
    }

    #[test]
    fn least_irreducibles() {
        assert_eq!(least_irreducible(3, 2), vec![1, 0]); // x^2 + 1
        assert_eq!(least_irreducible(2, 3), vec![1, 1, 0]); // x^3 + x + 1
        assert_eq!(least_irreducible(5, 1), vec![0]);
    }

    #[test]
    fn frobenius_is_ring_map_of_order_d() {
        for (p, m, d) in [(2, 3, 3), (3, 2, 2), (5, 2, 2), (3, 3, 4)] {
            let c = UnramCtx::new(Zpm::new(p, m).unwrap(), d).unwrap();
            let a: Vec<u64> = (0..d as u64).map(|i| (7 * i + 3) % c.zpm().modulus()).collect();
            let b: Vec<u64> = (0..d as u64).map(|i| (5 * i * i + 1) % c.zpm().modulus()).collect();
            assert_eq!(
                c.frobenius(&c.mul(&a, &b)),
                c.mul(&c.frobenius(&a), &c.frobenius(&b))
            );
            let mut x = a.clone();
            for _ in 0..d {
                x = c.frobenius(&x);
            }
            assert_eq!(x, a);
            assert_eq!(c.frobenius_inv(&c.frobenius(&a)), a);
            // mod p it is the p-th power
            let fa = c.frobenius(&a);
            let ap = c.pow(&a, p);
            assert!(fa.iter().zip(&ap).all(|(x, y)| x % p == y % p));
        }
    }
}
