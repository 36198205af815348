use super::{UnramCtx, Valuation, Zpm};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use smallvec::SmallVec;
use std::sync::Arc;

/// Coordinates of a coefficient on the tensor basis θ_1^{i_1}⋯θ_n^{i_n}.
pub type Coeff = SmallVec<[u64; 4]>;

/// The tensor product over Z/p^m of unramified rings W(F_{p^{d_α}})/p^m, one
/// per factor α, with one partial Frobenius per factor.
///
/// With all d_α = 1 this is just Z/p^m and every operation takes a scalar path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffRing {
    zpm: Zpm,
    factors: Vec<Arc<UnramCtx>>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
    /// Offsets of basis elements in the unreduced product layout.
    ext_offsets: Vec<usize>,
    ext_dims: Vec<usize>,
    ext_len: usize,
    traces: Vec<u64>,
}

impl CoeffRing {
    pub fn new(zpm: Zpm, degrees: &[usize]) -> Result<Self> {
        let mut cache: Vec<(usize, Arc<UnramCtx>)> = Vec::new();
        let mut factors = Vec::with_capacity(degrees.len());
        for &d in degrees {
            if let Some((_, c)) = cache.iter().find(|(dd, _)| *dd == d) {
                factors.push(c.clone());
            } else {
                let c = Arc::new(UnramCtx::new(zpm, d)?);
                cache.push((d, c.clone()));
                factors.push(c);
            }
        }
        Ok(Self::from_factors(zpm, factors))
    }

    pub fn from_factors(zpm: Zpm, factors: Vec<Arc<UnramCtx>>) -> Self {
        let dims: Vec<usize> = factors.iter().map(|f| f.degree()).collect();
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let dim: usize = dims.iter().product();
        let ext_dims: Vec<usize> = dims.iter().map(|&d| 2 * d - 1).collect();
        let mut ext_strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            ext_strides[a] = ext_strides[a + 1] * ext_dims[a + 1];
        }
        let ext_len: usize = ext_dims.iter().product();
        let mut ext_offsets = Vec::with_capacity(dim);
        let mut traces = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut off = 0;
            let mut tr = 1 % zpm.modulus();
            for a in 0..n {
                let k = (i / strides[a]) % dims[a];
                off += k * ext_strides[a];
                let mut e = factors[a].zero();
                e[k] = 1;
                tr = zpm.mul(tr, factors[a].trace(&e));
            }
            ext_offsets.push(off);
            traces.push(tr);
        }
        CoeffRing {
            zpm,
            factors,
            dims,
            strides,
            dim,
            ext_offsets,
            ext_dims,
            ext_len,
            traces,
        }
    }

    /// Z/p^m with `n` trivial factors.
    pub fn scalar(zpm: Zpm, n: usize) -> Self {
        Self::new(zpm, &vec![1; n]).expect("degree one always valid")
    }

    pub fn zpm(&self) -> Zpm {
        self.zpm
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }
    pub fn factor(&self, a: usize) -> &Arc<UnramCtx> {
        &self.factors[a]
    }
    pub fn degrees(&self) -> &[usize] {
        &self.dims
    }
    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    /// Per-factor exponents of basis element `i`.
    pub fn basis_exponents(&self, i: usize) -> Vec<usize> {
        (0..self.dims.len())
            .map(|a| (i / self.strides[a]) % self.dims[a])
            .collect()
    }

    pub fn basis_index(&self, exps: &[usize]) -> usize {
        exps.iter().zip(&self.strides).map(|(e, s)| e * s).sum()
    }

    pub fn zero(&self) -> Coeff {
        SmallVec::from_elem(0, self.dim)
    }
    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }
    pub fn from_int(&self, c: u64) -> Coeff {
        let mut v = self.zero();
        v[0] = c % self.zpm.modulus();
        v
    }
    pub fn from_i64(&self, c: i64) -> Coeff {
        self.from_int(self.zpm.from_i64(c))
    }
    pub fn basis(&self, i: usize) -> Coeff {
        let mut v = self.zero();
        v[i] = 1 % self.zpm.modulus();
        v
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }
    pub fn is_zero_mod_p(&self, a: &[u64]) -> bool {
        let p = self.zpm.p();
        a.iter().all(|&c| c % p == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Coeff {
        a.iter().zip(b).map(|(&x, &y)| self.zpm.add(x, y)).collect()
    }
    pub fn sub(&self, a: &[u64], b: &[u64]) -> Coeff {
        a.iter().zip(b).map(|(&x, &y)| self.zpm.sub(x, y)).collect()
    }
    pub fn neg(&self, a: &[u64]) -> Coeff {
        a.iter().map(|&x| self.zpm.neg(x)).collect()
    }
    pub fn scale(&self, a: &[u64], c: u64) -> Coeff {
        a.iter().map(|&x| self.zpm.mul(x, c)).collect()
    }
    pub fn add_assign(&self, a: &mut [u64], b: &[u64]) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x = self.zpm.add(*x, y);
        }
    }
    /// a += c·b
    pub fn add_scaled(&self, a: &mut [u64], b: &[u64], c: u64) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x = self.zpm.add(*x, self.zpm.mul(y, c));
        }
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Coeff {
        let z = self.zpm;
        if self.dim == 1 {
            return SmallVec::from_elem(z.mul(a[0], b[0]), 1);
        }
        let q = z.modulus() as u128;
        let mut acc = vec![0u128; self.ext_len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let oi = self.ext_offsets[i];
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                acc[oi + self.ext_offsets[j]] += (x as u128 * y as u128) % q;
            }
        }
        let mut arr: Vec<u64> = acc.into_iter().map(|v| (v % q) as u64).collect();
        let mut shape = self.ext_dims.clone();
        for a in 0..self.dims.len() {
            if self.dims[a] > 1 {
                arr = self.reduce_axis(arr, &mut shape, a);
            }
        }
        SmallVec::from_vec(arr)
    }

    /// Reduce axis `a` of a row-major array of the given shape modulo the
    /// factor's defining polynomial, shrinking that axis to length d_a.
    fn reduce_axis(&self, mut arr: Vec<u64>, shape: &mut [usize], a: usize) -> Vec<u64> {
        let z = self.zpm;
        let d = self.dims[a];
        let minpoly = self.factors[a].minpoly();
        let len_a = shape[a];
        let inner: usize = shape[a + 1..].iter().product();
        let outer: usize = shape[..a].iter().product();
        for o in 0..outer {
            for k in (d..len_a).rev() {
                for r in 0..inner {
                    let pos = (o * len_a + k) * inner + r;
                    let c = arr[pos];
                    if c == 0 {
                        continue;
                    }
                    for (i, &mi) in minpoly.iter().enumerate() {
                        let t = (o * len_a + (k - d + i)) * inner + r;
                        arr[t] = z.sub(arr[t], z.mul(c, mi));
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(outer * d * inner);
        for o in 0..outer {
            for k in 0..d {
                let start = (o * len_a + k) * inner;
                out.extend_from_slice(&arr[start..start + inner]);
            }
        }
        shape[a] = d;
        out
    }

    fn apply_axis_matrix(&self, a: &[u64], axis: usize, cols: &[Vec<u64>]) -> Coeff {
        let z = self.zpm;
        let s = self.strides[axis];
        let d = self.dims[axis];
        let mut out = self.zero();
        for (pos, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let i = (pos / s) % d;
            let base = pos - i * s;
            for (j, &c) in cols[i].iter().enumerate() {
                if c != 0 {
                    let t = base + j * s;
                    out[t] = z.add(out[t], z.mul(x, c));
                }
            }
        }
        out
    }

    /// Partial Frobenius σ_α acting on the factor α only.
    pub fn frobenius(&self, a: &[u64], alpha: usize) -> Coeff {
        if self.dims[alpha] == 1 {
            return SmallVec::from_slice(a);
        }
        self.apply_axis_matrix(a, alpha, self.factors[alpha].frobenius_matrix())
    }

    pub fn frobenius_inv(&self, a: &[u64], alpha: usize) -> Coeff {
        if self.dims[alpha] == 1 {
            return SmallVec::from_slice(a);
        }
        self.apply_axis_matrix(a, alpha, self.factors[alpha].frobenius_inv_matrix())
    }

    /// σ_α^k for any integer k.
    pub fn frobenius_pow(&self, a: &[u64], alpha: usize, k: i64) -> Coeff {
        let d = self.dims[alpha] as i64;
        let k = k.rem_euclid(d);
        let mut x: Coeff = SmallVec::from_slice(a);
        for _ in 0..k {
            x = self.frobenius(&x, alpha);
        }
        x
    }

    pub fn valuation(&self, a: &[u64]) -> Valuation {
        a.iter()
            .map(|&c| self.zpm.valuation(c))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// Matrix of multiplication by `a` on the coefficient basis.
    pub fn mult_matrix(&self, a: &[u64]) -> Mat {
        let mut m = Mat::zeros(self.zpm, self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.mul(a, &self.basis(j));
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Matrix of σ_α on the coefficient basis.
    pub fn frobenius_matrix(&self, alpha: usize) -> Mat {
        let mut m = Mat::zeros(self.zpm, self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.frobenius(&self.basis(j), alpha);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    fn nontrivial_factors(&self) -> usize {
        self.dims.iter().filter(|&&d| d > 1).count()
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        match self.nontrivial_factors() {
            0 => self.zpm.is_unit(a[0]),
            1 => !self.is_zero_mod_p(a),
            _ => self.mult_matrix(a).inverse().is_ok(),
        }
    }

    pub fn inv(&self, a: &[u64]) -> Result<Coeff> {
        match self.nontrivial_factors() {
            0 => Ok(SmallVec::from_elem(
                self.zpm.inv(a[0]).ok_or(Error::NotAUnit)?,
                1,
            )),
            1 => {
                let ax = self.dims.iter().position(|&d| d > 1).unwrap();
                Ok(SmallVec::from_vec(self.factors[ax].inv_unit(a)?))
            }
            _ => {
                let inv = self.mult_matrix(a).inverse().map_err(|_| Error::NotAUnit)?;
                Ok((0..self.dim).map(|i| inv.get(i, 0)).collect())
            }
        }
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Coeff {
        let mut acc = self.one();
        let mut b: Coeff = SmallVec::from_slice(a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// Trace down to Z/p^m.
    pub fn trace(&self, a: &[u64]) -> u64 {
        let z = self.zpm;
        a.iter()
            .zip(&self.traces)
            .fold(0, |acc, (&x, &t)| z.add(acc, z.mul(x, t)))
    }

    /// Whether `a` lies in the image of Z/p^m (all non-constant coordinates vanish).
    pub fn as_scalar(&self, a: &[u64]) -> Option<u64> {
        if a[1..].iter().all(|&c| c == 0) {
            Some(a[0])
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_product_of_two_f4() {
        let z = Zpm::new(2, 2).unwrap();
        let r = CoeffRing::new(z, &[2, 2]).unwrap();
        assert_eq!(r.dim(), 4);
        let ta = r.basis(r.basis_index(&[1, 0]));
        let tb = r.basis(r.basis_index(&[0, 1]));
        // θ_a θ_b is the basis element (1,1)
        assert_eq!(r.mul(&ta, &tb), r.basis(3));
        // θ_a^2 = -θ_a - 1
        let sq = r.mul(&ta, &ta);
        assert_eq!(sq.as_slice(), &[3, 0, 3, 0]);
        // partial Frobenius fixes the other factor
        assert_eq!(r.frobenius(&tb, 0), tb);
        assert_ne!(r.frobenius(&tb, 1), tb);
        // multiplicativity of σ_a
        let x = r.add(&ta, &r.mul(&tb, &tb));
        let y = r.add(&tb, &r.from_int(3));
        assert_eq!(
            r.frobenius(&r.mul(&x, &y), 0),
            r.mul(&r.frobenius(&x, 0), &r.frobenius(&y, 0))
        );
        // θ_a - θ_b is a zero divisor mod 2 in F_4 ⊗ F_4
        let diff = r.sub(&ta, &tb);
        assert!(!r.is_unit(&diff));
        let u = r.add(&ta, &r.one());
        let ui = r.inv(&u).unwrap();
        assert_eq!(r.mul(&u, &ui), r.one());
    }

    #[test]
    fn trace_of_one_is_dimension() {
        let z = Zpm::new(3, 2).unwrap();
        let r = CoeffRing::new(z, &[2, 1, 3]).unwrap();
        assert_eq!(r.trace(&r.one()), 6);
        // trace is Frobenius invariant
        let x: Coeff = (0..r.dim() as u64).map(|i| (i * i + 2) % 9).collect();
        assert_eq!(r.trace(&r.frobenius(&x, 2)), r.trace(&x));
    }
}
