//! Tensor products W(F_{q_1}) ⊗ ⋯ ⊗ W(F_{q_n}) / p^m as products of unramified
//! rings, and their finite extensions factor by factor.

use crate::coeff::{Coeff, CoeffRing, UnramCtx, Zpm};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::series::{Mode, SeriesRing};
use num_integer::Integer;
use std::sync::Arc;

/// The base ring R with its primitive idempotents. Each component e_c R is
/// isomorphic to W(F_{p^L})/p^m with L = lcm(f_α), there are ∏ f_α / L of
/// them, and each partial Frobenius permutes them.
#[derive(Debug, Clone)]
pub struct FiniteBase {
    ring: Arc<SeriesRing>,
    idempotents: Vec<Coeff>,
    residue_degree: usize,
    permutations: Vec<Vec<usize>>,
}

impl PartialEq for FiniteBase {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring
    }
}

fn vec_of(c: &[u64]) -> Vec<u64> {
    c.to_vec()
}

/// Orthogonal primitive idempotents of a coefficient ring mod p, found by
/// splitting 1 along the eigenvalues of a basis of {x : x^p = x}.
fn idempotents_mod_p(cr: &CoeffRing) -> Result<Vec<Coeff>> {
    let zp = cr.zpm();
    let p = zp.p();
    let d = cr.dim();
    let cols: Vec<Vec<u64>> = (0..d).map(|j| vec_of(&cr.pow(&cr.basis(j), p))).collect();
    let frob = Mat::from_cols(zp, d, &cols);
    let fixed = frob.sub(&Mat::identity(zp, d)).kernel();
    let mut idems: Vec<Coeff> = vec![cr.one()];
    for t in 0..fixed.cols() {
        let b: Coeff = fixed.col(t).into_iter().collect();
        let mut next = Vec::new();
        for e in &idems {
            for a in 0..p {
                let mut l = e.clone();
                for a2 in (0..p).filter(|&x| x != a) {
                    let shifted = cr.sub(&b, &cr.from_int(a2));
                    let w = zp.inv(zp.sub(a, a2)).expect("distinct residues");
                    l = cr.scale(&cr.mul(&l, &shifted), w);
                }
                if !cr.is_zero(&l) {
                    next.push(l);
                }
            }
        }
        idems = next;
    }
    if idems.len() != fixed.cols() {
        return Err(Error::InvalidInput(format!(
            "idempotent splitting found {} components for a {}-dimensional fixed algebra",
            idems.len(),
            fixed.cols()
        )));
    }
    Ok(idems)
}

impl FiniteBase {
    pub fn new(p: u64, m: u32, labels: &[&str], degrees: &[usize]) -> Result<Self> {
        let ring = SeriesRing::unramified(p, m, labels, degrees)?;
        Self::from_ring(ring)
    }

    pub fn from_ring(ring: Arc<SeriesRing>) -> Result<Self> {
        if ring.mode() != Mode::Integral {
            return Err(Error::ModeMismatch("finite bases use integral coefficients".into()));
        }
        let cr = ring.coeffs().clone();
        let z = cr.zpm();
        let zp = Zpm::new(z.p(), 1)?;
        let crp = CoeffRing::new(zp, cr.degrees())?;
        let mut idems = idempotents_mod_p(&crp)?;
        // Lift to Z/p^m: e ↦ 3e² − 2e³ doubles the precision.
        for e in idems.iter_mut() {
            let mut x: Coeff = e.clone();
            for _ in 0..z.m() {
                let x2 = cr.mul(&x, &x);
                let x3 = cr.mul(&x2, &x);
                x = cr.sub(&cr.scale(&x2, z.from_i64(3)), &cr.scale(&x3, z.from_i64(2)));
            }
            *e = x;
        }
        let residue_degree = cr.degrees().iter().fold(1usize, |a, &b| a.lcm(&b));
        let g: usize = cr.dim() / residue_degree;
        if idems.len() != g || cr.dim() % residue_degree != 0 {
            return Err(Error::InvalidInput(format!(
                "expected {g} components of degree {residue_degree}, found {}",
                idems.len()
            )));
        }
        for e in &idems {
            if cr.mult_matrix(e).rank_mod_p() != residue_degree {
                return Err(Error::InvalidInput("component of unexpected dimension".into()));
            }
        }
        let permutations = (0..cr.num_factors())
            .map(|a| {
                idems
                    .iter()
                    .map(|e| {
                        let img = cr.frobenius(e, a);
                        idems.iter().position(|x| *x == img).ok_or_else(|| {
                            Error::InvalidInput("partial Frobenius does not permute components".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(FiniteBase {
            ring,
            idempotents: idems,
            residue_degree,
            permutations,
        })
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }
    pub fn coeffs(&self) -> &Arc<CoeffRing> {
        self.ring.coeffs()
    }
    pub fn zpm(&self) -> Zpm {
        self.ring.zpm()
    }
    pub fn nvars(&self) -> usize {
        self.ring.nvars()
    }
    pub fn degrees(&self) -> &[usize] {
        self.coeffs().degrees()
    }
    pub fn dim(&self) -> usize {
        self.coeffs().dim()
    }
    pub fn num_components(&self) -> usize {
        self.idempotents.len()
    }
    /// L = lcm(f_α), the residue degree of every component.
    pub fn residue_degree(&self) -> usize {
        self.residue_degree
    }
    pub fn idempotents(&self) -> &[Coeff] {
        &self.idempotents
    }
    /// φ_α(e_c) = e_{perm[c]}.
    pub fn permutation(&self, alpha: usize) -> &[usize] {
        &self.permutations[alpha]
    }

    /// Matrix of v ↦ A·v on R^r for an r×r matrix over R (row-major entries).
    pub fn linear_map(&self, a: &[Coeff], r: usize) -> Mat {
        linear_map(self.coeffs(), a, r)
    }

    /// Matrix of σ_α applied coordinatewise on R^r.
    pub fn frobenius_map(&self, alpha: usize, r: usize) -> Mat {
        Mat::identity(self.zpm(), r).kron(&self.coeffs().frobenius_matrix(alpha))
    }
}

/// Matrix of v ↦ A·v on C^r for a coefficient ring C; block (i, j) is
/// multiplication by a_ij.
pub fn linear_map(cr: &CoeffRing, a: &[Coeff], r: usize) -> Mat {
    let d = cr.dim();
    let mut out = Mat::zeros(cr.zpm(), r * d, r * d);
    for i in 0..r {
        for j in 0..r {
            let m = cr.mult_matrix(&a[i * r + j]);
            for x in 0..d {
                for y in 0..d {
                    out.set(i * d + x, j * d + y, m.get(x, y));
                }
            }
        }
    }
    out
}

/// Root of the defining polynomial of `small` inside `big` (degree a
/// multiple), lifted from a root mod p found in the σ^f-fixed subfield.
fn embed_generator(small: &UnramCtx, big: &UnramCtx) -> Result<Vec<u64>> {
    let f = small.degree();
    let z = big.zpm();
    let zp = Zpm::new(z.p(), 1)?;
    let dd = big.degree();
    let eval = |x: &[u64], deriv: bool| -> Vec<u64> {
        // Horner on the monic polynomial or its derivative.
        let c = small.minpoly();
        let coeffs: Vec<u64> = if deriv {
            (1..=f).map(|i| z.mul(i as u64 % z.modulus(), if i == f { 1 } else { c[i] })).collect()
        } else {
            c.iter().copied().chain(std::iter::once(1)).collect()
        };
        let mut acc = big.zero();
        for &k in coeffs.iter().rev() {
            acc = big.add(&big.mul(&acc, x), &big.from_int(k));
        }
        acc
    };
    let cols: Vec<Vec<u64>> = big.frobenius_matrix().to_vec();
    let sigma = Mat::from_cols(z, dd, &cols).reduce(zp);
    let fixed = sigma.pow(f as u64).sub(&Mat::identity(zp, dd)).kernel();
    let k = fixed.cols();
    let total = (zp.modulus() as usize).pow(k as u32);
    let mut root = None;
    for idx in 0..total {
        let mut t = idx;
        let mut x = vec![0u64; dd];
        for g in 0..k {
            let c = (t % zp.modulus() as usize) as u64;
            t /= zp.modulus() as usize;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = zp.add(*xi, zp.mul(c, fixed.get(i, g)));
            }
        }
        if eval(&x, false).iter().all(|&v| v % zp.modulus() == 0) {
            root = Some(x);
            break;
        }
    }
    let mut x = root.ok_or_else(|| Error::InvalidInput("defining polynomial has no root in the extension".into()))?;
    for _ in 0..z.m() {
        let fx = eval(&x, false);
        let dfx = big.inv_unit(&eval(&x, true))?;
        x = big.sub(&x, &big.mul(&fx, &dfx));
    }
    Ok(x)
}

/// E = ⊗ W(F_{q_α^{N_α}})/p^m over R, with the embedding R → E and the
/// matrices of σ_α and of the q_α-power Frobenius τ_α = σ_α^{f_α} on E.
#[derive(Debug, Clone)]
pub struct Extension {
    pub ring: Arc<CoeffRing>,
    pub degrees: Vec<usize>,
    /// dim E × dim R.
    pub embed: Mat,
    pub frob: Vec<Mat>,
    pub tau: Vec<Mat>,
}

impl Extension {
    pub fn new(base: &FiniteBase, mult: &[usize]) -> Result<Self> {
        let cr = base.coeffs();
        let z = base.zpm();
        let n = base.nvars();
        if mult.len() != n || mult.contains(&0) {
            return Err(Error::InvalidInput("one positive extension degree per variable".into()));
        }
        let degrees: Vec<usize> = (0..n).map(|a| cr.degrees()[a] * mult[a]).collect();
        let big = Arc::new(CoeffRing::new(z, &degrees)?);
        let gens: Vec<Vec<u64>> = (0..n)
            .map(|a| {
                if mult[a] == 1 {
                    Ok(cr.factor(a).theta())
                } else {
                    embed_generator(cr.factor(a), big.factor(a))
                }
            })
            .collect::<Result<_>>()?;
        // Powers of each embedded generator.
        let pows: Vec<Vec<Vec<u64>>> = (0..n)
            .map(|a| {
                let ctx = big.factor(a);
                let mut out = vec![ctx.one()];
                for _ in 1..cr.degrees()[a] {
                    out.push(ctx.mul(out.last().unwrap(), &gens[a]));
                }
                out
            })
            .collect();
        let mut embed = Mat::zeros(z, big.dim(), cr.dim());
        for j in 0..cr.dim() {
            let ex = cr.basis_exponents(j);
            for i in 0..big.dim() {
                let bx = big.basis_exponents(i);
                let mut v = 1 % z.modulus();
                for a in 0..n {
                    v = z.mul(v, *pows[a][ex[a]].get(bx[a]).unwrap_or(&0));
                }
                embed.set(i, j, v);
            }
        }
        let frob: Vec<Mat> = (0..n).map(|a| big.frobenius_matrix(a)).collect();
        let tau = (0..n).map(|a| frob[a].pow(cr.degrees()[a] as u64)).collect();
        Ok(Extension {
            ring: big,
            degrees,
            embed,
            frob,
            tau,
        })
    }

    pub fn dim(&self) -> usize {
        self.ring.dim()
    }

    pub fn embed_coeff(&self, c: &[u64]) -> Coeff {
        self.embed.mul_vec(c).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_counts() {
        for (p, degs, g, l) in [(2u64, vec![1, 1], 1, 1), (2, vec![2, 2], 2, 2), (3, vec![2, 3], 1, 6), (2, vec![2], 1, 2)] {
            let labels: Vec<&str> = ["a", "b"][..degs.len()].to_vec();
            let b = FiniteBase::new(p, 2, &labels, &degs).unwrap();
            assert_eq!(b.num_components(), g);
            assert_eq!(b.residue_degree(), l);
            let cr = b.coeffs();
            let sum = b.idempotents().iter().fold(cr.zero(), |acc, e| cr.add(&acc, e));
            assert_eq!(sum, cr.one());
            for e in b.idempotents() {
                assert_eq!(cr.mul(e, e), *e);
            }
        }
        // F_4 ⊗ F_4 ≅ F_4 × F_4, and σ_a swaps the two factors.
        let b = FiniteBase::new(2, 1, &["a", "b"], &[2, 2]).unwrap();
        assert_eq!(b.permutation(0), &[1, 0]);
    }

    #[test]
    fn extension_embedding_is_a_ring_map() {
        let b = FiniteBase::new(3, 2, &["a", "b"], &[2, 1]).unwrap();
        let e = Extension::new(&b, &[3, 2]).unwrap();
        let cr = b.coeffs();
        for i in 0..cr.dim() {
            for j in 0..cr.dim() {
                let lhs = e.embed_coeff(&cr.mul(&cr.basis(i), &cr.basis(j)));
                let rhs = e.ring.mul(&e.embed_coeff(&cr.basis(i)), &e.embed_coeff(&cr.basis(j)));
                assert_eq!(lhs, rhs);
            }
            // σ_a commutes with the embedding.
            let lhs = e.embed_coeff(&cr.frobenius(&cr.basis(i), 0));
            let rhs = e.ring.frobenius(&e.embed_coeff(&cr.basis(i)), 0);
            assert_eq!(lhs, rhs);
        }
    }
}
