//! The finite étale algebra S = R[T_1, …, T_r]/(T^p − B·T), B = A^{-1}, A the
//! total Frobenius matrix of an étale φ-module over R mod p. Its points over
//! F̄_p are the φ-invariants of D ⊗ F̄_p.

use super::base::{Extension, FiniteBase};
use super::descent::{PhiModFin, MAX_EXTENSION};
use crate::coeff::{Coeff, CoeffRing};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct RepresentingAlgebra {
    pub p: u64,
    pub rank: usize,
    /// Row-major r×r matrix B over R (integer coordinates).
    pub relation: Vec<Vec<u64>>,
    /// Exponent vectors of the R-basis of S, in {0, …, p−1}^r.
    pub monomials: Vec<Vec<u32>>,
    /// structure[a][b][c]: coefficient of monomial c in monomial a · monomial b.
    pub structure: Vec<Vec<Vec<Vec<u64>>>>,
    pub jacobian_full_rank: Vec<bool>,
    /// Points over F̄_p above each component of R.
    pub points: Vec<u64>,
    /// Uniform extension degree at which all points became rational.
    pub splitting_degree: usize,
}

type Poly = BTreeMap<Vec<u32>, Coeff>;

fn reduce(cr: &CoeffRing, b: &[Coeff], r: usize, p: u32, mut poly: Poly) -> Poly {
    let mut out = Poly::new();
    while let Some((e, c)) = poly.pop_first() {
        match e.iter().position(|&x| x >= p) {
            None => {
                let slot = out.entry(e).or_insert_with(|| cr.zero());
                *slot = cr.add(slot, &c);
            }
            Some(i) => {
                // T_i^p = Σ_j B_ij T_j.
                for j in 0..r {
                    let bij = &b[i * r + j];
                    if cr.is_zero(bij) {
                        continue;
                    }
                    let mut f = e.clone();
                    f[i] -= p;
                    f[j] += 1;
                    let slot = poly.entry(f).or_insert_with(|| cr.zero());
                    *slot = cr.add(slot, &cr.mul(&c, bij));
                }
            }
        }
    }
    out.retain(|_, c| !cr.is_zero(c));
    out
}

pub fn representing_algebra(d: &PhiModFin) -> Result<RepresentingAlgebra> {
    let base = &d.base;
    let z = base.zpm();
    if z.m() != 1 {
        return Err(Error::InvalidInput("the representing algebra is defined mod p".into()));
    }
    d.validate_etale()?;
    let cr = base.coeffs();
    let r = d.rank;
    let p = z.p();
    let a = d.total_frobenius();
    let amap = base.linear_map(&a, r);
    let bmap = amap.inverse().map_err(|_| Error::NotEtale("total Frobenius is not invertible".into()))?;
    let dr = base.dim();
    // Column j*dr + 0 of the inverse map is the image of e_j·1.
    let b: Vec<Coeff> = (0..r * r)
        .map(|k| {
            let (i, j) = (k / r, k % r);
            let col = bmap.col(j * dr);
            col[i * dr..(i + 1) * dr].iter().copied().collect()
        })
        .collect();

    let nmon = (p as usize).pow(r as u32);
    let monomials: Vec<Vec<u32>> = (0..nmon)
        .map(|mut k| {
            let mut e = vec![0u32; r];
            for x in e.iter_mut().rev() {
                *x = (k % p as usize) as u32;
                k /= p as usize;
            }
            e
        })
        .collect();
    let index: BTreeMap<Vec<u32>, usize> = monomials.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let mut structure = Vec::with_capacity(nmon);
    for ea in &monomials {
        let mut row = Vec::with_capacity(nmon);
        for eb in &monomials {
            let prod: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let red = reduce(cr, &b, r, p as u32, Poly::from([(prod, cr.one())]));
            let mut coeffs = vec![vec![0u64; dr]; nmon];
            for (e, c) in red {
                coeffs[index[&e]] = c.to_vec();
            }
            row.push(coeffs);
        }
        structure.push(row);
    }

    // Jacobian of T_i^p − Σ_j B_ij T_j is −B mod p.
    let dl = base.residue_degree();
    let jacobian_full_rank = base
        .idempotents()
        .iter()
        .map(|e| {
            let proj = Mat::identity(z, r).kron(&cr.mult_matrix(e));
            bmap.mul(&proj).rank_mod_p() == dl * r
        })
        .collect();

    let (points, splitting_degree) = count_points(base, &b, r)?;
    Ok(RepresentingAlgebra {
        p,
        rank: r,
        relation: b.iter().map(|c| c.to_vec()).collect(),
        monomials,
        structure,
        jacobian_full_rank,
        points,
        splitting_degree,
    })
}

/// Solutions of x^p = B x in each field component of E^r, for growing E,
/// until every component has a full r-dimensional solution space.
fn count_points(base: &FiniteBase, b: &[Coeff], r: usize) -> Result<(Vec<u64>, usize)> {
    let z = base.zpm();
    let p = z.p();
    for nn in 1..=MAX_EXTENSION {
        let ext = Extension::new(base, &vec![nn; base.nvars()])?;
        let labels: Vec<&str> = base.ring().labels().iter().map(String::as_str).collect();
        let ebase = FiniteBase::new(p, 1, &labels, &ext.degrees)?;
        let er = &ext.ring;
        let de = ext.dim();
        let w = r * de;
        let mut abs = Mat::identity(z, de);
        for f in &ext.frob {
            abs = abs.mul(f);
        }
        let be: Vec<Coeff> = b.iter().map(|c| ext.embed_coeff(c)).collect();
        let lhs = Mat::identity(z, r).kron(&abs).sub(&super::base::linear_map(er, &be, r));
        let id = Mat::identity(z, w);
        let mut points = Vec::new();
        let mut complete = true;
        for e in base.idempotents() {
            let ie = ext.embed_coeff(e);
            let mut dims = Vec::new();
            for ek in ebase.idempotents() {
                let over = er.mul(&ie, ek);
                if cr_is_zero(&over) {
                    continue;
                }
                let proj = Mat::identity(z, r).kron(&er.mult_matrix(ek));
                let sys = Mat::vstack(&[&lhs, &id.sub(&proj)]);
                dims.push(sys.kernel_profile().1);
            }
            if dims.iter().any(|&k| k != r) {
                complete = false;
                break;
            }
            points.push(p.pow(dims[0] as u32));
        }
        if complete {
            return Ok((points, nn));
        }
    }
    Err(Error::Inconclusive(format!(
        "points not all rational over extensions of degree at most {MAX_EXTENSION}"
    )))
}

fn cr_is_zero(c: &[u64]) -> bool {
    c.iter().all(|&x| x == 0)
}
