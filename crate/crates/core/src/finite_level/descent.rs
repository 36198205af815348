//! The functors V ↦ D(V) = (V ⊗ W(R̄))^G and D ↦ V(D) = (D ⊗ W(R̄))^{φ=1}
//! between representations of ∏_α Gal(F̄_p | F_{q_α}) on finite free Z/p^m
//! modules and étale φ-modules over R = ⊗ W(F_{q_α})/p^m.
//!
//! Both directions work inside a finite extension E of R that splits the
//! data: for D(V), E trivializes V and D is cut out by linear algebra and
//! given an R-basis through twisted traces; for V(D), a φ-invariant basis is
//! found mod p by a Lang-type fixed-point solve and lifted one power of p at
//! a time by solving σ_α(X) − X = −A_α.

use super::base::{linear_map, Extension, FiniteBase};
use crate::coeff::{Coeff, Zpm};
use crate::complexes::{CohomologyProfile, TruncatedComplex};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::phigamma::{default_character, EtalePhiGammaModule, GammaGen, SeriesMatrix};
use crate::series::LaurentSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Largest extension degree tried when trivializing.
pub const MAX_EXTENSION: usize = 12;

/// Commuting matrices ρ_α ∈ GL_r(Z/p^m), the images of the q_α-power
/// Frobenius generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GaloisRepFin {
    pub base: Arc<FiniteBase>,
    pub rho: Vec<Mat>,
}

/// An étale φ-module over the finite base: φ_α(e_j) = Σ_i F_α[i][j] e_i.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiModFin {
    pub base: Arc<FiniteBase>,
    pub rank: usize,
    /// Row-major r×r matrices over R, one per variable.
    pub frob: Vec<Vec<Coeff>>,
}

fn order(a: &Mat, cap: usize) -> Option<usize> {
    let id = Mat::identity(a.zpm(), a.rows());
    let mut x = a.clone();
    for k in 1..=cap {
        if x == id {
            return Some(k);
        }
        x = x.mul(a);
    }
    None
}

impl GaloisRepFin {
    pub fn new(base: Arc<FiniteBase>, rho: Vec<Mat>) -> Result<Self> {
        if rho.len() != base.nvars() {
            return Err(Error::InvalidInput(format!(
                "{} matrices for {} variables",
                rho.len(),
                base.nvars()
            )));
        }
        let r = rho.first().map_or(0, |m| m.rows());
        if r == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        for m in &rho {
            if m.rows() != r || m.cols() != r || m.zpm() != base.zpm() {
                return Err(Error::InvalidInput("matrices must be square of equal size over Z/p^m".into()));
            }
            if !m.is_invertible() {
                return Err(Error::InvalidInput("representation matrices must be invertible".into()));
            }
        }
        for a in 0..rho.len() {
            for b in a + 1..rho.len() {
                if rho[a].mul(&rho[b]) != rho[b].mul(&rho[a]) {
                    return Err(Error::CommutationFailure {
                        relation: format!("rho_{a}/rho_{b}"),
                        witness: "matrices do not commute".into(),
                    });
                }
            }
        }
        Ok(GaloisRepFin { base, rho })
    }

    pub fn trivial(base: Arc<FiniteBase>, r: usize) -> Self {
        let id = Mat::identity(base.zpm(), r);
        let n = base.nvars();
        GaloisRepFin { base, rho: vec![id; n] }
    }

    pub fn rank(&self) -> usize {
        self.rho[0].rows()
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let rho = self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| {
                let z = a.zpm();
                let (r, s) = (a.rows(), b.rows());
                let mut m = Mat::zeros(z, r + s, r + s);
                for i in 0..r {
                    for j in 0..r {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..s {
                    for j in 0..s {
                        m.set(r + i, r + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        Self::new(self.base.clone(), rho)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(self.base.clone(), self.rho.iter().zip(&other.rho).map(|(a, b)| a.kron(b)).collect())
    }

    /// Orders of the ρ_α.
    pub fn orders(&self) -> Result<Vec<usize>> {
        self.rho
            .iter()
            .map(|m| order(m, 4096).ok_or_else(|| Error::InvalidInput("matrix order exceeds 4096".into())))
            .collect()
    }
}

impl PhiModFin {
    pub fn new(base: Arc<FiniteBase>, rank: usize, frob: Vec<Vec<Coeff>>) -> Result<Self> {
        if frob.len() != base.nvars() || frob.iter().any(|f| f.len() != rank * rank) || rank == 0 {
            return Err(Error::InvalidInput("one r×r Frobenius matrix per variable".into()));
        }
        Ok(PhiModFin { base, rank, frob })
    }

    pub fn trivial(base: Arc<FiniteBase>, r: usize) -> Self {
        let cr = base.coeffs().clone();
        let id: Vec<Coeff> = (0..r * r).map(|k| if k % (r + 1) == 0 { cr.one() } else { cr.zero() }).collect();
        let n = base.nvars();
        PhiModFin {
            base,
            rank: r,
            frob: vec![id; n],
        }
    }

    /// Z/p^m-linear matrix of φ_α on D ≅ R^r.
    pub fn phi_map(&self, alpha: usize) -> Mat {
        self.base
            .linear_map(&self.frob[alpha], self.rank)
            .mul(&self.base.frobenius_map(alpha, self.rank))
    }

    pub fn validate_etale(&self) -> Result<()> {
        for (a, f) in self.frob.iter().enumerate() {
            if !self.base.linear_map(f, self.rank).is_invertible() {
                return Err(Error::NotEtale(format!(
                    "Frobenius matrix for {} is not invertible",
                    self.base.ring().labels()[a]
                )));
            }
        }
        Ok(())
    }

    /// The partial Frobenii commute: F_α σ_α(F_β) = F_β σ_β(F_α).
    pub fn validate_commutation(&self) -> Result<()> {
        for a in 0..self.frob.len() {
            for b in a + 1..self.frob.len() {
                if self.phi_map(a).mul(&self.phi_map(b)) != self.phi_map(b).mul(&self.phi_map(a)) {
                    return Err(Error::CommutationFailure {
                        relation: format!("F_{a}/F_{b}"),
                        witness: "partial Frobenii do not commute".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Total Frobenius φ_Δ = φ_1 ∘ ⋯ ∘ φ_n as a matrix over R:
    /// A = F_1 σ_1(F_2 σ_2(⋯ F_n)).
    pub fn total_frobenius(&self) -> Vec<Coeff> {
        let cr = self.base.coeffs();
        let r = self.rank;
        let n = self.frob.len();
        let mut acc = self.frob[n - 1].clone();
        for a in (0..n - 1).rev() {
            let s: Vec<Coeff> = acc.iter().map(|c| cr.frobenius(c, a)).collect();
            acc = mat_mul(cr, &self.frob[a], &s, r);
        }
        acc
    }

    /// The series-level module with the same constant Frobenius matrices and
    /// trivial Γ-action.
    pub fn to_series_module(&self) -> Result<EtalePhiGammaModule> {
        let ring = self.base.ring();
        let r = self.rank;
        let frob = self
            .frob
            .iter()
            .map(|f| SeriesMatrix::new(r, r, f.iter().map(|c| LaurentSeries::constant(ring, c.clone())).collect()))
            .collect::<Result<_>>()?;
        let g = GammaGen {
            matrix: SeriesMatrix::identity(ring, r),
            chi: default_character(ring.p()),
        };
        EtalePhiGammaModule::new(ring, frob, vec![g; self.frob.len()], vec![None; self.frob.len()])
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let cr = self.base.coeffs();
        let (r, s) = (self.rank, other.rank);
        let t = r + s;
        let frob = self
            .frob
            .iter()
            .zip(&other.frob)
            .map(|(a, b)| {
                let mut m = vec![cr.zero(); t * t];
                for i in 0..r {
                    for j in 0..r {
                        m[i * t + j] = a[i * r + j].clone();
                    }
                }
                for i in 0..s {
                    for j in 0..s {
                        m[(r + i) * t + r + j] = b[i * s + j].clone();
                    }
                }
                m
            })
            .collect();
        Self::new(self.base.clone(), t, frob)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let cr = self.base.coeffs();
        let (r, s) = (self.rank, other.rank);
        let t = r * s;
        let frob = self
            .frob
            .iter()
            .zip(&other.frob)
            .map(|(a, b)| {
                let mut m = vec![cr.zero(); t * t];
                for i in 0..r {
                    for k in 0..s {
                        for j in 0..r {
                            for l in 0..s {
                                m[(i * s + k) * t + j * s + l] = cr.mul(&a[i * r + j], &b[k * s + l]);
                            }
                        }
                    }
                }
                m
            })
            .collect();
        Self::new(self.base.clone(), t, frob)
    }
}

pub(crate) fn mat_mul(cr: &crate::coeff::CoeffRing, a: &[Coeff], b: &[Coeff], r: usize) -> Vec<Coeff> {
    let mut out = vec![cr.zero(); r * r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = cr.zero();
            for k in 0..r {
                acc = cr.add(&acc, &cr.mul(&a[i * r + k], &b[k * r + j]));
            }
            out[i * r + j] = acc;
        }
    }
    out
}

/// Matrix of a Z/p^m-linear operator on E given as a dim E square matrix,
/// applied coordinatewise on E^r.
fn on_each(r: usize, m: &Mat) -> Mat {
    Mat::identity(m.zpm(), r).kron(m)
}

/// D(V) = (V ⊗ E)^G for E splitting V, with an R-basis assembled component
/// by component from twisted traces Σ_{g ∈ G} g·x.
pub fn functor_d(v: &GaloisRepFin) -> Result<PhiModFin> {
    let base = &v.base;
    let z = base.zpm();
    let cr = base.coeffs();
    let (r, dr) = (v.rank(), base.dim());
    let orders = v.orders()?;
    let ext = Extension::new(base, &orders)?;
    let de = ext.dim();
    let w = r * de;
    let id = Mat::identity(z, w);
    let gens: Vec<Mat> = (0..base.nvars()).map(|a| v.rho[a].kron(&ext.tau[a])).collect();

    let stacked: Vec<Mat> = gens.iter().map(|g| g.sub(&id)).collect();
    let refs: Vec<&Mat> = stacked.iter().collect();
    let (tors, free) = Mat::vstack(&refs).kernel_profile();
    if !tors.is_empty() || free != r * dr {
        return Err(Error::InvalidInput(format!(
            "invariants have profile {tors:?}+{free}, expected a free module of rank {}",
            r * dr
        )));
    }

    // Twisted trace ∏_α Σ_j g_α^j.
    let mut trace = id.clone();
    for (a, g) in gens.iter().enumerate() {
        let mut s = Mat::zeros(z, w, w);
        let mut pw = id.clone();
        for _ in 0..orders[a] {
            s = s.add(&pw);
            pw = pw.mul(g);
        }
        trace = s.mul(&trace);
    }

    let mult: Vec<Mat> = (0..dr)
        .map(|b| on_each(r, &ext.ring.mult_matrix(&ext.embed_coeff(&cr.basis(b)))))
        .collect();
    let multiples = |x: &[u64]| -> Vec<Vec<u64>> { mult.iter().map(|m| m.mul_vec(x)).collect() };

    let mut basis: Vec<Vec<u64>> = vec![vec![0; w]; r];
    for e in base.idempotents() {
        let proj = on_each(r, &ext.ring.mult_matrix(&ext.embed_coeff(e)));
        let mut chosen: Vec<Vec<u64>> = Vec::new();
        let mut span: Vec<Vec<u64>> = Vec::new();
        let mut rank = 0;
        for c in 0..w {
            if chosen.len() == r {
                break;
            }
            let y = proj.mul_vec(&trace.col(c));
            if y.iter().all(|&t| t % z.p() == 0) {
                continue;
            }
            let mut trial = span.clone();
            trial.extend(multiples(&y));
            let rk = Mat::from_cols(z, w, &trial).rank_mod_p();
            if rk > rank {
                rank = rk;
                span = trial;
                chosen.push(y);
            }
        }
        if chosen.len() < r {
            return Err(Error::InvalidInput("twisted traces do not span the invariants".into()));
        }
        for (i, y) in chosen.into_iter().enumerate() {
            basis[i] = basis[i].iter().zip(&y).map(|(&s, &t)| z.add(s, t)).collect();
        }
    }

    let mut cols = Vec::with_capacity(r * dr);
    for d in &basis {
        cols.extend(multiples(d));
    }
    let bm = Mat::from_cols(z, w, &cols);
    if bm.rank_mod_p() != r * dr {
        return Err(Error::InvalidInput("assembled vectors are not an R-basis".into()));
    }

    let mut frob = Vec::new();
    for a in 0..base.nvars() {
        let phi = on_each(r, &ext.frob[a]);
        let rhs: Vec<Vec<u64>> = basis.iter().map(|d| phi.mul_vec(d)).collect();
        let sols = bm
            .solve_many(&rhs)
            .ok_or_else(|| Error::InvalidInput("φ does not preserve the invariants".into()))?;
        let mut f = vec![cr.zero(); r * r];
        for (j, x) in sols.iter().enumerate() {
            for i in 0..r {
                f[i * r + j] = x[i * dr..(i + 1) * dr].iter().copied().collect();
            }
        }
        frob.push(f);
    }
    PhiModFin::new(base.clone(), r, frob)
}

/// A φ-invariant E-basis of D ⊗ E (columns of U), if E is large enough.
fn invariant_basis(d: &PhiModFin, ext: &Extension) -> Result<Option<Vec<Vec<u64>>>> {
    let base = &d.base;
    let z = base.zpm();
    let zp = Zpm::new(z.p(), 1)?;
    let r = d.rank;
    let de = ext.dim();
    let w = r * de;
    let er = &ext.ring;
    let n = base.nvars();
    let phis: Vec<Mat> = (0..n)
        .map(|a| {
            let fe: Vec<Coeff> = d.frob[a].iter().map(|c| ext.embed_coeff(c)).collect();
            linear_map(er, &fe, r).mul(&on_each(r, &ext.frob[a]))
        })
        .collect();
    let id = Mat::identity(z, w);

    // Mod p: the common fixed space of all Φ_α.
    let stacked: Vec<Mat> = phis.iter().map(|f| f.sub(&id).reduce(zp)).collect();
    let refs: Vec<&Mat> = stacked.iter().collect();
    let ker = Mat::vstack(&refs).kernel();
    if ker.cols() < r {
        return Ok(None);
    }
    let mut u: Vec<Vec<u64>> = (0..ker.cols()).map(|j| ker.col(j)).collect();
    u.truncate(r);

    let emult: Vec<Mat> = (0..de).map(|b| on_each(r, &er.mult_matrix(&er.basis(b)))).collect();
    // E-linear map E^r → D ⊗ E, X ↦ Σ_j X_j u_j.
    let lu = |u: &[Vec<u64>]| -> Mat {
        let mut cols = Vec::with_capacity(w);
        for uj in u {
            for m in &emult {
                cols.push(m.mul_vec(uj));
            }
        }
        Mat::from_cols(z, w, &cols)
    };
    if lu(&u).rank_mod_p() != w {
        return Ok(None);
    }

    for k in 1..z.m() {
        let l = lu(&u);
        let linv = l.inverse()?;
        let sig_minus: Vec<Mat> = (0..n)
            .map(|a| on_each(r, &ext.frob[a]).sub(&Mat::identity(z, w)).reduce(zp))
            .collect();
        let refs: Vec<&Mat> = sig_minus.iter().collect();
        let system = Mat::vstack(&refs);
        let pk = z.p_pow(k);
        let mut xs = Vec::with_capacity(r);
        for j in 0..r {
            // Column j of U^{-1} Φ_α U − I, divided by p^k, for every α.
            let mut rhs = Vec::with_capacity(n * w);
            for phi in &phis {
                let mut col = linv.mul_vec(&phi.mul_vec(&u[j]));
                col[j * de] = z.sub(col[j * de], 1);
                for c in col.iter_mut() {
                    if *c % pk != 0 {
                        return Err(Error::InvalidInput(format!("basis is not invariant mod p^{k}")));
                    }
                    *c = zp.neg((*c / pk) % zp.modulus());
                }
                rhs.extend(col);
            }
            match system.solve(&rhs) {
                Some(x) => xs.push(x),
                None => return Ok(None),
            }
        }
        // U ← U (I + p^k X).
        let updates: Vec<Vec<u64>> = xs.iter().map(|x| l.mul_vec(x)).collect();
        for (uj, dx) in u.iter_mut().zip(updates) {
            for (a, b) in uj.iter_mut().zip(dx) {
                *a = z.add(*a, z.mul(pk, b));
            }
        }
    }
    for phi in &phis {
        for uj in &u {
            if phi.mul_vec(uj) != *uj {
                return Err(Error::InvalidInput("lifted basis is not φ-invariant".into()));
            }
        }
    }
    Ok(Some(u))
}

/// V(D) = (D ⊗ E)^{φ=1} for the smallest uniform extension degree that works,
/// with G acting through τ_α on E.
pub fn functor_v(d: &PhiModFin) -> Result<GaloisRepFin> {
    d.validate_etale()?;
    let base = &d.base;
    let z = base.zpm();
    let r = d.rank;
    for nn in 1..=MAX_EXTENSION {
        let ext = Extension::new(base, &vec![nn; base.nvars()])?;
        let Some(u) = invariant_basis(d, &ext)? else {
            continue;
        };
        let w = r * ext.dim();
        let um = Mat::from_cols(z, w, &u);
        let mut rho = Vec::new();
        for a in 0..base.nvars() {
            let t = on_each(r, &ext.tau[a]);
            let rhs: Vec<Vec<u64>> = u.iter().map(|x| t.mul_vec(x)).collect();
            let sols = um
                .solve_many(&rhs)
                .ok_or_else(|| Error::InvalidInput("Galois action leaves the invariants".into()))?;
            rho.push(Mat::from_cols(z, r, &sols));
        }
        return GaloisRepFin::new(base.clone(), rho);
    }
    Err(Error::Inconclusive(format!(
        "no trivializing extension of degree at most {MAX_EXTENSION}"
    )))
}

/// Searches the Z/p^m-span of the kernel generators for an element accepted
/// by `ok`: first small combinations in order, then seeded random ones.
/// Invertible elements of a Hom space between isomorphic objects form a
/// positive proportion of it, so the random phase succeeds quickly when an
/// isomorphism exists.
fn search_span(ker: &Mat, ok: impl Fn(&[u64]) -> bool) -> Option<Vec<u64>> {
    let z = ker.zpm();
    let q = z.modulus();
    let k = ker.cols();
    let combine = |coeffs: &[u64]| -> Vec<u64> {
        let mut x = vec![0u64; ker.rows()];
        for (g, &c) in coeffs.iter().enumerate().filter(|(_, &c)| c != 0) {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = z.add(*xi, z.mul(c, ker.get(i, g)));
            }
        }
        x
    };
    let ordered = (q as usize).checked_pow(k as u32).unwrap_or(usize::MAX).min(ORDERED_TRIES);
    for idx in 0..ordered {
        let mut t = idx;
        let coeffs: Vec<u64> = (0..k)
            .map(|_| {
                let c = (t % q as usize) as u64;
                t /= q as usize;
                c
            })
            .collect();
        let x = combine(&coeffs);
        if ok(&x) {
            return Some(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..RANDOM_TRIES {
        let coeffs: Vec<u64> = (0..k).map(|_| rng.gen_range(0..q)).collect();
        let x = combine(&coeffs);
        if ok(&x) {
            return Some(x);
        }
    }
    None
}

const ORDERED_TRIES: usize = 4096;
const RANDOM_TRIES: usize = 50_000;

/// Invertible P with P ρ^a_α = ρ^b_α P for every α (an isomorphism a → b).
pub fn rep_isomorphism(a: &GaloisRepFin, b: &GaloisRepFin) -> Result<Mat> {
    let r = a.rank();
    if b.rank() != r {
        return Err(Error::IsomorphismNotFound("ranks differ".into()));
    }
    let z = a.base.zpm();
    let mut blocks = Vec::new();
    for (ra, rb) in a.rho.iter().zip(&b.rho) {
        let mut cols = Vec::with_capacity(r * r);
        for idx in 0..r * r {
            let mut p = Mat::zeros(z, r, r);
            p.set(idx / r, idx % r, 1);
            let d = p.mul(ra).sub(&rb.mul(&p));
            cols.push((0..r * r).map(|k| d.get(k / r, k % r)).collect::<Vec<_>>());
        }
        blocks.push(Mat::from_cols(z, r * r, &cols));
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    let ker = Mat::vstack(&refs).kernel();
    let to_mat = |x: &[u64]| {
        let mut p = Mat::zeros(z, r, r);
        for k in 0..r * r {
            p.set(k / r, k % r, x[k]);
        }
        p
    };
    search_span(&ker, |x| to_mat(x).is_invertible())
        .map(|x| to_mat(&x))
        .ok_or_else(|| Error::IsomorphismNotFound("no invertible intertwiner".into()))
}

/// Invertible P over R with F^b_α σ_α(P) = P F^a_α: the map a → b sending
/// e^a_j to Σ_i P_ij e^b_i.
pub fn phi_isomorphism(a: &PhiModFin, b: &PhiModFin) -> Result<Vec<Coeff>> {
    let r = a.rank;
    if b.rank != r || *a.base != *b.base {
        return Err(Error::IsomorphismNotFound("ranks or bases differ".into()));
    }
    let base = &a.base;
    let cr = base.coeffs();
    let z = base.zpm();
    let dr = base.dim();
    let unknowns = r * r * dr;
    let unpack = |x: &[u64]| -> Vec<Coeff> { (0..r * r).map(|k| x[k * dr..(k + 1) * dr].iter().copied().collect()).collect() };
    let pack = |m: &[Coeff]| -> Vec<u64> { m.iter().flat_map(|c| c.iter().copied()).collect() };
    let mut blocks = Vec::new();
    for alpha in 0..base.nvars() {
        let mut cols = Vec::with_capacity(unknowns);
        for u in 0..unknowns {
            let mut x = vec![0u64; unknowns];
            x[u] = 1;
            let p = unpack(&x);
            let sp: Vec<Coeff> = p.iter().map(|c| cr.frobenius(c, alpha)).collect();
            let lhs = mat_mul(cr, &b.frob[alpha], &sp, r);
            let rhs = mat_mul(cr, &p, &a.frob[alpha], r);
            let diff: Vec<Coeff> = lhs.iter().zip(&rhs).map(|(x, y)| cr.sub(x, y)).collect();
            cols.push(pack(&diff));
        }
        blocks.push(Mat::from_cols(z, unknowns, &cols));
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    let ker = Mat::vstack(&refs).kernel();
    search_span(&ker, |x| base.linear_map(&unpack(x), r).is_invertible())
        .map(|x| unpack(&x))
        .ok_or_else(|| Error::IsomorphismNotFound("no invertible φ-equivariant map".into()))
}

/// V(D(V)) ≅ V; returns the isomorphism matrix.
pub fn roundtrip_check(v: &GaloisRepFin) -> Result<Mat> {
    let d = functor_d(v)?;
    let v2 = functor_v(&d)?;
    rep_isomorphism(&v2, v)
}

/// D(V(D)) ≅ D; returns the isomorphism matrix over R.
pub fn roundtrip_check_d(d: &PhiModFin) -> Result<Vec<Coeff>> {
    let v = functor_v(d)?;
    let d2 = functor_d(&v)?;
    phi_isomorphism(&d2, d)
}

/// Cohomology of the Koszul complex on (ρ_α − 1): the continuous cohomology
/// of the commuting generators.
pub fn koszul_oracle(v: &GaloisRepFin) -> Result<CohomologyProfile> {
    TruncatedComplex::koszul(v.base.zpm(), v.rank(), &v.rho)?.cohomology(None)
}

/// The Φ-complex of D over the finite base.
pub fn phi_complex(d: &PhiModFin) -> Result<TruncatedComplex> {
    let ops: Vec<Mat> = (0..d.base.nvars()).map(|a| d.phi_map(a)).collect();
    TruncatedComplex::koszul(d.base.zpm(), d.rank * d.base.dim(), &ops)
}

pub fn phi_cohomology(d: &PhiModFin) -> Result<CohomologyProfile> {
    phi_complex(d)?.cohomology(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffRing;
    use crate::finite_level::representing_algebra;

    fn base(p: u64, m: u32, degrees: &[usize]) -> Arc<FiniteBase> {
        let labels: Vec<String> = (1..=degrees.len()).map(|i| format!("X{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Arc::new(FiniteBase::new(p, m, &refs, degrees).unwrap())
    }

    fn scalar_rep(b: &Arc<FiniteBase>, vals: &[i64]) -> GaloisRepFin {
        let rho = vals.iter().map(|&v| Mat::from_rows(b.zpm(), &[vec![v]])).collect();
        GaloisRepFin::new(b.clone(), rho).unwrap()
    }

    #[test]
    fn trivial_round_trips() {
        let b = base(2, 2, &[1, 2]);
        let v = GaloisRepFin::trivial(b.clone(), 2);
        let d = functor_d(&v).unwrap();
        assert!(phi_isomorphism(&d, &PhiModFin::trivial(b.clone(), 2)).is_ok());
        let v2 = functor_v(&PhiModFin::trivial(b.clone(), 2)).unwrap();
        assert_eq!(v2, v);
        roundtrip_check(&v).unwrap();
        roundtrip_check_d(&PhiModFin::trivial(b, 2)).unwrap();
    }

    #[test]
    fn lifting_matches_direct_search() {
        // F = (1 + 3) over Z/9: search W(F_27)/9 for units u with 4·σ(u) = u.
        let b = base(3, 2, &[1]);
        let cr = b.coeffs().clone();
        let d = PhiModFin::new(b.clone(), 1, vec![vec![cr.from_int(4)]]).unwrap();
        let v = functor_v(&d).unwrap();
        let big = CoeffRing::new(b.zpm(), &[3]).unwrap();
        let four = big.from_int(4);
        let mut expected = None;
        'outer: for k in 0..729u64 {
            let u: Coeff = (0..3).map(|i| (k / 9u64.pow(i)) % 9).collect();
            if !big.is_unit(&u) || big.mul(&four, &big.frobenius(&u, 0)) != u {
                continue;
            }
            let ratio = big.mul(&big.frobenius(&u, 0), &big.inv(&u).unwrap());
            expected = Some(big.as_scalar(&ratio).unwrap());
            break 'outer;
        }
        assert_eq!(v.rho[0].get(0, 0), expected.unwrap());
        assert_eq!(expected, Some(7));
    }

    #[test]
    fn unit_frobenius_over_f4_is_trivial() {
        // Over Z/2 every rank-1 representation is trivial; D = (ω) is its
        // module up to change of basis.
        let b = base(2, 1, &[2]);
        let omega = b.coeffs().basis(1);
        let d = PhiModFin::new(b.clone(), 1, vec![vec![omega]]).unwrap();
        let v = functor_v(&d).unwrap();
        assert_eq!(v, GaloisRepFin::trivial(b.clone(), 1));
        let p = phi_isomorphism(&PhiModFin::trivial(b.clone(), 1), &d).unwrap();
        assert!(b.coeffs().is_unit(&p[0]));
        roundtrip_check_d(&d).unwrap();
    }

    #[test]
    fn koszul_examples() {
        let b = base(3, 1, &[1, 1]);
        let prof = koszul_oracle(&GaloisRepFin::trivial(b, 1)).unwrap();
        assert_eq!(prof.free_ranks(), vec![1, 2, 1]);
        let b = base(3, 2, &[1]);
        let prof = koszul_oracle(&scalar_rep(&b, &[4])).unwrap();
        for deg in &prof.degrees {
            assert_eq!((deg.divisors.clone(), deg.free_rank), (vec![1], 0));
        }
    }

    #[test]
    fn phi_complex_matches_oracle() {
        let b = base(3, 2, &[2, 1]);
        for vals in [[4, 1], [7, 4], [8, 1], [2, 5]] {
            let v = scalar_rep(&b, &vals);
            let d = functor_d(&v).unwrap();
            let lhs = phi_cohomology(&d).unwrap();
            assert!(lhs.same_groups(&koszul_oracle(&v).unwrap()), "{vals:?}");
            roundtrip_check(&v).unwrap();
        }
    }

    #[test]
    fn non_etale_is_rejected() {
        let b = base(3, 1, &[1]);
        let d = PhiModFin::new(b.clone(), 1, vec![vec![b.coeffs().zero()]]).unwrap();
        assert!(matches!(functor_v(&d), Err(Error::NotEtale(_))));
    }

    #[test]
    fn representing_algebra_examples() {
        let b = base(2, 1, &[1]);
        let s = representing_algebra(&PhiModFin::trivial(b, 1)).unwrap();
        // T · T = T.
        assert_eq!(s.structure[1][1], vec![vec![0], vec![1]]);
        assert_eq!(s.points, vec![2]);
        let b = base(2, 1, &[2]);
        let cr = b.coeffs().clone();
        let omega = cr.basis(1);
        let s = representing_algebra(&PhiModFin::new(b, 1, vec![vec![omega.clone()]]).unwrap()).unwrap();
        assert_eq!(cr.mul(&s.relation[0].iter().copied().collect::<Coeff>(), &omega), cr.one());
        assert_eq!(s.points, vec![2]);
        assert!(s.jacobian_full_rank.iter().all(|&x| x));
    }
}
