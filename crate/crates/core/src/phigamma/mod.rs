//! Étale (φ, Γ)-modules over the truncated series ring, given by matrices on
//! a fixed basis.
//!
//! Conventions: an element with coordinate vector v maps to `F_α · φ_α(v)`
//! under φ_α and to `G_α · γ_α(v)` under the chosen generator γ_α of Γ_α,
//! whose cyclotomic character value is the exact integer `chi`.

pub mod corpus;
mod matrix;
pub mod schema;

pub use matrix::SeriesMatrix;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::{Exps, LaurentSeries, SeriesRing};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::{Arc, OnceLock};

/// Character value of the standard topological generator: 1 + p for odd p, 5 for p = 2.
pub fn default_character(p: u64) -> BigInt {
    if p == 2 {
        BigInt::from(5)
    } else {
        BigInt::from(1 + p)
    }
}

/// Teichmüller lift of the least primitive root mod p (−1 for p = 2), as an
/// integer correct modulo p^(m + 64).
pub fn teichmuller(p: u64, m: u32) -> BigInt {
    if p == 2 {
        return BigInt::from(-1);
    }
    let g = (2..p)
        .find(|&g| {
            let mut x = 1u64;
            (1..p - 1).all(|_| {
                x = x * g % p;
                x != 1
            })
        })
        .expect("a primitive root exists");
    let n = m + 64;
    let modulus = BigInt::from(p).pow(n);
    let mut x = BigInt::from(g);
    for _ in 0..n {
        x = x.modpow(&BigInt::from(p), &modulus);
    }
    x
}

/// A semilinear group generator: its matrix and the exact character value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaGen {
    pub matrix: SeriesMatrix,
    pub chi: BigInt,
}

/// Coordinates of a module element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleElement {
    pub coords: Vec<LaurentSeries>,
}

impl ModuleElement {
    pub fn new(coords: Vec<LaurentSeries>) -> Self {
        ModuleElement { coords }
    }
    pub fn zero(ring: &Arc<SeriesRing>, rank: usize) -> Self {
        ModuleElement {
            coords: vec![LaurentSeries::zero(ring); rank],
        }
    }
    /// `s` in coordinate i, exact zero elsewhere.
    pub fn single(rank: usize, i: usize, s: LaurentSeries) -> Self {
        let ring = s.ring().clone();
        let mut out = Self::zero(&ring, rank);
        out.coords[i] = s;
        out
    }
    pub fn rank(&self) -> usize {
        self.coords.len()
    }
    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(ModuleElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect::<Result<_>>()?,
        })
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(ModuleElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?,
        })
    }
    pub fn neg(&self) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|a| a.neg()).collect(),
        }
    }
    pub fn scale_int(&self, c: i64) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|a| a.scale_int(c)).collect(),
        }
    }
    pub fn mul_series(&self, s: &LaurentSeries) -> Result<Self> {
        Ok(ModuleElement {
            coords: self.coords.iter().map(|a| a.mul(s)).collect::<Result<_>>()?,
        })
    }
    pub fn truncate(&self, hi: &[i64]) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|a| a.truncate(hi)).collect(),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
    /// First (coordinate, monomial) where the elements differ on common windows.
    pub fn witness_difference(&self, other: &Self) -> Option<(usize, Exps)> {
        self.coords
            .iter()
            .zip(&other.coords)
            .enumerate()
            .find_map(|(i, (a, b))| a.witness_difference(b).map(|e| (i, e)))
    }
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.witness_difference(other).is_none()
    }
}

/// Relations checked by [`EtalePhiGammaModule::validate_commutation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationReport {
    pub relations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct EtalePhiGammaModule {
    ring: Arc<SeriesRing>,
    rank: usize,
    frob: Vec<SeriesMatrix>,
    gamma: Vec<GammaGen>,
    torsion: Vec<Option<GammaGen>>,
    frob_inv: OnceLock<Result<Vec<SeriesMatrix>>>,
}

impl PartialEq for EtalePhiGammaModule {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring
            && self.rank == other.rank
            && self.frob == other.frob
            && self.gamma == other.gamma
            && self.torsion == other.torsion
    }
}

impl EtalePhiGammaModule {
    pub fn new(
        ring: &Arc<SeriesRing>,
        frob: Vec<SeriesMatrix>,
        gamma: Vec<GammaGen>,
        torsion: Vec<Option<GammaGen>>,
    ) -> Result<Self> {
        let n = ring.nvars();
        if frob.len() != n || gamma.len() != n || torsion.len() != n {
            return Err(Error::InvalidInput(format!("expected one matrix of each kind per variable ({n})")));
        }
        let rank = frob[0].rows();
        let p = BigInt::from(ring.p());
        let mats = frob
            .iter()
            .chain(gamma.iter().map(|g| &g.matrix))
            .chain(torsion.iter().flatten().map(|g| &g.matrix));
        for m in mats {
            if m.rows() != rank || m.cols() != rank {
                return Err(Error::InvalidInput(format!("matrices must be {rank}x{rank}")));
            }
            if **m.ring() != **ring {
                return Err(Error::ContextMismatch("matrix over a different ring".into()));
            }
        }
        for g in gamma.iter().chain(torsion.iter().flatten()) {
            if g.chi.mod_floor(&p).is_zero() {
                return Err(Error::InvalidInput(format!("character value {} is not a unit", g.chi)));
            }
        }
        Ok(EtalePhiGammaModule {
            ring: ring.clone(),
            rank,
            frob,
            gamma,
            torsion,
            frob_inv: OnceLock::new(),
        })
    }

    /// The module with all matrices equal to the identity and the default
    /// characters (no torsion data).
    pub fn trivial(ring: &Arc<SeriesRing>, rank: usize) -> Self {
        let n = ring.nvars();
        let id = SeriesMatrix::identity(ring, rank);
        let chi = default_character(ring.p());
        Self::new(
            ring,
            vec![id.clone(); n],
            (0..n)
                .map(|_| GammaGen {
                    matrix: id.clone(),
                    chi: chi.clone(),
                })
                .collect(),
            vec![None; n],
        )
        .expect("trivial module is well formed")
    }

    /// Rank-1 module from scalar series for each F_α and G_α.
    pub fn rank_one(ring: &Arc<SeriesRing>, f: Vec<LaurentSeries>, g: Vec<LaurentSeries>) -> Result<Self> {
        let chi = default_character(ring.p());
        Self::new(
            ring,
            f.iter().map(|s| SeriesMatrix::scalar(ring, 1, s)).collect(),
            g.iter()
                .map(|s| GammaGen {
                    matrix: SeriesMatrix::scalar(ring, 1, s),
                    chi: chi.clone(),
                })
                .collect(),
            vec![None; ring.nvars()],
        )
    }

    /// Add torsion generators acting through the Teichmüller character with
    /// the given matrices.
    pub fn with_torsion(&self, matrices: Vec<SeriesMatrix>) -> Result<Self> {
        let omega = teichmuller(self.ring.p(), self.ring.m());
        let torsion = matrices
            .into_iter()
            .map(|matrix| {
                Some(GammaGen {
                    matrix,
                    chi: omega.clone(),
                })
            })
            .collect();
        Self::new(&self.ring, self.frob.clone(), self.gamma.clone(), torsion)
    }

    /// Torsion generators acting through ω with identity matrices.
    pub fn with_trivial_torsion(&self) -> Result<Self> {
        let id = SeriesMatrix::identity(&self.ring, self.rank);
        self.with_torsion(vec![id; self.nvars()])
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn nvars(&self) -> usize {
        self.ring.nvars()
    }
    pub fn frob(&self, alpha: usize) -> &SeriesMatrix {
        &self.frob[alpha]
    }
    pub fn gamma_gen(&self, alpha: usize) -> &GammaGen {
        &self.gamma[alpha]
    }
    pub fn torsion(&self, alpha: usize) -> Option<&GammaGen> {
        self.torsion[alpha].as_ref()
    }
    pub fn has_torsion(&self) -> bool {
        self.torsion.iter().any(|t| t.is_some())
    }

    fn check_element(&self, x: &ModuleElement) -> Result<()> {
        if x.rank() != self.rank {
            return Err(Error::InvalidInput(format!("element of rank {} for module of rank {}", x.rank(), self.rank)));
        }
        if x.coords.iter().any(|c| **c.ring() != *self.ring) {
            return Err(Error::ContextMismatch("element over a different ring".into()));
        }
        Ok(())
    }

    // ---------- validation ----------

    /// Inverses of the Frobenius matrices, computed once.
    pub fn frob_inverses(&self) -> Result<&[SeriesMatrix]> {
        let r = self.frob_inv.get_or_init(|| {
            self.frob
                .iter()
                .enumerate()
                .map(|(a, f)| {
                    f.inverse().map_err(|e| match e {
                        Error::NotAUnit => {
                            Error::NotEtale(format!("F_{} is not invertible", self.ring.labels()[a]))
                        }
                        other => other,
                    })
                })
                .collect()
        });
        match r {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    /// Succeeds when every F_α has a certified inverse.
    pub fn validate_etale(&self) -> Result<()> {
        self.frob_inverses().map(|_| ())
    }

    fn compare(&self, relation: String, lhs: SeriesMatrix, rhs: SeriesMatrix) -> Result<String> {
        match lhs.witness_difference(&rhs) {
            None => Ok(relation),
            Some((i, j, e)) => Err(Error::CommutationFailure {
                relation,
                witness: format!("entry ({i},{j}), exponent {:?}", e.as_slice()),
            }),
        }
    }

    /// Checks F_α·φ_α(F_β) = F_β·φ_β(F_α), F_α·φ_α(G_β) = G_β·γ_β(F_α),
    /// G_α·γ_α(G_β) = G_β·γ_β(G_α) and the analogous relations for torsion
    /// generators, on the windows where both sides are known.
    pub fn validate_commutation(&self) -> Result<CommutationReport> {
        self.validate_commutation_with(true)
    }

    /// As [`validate_commutation`](Self::validate_commutation); with
    /// `include_gamma = false` only the Frobenius relations are checked.
    pub fn validate_commutation_with(&self, include_gamma: bool) -> Result<CommutationReport> {
        let n = self.nvars();
        let lab = |a: usize| self.ring.labels()[a].clone();
        let mut relations = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let lhs = self.frob[a].mul(&self.frob[b].phi(a))?;
                let rhs = self.frob[b].mul(&self.frob[a].phi(b))?;
                relations.push(self.compare(format!("F_{}/F_{}", lab(a), lab(b)), lhs, rhs)?);
            }
        }
        if !include_gamma {
            return Ok(CommutationReport { relations });
        }
        // Each Γ-type generator: (name, variable, generator).
        let mut gens: Vec<(String, usize, &GammaGen)> = Vec::new();
        for b in 0..n {
            gens.push((format!("G_{}", lab(b)), b, &self.gamma[b]));
            if let Some(t) = &self.torsion[b] {
                gens.push((format!("T_{}", lab(b)), b, t));
            }
        }
        for a in 0..n {
            for (name, b, g) in &gens {
                let lhs = self.frob[a].mul(&g.matrix.phi(a))?;
                let rhs = g.matrix.mul(&self.frob[a].gamma(*b, &g.chi)?)?;
                relations.push(self.compare(format!("F_{}/{}", lab(a), name), lhs, rhs)?);
            }
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                let (na, a, ga) = &gens[i];
                let (nb, b, gb) = &gens[j];
                let lhs = ga.matrix.mul(&gb.matrix.gamma(*a, &ga.chi)?)?;
                let rhs = gb.matrix.mul(&ga.matrix.gamma(*b, &gb.chi)?)?;
                relations.push(self.compare(format!("{na}/{nb}"), lhs, rhs)?);
            }
        }
        Ok(CommutationReport { relations })
    }

    // ---------- operators ----------

    pub fn apply_phi(&self, alpha: usize, x: &ModuleElement) -> Result<ModuleElement> {
        self.check_element(x)?;
        let v: Vec<LaurentSeries> = x.coords.iter().map(|c| c.phi(alpha)).collect();
        Ok(ModuleElement::new(self.frob[alpha].mul_vec(&v)?))
    }

    fn apply_gen(&self, g: &GammaGen, alpha: usize, x: &ModuleElement) -> Result<ModuleElement> {
        self.check_element(x)?;
        let v: Vec<LaurentSeries> = x.coords.iter().map(|c| c.gamma(alpha, &g.chi)).collect::<Result<_>>()?;
        Ok(ModuleElement::new(g.matrix.mul_vec(&v)?))
    }

    pub fn apply_gamma(&self, alpha: usize, x: &ModuleElement) -> Result<ModuleElement> {
        self.apply_gen(&self.gamma[alpha], alpha, x)
    }

    /// Torsion generator action; the identity when no torsion data is stored.
    pub fn apply_torsion(&self, alpha: usize, x: &ModuleElement) -> Result<ModuleElement> {
        match &self.torsion[alpha] {
            Some(t) => self.apply_gen(t, alpha, x),
            None => Ok(x.clone()),
        }
    }

    /// ψ_α on the module: coordinates ψ_α(F_α^{-1} v).
    pub fn apply_psi(&self, alpha: usize, x: &ModuleElement) -> Result<ModuleElement> {
        self.check_element(x)?;
        let finv = &self.frob_inverses()?[alpha];
        let w = finv.mul_vec(&x.coords)?;
        Ok(ModuleElement::new(w.iter().map(|c| c.psi(alpha)).collect::<Result<_>>()?))
    }

    // ---------- constructions ----------

    fn map_gens(&self, f: impl Fn(&GammaGen) -> Result<GammaGen>) -> Result<(Vec<GammaGen>, Vec<Option<GammaGen>>)> {
        let g = self.gamma.iter().map(&f).collect::<Result<_>>()?;
        let t = self.torsion.iter().map(|t| t.as_ref().map(&f).transpose()).collect::<Result<_>>()?;
        Ok((g, t))
    }

    /// Twist by the cyclotomic character: each generator matrix is scaled by
    /// its character value; Frobenius matrices are unchanged.
    pub fn tate_twist(&self) -> Self {
        let z = self.ring.zpm();
        let cr = self.ring.coeffs();
        let (gamma, torsion) = self
            .map_gens(|g| {
                Ok(GammaGen {
                    matrix: g.matrix.scale(&cr.from_int(z.from_bigint(&g.chi))),
                    chi: g.chi.clone(),
                })
            })
            .expect("scaling is total");
        Self::new(&self.ring, self.frob.clone(), gamma, torsion).expect("twist is well formed")
    }

    /// Dual module Hom(M, E/O): matrices (A^{-1})^T for every generator.
    pub fn dual(&self) -> Result<Self> {
        let frob = self.frob_inverses()?.iter().map(|m| m.transpose()).collect();
        let (gamma, torsion) = self.map_gens(|g| {
            Ok(GammaGen {
                matrix: g.matrix.inverse()?.transpose(),
                chi: g.chi.clone(),
            })
        })?;
        Self::new(&self.ring, frob, gamma, torsion)
    }

    /// M*(1), the module paired with M by the residue pairing.
    pub fn dual_twist(&self) -> Result<Self> {
        Ok(self.dual()?.tate_twist())
    }

    /// Residue pairing {x, y} = Tr res(Σ x_i y_i) for x ∈ M and y ∈ M*(1).
    /// The trace to Z/p^m is the identity over Z/p^m coefficients.
    pub fn pairing(&self, x: &ModuleElement, y: &ModuleElement) -> Result<u64> {
        self.check_element(x)?;
        self.check_element(y)?;
        let xr: Vec<&LaurentSeries> = x.coords.iter().collect();
        let yr: Vec<&LaurentSeries> = y.coords.iter().collect();
        let s = matrix::dot(&xr, &yr)?;
        let r = s.res()?;
        Ok(self.ring.coeffs().trace(&r))
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| Ok(a.block_diag(b)))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.kron(b))
    }

    fn combine(&self, other: &Self, op: impl Fn(&SeriesMatrix, &SeriesMatrix) -> Result<SeriesMatrix>) -> Result<Self> {
        if *self.ring != *other.ring {
            return Err(Error::ContextMismatch("modules over different rings".into()));
        }
        let gen = |a: &GammaGen, b: &GammaGen| -> Result<GammaGen> {
            if a.chi != b.chi {
                return Err(Error::ContextMismatch("character values differ".into()));
            }
            Ok(GammaGen {
                matrix: op(&a.matrix, &b.matrix)?,
                chi: a.chi.clone(),
            })
        };
        let frob = self.frob.iter().zip(&other.frob).map(|(a, b)| op(a, b)).collect::<Result<_>>()?;
        let gamma = self.gamma.iter().zip(&other.gamma).map(|(a, b)| gen(a, b)).collect::<Result<_>>()?;
        let torsion = self
            .torsion
            .iter()
            .zip(&other.torsion)
            .map(|(a, b)| match (a, b) {
                (None, None) => Ok(None),
                (Some(a), Some(b)) => gen(a, b).map(Some),
                _ => Err(Error::ContextMismatch("torsion data present on one side only".into())),
            })
            .collect::<Result<_>>()?;
        Self::new(&self.ring, frob, gamma, torsion)
    }

    /// Restriction of scalars to Z/p^m coefficients in every factor. The new
    /// basis is θ^b e_j, indexed by j·d + b with d the coefficient dimension.
    pub fn induct_unramified(&self) -> Result<Self> {
        let cr = self.ring.coeffs().clone();
        let d = cr.dim();
        if d == 1 {
            return Ok(self.clone());
        }
        let base = self.ring.base_ring();
        let r = self.rank;
        let rewrite = |a: &SeriesMatrix, coeff_map: &dyn Fn(&Coeff) -> Coeff| -> Result<SeriesMatrix> {
            let mut out = SeriesMatrix::zero(&base, r * d, r * d);
            for j in 0..r {
                for b in 0..d {
                    let img = coeff_map(&cr.basis(b));
                    for i in 0..r {
                        let coords = a.get(i, j).scale(&img).coordinates(&base);
                        for (b2, s) in coords.into_iter().enumerate() {
                            out.set(i * d + b2, j * d + b, s);
                        }
                    }
                }
            }
            Ok(out)
        };
        let frob = (0..self.nvars())
            .map(|a| rewrite(&self.frob[a], &|c: &Coeff| cr.frobenius(c, a)))
            .collect::<Result<_>>()?;
        let (gamma, torsion) = self.map_gens(|g| {
            Ok(GammaGen {
                matrix: rewrite(&g.matrix, &|c: &Coeff| c.clone())?,
                chi: g.chi.clone(),
            })
        })?;
        Self::new(&base, frob, gamma, torsion)
    }

    /// Element of the induced module corresponding to x.
    pub fn induce_element(&self, x: &ModuleElement) -> ModuleElement {
        let base = self.ring.base_ring();
        ModuleElement::new(x.coords.iter().flat_map(|c| c.coordinates(&base)).collect())
    }

    /// Character value used by γ_α, reduced mod p^m.
    pub fn chi_mod(&self, alpha: usize) -> u64 {
        self.ring.zpm().from_bigint(&self.gamma[alpha].chi)
    }

    /// Whether some generator character differs from 1 modulo p^m.
    pub fn chi_is_trivial(&self, alpha: usize) -> bool {
        let q = BigInt::from(self.ring.zpm().modulus());
        (&self.gamma[alpha].chi - BigInt::one()).mod_floor(&q).is_zero()
    }

    /// Largest exact character value that fits in i64, for reports.
    pub fn chi_i64(&self, alpha: usize) -> Option<i64> {
        self.gamma[alpha].chi.to_i64()
    }
}

#[cfg(test)]
mod tests;
