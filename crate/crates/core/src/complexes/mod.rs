//! Cochain complexes indexed by subsets of Δ, realized as sparse matrices over
//! Z/p^m, and their cohomology profiles.
//!
//! Subsets are bitmasks over the ordered variables. Within a degree, subsets
//! of equal size are ordered lexicographically by their sorted index lists.
//! For the total (Herr) complex a cell is a pair (T, S) of a Γ-subset and a
//! Φ-subset; cells are ordered by |T|, then T, then S.

pub mod series;

use crate::coeff::Zpm;
use crate::error::{Error, Result};
use crate::linalg::{subquotient_profile, Mat, SparseMat};
use serde::{Deserialize, Serialize};
use std::fmt;

/// #{α ∈ S : α < β}.
pub fn eps(s: u32, beta: usize) -> u32 {
    (s & ((1u32 << beta) - 1)).count_ones()
}

/// #{α ∈ Δ∖S : α < β}.
pub fn eta(n: usize, s: u32, beta: usize) -> u32 {
    let full = (1u32 << n) - 1;
    (!s & full & ((1u32 << beta) - 1)).count_ones()
}

/// Subsets of {0..n} with r elements, in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..(1 << n)).filter(|s| s.count_ones() as usize == r).collect();
    let key = |s: &u32| -> Vec<usize> { (0..n).filter(|&i| s & (1 << i) != 0).collect() };
    out.sort_by_key(key);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Phi,
    Gamma,
    Herr,
    Psi,
}

impl ComplexKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(ComplexKind::Phi),
            "gamma" => Ok(ComplexKind::Gamma),
            "herr" => Ok(ComplexKind::Herr),
            "psi" => Ok(ComplexKind::Psi),
            _ => Err(Error::InvalidInput(format!("unknown complex kind {s}"))),
        }
    }

    /// Highest degree for |Δ| = n.
    pub fn top_degree(self, n: usize) -> usize {
        match self {
            ComplexKind::Herr => 2 * n,
            _ => n,
        }
    }
}

/// Which operator a differential block applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Phi,
    Gamma,
    Psi,
}

/// A summand of a degree: Γ-subset and Φ-subset (one of them is empty except
/// for the total complex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub gamma: u32,
    pub phi: u32,
}

/// Cells of degree k.
pub fn cells(kind: ComplexKind, n: usize, k: usize) -> Vec<Cell> {
    match kind {
        ComplexKind::Phi | ComplexKind::Psi => subsets(n, k).into_iter().map(|s| Cell { gamma: 0, phi: s }).collect(),
        ComplexKind::Gamma => subsets(n, k).into_iter().map(|s| Cell { gamma: s, phi: 0 }).collect(),
        ComplexKind::Herr => {
            let mut out = Vec::new();
            for a in 0..=k.min(n) {
                if k - a > n {
                    continue;
                }
                for t in subsets(n, a) {
                    for s in subsets(n, k - a) {
                        out.push(Cell { gamma: t, phi: s });
                    }
                }
            }
            out
        }
    }
}

/// One block of the differential leaving a cell: `sign · (id − op_β)` into `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub target: Cell,
    pub op: OpKind,
    pub beta: usize,
    pub negative: bool,
}

/// Blocks leaving `cell`. Signs: (−1)^ε for Φ and Γ, (−1)^η for Ψ; the total
/// differential is d_Γ + (−1)^{|T|} d_Φ.
pub fn blocks(kind: ComplexKind, n: usize, cell: Cell) -> Vec<Block> {
    let mut out = Vec::new();
    for beta in 0..n {
        let bit = 1u32 << beta;
        match kind {
            ComplexKind::Phi | ComplexKind::Psi if cell.phi & bit == 0 => {
                let (op, e) = if kind == ComplexKind::Phi {
                    (OpKind::Phi, eps(cell.phi, beta))
                } else {
                    (OpKind::Psi, eta(n, cell.phi, beta))
                };
                out.push(Block {
                    target: Cell {
                        gamma: 0,
                        phi: cell.phi | bit,
                    },
                    op,
                    beta,
                    negative: e % 2 == 1,
                });
            }
            ComplexKind::Gamma if cell.gamma & bit == 0 => out.push(Block {
                target: Cell {
                    gamma: cell.gamma | bit,
                    phi: 0,
                },
                op: OpKind::Gamma,
                beta,
                negative: eps(cell.gamma, beta) % 2 == 1,
            }),
            ComplexKind::Herr => {
                if cell.gamma & bit == 0 {
                    out.push(Block {
                        target: Cell {
                            gamma: cell.gamma | bit,
                            phi: cell.phi,
                        },
                        op: OpKind::Gamma,
                        beta,
                        negative: eps(cell.gamma, beta) % 2 == 1,
                    });
                }
                if cell.phi & bit == 0 {
                    let e = cell.gamma.count_ones() + eps(cell.phi, beta);
                    out.push(Block {
                        target: Cell {
                            gamma: cell.gamma,
                            phi: cell.phi | bit,
                        },
                        op: OpKind::Phi,
                        beta,
                        negative: e % 2 == 1,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// A finite cochain complex of free Z/p^m-modules, optionally restricted to
/// submodules spanned by `ambient` generators in each degree.
#[derive(Debug, Clone)]
pub struct TruncatedComplex {
    pub zpm: Zpm,
    pub dims: Vec<usize>,
    /// d_k : degree k → degree k+1.
    pub diffs: Vec<SparseMat>,
    pub ambient: Vec<Option<Mat>>,
    /// Basis vectors of each degree whose operator images were cut by the window.
    pub boundary_flags: Vec<usize>,
}

impl TruncatedComplex {
    pub fn from_matrices(zpm: Zpm, diffs: Vec<Mat>) -> Result<Self> {
        if diffs.is_empty() {
            return Err(Error::InvalidInput("a complex needs at least one differential".into()));
        }
        let mut dims = vec![diffs[0].cols()];
        for d in &diffs {
            if d.cols() != *dims.last().unwrap() {
                return Err(Error::InvalidInput("differential shapes do not chain".into()));
            }
            dims.push(d.rows());
        }
        let n = dims.len();
        Ok(TruncatedComplex {
            zpm,
            dims,
            diffs: diffs.iter().map(SparseMat::from_dense).collect(),
            ambient: vec![None; n],
            boundary_flags: vec![0; n],
        })
    }

    /// Koszul-type complex on a free module of rank `dim` with commuting
    /// operators: blocks (−1)^ε (id − op_β) between subsets.
    pub fn koszul(zpm: Zpm, dim: usize, ops: &[Mat]) -> Result<Self> {
        let n = ops.len();
        if ops.iter().any(|o| o.rows() != dim || o.cols() != dim) {
            return Err(Error::InvalidInput("operators must be square of the module rank".into()));
        }
        let id = Mat::identity(zpm, dim);
        let parts: Vec<SparseMat> = ops.iter().map(|o| SparseMat::from_dense(&id.sub(o))).collect();
        let mut diffs = Vec::new();
        let mut dims = Vec::new();
        for k in 0..=n {
            dims.push(subsets(n, k).len() * dim);
        }
        for k in 0..n {
            let src = cells(ComplexKind::Phi, n, k);
            let dst = cells(ComplexKind::Phi, n, k + 1);
            let mut d = SparseMat::new(zpm, dims[k + 1], dims[k]);
            for (ci, c) in src.iter().enumerate() {
                for b in blocks(ComplexKind::Phi, n, *c) {
                    let ti = dst.iter().position(|x| *x == b.target).unwrap();
                    for j in 0..dim {
                        for &(i, v) in parts[b.beta].column(j) {
                            let v = if b.negative { zpm.neg(v) } else { v };
                            d.push(ti * dim + i, ci * dim + j, v);
                        }
                    }
                }
            }
            d.normalize();
            diffs.push(d);
        }
        let len = dims.len();
        Ok(TruncatedComplex {
            zpm,
            dims,
            diffs,
            ambient: vec![None; len],
            boundary_flags: vec![0; len],
        })
    }

    pub fn num_degrees(&self) -> usize {
        self.dims.len()
    }

    /// Degree k such that d_{k+1} d_k ≠ 0, if any.
    pub fn d_squared_failure(&self) -> Option<usize> {
        (0..self.diffs.len().saturating_sub(1)).find(|&k| !self.diffs[k + 1].mul(&self.diffs[k]).is_zero())
    }

    fn generators(&self, k: usize) -> Mat {
        match &self.ambient[k] {
            Some(c) => c.clone(),
            None => Mat::identity(self.zpm, self.dims[k]),
        }
    }

    /// Cycles of degree k as generator columns.
    pub fn cycles(&self, k: usize) -> Mat {
        if k < self.diffs.len() && self.ambient[k].is_none() {
            return self.diffs[k].kernel();
        }
        let c = self.generators(k);
        if k >= self.diffs.len() {
            return c;
        }
        let a = self.diffs[k].mul_dense(&c).drop_zero_rows();
        let ker = a.kernel();
        c.mul(&ker)
    }

    /// Profile (torsion exponents, free rank) of the degree-k cohomology.
    pub fn cohomology_at(&self, k: usize) -> Result<(Vec<u32>, usize)> {
        let z = self.cycles(k);
        let b = if k == 0 {
            Mat::zeros(self.zpm, self.dims[0], 0)
        } else {
            self.diffs[k - 1].mul_dense(&self.generators(k - 1))
        };
        subquotient_profile(&z, &b)
    }

    /// Profiles of all degrees (unstabilized).
    pub fn cohomology(&self, experimental_from: Option<usize>) -> Result<CohomologyProfile> {
        let mut degrees = Vec::new();
        for k in 0..self.num_degrees() {
            let (divisors, free_rank) = self.cohomology_at(k)?;
            degrees.push(DegreeProfile {
                degree: k,
                divisors,
                free_rank,
                stabilized: false,
                boundary_flags: self.boundary_flags[k],
                experimental: experimental_from.is_some_and(|e| k >= e),
            });
        }
        Ok(CohomologyProfile {
            m: self.zpm.m(),
            degrees,
        })
    }
}

/// Structure of one cohomology group: ⊕ Z/p^{e} over `divisors` plus
/// `free_rank` copies of Z/p^m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub degree: usize,
    pub divisors: Vec<u32>,
    pub free_rank: usize,
    pub stabilized: bool,
    pub boundary_flags: usize,
    #[serde(default)]
    pub experimental: bool,
}

impl DegreeProfile {
    /// Same group structure (ignores flags).
    pub fn same_group(&self, other: &Self) -> bool {
        self.divisors == other.divisors && self.free_rank == other.free_rank
    }

    /// log_p of the group order.
    pub fn length(&self, m: u32) -> u64 {
        self.divisors.iter().map(|&e| e as u64).sum::<u64>() + self.free_rank as u64 * m as u64
    }

    pub fn is_zero(&self) -> bool {
        self.divisors.is_empty() && self.free_rank == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyProfile {
    pub m: u32,
    pub degrees: Vec<DegreeProfile>,
}

impl CohomologyProfile {
    /// Group structures agree in every degree.
    pub fn same_groups(&self, other: &Self) -> bool {
        self.m == other.m
            && self.degrees.len() == other.degrees.len()
            && self.degrees.iter().zip(&other.degrees).all(|(a, b)| a.same_group(b))
    }

    /// Free ranks per degree (the dimensions when m = 1).
    pub fn free_ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.free_rank).collect()
    }

    pub fn lengths(&self) -> Vec<u64> {
        self.degrees.iter().map(|d| d.length(self.m)).collect()
    }
}

impl fmt::Display for CohomologyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "degree  group                          stable  flags")?;
        for d in &self.degrees {
            let mut parts: Vec<String> = d.divisors.iter().map(|e| format!("Z/p^{e}")).collect();
            if d.free_rank > 0 {
                parts.push(format!("(Z/p^{})^{}", self.m, d.free_rank));
            }
            let group = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
            let tag = if d.experimental { " (experimental)" } else { "" };
            writeln!(
                f,
                "{:<7} {:<30} {:<7} {}{}",
                d.degree,
                group,
                if d.stabilized { "yes" } else { "no" },
                d.boundary_flags,
                tag
            )?;
        }
        Ok(())
    }
}
