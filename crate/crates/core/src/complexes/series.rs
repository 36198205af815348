//! The Φ, Γ, Herr and Ψ complexes of a module realized on truncated monomial
//! bases.
//!
//! Each cell carries its own exactness window. The window of a target cell is
//! the componentwise minimum over its incoming blocks of the window that the
//! block's operator guarantees, so every block is a well-defined map between
//! quotient lattices and the truncated differentials compose to zero. A
//! source basis vector is flagged when some block drops part of its image.

use super::{blocks, cells, Cell, CohomologyProfile, ComplexKind, DegreeProfile, OpKind, TruncatedComplex};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::linalg::{subquotient_profile, Mat, SparseMat};
use crate::phigamma::{EtalePhiGammaModule, ModuleElement};
use crate::series::{Exps, LaurentSeries, Mode, INF};
use smallvec::SmallVec;
use std::collections::HashMap;

/// Largest total basis size a complex may have.
pub const MAX_DIM: usize = 200_000;

/// A box of exponents `lo ≤ e ≤ hi`, one bound pair per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: Exps,
    pub hi: Exps,
}

impl Window {
    pub fn new(lo: Exps, hi: Exps) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("window bounds need one entry per variable".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| h < l || *h == INF) {
            return Err(Error::EmptyWindow);
        }
        Ok(Window { lo, hi })
    }

    /// Same bounds in every variable.
    pub fn uniform(n: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(SmallVec::from_elem(lo, n), SmallVec::from_elem(hi, n))
    }

    /// Parse "lo:hi" (uniform) or "lo1,lo2:hi1,hi2".
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("window {s:?} is not of the form lo:hi"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let side = |t: &str| -> Result<Exps> {
            let v: Vec<i64> = t
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            match v.len() {
                1 => Ok(SmallVec::from_elem(v[0], n)),
                k if k == n => Ok(SmallVec::from_vec(v)),
                _ => Err(Error::InvalidInput(format!("window {s:?} does not match {n} variables"))),
            }
        };
        Self::new(side(a)?, side(b)?)
    }

    pub fn nvars(&self) -> usize {
        self.lo.len()
    }

    /// Window with both bounds pushed outward: lo ↦ 2·lo (when negative) and
    /// hi ↦ max(2·hi, hi + 1).
    pub fn doubled(&self) -> Self {
        Window {
            lo: self.lo.iter().map(|&l| if l < 0 { 2 * l } else { l }).collect(),
            hi: self.hi.iter().map(|&h| (2 * h).max(h + 1)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as usize).product()
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        e.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    /// Mixed-radix index with the first variable most significant.
    pub fn index(&self, e: &[i64]) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        let mut idx = 0usize;
        for a in 0..self.nvars() {
            let w = (self.hi[a] - self.lo[a] + 1) as usize;
            idx = idx * w + (e[a] - self.lo[a]) as usize;
        }
        Some(idx)
    }

    pub fn exps(&self, mut idx: usize) -> Exps {
        let n = self.nvars();
        let mut e: Exps = SmallVec::from_elem(0, n);
        for a in (0..n).rev() {
            let w = (self.hi[a] - self.lo[a] + 1) as usize;
            e[a] = self.lo[a] + (idx % w) as i64;
            idx /= w;
        }
        e
    }

    fn meet(&mut self, lo: &[i64], hi: &[i64]) {
        for a in 0..self.nvars() {
            self.lo[a] = self.lo[a].min(lo[a]);
            self.hi[a] = self.hi[a].min(hi[a]);
        }
    }
}

/// The operator a block applies, including the torsion generators used for
/// the invariants D^C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Phi(usize),
    Gamma(usize),
    Psi(usize),
    Torsion(usize),
}

impl Op {
    fn from_block(op: OpKind, beta: usize) -> Self {
        match op {
            OpKind::Phi => Op::Phi(beta),
            OpKind::Gamma => Op::Gamma(beta),
            OpKind::Psi => Op::Psi(beta),
        }
    }
}

fn apply(m: &EtalePhiGammaModule, op: Op, x: &ModuleElement) -> Result<ModuleElement> {
    match op {
        Op::Phi(b) => m.apply_phi(b, x),
        Op::Gamma(b) => m.apply_gamma(b, x),
        Op::Psi(b) => m.apply_psi(b, x),
        Op::Torsion(b) => m.apply_torsion(b, x),
    }
}

/// Window on which `op` applied to elements over `w` is known exactly.
fn image_window(m: &EtalePhiGammaModule, op: Op, w: &Window) -> Result<Window> {
    let ring = m.ring();
    let z = LaurentSeries::zero_window(ring, w.lo.clone(), w.hi.clone());
    let x = ModuleElement::new(vec![z; m.rank()]);
    let y = apply(m, op, &x)?;
    let mut out = Window {
        lo: SmallVec::from_elem(i64::MAX, w.nvars()),
        hi: SmallVec::from_elem(i64::MAX, w.nvars()),
    };
    for c in &y.coords {
        out.meet(c.lo(), c.hi());
    }
    if out.lo.iter().zip(&out.hi).any(|(l, h)| h < l) {
        return Err(Error::InsufficientWindow(format!("{op:?} leaves no exact coefficients")));
    }
    Ok(out)
}

/// Image of the basis element `basis·π^e` in coordinate `j` under a γ-type
/// operator, with the input truncation raised until the image is exact up to
/// `tgt.hi`.
fn expand_until_exact(
    m: &EtalePhiGammaModule,
    op: Op,
    src: &Window,
    tgt: &Window,
    e: &Exps,
    j: usize,
    basis: Coeff,
) -> Result<ModuleElement> {
    let (ring, r, n) = (m.ring(), m.rank(), src.nvars());
    let mut hi_in: Exps = (0..n).map(|a| e[a].max(tgt.hi[a] + 1)).collect();
    for _ in 0..=4 {
        let s = LaurentSeries::truncated(ring, [(e.clone(), basis.clone())], src.lo.clone(), hi_in.clone())?;
        let y = apply(m, op, &ModuleElement::single(r, j, s))?;
        let mut short = false;
        for c in &y.coords {
            for a in 0..n {
                if c.hi()[a] < tgt.hi[a] {
                    hi_in[a] += tgt.hi[a] - c.hi()[a];
                    short = true;
                }
            }
        }
        if !short {
            return Ok(y);
        }
    }
    Err(Error::InsufficientWindow(format!("{op:?} image window too small")))
}

/// Matrix of `op` from the basis over `src` to the basis over `tgt`, and the
/// source columns whose image was cut at `tgt.hi`.
fn op_matrix(m: &EtalePhiGammaModule, op: Op, src: &Window, tgt: &Window) -> Result<(SparseMat, Vec<bool>)> {
    let ring = m.ring();
    let cr = ring.coeffs().clone();
    let zpm = ring.zpm();
    let (r, d) = (m.rank(), cr.dim());
    let (ms, mt) = (src.size(), tgt.size());
    let mut out = SparseMat::new(zpm, r * mt * d, r * ms * d);
    let mut cut = vec![false; r * ms * d];
    let n = src.nvars();
    // γ_β and T_β substitute π_β only and commute with multiplication by the
    // other variables, so their columns are shifts of one column per
    // exponent of π_β, taken with the other exponents at src.lo.
    let mut base_cache: HashMap<(usize, i64, usize), ModuleElement> = HashMap::new();
    for j in 0..r {
        for mono in 0..ms {
            let e = src.exps(mono);
            for b in 0..d {
                let col = (j * ms + mono) * d + b;
                let (y, shift): (ModuleElement, Exps) = match op {
                    Op::Phi(_) | Op::Psi(_) => {
                        let s = LaurentSeries::monomial(ring, &e, cr.basis(b));
                        (apply(m, op, &ModuleElement::single(r, j, s))?, Exps::from_elem(0, n))
                    }
                    Op::Gamma(beta) | Op::Torsion(beta) => {
                        let base: Exps = (0..n).map(|a| if a == beta { e[a] } else { src.lo[a] }).collect();
                        let shift: Exps = (0..n).map(|a| e[a] - base[a]).collect();
                        let key = (j, e[beta], b);
                        if !base_cache.contains_key(&key) {
                            let y = expand_until_exact(m, op, src, tgt, &base, j, cr.basis(b))?;
                            base_cache.insert(key, y);
                        }
                        (base_cache[&key].clone(), shift)
                    }
                };
                for (i, c) in y.coords.iter().enumerate() {
                    if (0..n).any(|a| c.hi()[a] + shift[a] < tgt.hi[a]) {
                        return Err(Error::InsufficientWindow(format!("{op:?} image is not exact up to the target window")));
                    }
                    for (ex, v) in c.terms() {
                        let ex: Exps = (0..n).map(|a| ex[a] + shift[a]).collect();
                        if (0..n).any(|a| ex[a] < tgt.lo[a]) {
                            return Err(Error::InsufficientWindow(format!(
                                "{op:?} image reaches below the target window at {:?}",
                                ex.as_slice()
                            )));
                        }
                        match tgt.index(&ex) {
                            Some(t) => {
                                for (b2, &x) in v.iter().enumerate() {
                                    if x != 0 {
                                        out.push((i * mt + t) * d + b2, col, x);
                                    }
                                }
                            }
                            None => cut[col] = true,
                        }
                    }
                }
            }
        }
    }
    out.normalize();
    Ok((out, cut))
}

fn sparse_sub(a: &SparseMat, b: &SparseMat) -> SparseMat {
    let z = a.zpm();
    let mut out = SparseMat::new(z, a.rows(), a.cols());
    for j in 0..a.cols() {
        for &(i, v) in a.column(j) {
            out.push(i, j, v);
        }
        for &(i, v) in b.column(j) {
            out.push(i, j, z.neg(v));
        }
    }
    out.normalize();
    out
}

/// Truncation from `src` to `tgt` (the identity block) and the columns it drops.
fn identity_matrix(m: &EtalePhiGammaModule, src: &Window, tgt: &Window) -> (SparseMat, Vec<bool>) {
    let zpm = m.ring().zpm();
    let (r, d) = (m.rank(), m.ring().coeffs().dim());
    let (ms, mt) = (src.size(), tgt.size());
    let mut out = SparseMat::new(zpm, r * mt * d, r * ms * d);
    let mut cut = vec![false; r * ms * d];
    for j in 0..r {
        for mono in 0..ms {
            let t = tgt.index(&src.exps(mono));
            for b in 0..d {
                let col = (j * ms + mono) * d + b;
                match t {
                    Some(t) => out.push((j * mt + t) * d + b, col, 1),
                    None => cut[col] = true,
                }
            }
        }
    }
    out.normalize();
    (out, cut)
}

/// A complex of a module on truncated bases, with its per-cell windows.
#[derive(Debug, Clone)]
pub struct SeriesComplex {
    pub kind: ComplexKind,
    pub cells: Vec<Vec<Cell>>,
    pub windows: Vec<Vec<Window>>,
    pub complex: TruncatedComplex,
}

impl SeriesComplex {
    /// Basis offset of each cell within its degree.
    pub fn offsets(&self, k: usize, rank: usize, d: usize) -> Vec<usize> {
        let mut acc = 0;
        self.windows[k]
            .iter()
            .map(|w| {
                let o = acc;
                acc += rank * d * w.size();
                o
            })
            .collect()
    }
}

fn require_integral(m: &EtalePhiGammaModule) -> Result<()> {
    match m.ring().mode() {
        Mode::Integral => Ok(()),
        Mode::Perfect { .. } => Err(Error::ModeMismatch("complexes need the integral series ring".into())),
    }
}

/// Builds degrees 0..=top of a complex of `m`. The Herr complex is restricted
/// to the torsion invariants D^C in every built degree.
pub fn build_complex(m: &EtalePhiGammaModule, kind: ComplexKind, window: &Window, top: usize) -> Result<SeriesComplex> {
    build(m, kind, window, top, true)
}

fn build(m: &EtalePhiGammaModule, kind: ComplexKind, window: &Window, top: usize, with_ambient: bool) -> Result<SeriesComplex> {
    require_integral(m)?;
    let n = m.nvars();
    if window.nvars() != n {
        return Err(Error::InvalidInput(format!("window has {} variables, module has {n}", window.nvars())));
    }
    let top = top.min(kind.top_degree(n));
    let zpm = m.ring().zpm();
    let (r, d) = (m.rank(), m.ring().coeffs().dim());

    let all_cells: Vec<Vec<Cell>> = (0..=top).map(|k| cells(kind, n, k)).collect();
    let mut windows: Vec<Vec<Window>> = vec![vec![window.clone()]];
    let mut image_cache: HashMap<(Op, Window), Window> = HashMap::new();
    for k in 0..top {
        let mut next: Vec<Option<Window>> = vec![None; all_cells[k + 1].len()];
        for (ci, c) in all_cells[k].iter().enumerate() {
            let src = &windows[k][ci];
            for b in blocks(kind, n, *c) {
                let ti = all_cells[k + 1].iter().position(|x| *x == b.target).expect("target cell exists");
                let op = Op::from_block(b.op, b.beta);
                let key = (op, src.clone());
                let img = match image_cache.get(&key) {
                    Some(w) => w.clone(),
                    None => {
                        let w = image_window(m, op, src)?;
                        image_cache.insert(key, w.clone());
                        w
                    }
                };
                let slot = next[ti].get_or_insert_with(|| src.clone());
                slot.meet(&src.lo, &src.hi);
                slot.meet(&img.lo, &img.hi);
            }
        }
        let next: Vec<Window> = next.into_iter().map(|w| w.expect("every cell has an incoming block")).collect();
        for w in &next {
            if w.lo.iter().zip(&w.hi).any(|(l, h)| h < l) {
                return Err(Error::InsufficientWindow(format!(
                    "degree {} window is empty; enlarge the input window",
                    k + 1
                )));
            }
        }
        windows.push(next);
    }

    let dims: Vec<usize> = windows.iter().map(|ws| ws.iter().map(|w| r * d * w.size()).sum()).collect();
    let total: usize = dims.iter().sum();
    if total > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "complex would have {total} basis vectors (limit {MAX_DIM}); shrink the window"
        )));
    }

    let offsets: Vec<Vec<usize>> = windows
        .iter()
        .map(|ws| {
            let mut acc = 0;
            ws.iter()
                .map(|w| {
                    let o = acc;
                    acc += r * d * w.size();
                    o
                })
                .collect()
        })
        .collect();

    let mut diffs = Vec::new();
    let mut flags = vec![0usize; top + 1];
    let mut op_cache: HashMap<(Op, Window, Window), (SparseMat, Vec<bool>)> = HashMap::new();
    let mut id_cache: HashMap<(Window, Window), (SparseMat, Vec<bool>)> = HashMap::new();
    for k in 0..top {
        let mut dk = SparseMat::new(zpm, dims[k + 1], dims[k]);
        let mut cut_k = vec![false; dims[k]];
        for (ci, c) in all_cells[k].iter().enumerate() {
            let src = windows[k][ci].clone();
            for b in blocks(kind, n, *c) {
                let ti = all_cells[k + 1].iter().position(|x| *x == b.target).unwrap();
                let tgt = windows[k + 1][ti].clone();
                let op = Op::from_block(b.op, b.beta);
                if !id_cache.contains_key(&(src.clone(), tgt.clone())) {
                    let v = identity_matrix(m, &src, &tgt);
                    id_cache.insert((src.clone(), tgt.clone()), v);
                }
                let key = (op, src.clone(), tgt.clone());
                if !op_cache.contains_key(&key) {
                    let v = op_matrix(m, op, &src, &tgt)?;
                    op_cache.insert(key.clone(), v);
                }
                let (idm, idcut) = &id_cache[&(src.clone(), tgt.clone())];
                let (opm, opcut) = &op_cache[&key];
                let (ro, co) = (offsets[k + 1][ti], offsets[k][ci]);
                for col in 0..idm.cols() {
                    for &(i, v) in idm.column(col) {
                        dk.push(ro + i, co + col, if b.negative { zpm.neg(v) } else { v });
                    }
                    for &(i, v) in opm.column(col) {
                        dk.push(ro + i, co + col, if b.negative { v } else { zpm.neg(v) });
                    }
                    if idcut[col] || opcut[col] {
                        cut_k[co + col] = true;
                    }
                }
            }
        }
        dk.normalize();
        flags[k] = cut_k.iter().filter(|&&x| x).count();
        diffs.push(dk);
    }

    let mut ambient = vec![None; top + 1];
    if with_ambient && kind == ComplexKind::Herr && m.has_torsion() {
        for k in 0..=top {
            ambient[k] = torsion_invariants(m, &windows[k], dims[k])?;
        }
    }

    Ok(SeriesComplex {
        kind,
        cells: all_cells,
        windows,
        complex: TruncatedComplex {
            zpm,
            dims,
            diffs,
            ambient,
            boundary_flags: flags,
        },
    })
}

/// Generators of D^C on a degree: per cell, the common kernel of T_β − id.
/// `None` when every T_β acts as the identity on the truncated basis, which
/// avoids a dense kernel on large windows.
fn torsion_invariants(m: &EtalePhiGammaModule, ws: &[Window], dim: usize) -> Result<Option<Mat>> {
    let zpm = m.ring().zpm();
    let mut per_window: HashMap<Window, Option<Mat>> = HashMap::new();
    for w in ws {
        if per_window.contains_key(w) {
            continue;
        }
        let (idm, _) = identity_matrix(m, w, w);
        let mut ops = Vec::new();
        for beta in 0..m.nvars() {
            if m.torsion(beta).is_some() {
                ops.push(op_matrix(m, Op::Torsion(beta), w, w)?.0);
            }
        }
        let trivial = ops.iter().all(|t| (0..t.cols()).all(|c| t.column(c) == idm.column(c)));
        let gens = if trivial {
            None
        } else {
            let idd = idm.to_dense();
            let stack: Vec<Mat> = ops.iter().map(|t| t.to_dense().sub(&idd)).collect();
            let refs: Vec<&Mat> = stack.iter().collect();
            Some(Mat::vstack(&refs).drop_zero_rows().kernel())
        };
        per_window.insert(w.clone(), gens);
    }
    if ws.iter().all(|w| per_window[w].is_none()) {
        return Ok(None);
    }
    let parts: Vec<Mat> = ws
        .iter()
        .map(|w| match &per_window[w] {
            Some(g) => g.clone(),
            None => Mat::identity(zpm, m.rank() * m.ring().coeffs().dim() * w.size()),
        })
        .collect();
    let cols: usize = parts.iter().map(|p| p.cols()).sum();
    let mut out = Mat::zeros(zpm, dim, cols);
    let (mut ro, mut co) = (0, 0);
    for p in &parts {
        for i in 0..p.rows() {
            for j in 0..p.cols() {
                out.set(ro + i, co + j, p.get(i, j));
            }
        }
        ro += p.rows();
        co += p.cols();
    }
    Ok(Some(out))
}

pub fn build_phi_complex(m: &EtalePhiGammaModule, window: &Window) -> Result<SeriesComplex> {
    build_complex(m, ComplexKind::Phi, window, m.nvars())
}

pub fn build_gamma_complex(m: &EtalePhiGammaModule, window: &Window) -> Result<SeriesComplex> {
    build_complex(m, ComplexKind::Gamma, window, m.nvars())
}

pub fn build_herr(m: &EtalePhiGammaModule, window: &Window) -> Result<SeriesComplex> {
    build_complex(m, ComplexKind::Herr, window, 2 * m.nvars())
}

pub fn build_psi_complex(m: &EtalePhiGammaModule, window: &Window) -> Result<SeriesComplex> {
    build_complex(m, ComplexKind::Psi, window, m.nvars())
}

/// Degree 0 as one sparse kernel: the first differential stacked, for the
/// Herr complex, with T_β − id.
fn degree_zero(m: &EtalePhiGammaModule, kind: ComplexKind, w: &Window) -> Result<DegreeProfile> {
    let c = build(m, kind, w, 1, false)?;
    let mut blocks = vec![c.complex.diffs[0].clone()];
    if kind == ComplexKind::Herr {
        let (idm, _) = identity_matrix(m, w, w);
        for beta in 0..m.nvars() {
            if m.torsion(beta).is_some() {
                let (t, _) = op_matrix(m, Op::Torsion(beta), w, w)?;
                blocks.push(sparse_sub(&t, &idm));
            }
        }
    }
    let refs: Vec<&SparseMat> = blocks.iter().collect();
    let z = SparseMat::vstack(&refs).kernel();
    let (divisors, free_rank) = subquotient_profile(&z, &Mat::zeros(m.ring().zpm(), z.rows(), 0))?;
    Ok(DegreeProfile {
        degree: 0,
        divisors,
        free_rank,
        stabilized: false,
        boundary_flags: c.complex.boundary_flags[0],
        experimental: false,
    })
}

/// Degree-0 cohomology computed on `window` and on its doubling; the two
/// profiles must agree.
pub fn h0_exact(m: &EtalePhiGammaModule, kind: ComplexKind, window: &Window) -> Result<CohomologyProfile> {
    let a = degree_zero(m, kind, window)?;
    let b = degree_zero(m, kind, &window.doubled())?;
    if !a.same_group(&b) {
        return Err(Error::NotStabilized(format!(
            "degree 0 changed from {:?}+{} to {:?}+{} under window doubling",
            a.divisors, a.free_rank, b.divisors, b.free_rank
        )));
    }
    let mut d = a;
    d.stabilized = true;
    Ok(CohomologyProfile {
        m: m.ring().m(),
        degrees: vec![d],
    })
}

/// Profiles of degrees 0..=top on `window`, each flagged stable when it
/// matches the profile on the doubled window. Degrees ≥ 1 are experimental.
pub fn cohomology_in_window(
    m: &EtalePhiGammaModule,
    kind: ComplexKind,
    window: &Window,
    top: usize,
) -> Result<CohomologyProfile> {
    let top = top.min(kind.top_degree(m.nvars()));
    let a = build_complex(m, kind, window, top)?.complex.cohomology(Some(1))?;
    let b = build_complex(m, kind, &window.doubled(), top)?.complex.cohomology(Some(1))?;
    let mut out = a;
    for (x, y) in out.degrees.iter_mut().zip(&b.degrees) {
        x.stabilized = x.same_group(y);
    }
    Ok(out)
}

/// The differential on cochains given by module elements (one per cell),
/// computed with the series operators directly.
pub fn apply_differential(
    m: &EtalePhiGammaModule,
    kind: ComplexKind,
    k: usize,
    x: &[ModuleElement],
) -> Result<Vec<ModuleElement>> {
    let n = m.nvars();
    let src = cells(kind, n, k);
    let dst = cells(kind, n, k + 1);
    if x.len() != src.len() {
        return Err(Error::InvalidInput(format!("degree {k} has {} cells, got {}", src.len(), x.len())));
    }
    let mut out: Vec<Option<ModuleElement>> = vec![None; dst.len()];
    for (ci, c) in src.iter().enumerate() {
        for b in blocks(kind, n, *c) {
            let ti = dst.iter().position(|t| *t == b.target).unwrap();
            let img = apply(m, Op::from_block(b.op, b.beta), &x[ci])?;
            let mut term = x[ci].sub(&img)?;
            if b.negative {
                term = term.neg();
            }
            out[ti] = Some(match out[ti].take() {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|o| o.unwrap_or_else(|| ModuleElement::zero(m.ring(), m.rank())))
        .collect())
}

/// Pairing of a Φ-cochain of degree j on `m` with a Ψ-cochain of degree
/// n − j on M*(1): Σ_S {x_S, y_{Δ∖S}}.
pub fn pair_cochains(m: &EtalePhiGammaModule, x: &[ModuleElement], y: &[ModuleElement]) -> Result<u64> {
    let n = m.nvars();
    let j = (0..=n)
        .find(|&j| cells(ComplexKind::Phi, n, j).len() == x.len() && cells(ComplexKind::Psi, n, n - j).len() == y.len())
        .ok_or_else(|| Error::InvalidInput("cochain degrees are not complementary".into()))?;
    let xs = cells(ComplexKind::Phi, n, j);
    let ys = cells(ComplexKind::Psi, n, n - j);
    let full = (1u32 << n) - 1;
    let zpm = m.ring().zpm();
    let mut acc = 0;
    for (i, c) in xs.iter().enumerate() {
        let t = ys.iter().position(|s| s.phi == full & !c.phi).unwrap();
        acc = zpm.add(acc, m.pairing(&x[i], &y[t])?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesRing;

    #[test]
    fn window_indexing_round_trips() {
        let w = Window::uniform(2, -1, 2).unwrap();
        assert_eq!(w.size(), 16);
        for i in 0..w.size() {
            assert_eq!(w.index(&w.exps(i)), Some(i));
        }
        assert_eq!(w.exps(1).as_slice(), &[-1, 0]);
        let p = Window::parse("-2,0:4,3", 2).unwrap();
        assert_eq!(p.lo.as_slice(), &[-2, 0]);
        assert_eq!(p.doubled().hi.as_slice(), &[8, 6]);
        assert!(Window::parse("3:1", 1).is_err());
    }

    #[test]
    fn d_squared_vanishes_small() {
        let ring = SeriesRing::integral(3, 2, &["a", "b"]).unwrap();
        let m = EtalePhiGammaModule::trivial(&ring, 1).tate_twist();
        let w = Window::uniform(2, 0, 3).unwrap();
        for kind in [ComplexKind::Phi, ComplexKind::Gamma, ComplexKind::Herr] {
            let c = build_complex(&m, kind, &w, 4).unwrap();
            assert_eq!(c.complex.d_squared_failure(), None, "{kind:?}");
        }
        let wide = Window::uniform(2, 0, 12).unwrap();
        let c = build_psi_complex(&m, &wide).unwrap();
        assert_eq!(c.complex.d_squared_failure(), None);
    }

    #[test]
    fn h0_of_trivial_and_twist() {
        let ring = SeriesRing::integral(3, 2, &["a"]).unwrap();
        let w = Window::uniform(1, -2, 4).unwrap();
        let t = EtalePhiGammaModule::trivial(&ring, 1);
        let h = h0_exact(&t, ComplexKind::Herr, &w).unwrap();
        assert!(h.degrees[0].divisors.is_empty());
        assert_eq!(h.degrees[0].free_rank, 1);

        let id = t.frob(0).clone();
        let tw = t.with_torsion(vec![id]).unwrap().tate_twist();
        let h = h0_exact(&tw, ComplexKind::Herr, &w).unwrap();
        assert!(h.degrees[0].is_zero(), "{h}");
    }
}
