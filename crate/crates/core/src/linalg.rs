//! Dense and sparse matrices over Z/p^m, Smith normal form, kernels and
//! subquotient profiles.

use crate::coeff::{Valuation, Zpm};
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    zpm: Zpm,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} mod {}", self.rows, self.cols, self.zpm.modulus())?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Result of Smith reduction: `u · a · v = diag(p^{e_0}, …)`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: Option<Mat>,
    pub v: Option<Mat>,
    /// Valuations of the nonzero diagonal entries, in pivot order.
    pub exponents: Vec<u32>,
}

impl Mat {
    pub fn zeros(zpm: Zpm, rows: usize, cols: usize) -> Self {
        Mat {
            zpm,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(zpm: Zpm, n: usize) -> Self {
        let mut m = Self::zeros(zpm, n, n);
        for i in 0..n {
            m.set(i, i, 1 % zpm.modulus());
        }
        m
    }

    pub fn from_rows(zpm: Zpm, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(zpm, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, zpm.from_i64(v));
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(zpm: Zpm, rows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(zpm, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn zpm(&self) -> Zpm {
        self.zpm
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.zpm, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let z = self.zpm;
        let q = z.modulus() as u128;
        let mut out = Mat::zeros(z, self.rows, other.cols);
        let mut acc = vec![0u128; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                for (x, &b) in acc.iter_mut().zip(orow) {
                    *x += (a as u128 * b as u128) % q;
                }
            }
            for (j, &x) in acc.iter().enumerate() {
                out.set(i, j, (x % q) as u64);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let z = self.zpm;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| z.add(acc, z.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        let mut out = self.clone();
        for (x, &y) in out.data.iter_mut().zip(&other.data) {
            *x = self.zpm.add(*x, y);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        let mut out = self.clone();
        for (x, &y) in out.data.iter_mut().zip(&other.data) {
            *x = self.zpm.sub(*x, y);
        }
        out
    }

    pub fn scale(&self, c: u64) -> Mat {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x = self.zpm.mul(*x, c);
        }
        out
    }

    pub fn vstack(blocks: &[&Mat]) -> Mat {
        let zpm = blocks[0].zpm;
        let cols = blocks[0].cols;
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
        }
        Mat {
            zpm,
            rows,
            cols,
            data,
        }
    }

    pub fn hstack(blocks: &[&Mat]) -> Mat {
        let zpm = blocks[0].zpm;
        let rows = blocks[0].rows;
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(zpm, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, off + j, b.get(i, j));
                }
            }
            off += b.cols;
        }
        out
    }

    /// The matrix with its zero rows removed (same kernel).
    pub fn drop_zero_rows(&self) -> Mat {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| self.row(i).iter().any(|&x| x != 0)).collect();
        let mut out = Mat::zeros(self.zpm, keep.len(), self.cols);
        for (r, &i) in keep.iter().enumerate() {
            out.data[r * self.cols..(r + 1) * self.cols].copy_from_slice(self.row(i));
        }
        out
    }

    /// Submatrix of the given column indices.
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.zpm, self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_dst -= f · row_src
    fn row_axpy(&mut self, dst: usize, src: usize, f: u64) {
        if f == 0 {
            return;
        }
        let z = self.zpm;
        let c = self.cols;
        for j in 0..c {
            let s = self.data[src * c + j];
            if s != 0 {
                let d = &mut self.data[dst * c + j];
                *d = z.sub(*d, z.mul(f, s));
            }
        }
    }

    /// col_dst -= f · col_src
    fn col_axpy(&mut self, dst: usize, src: usize, f: u64) {
        if f == 0 {
            return;
        }
        let z = self.zpm;
        for i in 0..self.rows {
            let s = self.get(i, src);
            if s != 0 {
                let v = z.sub(self.get(i, dst), z.mul(f, s));
                self.set(i, dst, v);
            }
        }
    }

    fn scale_row(&mut self, r: usize, f: u64) {
        let z = self.zpm;
        for j in 0..self.cols {
            let v = z.mul(self.get(r, j), f);
            self.set(r, j, v);
        }
    }

    /// Inverse of a square matrix, or NotAUnit if it is singular mod p.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let z = self.zpm;
        let mut a = self.clone();
        let mut inv = Mat::identity(z, n);
        for t in 0..n {
            let piv = (t..n).find(|&i| z.is_unit(a.get(i, t))).ok_or(Error::NotAUnit)?;
            a.swap_rows(t, piv);
            inv.swap_rows(t, piv);
            let w = z.inv(a.get(t, t)).unwrap();
            a.scale_row(t, w);
            inv.scale_row(t, w);
            for i in 0..n {
                if i != t {
                    let f = a.get(i, t);
                    if f != 0 {
                        a.row_axpy(i, t, f);
                        inv.row_axpy(i, t, f);
                    }
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank_mod_p() == self.rows
    }

    /// Rank of the reduction mod p.
    pub fn rank_mod_p(&self) -> usize {
        let z1 = Zpm::new(self.zpm.p(), 1).unwrap();
        let mut a = Mat {
            zpm: z1,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x % z1.modulus()).collect(),
        };
        a.smith(false, false).exponents.len()
    }

    /// Smith reduction choosing pivots of minimal valuation.
    pub fn smith(&mut self, track_u: bool, track_v: bool) -> Smith {
        let z = self.zpm;
        let (r, c) = (self.rows, self.cols);
        let mut u = track_u.then(|| Mat::identity(z, r));
        let mut v = track_v.then(|| Mat::identity(z, c));
        let mut exps = Vec::new();
        for t in 0..r.min(c) {
            let mut best: Option<(u32, usize, usize)> = None;
            'search: for i in t..r {
                for j in t..c {
                    if let Valuation::Finite(e) = z.valuation(self.get(i, j)) {
                        if best.map_or(true, |(b, _, _)| e < b) {
                            best = Some((e, i, j));
                            if e == 0 {
                                break 'search;
                            }
                        }
                    }
                }
            }
            let Some((e, bi, bj)) = best else { break };
            self.swap_rows(t, bi);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, bi);
            }
            self.swap_cols(t, bj);
            if let Some(v) = v.as_mut() {
                v.swap_cols(t, bj);
            }
            let pe = z.p_pow(e);
            let w = z.inv(z.div_p_pow(self.get(t, t), e) % z.modulus()).unwrap();
            self.scale_row(t, w);
            if let Some(u) = u.as_mut() {
                u.scale_row(t, w);
            }
            debug_assert_eq!(self.get(t, t), pe);
            for i in t + 1..r {
                let x = self.get(i, t);
                if x != 0 {
                    let f = z.div_p_pow(x, e);
                    self.row_axpy(i, t, f);
                    if let Some(u) = u.as_mut() {
                        u.row_axpy(i, t, f);
                    }
                }
            }
            for j in t + 1..c {
                let x = self.get(t, j);
                if x != 0 {
                    let f = z.div_p_pow(x, e);
                    self.col_axpy(j, t, f);
                    if let Some(v) = v.as_mut() {
                        v.col_axpy(j, t, f);
                    }
                }
            }
            exps.push(e);
        }
        Smith { u, v, exponents: exps }
    }

    /// Elementary divisor exponents of the matrix (sorted).
    pub fn elementary_divisors(&self) -> Vec<u32> {
        let mut a = self.clone();
        let mut e = a.smith(false, false).exponents;
        e.sort_unstable();
        e
    }

    /// Generators of the kernel {x : A x = 0} as columns.
    pub fn kernel(&self) -> Mat {
        let z = self.zpm;
        let mut a = self.clone();
        let s = a.smith(false, true);
        let v = s.v.unwrap();
        let mut gens = Vec::new();
        for (t, &e) in s.exponents.iter().enumerate() {
            if e > 0 {
                let f = z.p_pow(z.m() - e);
                gens.push(v.col(t).into_iter().map(|x| z.mul(x, f)).collect::<Vec<_>>());
            }
        }
        for j in s.exponents.len()..self.cols {
            gens.push(v.col(j));
        }
        Mat::from_cols(z, self.cols, &gens)
    }

    /// Profile of ker A as a Z/p^m-module: (torsion exponents, free rank).
    pub fn kernel_profile(&self) -> (Vec<u32>, usize) {
        let mut a = self.clone();
        let s = a.smith(false, false);
        let mut tors: Vec<u32> = s.exponents.iter().copied().filter(|&e| e > 0).collect();
        tors.sort_unstable();
        (tors, self.cols - s.exponents.len())
    }

    /// Some solution of A x = b, if one exists.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let z = self.zpm;
        let mut a = self.clone();
        let s = a.smith(true, true);
        let ub = s.u.unwrap().mul_vec(b);
        let mut y = vec![0u64; self.cols];
        for (t, &e) in s.exponents.iter().enumerate() {
            let x = ub[t];
            if e > 0 && x % z.p_pow(e) != 0 {
                return None;
            }
            y[t] = z.div_p_pow(x, e);
        }
        if ub[s.exponents.len()..].iter().any(|&x| x != 0) {
            return None;
        }
        Some(s.v.unwrap().mul_vec(&y))
    }

    /// Solutions of A x = b for several right-hand sides, sharing one reduction.
    pub fn solve_many(&self, bs: &[Vec<u64>]) -> Option<Vec<Vec<u64>>> {
        let z = self.zpm;
        let mut a = self.clone();
        let s = a.smith(true, true);
        let u = s.u.unwrap();
        let v = s.v.unwrap();
        bs.iter()
            .map(|b| {
                let ub = u.mul_vec(b);
                let mut y = vec![0u64; self.cols];
                for (t, &e) in s.exponents.iter().enumerate() {
                    if e > 0 && ub[t] % z.p_pow(e) != 0 {
                        return None;
                    }
                    y[t] = z.div_p_pow(ub[t], e);
                }
                if ub[s.exponents.len()..].iter().any(|&x| x != 0) {
                    return None;
                }
                Some(v.mul_vec(&y))
            })
            .collect()
    }

    /// Entries reduced into another modulus (a quotient of the current one).
    pub fn reduce(&self, z: Zpm) -> Mat {
        Mat {
            zpm: z,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x % z.modulus()).collect(),
        }
    }

    /// The same entries read in a larger modulus.
    pub fn lift(&self, z: Zpm) -> Mat {
        Mat {
            zpm: z,
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
        }
    }

    /// Kronecker product; entry ((i, k), (j, l)) = a_ij · b_kl.
    pub fn kron(&self, other: &Mat) -> Mat {
        let z = self.zpm;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Mat::zeros(z, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, z.mul(a, other.get(k, l)));
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Mat {
        let mut acc = Mat::identity(self.zpm, self.rows);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }
}

/// Structure of the subquotient Z/B where Z, B are given by generator columns
/// in a common ambient module and B ⊆ Z. Returns (torsion exponents, free rank).
pub fn subquotient_profile(z_gens: &Mat, b_gens: &Mat) -> Result<(Vec<u32>, usize)> {
    let zpm = z_gens.zpm();
    let m = zpm.m();
    let mut zz = z_gens.clone();
    let s = zz.smith(true, false);
    let u = s.u.unwrap();
    let rk = s.exponents.len();
    if rk == 0 {
        return Ok((Vec::new(), 0));
    }
    let ub = u.mul(b_gens);
    let mut rel = Mat::zeros(zpm, rk, rk + b_gens.cols());
    for (t, &e) in s.exponents.iter().enumerate() {
        rel.set(t, t, zpm.p_pow(m - e));
        for j in 0..b_gens.cols() {
            let x = ub.get(t, j);
            if e > 0 && x % zpm.p_pow(e) != 0 {
                return Err(Error::InvalidInput("boundary generators not contained in cycles".into()));
            }
            rel.set(t, rk + j, zpm.div_p_pow(x, e));
        }
    }
    for i in rk..ub.rows() {
        if ub.row(i).iter().any(|&x| x != 0) {
            return Err(Error::InvalidInput("boundary generators not contained in cycles".into()));
        }
    }
    let mut ex = rel.smith(false, false).exponents;
    let free = rk - ex.len();
    ex.retain(|&e| e > 0);
    ex.sort_unstable();
    Ok((ex, free))
}

/// Column-major sparse matrix used for complex differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    zpm: Zpm,
    rows: usize,
    cols: Vec<Vec<(usize, u64)>>,
}

impl SparseMat {
    pub fn new(zpm: Zpm, rows: usize, ncols: usize) -> Self {
        SparseMat {
            zpm,
            rows,
            cols: vec![Vec::new(); ncols],
        }
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols.len()
    }
    pub fn zpm(&self) -> Zpm {
        self.zpm
    }

    /// Adds `v` at (i, j).
    pub fn push(&mut self, i: usize, j: usize, v: u64) {
        if v != 0 {
            self.cols[j].push((i, v));
        }
    }

    /// Sorts and merges duplicate entries.
    pub fn normalize(&mut self) {
        let z = self.zpm;
        for col in self.cols.iter_mut() {
            col.sort_unstable_by_key(|e| e.0);
            let mut merged: Vec<(usize, u64)> = Vec::with_capacity(col.len());
            for &(i, v) in col.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == i => last.1 = z.add(last.1, v),
                    _ => merged.push((i, v)),
                }
            }
            merged.retain(|e| e.1 != 0);
            *col = merged;
        }
    }

    pub fn column(&self, j: usize) -> &[(usize, u64)] {
        &self.cols[j]
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.zpm, self.rows, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                let cur = m.get(i, j);
                m.set(i, j, self.zpm.add(cur, v));
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let z = self.zpm;
        let mut out = vec![0u64; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            let x = v[j];
            if x == 0 {
                continue;
            }
            for &(i, a) in col {
                out[i] = z.add(out[i], z.mul(a, x));
            }
        }
        out
    }

    /// self · other
    pub fn mul(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.cols(), other.rows);
        let z = self.zpm;
        let mut out = SparseMat::new(z, self.rows, other.cols());
        let mut acc = vec![0u64; self.rows];
        let mut touched = Vec::new();
        for (j, col) in other.cols.iter().enumerate() {
            for &(k, b) in col {
                for &(i, a) in &self.cols[k] {
                    if acc[i] == 0 {
                        touched.push(i);
                    }
                    acc[i] = z.add(acc[i], z.mul(a, b));
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for &i in &touched {
                if acc[i] != 0 {
                    out.cols[j].push((i, acc[i]));
                }
                acc[i] = 0;
            }
            touched.clear();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.iter().all(|e| e.1 == 0))
    }

    /// self · b for a dense b.
    pub fn mul_dense(&self, b: &Mat) -> Mat {
        assert_eq!(self.cols(), b.rows());
        let z = self.zpm;
        let mut out = Mat::zeros(z, self.rows, b.cols());
        for (k, col) in self.cols.iter().enumerate() {
            let brow = b.row(k);
            for &(i, a) in col {
                for (j, &x) in brow.iter().enumerate() {
                    if x != 0 {
                        let cur = out.get(i, j);
                        out.set(i, j, z.add(cur, z.mul(a, x)));
                    }
                }
            }
        }
        out
    }

    pub fn from_dense(m: &Mat) -> SparseMat {
        let mut out = SparseMat::new(m.zpm(), m.rows(), m.cols());
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                out.push(i, j, m.get(i, j));
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Blocks stacked vertically; all must have the same column count.
    pub fn vstack(blocks: &[&SparseMat]) -> SparseMat {
        let ncols = blocks.first().map_or(0, |b| b.cols());
        let z = blocks.first().map_or(Zpm::new(2, 1).expect("valid modulus"), |b| b.zpm);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = SparseMat::new(z, rows, ncols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols(), ncols, "vstack needs equal column counts");
            for (j, col) in b.cols.iter().enumerate() {
                out.cols[j].extend(col.iter().map(|&(i, v)| (i + off, v)));
            }
            off += b.rows;
        }
        out
    }

    /// Generators of the kernel as columns. Unit pivots are eliminated
    /// sparsely (smallest Markowitz cost first); only the leftover system,
    /// whose entries are all divisible by p, goes through dense Smith form.
    pub fn kernel(&self) -> Mat {
        let z = self.zpm;
        let n = self.cols();
        let mut rows: Vec<HashMap<usize, u64>> = vec![HashMap::new(); self.rows];
        let mut col_rows: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                let e = rows[i].entry(j).or_insert(0);
                *e = z.add(*e, v);
            }
        }
        for (i, r) in rows.iter_mut().enumerate() {
            r.retain(|_, v| *v != 0);
            for &j in r.keys() {
                col_rows[j].insert(i);
            }
        }

        let mut alive = vec![true; self.rows];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            rows.iter().enumerate().filter(|(_, r)| !r.is_empty()).map(|(i, r)| Reverse((r.len(), i))).collect();
        // (pivot column, inverse of pivot, remaining entries of the pivot row)
        let mut pivots: Vec<(usize, u64, Vec<(usize, u64)>)> = Vec::new();
        let mut pivoted = vec![false; n];
        while let Some(Reverse((len, r))) = heap.pop() {
            if !alive[r] || rows[r].len() != len || len == 0 {
                continue;
            }
            let Some(c) = rows[r]
                .iter()
                .filter(|(_, &v)| z.is_unit(v))
                .map(|(&c, _)| c)
                .min_by_key(|&c| (col_rows[c].len(), c))
            else {
                continue;
            };
            let inv = z.inv(rows[r][&c]).expect("unit pivot");
            let prow: Vec<(usize, u64)> = rows[r].iter().filter(|(&j, _)| j != c).map(|(&j, &v)| (j, v)).collect();
            alive[r] = false;
            for &j in rows[r].keys() {
                col_rows[j].remove(&r);
            }
            let others: Vec<usize> = col_rows[c].iter().copied().collect();
            for o in others {
                let f = z.mul(rows[o][&c], inv);
                rows[o].remove(&c);
                col_rows[c].remove(&o);
                for &(j, v) in &prow {
                    let e = rows[o].entry(j).or_insert(0);
                    *e = z.sub(*e, z.mul(f, v));
                    if *e == 0 {
                        rows[o].remove(&j);
                        col_rows[j].remove(&o);
                    } else {
                        col_rows[j].insert(o);
                    }
                }
                heap.push(Reverse((rows[o].len(), o)));
            }
            rows[r].clear();
            pivoted[c] = true;
            pivots.push((c, inv, prow));
        }

        // Leftover system on the columns it still touches.
        let rest: Vec<usize> = (0..self.rows).filter(|&i| alive[i] && !rows[i].is_empty()).collect();
        let mut active: Vec<usize> = rest.iter().flat_map(|&i| rows[i].keys().copied()).collect();
        active.sort_unstable();
        active.dedup();
        let pos: HashMap<usize, usize> = active.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let mut dense = Mat::zeros(z, rest.len(), active.len());
        for (k, &i) in rest.iter().enumerate() {
            for (&j, &v) in &rows[i] {
                dense.set(k, pos[&j], v);
            }
        }
        let mut gens: Vec<Vec<u64>> = Vec::new();
        if !active.is_empty() {
            let ker = dense.kernel();
            for t in 0..ker.cols() {
                let mut x = vec![0u64; n];
                for (k, &j) in active.iter().enumerate() {
                    x[j] = ker.get(k, t);
                }
                gens.push(x);
            }
        }
        for j in 0..n {
            if !pivoted[j] && !pos.contains_key(&j) {
                let mut x = vec![0u64; n];
                x[j] = 1;
                gens.push(x);
            }
        }
        for x in gens.iter_mut() {
            for (c, inv, prow) in pivots.iter().rev() {
                let mut acc = 0u64;
                for &(j, v) in prow {
                    acc = z.add(acc, z.mul(v, x[j]));
                }
                x[*c] = z.neg(z.mul(*inv, acc));
            }
        }
        Mat::from_cols(z, n, &gens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_reproduces_matrix() {
        let z = Zpm::new(3, 3).unwrap();
        let a = Mat::from_rows(z, &[vec![3, 6, 9], vec![9, 1, 0], vec![0, 3, 18], vec![6, 12, 18]]);
        let mut b = a.clone();
        let s = b.smith(true, true);
        let d = s.u.as_ref().unwrap().mul(&a).mul(s.v.as_ref().unwrap());
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                let expect = if i == j && i < s.exponents.len() {
                    z.p_pow(s.exponents[i])
                } else {
                    0
                };
                assert_eq!(d.get(i, j), expect);
            }
        }
    }

    #[test]
    fn kernel_of_multiplication_by_p() {
        let z = Zpm::new(3, 2).unwrap();
        let a = Mat::from_rows(z, &[vec![3]]);
        assert_eq!(a.kernel_profile(), (vec![1], 0));
        let k = a.kernel();
        assert!(a.mul(&k).is_zero());
        // cokernel: Z/9 / 3Z/9 = Z/3
        let ident = Mat::identity(z, 1);
        assert_eq!(subquotient_profile(&ident, &a).unwrap(), (vec![1], 0));
    }

    #[test]
    fn inverse_and_solve() {
        let z = Zpm::new(2, 3).unwrap();
        let a = Mat::from_rows(z, &[vec![1, 2], vec![3, 3]]);
        let ai = a.inverse().unwrap();
        assert_eq!(a.mul(&ai), Mat::identity(z, 2));
        let x = a.solve(&[5, 1]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![5, 1]);
        let sing = Mat::from_rows(z, &[vec![2, 0], vec![0, 1]]);
        assert!(sing.inverse().is_err());
        assert!(sing.solve(&[1, 0]).is_none());
    }

    #[test]
    fn sparse_kernel_matches_dense() {
        let z = Zpm::new(3, 2).unwrap();
        let a = Mat::from_rows(
            z,
            &[vec![1, 3, 0, 2, 0], vec![0, 3, 6, 0, 0], vec![2, 0, 0, 4, 0], vec![0, 0, 3, 0, 0]],
        );
        let k = SparseMat::from_dense(&a).kernel();
        assert!(a.mul(&k).is_zero());
        let ident = Mat::identity(z, 5);
        let dense = a.kernel();
        assert_eq!(
            subquotient_profile(&k, &Mat::zeros(z, 5, 0)).unwrap(),
            subquotient_profile(&dense, &Mat::zeros(z, 5, 0)).unwrap()
        );
        assert_eq!(subquotient_profile(&ident, &Mat::zeros(z, 5, 0)).unwrap(), (vec![], 5));
    }
}
