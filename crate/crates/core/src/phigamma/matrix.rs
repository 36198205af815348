//! Dense matrices with truncated Laurent-series entries.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::{Exps, LaurentSeries, SeriesRing};
use num_bigint::BigInt;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentSeries>,
}

impl fmt::Debug for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// Sum of the products a_k · b_k, with the window of the running sum.
pub(crate) fn dot(a: &[&LaurentSeries], b: &[&LaurentSeries]) -> Result<LaurentSeries> {
    let mut acc = a[0].mul(b[0])?;
    for k in 1..a.len() {
        acc = acc.add(&a[k].mul(b[k])?)?;
    }
    Ok(acc)
}

impl SeriesMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<LaurentSeries>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries do not form a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.same_ring(&entries[0])) {
            return Err(Error::ContextMismatch("matrix entries live in different rings".into()));
        }
        Ok(SeriesMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<LaurentSeries>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        if rows.iter().any(|v| v.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zero(ring: &Arc<SeriesRing>, rows: usize, cols: usize) -> Self {
        SeriesMatrix {
            rows,
            cols,
            entries: vec![LaurentSeries::zero(ring); rows * cols],
        }
    }

    pub fn scalar(ring: &Arc<SeriesRing>, n: usize, s: &LaurentSeries) -> Self {
        let mut out = Self::zero(ring, n, n);
        for i in 0..n {
            out.entries[i * n + i] = s.clone();
        }
        out
    }

    pub fn identity(ring: &Arc<SeriesRing>, n: usize) -> Self {
        Self::scalar(ring, n, &LaurentSeries::one(ring))
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.entries[0].ring()
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: LaurentSeries) {
        self.entries[i * self.cols + j] = v;
    }
    pub fn entries(&self) -> &[LaurentSeries] {
        &self.entries
    }
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.is_exact())
    }
    /// All entries are constants (no π dependence).
    pub fn is_constant(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.is_exact() && e.terms().keys().all(|k| k.iter().all(|&x| x == 0)))
    }

    pub fn map(&self, f: impl Fn(&LaurentSeries) -> Result<LaurentSeries>) -> Result<Self> {
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn phi(&self, alpha: usize) -> Self {
        self.map(|e| Ok(e.phi(alpha))).expect("phi is total")
    }

    pub fn gamma(&self, alpha: usize, c: &BigInt) -> Result<Self> {
        self.map(|e| e.gamma(alpha, c))
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        self.map(|e| Ok(e.scale(c))).expect("scaling is total")
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        SeriesMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidInput("matrix shapes do not match".into()));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let row: Vec<&LaurentSeries> = (0..self.cols).map(|k| self.get(i, k)).collect();
            for j in 0..other.cols {
                let col: Vec<&LaurentSeries> = (0..other.rows).map(|k| other.get(k, j)).collect();
                entries.push(dot(&row, &col)?);
            }
        }
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn mul_vec(&self, v: &[LaurentSeries]) -> Result<Vec<LaurentSeries>> {
        if v.len() != self.cols {
            return Err(Error::InvalidInput("vector length does not match".into()));
        }
        let vr: Vec<&LaurentSeries> = v.iter().collect();
        (0..self.rows)
            .map(|i| {
                let row: Vec<&LaurentSeries> = (0..self.cols).map(|k| self.get(i, k)).collect();
                dot(&row, &vr)
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidInput("matrix shapes do not match".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Kronecker product; row index (i, k) ↦ i·rows(other) + k.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut entries = Vec::with_capacity(r * c);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    for l in 0..other.cols {
                        entries.push(self.get(i, j).mul(other.get(k, l))?);
                    }
                }
            }
        }
        Ok(SeriesMatrix { rows: r, cols: c, entries })
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let ring = self.ring().clone();
        let mut out = Self::zero(&ring, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// First entry (row, column, monomial) where the two matrices differ on
    /// their common windows.
    pub fn witness_difference(&self, other: &Self) -> Option<(usize, usize, Exps)> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if let Some(e) = self.get(i, j).witness_difference(other.get(i, j)) {
                    return Some((i, j, e));
                }
            }
        }
        None
    }

    /// Inverse by Gauss–Jordan elimination with pivots certified by
    /// `try_invert`.
    ///
    /// `NotAUnit` is returned only when non-invertibility is certain: the
    /// pivot column is exactly zero mod p, or the ring has one variable
    /// (a local ring) and every candidate is a certified non-unit.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("only square matrices are invertible".into()));
        }
        let n = self.rows;
        let ring = self.ring().clone();
        let cr = ring.coeffs().clone();
        let mut a: Vec<Vec<LaurentSeries>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut b: Vec<Vec<LaurentSeries>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| LaurentSeries::from_int(&ring, (i == j) as i64))
                    .collect()
            })
            .collect();
        for c in 0..n {
            let mut pivot = None;
            let mut all_certified = true;
            for r in c..n {
                match a[r][c].try_invert() {
                    Ok(inv) => {
                        pivot = Some((r, inv));
                        break;
                    }
                    Err(Error::NotAUnit) => {}
                    Err(_) => all_certified = false,
                }
            }
            let Some((r, inv)) = pivot else {
                let column_zero_mod_p = (c..n).all(|r| {
                    a[r][c].is_exact() && a[r][c].terms().values().all(|v| cr.is_zero_mod_p(v))
                });
                let local = ring.nvars() == 1 || n - c == 1;
                return if column_zero_mod_p || (local && all_certified) {
                    Err(Error::NotAUnit)
                } else {
                    Err(Error::Inconclusive(format!("no certified pivot in column {c}")))
                };
            };
            a.swap(c, r);
            b.swap(c, r);
            for j in 0..n {
                a[c][j] = a[c][j].mul(&inv)?;
                b[c][j] = b[c][j].mul(&inv)?;
            }
            for i in 0..n {
                if i == c || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in 0..n {
                    a[i][j] = a[i][j].sub(&f.mul(&a[c][j])?)?;
                    b[i][j] = b[i][j].sub(&f.mul(&b[c][j])?)?;
                }
            }
        }
        Ok(SeriesMatrix {
            rows: n,
            cols: n,
            entries: b.into_iter().flatten().collect(),
        })
    }
}
