//! Module-definition documents (JSON or TOML) and their canonical JSON form.
//!
//! ```json
//! {
//!   "p": 3, "m": 2, "delta": ["a", "b"], "rank": 1,
//!   "F": {"a": [["1"]], "b": [["1"]]},
//!   "G": {"a": {"matrix": [["4"]], "chi": 4}, "b": {"matrix": [["4"]], "chi": 4}}
//! }
//! ```
//!
//! Entries use the series text syntax. `f` gives one residue degree for all
//! variables and `f_alpha` per-variable degrees; both default to 1.

use super::{EtalePhiGammaModule, GammaGen, SeriesMatrix};
use crate::coeff::{CoeffRing, Zpm};
use crate::error::{Error, Result};
use crate::series::{Mode, SeriesRing};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// An integer given either as a JSON/TOML number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntValue {
    Small(i64),
    Big(String),
}

impl IntValue {
    pub fn from_bigint(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(x) => IntValue::Small(x),
            None => IntValue::Big(v.to_string()),
        }
    }
    pub fn to_bigint(&self) -> Result<BigInt> {
        match self {
            IntValue::Small(x) => Ok(BigInt::from(*x)),
            IntValue::Big(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("{s:?} is not an integer"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDoc {
    pub matrix: Vec<Vec<String>>,
    pub chi: IntValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: u64,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_alpha: Option<BTreeMap<String, usize>>,
    pub delta: Vec<String>,
    pub rank: usize,
    #[serde(rename = "F")]
    pub frob: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(rename = "G")]
    pub gamma: BTreeMap<String, GenDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<BTreeMap<String, GenDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<String>,
}

impl ModuleDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    /// JSON when the text starts with '{', TOML otherwise.
    pub fn from_text(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_toml(text)
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    fn degrees(&self) -> Result<Vec<usize>> {
        let base = self.f.unwrap_or(1);
        let mut out = vec![base; self.delta.len()];
        if let Some(map) = &self.f_alpha {
            if self.f.is_some() {
                return Err(Error::Schema("give either f or f_alpha, not both".into()));
            }
            for (k, &v) in map {
                let i = self
                    .delta
                    .iter()
                    .position(|l| l == k)
                    .ok_or_else(|| Error::Schema(format!("f_alpha names unknown variable {k}")))?;
                out[i] = v;
            }
        }
        if out.iter().any(|&d| d == 0) {
            return Err(Error::Schema("residue degrees must be positive".into()));
        }
        Ok(out)
    }

    pub fn ring(&self) -> Result<Arc<SeriesRing>> {
        let z = Zpm::new(self.p, self.m).map_err(|e| Error::Schema(e.to_string()))?;
        let cr = CoeffRing::new(z, &self.degrees()?).map_err(|e| Error::Schema(e.to_string()))?;
        SeriesRing::new(Arc::new(cr), self.delta.clone(), Mode::Integral).map_err(|e| Error::Schema(e.to_string()))
    }

    fn matrix(&self, ring: &Arc<SeriesRing>, rows: &[Vec<String>], what: &str) -> Result<SeriesMatrix> {
        if rows.len() != self.rank || rows.iter().any(|r| r.len() != self.rank) {
            return Err(Error::Schema(format!("{what} must be {0}x{0}", self.rank)));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| ring.parse(s).map_err(|e| Error::Schema(format!("{what}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        SeriesMatrix::new(self.rank, self.rank, entries)
    }

    fn lookup<'a, T>(&self, map: &'a BTreeMap<String, T>, what: &str) -> Result<Vec<&'a T>> {
        if let Some(k) = map.keys().find(|k| !self.delta.contains(k)) {
            return Err(Error::Schema(format!("{what} names unknown variable {k}")));
        }
        self.delta
            .iter()
            .map(|l| map.get(l).ok_or_else(|| Error::Schema(format!("missing {what}.{l}"))))
            .collect()
    }

    fn gen(&self, ring: &Arc<SeriesRing>, g: &GenDoc, what: &str) -> Result<GammaGen> {
        Ok(GammaGen {
            matrix: self.matrix(ring, &g.matrix, what)?,
            chi: g.chi.to_bigint()?,
        })
    }

    pub fn to_module(&self) -> Result<EtalePhiGammaModule> {
        if self.rank == 0 {
            return Err(Error::Schema("rank must be positive".into()));
        }
        let ring = self.ring()?;
        let frob = self
            .lookup(&self.frob, "F")?
            .into_iter()
            .zip(&self.delta)
            .map(|(rows, l)| self.matrix(&ring, rows, &format!("F.{l}")))
            .collect::<Result<_>>()?;
        let gamma = self
            .lookup(&self.gamma, "G")?
            .into_iter()
            .zip(&self.delta)
            .map(|(g, l)| self.gen(&ring, g, &format!("G.{l}")))
            .collect::<Result<_>>()?;
        let torsion = match &self.torsion {
            None => vec![None; self.delta.len()],
            Some(map) => self
                .delta
                .iter()
                .map(|l| map.get(l).map(|g| self.gen(&ring, g, &format!("torsion.{l}"))).transpose())
                .collect::<Result<_>>()?,
        };
        EtalePhiGammaModule::new(&ring, frob, gamma, torsion).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Canonical document for a module whose matrices are exact.
    pub fn from_module(m: &EtalePhiGammaModule, name: Option<String>, provenance: Vec<String>) -> Result<Self> {
        let ring = m.ring();
        let labels = ring.labels();
        let rows = |a: &SeriesMatrix, what: &str| -> Result<Vec<Vec<String>>> {
            if !a.is_exact() {
                return Err(Error::Schema(format!("{what} has truncated entries and cannot be serialized")));
            }
            Ok((0..a.rows()).map(|i| (0..a.cols()).map(|j| a.get(i, j).to_string()).collect()).collect())
        };
        let gen = |g: &GammaGen, what: &str| -> Result<GenDoc> {
            Ok(GenDoc {
                matrix: rows(&g.matrix, what)?,
                chi: IntValue::from_bigint(&g.chi),
            })
        };
        let degrees = ring.coeffs().degrees().to_vec();
        let (f, f_alpha) = if degrees.iter().all(|&d| d == degrees[0]) {
            ((degrees[0] != 1).then_some(degrees[0]), None)
        } else {
            (None, Some(labels.iter().cloned().zip(degrees.iter().copied()).collect()))
        };
        let mut frob = BTreeMap::new();
        let mut gamma = BTreeMap::new();
        let mut torsion = BTreeMap::new();
        for (a, l) in labels.iter().enumerate() {
            frob.insert(l.clone(), rows(m.frob(a), &format!("F.{l}"))?);
            gamma.insert(l.clone(), gen(m.gamma_gen(a), &format!("G.{l}"))?);
            if let Some(t) = m.torsion(a) {
                torsion.insert(l.clone(), gen(t, &format!("torsion.{l}"))?);
            }
        }
        Ok(ModuleDoc {
            name,
            p: ring.p(),
            m: ring.m(),
            f,
            f_alpha,
            delta: labels.to_vec(),
            rank: m.rank(),
            frob,
            gamma,
            torsion: (!torsion.is_empty()).then_some(torsion),
            provenance,
        })
    }

    /// Parse, rebuild and re-emit: the canonical form of a document.
    pub fn canonicalize(&self) -> Result<Self> {
        let m = self.to_module()?;
        Self::from_module(&m, self.name.clone(), self.provenance.clone())
    }
}
