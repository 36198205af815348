//! JSON documents for finite-level objects and the deterministic small corpus
//! over p ∈ {2, 3}, m ≤ 2, one or two variables, residue degrees ≤ 2, rank ≤ 2.
//!
//! ```json
//! {"kind": "rep", "p": 3, "m": 2, "delta": ["a"], "rank": 1, "rho": {"a": [[7]]}}
//! {"kind": "phi", "p": 2, "m": 1, "delta": ["a"], "f_alpha": {"a": 2}, "rank": 1, "F": {"a": [["w_a"]]}}
//! ```

use super::base::FiniteBase;
use super::descent::{GaloisRepFin, PhiModFin};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::series::{format_coeff, parse_coeff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiniteKind {
    Rep,
    Phi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteDoc {
    pub kind: FiniteKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: u64,
    pub m: u32,
    pub delta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_alpha: Option<BTreeMap<String, usize>>,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<BTreeMap<String, Vec<Vec<i64>>>>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub frob: Option<BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<String>,
}

/// A parsed finite-level object.
#[derive(Clone, Debug)]
pub enum FiniteObject {
    Rep(GaloisRepFin),
    Phi(PhiModFin),
}

impl FiniteObject {
    pub fn base(&self) -> &Arc<FiniteBase> {
        match self {
            FiniteObject::Rep(v) => &v.base,
            FiniteObject::Phi(d) => &d.base,
        }
    }
}

fn schema<E: std::fmt::Display>(e: E) -> Error {
    Error::Schema(e.to_string())
}

impl FiniteDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(schema)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    fn base(&self) -> Result<Arc<FiniteBase>> {
        let mut degrees = vec![1; self.delta.len()];
        for (k, &v) in self.f_alpha.iter().flatten() {
            let i = self
                .delta
                .iter()
                .position(|l| l == k)
                .ok_or_else(|| Error::Schema(format!("f_alpha names unknown variable {k}")))?;
            degrees[i] = v;
        }
        if degrees.contains(&0) || self.delta.is_empty() {
            return Err(Error::Schema("need at least one variable and positive residue degrees".into()));
        }
        let labels: Vec<&str> = self.delta.iter().map(String::as_str).collect();
        Ok(Arc::new(FiniteBase::new(self.p, self.m, &labels, &degrees).map_err(schema)?))
    }

    fn per_variable<'a, T>(&self, map: &'a BTreeMap<String, T>, what: &str) -> Result<Vec<&'a T>> {
        if map.len() != self.delta.len() {
            return Err(Error::Schema(format!("{what} needs exactly one entry per variable")));
        }
        self.delta
            .iter()
            .map(|l| map.get(l).ok_or_else(|| Error::Schema(format!("{what} is missing variable {l}"))))
            .collect()
    }

    fn check_square<T>(&self, rows: &[Vec<T>]) -> Result<()> {
        if rows.len() != self.rank || rows.iter().any(|r| r.len() != self.rank) {
            return Err(Error::Schema(format!("matrices must be {0}x{0}", self.rank)));
        }
        Ok(())
    }

    /// Parses and validates (commutation for representations; étale and
    /// commuting Frobenii are checked separately for φ-modules).
    pub fn to_object(&self) -> Result<FiniteObject> {
        let base = self.base()?;
        if self.rank == 0 {
            return Err(Error::Schema("rank must be positive".into()));
        }
        match self.kind {
            FiniteKind::Rep => {
                if self.frob.is_some() {
                    return Err(Error::Schema("representations take rho, not F".into()));
                }
                let rho = self.rho.as_ref().ok_or_else(|| Error::Schema("missing rho".into()))?;
                let mats = self
                    .per_variable(rho, "rho")?
                    .into_iter()
                    .map(|rows| {
                        self.check_square(rows)?;
                        Ok(Mat::from_rows(base.zpm(), rows))
                    })
                    .collect::<Result<_>>()?;
                Ok(FiniteObject::Rep(GaloisRepFin::new(base, mats)?))
            }
            FiniteKind::Phi => {
                if self.rho.is_some() {
                    return Err(Error::Schema("φ-modules take F, not rho".into()));
                }
                let f = self.frob.as_ref().ok_or_else(|| Error::Schema("missing F".into()))?;
                let ring = base.ring().clone();
                let frob = self
                    .per_variable(f, "F")?
                    .into_iter()
                    .map(|rows| {
                        self.check_square(rows)?;
                        rows.iter()
                            .flatten()
                            .map(|s| parse_coeff(&ring, s))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                Ok(FiniteObject::Phi(PhiModFin::new(base, self.rank, frob)?))
            }
        }
    }

    fn header(base: &FiniteBase, kind: FiniteKind, rank: usize, name: Option<String>, provenance: Vec<String>) -> Self {
        let ring = base.ring();
        let f_alpha = ring
            .labels()
            .iter()
            .zip(base.degrees())
            .filter(|(_, &d)| d != 1)
            .map(|(l, &d)| (l.clone(), d))
            .collect::<BTreeMap<_, _>>();
        FiniteDoc {
            kind,
            name,
            p: ring.p(),
            m: ring.m(),
            delta: ring.labels().to_vec(),
            f_alpha: (!f_alpha.is_empty()).then_some(f_alpha),
            rank,
            rho: None,
            frob: None,
            provenance,
        }
    }

    pub fn from_object(obj: &FiniteObject, name: Option<String>, provenance: Vec<String>) -> Self {
        match obj {
            FiniteObject::Rep(v) => {
                let z = v.base.zpm();
                let r = v.rank();
                let mut doc = Self::header(&v.base, FiniteKind::Rep, r, name, provenance);
                doc.rho = Some(
                    v.base
                        .ring()
                        .labels()
                        .iter()
                        .zip(&v.rho)
                        .map(|(l, m)| {
                            let rows = (0..r).map(|i| (0..r).map(|j| z.to_signed(m.get(i, j))).collect()).collect();
                            (l.clone(), rows)
                        })
                        .collect(),
                );
                doc
            }
            FiniteObject::Phi(d) => {
                let r = d.rank;
                let ring = d.base.ring();
                let mut doc = Self::header(&d.base, FiniteKind::Phi, r, name, provenance);
                doc.frob = Some(
                    ring.labels()
                        .iter()
                        .zip(&d.frob)
                        .map(|(l, f)| {
                            let rows = f.chunks(r).map(|row| row.iter().map(|c| format_coeff(ring, c)).collect()).collect();
                            (l.clone(), rows)
                        })
                        .collect(),
                );
                doc
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteFixture {
    pub name: String,
    pub provenance: Vec<String>,
    pub object: FiniteObject,
}

impl FiniteFixture {
    pub fn to_doc(&self) -> FiniteDoc {
        FiniteDoc::from_object(&self.object, Some(self.name.clone()), self.provenance.clone())
    }
}

fn order_of(a: &Mat, cap: usize) -> Option<usize> {
    let id = Mat::identity(a.zpm(), a.rows());
    let mut x = a.clone();
    (1..=cap).find(|_| {
        let hit = x == id;
        x = x.mul(a);
        hit
    })
}

/// A random invertible matrix of order at most `cap`.
fn small_order_matrix(rng: &mut ChaCha8Rng, base: &FiniteBase, r: usize, cap: usize) -> Mat {
    let q = base.zpm().modulus() as i64;
    loop {
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..r).map(|_| rng.gen_range(0..q)).collect()).collect();
        let a = Mat::from_rows(base.zpm(), &rows);
        if a.is_invertible() && order_of(&a, cap).is_some() {
            return a;
        }
    }
}

fn degree_vectors(n: usize) -> Vec<Vec<usize>> {
    match n {
        1 => vec![vec![1], vec![2]],
        _ => vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]],
    }
}

const LABELS: [&str; 2] = ["a", "b"];

/// The full small grid of representations (a trivial and a random one per
/// parameter choice) plus a few φ-modules, including one that is not étale.
pub fn generate(seed: u64) -> Result<Vec<FiniteFixture>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in [2u64, 3] {
        for m in [1u32, 2] {
            for n in [1usize, 2] {
                for degs in degree_vectors(n) {
                    let base = Arc::new(FiniteBase::new(p, m, &LABELS[..n], &degs)?);
                    let tag = format!("p{p}_m{m}_f{}", degs.iter().map(|d| d.to_string()).collect::<String>());
                    for r in [1usize, 2] {
                        let params = format!("p={p}, m={m}, f={degs:?}, rank={r}");
                        out.push(FiniteFixture {
                            name: format!("rep_trivial_{tag}_r{r}"),
                            provenance: vec![format!("trivial({params})")],
                            object: FiniteObject::Rep(GaloisRepFin::trivial(base.clone(), r)),
                        });
                        let a = small_order_matrix(&mut rng, &base, r, 6);
                        let ks: Vec<u64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                        let rho = ks.iter().map(|&k| a.pow(k)).collect();
                        out.push(FiniteFixture {
                            name: format!("rep_random_{tag}_r{r}"),
                            provenance: vec![format!("powers {ks:?} of a random matrix of order <= 6 ({params}, seed={seed})")],
                            object: FiniteObject::Rep(GaloisRepFin::new(base.clone(), rho)?),
                        });
                    }
                }
            }
        }
    }

    let f4 = Arc::new(FiniteBase::new(2, 1, &["a"], &[2])?);
    let omega = f4.coeffs().basis(1);
    out.push(FiniteFixture {
        name: "phi_unit_f4".into(),
        provenance: vec!["F = (generator of F_4), p=2, m=1".into()],
        object: FiniteObject::Phi(PhiModFin::new(f4, 1, vec![vec![omega]])?),
    });
    let z9 = Arc::new(FiniteBase::new(3, 2, &["a"], &[1])?);
    out.push(FiniteFixture {
        name: "phi_one_plus_p".into(),
        provenance: vec!["F = (1 + 3), p=3, m=2".into()],
        object: FiniteObject::Phi(PhiModFin::new(z9.clone(), 1, vec![vec![z9.coeffs().from_int(4)]])?),
    });
    let two = Arc::new(FiniteBase::new(3, 1, &["a", "b"], &[2, 1])?);
    out.push(FiniteFixture {
        name: "phi_trivial_p3_f21_r2".into(),
        provenance: vec!["trivial(p=3, m=1, f=[2, 1], rank=2)".into()],
        object: FiniteObject::Phi(PhiModFin::trivial(two, 2)),
    });
    out.push(FiniteFixture {
        name: "phi_not_etale".into(),
        provenance: vec!["F = (3), p=3, m=2: not invertible".into()],
        object: FiniteObject::Phi(PhiModFin::new(z9.clone(), 1, vec![vec![z9.coeffs().from_int(3)]])?),
    });
    Ok(out)
}

/// Canonical JSON of every fixture.
pub fn emit(seed: u64) -> Result<Vec<(String, String)>> {
    Ok(generate(seed)?
        .iter()
        .map(|f| (format!("{}.json", f.name), f.to_doc().to_json()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        for fx in generate(7).unwrap() {
            let doc = FiniteDoc::from_json(&fx.to_doc().to_json()).unwrap();
            let again = FiniteDoc::from_object(&doc.to_object().unwrap(), doc.name.clone(), doc.provenance.clone());
            assert_eq!(again, doc, "{}", fx.name);
        }
    }

    #[test]
    fn schema_errors() {
        let bad = r#"{"kind": "rep", "p": 3, "m": 1, "delta": ["a"], "rank": 1, "rho": {"b": [[1]]}}"#;
        assert!(matches!(FiniteDoc::from_json(bad).unwrap().to_object(), Err(Error::Schema(_))));
        let extra = r#"{"kind": "rep", "p": 3, "m": 1, "delta": ["a"], "rank": 1, "rho": {"a": [[1]]}, "x": 1}"#;
        assert!(matches!(FiniteDoc::from_json(extra), Err(Error::Schema(_))));
    }
}
