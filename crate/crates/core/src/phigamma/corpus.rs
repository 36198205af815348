//! Deterministic fixture modules built from valid constructors: trivial
//! modules, Tate twists, rank-one unit twists, direct sums, tensor products,
//! restriction of scalars and constant-matrix (finite-level) modules.
//!
//! Fixtures carry identity torsion generators (acting through ω) unless noted,
//! so twists by the cyclotomic character have no degree-0 invariants.

use super::schema::ModuleDoc;
use super::{EtalePhiGammaModule, SeriesMatrix};
use crate::error::Result;
use crate::series::{LaurentSeries, SeriesRing};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub provenance: Vec<String>,
    pub module: EtalePhiGammaModule,
}

impl Fixture {
    fn new(name: &str, provenance: Vec<String>, module: EtalePhiGammaModule) -> Self {
        Fixture {
            name: name.to_string(),
            provenance,
            module,
        }
    }

    pub fn to_doc(&self) -> Result<ModuleDoc> {
        ModuleDoc::from_module(&self.module, Some(self.name.clone()), self.provenance.clone())
    }

    /// Residue degree of the coefficient ring when it is the same for all variables.
    pub fn uniform_degree(&self) -> Option<usize> {
        let d = self.module.ring().coeffs().degrees();
        d.iter().all(|&x| x == d[0]).then_some(d[0])
    }
}

fn random_unit(rng: &mut ChaCha8Rng, p: u64, q: u64) -> i64 {
    loop {
        let v = rng.gen_range(1..q);
        if v % p != 0 {
            return v as i64;
        }
    }
}

fn const_matrix(ring: &Arc<SeriesRing>, rows: &[Vec<i64>]) -> Result<SeriesMatrix> {
    SeriesMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| LaurentSeries::from_int(ring, v)).collect())
            .collect(),
    )
}

fn trivial(p: u64, m: u32, labels: &[&str], degrees: &[usize]) -> Result<(EtalePhiGammaModule, String)> {
    let ring = SeriesRing::unramified(p, m, labels, degrees)?;
    Ok((
        EtalePhiGammaModule::trivial(&ring, 1).with_trivial_torsion()?,
        format!("trivial(p={p}, m={m}, delta={labels:?}, f={degrees:?}, torsion=identity)"),
    ))
}

/// The fixture list for a seed. Names and constructions are fixed; the seed
/// only drives the random unit and matrix choices.
pub fn generate(seed: u64) -> Result<Vec<Fixture>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let (t3a, s3a) = trivial(3, 2, &["a"], &[1])?;
    out.push(Fixture::new("trivial_p3_a", vec![s3a.clone()], t3a.clone()));

    let (t5ab, s5ab) = trivial(5, 2, &["a", "b"], &[1, 1])?;
    out.push(Fixture::new("trivial_p5_ab", vec![s5ab.clone()], t5ab.clone()));

    let (t3ab, s3ab) = trivial(3, 2, &["a", "b"], &[1, 1])?;
    let tw3ab = t3ab.tate_twist();
    out.push(Fixture::new(
        "tate_twist_p3_ab",
        vec![s3ab.clone(), "tate_twist".into()],
        tw3ab.clone(),
    ));

    let (t5a, s5a) = trivial(5, 2, &["a"], &[1])?;
    out.push(Fixture::new(
        "tate_twist_squared_p5_a",
        vec![s5a.clone(), "tate_twist".into(), "tate_twist".into()],
        t5a.tate_twist().tate_twist(),
    ));

    let ring3ab = t3ab.ring().clone();
    let q = ring3ab.zpm().modulus();
    let (ua, ub) = (random_unit(&mut rng, 3, q), random_unit(&mut rng, 3, q));
    let unit = EtalePhiGammaModule::rank_one(
        &ring3ab,
        vec![LaurentSeries::from_int(&ring3ab, ua), LaurentSeries::from_int(&ring3ab, ub)],
        vec![LaurentSeries::one(&ring3ab), LaurentSeries::one(&ring3ab)],
    )?
    .with_trivial_torsion()?;
    let unit_desc = format!("unit_frobenius(F_a={ua}, F_b={ub})");
    out.push(Fixture::new("unit_frobenius_p3_ab", vec![s3ab.clone(), unit_desc.clone()], unit.clone()));

    out.push(Fixture::new(
        "tensor_of_twists_p3_ab",
        vec![s3ab.clone(), "tate_twist".into(), format!("tensor({unit_desc})")],
        tw3ab.tensor(&unit)?,
    ));

    out.push(Fixture::new(
        "direct_sum_p5_a",
        vec![s5a.clone(), "direct_sum(tate_twist)".into()],
        t5a.direct_sum(&t5a.tate_twist())?,
    ));

    // (1+π)^2 e with γ acting by (1+π)^3: F φ(G) = (1+π)^8 = G γ(F) for c = 4.
    // No torsion: (1+π)^k would need k = ω − 1.
    let ring3a = t3a.ring().clone();
    let cyc = EtalePhiGammaModule::rank_one(
        &ring3a,
        vec![LaurentSeries::one_plus_var_pow(&ring3a, 0, &BigInt::from(2))?],
        vec![LaurentSeries::one_plus_var_pow(&ring3a, 0, &BigInt::from(3))?],
    )?;
    out.push(Fixture::new(
        "cyclotomic_unit_p3_a",
        vec![s3a.clone(), "rank_one(F=(1+pi)^2, G=(1+pi)^3)".into()],
        cyc,
    ));

    // Constant commuting matrices: F_a = A, F_b = A^2.
    let q = ring3ab.zpm().modulus() as i64;
    let a = loop {
        let m: Vec<Vec<i64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(0..q)).collect()).collect();
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).rem_euclid(q);
        if det % 3 != 0 {
            break m;
        }
    };
    let fa = const_matrix(&ring3ab, &a)?;
    let fb = fa.mul(&fa)?;
    let id = SeriesMatrix::identity(&ring3ab, 2);
    let chi = super::default_character(3);
    let gens = |m: &SeriesMatrix| super::GammaGen {
        matrix: m.clone(),
        chi: chi.clone(),
    };
    let constant = EtalePhiGammaModule::new(&ring3ab, vec![fa, fb], vec![gens(&id), gens(&id)], vec![None, None])?
        .with_trivial_torsion()?;
    out.push(Fixture::new(
        "constant_rank2_p3_ab",
        vec![s3ab.clone(), format!("constant(F_a={a:?}, F_b=F_a^2)")],
        constant,
    ));

    let (t2f2, s2f2) = trivial(2, 2, &["a"], &[2])?;
    out.push(Fixture::new("trivial_f2_p2_a", vec![s2f2.clone()], t2f2.clone()));
    out.push(Fixture::new(
        "induced_trivial_f2_p2_a",
        vec![s2f2, "induct_unramified".into()],
        t2f2.induct_unramified()?,
    ));

    let ring3f2 = SeriesRing::unramified(3, 2, &["a"], &[2])?;
    let theta = ring3f2.parse("t")?;
    let theta_mod = EtalePhiGammaModule::rank_one(&ring3f2, vec![theta], vec![LaurentSeries::one(&ring3f2)])?
        .with_trivial_torsion()?;
    let theta_desc = "rank_one(p=3, m=2, delta=[a], f=[2], F=t, G=1, torsion=identity)".to_string();
    out.push(Fixture::new("theta_f2_p3_a", vec![theta_desc.clone()], theta_mod.clone()));
    out.push(Fixture::new(
        "induced_theta_f2_p3_a",
        vec![theta_desc, "induct_unramified".into()],
        theta_mod.induct_unramified()?,
    ));

    let (t3f3, s3f3) = trivial(3, 1, &["a"], &[3])?;
    out.push(Fixture::new("trivial_f3_p3_a", vec![s3f3], t3f3));

    let (t3f2ab, s3f2ab) = trivial(3, 1, &["a", "b"], &[2, 2])?;
    out.push(Fixture::new("twist_f2_p3_ab", vec![s3f2ab, "tate_twist".into()], t3f2ab.tate_twist()));

    Ok(out)
}

/// Canonical JSON of every fixture, in generation order.
pub fn emit(seed: u64) -> Result<Vec<(String, String)>> {
    generate(seed)?
        .iter()
        .map(|f| Ok((format!("{}.json", f.name), f.to_doc()?.to_json())))
        .collect()
}
