//! Acceptance battery: one PASS/FAIL line per criterion, each with a pinned
//! runtime limit. Exits nonzero if any criterion fails.

mod common;

use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use phigamma::complexes::series::{apply_differential, build_complex, h0_exact, pair_cochains, Window};
use phigamma::complexes::{cells, ComplexKind};
use phigamma::error::Error;
use phigamma::finite_level::corpus as fcorpus;
use phigamma::finite_level::*;
use phigamma::phigamma::{corpus, EtalePhiGammaModule, ModuleElement};
use phigamma::series::{LaurentSeries, LogNorm, SeriesRing};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn e<T>(r: phigamma::error::Result<T>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

const CASES: usize = 120;

// ---------- 1. operator identities ----------

fn operator_identities() -> Outcome {
    let rings = operator_rings();
    let two: Vec<_> = rings.iter().filter(|r| r.nvars() == 2).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = [0usize; 4];

    for case in 0..CASES {
        let r = &rings[case % rings.len()];
        let a = rng.gen_range(0..r.nvars());
        let f = if case % 2 == 0 {
            random_poly(r, &mut rng, 4, -3, 3)
        } else {
            random_truncated(r, &mut rng, 4, -2, 6)
        };
        let back = e(f.phi(a).psi(a))?;
        check(back.agrees_with(&f) && back.is_exact() == f.is_exact(), || format!("psi∘phi ≠ id on {f}"))?;
        counts[0] += 1;

        let pf = f.phi(a);
        let mut shift = LaurentSeries::one(r);
        let step = LaurentSeries::one(r).add(&LaurentSeries::var(r, a)).unwrap();
        for i in 0..r.p() {
            let img = e(e(shift.mul(&pf))?.psi(a))?;
            let ok = if i == 0 { img.agrees_with(&f) } else { img.is_zero() };
            check(ok, || format!("psi((1+π)^{i} phi(f)) wrong for f = {f}"))?;
            shift = e(shift.mul(&step))?;
        }
        counts[1] += 1;

        let g = random_poly(r, &mut rng, 4, -3, 3);
        let lhs = e(e(f.phi(a).mul(&g))?.psi(a))?;
        let rhs = e(f.mul(&e(g.psi(a))?))?;
        check(lhs.agrees_with(&rhs), || format!("projection formula fails for {f}, {g}"))?;
        counts[2] += 1;
    }

    // Commutation relations, each on CASES random inputs.
    type Op = Box<dyn Fn(&LaurentSeries) -> phigamma::error::Result<LaurentSeries>>;
    let mut relations = 0;
    for case in 0..CASES {
        let r1 = &rings[case % rings.len()];
        let r2 = &two[case % two.len()];
        let c = random_character(r2.p(), &mut rng);
        let d = random_character(r2.p(), &mut rng);
        let a = rng.gen_range(0..r1.nvars());
        let c1 = random_character(r1.p(), &mut rng);
        let phi = |al: usize| -> Op { Box::new(move |x: &LaurentSeries| Ok(x.phi(al))) };
        let psi = |al: usize| -> Op { Box::new(move |x: &LaurentSeries| x.psi(al)) };
        let gam = |al: usize, ch: BigInt| -> Op { Box::new(move |x: &LaurentSeries| x.gamma(al, &ch)) };
        let pairs: Vec<(&str, &Arc<SeriesRing>, Op, Op)> = vec![
            ("phi_a phi_b", r2, phi(0), phi(1)),
            ("phi_a gamma_b", r2, phi(0), gam(1, c.clone())),
            ("gamma_a gamma_b", r2, gam(0, c.clone()), gam(1, d.clone())),
            ("psi_a psi_b", r2, psi(0), psi(1)),
            ("psi_a phi_b", r2, psi(0), phi(1)),
            ("psi_a gamma_b", r2, psi(0), gam(1, d.clone())),
            ("phi_a gamma_a", r1, phi(a), gam(a, c1.clone())),
            ("psi_a gamma_a", r1, psi(a), gam(a, c1.clone())),
        ];
        for (name, r, x, y) in pairs {
            let f = if case % 2 == 0 {
                random_poly(r, &mut rng, 4, -3, 3)
            } else {
                random_truncated(r, &mut rng, 4, -2, 8)
            };
            let xy = e(x(&e(y(&f))?))?;
            let yx = e(y(&e(x(&f))?))?;
            check(xy.agrees_with(&yx), || format!("{name} do not commute on {f}"))?;
            relations += 1;
        }
    }
    counts[3] = relations;
    Ok(format!(
        "psi∘phi {} cases, delta formula {} cases, projection {} cases, 8 commutation relations × {CASES} cases",
        counts[0], counts[1], counts[2]
    ))
}

// ---------- 2. residues and pairing ----------

fn residues_and_pairing() -> Outcome {
    let rings = operator_rings();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for r in &rings {
        let mut s = LaurentSeries::one(r);
        for a in 0..r.nvars() {
            let mut inv = r.zero_exps();
            inv[a] = -1;
            let t = LaurentSeries::monomial(r, &inv, r.coeffs().one()).add(&LaurentSeries::one(r)).unwrap();
            s = e(s.mul(&t))?;
        }
        check(e(s.res())? == r.coeffs().one(), || format!("res(∏(1+X)/X) ≠ 1 over {:?}", r.labels()))?;
        check(r.coeffs().is_zero(&e(LaurentSeries::one(r).res())?), || "res(1) ≠ 0".into())?;
    }
    for case in 0..CASES {
        let r = &rings[case % rings.len()];
        let a = rng.gen_range(0..r.nvars());
        let f = random_truncated(r, &mut rng, 5, -2, 40);
        let g = random_truncated(r, &mut rng, 5, -2, 40);
        let lhs = e(e(f.phi(a).mul(&g))?.res())?;
        let rhs = e(e(f.mul(&e(g.psi(a))?))?.res())?;
        check(lhs == rhs, || format!("res(phi(f)g) ≠ res(f psi(g)) for {f}, {g}"))?;
    }
    let mut pairs = 0;
    for fx in e(corpus::generate(0))? {
        let m = &fx.module;
        let d = e(m.dual_twist())?;
        for a in 0..m.nvars() {
            for _ in 0..4 {
                let x = random_element(m.ring(), m.rank(), &mut rng);
                let y = random_element(m.ring(), m.rank(), &mut rng);
                let lhs = e(m.pairing(&e(m.apply_phi(a, &x))?, &y))?;
                let rhs = e(m.pairing(&x, &e(d.apply_psi(a, &y))?))?;
                check(lhs == rhs, || format!("{{phi x, y}} ≠ {{x, psi y}} on {}", fx.name))?;
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "residue normalization on {} rings, {CASES} random truncated pairs, {pairs} module pairings",
        rings.len()
    ))
}

// ---------- 3. complexes ----------

fn rank_one(p: u64, m: u32, n: usize, twist: bool) -> EtalePhiGammaModule {
    let labels = ["a", "b", "c"];
    let r = SeriesRing::integral(p, m, &labels[..n]).unwrap();
    let t = EtalePhiGammaModule::trivial(&r, 1).with_trivial_torsion().unwrap();
    if twist {
        t.tate_twist()
    } else {
        t
    }
}

fn complexes() -> Outcome {
    let kinds = [ComplexKind::Phi, ComplexKind::Gamma, ComplexKind::Herr, ComplexKind::Psi];
    let mut built = 0;
    for n in 1..=3usize {
        let w = match n {
            1 => Window::uniform(1, -4, 8),
            2 => Window::uniform(2, -3, 5),
            _ => Window::uniform(3, -2, 3),
        }
        .unwrap();
        for twist in [false, true] {
            let m = rank_one(3, 2, n, twist);
            for kind in kinds {
                let c = e(build_complex(&m, kind, &w, kind.top_degree(n)))?;
                check(c.complex.d_squared_failure().is_none(), || {
                    format!("d∘d ≠ 0 for {kind:?}, |Δ| = {n}, twist = {twist}")
                })?;
                built += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = 0;
    for n in 1..=3usize {
        for twist in [false, true] {
            let m = rank_one(5, 2, n, twist);
            let md = e(m.dual_twist())?;
            for j in 0..n {
                for _ in 0..10 {
                    let x: Vec<ModuleElement> = cells(ComplexKind::Phi, n, j)
                        .iter()
                        .map(|_| random_element(m.ring(), 1, &mut rng))
                        .collect();
                    let y: Vec<ModuleElement> = cells(ComplexKind::Psi, n, n - j - 1)
                        .iter()
                        .map(|_| random_element(m.ring(), 1, &mut rng))
                        .collect();
                    let dx = e(apply_differential(&m, ComplexKind::Phi, j, &x))?;
                    let dy = e(apply_differential(&md, ComplexKind::Psi, n - j - 1, &y))?;
                    let lhs = e(pair_cochains(&m, &dx, &y))?;
                    let rhs = e(pair_cochains(&m, &x, &dy))?;
                    check(lhs == rhs, || format!("Φ/Ψ adjointness fails, |Δ| = {n}, degree {j}"))?;
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{built} complexes with d∘d = 0, {pairs} adjointness pairs"))
}

// ---------- 4. degree-0 cohomology ----------

fn degree_zero() -> Outcome {
    let mut cases = 0;
    for p in [3u64, 5] {
        for m in 1..=2u32 {
            for n in 1..=2usize {
                let w = Window::uniform(n, -16, 16).unwrap();
                let h = e(h0_exact(&rank_one(p, m, n, false), ComplexKind::Herr, &w))?;
                let d = &h.degrees[0];
                check(d.divisors.is_empty() && d.free_rank == 1, || {
                    format!("h0(trivial) = {:?}+{} for p={p}, m={m}, n={n}", d.divisors, d.free_rank)
                })?;
                let h = e(h0_exact(&rank_one(p, m, n, true), ComplexKind::Herr, &w))?;
                check(h.degrees[0].is_zero(), || format!("h0(twist) ≠ 0 for p={p}, m={m}, n={n}"))?;
                cases += 2;
            }
        }
    }
    Ok(format!("{cases} modules on window −16:16, stable under doubling"))
}

// ---------- 5. finite-level equivalence ----------

fn finite_equivalence() -> Outcome {
    let mut reps = 0;
    let mut phis = 0;
    for fx in e(fcorpus::generate(0))? {
        match &fx.object {
            FiniteObject::Rep(v) => {
                e(roundtrip_check(v)).map_err(|x| format!("{}: {x}", fx.name))?;
                let d = e(functor_d(v))?;
                e(roundtrip_check_d(&d)).map_err(|x| format!("{}: {x}", fx.name))?;
                let lhs = e(phi_cohomology(&d))?;
                let rhs = e(koszul_oracle(v))?;
                check(lhs.same_groups(&rhs), || format!("{}: φ-cohomology ≠ Koszul oracle", fx.name))?;
                reps += 1;
            }
            FiniteObject::Phi(d) => match roundtrip_check_d(d) {
                Ok(_) => phis += 1,
                Err(Error::NotEtale(_)) if d.validate_etale().is_err() => phis += 1,
                Err(x) => return Err(format!("{}: {x}", fx.name)),
            },
        }
    }
    let b = Arc::new(e(FiniteBase::new(3, 1, &["a", "b"], &[1, 1]))?);
    let prof = e(koszul_oracle(&GaloisRepFin::trivial(b.clone(), 1)))?;
    let phi = e(phi_cohomology(&e(functor_d(&GaloisRepFin::trivial(b, 1)))?))?;
    check(prof.free_ranks() == vec![1, 2, 1] && phi.same_groups(&prof), || {
        format!("trivial rank 1, n = 2: {:?}", prof.free_ranks())
    })?;
    Ok(format!("{reps} representations and {phis} φ-modules round-trip; trivial n=2 gives (1, 2, 1)"))
}

// ---------- 6. representing algebra ----------

fn representing_algebras() -> Outcome {
    let mut count = 0;
    for fx in e(fcorpus::generate(0))? {
        let d = match &fx.object {
            FiniteObject::Rep(v) if v.base.zpm().m() == 1 => e(functor_d(v))?,
            FiniteObject::Phi(d) if d.base.zpm().m() == 1 && d.validate_etale().is_ok() => d.clone(),
            _ => continue,
        };
        let s = e(representing_algebra(&d))?;
        let expected = d.base.zpm().p().pow(d.rank as u32);
        check(s.points.iter().all(|&x| x == expected), || format!("{}: points {:?}", fx.name, s.points))?;
        check(s.jacobian_full_rank.iter().all(|&x| x), || format!("{}: singular Jacobian", fx.name))?;
        count += 1;
    }
    Ok(format!("{count} mod-p instances with p^r points and étale Jacobian"))
}

// ---------- 7. norms ----------

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn norms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let radii = [rat(1, 1), rat(1, 2), rat(1, 3), rat(2, 5), rat(7, 3)];
    for p in [2u64, 3, 5] {
        for n in 1..=2usize {
            let r = SeriesRing::integral(p, 2, &["a", "b"][..n]).unwrap();
            for j in 0..n {
                for rad in &radii {
                    let want = rad * rat(p as i64, p as i64 - 1);
                    let got = LaurentSeries::var(&r, j).gauss_norm_jr(j, rad);
                    check(got == LogNorm::Finite(want.clone()), || format!("|π_{j}|_{{{j},{rad}}} = {got}"))?;
                }
            }
        }
    }
    let rings = operator_rings();
    for case in 0..100 {
        let r = &rings[case % rings.len()];
        let f = random_poly(r, &mut rng, 4, -3, 3);
        let g = random_poly(r, &mut rng, 4, -3, 3);
        let fg = e(f.mul(&g))?;
        let rad = &radii[case % radii.len()];
        check(fg.gauss_norm_r(rad) >= f.gauss_norm_r(rad).plus(&g.gauss_norm_r(rad)), || {
            format!("|fg|_r > |f|_r|g|_r for {f}, {g}")
        })?;
        let j = case % r.nvars();
        check(
            fg.gauss_norm_jr(j, rad) >= f.gauss_norm_jr(j, rad).plus(&g.gauss_norm_jr(j, rad)),
            || format!("|fg|_{{j,r}} > |f|_{{j,r}}|g|_{{j,r}} for {f}, {g}"),
        )?;
    }
    let r = SeriesRing::integral(3, 3, &["a", "b"]).unwrap();
    for _ in 0..20 {
        let unit = LaurentSeries::monomial(&r, &[rng.gen_range(-3..=3), rng.gen_range(-3..=3)], r.coeffs().one());
        let y = e(random_poly(&r, &mut rng, 4, -3, 3).scale_int(3).add(&unit))?;
        let bound = y.norm_exponent_bound();
        let divisible = random_poly(&r, &mut rng, 4, -3, 3).scale_int(3);
        if divisible.is_zero() {
            continue;
        }
        let cz = divisible.norm_exponent_bound();
        for k in 0..=20u32 {
            let rad = BigRational::new(BigInt::one(), BigInt::from(2).pow(k));
            let v = y.gauss_norm_r(&rad);
            let v = v.finite().ok_or("unit polynomial has zero norm")?;
            check(v.abs() <= &rad * &bound, || format!("|log|Y|_r| > rC(Y) at r = 2^-{k} for {y}"))?;
            let w = divisible.gauss_norm_r(&rad);
            let w = w.finite().ok_or("nonzero polynomial has zero norm")?;
            check(*w >= BigRational::one() - &rad * &cz, || format!("pY norm too large at r = 2^-{k}"))?;
        }
        let limit = divisible.gauss_norm_r(&BigRational::zero());
        check(limit >= LogNorm::Finite(BigRational::one()), || format!("lim |pY|_r > 1/p for {divisible}"))?;
    }
    Ok("exact |π_j|_{j,r}, 100 submultiplicativity pairs, 20 limit sequences r = 2^-k, k ≤ 20".into())
}

// ---------- 8. Shapiro ----------

fn shapiro() -> Outcome {
    let mut count = 0;
    for fx in e(corpus::generate(0))? {
        if !matches!(fx.uniform_degree(), Some(2 | 3)) {
            continue;
        }
        let m = &fx.module;
        let w = Window::uniform(m.nvars(), -16, 16).unwrap();
        let lhs = e(h0_exact(m, ComplexKind::Herr, &w))?;
        let rhs = e(h0_exact(&e(m.induct_unramified())?, ComplexKind::Herr, &w))?;
        check(lhs.same_groups(&rhs), || format!("{}: h0 {:?} vs induced {:?}", fx.name, lhs.lengths(), rhs.lengths()))?;
        count += 1;
    }
    check(count > 0, || "no corpus modules with f = 2, 3".into())?;
    Ok(format!("{count} corpus modules with f ∈ {{2, 3}}"))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 8] = [
        ("operator identities", 60.0, operator_identities),
        ("residues and pairing", 60.0, residues_and_pairing),
        ("differentials square to zero, Φ/Ψ adjointness", 120.0, complexes),
        ("degree-0 Herr cohomology", 120.0, degree_zero),
        ("finite-level equivalence", 300.0, finite_equivalence),
        ("representing algebra", 60.0, representing_algebras),
        ("norms", 30.0, norms),
        ("Shapiro in degree 0", 120.0, shapiro),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        let (status, detail) = match out {
            Ok(d) if secs <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; too slow")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} [{}] {name}: {detail} ({secs:.2}s, limit {limit:.0}s)", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
