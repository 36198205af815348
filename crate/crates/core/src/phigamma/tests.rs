use super::*;

fn ring(p: u64, m: u32, labels: &[&str]) -> Arc<SeriesRing> {
    SeriesRing::integral(p, m, labels).unwrap()
}

fn scalar_module(r: &Arc<SeriesRing>, f: &str) -> EtalePhiGammaModule {
    EtalePhiGammaModule::rank_one(r, vec![r.parse(f).unwrap()], vec![LaurentSeries::one(r)]).unwrap()
}

#[test]
fn etale_examples() {
    let r = ring(3, 2, &["a"]);
    assert!(EtalePhiGammaModule::trivial(&r, 2).validate_etale().is_ok());
    assert!(matches!(scalar_module(&r, "3").validate_etale(), Err(Error::NotEtale(_))));
    let m = scalar_module(&r, "pi_a");
    m.validate_etale().unwrap();
    assert_eq!(m.frob_inverses().unwrap()[0].get(0, 0).to_string(), "pi_a^-1");
    let r2 = ring(3, 2, &["a", "b"]);
    let f = SeriesMatrix::scalar(&r2, 2, &LaurentSeries::from_int(&r2, 3));
    let g = GammaGen {
        matrix: SeriesMatrix::identity(&r2, 2),
        chi: BigInt::from(4),
    };
    let m = EtalePhiGammaModule::new(&r2, vec![f.clone(), f], vec![g.clone(), g], vec![None, None]).unwrap();
    assert!(matches!(m.validate_etale(), Err(Error::NotEtale(_))));
}

#[test]
fn commutation_examples() {
    let r = ring(3, 2, &["a", "b"]);
    EtalePhiGammaModule::trivial(&r, 1).validate_commutation().unwrap();
    EtalePhiGammaModule::trivial(&r, 1).tate_twist().validate_commutation().unwrap();
    let m = EtalePhiGammaModule::rank_one(
        &r,
        vec![r.parse("1 + pi_a").unwrap(), LaurentSeries::one(&r)],
        vec![LaurentSeries::one(&r), LaurentSeries::one(&r)],
    )
    .unwrap();
    // The Frobenius relation holds; the F/G relation does not for trivial G.
    m.validate_commutation_with(false).unwrap();
    match m.validate_commutation() {
        Err(Error::CommutationFailure { relation, .. }) => assert_eq!(relation, "F_a/G_a"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn operator_examples() {
    let r = ring(2, 2, &["x"]);
    let triv = EtalePhiGammaModule::trivial(&r, 1);
    let one = ModuleElement::new(vec![LaurentSeries::one(&r)]);
    assert_eq!(triv.apply_phi(0, &one).unwrap(), one);
    let m = scalar_module(&r, "1 + pi_x");
    assert_eq!(m.apply_phi(0, &one).unwrap().coords[0].to_string(), "1 + pi_x");
    let x = ModuleElement::new(vec![r.parse("pi_x").unwrap()]);
    let expect = r.parse("1 + pi_x").unwrap().mul(&r.parse("2*pi_x + pi_x^2").unwrap()).unwrap();
    assert_eq!(m.apply_phi(0, &x).unwrap().coords[0], expect);
    // ψ undoes φ
    let y = ModuleElement::new(vec![r.parse("3*pi_x^-2 + pi_x + 2").unwrap()]);
    let back = m.apply_psi(0, &m.apply_phi(0, &y).unwrap()).unwrap();
    assert!(back.agrees_with(&y), "{back:?}");
    // rank one F = (1+π)^j, 1 ≤ j < p, kills 1
    let r3 = ring(3, 2, &["x"]);
    for j in 1..3 {
        let m = EtalePhiGammaModule::rank_one(
            &r3,
            vec![LaurentSeries::one_plus_var_pow(&r3, 0, &BigInt::from(j)).unwrap()],
            vec![LaurentSeries::one(&r3)],
        )
        .unwrap();
        let one = ModuleElement::new(vec![LaurentSeries::one(&r3)]);
        assert!(m.apply_psi(0, &one).unwrap().is_zero());
    }
}

#[test]
fn twist_examples() {
    let r = ring(3, 2, &["a"]);
    let t = EtalePhiGammaModule::trivial(&r, 1).tate_twist();
    assert_eq!(t.gamma_gen(0).matrix.get(0, 0).to_string(), "4");
    let tt = t.tate_twist();
    assert_eq!(tt.gamma_gen(0).matrix.get(0, 0).to_string(), "7");
    tt.validate_etale().unwrap();
}

#[test]
fn dual_examples() {
    let r = ring(3, 2, &["a"]);
    let triv = EtalePhiGammaModule::trivial(&r, 1);
    assert_eq!(triv.dual().unwrap(), triv);
    let m = scalar_module(&r, "pi_a");
    let d = m.dual().unwrap();
    assert_eq!(d.frob(0).get(0, 0).to_string(), "pi_a^-1");
    assert_eq!(d.dual().unwrap(), m);
}

#[test]
fn pairing_examples() {
    let r = ring(5, 2, &["a", "b"]);
    let triv = EtalePhiGammaModule::trivial(&r, 1);
    let x = ModuleElement::new(vec![r.parse("pi_a^-1*pi_b^-1 + pi_a^-1 + pi_b^-1 + 1").unwrap()]);
    let y = ModuleElement::new(vec![LaurentSeries::one(&r)]);
    assert_eq!(triv.pairing(&x, &y).unwrap(), 1);
    let f = r.parse("2*pi_a^-2*pi_b^-1 + pi_a").unwrap();
    let g = r.parse("3*pi_b + 1").unwrap();
    let fg = f.mul(&g).unwrap().res().unwrap()[0];
    let x = ModuleElement::new(vec![f]);
    let y = ModuleElement::new(vec![g]);
    assert_eq!(triv.pairing(&x, &y).unwrap(), fg);
}

#[test]
fn induction_examples() {
    let r = ring(3, 2, &["a"]);
    let triv = EtalePhiGammaModule::trivial(&r, 1);
    assert_eq!(triv.induct_unramified().unwrap(), triv);
    let r2 = SeriesRing::unramified(2, 1, &["a"], &[2]).unwrap();
    let ind = EtalePhiGammaModule::trivial(&r2, 1).induct_unramified().unwrap();
    assert_eq!(ind.rank(), 2);
    // Frobenius of F_4 on the basis 1, θ: θ ↦ θ + 1
    let f = ind.frob(0);
    let got: Vec<String> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| f.get(i, j).to_string()).collect();
    assert_eq!(got, vec!["1", "1", "0", "1"]);
    ind.validate_commutation().unwrap();
    let r3 = SeriesRing::unramified(3, 1, &["a", "b"], &[2, 2]).unwrap();
    assert_eq!(EtalePhiGammaModule::trivial(&r3, 1).induct_unramified().unwrap().rank(), 4);
}

#[test]
fn sums_and_tensors() {
    let r = ring(3, 2, &["a"]);
    let triv = EtalePhiGammaModule::trivial(&r, 1);
    let t = triv.tate_twist();
    let u = scalar_module(&r, "2");
    let tensor = t.tensor(&u).unwrap();
    assert_eq!(tensor.frob(0).get(0, 0).to_string(), "2");
    assert_eq!(tensor.gamma_gen(0).matrix.get(0, 0).to_string(), "4");
    assert_eq!(triv.tensor(&u).unwrap().tate_twist(), tensor);
    let s = t.direct_sum(&u).unwrap();
    assert_eq!(s.rank(), 2);
    s.validate_commutation().unwrap();
}

#[test]
fn teichmuller_has_order_p_minus_one() {
    for p in [3u64, 5, 7] {
        let w = teichmuller(p, 3);
        let q = BigInt::from(p).pow(3 + 64);
        assert_eq!(w.modpow(&BigInt::from(p - 1), &q), BigInt::one());
        assert_ne!(w.modpow(&BigInt::from((p - 1) / 2), &q), BigInt::one());
    }
}

#[test]
fn corpus_is_valid_and_deterministic() {
    let fixtures = corpus::generate(0).unwrap();
    for f in &fixtures {
        f.module.validate_etale().unwrap();
        f.module.validate_commutation().unwrap_or_else(|e| panic!("{}: {e}", f.name));
        let doc = f.to_doc().unwrap();
        let text = doc.to_json();
        let back = schema::ModuleDoc::from_json(&text).unwrap();
        assert_eq!(back.canonicalize().unwrap().to_json(), text);
        assert_eq!(back.to_module().unwrap(), f.module);
    }
    assert_eq!(corpus::emit(0).unwrap(), corpus::emit(0).unwrap());
}

#[test]
fn toml_documents() {
    let text = r#"
p = 3
m = 2
delta = ["a"]
rank = 1
[F]
a = [["1"]]
[G.a]
matrix = [["4"]]
chi = 4
"#;
    let doc = schema::ModuleDoc::from_toml(text).unwrap();
    let m = doc.to_module().unwrap();
    assert_eq!(m, EtalePhiGammaModule::trivial(m.ring(), 1).tate_twist());
}
