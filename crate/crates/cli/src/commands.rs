use crate::input::{self, Input};
use crate::{Cli, Command, Format};
use num_rational::BigRational;
use phigamma::complexes::series::{cohomology_in_window, h0_exact, Window};
use phigamma::complexes::{CohomologyProfile, ComplexKind};
use phigamma::error::{Error, Result};
use phigamma::finite_level::{self as fl, FiniteDoc, FiniteObject};
use phigamma::phigamma::{corpus, EtalePhiGammaModule, ModuleElement};
use phigamma::series::{LaurentSeries, SeriesRing};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::sync::Arc;

pub const DEFAULT_LO: i64 = -16;
pub const DEFAULT_HI: i64 = 16;

pub struct Report {
    pub status: u8,
    pub json: Value,
    pub text: String,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { status: 0, json, text }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Text => self.text.clone(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Validate { input } => validate(input::load(input)?),
        Command::Cohomology {
            input,
            window,
            degree,
            experimental,
            complex,
        } => cohomology(input::load(input)?, window.as_deref(), *degree, *experimental, complex),
        Command::Pairing { input, x, y } => pairing(input::load(input)?, x, y),
        Command::Descend { input, algebra } => descend(input::load(input)?, *algebra),
        Command::Norms {
            series,
            p,
            m,
            delta,
            r,
            perfect,
        } => norms(series, *p, *m, delta, r, *perfect),
        Command::Selftest { seed } => Ok(crate_selftest(*seed)),
        Command::Corpus { seed, out } => corpus_cmd(*seed, out.as_deref()),
    }
}

fn validate(input: Input) -> Result<Report> {
    match input {
        Input::Series(m) => {
            m.validate_etale()?;
            let rep = m.validate_commutation()?;
            let mut text = format!("valid: rank {} over {} variables\n", m.rank(), m.nvars());
            for r in &rep.relations {
                let _ = writeln!(text, "  ok {r}");
            }
            Ok(Report::ok(json!({"valid": true, "relations": rep.relations}), text))
        }
        Input::Finite(FiniteObject::Rep(v)) => {
            let orders = v.orders()?;
            Ok(Report::ok(
                json!({"valid": true, "kind": "rep", "orders": orders}),
                format!("valid representation of rank {}, generator orders {orders:?}\n", v.rank()),
            ))
        }
        Input::Finite(FiniteObject::Phi(d)) => {
            d.validate_etale()?;
            d.validate_commutation()?;
            Ok(Report::ok(
                json!({"valid": true, "kind": "phi"}),
                format!("valid étale φ-module of rank {}\n", d.rank),
            ))
        }
    }
}

fn window_for(m: &EtalePhiGammaModule, spec: Option<&str>) -> Result<Window> {
    let n = m.nvars();
    let default = Window::uniform(n, DEFAULT_LO, DEFAULT_HI)?;
    let Some(s) = spec else {
        return Ok(default);
    };
    let w = Window::parse(s, n)?;
    let encloses = w.lo.iter().all(|&l| l <= DEFAULT_LO) && w.hi.iter().all(|&h| h >= DEFAULT_HI);
    if !encloses {
        return Err(Error::Schema(format!(
            "window {s:?} must contain the default {DEFAULT_LO}:{DEFAULT_HI}"
        )));
    }
    Ok(w)
}

fn profile_report(prof: &CohomologyProfile, degree: Option<usize>, extra: Value) -> Report {
    let mut prof = prof.clone();
    if let Some(k) = degree {
        prof.degrees.retain(|d| d.degree == k);
    }
    let mut json = json!({"m": prof.m, "degrees": prof.degrees});
    if let (Value::Object(o), Value::Object(e)) = (&mut json, extra) {
        o.extend(e);
    }
    let status = if prof.degrees.iter().all(|d| d.stabilized || d.experimental) { 0 } else { 2 };
    Report {
        status,
        json,
        text: prof.to_string(),
    }
}

fn cohomology(input: Input, window: Option<&str>, degree: Option<usize>, experimental: bool, complex: &str) -> Result<Report> {
    match input {
        Input::Series(m) => {
            let kind = ComplexKind::parse(complex)?;
            let w = window_for(&m, window)?;
            let top = kind.top_degree(m.nvars());
            if degree.is_some_and(|k| k > top) {
                return Err(Error::InvalidInput(format!("the complex has degrees 0..={top}")));
            }
            let extra = json!({"complex": complex, "window": {"lo": w.lo.to_vec(), "hi": w.hi.to_vec()}});
            if experimental {
                let prof = cohomology_in_window(&m, kind, &w, degree.unwrap_or(top))?;
                Ok(profile_report(&prof, degree, extra))
            } else {
                if degree.unwrap_or(0) != 0 {
                    return Err(Error::InvalidInput(
                        "degrees ≥ 1 of series-level modules are only available with --experimental".into(),
                    ));
                }
                let prof = h0_exact(&m, kind, &w)?;
                Ok(profile_report(&prof, Some(0), extra))
            }
        }
        Input::Finite(obj) => {
            let (prof, source) = match &obj {
                FiniteObject::Rep(v) => (fl::koszul_oracle(v)?, "koszul"),
                FiniteObject::Phi(d) => {
                    d.validate_etale()?;
                    (fl::phi_cohomology(d)?, "phi")
                }
            };
            Ok(profile_report(&prof, degree, json!({"complex": source})))
        }
    }
}

fn element(ring: &Arc<SeriesRing>, rank: usize, s: &str) -> Result<ModuleElement> {
    let coords: Vec<LaurentSeries> = s.split(';').map(|t| ring.parse(t.trim())).collect::<Result<_>>()?;
    if coords.len() != rank {
        return Err(Error::InvalidInput(format!("expected {rank} coordinates, got {}", coords.len())));
    }
    Ok(ModuleElement::new(coords))
}

fn pairing(input: Input, x: &str, y: &str) -> Result<Report> {
    let Input::Series(m) = input else {
        return Err(Error::ModeMismatch("pairing needs a series-level module".into()));
    };
    let x = element(m.ring(), m.rank(), x)?;
    let y = element(m.ring(), m.rank(), y)?;
    let dual = m.dual_twist()?;
    let value = m.pairing(&x, &y)?;
    let mut text = format!("{{x, y}} = {value}\n");
    let mut adj = Vec::new();
    let mut status = 0;
    for a in 0..m.nvars() {
        let lhs = m.pairing(&m.apply_phi(a, &x)?, &y)?;
        let rhs = m.pairing(&x, &dual.apply_psi(a, &y)?)?;
        let label = &m.ring().labels()[a];
        let _ = writeln!(text, "{{phi_{label} x, y}} = {lhs}, {{x, psi_{label} y}} = {rhs}");
        if lhs != rhs {
            status = 1;
        }
        adj.push(json!({"variable": label, "phi_x_y": lhs, "x_psi_y": rhs}));
    }
    Ok(Report {
        status,
        json: json!({"pairing": value, "adjointness": adj}),
        text,
    })
}

fn descend(input: Input, algebra: bool) -> Result<Report> {
    let Input::Finite(obj) = input else {
        return Err(Error::ModeMismatch("descend needs a finite-level object".into()));
    };
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    let d = match &obj {
        FiniteObject::Rep(v) => {
            let d = fl::functor_d(v)?;
            let iso = fl::roundtrip_check(v)?;
            let doc = FiniteDoc::from_object(&FiniteObject::Phi(d.clone()), None, vec!["functor_d".into()]);
            let _ = write!(text, "D(V):\n{}", doc.to_json());
            let _ = writeln!(text, "round trip V(D(V)) ≅ V verified");
            json.insert("result".into(), serde_json::to_value(&doc).expect("serializable"));
            let z = iso.zpm();
            let rows: Vec<Vec<i64>> = (0..iso.rows()).map(|i| (0..iso.cols()).map(|j| z.to_signed(iso.get(i, j))).collect()).collect();
            json.insert("roundtrip".into(), json!(rows));
            let lhs = fl::phi_cohomology(&d)?;
            let rhs = fl::koszul_oracle(v)?;
            let agree = lhs.same_groups(&rhs);
            let _ = writeln!(text, "φ-cohomology of D(V) matches Koszul oracle: {agree}\n{lhs}");
            json.insert("oracle_agrees".into(), json!(agree));
            json.insert("phi_cohomology".into(), json!(lhs.degrees));
            if !agree {
                return Ok(Report {
                    status: 1,
                    json: Value::Object(json),
                    text,
                });
            }
            d
        }
        FiniteObject::Phi(d) => {
            d.validate_etale()?;
            d.validate_commutation()?;
            let v = fl::functor_v(d)?;
            fl::roundtrip_check_d(d)?;
            let doc = FiniteDoc::from_object(&FiniteObject::Rep(v), None, vec!["functor_v".into()]);
            let _ = write!(text, "V(D):\n{}", doc.to_json());
            let _ = writeln!(text, "round trip D(V(D)) ≅ D verified");
            json.insert("result".into(), serde_json::to_value(&doc).expect("serializable"));
            d.clone()
        }
    };
    if algebra {
        let s = fl::representing_algebra(&d)?;
        let _ = writeln!(
            text,
            "representing algebra: {} basis monomials, points per component {:?}, Jacobian full rank {:?}",
            s.monomials.len(),
            s.points,
            s.jacobian_full_rank
        );
        json.insert("algebra".into(), serde_json::to_value(&s).expect("serializable"));
    }
    Ok(Report::ok(Value::Object(json), text))
}

fn norms(series: &str, p: u64, m: u32, delta: &str, r: &str, perfect: Option<u32>) -> Result<Report> {
    let labels: Vec<&str> = delta.split(',').map(str::trim).collect();
    let ring = match perfect {
        Some(k) => SeriesRing::perfect(p, k, &labels)?,
        None => SeriesRing::integral(p, m, &labels)?,
    };
    let f = ring.parse(series)?;
    let rad: BigRational = r.parse().map_err(|_| Error::Parse(format!("{r:?} is not a rational number")))?;
    let mut text = format!("−log_p of norms of {f} at r = {rad}\n");
    let mut per_var = Vec::new();
    for (j, l) in labels.iter().enumerate() {
        let v = f.gauss_norm_jr(j, &rad);
        let _ = writeln!(text, "  |f|_{{{l},r}}: {v}");
        per_var.push(json!({"variable": l, "gauss": v.to_string()}));
    }
    let total = f.gauss_norm_r(&rad);
    let bound = f.norm_exponent_bound();
    let _ = writeln!(text, "  |f|_r: {total}\n  C(f): {bound}");
    let mut json = json!({"r": rad.to_string(), "per_variable": per_var, "gauss_r": total.to_string(), "bound": bound.to_string()});
    if perfect.is_some() {
        let pn = f.perfectoid_norm()?;
        let _ = writeln!(text, "  perfectoid |f|': {pn}");
        json["perfectoid"] = json!(pn.to_string());
    }
    Ok(Report::ok(json, text))
}

fn crate_selftest(seed: u64) -> Report {
    let results = crate::commands::selftest::run(seed);
    let mut text = String::new();
    let mut failed = 0;
    for (name, res) in &results {
        match res {
            Ok(d) => {
                let _ = writeln!(text, "PASS {name}: {d}");
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(text, "FAIL {name}: {e}");
            }
        }
    }
    let json = json!(results
        .iter()
        .map(|(n, r)| json!({"check": n, "pass": r.is_ok(), "detail": r.clone().unwrap_or_else(|e| e)}))
        .collect::<Vec<_>>());
    Report {
        status: if failed == 0 { 0 } else { 1 },
        json,
        text,
    }
}

fn corpus_cmd(seed: u64, out: Option<&std::path::Path>) -> Result<Report> {
    let mut files = corpus::emit(seed)?;
    files.extend(fl::corpus::emit(seed)?.into_iter().map(|(n, s)| (format!("finite/{n}"), s)));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir.join("finite")).map_err(|e| Error::InvalidInput(e.to_string()))?;
        for (name, body) in &files {
            std::fs::write(dir.join(name), body).map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
    }
    let mut text = String::new();
    for (name, body) in &files {
        let _ = writeln!(text, "{name} ({} bytes)", body.len());
    }
    let json = json!(files.iter().map(|(n, b)| json!({"file": n, "bytes": b.len()})).collect::<Vec<_>>());
    Ok(Report::ok(json, text))
}

pub mod selftest {
    //! A fast subset of the acceptance battery.

    use super::*;

    type Check = (&'static str, std::result::Result<String, String>);

    fn wrap(name: &'static str, f: impl FnOnce() -> Result<String>) -> Check {
        (name, f().map_err(|e| e.to_string()))
    }

    fn fail(msg: impl Into<String>) -> Error {
        Error::InvalidInput(msg.into())
    }

    pub fn run(seed: u64) -> Vec<Check> {
        vec![
            wrap("corpus fixtures validate", || {
                let fx = corpus::generate(seed)?;
                for f in &fx {
                    f.module.validate_etale()?;
                    f.module.validate_commutation()?;
                }
                Ok(format!("{} fixtures", fx.len()))
            }),
            wrap("corpus emission is deterministic and canonical", || {
                let a = corpus::emit(seed)?;
                if a != corpus::emit(seed)? {
                    return Err(fail("two emissions differ"));
                }
                for (name, body) in &a {
                    let doc = phigamma::phigamma::schema::ModuleDoc::from_json(body)?;
                    if &doc.to_json() != body {
                        return Err(fail(format!("{name} does not round-trip")));
                    }
                }
                Ok(format!("{} files", a.len()))
            }),
            wrap("h0 of trivial and twisted rank-1 modules", || {
                let r = SeriesRing::integral(3, 2, &["a", "b"])?;
                let t = EtalePhiGammaModule::trivial(&r, 1).with_trivial_torsion()?;
                let w = Window::uniform(2, -4, 4)?;
                let h = h0_exact(&t, ComplexKind::Herr, &w)?;
                let h_tw = h0_exact(&t.tate_twist(), ComplexKind::Herr, &w)?;
                if h.degrees[0].free_rank != 1 || !h.degrees[0].divisors.is_empty() || !h_tw.degrees[0].is_zero() {
                    return Err(fail("unexpected degree-0 groups"));
                }
                Ok("Z/9 and 0".into())
            }),
            wrap("finite-level round trips", || {
                let fx = fl::corpus::generate(seed)?;
                let mut n = 0;
                for f in &fx {
                    if let FiniteObject::Rep(v) = &f.object {
                        fl::roundtrip_check(v)?;
                        let d = fl::functor_d(v)?;
                        if !fl::phi_cohomology(&d)?.same_groups(&fl::koszul_oracle(v)?) {
                            return Err(fail(format!("{}: oracle mismatch", f.name)));
                        }
                        n += 1;
                    }
                }
                Ok(format!("{n} representations"))
            }),
            wrap("Koszul oracle of the trivial representation", || {
                let b = Arc::new(fl::FiniteBase::new(2, 1, &["a", "b"], &[1, 1])?);
                let prof = fl::koszul_oracle(&fl::GaloisRepFin::trivial(b, 1))?;
                if prof.free_ranks() != vec![1, 2, 1] {
                    return Err(fail(format!("{:?}", prof.free_ranks())));
                }
                Ok("(1, 2, 1)".into())
            }),
        ]
    }
}
