use super::*;
use num_rational::BigRational;

fn ring(p: u64, m: u32, labels: &[&str]) -> Arc<SeriesRing> {
    SeriesRing::integral(p, m, labels).unwrap()
}

fn exps(v: &[i64]) -> Exps {
    SmallVec::from_slice(v)
}

#[test]
fn parse_and_emit_round_trip() {
    let r = ring(3, 2, &["a", "b"]);
    let s = r.parse("3*pi_a^-2*pi_b + 7 - 2*pi_b^3").unwrap();
    assert_eq!(s.to_string(), "3*pi_a^-2*pi_b + 7 + 7*pi_b^3");
    assert_eq!(r.parse(&s.to_string()).unwrap(), s);
    assert_eq!(r.parse("pi_a - pi_a").unwrap().to_string(), "0");
    assert!(r.parse("pi_c").is_err());
    assert!(r.parse("pi_a^(1/3)").is_err());
}

#[test]
fn generator_syntax() {
    let r = SeriesRing::unramified(2, 2, &["a"], &[2]).unwrap();
    let s = r.parse("2*t*pi_a + t^2").unwrap();
    // t^2 = -t - 1 with the default polynomial x^2 + x + 1
    assert_eq!(s.to_string(), "3 + 3*t + 2*t*pi_a");
    let r2 = SeriesRing::unramified(2, 1, &["a", "b"], &[2, 2]).unwrap();
    let s2 = r2.parse("t_a*t_b*pi_b").unwrap();
    assert_eq!(s2.to_string(), "t_a*t_b*pi_b");
}

#[test]
fn perfect_syntax() {
    let r = SeriesRing::perfect(3, 2, &["a"]).unwrap();
    let s = r.parse("2*t_x").err();
    assert!(s.is_some());
    let s = r.parse("pi_a^(1/3) + pi_a^(-2/9) + pi_a^(3/3)").unwrap();
    assert_eq!(s.to_string(), "pi_a^(-2/9) + pi_a^(1/3) + pi_a");
}

#[test]
fn multiplication_examples() {
    let r = ring(2, 1, &["x"]);
    let f = r.parse("1 + pi_x").unwrap();
    let g = LaurentSeries::truncated(&r, r.parse("1 - pi_x + pi_x^2 - pi_x^3").unwrap().terms().clone(), exps(&[0]), exps(&[3])).unwrap();
    let prod = f.mul(&g).unwrap();
    assert_eq!(prod.to_string(), "1");
    assert_eq!(prod.hi().as_slice(), &[3]);
    let r2 = ring(5, 1, &["a", "b"]);
    let a = r2.parse("pi_a^-1").unwrap();
    assert_eq!(a.mul(&r2.parse("pi_a").unwrap()).unwrap().to_string(), "1");
}

#[test]
fn phi_examples() {
    let r = ring(2, 3, &["a", "b"]);
    assert_eq!(r.parse("pi_a").unwrap().phi(0).to_string(), "2*pi_a + pi_a^2");
    assert_eq!(LaurentSeries::one(&r).phi(0).to_string(), "1");
    assert_eq!(r.parse("pi_b").unwrap().phi(0).to_string(), "pi_b");
    // φ is multiplicative on a negative power
    let inv = r.parse("pi_a^-1").unwrap().phi(0);
    let f = r.parse("pi_a").unwrap().phi(0);
    assert_eq!(inv.mul(&f).unwrap().to_string(), "1");
}

#[test]
fn gamma_examples() {
    let r = ring(2, 1, &["a", "b"]);
    let x = r.parse("pi_a").unwrap();
    assert_eq!(x.gamma(0, &BigInt::from(3)).unwrap().to_string(), "pi_a + pi_a^2 + pi_a^3");
    assert_eq!(x.gamma(0, &BigInt::from(1)).unwrap(), x);
    assert_eq!(r.parse("pi_b").unwrap().gamma(0, &BigInt::from(3)).unwrap().to_string(), "pi_b");
    assert!(x.gamma(0, &BigInt::from(2)).is_err());
}

#[test]
fn psi_examples() {
    let r = ring(2, 3, &["a"]);
    assert_eq!(LaurentSeries::one(&r).psi(0).unwrap().to_string(), "1");
    assert!(r.parse("1 + pi_a").unwrap().psi(0).unwrap().is_zero());
    assert_eq!(r.parse("1 + 2*pi_a + pi_a^2").unwrap().psi(0).unwrap().to_string(), "1 + pi_a");
    assert_eq!(r.parse("pi_a").unwrap().psi(0).unwrap().to_string(), "7");
    let r3 = ring(3, 2, &["a"]);
    for i in 1..3 {
        let s = r3.parse("1 + pi_a").unwrap().pow(i).unwrap();
        assert!(s.psi(0).unwrap().is_zero());
    }
}

#[test]
fn residue_examples() {
    let r = ring(3, 2, &["a", "b"]);
    let f = r.parse("(1)").err();
    assert!(f.is_some());
    let g = r.parse("pi_a^-1*pi_b^-1 + pi_a^-1 + pi_b^-1 + 1").unwrap();
    assert_eq!(g.res().unwrap()[0], 1);
    assert_eq!(LaurentSeries::one(&r).res().unwrap()[0], 0);
    let r1 = ring(5, 1, &["x"]);
    assert_eq!(r1.parse("pi_x^-1").unwrap().res().unwrap()[0], 1);
    assert_eq!(r1.parse("pi_x^-3").unwrap().res().unwrap()[0], 1);
    assert_eq!(r1.parse("pi_x^-2").unwrap().res().unwrap()[0], 4);
    let t = LaurentSeries::zero_window(&r1, exps(&[-3]), exps(&[-2]));
    assert!(matches!(t.res(), Err(Error::InsufficientWindow(_))));
}

#[test]
fn inversion_examples() {
    let r = ring(3, 3, &["a"]);
    let f = r.parse("1 + 3*pi_a").unwrap();
    let g = f.try_invert().unwrap();
    assert!(g.is_exact());
    assert_eq!(g.to_string(), "1 + 24*pi_a + 9*pi_a^2");
    assert_eq!(f.mul(&g).unwrap().to_string(), "1");
    assert_eq!(r.parse("pi_a").unwrap().try_invert().unwrap().to_string(), "pi_a^-1");
    assert_eq!(r.parse("3").unwrap().try_invert(), Err(Error::NotAUnit));
    let r2 = ring(2, 1, &["a", "b"]);
    assert_eq!(r2.parse("pi_a + pi_b").unwrap().try_invert(), Err(Error::NotAUnit));
    let u = r2.parse("pi_a + pi_a*pi_b").unwrap();
    let ui = u.try_invert().unwrap();
    let prod = u.mul(&ui).unwrap();
    assert_eq!(prod.to_string(), "1");
}

#[test]
fn norm_examples() {
    let r = ring(3, 2, &["a", "b"]);
    let half = BigRational::new(1.into(), 2.into());
    let x = r.parse("pi_a").unwrap();
    assert_eq!(x.gauss_norm_jr(0, &half), LogNorm::Finite(BigRational::new(3.into(), 4.into())));
    assert_eq!(r.parse("3").unwrap().gauss_norm_r(&half), LogNorm::Finite(BigRational::from_integer(1.into())));
    assert_eq!(
        r.parse("pi_a^-1").unwrap().gauss_norm_jr(0, &half),
        LogNorm::Finite(BigRational::new((-3).into(), 4.into()))
    );
    assert_eq!(LaurentSeries::zero(&r).gauss_norm_r(&half), LogNorm::NegInfinite);
    let pr = SeriesRing::perfect(3, 1, &["a"]).unwrap();
    let y = pr.parse("pi_a^(1/3)").unwrap();
    assert_eq!(y.perfectoid_norm().unwrap(), LogNorm::Finite(BigRational::new(1.into(), 2.into())));
    assert_eq!(LaurentSeries::one(&pr).perfectoid_norm().unwrap(), LogNorm::Finite(BigRational::from_integer(0.into())));
    assert_eq!(LaurentSeries::zero(&pr).perfectoid_norm().unwrap(), LogNorm::NegInfinite);
    assert!(x.perfectoid_norm().is_err());
}

#[test]
fn split_examples() {
    let pr = SeriesRing::perfect(2, 1, &["a", "b"]).unwrap();
    let f = pr.parse("pi_a^(1/2) + pi_a").unwrap();
    let (i, fr) = f.split_integral().unwrap();
    assert_eq!(i.to_string(), "pi_a");
    assert_eq!(fr.to_string(), "pi_a^(1/2)");
    let g = pr.parse("pi_a^(1/2)*pi_b").unwrap();
    let (i, fr) = g.split_integral().unwrap();
    assert!(i.is_zero());
    assert_eq!(fr, g);
}

#[test]
fn residue_scales_by_inverse_character_under_gamma() {
    // γ_c multiplies dπ/(1+π) by c, so res(γ_c f) = c^{-1} res(f).
    for (p, m) in [(3u64, 2u32), (2, 3), (5, 1)] {
        let r = ring(p, m, &["a", "b"]);
        let z = r.zpm();
        for s in ["pi_a^-1*pi_b^-1", "pi_a^-2*pi_b^-1 + 2*pi_a^-1*pi_b^-1 + 5", "3*pi_a^-3*pi_b^-1 + pi_a"] {
            let f = r.parse(s).unwrap();
            let base = f.res().unwrap()[0];
            for c in [2i64, 3, 4, 5, 7, 11] {
                if c as u64 % p == 0 {
                    continue;
                }
                let got = f.gamma(0, &BigInt::from(c)).unwrap().res().unwrap()[0];
                let cinv = z.inv(z.from_i64(c)).unwrap();
                assert_eq!(got, z.mul(cinv, base), "{s}, c = {c}, p = {p}, m = {m}");
            }
        }
    }
}
