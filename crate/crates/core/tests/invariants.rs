//! Property tests for algebraic invariants.

use num_bigint::BigInt;
use phigamma::complexes::TruncatedComplex;
use phigamma::finite_level::{functor_d, koszul_oracle, phi_cohomology, roundtrip_check, FiniteBase, GaloisRepFin};
use phigamma::linalg::{subquotient_profile, Mat, SparseMat};
use phigamma::series::{Exps, LaurentSeries, SeriesRing};
use proptest::prelude::*;
use std::sync::Arc;

/// (p, m) pairs exercised by the series properties.
const PARAMS: [(u64, u32); 5] = [(2, 1), (2, 3), (3, 2), (5, 1), (5, 2)];

fn ring(idx: usize) -> Arc<SeriesRing> {
    let (p, m) = PARAMS[idx % PARAMS.len()];
    SeriesRing::integral(p, m, &["a", "b"]).unwrap()
}

fn poly(r: &Arc<SeriesRing>, terms: &[(i64, i64, u64)]) -> LaurentSeries {
    let q = r.zpm().modulus();
    LaurentSeries::from_terms(
        r,
        terms
            .iter()
            .map(|&(a, b, c)| (Exps::from_slice(&[a, b]), r.coeffs().from_int(c % q))),
    )
}

fn terms() -> impl Strategy<Value = Vec<(i64, i64, u64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, 0u64..1000), 0..5)
}

fn unit_character() -> impl Strategy<Value = u64> {
    (1u64..30).prop_map(|k| 2 * k + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_commutative_and_distributive(i in 0usize..5, f in terms(), g in terms(), h in terms()) {
        let r = ring(i);
        let (f, g, h) = (poly(&r, &f), poly(&r, &g), poly(&r, &h));
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        let lhs = f.add(&g).unwrap().mul(&h).unwrap();
        let rhs = f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn phi_is_a_ring_map_with_left_inverse_psi(i in 0usize..5, a in 0usize..2, f in terms(), g in terms()) {
        let r = ring(i);
        let (f, g) = (poly(&r, &f), poly(&r, &g));
        // Support bounds may differ; coefficients and exactness may not.
        let (x, y) = (f.mul(&g).unwrap().phi(a), f.phi(a).mul(&g.phi(a)).unwrap());
        prop_assert!(x.is_exact() && y.is_exact());
        prop_assert_eq!(x.terms(), y.terms());
        let back = f.phi(a).psi(a).unwrap();
        prop_assert!(back.is_exact());
        prop_assert_eq!(back.terms(), f.terms());
    }

    #[test]
    fn gamma_composes_multiplicatively(i in 0usize..5, a in 0usize..2, f in terms(), c in unit_character(), d in unit_character()) {
        let r = ring(i);
        let p = r.p();
        prop_assume!(c % p != 0 && d % p != 0);
        let f = poly(&r, &f);
        let (c, d) = (BigInt::from(c), BigInt::from(d));
        let twice = f.gamma(a, &d).unwrap().gamma(a, &c).unwrap();
        let once = f.gamma(a, &(&c * &d)).unwrap();
        prop_assert!(twice.agrees_with(&once));
    }

    #[test]
    fn text_round_trips(i in 0usize..5, f in terms()) {
        let r = ring(i);
        let f = poly(&r, &f);
        prop_assert_eq!(r.parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn elementary_divisors_are_invariant(
        a in prop::collection::vec(-40i64..40, 12),
        u in prop::collection::vec(-40i64..40, 9),
        v in prop::collection::vec(-40i64..40, 16),
    ) {
        let z = phigamma::coeff::Zpm::new(3, 3).unwrap();
        let rows = |x: &[i64], c: usize| -> Vec<Vec<i64>> { x.chunks(c).map(<[i64]>::to_vec).collect() };
        let a = Mat::from_rows(z, &rows(&a, 4));
        let u = Mat::from_rows(z, &rows(&u, 3));
        let v = Mat::from_rows(z, &rows(&v, 4));
        prop_assume!(u.is_invertible() && v.is_invertible());
        prop_assert_eq!(u.mul(&a).mul(&v).elementary_divisors(), a.elementary_divisors());
        let k = a.kernel();
        prop_assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn koszul_complexes_of_commuting_matrices(entries in prop::collection::vec(0i64..9, 4), e1 in 0u64..5, e2 in 0u64..5) {
        let z = phigamma::coeff::Zpm::new(3, 2).unwrap();
        let a = Mat::from_rows(z, &[entries[..2].to_vec(), entries[2..].to_vec()]);
        let ops = [a.pow(e1), a.pow(e2)];
        let c = TruncatedComplex::koszul(z, 2, &ops).unwrap();
        prop_assert!(c.d_squared_failure().is_none());
        // Euler characteristic of a finite complex of finite modules is 0.
        let lengths = c.cohomology(None).unwrap().lengths();
        prop_assert_eq!(lengths[0] + lengths[2], lengths[1]);
    }

    #[test]
    fn rank_one_representations_round_trip(p_idx in 0usize..2, k1 in 0u64..6, k2 in 0u64..6, f2 in 1usize..3) {
        let p = [2u64, 3][p_idx];
        let base = Arc::new(FiniteBase::new(p, 2, &["a", "b"], &[1, f2]).unwrap());
        let u = if p == 2 { 3 } else { 2 };
        let z = base.zpm();
        let rho = [k1, k2].iter().map(|&k| Mat::from_rows(z, &[vec![z.pow(u, k) as i64]])).collect();
        let v = GaloisRepFin::new(base, rho).unwrap();
        roundtrip_check(&v).unwrap();
        let d = functor_d(&v).unwrap();
        prop_assert!(phi_cohomology(&d).unwrap().same_groups(&koszul_oracle(&v).unwrap()));
    }

    #[test]
    fn sparse_kernel_agrees_with_dense(
        rows in 1usize..9,
        cols in 1usize..9,
        entries in prop::collection::vec((0usize..81, 0i64..27), 0..30),
    ) {
        let z = phigamma::coeff::Zpm::new(3, 3).unwrap();
        let mut a = Mat::zeros(z, rows, cols);
        for (pos, v) in entries {
            a.set((pos / 9) % rows, pos % cols, v as u64);
        }
        let k = SparseMat::from_dense(&a).kernel();
        prop_assert!(a.mul(&k).is_zero());
        let none = Mat::zeros(z, cols, 0);
        prop_assert_eq!(subquotient_profile(&k, &none).unwrap(), subquotient_profile(&a.kernel(), &none).unwrap());
    }
}
