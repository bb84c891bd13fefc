use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn ri(n: i64) -> Rational {
    r(n, 1)
}

fn rows(m: [[i64; 6]; 3]) -> [[Rational; 3]; 3] {
    m.map(|row| [r(row[0], row[1]), r(row[2], row[3]), r(row[4], row[5])])
}

#[test]
fn embed_examples() {
    let id: Sl2<Rational> = Sl2::identity();
    assert_eq!(embed(&id, ri(0), ri(0)).unwrap(), GroupElement3::identity());
    let t = embed(&id, ri(1), ri(2)).unwrap();
    assert_eq!(t.translation(), (ri(1), ri(2)));
    let g = Sl2::new(ri(2), ri(3), ri(1), ri(2));
    let e = embed(&g, r(1, 3), r(-1, 5)).unwrap();
    assert_eq!(e.translation(), (r(2, 3) - r(3, 5), r(1, 3) - r(2, 5)));
    assert_eq!(embed(&Sl2::new(ri(2), ri(0), ri(0), ri(1)), ri(0), ri(0)), Err(DivergenceError::NotUnimodular));
}

#[test]
fn f_examples() {
    assert_eq!(f_of(&Sl2::<Rational>::identity(), &r(7, 3)).unwrap(), r(7, 3));
    let s = 0.3f64;
    let g = Sl2::new(s.exp(), 0.0, 0.0, (-s).exp());
    assert!((f_of(&g, &1.5).unwrap() - 1.5 * (2.0 * s).exp()).abs() < 1e-12);
    let g = Sl2::new(ri(1), ri(0), ri(1), ri(1));
    assert_eq!(f_of(&g, &r(1, 2)).unwrap(), ri(1));
    assert_eq!(f_of(&g, &ri(1)), Err(DivergenceError::PoleAtT));
}

#[test]
fn conjugated_product_identity() {
    let p = conjugated_product(&Sl2::<Rational>::identity(), ri(0), ri(0), &r(5, 7)).unwrap();
    assert_eq!(p, GroupElement3::identity());
}

#[test]
fn conjugated_product_matches_hand_computation() {
    let g = Sl2::new(ri(1), ri(0), r(1, 10), ri(1));
    let (x, y, delta) = (ri(0), r(1, 100), r(1, 10));
    let t = t_k_rule(&g.c, &y, &delta).unwrap();
    assert_eq!(t, ri(1));
    let p = conjugated_product(&g, x, y, &t).unwrap();
    // f = 10/9; rows [a + c f, 0, f (c x + d y)] and [c, d - t c, c x + d y]
    let want = rows([[10, 9, 0, 1, 1, 90], [1, 10, 9, 10, 1, 100], [0, 1, 0, 1, 1, 1]]);
    assert_eq!(p.rows(), &want);
}

#[test]
fn t_rule_examples() {
    assert!((t_k_rule(&0.1, &0.01, &0.1).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(t_k_rule(&r(1, 4), &r(1, 4), &r(1, 10)).unwrap(), r(2, 5));
    assert!((t_k_rule(&0.0, &0.5, &0.1).unwrap() - 0.2).abs() < 1e-15);
    assert_eq!(t_k_rule(&0.0, &0.0, &0.1), Err(DivergenceError::BothZero));
}

#[test]
fn rescale_examples() {
    assert!(rescale_identity_check(&ri(1), &ri(3), &ri(5), &ri(2), 0.0));
    let (l, t, s) = (ri(2), ri(3), ri(5));
    let a = a_elem(l.clone());
    let lhs = a.mul(&u_elem(t)).mul(&x_elem(s)).mul(&a.inverse());
    assert_eq!(lhs, u_elem(ri(12)).mul(&x_elem(ri(10))));
    assert!(rescale_identity_check(&l, &ri(3), &ri(5), &r(-7, 3), 0.0));
    // a wrong scaling law is caught
    let bad = u_elem(ri(6)).mul(&x_elem(ri(10)));
    assert!(lhs.max_abs_diff(&bad) > 0.0);
}

#[test]
fn rescale_float_sweep() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let tau: f64 = rng.gen_range(-1.0..1.0);
        let (t, s, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        assert!(rescale_identity_check(&tau.exp(), &t, &s, &y, 1e-12));
    }
}

#[test]
fn bottom_row_checked() {
    let bad = rows([[1, 1, 0, 1, 0, 1], [0, 1, 1, 1, 0, 1], [1, 1, 0, 1, 1, 1]]);
    assert_eq!(GroupElement3::from_rows(bad), Err(DivergenceError::BadBottomRow));
}

fn small() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| r(n, d))
}

fn unimodular() -> impl Strategy<Value = Sl2<Rational>> {
    // product of a lower and an upper unipotent and a diagonal
    (small(), small(), 1i64..=4).prop_map(|(p, q, l)| {
        let l = ri(l);
        let li = Rational::from(BigInt::from(1)) / l.clone();
        let (a, b, c, d) = (ri(1), q.clone(), p.clone(), ri(1) + p * q);
        Sl2::new(a * l.clone(), b * li.clone(), c * l, d * li)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cancellation_is_exact(g in unimodular(), x in small(), y in small(), t in small()) {
        match conjugated_product(&g, x, y, &t) {
            Ok(p) => prop_assert!(p.entry(0, 1).is_zero()),
            Err(e) => prop_assert_eq!(e, DivergenceError::PoleAtT),
        }
    }

    #[test]
    fn embed_is_a_homomorphism(g1 in unimodular(), g2 in unimodular(), v1 in (small(), small()), v2 in (small(), small())) {
        let lhs = embed(&g1, v1.0.clone(), v1.1.clone()).unwrap().mul(&embed(&g2, v2.0.clone(), v2.1.clone()).unwrap());
        // (g1, v1)(g2, v2) = (g1 g2, g2^-1 v1 + v2)
        let g = Sl2::new(
            g1.a.clone() * g2.a.clone() + g1.b.clone() * g2.c.clone(),
            g1.a.clone() * g2.b.clone() + g1.b.clone() * g2.d.clone(),
            g1.c.clone() * g2.a.clone() + g1.d.clone() * g2.c.clone(),
            g1.c.clone() * g2.b.clone() + g1.d.clone() * g2.d.clone(),
        );
        let wx = g2.d.clone() * v1.0.clone() - g2.b.clone() * v1.1.clone() + v2.0;
        let wy = -g2.c.clone() * v1.0 + g2.a.clone() * v1.1 + v2.1;
        prop_assert_eq!(lhs, embed(&g, wx, wy).unwrap());
    }

    #[test]
    fn bottom_row_preserved(g1 in unimodular(), g2 in unimodular(), v in (small(), small())) {
        let a = embed(&g1, v.0.clone(), v.1.clone()).unwrap();
        let b = embed(&g2, v.1, v.0).unwrap();
        let p = a.mul(&b).mul(&a.inverse());
        prop_assert_eq!(&p.rows()[2], &[ri(0), ri(0), ri(1)]);
        prop_assert_eq!(a.mul(&a.inverse()), GroupElement3::identity());
    }

    #[test]
    fn t_times_dominant_is_delta(c in small(), y in small(), dn in 1i64..10) {
        prop_assume!(!c.is_zero() && !y.is_zero());
        let delta = r(dn, 10);
        let t = t_k_rule(&c, &y, &delta).unwrap();
        let dominant = if y.abs() <= c.abs() { c } else { y };
        prop_assert_eq!((t * dominant).abs(), delta);
    }
}

#[test]
fn case_a_limit() {
    let seq = DivergenceSequence::case_a(0.1).unwrap();
    let rep = limit_region_check(&seq, 1_000_000, 1e-3).unwrap();
    assert_eq!(rep.case, Case::A);
    assert!(rep.pass, "{rep:?}");
    // a^{-log(1 - delta)}, x-part 0
    assert!((rep.accumulation_point.0 + (0.9f64).ln()).abs() < 1e-9);
    assert!(rep.accumulation_point.1.abs() < 1e-5);
}

#[test]
fn case_b_limit() {
    let seq = DivergenceSequence::case_b(0.1).unwrap();
    let rep = limit_region_check(&seq, 1_000_000, 1e-3).unwrap();
    assert_eq!(rep.case, Case::B);
    assert!(rep.pass, "{rep:?}");
    let (s, x) = rep.accumulation_point;
    assert!(s >= -(1.1f64).ln() && s <= -(0.9f64).ln());
    assert!(x.abs() >= 0.1 / 1.1 && x.abs() <= 0.1 / 0.9);
}

#[test]
fn undetermined_case() {
    let seq = DivergenceSequence::from_fn("flat", 0.1, |_| (Sl2::identity(), 0.0, 0.0)).unwrap();
    assert!(matches!(limit_region_check(&seq, 100, 1e-3), Err(DivergenceError::CaseUndetermined(_))));
    let alternating = DivergenceSequence::from_fn("alt", 0.1, |k| {
        let k = k as f64;
        let c = if k as u64 % 2 == 0 { 1.0 / k } else { 1.0 / (k * k) };
        (Sl2::new(1.0, 0.0, c, 1.0), 0.0, k.powf(-1.5))
    })
    .unwrap();
    assert!(matches!(limit_region_check(&alternating, 1000, 1e-3), Err(DivergenceError::CaseUndetermined(_))));
}

#[test]
fn custom_families_land_in_region() {
    for seed in 0..6 {
        let seq = DivergenceSequence::custom(seed, 0.2).unwrap();
        let rep = limit_region_check(&seq, 200_000, 1e-3).unwrap();
        assert!(rep.pass, "seed {seed}: {rep:?}");
    }
}

#[test]
fn region_distance() {
    let a = LimitRegion { case: Case::A, delta: 0.1 };
    assert_eq!(a.distance(-(0.9f64).ln(), 0.05), 0.0);
    assert!(a.distance(0.0, 0.0) > 0.09);
    let b = LimitRegion { case: Case::B, delta: 0.1 };
    assert_eq!(b.distance(0.0, 0.1), 0.0);
    assert!((b.distance(0.0, 0.0) - 0.1 / 1.1).abs() < 1e-15);
}
