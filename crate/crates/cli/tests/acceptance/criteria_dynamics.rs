use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flatlab::constructions::{slit_tori, split_l_table, SplitLParams};
use flatlab::divergence::*;
use flatlab::exactfield::Rational;
use flatlab::saddles::{self, DegenerationKind, DEFAULT_MAX_STEPS};
use flatlab::surface::rel::RelOutcome;
use flatlab::Vec2;

use super::{ensure, k2, rational, Status};

fn small(rng: &mut ChaCha8Rng) -> Rational {
    rational(rng.gen_range(-30..=30), rng.gen_range(1..=9))
}

/// Exact unimodular matrix: lower and upper unipotents times a diagonal.
fn unimodular(rng: &mut ChaCha8Rng) -> Sl2<Rational> {
    let (p, q) = (small(rng), small(rng));
    let l = rational(rng.gen_range(1..=5), rng.gen_range(1..=5));
    let li = Rational::from_integer(1.into()) / l.clone();
    let one = Rational::from_integer(1.into());
    Sl2::new(l.clone(), q.clone() * li.clone(), p.clone() * l, (one + p * q) * li)
}

pub fn cancellation() -> Result<(Status, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut exact, mut poles) = (0, 0);
    while exact < 1000 {
        let g = unimodular(&mut rng);
        let (x, y, t) = (small(&mut rng), small(&mut rng), small(&mut rng));
        match conjugated_product(&g, x, y, &t) {
            Ok(p) => {
                ensure(p.entry(0, 1).is_zero(), || format!("nonzero (0,1) entry for {g:?}"))?;
                exact += 1;
            }
            Err(DivergenceError::PoleAtT) => poles += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    let mut worst: f64 = 0.0;
    let mut floats = 0;
    while floats < 10_000 {
        let a: f64 = rng.gen_range(0.5..2.0);
        let (b, c): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g = Sl2::new(a, b, c, (1.0 + b * c) / a);
        let t: f64 = rng.gen_range(-1.0..1.0);
        if (g.d - t * c).abs() < 0.1 {
            continue;
        }
        let p = conjugated_product(&g, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), &t).map_err(|e| e.to_string())?;
        worst = worst.max(p.entry(0, 1).abs());
        floats += 1;
    }
    ensure(worst < 1e-12, || format!("floating (0,1) entry up to {worst:e}"))?;
    Ok((
        Status::Pass,
        format!("{exact} exact cases identically zero ({poles} pole draws skipped); {floats} floating cases, max |entry| = {worst:.1e}"),
    ))
}

pub fn transverse_limits() -> Result<(Status, String), String> {
    let mut worst = [0.0f64; 2];
    for i in 0..100u64 {
        // even seeds give |y_k| <= |c_k| (case A), odd seeds the reverse
        for (slot, seed, want) in [(0, 2 * i, Case::A), (1, 2 * i + 1, Case::B)] {
            let seq = DivergenceSequence::custom(seed, 0.1).map_err(|e| e.to_string())?;
            let rep = limit_region_check(&seq, 1_000_000, 1e-3).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(rep.case == want, || format!("seed {seed}: case {:?}", rep.case))?;
            ensure(rep.pass && rep.distance_to_region < 1e-3, || format!("seed {seed}: {rep:?}"))?;
            worst[slot] = worst[slot].max(rep.distance_to_region);
        }
    }
    Ok((
        Status::Pass,
        format!(
            "100 case-A and 100 case-B sequences at K = 1e6, delta = 0.1; max distance to region {:.1e} (A), {:.1e} (B)",
            worst[0], worst[1]
        ),
    ))
}

pub fn rescaling() -> Result<(Status, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let l = rational(rng.gen_range(1..=40), rng.gen_range(1..=40));
        let (t, s, r) = (small(&mut rng), small(&mut rng), small(&mut rng));
        ensure(rescale_identity_check(&l, &t, &s, &r, 0.0), || format!("exact failure at lambda = {l}"))?;
    }
    for _ in 0..1000 {
        let tau: f64 = rng.gen_range(-1.5..1.5);
        let (t, s, r): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        ensure(rescale_identity_check(&tau.exp(), &t, &s, &r, 1e-12), || format!("floating failure at tau = {tau}"))?;
    }
    // negative control: the wrong exponent on the u part is detected
    let l = rational(2, 1);
    let a = a_elem(l.clone());
    let lhs = a.mul(&u_elem(rational(3, 1))).mul(&x_elem(rational(5, 1))).mul(&a.inverse());
    let wrong = u_elem(rational(6, 1)).mul(&x_elem(rational(10, 1)));
    ensure(lhs.max_abs_diff(&wrong) > 0.0, || "negative control not detected".into())?;
    Ok((Status::Pass, "100 exact rational e^tau cases, 1000 floating cases within 1e-12, negative control caught".into()))
}

pub fn degenerations() -> Result<(Status, String), String> {
    let k = k2();
    let mut lines = Vec::new();
    for (n, d) in [(1, 3), (1, 4), (2, 5)] {
        let ell = k.rat(n, d);
        let s = slit_tori(&ell).map_err(|e| e.to_string())?;
        let iv = saddles::horizontal_interval(&s, &k.int(4), DEFAULT_MAX_STEPS).map_err(|e| e.to_string())?;
        ensure(iv.right.value() == Some(&ell), || format!("slit {ell}: right endpoint {:?}", iv.right))?;
        let rep = saddles::classify_degeneration(&s, &ell, DEFAULT_MAX_STEPS).map_err(|e| e.to_string())?;
        ensure(
            rep.kind == DegenerationKind::TwoToriWedge
                && rep.components.len() == 2
                && rep.components.iter().all(|c| c.genus() == 1),
            || format!("slit {ell}: {:?}", rep.kind),
        )?;
        // just inside the endpoint the surface is still in H(1,1)
        let inside = &ell - &k.rat(1, 1000);
        let p = s.singular_ids()[0];
        match s.rel_translate(&Vec2::new(inside.clone(), k.zero()), p).map_err(|e| e.to_string())? {
            RelOutcome::Surface(t) => ensure(t.stratum().is_h11(), || "left H(1,1) early".into())?,
            RelOutcome::Degenerate(_) => return Err(format!("slit {ell}: degenerate before the endpoint")),
        }
        lines.push(format!("wedge at x = {ell}"));
    }
    let s = split_l_table(&SplitLParams {
        w1: k.int(1),
        h1: k.int(1),
        w2: k.int(3),
        h2: k.int(1),
        l: k.rat(1, 2),
        t1: k.int(0),
        t2: k.int(0),
    })
    .map_err(|e| e.to_string())?;
    let iv = saddles::horizontal_interval(&s, &k.int(8), DEFAULT_MAX_STEPS).map_err(|e| e.to_string())?;
    let mut found = None;
    for x in [iv.left.value(), iv.right.value()].into_iter().flatten() {
        let rep = saddles::classify_degeneration(&s, x, DEFAULT_MAX_STEPS).map_err(|e| e.to_string())?;
        if rep.kind == DegenerationKind::H2Surface {
            found = Some((x.clone(), rep));
        }
    }
    let (x, rep) = found.ok_or("no endpoint of the L-table interval collapses to H(2)")?;
    let c = &rep.components[0];
    ensure(rep.components.len() == 1 && c.stratum().is_h2() && c.area() == s.area(), || {
        format!("L-table limit: {} with area {} vs {}", c.stratum(), c.area(), s.area())
    })?;
    lines.push(format!("L-table collapses to H(2) at x = {x} with area {} preserved", s.area()));
    Ok((Status::Pass, lines.join("; ")))
}
