//! Acceptance suite: one line per criterion. Run with
//! `cargo test -p flatlab-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flatlab::constructions::*;
use flatlab::cylinders::{self, Direction, LmVerdict, NormalizedParams};
use flatlab::exactfield::{QuadField, QuadNum, Rational};
use flatlab::{Surface, TranslationSurface};

mod criteria_dynamics;
mod criteria_runs;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Finding,
    Skipped,
}

/// A criterion body returns a detail line, or an error for a failure.
/// `Ok((Status::Finding, ..))` marks a soft criterion that did not hold.
type Body = Box<dyn FnOnce() -> Result<(Status, String), String>>;

/// `FLATLAB_ACCEPTANCE_ONLY=1,5,9` runs a subset; skipped criteria are
/// listed but count as neither passed nor failed.
fn selected(n: u32) -> bool {
    match std::env::var("FLATLAB_ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').any(|x| x.trim() == n.to_string()),
        Err(_) => true,
    }
}

fn criterion(n: u32, title: &str, limit_s: f64, body: Body) -> Status {
    if !selected(n) {
        println!("[SKIP] criterion {n:>2}: {title}");
        return Status::Skipped;
    }
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(body));
    let secs = start.elapsed().as_secs_f64();
    let (mut status, detail) = match res {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => (Status::Fail, e),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (Status::Fail, format!("panicked: {msg}"))
        }
    };
    let mut timing = format!("{secs:.2} s, limit {limit_s} s");
    if secs > limit_s && status == Status::Pass {
        status = Status::Fail;
        timing.push_str(", OVER TIME");
    }
    let tag = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Finding => "FINDING",
        Status::Skipped => unreachable!(),
    };
    println!("[{tag}] criterion {n:>2}: {title}: {detail} ({timing})");
    status
}

pub fn k2() -> QuadField {
    QuadField::new(2).unwrap()
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The exact membership fixture: widths 1 and sqrt2, s1 = sqrt2, s2 = 1,
/// zero twists.
pub fn member_params() -> ZTableParams {
    let k = k2();
    ZTableParams {
        w1: k.int(1),
        w2: k.sqrt_d(),
        h1: k.q(-1, 2, 1, 1),
        h2: k.rat(1, 2),
        h3: k.rat(1, 2),
        t1: k.int(0),
        t2: k.int(0),
        t3: k.int(0),
    }
}

/// A second member with the same `m = 2 sqrt2`: different heights and
/// nonzero twists `tau1 = sqrt2/2`, `tau2 = 1/2`.
pub fn second_member_params() -> ZTableParams {
    let k = k2();
    ZTableParams {
        w1: k.int(1),
        w2: k.sqrt_d(),
        h1: k.q(-1, 3, 1, 1),
        h2: k.rat(2, 3),
        h3: k.rat(1, 3),
        t1: k.q(0, 1, 1, 2),
        t2: k.rat(1, 2),
        t3: k.int(0),
    }
}

pub fn horizontal_params(s: &TranslationSurface) -> Result<NormalizedParams, String> {
    let dec = cylinders::periodic_direction_decompose(s, &Direction::horizontal(s.field()), 100_000)
        .map_err(|e| e.to_string())?;
    cylinders::normalize_params(&dec).map_err(|e| e.to_string())
}

pub fn verdict(s: &TranslationSurface) -> Result<LmVerdict, String> {
    cylinders::check_lm(&horizontal_params(s)?).map_err(|e| e.to_string())
}

/// Random element `a + b sqrt d` with small numerators and denominators.
pub fn random_quad(rng: &mut ChaCha8Rng, k: QuadField, num: i64, den: i64) -> QuadNum {
    let a = k.rat(rng.gen_range(-num..=num), rng.gen_range(1..=den));
    let b = k.rat(rng.gen_range(-num..=num), rng.gen_range(1..=den));
    &a + &(&b * &k.sqrt_d())
}

/// Random positive element of `Q(sqrt2)`.
pub fn random_positive(rng: &mut ChaCha8Rng) -> QuadNum {
    let k = k2();
    let a = k.rat(rng.gen_range(1..=24), rng.gen_range(1..=8));
    let b = k.rat(rng.gen_range(0..=6), rng.gen_range(1..=8));
    &a + &(&b * &k.sqrt_d())
}

pub fn random_ztable(rng: &mut ChaCha8Rng) -> ZTableParams {
    let k = k2();
    ZTableParams {
        w1: random_positive(rng),
        w2: random_positive(rng),
        h1: random_positive(rng),
        h2: random_positive(rng),
        h3: random_positive(rng),
        t1: random_quad(rng, k, 6, 5),
        t2: random_quad(rng, k, 6, 5),
        t3: random_quad(rng, k, 6, 5),
    }
}

fn gauss_bonnet<S: flatlab::Scalar>(name: &str, s: &Surface<S>) -> Result<(), String> {
    let orders: i64 = s.cone_data().iter().map(|c| c.order() as i64).sum();
    let g = s.genus() as i64;
    ensure(orders == 2 * g - 2 && s.euler_characteristic() == 2 - 2 * g, || {
        format!("{name}: orders sum {orders}, genus {g}, euler {}", s.euler_characteristic())
    })
}

fn angles<S: flatlab::Scalar>(s: &Surface<S>) -> Vec<u32> {
    let mut a: Vec<u32> = s.cone_data().iter().map(|c| c.angle_multiple).filter(|&m| m > 1).collect();
    a.sort_unstable();
    a
}

fn strata() -> Result<(Status, String), String> {
    let oct = regular_2n_gon(4).map_err(|e| e.to_string())?;
    let dec = regular_2n_gon(5).map_err(|e| e.to_string())?;
    ensure(oct.stratum().is_h2() && angles(&oct) == [3], || format!("octagon: {} {:?}", oct.stratum(), angles(&oct)))?;
    ensure(dec.stratum().is_h11() && angles(&dec) == [2, 2], || format!("decagon: {} {:?}", dec.stratum(), angles(&dec)))?;
    let dq5 = decagon_polygon_q5();
    ensure(dq5.stratum().is_h11(), || "exact decagon not in H(1,1)".into())?;
    let mut count = 0;
    for n in 2..=5 {
        gauss_bonnet(&format!("{}-gon", 2 * n), &regular_2n_gon(n).map_err(|e| e.to_string())?)?;
        count += 1;
    }
    let k = k2();
    let exact: Vec<(&str, TranslationSurface)> = vec![
        ("decagon-q5", dq5),
        ("decagon-eigenform", decagon_eigenform_model()),
        ("z-table", z_table(&member_params()).unwrap()),
        ("z-table-2", z_table(&second_member_params()).unwrap()),
        ("l-table", l_table(&LTableParams { a: k.q(1, 1, 1, 1), b: k.int(3) }).unwrap()),
        ("slit-tori", slit_tori(&k.rat(1, 3)).unwrap()),
        (
            "split-l-table",
            split_l_table(&SplitLParams {
                w1: k.int(1),
                h1: k.int(1),
                w2: k.int(3),
                h2: k.int(1),
                l: k.rat(1, 2),
                t1: k.int(0),
                t2: k.int(0),
            })
            .unwrap(),
        ),
        ("torus", square_torus(2)),
    ];
    for (name, s) in &exact {
        gauss_bonnet(name, s)?;
        count += 1;
    }
    // the CLI path on the octagon
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("octagon.json");
    let code = flatlab_cli::run(["flatlab", "build", "octagon", "--out", f.to_str().unwrap()]);
    let out = dir.path().join("report.json");
    let code2 = flatlab_cli::run(["flatlab", "validate", "--surface", f.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    ensure(code == 0 && code2 == 0 && report["stratum"] == "H(2)" && report["cone_points"][0]["angle"] == "6pi", || {
        format!("CLI validate: exit {code}/{code2}, {report}")
    })?;
    Ok((
        Status::Pass,
        format!("octagon H(2) with one 6pi point, decagon H(1,1) with two 4pi points, Gauss-Bonnet exact on {count} surfaces"),
    ))
}

fn lm_fixture() -> Result<(Status, String), String> {
    let k = k2();
    let p = member_params();
    let s = z_table(&p).map_err(|e| e.to_string())?;
    let np = horizontal_params(&s)?;
    ensure(np.s1 == k.sqrt_d() && np.s2 == k.int(1), || format!("s1 = {}, s2 = {}", np.s1, np.s2))?;
    let want_m = &k.int(2) * &k.sqrt_d();
    match cylinders::check_lm(&np).map_err(|e| e.to_string())? {
        LmVerdict::Member { m } if m == want_m => {}
        v => return Err(format!("fixture verdict {v:?}")),
    }
    let eps = k.rat(1, 1000);
    let mut perturbed = 0;
    for (name, sign) in ["w1", "w2", "h1", "h2", "h3", "t1", "t2", "t3"].iter().flat_map(|n| [(*n, 1), (*n, -1)]) {
        let mut q = p.clone();
        let d = if sign > 0 { eps.clone() } else { -&eps };
        let field = match name {
            "w1" => &mut q.w1,
            "w2" => &mut q.w2,
            "h1" => &mut q.h1,
            "h2" => &mut q.h2,
            "h3" => &mut q.h3,
            "t1" => &mut q.t1,
            "t2" => &mut q.t2,
            _ => &mut q.t3,
        };
        *field = &*field + &d;
        let v = verdict(&z_table(&q).map_err(|e| e.to_string())?)?;
        match v {
            LmVerdict::Violated { residual, .. } if !residual.is_zero() => perturbed += 1,
            v => return Err(format!("{name} {sign:+}1e-3 gave {v:?}")),
        }
    }
    Ok((Status::Pass, format!("member with m = 2 sqrt2; all {perturbed} perturbations by +-1/1000 violate with nonzero residual")))
}

fn unit_powers(k: QuadField) -> Vec<QuadNum> {
    // fundamental units of Z[sqrt2] and Z[(1+sqrt5)/2]
    let u = if k.d() == 5 { k.q(1, 2, 1, 2) } else { k.q(1, 1, 1, 1) };
    let ui = u.checked_inv().unwrap();
    let mut out = Vec::new();
    let (mut p, mut q) = (u.clone(), ui.clone());
    for _ in 0..4 {
        out.push(p.clone());
        out.push(q.clone());
        p = &p * &u;
        q = &q * &ui;
    }
    out
}

fn shear_params(np: &NormalizedParams, t: &QuadNum) -> NormalizedParams {
    let mut n = np.clone();
    n.tau1 = &np.tau1 + &(t * &np.s1);
    n.tau2 = &np.tau2 + &(t * &np.s2);
    n
}

fn rescale_params(np: &NormalizedParams, l: &QuadNum) -> NormalizedParams {
    let li = l.checked_inv().unwrap();
    let mut n = np.clone();
    for w in [&mut n.w1, &mut n.w2, &mut n.w3, &mut n.tau1, &mut n.tau2] {
        *w = &*w * l;
    }
    n.s1 = &np.s1 * &li;
    n.s2 = &np.s2 * &li;
    n.m = &(&n.w1 * &n.s1) + &(&n.w2 * &n.s2);
    n
}

fn lm_invariance() -> Result<(Status, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let k = k2();
    let rational = ZTableParams {
        w1: k.int(1),
        w2: k.int(2),
        h1: k.int(1),
        h2: k.rat(1, 2),
        h3: k.int(1),
        t1: k.int(0),
        t2: k.int(0),
        t3: k.int(0),
    };
    let twisted = ZTableParams { t1: k.rat(1, 3), t3: k.rat(5, 7), ..member_params() };
    let fixtures = vec![
        ("member", z_table(&member_params()).unwrap()),
        ("second member", z_table(&second_member_params()).unwrap()),
        ("decagon eigenform", decagon_eigenform_model()),
        ("rational", z_table(&rational).unwrap()),
        ("twisted", z_table(&twisted).unwrap()),
    ];
    let mut checks = 0;
    let mut kinds = Vec::new();
    for (name, s) in &fixtures {
        let f = s.field();
        let np = horizontal_params(s)?;
        let v0 = cylinders::check_lm(&np).map_err(|e| e.to_string())?;
        kinds.push(format!("{name}: {}", flatlab_cli::commands::verdict_summary(&v0)));
        for _ in 0..200 {
            let t = random_quad(&mut rng, f, 20, 12);
            let v = cylinders::check_lm(&shear_params(&np, &t)).map_err(|e| e.to_string())?;
            ensure(v == v0, || format!("{name}: shear {t} changed {v0:?} to {v:?}"))?;
            checks += 1;
        }
        let units = unit_powers(f);
        for _ in 0..50 {
            let l = &units[rng.gen_range(0..units.len())];
            let v = cylinders::check_lm(&rescale_params(&np, l)).map_err(|e| e.to_string())?;
            // residuals scale by l/l' (heights) and N(l) = +-1 (twists)
            let ok = match (&v0, &v) {
                (LmVerdict::Member { m: a }, LmVerdict::Member { m: b }) => a == b,
                (
                    LmVerdict::Violated { equation: 1, residual: a },
                    LmVerdict::Violated { equation: 1, residual: b },
                ) => *b == &(a * l) / &l.conj(),
                (
                    LmVerdict::Violated { equation: 2, residual: a },
                    LmVerdict::Violated { equation: 2, residual: b },
                ) => *b == &(a * l) * &l.conj(),
                _ => false,
            };
            ensure(ok, || format!("{name}: unit {l} changed {v0:?} to {v:?}"))?;
            checks += 1;
        }
    }
    Ok((Status::Pass, format!("{checks} exact parameter-level checks ({})", kinds.join("; "))))
}

fn decomposition() -> Result<(Status, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let p = random_ztable(&mut rng);
        let s = z_table(&p).map_err(|e| e.to_string())?;
        let dec = cylinders::periodic_direction_decompose(&s, &Direction::horizontal(s.field()), 100_000)
            .map_err(|e| format!("table {i}: {e}"))?;
        let total = dec
            .cylinders
            .iter()
            .fold(s.field().zero(), |acc, c| &acc + &(&c.w * &c.h));
        ensure(total == s.area(), || format!("table {i}: sum w h = {total}, area {}", s.area()))?;
        let w3 = &p.w1 + &p.w2;
        let key = |w: &QuadNum, h: &QuadNum, t: &QuadNum| format!("{w:?}|{h:?}|{:?}", t.rem_euclid(w));
        let mut want = vec![key(&p.w1, &p.h1, &p.t1), key(&p.w2, &p.h2, &p.t2), key(&w3, &p.h3, &p.t3)];
        let mut got: Vec<String> = dec.cylinders.iter().map(|c| key(&c.w, &c.h, &c.t)).collect();
        want.sort();
        got.sort();
        ensure(want == got, || format!("table {i}: parameters {got:?}, expected {want:?}"))?;
    }
    Ok((Status::Pass, "100 random Q(sqrt2) Z-tables: sum w h = area and exact parameter round trip".into()))
}

fn main() {
    let results = [
        criterion(1, "strata of named examples", 1.0, Box::new(strata)),
        criterion(2, "eigenform-locus equations", 1.0, Box::new(lm_fixture)),
        criterion(3, "locus invariance at parameter level", 10.0, Box::new(lm_invariance)),
        criterion(4, "decomposition consistency", 30.0, Box::new(decomposition)),
        criterion(5, "conjugation cancellation", 10.0, Box::new(criteria_dynamics::cancellation)),
        criterion(6, "transverse-divergence limits", 120.0, Box::new(criteria_dynamics::transverse_limits)),
        criterion(7, "rescaling identities", 5.0, Box::new(criteria_dynamics::rescaling)),
        criterion(8, "rel degenerations", 5.0, Box::new(criteria_dynamics::degenerations)),
        criterion(9, "averaging operators", 120.0, Box::new(criteria_runs::averaging)),
        criterion(10, "equidistribution experiment (soft)", 900.0, Box::new(criteria_runs::equidistribution)),
        criterion(11, "determinism of exact replays", 60.0, Box::new(criteria_runs::determinism)),
    ];
    let failed = results.iter().filter(|s| **s == Status::Fail).count();
    let findings = results.iter().filter(|s| **s == Status::Finding).count();
    let passed = results.iter().filter(|s| **s == Status::Pass).count();
    println!("acceptance: {passed} passed, {failed} failed, {findings} findings");
    if failed > 0 {
        std::process::exit(1);
    }
}

pub fn archive_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).unwrap();
    d
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
