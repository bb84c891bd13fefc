//! One handler per subcommand. Handlers read through and write through the
//! session so that every file they touch ends up in the manifest.

use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use flatlab::constructions::{self as cons, LTableParams, SplitLParams, ZTableParams};
use flatlab::cylinders::{self, Direction};
use flatlab::divergence::{self, DivergenceSequence};
use flatlab::ergodic::{self, GridSteps, Observable};
use flatlab::exactfield::{parse_quad_text, parse_rational_text, QuadField, QuadNum, Rational};
use flatlab::saddles;
use flatlab::surface::io::{parse_surface, AnySurface};
use flatlab::surface::rel::{DegenerationReport, RelOutcome};
use flatlab::{Mat2, Surface, TranslationSurface, Vec2};

use crate::manifest::{sha256_hex, write_atomic, OutputKind, Session};
use crate::{Cli, Command, CliError, Example, Family};

pub fn execute(cli: &Cli, sess: &mut Session) -> Result<(), CliError> {
    match &cli.command {
        Command::Build(a) => build(sess, a),
        Command::Cylinders(a) => cylinders_cmd(sess, a),
        Command::CheckLm(a) => check_lm(sess, a),
        Command::Saddles(a) => saddles_cmd(sess, a),
        Command::Act(a) => act(sess, a),
        Command::Rel(a) => rel(sess, a),
        Command::Average(a) => average(sess, a),
        Command::Equidist(a) => equidist(sess, a),
        Command::DivergenceVerify(a) => divergence_verify(sess, a, cli.seed),
        Command::Validate(a) => validate(sess, a),
        Command::Replay(_) => Err(CliError::new("Usage", "cli", "replay is handled before dispatch")),
    }
}

fn bad(code: &str, msg: impl Into<String>) -> CliError {
    CliError::new(code, "cli", msg)
}

fn to_line(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string(v).expect("output serializes");
    s.push('\n');
    s.into_bytes()
}

fn load_any(sess: &mut Session, path: &Path) -> Result<AnySurface, CliError> {
    let text = sess.read_input_text(path)?;
    Ok(parse_surface(&text)?)
}

fn load_exact(sess: &mut Session, path: &Path) -> Result<TranslationSurface, CliError> {
    match load_any(sess, path)? {
        AnySurface::Exact(s) => Ok(s),
        AnySurface::Float(_) => Err(CliError::new(
            "InexactSurface",
            "surface-kernel",
            "this operation needs exact coordinates; the surface is floating",
        )),
    }
}

fn quad(text: &str, k: QuadField) -> Result<QuadNum, CliError> {
    Ok(parse_quad_text(text, k)?)
}

fn rational(name: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational_text(text).map_err(|e| bad("InvalidParameter", format!("{name}: {e}")))
}

fn quad_list(text: &str, n: usize, k: QuadField) -> Result<Vec<QuadNum>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != n {
        return Err(bad("InvalidParameter", format!("expected {n} comma-separated numbers, got {text:?}")));
    }
    parts.iter().map(|p| quad(p, k)).collect()
}

// ---------------------------------------------------------------- build

/// Reads the `--params` object. Numbers are exact: JSON integers, strings
/// in the compact `a+bs` form, or the object form `{"a","b","d"}`.
struct Params {
    map: Map<String, Value>,
    k: QuadField,
}

impl Params {
    fn parse(text: Option<&str>, default_d: u64) -> Result<Self, CliError> {
        let mut map = match text {
            None => Map::new(),
            Some(t) => match serde_json::from_str::<Value>(t) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(bad("BadParams", "--params must be a JSON object")),
                Err(e) => return Err(bad("BadParams", e.to_string())),
            },
        };
        let d = match map.remove("d") {
            None => default_d,
            Some(v) => v.as_u64().ok_or_else(|| bad("BadParams", "d must be a positive integer"))?,
        };
        Ok(Params { map, k: QuadField::new(d)? })
    }

    fn get(&mut self, key: &str, default: Option<&str>) -> Result<QuadNum, CliError> {
        match self.map.remove(key) {
            None => match default {
                Some(t) => quad(t, self.k),
                None => Err(bad("BadParams", format!("missing parameter {key}"))),
            },
            Some(Value::String(s)) => quad(&s, self.k),
            Some(Value::Number(n)) if n.is_i64() => quad(&n.to_string(), self.k),
            Some(v @ Value::Object(_)) => {
                let q: QuadNum = serde_json::from_value(v).map_err(|e| bad("BadParams", format!("{key}: {e}")))?;
                if q.d() != self.k.d() {
                    return Err(bad("BadParams", format!("{key} lies in a different field")));
                }
                Ok(q)
            }
            Some(v) => Err(bad("BadParams", format!("{key}: {v} is not an exact number"))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(bad("BadParams", format!("unknown parameter {k}"))),
            None => Ok(()),
        }
    }
}

pub fn build_example(kind: Example, params: Option<&str>) -> Result<(Vec<u8>, OutputKind), CliError> {
    let float = |s: flatlab::surface::FloatSurface| {
        let mut t = s.to_json();
        t.push('\n');
        (t.into_bytes(), OutputKind::FloatJson)
    };
    let exact = |s: TranslationSurface| {
        let mut t = s.to_json();
        t.push('\n');
        (t.into_bytes(), OutputKind::Exact)
    };
    let no_params = |p: Option<&str>| match p {
        Some(_) => Err(bad("BadParams", "this example takes no parameters")),
        None => Ok(()),
    };
    Ok(match kind {
        Example::Octagon => {
            no_params(params)?;
            float(cons::regular_2n_gon(4)?)
        }
        Example::Decagon => {
            no_params(params)?;
            float(cons::regular_2n_gon(5)?)
        }
        Example::DecagonQ5 => {
            no_params(params)?;
            exact(cons::decagon_polygon_q5())
        }
        Example::DecagonEigenform => {
            no_params(params)?;
            exact(cons::decagon_eigenform_model())
        }
        Example::Ztable => {
            // default: s1 = sqrt2, s2 = 1, zero twists, widths 1 and sqrt2
            let mut p = Params::parse(params, 2)?;
            let z = ZTableParams {
                w1: p.get("w1", Some("1"))?,
                w2: p.get("w2", Some("s"))?,
                h1: p.get("h1", Some("-1/2+s"))?,
                h2: p.get("h2", Some("1/2"))?,
                h3: p.get("h3", Some("1/2"))?,
                t1: p.get("t1", Some("0"))?,
                t2: p.get("t2", Some("0"))?,
                t3: p.get("t3", Some("0"))?,
            };
            p.finish()?;
            exact(cons::z_table(&z)?)
        }
        Example::Ltable => {
            let mut p = Params::parse(params, 2)?;
            let l = LTableParams {
                a: p.get("a", Some("1+s"))?,
                b: p.get("b", Some("1+s"))?,
            };
            p.finish()?;
            exact(cons::l_table(&l)?)
        }
        Example::SlitTori => {
            let mut p = Params::parse(params, 2)?;
            let l = p.get("l", Some("1/3"))?;
            p.finish()?;
            exact(cons::slit_tori(&l)?)
        }
        Example::SplitLtable => {
            let mut p = Params::parse(params, 2)?;
            let q = SplitLParams {
                w1: p.get("w1", Some("1"))?,
                h1: p.get("h1", Some("1"))?,
                w2: p.get("w2", Some("3"))?,
                h2: p.get("h2", Some("1"))?,
                l: p.get("l", Some("1/2"))?,
                t1: p.get("t1", Some("0"))?,
                t2: p.get("t2", Some("0"))?,
            };
            p.finish()?;
            exact(cons::split_l_table(&q)?)
        }
        Example::Torus => {
            let p = Params::parse(params, 2)?;
            let d = p.k.d();
            p.finish()?;
            exact(cons::square_torus(d))
        }
    })
}

fn build(sess: &mut Session, a: &crate::BuildArgs) -> Result<(), CliError> {
    let (bytes, kind) = build_example(a.kind, a.params.as_deref())?;
    sess.write_output(a.out.as_deref(), &bytes, kind)
}

// ---------------------------------------------------------------- cylinders

fn cylinders_cmd(sess: &mut Session, a: &crate::CylindersArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let k = s.field();
    let out = match &a.probe {
        Some(bound) => to_line(&cylinders::periodicity_probe(&s, &quad(bound, k)?, a.budget)?),
        None => {
            let dir = Direction::parse(&a.dir, k)?;
            to_line(&cylinders::periodic_direction_decompose(&s, &dir, a.budget)?)
        }
    };
    sess.write_output(a.out.as_deref(), &out, OutputKind::Exact)
}

pub fn verdict_summary(v: &cylinders::LmVerdict) -> String {
    match v {
        cylinders::LmVerdict::Member { m } => format!("member(m={m})"),
        cylinders::LmVerdict::Violated { equation, .. } => format!("violated(eq{equation})"),
    }
}

fn check_lm(sess: &mut Session, a: &crate::CheckLmArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let dir = Direction::parse(&a.dir, s.field())?;
    let dec = cylinders::periodic_direction_decompose(&s, &dir, a.budget)?;
    let np = cylinders::normalize_params(&dec)?;
    let verdict = cylinders::check_lm(&np)?;
    let out = json!({
        "direction": dec.direction,
        "cylinders": dec.cylinders,
        "normalized": np,
        "verdict": verdict,
        "summary": verdict_summary(&verdict),
    });
    sess.write_output(a.out.as_deref(), &to_line(&out), OutputKind::Exact)
}

// ---------------------------------------------------------------- saddles

fn saddles_cmd(sess: &mut Session, a: &crate::SaddlesArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let bound = quad(&a.bound, s.field())?;
    let mut list = saddles::enumerate_saddle_connections(&s, &bound, a.max_steps)?;
    if a.horizontal_only {
        list.retain(|c| c.is_horizontal());
    }
    sess.write_output(a.out.as_deref(), &to_line(&list), OutputKind::Exact)
}

// ---------------------------------------------------------------- act / rel

/// Canonical form, memoized on disk under `FLATLAB_CACHE` when set. Entries
/// are keyed by the hash of the input JSON and verified on read.
pub fn canonical_cached(s: &TranslationSurface) -> Result<TranslationSurface, CliError> {
    let Some(dir) = std::env::var_os("FLATLAB_CACHE").map(PathBuf::from) else {
        return Ok(s.canonicalize()?);
    };
    let key = sha256_hex(s.to_json().as_bytes());
    let path = dir.join(format!("canonical-{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(c) = TranslationSurface::from_json(&text) {
            if c.is_delaunay() && c.is_isomorphic(s)? {
                return Ok(c);
            }
        }
    }
    let c = s.canonicalize()?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_atomic(&path, c.to_json().as_bytes())?;
    Ok(c)
}

fn act(sess: &mut Session, a: &crate::ActArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let e = quad_list(&a.matrix, 4, s.field())?;
    let g = Mat2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone());
    let mut t = s.apply_sl2(&g)?;
    if a.canonical {
        t = canonical_cached(&t)?;
    }
    sess.write_output(a.out.as_deref(), &to_line(&t.to_json_value()), OutputKind::Exact)
}

fn degeneration_json(r: &DegenerationReport) -> Value {
    json!({
        "kind": r.kind,
        "components": r.components.iter().map(|c| json!({
            "stratum": c.stratum().to_string(),
            "genus": c.genus(),
            "area": c.area().to_string(),
            "surface": c.to_json_value(),
        })).collect::<Vec<_>>(),
    })
}

fn rel(sess: &mut Session, a: &crate::RelArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let k = s.field();
    let chosen = [a.vec.is_some(), a.interval, a.classify.is_some()].iter().filter(|b| **b).count();
    if chosen != 1 {
        return Err(bad("Usage", "give exactly one of --vec, --interval, --classify"));
    }
    let steps = saddles::DEFAULT_MAX_STEPS;
    let out = if let Some(v) = &a.vec {
        let v = quad_list(v, 2, k)?;
        let cone = match a.cone {
            Some(c) => c,
            None => *s
                .singular_ids()
                .first()
                .ok_or_else(|| CliError::new("WrongStratum", "surface-kernel", "no zero to move"))?,
        };
        match s.rel_translate(&Vec2::new(v[0].clone(), v[1].clone()), cone)? {
            RelOutcome::Surface(t) => {
                let t = if a.canonical { canonical_cached(&t)? } else { t };
                json!({ "outcome": "surface", "surface": t.to_json_value() })
            }
            RelOutcome::Degenerate(r) => json!({ "outcome": "degenerate", "degeneration": degeneration_json(&r) }),
        }
    } else if a.interval {
        let bound = quad(&a.bound, k)?;
        let iv = saddles::horizontal_interval(&s, &bound, steps)?;
        let hc = saddles::hc_membership(&s, &bound, steps)?;
        json!({ "interval": iv, "membership": hc })
    } else {
        let x = quad(a.classify.as_deref().unwrap_or_default(), k)?;
        degeneration_json(&saddles::classify_degeneration(&s, &x, steps)?)
    };
    sess.write_output(a.out.as_deref(), &to_line(&out), OutputKind::Exact)
}

// ---------------------------------------------------------------- ergodic

fn average(sess: &mut Session, a: &crate::AverageArgs) -> Result<(), CliError> {
    let s = load_exact(sess, &a.input.surface)?;
    let obs = Observable::parse(&a.obs)?;
    let t = rational("T", &a.t)?;
    let dt = rational("dt", &a.dt)?;
    let (value, err, note) = match &a.ds {
        None => {
            let r = ergodic::average_a_u(&obs, &s, &t, &dt)?;
            (r.value, r.err_estimate, serde_json::to_value(&r).expect("serializes"))
        }
        Some(ds) => {
            let r = ergodic::average_a_ux(&obs, &s, &t, &dt, &rational("ds", ds)?)?;
            (r.value, r.err_estimate, serde_json::to_value(&r).expect("serializes"))
        }
    };
    sess.note("average", note);
    sess.note("observable", json!(obs));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["T", "value", "err_estimate"]).expect("in-memory write");
    w.write_record([fmt_f64(t.to_f64().unwrap_or(f64::NAN)), fmt_f64(value), fmt_f64(err)])
        .expect("in-memory write");
    let bytes = w.into_inner().expect("in-memory write");
    sess.write_output(a.out.as_deref(), &bytes, OutputKind::FloatCsv { rel_tol: 1e-12 })
}

/// Shortest representation that reads back to the same double.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct EquidistSurface {
    name: String,
    path: PathBuf,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistConfig {
    surfaces: Vec<EquidistSurface>,
    #[serde(default = "default_obs")]
    observable: String,
    t_schedule: Vec<String>,
    steps: GridSteps,
}

/// Reads an experiment description and checks its observable and schedule.
pub fn parse_equidist_config(text: &str) -> Result<EquidistConfig, CliError> {
    let cfg: EquidistConfig = serde_json::from_str(text).map_err(|e| bad("BadConfig", e.to_string()))?;
    Observable::parse(&cfg.observable)?;
    for t in &cfg.t_schedule {
        rational("t_schedule", t)?;
    }
    Ok(cfg)
}

fn default_obs() -> String {
    "systole".into()
}

fn equidist(sess: &mut Session, a: &crate::EquidistArgs) -> Result<(), CliError> {
    let cfg_path = sess.resolve(&a.manifest);
    let text = sess.read_input_text(&cfg_path)?;
    let cfg = parse_equidist_config(&text)?;
    let base = cfg_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut surfaces = Vec::new();
    for e in &cfg.surfaces {
        let s = load_exact(sess, &base.join(&e.path))?;
        surfaces.push((e.name.clone(), s));
    }
    let obs = Observable::parse(&cfg.observable)?;
    let sched = cfg
        .t_schedule
        .iter()
        .map(|t| rational("t_schedule", t))
        .collect::<Result<Vec<_>, _>>()?;
    let table = ergodic::equidistribution_experiment(&surfaces, &obs, &sched, cfg.steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["surface", "T", "value", "err_estimate", "error"]).expect("in-memory write");
    for run in &table.runs {
        for c in &run.results {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            w.write_record([
                run.surface_ref.clone(),
                fmt_f64(c.t),
                opt(c.value),
                opt(c.err_estimate),
                c.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
    }
    let bytes = w.into_inner().expect("in-memory write");
    sess.note("spread", json!(table.spread));
    sess.note("increments", json!(table.increments));
    sess.note("increments_decreasing", json!(table.increments_decreasing));
    sess.write_output(a.out.as_deref(), &bytes, OutputKind::FloatCsv { rel_tol: 1e-12 })?;
    if let Some(p) = &a.table {
        sess.write_output(Some(p), &to_line(&table), OutputKind::FloatJson)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- divergence

fn divergence_verify(sess: &mut Session, a: &crate::DivergenceArgs, seed: u64) -> Result<(), CliError> {
    let kmax = a
        .kmax
        .parse::<f64>()
        .ok()
        .filter(|k| k.is_finite() && *k >= 1.0 && k.fract() == 0.0 && *k <= 1e12)
        .ok_or_else(|| bad("InvalidParameter", format!("kmax {:?} is not a positive integer", a.kmax)))?
        as u64;
    let seq = match a.family {
        Family::CaseA => DivergenceSequence::case_a(a.delta)?,
        Family::CaseB => DivergenceSequence::case_b(a.delta)?,
        Family::Custom => DivergenceSequence::custom(seed, a.delta)?,
    };
    let rep = divergence::limit_region_check(&seq, kmax, a.tol)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "diag", "x", "distance"]).expect("in-memory write");
    for r in &rep.samples {
        w.write_record([r.k.to_string(), fmt_f64(r.diag), fmt_f64(r.x), fmt_f64(r.distance)])
            .expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory write");
    sess.write_output(a.out.as_deref(), &bytes, OutputKind::FloatCsv { rel_tol: 1e-12 })?;
    let summary = json!({
        "case": rep.case,
        "region": rep.region,
        "accumulation_point": rep.accumulation_point,
        "distance_to_region": rep.distance_to_region,
        "residual": rep.residual,
        "cauchy": rep.cauchy,
        "pass": rep.pass,
    });
    sess.note("limit", summary.clone());
    if let Some(p) = &a.report {
        sess.write_output(Some(p), &to_line(&rep), OutputKind::FloatJson)?;
    }
    if !rep.pass {
        return Err(CliError::new("LimitRegionMiss", "divergence-lab", "accumulation point misses the limit region")
            .with_context(summary));
    }
    Ok(())
}

// ---------------------------------------------------------------- validate

fn cone_report<S: flatlab::Scalar>(s: &Surface<S>, area: String, exact: bool) -> Value {
    let orders: u32 = s.cone_data().iter().map(|c| c.order()).sum();
    let expected = 2 * s.genus() as i64 - 2;
    json!({
        "label": s.label(),
        "exact": exact,
        "genus": s.genus(),
        "stratum": s.stratum().to_string(),
        "cone_points": s.cone_data().iter().map(|c| json!({
            "id": c.id,
            "angle": format!("{}pi", 2 * c.angle_multiple),
            "angle_multiple": c.angle_multiple,
        })).collect::<Vec<_>>(),
        "area": area,
        "euler_characteristic": s.euler_characteristic(),
        "gauss_bonnet": {
            "sum_of_orders": orders,
            "two_g_minus_two": expected,
            "holds": orders as i64 == expected,
        },
    })
}

fn validate(sess: &mut Session, a: &crate::ValidateArgs) -> Result<(), CliError> {
    let (report, kind) = match load_any(sess, &a.input.surface)? {
        AnySurface::Exact(s) => (cone_report(&s, s.area().to_string(), true), OutputKind::Exact),
        AnySurface::Float(s) => (cone_report(&s, format!("{:?}", s.area()), false), OutputKind::FloatJson),
    };
    sess.write_output(a.out.as_deref(), &to_line(&report), kind)
}
