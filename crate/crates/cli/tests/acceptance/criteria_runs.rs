use std::path::Path;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use flatlab::constructions::{decagon_eigenform_model, square_torus, z_table};
use flatlab::ergodic::{self, flow_u, rel_x, rational_sqrt, to_rational, Observable};
use flatlab::exactfield::Rational;
use flatlab::{Mat2, TranslationSurface};
use flatlab_cli::manifest::{OutputKind, RunManifest};

use super::{archive_dir, ensure, member_params, random_ztable, rational, second_member_params, Status};

fn systole() -> Observable {
    Observable::TruncatedSystole { cap: 1.0 }
}

fn f64_of(r: &Rational) -> f64 {
    r.to_f64().unwrap()
}

/// Iterated midpoint average in the opposite order: each sample is built
/// by shearing first and moving the zero afterwards, which commutes.
fn swapped_order(s: &TranslationSurface, t: &Rational, nt: i64, ns: i64) -> Result<f64, String> {
    let k = s.field();
    let root = f64_of(&rational_sqrt(t).map_err(|e| e.to_string())?);
    let mut total = 0.0;
    for i in 0..nt {
        let ti = t * rational(2 * i + 1, 2 * nt);
        let sheared = flow_u(s, &k.rational(ti)).map_err(|e| e.to_string())?;
        for j in 0..ns {
            let sj = to_rational(root * (j as f64 + 0.5) / ns as f64).map_err(|e| e.to_string())?;
            let m = rel_x(&sheared, &sj).map_err(|e| e.to_string())?;
            total += systole().eval(&m).map_err(|e| e.to_string())?;
        }
    }
    Ok(total / (nt * ns) as f64)
}

pub fn averaging() -> Result<(Status, String), String> {
    // constants
    let c = Observable::Constant { value: 0.7 };
    for s in [z_table(&member_params()).unwrap(), decagon_eigenform_model()] {
        let a = ergodic::average_a_u(&c, &s, &rational(7, 2), &rational(1, 8)).map_err(|e| e.to_string())?;
        let b = ergodic::average_a_ux(&c, &s, &rational(9, 4), &rational(1, 4), &rational(1, 4)).map_err(|e| e.to_string())?;
        ensure(a.value == 0.7 && a.err_estimate == 0.0 && b.value == 0.7 && b.err_estimate == 0.0, || {
            format!("constant averages {} / {}", a.value, b.value)
        })?;
    }
    // both orders of integration, on different grids
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_ratio: f64 = 0.0;
    for run in 0..20 {
        let s = z_table(&random_ztable(&mut rng)).map_err(|e| e.to_string())?;
        let t = [rational(1, 1), rational(2, 1), rational(9, 4), rational(3, 1)][rng.gen_range(0..4)].clone();
        let root = rational_sqrt(&t).map_err(|e| e.to_string())?;
        let a = ergodic::average_a_ux(&systole(), &s, &t, &(&t / rational(8, 1)), &(&root / rational(4, 1)))
            .map_err(|e| format!("run {run}: {e}"))?;
        let o1 = swapped_order(&s, &t, 6, 3)?;
        let o2 = swapped_order(&s, &t, 12, 6)?;
        let err_o = 4.0 / 3.0 * (o2 - o1).abs();
        let gap = (a.value - o1).abs();
        let budget = a.err_estimate + err_o;
        ensure(gap <= budget, || {
            format!("run {run}: |{} - {o1}| = {gap:.2e} exceeds {budget:.2e}", a.value)
        })?;
        if budget > 0.0 {
            worst_ratio = worst_ratio.max(gap / budget);
        }
    }
    // step halving on smooth stretches: u^t diag(l, 1/l) Z^2 for t <= l^2/2
    let mut ratios = Vec::new();
    for (n, d) in [(2, 1), (5, 2), (3, 1), (7, 2)] {
        let base = square_torus(2);
        let k = base.field();
        let s = base.apply_sl2(&Mat2::diagonal(&k.rat(n, d))).map_err(|e| e.to_string())?;
        let t = rational(n * n, 2 * d * d);
        let obs = Observable::TruncatedSystole { cap: 100.0 };
        let coarse = ergodic::average_a_u(&obs, &s, &t, &(&t / rational(10, 1))).map_err(|e| e.to_string())?;
        let fine = ergodic::average_a_u(&obs, &s, &t, &(&t / rational(20, 1))).map_err(|e| e.to_string())?;
        let r = coarse.err_estimate / fine.err_estimate;
        ensure(r >= 3.0, || format!("lambda = {n}/{d}: halving ratio {r:.2}"))?;
        ratios.push(r);
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        Status::Pass,
        format!(
            "constants exact; 20 random two-order comparisons within summed estimates (worst gap/budget {worst_ratio:.2}); step halving cuts estimates by >= {min_ratio:.2}x"
        ),
    ))
}

fn cli(args: &[&str]) -> i32 {
    let mut v = vec!["flatlab"];
    v.extend_from_slice(args);
    flatlab_cli::run(v)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn equidistribution() -> Result<(Status, String), String> {
    let dir = archive_dir().join("equidist");
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("table-a.json");
    let b = dir.join("table-b.json");
    std::fs::write(&a, z_table(&member_params()).unwrap().to_json()).unwrap();
    std::fs::write(&b, z_table(&second_member_params()).unwrap().to_json()).unwrap();
    let cfg = json!({
        "surfaces": [{"name": "table-a", "path": "table-a.json"}, {"name": "table-b", "path": "table-b.json"}],
        "observable": "systole:1",
        "t_schedule": ["100", "1000", "10000"],
        "steps": {"nt": 1000, "ns": 2},
    });
    let cfg_path = dir.join("experiment.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let out = dir.join("equidist.csv");
    let table = dir.join("equidist-table.json");
    let record = dir.join("equidist.manifest.json");
    let code = cli(&[
        "equidist",
        "--manifest",
        path_str(&cfg_path),
        "--out",
        path_str(&out),
        "--table",
        path_str(&table),
        "--record",
        path_str(&record),
    ]);
    ensure(code == 0, || format!("equidist exited with {code}"))?;
    let m = RunManifest::parse(&std::fs::read_to_string(&record).unwrap()).map_err(|e| e.to_string())?;
    let t: Value = serde_json::from_slice(&std::fs::read(&table).unwrap()).unwrap();
    let mut parts = Vec::new();
    for run in t["runs"].as_array().unwrap() {
        let vals: Vec<String> = run["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| match (c["value"].as_f64(), c["err_estimate"].as_f64()) {
                (Some(v), Some(e)) => format!("{v:.5}+-{e:.1e}"),
                _ => format!("error: {}", c["error"]),
            })
            .collect();
        parts.push(format!("{} [{}]", run["surface_ref"].as_str().unwrap(), vals.join(", ")));
    }
    let decreasing = m.notes["increments_decreasing"].clone();
    let increments = m.notes["increments"].clone();
    let all = decreasing.as_array().is_some_and(|v| v.iter().all(|x| x == &Value::Bool(true)));
    let detail = format!(
        "{}; increments {increments}; archived in {}",
        parts.join("; "),
        dir.display()
    );
    Ok((if all { Status::Pass } else { Status::Finding }, detail))
}

pub fn determinism() -> Result<(Status, String), String> {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (z, st, dec) = (p("z.json"), p("slit.json"), p("dec.json"));
    let runs: Vec<Vec<String>> = vec![
        vec!["build", "ztable", "--out", &z],
        vec!["build", "slit-tori", "--params", r#"{"l": "1/3"}"#, "--out", &st],
        vec!["build", "decagon-eigenform", "--out", &dec],
        vec!["validate", "--surface", &z, "--out", &p("validate.json")],
        vec!["check-lm", "--surface", &z, "--out", &p("check.json")],
        vec!["check-lm", "--surface", &dec, "--out", &p("check-dec.json")],
        vec!["cylinders", "--surface", &dec, "--dir", "1,0", "--out", &p("cyl.json")],
        vec!["cylinders", "--surface", &z, "--probe", "2", "--out", &p("probe.json")],
        vec!["saddles", "--surface", &z, "--bound", "3", "--out", &p("saddles.json")],
        vec!["act", "--surface", &z, "--matrix", "1,1+s,0,1", "--canonical", "--out", &p("act.json")],
        vec!["rel", "--surface", &st, "--interval", "--bound", "4", "--out", &p("interval.json")],
        vec!["rel", "--surface", &st, "--classify", "1/3", "--out", &p("classify.json")],
        vec!["rel", "--surface", &z, "--vec", "1/5,0", "--canonical", "--out", &p("rel.json")],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let mut replayed = 0;
    for args in &runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ensure(cli(&refs) == 0, || format!("{args:?} failed"))?;
        let out = args.last().unwrap();
        let first = std::fs::read(out).unwrap();
        let manifest = format!("{out}.manifest.json");
        let m = RunManifest::parse(&std::fs::read_to_string(&manifest).unwrap()).map_err(|e| e.to_string())?;
        ensure(m.outputs.iter().all(|o| o.kind == Some(OutputKind::Exact)), || format!("{args:?}: non-exact output"))?;
        let r = flatlab_cli::replay(Path::new(&manifest), None).map_err(|e| format!("{args:?}: {e}"))?;
        ensure(r["outputs"].as_array().unwrap().iter().all(|o| o["status"] == "identical"), || {
            format!("{args:?}: {r}")
        })?;
        // a second independent run writes the same bytes
        ensure(cli(&refs) == 0 && std::fs::read(out).unwrap() == first, || format!("{args:?}: rerun differs"))?;
        replayed += 1;
    }
    // editing an input is detected
    let mut text = std::fs::read_to_string(&z).unwrap();
    text.push(' ');
    std::fs::write(&z, text).unwrap();
    let err = flatlab_cli::replay(Path::new(&format!("{}.manifest.json", p("check.json"))), None).unwrap_err();
    ensure(err.code == "HashMismatch", || format!("edited input gave {err}"))?;
    Ok((Status::Pass, format!("{replayed} exact manifests replayed byte for byte; edited input rejected with HashMismatch")))
}
