//! Horocycle and rel orbit averages.
//!
//! Orbit points are exact: sample times are rationals, each step applies
//! `u^h` to the current Delaunay mesh and repairs it by flips, so coordinates
//! stay bounded. Only observable values and their averages are floating.

use std::time::Instant;

use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactfield::{QuadNum, Rational};
use crate::geometry::{Mat2, Vec2};
use crate::saddles::{self, Endpoint, HorizontalInterval, SaddleError};
use crate::surface::delaunay::{make_delaunay, DEFAULT_MAX_FLIPS};
use crate::surface::mesh::Mesh;
use crate::surface::rel::RelOutcome;
use crate::surface::{Surface, SurfaceError, TranslationSurface};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rel deformation leaves H(1,1) at s = {s}")]
    RelDegeneration {
        s: String,
        interval: Option<HorizontalInterval>,
    },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Saddle(#[from] SaddleError),
}

/// Built-in observables. Truncation at `cap` stands in for compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    Constant { value: f64 },
    /// `min(systole, cap)`.
    TruncatedSystole { cap: f64 },
    /// Number of saddle connections of length at most `length`.
    SaddleCount { length: f64 },
    /// `min(|I_S|, cap)` for the horizontal rel interval.
    IntervalWidth { cap: f64 },
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Constant { value } => format!("constant({value})"),
            Observable::TruncatedSystole { cap } => format!("systole(cap={cap})"),
            Observable::SaddleCount { length } => format!("saddle-count(L={length})"),
            Observable::IntervalWidth { cap } => format!("interval-width(cap={cap})"),
        }
    }

    /// Parses `constant:c`, `systole[:cap]`, `saddle-count[:L]`,
    /// `interval-width[:cap]`.
    pub fn parse(text: &str) -> Result<Self, ErgodicError> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        let num = |default: f64| -> Result<f64, ErgodicError> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ErgodicError::InvalidParameter(format!("bad observable argument {a:?}"))),
            }
        };
        let obs = match kind {
            "constant" => Observable::Constant { value: num(1.0)? },
            "systole" => Observable::TruncatedSystole { cap: num(1.0)? },
            "saddle-count" => Observable::SaddleCount { length: num(2.0)? },
            "interval-width" => Observable::IntervalWidth { cap: num(4.0)? },
            _ => return Err(ErgodicError::InvalidParameter(format!("unknown observable {kind:?}"))),
        };
        obs.validate()?;
        Ok(obs)
    }

    fn validate(&self) -> Result<(), ErgodicError> {
        let ok = match self {
            Observable::Constant { .. } => true,
            Observable::TruncatedSystole { cap } | Observable::IntervalWidth { cap } => *cap > 0.0,
            Observable::SaddleCount { length } => *length > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ErgodicError::InvalidParameter(format!("{} needs a positive parameter", self.name())))
        }
    }

    /// Global Lipschitz constant along `u^t` orbits, when one is known.
    pub fn lipschitz_hint(&self) -> Option<f64> {
        match self {
            Observable::Constant { .. } => Some(0.0),
            // |u^t v| changes at rate at most |v_y| <= |v|, and |v| <= cap
            Observable::TruncatedSystole { cap } => Some(*cap),
            _ => None,
        }
    }

    /// Bound on `|f|`.
    pub fn sup_hint(&self) -> Option<f64> {
        match self {
            Observable::Constant { value } => Some(value.abs()),
            Observable::TruncatedSystole { cap } | Observable::IntervalWidth { cap } => Some(*cap),
            Observable::SaddleCount { .. } => None,
        }
    }

    pub fn eval(&self, s: &TranslationSurface) -> Result<f64, ErgodicError> {
        self.validate()?;
        match self {
            Observable::Constant { value } => Ok(*value),
            Observable::TruncatedSystole { cap } => {
                let d = if s.is_delaunay() { s.clone() } else { s.delaunay()? };
                Ok(systole_of_delaunay(d.mesh()).min(*cap))
            }
            Observable::SaddleCount { length } => {
                let k = s.field();
                let l = k.rational(to_rational(*length)?);
                Ok(saddles::enumerate_saddle_connections(s, &l, saddles::DEFAULT_MAX_STEPS)?.len() as f64)
            }
            Observable::IntervalWidth { cap } => {
                let k = s.field();
                let bound = k.rational(to_rational(*cap)?);
                let iv = saddles::horizontal_interval(s, &bound, saddles::DEFAULT_MAX_STEPS)?;
                let side = |e: &Endpoint| e.value().map(|x| x.abs().to_f64()).unwrap_or(*cap);
                Ok((side(&iv.left) + side(&iv.right)).min(*cap))
            }
        }
    }

    fn eval_mesh(&self, m: &Mesh<QuadNum>, label: Option<&str>) -> Result<f64, ErgodicError> {
        match self {
            Observable::Constant { value } => Ok(*value),
            Observable::TruncatedSystole { cap } => Ok(systole_of_delaunay(m).min(*cap)),
            _ => self.eval(&Surface::from_mesh_keep_ids(m.clone(), label.map(str::to_owned))),
        }
    }
}

/// Shortest edge of a Delaunay mesh: the shortest saddle connection has an
/// empty closed diametral disk, so it is an edge of every Delaunay mesh.
fn systole_of_delaunay(m: &Mesh<QuadNum>) -> f64 {
    m.vec
        .iter()
        .map(|v| v.norm2())
        .min()
        .expect("nonempty mesh")
        .to_f64()
        .sqrt()
}

pub fn to_rational(x: f64) -> Result<Rational, ErgodicError> {
    Rational::from_float(x).ok_or_else(|| ErgodicError::InvalidParameter(format!("{x} is not finite")))
}

fn positive(name: &str, x: &Rational) -> Result<(), ErgodicError> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(ErgodicError::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

/// `u^t S`, canonicalized.
pub fn flow_u(s: &TranslationSurface, t: &QuadNum) -> Result<TranslationSurface, ErgodicError> {
    Ok(s.apply_sl2(&Mat2::horocycle(t))?.canonicalize()?)
}

/// An exact horocycle orbit kept Delaunay after every step.
struct Orbit {
    mesh: Mesh<QuadNum>,
    label: Option<String>,
    renormalizations: usize,
}

impl Orbit {
    fn start(s: &TranslationSurface, t0: &QuadNum) -> Result<Self, ErgodicError> {
        let mut o = Orbit {
            mesh: s.mesh().clone(),
            label: s.label().map(str::to_owned),
            renormalizations: 0,
        };
        o.advance(t0)?;
        Ok(o)
    }

    fn advance(&mut self, h: &QuadNum) -> Result<(), ErgodicError> {
        if !h.is_zero() {
            for v in self.mesh.vec.iter_mut() {
                *v = Vec2::new(&v.x + &(h * &v.y), v.y.clone());
            }
        }
        if make_delaunay(&mut self.mesh, DEFAULT_MAX_FLIPS)? > 0 {
            self.renormalizations += 1;
        }
        Ok(())
    }
}

/// Values at the midpoints `t0 + (k + 1/2) h`, `k < n`, and the number of
/// steps that needed flips.
fn midpoint_samples(
    obs: &Observable,
    s: &TranslationSurface,
    h: &Rational,
    n: usize,
) -> Result<(Vec<f64>, usize), ErgodicError> {
    let k = s.field();
    let hq = k.rational(h.clone());
    let mut orbit = Orbit::start(s, &k.rational(h / Rational::from_integer(2.into())))?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            orbit.advance(&hq)?;
        }
        out.push(obs.eval_mesh(&orbit.mesh, orbit.label.as_deref())?);
    }
    Ok((out, orbit.renormalizations))
}

/// Mean that returns the common value exactly when all samples agree.
fn mean(v: &[f64]) -> f64 {
    if v.iter().all(|x| *x == v[0]) {
        return v[0];
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Number of midpoint cells and the exact step for `total / step`, rounded
/// up so the step never grows.
fn grid(total: &Rational, step: &Rational) -> (usize, Rational) {
    let q = total / step;
    let n = q.ceil().to_integer().to_usize().unwrap_or(usize::MAX).max(1);
    (n, total / Rational::from_integer(n.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Average {
    pub value: f64,
    /// Step-halving estimate `(4/3) |I(h/2) - I(h)|` of the midpoint error.
    pub err_estimate: f64,
    pub steps: usize,
    pub renormalizations: usize,
}

const MAX_SAMPLES: usize = 50_000_000;

/// `(1/T) int_0^T f(u^t S) dt` by the composite midpoint rule.
pub fn average_a_u(obs: &Observable, s: &TranslationSurface, t_total: &Rational, dt: &Rational) -> Result<Average, ErgodicError> {
    positive("T", t_total)?;
    positive("dt", dt)?;
    obs.validate()?;
    let (n, h) = grid(t_total, dt);
    if n > MAX_SAMPLES {
        return Err(ErgodicError::InvalidParameter(format!("{n} steps exceed the limit {MAX_SAMPLES}")));
    }
    let half = &h / Rational::from_integer(2.into());
    let (coarse, fine) = rayon::join(
        || midpoint_samples(obs, s, &h, n),
        || midpoint_samples(obs, s, &half, 2 * n),
    );
    let (coarse, renormalizations) = coarse?;
    let (fine, _) = fine?;
    let (a, b) = (mean(&coarse), mean(&fine));
    Ok(Average {
        value: a,
        err_estimate: 4.0 / 3.0 * (b - a).abs(),
        steps: n,
        renormalizations,
    })
}

/// A rational `r` with `r^2 = x` when `x` is a rational square, otherwise
/// the double-precision root read back exactly.
pub fn rational_sqrt(x: &Rational) -> Result<Rational, ErgodicError> {
    positive("T", x)?;
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Ok(Rational::new(rn, rd));
    }
    to_rational(x.to_f64().unwrap_or(f64::NAN).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageUX {
    pub value: f64,
    pub err_estimate: f64,
    /// Mean of the per-slice horocycle error estimates.
    pub err_t: f64,
    /// Step-halving estimate in the rel direction.
    pub err_s: f64,
    /// `(s_j, A_U(x^{s_j} S))` for the coarse slices.
    pub slices: Vec<(f64, f64)>,
    pub s_max: f64,
    pub renormalizations: usize,
}

/// The lower-numbered zero moved right by `s`.
pub fn rel_x(s: &TranslationSurface, shift: &Rational) -> Result<TranslationSurface, ErgodicError> {
    let k = s.field();
    let ids = s.singular_ids();
    let p = *ids.first().ok_or_else(|| SurfaceError::WrongStratum(s.stratum().to_string()))?;
    let v = Vec2::new(k.rational(shift.clone()), k.zero());
    let degenerate = || ErgodicError::RelDegeneration {
        s: shift.to_string(),
        interval: None,
    };
    match s.rel_translate(&v, p) {
        Ok(RelOutcome::Surface(out)) => Ok(out),
        Ok(RelOutcome::Degenerate(_)) | Err(SurfaceError::CollisionBeyondBoundary(_)) => Err(degenerate()),
        Err(e) => Err(e.into()),
    }
}

/// `(1/T^{3/2}) int_0^{sqrt T} int_0^T f(u^t x^s S) dt ds`, computed as the
/// rel-direction midpoint mean of horocycle averages.
pub fn average_a_ux(
    obs: &Observable,
    s: &TranslationSurface,
    t_total: &Rational,
    dt: &Rational,
    ds: &Rational,
) -> Result<AverageUX, ErgodicError> {
    positive("T", t_total)?;
    positive("dt", dt)?;
    positive("ds", ds)?;
    obs.validate()?;
    let s_max = rational_sqrt(t_total)?;
    let k = s.field();
    let iv = saddles::horizontal_interval(s, &k.rational(s_max.clone()), saddles::DEFAULT_MAX_STEPS)?;
    if let Some(r) = iv.right.value() {
        return Err(ErgodicError::RelDegeneration {
            s: r.to_string(),
            interval: Some(iv),
        });
    }
    let (ns, hs) = grid(&s_max, ds);
    let slice = |j: usize, h: &Rational| -> Rational { h * (Rational::from_integer(j.into()) + Rational::new(1.into(), 2.into())) };
    let coarse: Vec<(Rational, Average)> = (0..ns)
        .into_par_iter()
        .map(|j| {
            let sj = slice(j, &hs);
            let a = average_a_u(obs, &rel_x(s, &sj)?, t_total, dt)?;
            Ok((sj, a))
        })
        .collect::<Result<_, ErgodicError>>()?;
    let hs2 = &hs / Rational::from_integer(2.into());
    let (nt, ht) = grid(t_total, dt);
    let fine: Vec<f64> = (0..2 * ns)
        .into_par_iter()
        .map(|j| {
            let m = rel_x(s, &slice(j, &hs2))?;
            Ok(mean(&midpoint_samples(obs, &m, &ht, nt)?.0))
        })
        .collect::<Result<_, ErgodicError>>()?;
    let values: Vec<f64> = coarse.iter().map(|(_, a)| a.value).collect();
    let value = mean(&values);
    let err_t = coarse.iter().map(|(_, a)| a.err_estimate).sum::<f64>() / ns as f64;
    let err_s = 4.0 / 3.0 * (mean(&fine) - value).abs();
    Ok(AverageUX {
        value,
        err_estimate: err_t + err_s,
        err_t,
        err_s,
        slices: coarse
            .iter()
            .map(|(sj, a)| (sj.to_f64().unwrap_or(f64::NAN), a.value))
            .collect(),
        s_max: s_max.to_f64().unwrap_or(f64::NAN),
        renormalizations: coarse.iter().map(|(_, a)| a.renormalizations).sum(),
    })
}

/// Fraction of midpoint sample times in `[0, T]` at which the systole of
/// `u^t S` is at least `eps`.
pub fn recurrence_profile(s: &TranslationSurface, eps: f64, t_total: &Rational, dt: &Rational) -> Result<f64, ErgodicError> {
    positive("T", t_total)?;
    positive("dt", dt)?;
    let (n, h) = grid(t_total, dt);
    let obs = Observable::TruncatedSystole { cap: f64::INFINITY };
    let (vals, _) = midpoint_samples(&obs, s, &h, n)?;
    Ok(vals.iter().filter(|&&v| v >= eps).count() as f64 / n as f64)
}

/// Grid resolution per `T`: `dt = T / nt`, `ds = sqrt(T) / ns`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSteps {
    pub nt: usize,
    pub ns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCell {
    pub t: f64,
    pub value: Option<f64>,
    pub err_estimate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicRun {
    pub surface_ref: String,
    pub observable: String,
    pub t_schedule: Vec<f64>,
    pub steps: GridSteps,
    pub results: Vec<RunCell>,
    pub renormalizations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquidistTable {
    pub runs: Vec<ErgodicRun>,
    /// Max minus min across surfaces, per `T`, over cells that succeeded.
    pub spread: Vec<Option<f64>>,
    /// `|A(T_{n+1}) - A(T_n)|` per surface.
    pub increments: Vec<Vec<Option<f64>>>,
    /// Whether each surface's increments decrease strictly.
    pub increments_decreasing: Vec<bool>,
}

pub fn equidistribution_experiment(
    surfaces: &[(String, TranslationSurface)],
    obs: &Observable,
    t_schedule: &[Rational],
    steps: GridSteps,
) -> Result<EquidistTable, ErgodicError> {
    if t_schedule.is_empty() || t_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ErgodicError::InvalidParameter("T schedule must be nonempty and strictly increasing".into()));
    }
    if steps.nt == 0 || steps.ns == 0 {
        return Err(ErgodicError::InvalidParameter("grid steps must be positive".into()));
    }
    for (name, s) in surfaces {
        if !s.stratum().is_h11() {
            return Err(ErgodicError::InvalidParameter(format!("{name} is not in H(1,1)")));
        }
    }
    let mut runs = Vec::new();
    for (name, s) in surfaces {
        let start = Instant::now();
        let mut results = Vec::new();
        let mut renormalizations = 0;
        for t in t_schedule {
            let dt = t / Rational::from_integer(steps.nt.into());
            let ds = rational_sqrt(t)? / Rational::from_integer(steps.ns.into());
            let cell = match average_a_ux(obs, s, t, &dt, &ds) {
                Ok(a) => {
                    renormalizations += a.renormalizations;
                    RunCell {
                        t: t.to_f64().unwrap_or(f64::NAN),
                        value: Some(a.value),
                        err_estimate: Some(a.err_estimate),
                        error: None,
                    }
                }
                Err(e @ ErgodicError::RelDegeneration { .. }) => RunCell {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    value: None,
                    err_estimate: None,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            };
            results.push(cell);
        }
        runs.push(ErgodicRun {
            surface_ref: name.clone(),
            observable: obs.name(),
            t_schedule: t_schedule.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect(),
            steps,
            results,
            renormalizations,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    let spread = (0..t_schedule.len())
        .map(|i| {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.results[i].value).collect();
            if vals.is_empty() {
                None
            } else {
                let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                Some(max - min)
            }
        })
        .collect();
    let increments: Vec<Vec<Option<f64>>> = runs
        .iter()
        .map(|r| {
            r.results
                .windows(2)
                .map(|w| Some((w[1].value? - w[0].value?).abs()))
                .collect()
        })
        .collect();
    let increments_decreasing = increments
        .iter()
        .map(|inc| inc.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a)))
        .collect();
    Ok(EquidistTable {
        runs,
        spread,
        increments,
        increments_decreasing,
    })
}
