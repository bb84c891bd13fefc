//! Cylinder decompositions of periodic directions and the three-equation
//! membership test for Z-table parameters.
//!
//! A direction `(a, b)` is first rotated to horizontal by the unimodular map
//! `[[a/n, b/n], [-b, a]]`, `n = a^2 + b^2`, which sends `(a, b)` to
//! `(1, 0)`. Widths are therefore measured in multiples of the direction
//! vector, and `sum w h` equals the area in every direction.

use serde::Serialize;
use thiserror::Error;

use crate::exactfield::{parse_quad_text, FieldError, QuadField, QuadNum};
use crate::geometry::{Mat2, Vec2};
use crate::surface::trace::{trace_right, trace_up, HorizontalEnd, Segment, VerticalEnd};
use crate::surface::{SurfaceError, TranslationSurface};

/// Default limit on triangle crossings for a single trajectory.
pub const DEFAULT_TRACE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CylinderError {
    #[error("separatrix from corner {corner} crossed {crossings} triangles (length {length}) without closing")]
    TraceBudgetExceeded {
        corner: usize,
        crossings: usize,
        length: String,
    },
    #[error("direction is not periodic: {0}")]
    NotPeriodic(String),
    #[error("expected 3 cylinders, found {0}")]
    WrongCylinderCount(usize),
    #[error("no width is the sum of the other two")]
    NoSumRelation,
    #[error("parameters from different fields")]
    MixedField,
    #[error("zero direction")]
    ZeroDirection,
    #[error("bad direction: {0}")]
    BadDirection(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Saddle(#[from] crate::saddles::SaddleError),
}

/// A direction up to positive scaling, stored with `|x| = 1`, or `|y| = 1`
/// when `x = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Direction {
    pub x: QuadNum,
    pub y: QuadNum,
}

impl Direction {
    pub fn new(x: QuadNum, y: QuadNum) -> Result<Self, CylinderError> {
        if x.d() != y.d() {
            return Err(CylinderError::MixedField);
        }
        let s = if !x.is_zero() { x.abs() } else if !y.is_zero() { y.abs() } else {
            return Err(CylinderError::ZeroDirection);
        };
        Ok(Direction {
            x: &x / &s,
            y: &y / &s,
        })
    }

    pub fn horizontal(k: QuadField) -> Self {
        Direction { x: k.one(), y: k.zero() }
    }

    /// Parses `a,b` with components in the compact text form of
    /// [`parse_quad_text`].
    pub fn parse(text: &str, k: QuadField) -> Result<Self, CylinderError> {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| CylinderError::BadDirection(format!("expected `a,b`, got {text:?}")))?;
        let p = |s: &str| parse_quad_text(s, k).map_err(|e: FieldError| CylinderError::BadDirection(e.to_string()));
        Direction::new(p(a)?, p(b)?)
    }

    pub fn vector(&self) -> Vec2<QuadNum> {
        Vec2::new(self.x.clone(), self.y.clone())
    }

    /// The unimodular map taking this direction to `(1, 0)`.
    pub fn to_horizontal(&self) -> Mat2<QuadNum> {
        let n = &(&self.x * &self.x) + &(&self.y * &self.y);
        Mat2::new(&self.x / &n, &self.y / &n, -&self.y, self.x.clone())
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cylinder {
    pub w: QuadNum,
    pub h: QuadNum,
    /// Twist in `[0, w)`.
    pub t: QuadNum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleSummary {
    /// Length in multiples of the direction vector.
    pub length: QuadNum,
    pub from_cone: usize,
    pub to_cone: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderDecomposition {
    pub direction: Direction,
    pub cylinders: Vec<Cylinder>,
    pub saddle_connections: Vec<SaddleSummary>,
    pub normalized: Option<NormalizedParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedParams {
    pub w1: QuadNum,
    pub w2: QuadNum,
    pub w3: QuadNum,
    pub s1: QuadNum,
    pub s2: QuadNum,
    pub tau1: QuadNum,
    pub tau2: QuadNum,
    pub m: QuadNum,
    /// Input cylinder index of cylinders 1, 2, 3.
    pub order: [usize; 3],
}

struct Sc {
    start: usize,
    back: usize,
    length: QuadNum,
    /// Indices into the global segment list; the first lies in the triangle
    /// above the connection.
    segs: Vec<usize>,
}

/// Decomposes `s` in direction `dir` into cylinders.
pub fn periodic_direction_decompose(
    s: &TranslationSurface,
    dir: &Direction,
    budget: usize,
) -> Result<CylinderDecomposition, CylinderError> {
    if dir.x.d() != s.d() {
        return Err(CylinderError::MixedField);
    }
    let rotated = s.apply_sl2(&dir.to_horizontal())?.delaunay()?;
    let m = rotated.mesh();
    let k = s.field();
    let right = Vec2::new(k.one(), k.zero());
    let left = Vec2::new(-&k.one(), k.zero());

    let mut scs: Vec<Sc> = Vec::new();
    let mut segs: Vec<Segment> = Vec::new();
    let mut sc_of_start = vec![usize::MAX; m.num_half_edges()];
    let mut sc_of_back = vec![usize::MAX; m.num_half_edges()];
    for c in 0..m.num_half_edges() {
        if !m.corner_contains(c, &right) {
            continue;
        }
        let tr = trace_right(m, c, None, budget);
        let (corner, length) = match tr.end {
            HorizontalEnd::Vertex { corner, length } => (corner, length),
            HorizontalEnd::Budget { crossings, length } => {
                return Err(CylinderError::TraceBudgetExceeded {
                    corner: c,
                    crossings,
                    length: format!("{:.6}", length.to_f64()),
                })
            }
            HorizontalEnd::TooLong => unreachable!("no length bound"),
        };
        let back = crate::surface::trace::corner_with(m, corner, &left, true);
        let first = segs.len();
        segs.extend(tr.segments);
        let idx = scs.len();
        sc_of_start[c] = idx;
        sc_of_back[back] = idx;
        scs.push(Sc {
            start: c,
            back,
            length,
            segs: (first..segs.len()).collect(),
        });
    }
    let mut sc_owner = vec![usize::MAX; segs.len()];
    for (i, sc) in scs.iter().enumerate() {
        for &g in &sc.segs {
            sc_owner[g] = i;
        }
    }
    let n = scs.len();
    let next_with = |i: usize, ccw: bool| -> usize {
        let b = scs[i].back;
        let from = if ccw { m.ccw_corner(b) } else { m.cw_corner(b) };
        let r = crate::surface::trace::corner_with(m, from, &right, ccw);
        sc_of_start[r]
    };
    let bottom_next: Vec<usize> = (0..n).map(|i| next_with(i, false)).collect();
    let top_next: Vec<usize> = (0..n).map(|i| next_with(i, true)).collect();
    if bottom_next.iter().chain(&top_next).any(|&j| j == usize::MAX) {
        return Err(CylinderError::NotPeriodic("unmatched separatrix".into()));
    }
    let bottom_cycles = cycles(&bottom_next);
    let top_cycles = cycles(&top_next);
    if bottom_cycles.len() != top_cycles.len() {
        return Err(CylinderError::NotPeriodic("boundary cycles do not pair up".into()));
    }
    let mut cyl_above = vec![0; n];
    for (ci, cyc) in bottom_cycles.iter().enumerate() {
        for &i in cyc {
            cyl_above[i] = ci;
        }
    }
    let mut top_cycle_of = vec![0; n];
    for (ti, cyc) in top_cycles.iter().enumerate() {
        for &i in cyc {
            top_cycle_of[i] = ti;
        }
    }

    let mut by_tri = vec![Vec::new(); m.num_triangles()];
    for (g, sg) in segs.iter().enumerate() {
        by_tri[sg.tri].push(g);
    }
    let positions = |cyc: &[usize]| -> Vec<QuadNum> {
        let mut acc = k.zero();
        cyc.iter()
            .map(|&i| {
                let p = acc.clone();
                acc = &acc + &scs[i].length;
                p
            })
            .collect()
    };

    // pass 1: height, matching top cycle, and offset of the top chain
    struct Probe {
        top: usize,
        h: QuadNum,
        shift: QuadNum,
    }
    let fractions = [(1, 2), (1, 3), (2, 3), (1, 5), (2, 5), (3, 7), (5, 11), (7, 13)];
    let mut probes = Vec::with_capacity(bottom_cycles.len());
    for cyc in &bottom_cycles {
        let pos_b = positions(cyc);
        let mut found = None;
        'search: for (bi, &b) in cyc.iter().enumerate() {
            for &(fp, fq) in &fractions {
                let a = scs[b].length.mul_rat(&crate::exactfield::Rational::new(fp.into(), fq.into()));
                let Some(g) = scs[b].segs.iter().copied().find(|&g| {
                    let sg = &segs[g];
                    let span = &sg.x1 - &sg.x0;
                    a > sg.offset && a < &sg.offset + &span
                }) else {
                    continue;
                };
                let sg = &segs[g];
                let start = Vec2::new(&sg.x0 + &(&a - &sg.offset), sg.y.clone());
                match trace_up(m, sg.tri, start, &segs, &by_tri, budget) {
                    VerticalEnd::Segment { seg, height, x } => {
                        let hit = &segs[seg];
                        let s_idx = sc_owner[seg];
                        let a2 = &hit.offset + &(&x - &hit.x0);
                        let top = top_cycle_of[s_idx];
                        let pos_t = positions(&top_cycles[top]);
                        let j = top_cycles[top].iter().position(|&i| i == s_idx).expect("member");
                        // left end of s sits at pos_b[bi] + a - a2 in bottom coordinates
                        let shift = &(&(&pos_b[bi] + &a) - &a2) - &pos_t[j];
                        found = Some(Probe { top, h: height, shift });
                        break 'search;
                    }
                    VerticalEnd::Vertex => continue,
                    VerticalEnd::Budget => {
                        return Err(CylinderError::NotPeriodic("vertical trace did not close".into()))
                    }
                }
            }
        }
        probes.push(found.ok_or_else(|| CylinderError::NotPeriodic("no clean vertical probe".into()))?);
    }
    let mut cyl_of_top = vec![usize::MAX; top_cycles.len()];
    for (ci, p) in probes.iter().enumerate() {
        cyl_of_top[p.top] = ci;
    }
    if cyl_of_top.contains(&usize::MAX) {
        return Err(CylinderError::NotPeriodic("top boundaries matched twice".into()));
    }

    // pass 2: widths and twists
    let mut cylinders = Vec::with_capacity(bottom_cycles.len());
    for (ci, cyc) in bottom_cycles.iter().enumerate() {
        let p = &probes[ci];
        let pos_b = positions(cyc);
        let tcyc = &top_cycles[p.top];
        let pos_t = positions(tcyc);
        let w = cyc.iter().fold(k.zero(), |acc, &i| &acc + &scs[i].length);
        let wt = tcyc.iter().fold(k.zero(), |acc, &i| &acc + &scs[i].length);
        if w != wt {
            return Err(CylinderError::NotPeriodic("top and bottom lengths differ".into()));
        }
        let mut best_same: Option<QuadNum> = None;
        let mut best_any: Option<QuadNum> = None;
        for (bi, &b) in cyc.iter().enumerate() {
            let below = cyl_of_top[top_cycle_of[b]];
            for (tj, &t) in tcyc.iter().enumerate() {
                let above = cyl_above[t];
                let off = (&(&pos_t[tj] + &p.shift) - &pos_b[bi]).rem_euclid(&w);
                let upd = |best: &mut Option<QuadNum>| {
                    if best.as_ref().is_none_or(|x| &off < x) {
                        *best = Some(off.clone());
                    }
                };
                if below == above {
                    upd(&mut best_same);
                }
                upd(&mut best_any);
            }
        }
        let t = best_same.or(best_any).expect("nonempty boundary");
        cylinders.push(Cylinder { w, h: p.h.clone(), t });
    }
    let total = cylinders.iter().fold(k.zero(), |acc, c| &acc + &(&c.w * &c.h));
    if total != s.area() {
        return Err(CylinderError::NotPeriodic(format!(
            "cylinder areas sum to {total}, surface area is {}",
            s.area()
        )));
    }
    let saddle_connections = scs
        .iter()
        .map(|sc| SaddleSummary {
            length: sc.length.clone(),
            from_cone: m.origin(sc.start),
            to_cone: m.origin(sc.back),
        })
        .collect();
    let mut dec = CylinderDecomposition {
        direction: dir.clone(),
        cylinders,
        saddle_connections,
        normalized: None,
    };
    dec.normalized = normalize_params(&dec).ok();
    Ok(dec)
}

fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            cyc.push(j);
            j = perm[j];
        }
        out.push(cyc);
    }
    out
}

/// Numbers three cylinders so that `w3 = w1 + w2`, choosing the
/// lexicographically first valid numbering.
pub fn normalize_params(dec: &CylinderDecomposition) -> Result<NormalizedParams, CylinderError> {
    let c = &dec.cylinders;
    if c.len() != 3 {
        return Err(CylinderError::WrongCylinderCount(c.len()));
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for [i, j, l] in PERMS {
        if c[l].w == &c[i].w + &c[j].w {
            let s1 = &c[i].h + &c[l].h;
            let s2 = &c[j].h + &c[l].h;
            let tau1 = &c[i].t + &c[l].t;
            let tau2 = &c[j].t + &c[l].t;
            let m = &(&c[i].w * &s1) + &(&c[j].w * &s2);
            return Ok(NormalizedParams {
                w1: c[i].w.clone(),
                w2: c[j].w.clone(),
                w3: c[l].w.clone(),
                s1,
                s2,
                tau1,
                tau2,
                m,
                order: [i, j, l],
            });
        }
    }
    Err(CylinderError::NoSumRelation)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LmVerdict {
    Member { m: QuadNum },
    Violated { equation: u8, residual: QuadNum },
}

/// The two conjugate equations `w1 s1' + w2 s2' = 0`, `w1 tau1' + w2 tau2' = 0`
/// (primes denote Galois conjugates) and the area value `m = w1 s1 + w2 s2`.
pub fn check_lm(np: &NormalizedParams) -> Result<LmVerdict, CylinderError> {
    let all = [&np.w1, &np.w2, &np.s1, &np.s2, &np.tau1, &np.tau2];
    if all.iter().any(|x| x.d() != np.w1.d()) {
        return Err(CylinderError::MixedField);
    }
    let e1 = &(&np.w1 * &np.s1.conj()) + &(&np.w2 * &np.s2.conj());
    if !e1.is_zero() {
        return Ok(LmVerdict::Violated { equation: 1, residual: e1 });
    }
    let e2 = &(&np.w1 * &np.tau1.conj()) + &(&np.w2 * &np.tau2.conj());
    if !e2.is_zero() {
        return Ok(LmVerdict::Violated { equation: 2, residual: e2 });
    }
    let m = &(&np.w1 * &np.s1) + &(&np.w2 * &np.s2);
    Ok(LmVerdict::Member { m })
}

/// What happened when one saddle-connection direction was decomposed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Periodic { cylinders: usize },
    NotPeriodic { reason: String },
    BudgetExceeded { corner: usize, crossings: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub direction: Direction,
    pub outcome: ProbeOutcome,
}

/// A finite probe of complete periodicity: every direction of a saddle
/// connection of length at most `bound`, up to sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub bound: QuadNum,
    pub directions: Vec<ProbeEntry>,
    /// Directions that hold a saddle connection but did not decompose.
    pub failures: usize,
}

/// Line representative: `x > 0`, or `x = 0` and `y > 0`.
fn line_direction(v: &Vec2<QuadNum>) -> Result<Direction, CylinderError> {
    let flip = v.x.is_negative() || (v.x.is_zero() && v.y.is_negative());
    let v = if flip { v.neg() } else { v.clone() };
    Direction::new(v.x, v.y)
}

pub fn periodicity_probe(
    s: &TranslationSurface,
    bound: &QuadNum,
    trace_budget: usize,
) -> Result<PeriodicityReport, CylinderError> {
    use rayon::prelude::*;
    let scs = crate::saddles::enumerate_saddle_connections(s, bound, crate::saddles::DEFAULT_MAX_STEPS)?;
    let mut dirs: Vec<Direction> = scs
        .iter()
        .map(|c| line_direction(&c.holonomy))
        .collect::<Result<_, _>>()?;
    dirs.sort_by(|a, b| crate::geometry::lex_cmp(&a.vector(), &b.vector()));
    dirs.dedup();
    let directions: Vec<ProbeEntry> = dirs
        .into_par_iter()
        .map(|direction| {
            let outcome = match periodic_direction_decompose(s, &direction, trace_budget) {
                Ok(d) => ProbeOutcome::Periodic {
                    cylinders: d.cylinders.len(),
                },
                Err(CylinderError::NotPeriodic(reason)) => ProbeOutcome::NotPeriodic { reason },
                Err(CylinderError::TraceBudgetExceeded { corner, crossings, .. }) => {
                    ProbeOutcome::BudgetExceeded { corner, crossings }
                }
                Err(e) => return Err(e),
            };
            Ok(ProbeEntry { direction, outcome })
        })
        .collect::<Result<_, CylinderError>>()?;
    let failures = directions
        .iter()
        .filter(|e| !matches!(e.outcome, ProbeOutcome::Periodic { .. }))
        .count();
    Ok(PeriodicityReport {
        bound: bound.clone(),
        directions,
        failures,
    })
}
