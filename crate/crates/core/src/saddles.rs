//! Saddle connections, the horizontal rel interval and its boundary.
//!
//! Enumeration develops, from every corner, the wedge of directions that
//! leave the corner, one triangle at a time. A wedge is split whenever a
//! vertex is seen strictly inside it, and dropped as soon as its window on
//! the edge being crossed lies outside the search disk.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactfield::QuadNum;
use crate::geometry::{lex_cmp, Vec2};
use crate::surface::mesh::{next, prev, Mesh};
use crate::surface::trace::{corner_with, trace_right, HorizontalEnd};
use crate::surface::{SurfaceError, TranslationSurface};

pub use crate::surface::rel::{DegenerationKind, DegenerationReport};

/// Default cap on triangle crossings for one enumeration.
pub const DEFAULT_MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SaddleError {
    #[error("search exceeded {0} triangle crossings; lower the bound or raise the cap")]
    BoundTooLarge(usize),
    #[error("bound must be positive")]
    NonPositiveBound,
    #[error("surface lies in {0}, expected H(1,1)")]
    WrongStratum(String),
    #[error("{0} is not an endpoint of the horizontal interval")]
    NotOnBoundary(String),
    #[error("degeneration did not occur at the boundary vector")]
    NoDegeneration,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SaddleConnection {
    pub holonomy: Vec2<QuadNum>,
    pub from_cone: usize,
    pub to_cone: usize,
}

impl SaddleConnection {
    pub fn is_horizontal(&self) -> bool {
        self.holonomy.y.is_zero()
    }
}

fn sort_connections(v: &mut [SaddleConnection]) {
    v.sort_by(|a, b| {
        lex_cmp(&a.holonomy, &b.holonomy)
            .then(a.from_cone.cmp(&b.from_cone))
            .then(a.to_cone.cmp(&b.to_cone))
    });
}

/// Squared distance test: does the segment `[p, q]` come within `sqrt(l2)`
/// of the origin?
fn segment_within(p: &Vec2<QuadNum>, q: &Vec2<QuadNum>, l2: &QuadNum) -> bool {
    let d = q.sub(p);
    if !p.dot(&d).is_negative() {
        return &p.norm2() <= l2;
    }
    if !q.dot(&d).is_positive() {
        return &q.norm2() <= l2;
    }
    let c = p.cross(q);
    &(&c * &c) <= &(l2 * &d.norm2())
}

/// Point where the ray through `r` meets the line through `o` and `e`.
fn ray_hit(r: &Vec2<QuadNum>, o: &Vec2<QuadNum>, e: &Vec2<QuadNum>) -> Vec2<QuadNum> {
    let d = e.sub(o);
    let num = r.cross(o);
    if num.is_zero() {
        return o.clone();
    }
    let s = -&(&num / &r.cross(&d));
    o.add(&d.scale(&s))
}

struct Wedge {
    /// Edge about to be crossed, running from the clockwise side `o` to
    /// the counterclockwise side `e`.
    edge: usize,
    o: Vec2<QuadNum>,
    e: Vec2<QuadNum>,
    lo: Vec2<QuadNum>,
    hi: Vec2<QuadNum>,
}

impl Wedge {
    fn visible(&self, l2: &QuadNum) -> bool {
        let p = ray_hit(&self.lo, &self.o, &self.e);
        let q = ray_hit(&self.hi, &self.o, &self.e);
        segment_within(&p, &q, l2)
    }
}

fn from_corner(
    m: &Mesh<QuadNum>,
    h: usize,
    l2: &QuadNum,
    steps: &AtomicUsize,
    cap: usize,
) -> Result<Vec<SaddleConnection>, SaddleError> {
    let from = m.vertex[h];
    let mut out = Vec::new();
    let b = m.vec[h].clone();
    if &b.norm2() <= l2 {
        out.push(SaddleConnection {
            holonomy: b.clone(),
            from_cone: from,
            to_cone: m.vertex[next(h)],
        });
    }
    let c = m.vec[prev(h)].neg();
    let mut stack = vec![Wedge {
        edge: next(h),
        o: b.clone(),
        e: c.clone(),
        lo: b,
        hi: c,
    }];
    while let Some(w) = stack.pop() {
        if !w.visible(l2) {
            continue;
        }
        if steps.fetch_add(1, Ordering::Relaxed) >= cap {
            return Err(SaddleError::BoundTooLarge(cap));
        }
        let g = m.twin[w.edge];
        let f = w.o.add(&m.vec[next(g)]);
        let left_of_lo = w.lo.cross(&f).is_positive();
        let right_of_hi = f.cross(&w.hi).is_positive();
        if left_of_lo && right_of_hi {
            if &f.norm2() <= l2 {
                out.push(SaddleConnection {
                    holonomy: f.clone(),
                    from_cone: from,
                    to_cone: m.vertex[prev(g)],
                });
            }
            stack.push(Wedge {
                edge: next(g),
                o: w.o,
                e: f.clone(),
                lo: w.lo,
                hi: f.clone(),
            });
            stack.push(Wedge {
                edge: prev(g),
                o: f.clone(),
                e: w.e,
                lo: f,
                hi: w.hi,
            });
        } else if !left_of_lo {
            stack.push(Wedge {
                edge: prev(g),
                o: f,
                e: w.e,
                lo: w.lo,
                hi: w.hi,
            });
        } else {
            stack.push(Wedge {
                edge: next(g),
                o: w.o,
                e: f,
                lo: w.lo,
                hi: w.hi,
            });
        }
    }
    Ok(out)
}

/// All saddle connections with squared length at most `l2`, sorted by
/// holonomy. Every vertex of the surface counts as an endpoint.
pub fn enumerate_within_norm2(
    s: &TranslationSurface,
    l2: &QuadNum,
    max_steps: usize,
) -> Result<Vec<SaddleConnection>, SaddleError> {
    if !l2.is_positive() {
        return Err(SaddleError::NonPositiveBound);
    }
    let m = s.mesh();
    let steps = AtomicUsize::new(0);
    let parts: Vec<Vec<SaddleConnection>> = (0..m.num_half_edges())
        .into_par_iter()
        .map(|h| from_corner(m, h, l2, &steps, max_steps))
        .collect::<Result<_, _>>()?;
    let mut all: Vec<SaddleConnection> = parts.into_iter().flatten().collect();
    sort_connections(&mut all);
    Ok(all)
}

/// All saddle connections of length at most `bound`.
pub fn enumerate_saddle_connections(
    s: &TranslationSurface,
    bound: &QuadNum,
    max_steps: usize,
) -> Result<Vec<SaddleConnection>, SaddleError> {
    if !bound.is_positive() {
        return Err(SaddleError::NonPositiveBound);
    }
    enumerate_within_norm2(s, &(bound * bound), max_steps)
}

/// One side of the horizontal interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Endpoint {
    Finite {
        value: QuadNum,
        witness: SaddleConnection,
    },
    /// No witness of length at most `bound` exists.
    Infinite { bound: QuadNum },
}

impl Endpoint {
    pub fn value(&self) -> Option<&QuadNum> {
        match self {
            Endpoint::Finite { value, .. } => Some(value),
            Endpoint::Infinite { .. } => None,
        }
    }
}

/// The maximal open interval of horizontal rel moves of the cone class
/// `moved` that stay inside `H(1,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalInterval {
    pub moved: usize,
    pub left: Endpoint,
    pub right: Endpoint,
}

fn require_h11(s: &TranslationSurface) -> Result<[usize; 2], SaddleError> {
    let st = s.stratum();
    let ids = s.singular_ids();
    match (st.is_h11(), ids.as_slice()) {
        (true, &[a, b]) => Ok([a, b]),
        _ => Err(SaddleError::WrongStratum(st.to_string())),
    }
}

/// Shortest horizontal saddle connection leaving `p` in direction `sign`
/// (`+1` right, `-1` left) and ending at a different singularity. Regular
/// vertices are passed straight through.
fn nearest_horizontal(
    s: &TranslationSurface,
    p: usize,
    sign: i64,
    bound: &QuadNum,
    max_steps: usize,
) -> Result<Option<SaddleConnection>, SaddleError> {
    // a left-pointing search is a right-pointing one on the mirror image
    let mirrored;
    let surf = if sign > 0 {
        s
    } else {
        mirrored = s.mirror_x();
        &mirrored
    };
    let m = surf.mesh();
    let k = s.field();
    let east = Vec2::new(k.one(), k.zero());
    let singular = s.singular_ids();
    let mut best: Option<(QuadNum, usize)> = None;
    for c0 in m.corners_of(p).into_iter().filter(|&c| m.corner_contains(c, &east)) {
        let mut c = c0;
        let mut total = k.zero();
        loop {
            let left = bound - &total;
            let tr = trace_right(m, c, Some(&left), max_steps);
            match tr.end {
                HorizontalEnd::TooLong => break,
                HorizontalEnd::Budget { .. } => return Err(SaddleError::BoundTooLarge(max_steps)),
                HorizontalEnd::Vertex { corner, length } => {
                    total = &total + &length;
                    let v = m.vertex[corner];
                    if !singular.contains(&v) {
                        c = corner_with(m, corner, &east, true);
                        continue;
                    }
                    if v != p && best.as_ref().is_none_or(|(l, _)| &total < l) {
                        best = Some((total, v));
                    }
                    break;
                }
            }
        }
    }
    Ok(best.map(|(len, to)| SaddleConnection {
        holonomy: Vec2::new(if sign > 0 { len } else { -&len }, k.zero()),
        from_cone: p,
        to_cone: to,
    }))
}

/// Horizontal rel interval of the lower-numbered zero, with witnesses of
/// length up to `bound`.
pub fn horizontal_interval(
    s: &TranslationSurface,
    bound: &QuadNum,
    max_steps: usize,
) -> Result<HorizontalInterval, SaddleError> {
    let [p, _] = require_h11(s)?;
    if !bound.is_positive() {
        return Err(SaddleError::NonPositiveBound);
    }
    let side = |sign: i64| -> Result<Endpoint, SaddleError> {
        Ok(match nearest_horizontal(s, p, sign, bound, max_steps)? {
            Some(w) => Endpoint::Finite {
                value: w.holonomy.x.clone(),
                witness: w,
            },
            None => Endpoint::Infinite { bound: bound.clone() },
        })
    };
    Ok(HorizontalInterval {
        moved: p,
        left: side(-1)?,
        right: side(1)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "membership", rename_all = "snake_case")]
pub enum HcMembership {
    /// No horizontal saddle connection between the zeros up to `bound`.
    InLmX { bound: QuadNum },
    InHc { s: QuadNum },
}

pub fn hc_membership(
    s: &TranslationSurface,
    bound: &QuadNum,
    max_steps: usize,
) -> Result<HcMembership, SaddleError> {
    let iv = horizontal_interval(s, bound, max_steps)?;
    let l = iv.left.value().map(|x| -x);
    let r = iv.right.value().cloned();
    Ok(match (l, r) {
        (None, None) => HcMembership::InLmX { bound: bound.clone() },
        (Some(a), None) | (None, Some(a)) => HcMembership::InHc { s: a },
        (Some(a), Some(b)) => HcMembership::InHc { s: if a < b { a } else { b } },
    })
}

/// Moves the lower-numbered zero horizontally by `x`, which must be a
/// finite endpoint of the horizontal interval, and reports the limit.
pub fn classify_degeneration(
    s: &TranslationSurface,
    x: &QuadNum,
    max_steps: usize,
) -> Result<DegenerationReport, SaddleError> {
    let [p, _] = require_h11(s)?;
    let bound = x.abs();
    if bound.is_zero() {
        return Err(SaddleError::NotOnBoundary(x.to_string()));
    }
    let iv = horizontal_interval(s, &bound, max_steps)?;
    if iv.left.value() != Some(x) && iv.right.value() != Some(x) {
        return Err(SaddleError::NotOnBoundary(x.to_string()));
    }
    let k = s.field();
    match s.rel_translate(&Vec2::new(x.clone(), k.zero()), p)? {
        crate::surface::rel::RelOutcome::Degenerate(r) => Ok(r),
        crate::surface::rel::RelOutcome::Surface(_) => Err(SaddleError::NoDegeneration),
    }
}
