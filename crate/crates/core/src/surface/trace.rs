//! Exact straight-line tracing of horizontal and vertical trajectories.
//!
//! Points are kept in triangle-local coordinates: the origin of half-edge
//! `3t` sits at `(0, 0)` and the triangle's corners follow its edges.

use super::mesh::Mesh;
use crate::exactfield::QuadNum;
use crate::geometry::Vec2;

pub(crate) type P = Vec2<QuadNum>;

/// Local position of the origin of half-edge `h` within its triangle.
pub(crate) fn corner_pos(m: &Mesh<QuadNum>, h: usize) -> P {
    let t = h / 3;
    let base = m.vec[3 * t].zero_like();
    match h % 3 {
        0 => base,
        1 => m.vec[3 * t].clone(),
        _ => m.vec[3 * t].add(&m.vec[3 * t + 1]),
    }
}

/// A piece of a horizontal trajectory inside one triangle.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub tri: usize,
    pub y: QuadNum,
    pub x0: QuadNum,
    pub x1: QuadNum,
    /// Distance from the start of the trajectory to `x0`.
    pub offset: QuadNum,
}

#[derive(Debug, Clone)]
pub(crate) enum HorizontalEnd {
    /// Reached a vertex; `corner` is the corner there holding the backward ray.
    Vertex { corner: usize, length: QuadNum },
    /// Length bound passed without reaching a vertex.
    TooLong,
    /// Step budget used up.
    Budget { crossings: usize, length: QuadNum },
}

#[derive(Debug, Clone)]
pub(crate) struct HorizontalTrace {
    pub end: HorizontalEnd,
    pub segments: Vec<Segment>,
}

/// Where a horizontal line at height `y` leaves triangle `t` to the right of
/// `x`, skipping the edge `skip` (the entry edge) if given. Returns either a
/// vertex (`Ok(corner)`) or an edge with the exit point.
fn exit_right(
    m: &Mesh<QuadNum>,
    t: usize,
    y: &QuadNum,
    x: &QuadNum,
    skip: Option<usize>,
) -> Option<Result<usize, (usize, QuadNum)>> {
    let mut best: Option<(QuadNum, Result<usize, (usize, QuadNum)>)> = None;
    let mut consider = |cx: QuadNum, what: Result<usize, (usize, QuadNum)>| {
        if &cx > x && best.as_ref().is_none_or(|(bx, _)| &cx > bx) {
            best = Some((cx, what));
        }
    };
    for j in 3 * t..3 * t + 3 {
        let a = corner_pos(m, j);
        if &a.y == y {
            consider(a.x.clone(), Ok(j));
        }
        if Some(j) == skip {
            continue;
        }
        let b = a.add(&m.vec[j]);
        let sa = (&a.y - y).sign();
        let sb = (&b.y - y).sign();
        if sa * sb < 0 {
            let dy = &b.y - &a.y;
            let cx = &a.x + &(&(&(y - &a.y) * &(&b.x - &a.x)) / &dy);
            consider(cx.clone(), Err((j, cx)));
        }
    }
    best.map(|(_, w)| w)
}

/// Traces the rightward horizontal ray leaving the origin of corner `c`.
pub(crate) fn trace_right(
    m: &Mesh<QuadNum>,
    c: usize,
    max_len: Option<&QuadNum>,
    budget: usize,
) -> HorizontalTrace {
    let e = &m.vec[c];
    let zero = e.x.zero_like();
    if e.y.is_zero() && e.x.is_positive() {
        let len = e.x.clone();
        let seg_above = Segment {
            tri: c / 3,
            y: corner_pos(m, c).y,
            x0: corner_pos(m, c).x,
            x1: &corner_pos(m, c).x + &len,
            offset: zero.clone(),
        };
        let g = m.twin[c];
        let og = corner_pos(m, g);
        let seg_below = Segment {
            tri: g / 3,
            y: og.y.clone(),
            x0: &og.x - &len,
            x1: og.x.clone(),
            offset: zero,
        };
        if max_len.is_some_and(|l| &len > l) {
            return HorizontalTrace {
                end: HorizontalEnd::TooLong,
                segments: vec![],
            };
        }
        return HorizontalTrace {
            end: HorizontalEnd::Vertex { corner: g, length: len },
            segments: vec![seg_above, seg_below],
        };
    }
    let mut t = c / 3;
    let mut p = corner_pos(m, c);
    let mut skip: Option<usize> = None;
    let mut travelled = zero;
    let mut segments = Vec::new();
    for _ in 0..budget {
        let ex = match exit_right(m, t, &p.y, &p.x, skip) {
            Some(w) => w,
            None => unreachable!("horizontal chord must leave the triangle"),
        };
        let exit_x = match &ex {
            Ok(j) => corner_pos(m, *j).x,
            Err((_, x)) => x.clone(),
        };
        segments.push(Segment {
            tri: t,
            y: p.y.clone(),
            x0: p.x.clone(),
            x1: exit_x.clone(),
            offset: travelled.clone(),
        });
        travelled = &travelled + &(&exit_x - &p.x);
        if max_len.is_some_and(|l| &travelled > l) {
            return HorizontalTrace {
                end: HorizontalEnd::TooLong,
                segments,
            };
        }
        match ex {
            Ok(j) => {
                return HorizontalTrace {
                    end: HorizontalEnd::Vertex {
                        corner: j,
                        length: travelled,
                    },
                    segments,
                }
            }
            Err((j, x)) => {
                // point on edge j, offset u from its origin
                let a = corner_pos(m, j);
                let u = Vec2::new(&x - &a.x, &p.y - &a.y);
                let g = m.twin[j];
                let og = corner_pos(m, g);
                p = og.add(&u.sub(&m.vec[j]));
                t = g / 3;
                skip = Some(g);
            }
        }
    }
    HorizontalTrace {
        end: HorizontalEnd::Budget {
            crossings: budget,
            length: travelled,
        },
        segments,
    }
}

/// Result of an upward vertical trace.
pub(crate) enum VerticalEnd {
    /// Hit the segment with index `seg` at height `height` above the start,
    /// at local abscissa `x`.
    Segment { seg: usize, height: QuadNum, x: QuadNum },
    /// Passed through a vertex or the end of a segment; retry elsewhere.
    Vertex,
    Budget,
}

/// Traces upward from local point `p` of triangle `t` until it meets one of
/// `segs` (indexed by triangle through `by_tri`).
pub(crate) fn trace_up(
    m: &Mesh<QuadNum>,
    mut t: usize,
    mut p: P,
    segs: &[Segment],
    by_tri: &[Vec<usize>],
    budget: usize,
) -> VerticalEnd {
    let mut height = p.x.zero_like();
    let mut first = true;
    let mut skip: Option<usize> = None;
    for _ in 0..budget {
        // nearest segment above p in this triangle
        let mut hit: Option<(usize, QuadNum)> = None;
        for &s in &by_tri[t] {
            let sg = &segs[s];
            let above = if first { sg.y > p.y } else { sg.y >= p.y };
            if !above || p.x < sg.x0 || p.x > sg.x1 {
                continue;
            }
            if p.x == sg.x0 || p.x == sg.x1 {
                return VerticalEnd::Vertex;
            }
            if hit.as_ref().is_none_or(|(_, y)| &sg.y < y) {
                hit = Some((s, sg.y.clone()));
            }
        }
        if let Some((s, y)) = hit {
            return VerticalEnd::Segment {
                seg: s,
                height: &height + &(&y - &p.y),
                x: p.x,
            };
        }
        first = false;
        // leave through the top
        let mut exit: Option<(usize, QuadNum)> = None;
        for j in 3 * t..3 * t + 3 {
            let a = corner_pos(m, j);
            if a.x == p.x && a.y > p.y {
                return VerticalEnd::Vertex;
            }
            if Some(j) == skip {
                continue;
            }
            let b = a.add(&m.vec[j]);
            let sa = (&a.x - &p.x).sign();
            let sb = (&b.x - &p.x).sign();
            if sa * sb < 0 {
                let dx = &b.x - &a.x;
                let cy = &a.y + &(&(&(&p.x - &a.x) * &(&b.y - &a.y)) / &dx);
                if cy > p.y && exit.as_ref().is_none_or(|(_, y)| &cy > y) {
                    exit = Some((j, cy));
                }
            }
        }
        let Some((j, y)) = exit else {
            return VerticalEnd::Vertex;
        };
        height = &height + &(&y - &p.y);
        let a = corner_pos(m, j);
        let u = Vec2::new(&p.x - &a.x, &y - &a.y);
        let g = m.twin[j];
        p = corner_pos(m, g).add(&u.sub(&m.vec[j]));
        t = g / 3;
        skip = Some(g);
    }
    VerticalEnd::Budget
}

/// The corner at the origin of `h`'s triangle-mate that holds direction
/// `w`, searching around the vertex starting at `h`.
pub(crate) fn corner_with(m: &Mesh<QuadNum>, h: usize, w: &P, ccw: bool) -> usize {
    let mut c = h;
    for _ in 0..m.num_half_edges() {
        if m.corner_contains(c, w) {
            return c;
        }
        c = if ccw { m.ccw_corner(c) } else { m.cw_corner(c) };
    }
    unreachable!("every direction lies in some corner")
}
