//! Polygon validation and triangulation.

use std::collections::HashMap;

use super::{EdgeRef, Mesh, SurfaceError};
use crate::geometry::{Scalar, Vec2};

fn vertices<S: Scalar>(edges: &[Vec2<S>]) -> Vec<Vec2<S>> {
    let mut out = Vec::with_capacity(edges.len());
    let mut p = edges[0].zero_like();
    for e in edges {
        out.push(p.clone());
        p = p.add(e);
    }
    out
}

fn orient<S: Scalar>(a: &Vec2<S>, b: &Vec2<S>, c: &Vec2<S>) -> i8 {
    b.sub(a).cross(&c.sub(a)).signum()
}

/// Whether `p` lies on the closed segment `[a, b]`.
fn on_segment<S: Scalar>(a: &Vec2<S>, b: &Vec2<S>, p: &Vec2<S>) -> bool {
    orient(a, b, p) == 0 && p.sub(a).dot(&p.sub(b)).signum() <= 0
}

fn segments_meet<S: Scalar>(a: &Vec2<S>, b: &Vec2<S>, c: &Vec2<S>, d: &Vec2<S>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

fn is_simple_ccw<S: Scalar>(pts: &[Vec2<S>]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let mut area2 = pts[0].zero_like().x;
    for i in 0..n {
        area2 = area2.add(&pts[i].cross(&pts[(i + 1) % n]));
    }
    if area2.signum() <= 0 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        if a.sub(b).is_zero() {
            return false;
        }
        for j in i + 1..n {
            let (c, d) = (&pts[j], &pts[(j + 1) % n]);
            if j == i + 1 {
                // consecutive edges may only share their common vertex
                let u = b.sub(a);
                let v = d.sub(c);
                if u.cross(&v).signum() == 0 && u.dot(&v).signum() < 0 {
                    return false;
                }
                continue;
            }
            if i == 0 && j == n - 1 {
                let u = b.sub(a);
                let v = d.sub(c);
                if u.cross(&v).signum() == 0 && u.dot(&v).signum() < 0 {
                    return false;
                }
                continue;
            }
            if segments_meet(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Ear-clipping triangulation of a simple counterclockwise polygon given by
/// its vertices. Returns vertex-index triples, each counterclockwise.
pub fn triangulate_polygon<S: Scalar>(pts: &[Vec2<S>]) -> Option<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut out = Vec::with_capacity(pts.len().saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&j| {
            let a = idx[(j + m - 1) % m];
            let t = idx[j];
            let b = idx[(j + 1) % m];
            if orient(&pts[a], &pts[t], &pts[b]) <= 0 {
                return false;
            }
            idx.iter().all(|&k| {
                k == a || k == t || k == b || !in_closed_triangle(&pts[a], &pts[t], &pts[b], &pts[k])
            })
        })?;
        let a = idx[(ear + m - 1) % m];
        let b = idx[(ear + 1) % m];
        out.push([a, idx[ear], b]);
        idx.remove(ear);
    }
    if orient(&pts[idx[0]], &pts[idx[1]], &pts[idx[2]]) <= 0 {
        return None;
    }
    out.push([idx[0], idx[1], idx[2]]);
    Some(out)
}

fn in_closed_triangle<S: Scalar>(a: &Vec2<S>, b: &Vec2<S>, c: &Vec2<S>, p: &Vec2<S>) -> bool {
    orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0
}

pub(super) fn build_mesh<S: Scalar>(
    polygons: &[Vec<Vec2<S>>],
    gluing: Vec<(EdgeRef, EdgeRef)>,
) -> Result<(Mesh<S>, Vec<(EdgeRef, EdgeRef)>), SurfaceError> {
    if polygons.is_empty() {
        return Err(SurfaceError::BadMatching("no polygons".into()));
    }
    let tag = polygons
        .iter()
        .flatten()
        .next()
        .ok_or(SurfaceError::NonSimplePolygon(0))?
        .x
        .field_tag();
    for v in polygons.iter().flatten() {
        if v.x.field_tag() != tag || v.y.field_tag() != tag {
            return Err(SurfaceError::MixedField);
        }
    }
    for (p, edges) in polygons.iter().enumerate() {
        if edges.len() < 3 {
            return Err(SurfaceError::NonSimplePolygon(p));
        }
        let mut sum = edges[0].zero_like();
        for e in edges {
            sum = sum.add(e);
        }
        if !sum.is_zero() {
            return Err(SurfaceError::UnclosedPolygon(p));
        }
    }

    // every edge glued exactly once, to an opposite edge
    let mut partner: HashMap<EdgeRef, EdgeRef> = HashMap::new();
    for &(x, y) in &gluing {
        for r in [x, y] {
            if r.0 >= polygons.len() || r.1 >= polygons[r.0].len() {
                return Err(SurfaceError::BadMatching(format!("edge {r:?} does not exist")));
            }
        }
        if x == y {
            return Err(SurfaceError::BadMatching(format!("edge {x:?} glued to itself")));
        }
        if partner.insert(x, y).is_some() || partner.insert(y, x).is_some() {
            return Err(SurfaceError::BadMatching("edge glued twice".into()));
        }
        let (u, v) = (&polygons[x.0][x.1], &polygons[y.0][y.1]);
        if !u.add(v).is_zero() {
            return Err(SurfaceError::EdgeMismatch(x.0, x.1, y.0, y.1));
        }
    }
    let total: usize = polygons.iter().map(Vec::len).sum();
    if partner.len() != total {
        return Err(SurfaceError::BadMatching(format!(
            "{} of {total} edges are unglued",
            total - partner.len()
        )));
    }

    let mut vec = Vec::new();
    let mut twin = Vec::new();
    let mut slot_of: HashMap<EdgeRef, usize> = HashMap::new();
    for (p, edges) in polygons.iter().enumerate() {
        let pts = vertices(edges);
        if !is_simple_ccw(&pts) {
            return Err(SurfaceError::NonSimplePolygon(p));
        }
        let tris = triangulate_polygon(&pts).ok_or(SurfaceError::NonSimplePolygon(p))?;
        let n = pts.len();
        let mut diag: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in tris {
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                let h = vec.len();
                vec.push(pts[v].sub(&pts[u]));
                twin.push(usize::MAX);
                if v == (u + 1) % n {
                    slot_of.insert((p, u), h);
                } else if let Some(&g) = diag.get(&(v, u)) {
                    twin[h] = g;
                    twin[g] = h;
                } else {
                    diag.insert((u, v), h);
                }
            }
        }
    }
    for (x, y) in &partner {
        twin[slot_of[x]] = slot_of[y];
    }
    debug_assert!(twin.iter().all(|&t| t != usize::MAX));
    Ok((Mesh::from_parts(vec, twin), gluing))
}
