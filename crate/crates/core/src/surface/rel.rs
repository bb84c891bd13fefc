//! Rel deformations: moving one cone point while fixing absolute periods.
//!
//! The deformation is followed along the straight path `lambda -> lambda v`,
//! `0 <= lambda <= 1`. Along the path the signed area of every triangle is
//! affine in `lambda`, so the first time a triangle flattens is computed
//! exactly; the triangulation is then repaired by a flip, or, if two cone
//! points have met, the path stops.

use serde::Serialize;

use super::mesh::{next, prev, Mesh};
use super::{Surface, SurfaceError, TranslationSurface};
use crate::exactfield::QuadNum;
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegenerationKind {
    /// The two zeros merged into one of angle 6 pi.
    H2Surface,
    /// The surface pinched into two tori sharing one point.
    TwoToriWedge,
    /// A non-separating pinch: one torus whose two marked points are
    /// identified.
    NodalTorus,
}

#[derive(Debug, Clone)]
pub struct DegenerationReport {
    pub kind: DegenerationKind,
    /// The limiting surface (one entry) or the two tori (two entries); in the
    /// wedge case each torus carries the wedge point as its only vertex.
    pub components: Vec<TranslationSurface>,
}

#[derive(Debug, Clone)]
pub enum RelOutcome {
    Surface(TranslationSurface),
    Degenerate(DegenerationReport),
}

impl RelOutcome {
    pub fn surface(self) -> Option<TranslationSurface> {
        match self {
            RelOutcome::Surface(s) => Some(s),
            RelOutcome::Degenerate(_) => None,
        }
    }
}

const MAX_EVENTS: usize = 100_000;

/// Mesh whose stored vectors are the affine extrapolation to `lambda = 0`.
struct Kinetic {
    mesh: Mesh<QuadNum>,
    cls: usize,
    v: Vec2<QuadNum>,
}

impl Kinetic {
    fn coeff(&self, h: usize) -> i32 {
        let m = &self.mesh;
        (m.vertex[next(h)] == self.cls) as i32 - (m.vertex[h] == self.cls) as i32
    }

    fn vec_at(&self, h: usize, lam: &QuadNum) -> Vec2<QuadNum> {
        let base = self.mesh.vec[h].clone();
        match self.coeff(h) {
            0 => base,
            c => {
                let s = self.v.scale(lam);
                if c > 0 {
                    base.add(&s)
                } else {
                    base.sub(&s)
                }
            }
        }
    }

    /// Coefficients `(a0, a1)` of twice the area of `t` as `a0 + a1 lambda`.
    fn area_line(&self, t: usize) -> (QuadNum, QuadNum) {
        let (h0, h1) = (3 * t, 3 * t + 1);
        let e0 = &self.mesh.vec[h0];
        let e1 = &self.mesh.vec[h1];
        let a0 = e0.cross(e1);
        let c0 = self.coeff(h0);
        let c1 = self.coeff(h1);
        let mut a1 = a0.zero_like();
        if c1 != 0 {
            let x = e0.cross(&self.v);
            a1 = if c1 > 0 { &a1 + &x } else { &a1 - &x };
        }
        if c0 != 0 {
            let x = self.v.cross(e1);
            a1 = if c0 > 0 { &a1 + &x } else { &a1 - &x };
        }
        (a0, a1)
    }

    fn area_at(&self, t: usize, lam: &QuadNum) -> QuadNum {
        let (a0, a1) = self.area_line(t);
        &a0 + &(&a1 * lam)
    }

    /// First parameter `>= from` at which a shrinking triangle flattens.
    fn next_event(&self, from: &QuadNum) -> Option<QuadNum> {
        let mut best: Option<QuadNum> = None;
        for t in 0..self.mesh.num_triangles() {
            let (a0, a1) = self.area_line(t);
            if !a1.is_negative() {
                continue;
            }
            let lam = -&(&a0 / &a1);
            let lam = if &lam < from { from.clone() } else { lam };
            if best.as_ref().is_none_or(|b| &lam < b) {
                best = Some(lam);
            }
        }
        best
    }

    fn realized(&self, lam: &QuadNum) -> Mesh<QuadNum> {
        let mut m = self.mesh.clone();
        for h in 0..m.vec.len() {
            m.vec[h] = self.vec_at(h, lam);
        }
        m
    }
}

/// Index of the edge of a flat triangle whose interior holds the third
/// vertex: the longest one.
fn long_edge(m: &Mesh<QuadNum>, t: usize) -> usize {
    (3 * t..3 * t + 3)
        .max_by(|&a, &b| m.vec[a].norm2().cmp(&m.vec[b].norm2()))
        .expect("three edges")
}

impl TranslationSurface {
    /// Moves every vertex in cone class `cls` by `v`, keeping absolute
    /// periods. Returns the deformed surface, or a degeneration report when
    /// the endpoint `v` is exactly where two cone points meet.
    pub fn rel_translate(&self, v: &Vec2<QuadNum>, cls: usize) -> Result<RelOutcome, SurfaceError> {
        let st = self.stratum();
        if !st.is_h11() {
            return Err(SurfaceError::WrongStratum(st.to_string()));
        }
        if !self.singular_ids().contains(&cls) {
            return Err(SurfaceError::NoSuchCone(cls));
        }
        if v.is_zero() {
            return Ok(RelOutcome::Surface(self.clone()));
        }
        let mut k = Kinetic {
            mesh: self.mesh().clone(),
            cls,
            v: v.clone(),
        };
        let one = v.x.one_like();
        let mut lam = v.x.zero_like();
        for _ in 0..MAX_EVENTS {
            let ev = match k.next_event(&lam) {
                Some(e) if e <= one => e,
                _ => {
                    let m = k.realized(&one);
                    return Ok(RelOutcome::Surface(self.with_mesh(m)));
                }
            };
            lam = ev;
            let m = k.realized(&lam);
            let flat: Vec<usize> = (0..m.num_triangles())
                .filter(|&t| k.area_at(t, &lam).is_zero() && k.area_line(t).1.is_negative())
                .collect();
            let collided = flat
                .iter()
                .any(|&t| (3 * t..3 * t + 3).any(|h| m.vec[h].is_zero()));
            if collided {
                if lam == one {
                    return collapse(m, self.label()).map(RelOutcome::Degenerate);
                }
                return Err(SurfaceError::CollisionBeyondBoundary(lam.to_string()));
            }
            let mut flipped = false;
            for &t in &flat {
                let h = long_edge(&m, t);
                let g = m.twin[h];
                if k.area_at(g / 3, &lam).is_positive() {
                    k.mesh.flip(h);
                    flipped = true;
                    break;
                }
            }
            if !flipped {
                return Err(SurfaceError::BadTopology("flat quadrilateral along rel path".into()));
            }
        }
        Err(SurfaceError::NonTerminatingFlips(MAX_EVENTS))
    }
}

/// Removes the triangles flattened around zero-length edges, glues the
/// surviving neighbours, and classifies the pieces.
fn collapse(m: Mesh<QuadNum>, label: Option<&str>) -> Result<DegenerationReport, SurfaceError> {
    let nt = m.num_triangles();
    let removed: Vec<bool> = (0..nt)
        .map(|t| (3 * t..3 * t + 3).any(|h| m.vec[h].is_zero()))
        .collect();
    let mut twin = m.twin.clone();
    for h in 0..m.vec.len() {
        if removed[h / 3] {
            continue;
        }
        let mut g = m.twin[h];
        let mut guard = 0;
        while removed[g / 3] {
            // the removed triangle is (zero, g, k) with k = -g; cross it
            let k = [next(g), prev(g)]
                .into_iter()
                .find(|&e| !m.vec[e].is_zero())
                .ok_or_else(|| SurfaceError::BadTopology("triangle collapsed to a point".into()))?;
            g = m.twin[k];
            guard += 1;
            if guard > nt {
                return Err(SurfaceError::BadTopology("cycle of collapsed triangles".into()));
            }
        }
        twin[h] = g;
    }
    let keep: Vec<usize> = (0..nt).filter(|&t| !removed[t]).collect();
    let mut glued = m.clone();
    glued.twin = twin;
    let mut parts = Vec::new();
    for comp in glued_components(&glued, &keep) {
        let mut sub = glued.submesh(&comp);
        unflatten(&mut sub)?;
        parts.push(Surface::from_mesh(sub, label.map(|l| format!("{l}-degenerate")))?);
    }
    let kind = match parts.as_slice() {
        [s] if s.stratum().is_h2() => DegenerationKind::H2Surface,
        [a, b] if a.genus() == 1 && b.genus() == 1 => DegenerationKind::TwoToriWedge,
        [s] if s.genus() == 1 => DegenerationKind::NodalTorus,
        _ => {
            return Err(SurfaceError::BadTopology(format!(
                "unexpected degeneration into {:?}",
                parts.iter().map(|p| p.stratum().to_string()).collect::<Vec<_>>()
            )))
        }
    };
    Ok(DegenerationReport {
        kind,
        components: parts,
    })
}

fn glued_components(m: &Mesh<QuadNum>, keep: &[usize]) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; m.num_triangles()];
    let mut out = Vec::new();
    for &t0 in keep {
        if comp[t0] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[t0] = id;
        let mut stack = vec![t0];
        let mut members = Vec::new();
        while let Some(t) = stack.pop() {
            members.push(t);
            for i in 0..3 {
                let u = m.twin[3 * t + i] / 3;
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Flips away flat triangles with nonzero edges.
fn unflatten(m: &mut Mesh<QuadNum>) -> Result<(), SurfaceError> {
    for _ in 0..MAX_EVENTS {
        let Some(t) = (0..m.num_triangles()).find(|&t| m.triangle_area2(t).is_zero()) else {
            return Ok(());
        };
        let h = long_edge(m, t);
        if !m.triangle_area2(m.twin[h] / 3).is_positive() {
            return Err(SurfaceError::BadTopology("flat quadrilateral after collapse".into()));
        }
        m.flip(h);
    }
    Err(SurfaceError::NonTerminatingFlips(MAX_EVENTS))
}
