//! Delaunay triangulations by edge flipping, and the canonical
//! triangulation used for comparing surfaces.

use std::collections::VecDeque;

use super::mesh::{next, Mesh};
use super::{Surface, SurfaceError};
use crate::geometry::{Scalar, Vec2};

/// Default bound on the number of flips in one Delaunay pass.
pub const DEFAULT_MAX_FLIPS: usize = 1_000_000;

/// Sign of the in-circle test for the edge of `h`: positive when the far
/// vertex of the twin triangle lies strictly inside the circumcircle of the
/// triangle of `h`.
pub fn incircle<S: Scalar>(m: &Mesh<S>, h: usize) -> i8 {
    let g = m.twin(h);
    // origin A of h; B = A + v(h); C = B + v(next h); D = A + v(next g)
    let b = m.vector(h).clone();
    let c = b.add(m.vector(next(h)));
    let d = m.vector(next(g)).clone();
    let lift = |p: &Vec2<S>| p.norm2();
    let (bx, by, bz) = (&b.x, &b.y, lift(&b));
    let (cx, cy, cz) = (&c.x, &c.y, lift(&c));
    let (dx, dy, dz) = (&d.x, &d.y, lift(&d));
    let t1 = bx.mul(&cy.mul(&dz).sub(&cz.mul(dy)));
    let t2 = by.mul(&cx.mul(&dz).sub(&cz.mul(dx)));
    let t3 = bz.mul(&cx.mul(dy).sub(&cy.mul(dx)));
    -t1.sub(&t2).add(&t3).signum()
}

/// Lawson flips until every edge is locally Delaunay.
pub fn make_delaunay<S: Scalar>(m: &mut Mesh<S>, max_flips: usize) -> Result<usize, SurfaceError> {
    let n = m.num_half_edges();
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for h in 0..n {
        if h < m.twin(h) {
            queued[h] = true;
            queue.push_back(h);
        }
    }
    let mut flips = 0;
    while let Some(h) = queue.pop_front() {
        queued[h] = false;
        if incircle(m, h) <= 0 {
            continue;
        }
        if flips == max_flips {
            return Err(SurfaceError::NonTerminatingFlips(max_flips));
        }
        let (t1, t2) = (h / 3, m.twin(h) / 3);
        m.flip(h);
        flips += 1;
        for t in [t1, t2] {
            for i in 0..3 {
                let e = 3 * t + i;
                let e = e.min(m.twin(e));
                if !queued[e] {
                    queued[e] = true;
                    queue.push_back(e);
                }
            }
        }
    }
    Ok(flips)
}

/// Replaces each Delaunay cell (triangles joined across cocircular edges)
/// by the fan from its lowest-leftmost corner. The result depends only on
/// the surface and its marked points, not on the input triangulation.
pub fn canonical_cells<S: Scalar>(m: &Mesh<S>) -> Mesh<S> {
    let n = m.num_half_edges();
    let tight: Vec<bool> = (0..n).map(|h| incircle(m, h) == 0).collect();
    let mut seen = vec![false; n];
    // boundary cycles: each is a list of old half-edges, ccw
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h0 in 0..n {
        if tight[h0] || seen[h0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut e = h0;
        loop {
            seen[e] = true;
            cyc.push(e);
            let mut f = next(e);
            while tight[f] {
                f = next(m.twin(f));
            }
            e = f;
            if e == h0 {
                break;
            }
        }
        cycles.push(cyc);
    }
    if cycles.iter().all(|c| c.len() == 3) {
        return m.clone();
    }
    let mut vec: Vec<Vec2<S>> = Vec::with_capacity(n);
    let mut vertex = Vec::with_capacity(n);
    let mut twin = vec![usize::MAX; n];
    let mut slot_of = vec![usize::MAX; n];
    for cyc in &cycles {
        let k = cyc.len();
        let mut pts = Vec::with_capacity(k);
        let mut p = m.vector(cyc[0]).zero_like();
        for &e in cyc {
            pts.push(p.clone());
            p = p.add(m.vector(e));
        }
        let s = (0..k)
            .min_by(|&i, &j| cmp_point(&pts[i], &pts[j]))
            .expect("nonempty cell");
        let base = vec.len();
        let mut diag_prev: Option<usize> = None;
        for i in 1..k - 1 {
            let a = s;
            let b = (s + i) % k;
            let c = (s + i + 1) % k;
            let t0 = vec.len();
            // edge a->b
            vec.push(pts[b].sub(&pts[a]));
            vertex.push(m.origin(cyc[a]));
            if i == 1 {
                slot_of[cyc[a]] = t0;
            } else {
                let d = diag_prev.expect("previous diagonal");
                twin[t0] = d;
                twin[d] = t0;
            }
            // edge b->c, always a boundary side
            vec.push(pts[c].sub(&pts[b]));
            vertex.push(m.origin(cyc[b]));
            slot_of[cyc[b]] = t0 + 1;
            // edge c->a
            vec.push(pts[a].sub(&pts[c]));
            vertex.push(m.origin(cyc[c]));
            if i == k - 2 {
                slot_of[cyc[c]] = t0 + 2;
            } else {
                diag_prev = Some(t0 + 2);
            }
        }
        debug_assert_eq!(vec.len() - base, 3 * (k - 2));
    }
    for cyc in &cycles {
        for &e in cyc {
            twin[slot_of[e]] = slot_of[m.twin(e)];
        }
    }
    Mesh {
        vec,
        twin,
        vertex,
        nverts: m.num_vertices(),
    }
}

fn cmp_point<S: Scalar>(p: &Vec2<S>, q: &Vec2<S>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let sy = p.y.sub(&q.y).signum();
    if sy != 0 {
        return if sy < 0 { Ordering::Less } else { Ordering::Greater };
    }
    match p.x.sub(&q.x).signum() {
        -1 => Ordering::Less,
        1 => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

impl<S: Scalar> Surface<S> {
    /// A Delaunay triangulation of the same surface.
    pub fn delaunay(&self) -> Result<Self, SurfaceError> {
        self.delaunay_bounded(DEFAULT_MAX_FLIPS)
    }

    pub fn delaunay_bounded(&self, max_flips: usize) -> Result<Self, SurfaceError> {
        let mut m = self.mesh().clone();
        make_delaunay(&mut m, max_flips)?;
        Ok(self.with_mesh(m))
    }

    /// The canonical Delaunay triangulation. Two surfaces are isomorphic by
    /// a translation equivalence exactly when their canonical meshes agree up
    /// to relabeling.
    pub fn canonicalize(&self) -> Result<Self, SurfaceError> {
        let mut m = self.mesh().clone();
        make_delaunay(&mut m, DEFAULT_MAX_FLIPS)?;
        Ok(self.with_mesh(canonical_cells(&m)))
    }

    /// Same surface, new triangulation; cone ids are carried by the mesh.
    pub(crate) fn with_mesh(&self, mesh: Mesh<S>) -> Self {
        Surface::from_mesh_keep_ids(mesh, self.label.clone())
    }

    /// Whether every edge of the current triangulation is locally Delaunay.
    pub fn is_delaunay(&self) -> bool {
        let m = self.mesh();
        (0..m.num_half_edges()).all(|h| incircle(m, h) <= 0)
    }

    /// Length of the shortest edge of the triangulation, which for a
    /// Delaunay triangulation is the shortest saddle connection.
    pub fn min_edge_norm2(&self) -> S {
        let m = self.mesh();
        let mut best = m.vector(0).norm2();
        for h in 1..m.num_half_edges() {
            let l = m.vector(h).norm2();
            if l.sub(&best).signum() < 0 {
                best = l;
            }
        }
        best
    }
}
