//! Half-edge triangulation of a translation surface.
//!
//! Half-edge `h` belongs to triangle `h / 3`; the three half-edges of a
//! triangle are stored counterclockwise and their vectors sum to zero.
//! `vertex[h]` is the cone-point class of the origin of `h`; it survives
//! flips, affine maps and rel deformations, so a singularity keeps its id.

use crate::geometry::{in_sector, Scalar, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<S> {
    pub(crate) vec: Vec<Vec2<S>>,
    pub(crate) twin: Vec<usize>,
    pub(crate) vertex: Vec<usize>,
    pub(crate) nverts: usize,
}

#[inline]
pub fn next(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 1) % 3
}

#[inline]
pub fn prev(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 2) % 3
}

impl<S: Scalar> Mesh<S> {
    /// Builds a mesh from triangle edge vectors and a twin map, computing the
    /// vertex classes.
    pub(crate) fn from_parts(vec: Vec<Vec2<S>>, twin: Vec<usize>) -> Self {
        let n = vec.len();
        let mut m = Mesh {
            vec,
            twin,
            vertex: vec![usize::MAX; n],
            nverts: 0,
        };
        m.recompute_vertices();
        m
    }

    pub(crate) fn recompute_vertices(&mut self) {
        let n = self.vec.len();
        self.vertex = vec![usize::MAX; n];
        let mut id = 0;
        for h0 in 0..n {
            if self.vertex[h0] != usize::MAX {
                continue;
            }
            let mut h = h0;
            loop {
                self.vertex[h] = id;
                h = self.ccw_corner(h);
                if h == h0 {
                    break;
                }
            }
            id += 1;
        }
        self.nverts = id;
    }

    pub fn num_half_edges(&self) -> usize {
        self.vec.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.vec.len() / 3
    }

    pub fn num_vertices(&self) -> usize {
        self.nverts
    }

    pub fn vector(&self, h: usize) -> &Vec2<S> {
        &self.vec[h]
    }

    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    pub fn origin(&self, h: usize) -> usize {
        self.vertex[h]
    }

    /// The corner following `h` counterclockwise around its origin.
    #[inline]
    pub fn ccw_corner(&self, h: usize) -> usize {
        self.twin[prev(h)]
    }

    /// The corner preceding `h` counterclockwise around its origin.
    #[inline]
    pub fn cw_corner(&self, h: usize) -> usize {
        next(self.twin[h])
    }

    /// Direction bounding the corner at `h` on its counterclockwise side.
    pub fn corner_end(&self, h: usize) -> Vec2<S> {
        self.vec[prev(h)].neg()
    }

    /// Whether direction `w` leaves the origin of `h` inside its corner.
    pub fn corner_contains(&self, h: usize, w: &Vec2<S>) -> bool {
        in_sector(&self.vec[h], &self.corner_end(h), w)
    }

    /// Twice the signed area of triangle `t`.
    pub fn triangle_area2(&self, t: usize) -> S {
        self.vec[3 * t].cross(&self.vec[3 * t + 1])
    }

    /// Local coordinates of the three corners of triangle `t`, the first at
    /// the origin.
    pub fn triangle_points(&self, t: usize) -> [Vec2<S>; 3] {
        let a = self.vec[3 * t].zero_like();
        let b = self.vec[3 * t].clone();
        let c = b.add(&self.vec[3 * t + 1]);
        [a, b, c]
    }

    /// Corners of vertex class `v`, in counterclockwise order.
    pub fn corners_of(&self, v: usize) -> Vec<usize> {
        let Some(h0) = (0..self.vec.len()).find(|&h| self.vertex[h] == v) else {
            return Vec::new();
        };
        let mut out = vec![h0];
        let mut h = self.ccw_corner(h0);
        while h != h0 {
            out.push(h);
            h = self.ccw_corner(h);
        }
        out
    }

    /// Cone angle of each vertex class as an integer multiple of 2 pi,
    /// counted by how many corners contain a fixed reference direction.
    pub fn angle_multiples(&self) -> Vec<u32> {
        let probe = self.reference_direction();
        let mut k = vec![0u32; self.nverts];
        for h in 0..self.vec.len() {
            if self.corner_contains(h, &probe) {
                k[self.vertex[h]] += 1;
            }
        }
        k
    }

    fn reference_direction(&self) -> Vec2<S> {
        let (x, y) = self.vec[0].x.reference_direction();
        Vec2::new(x, y)
    }

    /// Flips the edge shared by the triangles of `h` and `twin(h)`.
    ///
    /// Triangle of `h` is `A -> B -> C`, its twin `B -> A -> D`; afterwards
    /// the triangles are `D -> C -> A` and `C -> D -> B`. The caller must
    /// ensure the quadrilateral is strictly convex.
    pub(crate) fn flip(&mut self, h: usize) {
        let g = self.twin[h];
        let t1 = h / 3;
        let t2 = g / 3;
        debug_assert_ne!(t1, t2);
        let h1 = next(h);
        let h2 = prev(h);
        let g1 = next(g);
        let g2 = prev(g);
        let old = [h1, h2, g1, g2];
        let data: Vec<(Vec2<S>, usize, usize)> = old
            .iter()
            .map(|&e| (self.vec[e].clone(), self.twin[e], self.vertex[e]))
            .collect();
        let (vd, vc) = (self.vertex[g2], self.vertex[h2]);
        let dc = self.vec[g2].add(&self.vec[h1]);
        // new slots: t1 = [D->C, C->A (h2), A->D (g1)], t2 = [C->D, D->B (g2), B->C (h1)]
        let new_pos = [3 * t2 + 2, 3 * t1 + 1, 3 * t1 + 2, 3 * t2 + 1];
        let map = |e: usize| -> usize {
            match old.iter().position(|&o| o == e) {
                Some(i) => new_pos[i],
                None => e,
            }
        };
        let ndc = 3 * t1;
        let ncd = 3 * t2;
        self.vec[ndc] = dc.clone();
        self.vertex[ndc] = vd;
        self.twin[ndc] = ncd;
        self.vec[ncd] = dc.neg();
        self.vertex[ncd] = vc;
        self.twin[ncd] = ndc;
        for (i, (v, tw, vx)) in data.into_iter().enumerate() {
            let p = new_pos[i];
            let tw = if tw == h || tw == g { unreachable!("outer edge glued to flipped edge") } else { map(tw) };
            self.vec[p] = v;
            self.vertex[p] = vx;
            self.twin[p] = tw;
            self.twin[tw] = p;
        }
    }

    /// Whether every triangle is strictly positively oriented.
    pub fn all_positive(&self) -> bool {
        (0..self.num_triangles()).all(|t| self.triangle_area2(t).signum() > 0)
    }

    /// Connected components of the triangle adjacency graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let nt = self.num_triangles();
        let mut comp = vec![usize::MAX; nt];
        let mut out = Vec::new();
        for t0 in 0..nt {
            if comp[t0] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![t0];
            comp[t0] = id;
            let mut members = Vec::new();
            while let Some(t) = stack.pop() {
                members.push(t);
                for i in 0..3 {
                    let u = self.twin[3 * t + i] / 3;
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

    /// Extracts the sub-mesh on a set of triangles closed under adjacency.
    pub(crate) fn submesh(&self, tris: &[usize]) -> Mesh<S> {
        let mut index = vec![usize::MAX; self.num_triangles()];
        for (i, &t) in tris.iter().enumerate() {
            index[t] = i;
        }
        let mut vec = Vec::with_capacity(tris.len() * 3);
        let mut twin = Vec::with_capacity(tris.len() * 3);
        for &t in tris {
            for i in 0..3 {
                let h = 3 * t + i;
                vec.push(self.vec[h].clone());
                let tw = self.twin[h];
                twin.push(3 * index[tw / 3] + tw % 3);
            }
        }
        Mesh::from_parts(vec, twin)
    }
}
