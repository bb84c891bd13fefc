//! Isomorphism testing through canonical triangulations.

use super::mesh::{next, Mesh};
use super::{SurfaceError, TranslationSurface};
use crate::exactfield::QuadNum;
use crate::geometry::{lex_cmp, Vec2};

type Code = Vec<(Vec2<QuadNum>, usize, usize)>;

/// Breadth-first walk from `h0`, recording each half-edge's vector and the
/// position of its twin in visiting order.
fn walk(m: &Mesh<QuadNum>, h0: usize) -> Code {
    let nt = m.num_triangles();
    // entry half-edge of each triangle, by visiting order
    let mut order: Vec<usize> = Vec::with_capacity(nt);
    let mut index = vec![usize::MAX; nt];
    let mut entry = vec![usize::MAX; nt];
    order.push(h0);
    index[h0 / 3] = 0;
    entry[h0 / 3] = h0;
    let mut code = Vec::with_capacity(3 * nt);
    let mut i = 0;
    while i < order.len() {
        let e = order[i];
        let mut x = e;
        for _ in 0..3 {
            let tw = m.twin(x);
            let t = tw / 3;
            if index[t] == usize::MAX {
                index[t] = order.len();
                entry[t] = tw;
                order.push(tw);
            }
            let rel = (tw % 3 + 3 - entry[t] % 3) % 3;
            code.push((m.vector(x).clone(), index[t], rel));
            x = next(x);
        }
        i += 1;
    }
    code
}

fn starts(m: &Mesh<QuadNum>) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for h in 0..m.num_half_edges() {
        match best.first() {
            None => best.push(h),
            Some(&b) => match lex_cmp(m.vector(h), m.vector(b)) {
                std::cmp::Ordering::Less => best = vec![h],
                std::cmp::Ordering::Equal => best.push(h),
                std::cmp::Ordering::Greater => {}
            },
        }
    }
    best
}

fn code_cmp(a: &Code, b: &Code) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = lex_cmp(&x.0, &y.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2));
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

impl TranslationSurface {
    /// A string that is equal for two surfaces exactly when they are
    /// isomorphic by a cut-and-paste translation equivalence.
    pub fn canonical_code(&self) -> Result<String, SurfaceError> {
        let c = self.canonicalize()?;
        let m = c.mesh();
        let best = starts(m)
            .into_iter()
            .map(|h| walk(m, h))
            .min_by(code_cmp)
            .expect("nonempty mesh");
        let mut out = format!("d={};", self.d());
        for (v, t, r) in best {
            out.push_str(&format!("{},{}:{}.{};", v.x, v.y, t, r));
        }
        Ok(out)
    }

    pub fn is_isomorphic(&self, other: &TranslationSurface) -> Result<bool, SurfaceError> {
        if self.d() != other.d() || self.stratum() != other.stratum() {
            return Ok(false);
        }
        let a = self.canonicalize()?;
        let b = other.canonicalize()?;
        let (ma, mb) = (a.mesh(), b.mesh());
        if ma.num_triangles() != mb.num_triangles() {
            return Ok(false);
        }
        let h0 = starts(ma)[0];
        let ca = walk(ma, h0);
        Ok(starts(mb).into_iter().any(|h| {
            lex_cmp(mb.vector(h), ma.vector(h0)).is_eq() && code_cmp(&walk(mb, h), &ca).is_eq()
        }))
    }
}
