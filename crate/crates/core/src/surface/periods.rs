//! Absolute periods.
//!
//! Closed edge paths in the triangulation represent absolute homology
//! classes, and every absolute class is represented this way. The holonomies
//! of the fundamental cycles of a spanning tree therefore generate the period
//! group; its Hermite normal form is a presentation-independent invariant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::TranslationSurface;
use crate::exactfield::{QuadNum, Rational};
use crate::geometry::Vec2;

impl TranslationSurface {
    /// Holonomies of a generating set of closed cycles.
    pub fn cycle_holonomies(&self) -> Vec<Vec2<QuadNum>> {
        let m = self.mesh();
        let nv = m.num_vertices();
        // position of each vertex class along a spanning tree of edges
        let mut pos: Vec<Option<Vec2<QuadNum>>> = vec![None; nv];
        let mut tree = vec![false; m.num_half_edges()];
        let root = m.origin(0);
        pos[root] = Some(m.vector(0).zero_like());
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for h in 0..m.num_half_edges() {
                if m.origin(h) != u {
                    continue;
                }
                let w = m.origin(m.twin(h));
                if pos[w].is_none() {
                    let p = pos[u].as_ref().expect("visited").add(m.vector(h));
                    pos[w] = Some(p);
                    tree[h] = true;
                    tree[m.twin(h)] = true;
                    stack.push(w);
                }
            }
        }
        let mut out = Vec::new();
        for h in 0..m.num_half_edges() {
            if tree[h] || h > m.twin(h) {
                continue;
            }
            let u = pos[m.origin(h)].as_ref().expect("connected");
            let w = pos[m.origin(m.twin(h))].as_ref().expect("connected");
            let hol = u.add(m.vector(h)).sub(w);
            if !hol.is_zero() {
                out.push(hol);
            }
        }
        out
    }

    /// Hermite normal form of the absolute period group, written in
    /// rational coordinates `(x_a, x_b, y_a, y_b)` for `x = x_a + x_b sqrt d`.
    pub fn absolute_period_lattice(&self) -> Vec<[Rational; 4]> {
        let rows: Vec<[Rational; 4]> = self
            .cycle_holonomies()
            .into_iter()
            .map(|v| [v.x.a().clone(), v.x.b().clone(), v.y.a().clone(), v.y.b().clone()])
            .collect();
        hermite_rational(rows)
    }
}

fn hermite_rational(rows: Vec<[Rational; 4]>) -> Vec<[Rational; 4]> {
    let mut den = BigInt::from(1);
    for r in &rows {
        for x in r {
            den = den.lcm(x.denom());
        }
    }
    let ints: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|x| (x * Rational::from(den.clone())).to_integer()).collect())
        .collect();
    hermite(ints, 4)
        .into_iter()
        .map(|r| {
            let f = |i: usize| Rational::new(r[i].clone(), den.clone());
            [f(0), f(1), f(2), f(3)]
        })
        .collect()
}

/// Row-style Hermite normal form over the integers.
pub(crate) fn hermite(mut a: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let mut r = 0;
    for c in 0..ncols {
        // Euclid on column c among rows r..
        loop {
            let pivot = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(p) = pivot else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                for j in 0..ncols {
                    let t = &q * &a[r][j];
                    a[i][j] -= t;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < a.len() && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for j in 0..ncols {
                    a[r][j] = -a[r][j].clone();
                }
            }
            for i in 0..r {
                let q = a[i][c].div_floor(&a[r][c]);
                for j in 0..ncols {
                    let t = &q * &a[r][j];
                    a[i][j] -= t;
                }
            }
            r += 1;
        }
    }
    a.truncate(r);
    a
}
