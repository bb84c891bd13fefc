//! Named example surfaces.
//!
//! Cylinder conventions used by the table factories: a cylinder of width
//! `w`, height `h` and twist `t` is the parallelogram with bottom `(w, 0)`
//! and left side `(t, h)`.

use thiserror::Error;

use crate::exactfield::{QuadField, QuadNum};
use crate::geometry::Vec2;
use crate::surface::{FloatSurface, Surface, SurfaceError, TranslationSurface};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ZTableParams {
    pub w1: QuadNum,
    pub w2: QuadNum,
    pub h1: QuadNum,
    pub h2: QuadNum,
    pub h3: QuadNum,
    pub t1: QuadNum,
    pub t2: QuadNum,
    pub t3: QuadNum,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LTableParams {
    pub a: QuadNum,
    pub b: QuadNum,
}

fn v(x: &QuadNum, y: &QuadNum) -> Vec2<QuadNum> {
    Vec2::new(x.clone(), y.clone())
}

fn require_positive(name: &str, x: &QuadNum) -> Result<(), ConstructionError> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(ConstructionError::InvalidParams(format!("{name} = {x} must be positive")))
    }
}

fn same_field(xs: &[&QuadNum]) -> Result<QuadField, ConstructionError> {
    let k = xs[0].field();
    if xs.iter().any(|x| x.d() != k.d()) {
        return Err(ConstructionError::InvalidParams("parameters from different fields".into()));
    }
    Ok(k)
}

/// The regular `2n`-gon with unit sides and opposite sides glued.
pub fn regular_2n_gon(n: usize) -> Result<FloatSurface, ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::InvalidParams(format!("n = {n} must be at least 2")));
    }
    let m = 2 * n;
    let edges: Vec<Vec2<f64>> = (0..m)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    let gluing = (0..n).map(|k| ((0, k), (0, k + n))).collect();
    Ok(Surface::build(vec![edges], gluing, Some(format!("regular-{m}-gon")))?)
}

/// Three horizontal cylinders: the wide cylinder 3 (width `w1 + w2`), with
/// cylinder 1 glued above its left part and cylinder 2 glued below its
/// right part.
pub fn z_table(p: &ZTableParams) -> Result<TranslationSurface, ConstructionError> {
    let k = same_field(&[&p.w1, &p.w2, &p.h1, &p.h2, &p.h3, &p.t1, &p.t2, &p.t3])?;
    for (name, x) in [("w1", &p.w1), ("w2", &p.w2), ("h1", &p.h1), ("h2", &p.h2), ("h3", &p.h3)] {
        require_positive(name, x)?;
    }
    let z = k.zero();
    let c1 = vec![v(&p.w1, &z), v(&p.t1, &p.h1), v(&-&p.w1, &z), v(&-&p.t1, &-&p.h1)];
    let c2 = vec![v(&p.w2, &z), v(&p.t2, &p.h2), v(&-&p.w2, &z), v(&-&p.t2, &-&p.h2)];
    let c3 = vec![
        v(&p.w1, &z),
        v(&p.w2, &z),
        v(&p.t3, &p.h3),
        v(&-&p.w2, &z),
        v(&-&p.w1, &z),
        v(&-&p.t3, &-&p.h3),
    ];
    let gluing = vec![
        ((0, 1), (0, 3)),
        ((1, 1), (1, 3)),
        ((2, 2), (2, 5)),
        ((0, 0), (2, 4)),
        ((0, 2), (2, 0)),
        ((1, 2), (2, 1)),
        ((1, 0), (2, 3)),
    ];
    Ok(Surface::build(vec![c1, c2, c3], gluing, Some("z-table".into()))?)
}

/// The L-shaped table: a unit square with a horizontal arm of total width
/// `a` and a vertical arm of total height `b`; area `a + b - 1`.
pub fn l_table(p: &LTableParams) -> Result<TranslationSurface, ConstructionError> {
    let k = same_field(&[&p.a, &p.b])?;
    let one = k.one();
    let (ea, eb) = (&p.a - &one, &p.b - &one);
    require_positive("a - 1", &ea)?;
    require_positive("b - 1", &eb)?;
    let z = k.zero();
    let poly = vec![
        v(&one, &z),
        v(&ea, &z),
        v(&z, &one),
        v(&-&ea, &z),
        v(&z, &eb),
        v(&-&one, &z),
        v(&z, &-&eb),
        v(&z, &-&one),
    ];
    let gluing = vec![((0, 0), (0, 5)), ((0, 1), (0, 3)), ((0, 2), (0, 7)), ((0, 4), (0, 6))];
    Ok(Surface::build(vec![poly], gluing, Some("l-table".into()))?)
}

/// Two unit square tori, each slit along the horizontal segment `[0, l]` at
/// the bottom, cross-glued along the slits. The rel leaf through this
/// surface degenerates into a wedge of two tori once the slit closes.
pub fn slit_tori(l: &QuadNum) -> Result<TranslationSurface, ConstructionError> {
    let k = l.field();
    let one = k.one();
    let rest = &one - l;
    require_positive("l", l)?;
    require_positive("1 - l", &rest)?;
    let z = k.zero();
    let torus = || {
        vec![
            v(l, &z),
            v(&rest, &z),
            v(&z, &one),
            v(&-&rest, &z),
            v(&-l, &z),
            v(&z, &-&one),
        ]
    };
    let gluing = vec![
        ((0, 1), (0, 3)),
        ((1, 1), (1, 3)),
        ((0, 2), (0, 5)),
        ((1, 2), (1, 5)),
        ((0, 0), (1, 4)),
        ((1, 0), (0, 4)),
    ];
    Ok(Surface::build(vec![torus(), torus()], gluing, Some("slit-tori".into()))?)
}

/// Parameters of a two-cylinder surface in `H(1,1)` whose rel leaf
/// degenerates into `H(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitLParams {
    pub w1: QuadNum,
    pub h1: QuadNum,
    pub w2: QuadNum,
    pub h2: QuadNum,
    pub l: QuadNum,
    pub t1: QuadNum,
    pub t2: QuadNum,
}

/// A narrow cylinder 1 on top of a wide cylinder 2, where the top of
/// cylinder 2 carries an extra saddle connection of length `l` that closes
/// under rel, collapsing the two zeros into one.
pub fn split_l_table(p: &SplitLParams) -> Result<TranslationSurface, ConstructionError> {
    let k = same_field(&[&p.w1, &p.h1, &p.w2, &p.h2, &p.l, &p.t1, &p.t2])?;
    for (name, x) in [("w1", &p.w1), ("h1", &p.h1), ("w2", &p.w2), ("h2", &p.h2), ("l", &p.l)] {
        require_positive(name, x)?;
    }
    let beta = &(&p.w2 - &p.w1) - &p.l;
    require_positive("w2 - w1 - l", &beta)?;
    let z = k.zero();
    let c1 = vec![v(&p.w1, &z), v(&p.t1, &p.h1), v(&-&p.w1, &z), v(&-&p.t1, &-&p.h1)];
    let c2 = vec![
        v(&p.w1, &z),
        v(&beta, &z),
        v(&p.l, &z),
        v(&p.t2, &p.h2),
        v(&-&beta, &z),
        v(&-&p.l, &z),
        v(&-&p.w1, &z),
        v(&-&p.t2, &-&p.h2),
    ];
    let gluing = vec![
        ((0, 1), (0, 3)),
        ((1, 3), (1, 7)),
        ((1, 0), (0, 2)),
        ((1, 1), (1, 4)),
        ((1, 2), (1, 5)),
        ((1, 6), (0, 0)),
    ];
    Ok(Surface::build(vec![c1, c2], gluing, Some("split-l-table".into()))?)
}

/// The regular decagon with opposite sides glued, normalized by an affine
/// map into `Q(sqrt 5)` and rotated so that its three-cylinder direction is
/// horizontal. Side vectors before rotation are `(cos(k pi/5), sin(k pi/5) /
/// sin(pi/5))`.
pub fn decagon_polygon_q5() -> TranslationSurface {
    let k = QuadField::new(5).expect("5 is squarefree");
    let phi = k.q(1, 2, 1, 2);
    let half = k.rat(1, 2);
    let one = k.one();
    let z = k.zero();
    let c1 = &phi * &half;
    let c2 = &(&phi - &one) * &half;
    let base = [
        (one.clone(), z.clone()),
        (c1.clone(), one.clone()),
        (c2.clone(), phi.clone()),
        (-&c2, phi.clone()),
        (-&c1, one.clone()),
    ];
    let mut edges = Vec::with_capacity(10);
    for sign in [1, -1] {
        for (x, y) in &base {
            let (x, y) = if sign == 1 { (x.clone(), y.clone()) } else { (-x, -y) };
            // rotate a quarter turn clockwise: (x, y) -> (y, -x)
            edges.push(Vec2::new(y, -&x));
        }
    }
    let gluing = (0..5).map(|i| ((0, i), (0, i + 5))).collect();
    Surface::build(vec![edges], gluing, Some("decagon-q5".into())).expect("valid decagon")
}

/// Shear applied to [`decagon_polygon_q5`] before reading off its
/// cylinders, chosen so the normalized twists satisfy the twist equation.
pub const DECAGON_SHEAR: (i64, i64) = (-1, 8);

/// Z-table parameters of [`decagon_polygon_q5`] sheared by `u^c`,
/// `c = DECAGON_SHEAR`, as produced by `examples/derive_decagon.rs`.
pub fn decagon_eigenform_params() -> ZTableParams {
    let k = QuadField::new(5).expect("5 is squarefree");
    ZTableParams {
        w1: k.q(3, 1, 1, 1),
        w2: k.q(1, 1, 1, 1),
        h1: k.q(1, 1, 0, 1),
        h2: k.q(-1, 4, 1, 4),
        h3: k.q(1, 4, 1, 4),
        t1: k.q(23, 8, 1, 1),
        t2: k.q(17, 32, 15, 32),
        t3: k.q(63, 32, 31, 32),
    }
}

pub fn decagon_eigenform_model() -> TranslationSurface {
    z_table(&decagon_eigenform_params())
        .expect("frozen parameters are valid")
        .with_label("decagon-eigenform")
}

/// The square torus with a single marked point.
pub fn square_torus(d: u64) -> TranslationSurface {
    let k = QuadField::new(d).expect("squarefree d");
    let (o, z) = (k.one(), k.zero());
    let sq = vec![v(&o, &z), v(&z, &o), v(&-&o, &z), v(&z, &-&o)];
    Surface::build(vec![sq], vec![((0, 0), (0, 2)), ((0, 1), (0, 3))], Some("square-torus".into()))
        .expect("valid torus")
}
