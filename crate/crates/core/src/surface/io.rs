//! JSON form of surfaces.
//!
//! Exact surfaces:
//! `{"d": 5, "polygons": [[[x, y], ...], ...], "gluing": [[p, e, q, f], ...], "label": "..."}`
//! where each coordinate is `[[a_num, a_den], [b_num, b_den]]` meaning
//! `a + b sqrt(d)`. Floating surfaces carry `"inexact": true` and plain
//! numbers as coordinates. Serialization of an exact surface is a bijection
//! onto its normalized presentation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FloatSurface, Surface, SurfaceError, TranslationSurface};
use crate::exactfield::{FieldError, QuadField, QuadNum, RatRepr};
use crate::geometry::Vec2;

#[derive(Debug, Error)]
pub enum SurfaceIoError {
    #[error("malformed surface JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad coordinate: {0}")]
    Field(#[from] FieldError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("expected an exact surface, found an inexact one")]
    Inexact,
}

#[derive(Serialize, Deserialize)]
struct CoordRepr(RatRepr, RatRepr);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactRepr {
    d: u64,
    polygons: Vec<Vec<(CoordRepr, CoordRepr)>>,
    gluing: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FloatRepr {
    inexact: bool,
    polygons: Vec<Vec<[f64; 2]>>,
    gluing: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

fn coord(c: CoordRepr, k: QuadField) -> Result<QuadNum, FieldError> {
    Ok(k.elem(c.0.into_rational()?, c.1.into_rational()?))
}

fn coord_repr(q: &QuadNum) -> CoordRepr {
    CoordRepr(RatRepr::from_rational(q.a()), RatRepr::from_rational(q.b()))
}

fn gluing_out(g: &[((usize, usize), (usize, usize))]) -> Vec<[usize; 4]> {
    g.iter().map(|&((p, e), (q, f))| [p, e, q, f]).collect()
}

fn gluing_in(g: Vec<[usize; 4]>) -> Vec<((usize, usize), (usize, usize))> {
    g.into_iter().map(|[p, e, q, f]| ((p, e), (q, f))).collect()
}

impl TranslationSurface {
    pub fn to_json_value(&self) -> serde_json::Value {
        let repr = ExactRepr {
            d: self.d(),
            polygons: self
                .polygons()
                .iter()
                .map(|p| p.iter().map(|v| (coord_repr(&v.x), coord_repr(&v.y))).collect())
                .collect(),
            gluing: gluing_out(self.gluing()),
            label: self.label().map(str::to_owned),
        };
        serde_json::to_value(repr).expect("surface serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("surface serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceIoError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        Self::from_json_value(v)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self, SurfaceIoError> {
        if v.get("inexact").is_some() {
            return Err(SurfaceIoError::Inexact);
        }
        let repr: ExactRepr = serde_json::from_value(v)?;
        let k = QuadField::new(repr.d)?;
        let mut polygons = Vec::with_capacity(repr.polygons.len());
        for p in repr.polygons {
            let mut edges = Vec::with_capacity(p.len());
            for (x, y) in p {
                edges.push(Vec2::new(coord(x, k)?, coord(y, k)?));
            }
            polygons.push(edges);
        }
        Ok(Surface::build(polygons, gluing_in(repr.gluing), repr.label)?)
    }
}

impl FloatSurface {
    pub fn to_json(&self) -> String {
        let repr = FloatRepr {
            inexact: true,
            polygons: self
                .polygons()
                .iter()
                .map(|p| p.iter().map(|v| [v.x, v.y]).collect())
                .collect(),
            gluing: gluing_out(self.gluing()),
            label: self.label().map(str::to_owned),
        };
        serde_json::to_string(&repr).expect("surface serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceIoError> {
        let repr: FloatRepr = serde_json::from_str(text)?;
        let polygons = repr
            .polygons
            .into_iter()
            .map(|p| p.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
            .collect();
        Ok(Surface::build(polygons, gluing_in(repr.gluing), repr.label)?)
    }
}

/// Either kind of surface, as read from JSON.
#[derive(Debug, Clone)]
pub enum AnySurface {
    Exact(TranslationSurface),
    Float(FloatSurface),
}

pub fn parse_surface(text: &str) -> Result<AnySurface, SurfaceIoError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    if v.get("inexact").is_some() {
        Ok(AnySurface::Float(FloatSurface::from_json(text)?))
    } else {
        Ok(AnySurface::Exact(TranslationSurface::from_json_value(v)?))
    }
}
