//! Translation surfaces presented as polygons glued along parallel sides.
//!
//! A [`Surface`] keeps the polygon presentation it was built from (for
//! bit-exact serialization) together with a triangulated [`Mesh`] on which
//! every computation runs. Operations never mutate; they return new surfaces.

mod build;
pub mod canonical;
pub mod delaunay;
pub mod io;
pub mod mesh;
pub mod periods;
pub mod rel;
pub(crate) mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactfield::{QuadField, QuadNum};
use crate::geometry::{Mat2, Scalar, Vec2};
pub use mesh::Mesh;

pub use build::triangulate_polygon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("polygon {0} does not close up")]
    UnclosedPolygon(usize),
    #[error("glued edges ({0},{1}) and ({2},{3}) are not opposite")]
    EdgeMismatch(usize, usize, usize, usize),
    #[error("polygon {0} is not simple and positively oriented")]
    NonSimplePolygon(usize),
    #[error("bad gluing: {0}")]
    BadMatching(String),
    #[error("surface is disconnected")]
    Disconnected,
    #[error("inconsistent cone data: {0}")]
    BadTopology(String),
    #[error("mixed quadratic fields in surface data")]
    MixedField,
    #[error("matrix is not unimodular")]
    NotUnimodular,
    #[error("operation needs a surface in H(1,1), found {0}")]
    WrongStratum(String),
    #[error("no cone point with id {0}")]
    NoSuchCone(usize),
    #[error("rel translation collides before reaching the requested vector (at fraction {0})")]
    CollisionBeyondBoundary(String),
    #[error("edge flipping did not terminate within {0} flips")]
    NonTerminatingFlips(usize),
}

/// One side of a gluing: polygon index and edge index within the polygon.
pub type EdgeRef = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConePoint {
    pub id: usize,
    /// Total angle divided by 2 pi.
    pub angle_multiple: u32,
}

impl ConePoint {
    /// Order of the zero of the abelian differential: `angle / 2 pi - 1`.
    pub fn order(&self) -> u32 {
        self.angle_multiple - 1
    }
}

/// A stratum `H(m_1, ..., m_k)`; the partition is sorted decreasingly and
/// omits regular (order zero) points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stratum {
    pub genus: u32,
    pub partition: Vec<u32>,
}

impl Stratum {
    pub fn is_h2(&self) -> bool {
        self.genus == 2 && self.partition == [2]
    }

    pub fn is_h11(&self) -> bool {
        self.genus == 2 && self.partition == [1, 1]
    }
}

impl std::fmt::Display for Stratum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.partition.iter().map(|m| m.to_string()).collect();
        if parts.is_empty() {
            // flat torus: only regular points
            return write!(f, "H(0)");
        }
        write!(f, "H({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface<S> {
    polygons: Vec<Vec<Vec2<S>>>,
    gluing: Vec<(EdgeRef, EdgeRef)>,
    label: Option<String>,
    mesh: Mesh<S>,
    cones: Vec<ConePoint>,
    genus: u32,
}

/// Exact surface with coordinates in one `Q(sqrt d)`.
pub type TranslationSurface = Surface<QuadNum>;
/// Surface with floating coordinates; excluded from exact-only operations.
pub type FloatSurface = Surface<f64>;

impl<S: Scalar> Surface<S> {
    /// Validates polygon and gluing data and builds the surface.
    pub fn build(
        polygons: Vec<Vec<Vec2<S>>>,
        gluing: Vec<(EdgeRef, EdgeRef)>,
        label: Option<String>,
    ) -> Result<Self, SurfaceError> {
        let (mesh, gluing) = build::build_mesh(&polygons, gluing)?;
        Self::finish(polygons, gluing, label, mesh)
    }

    fn finish(
        polygons: Vec<Vec<Vec2<S>>>,
        gluing: Vec<(EdgeRef, EdgeRef)>,
        label: Option<String>,
        mesh: Mesh<S>,
    ) -> Result<Self, SurfaceError> {
        if mesh.components().len() != 1 {
            return Err(SurfaceError::Disconnected);
        }
        let (cones, genus) = cone_analysis(&mesh)?;
        Ok(Surface {
            polygons,
            gluing,
            label,
            mesh,
            cones,
            genus,
        })
    }

    /// A surface presented directly by its triangulation; polygons are the
    /// triangles themselves.
    pub fn from_mesh(mesh: Mesh<S>, label: Option<String>) -> Result<Self, SurfaceError> {
        let nt = mesh.num_triangles();
        let polygons = (0..nt)
            .map(|t| (0..3).map(|i| mesh.vec[3 * t + i].clone()).collect())
            .collect();
        let mut gluing = Vec::new();
        for h in 0..mesh.num_half_edges() {
            let g = mesh.twin[h];
            if h < g {
                gluing.push(((h / 3, h % 3), (g / 3, g % 3)));
            }
        }
        if !mesh.all_positive() {
            return Err(SurfaceError::BadTopology("degenerate triangle".into()));
        }
        Self::finish(polygons, gluing, label, mesh)
    }

    pub fn polygons(&self) -> &[Vec<Vec2<S>>] {
        &self.polygons
    }

    pub fn gluing(&self) -> &[(EdgeRef, EdgeRef)] {
        &self.gluing
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn mesh(&self) -> &Mesh<S> {
        &self.mesh
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// Cone points with their exact angles.
    pub fn cone_data(&self) -> &[ConePoint] {
        &self.cones
    }

    pub fn stratum(&self) -> Stratum {
        let mut partition: Vec<u32> = self
            .cones
            .iter()
            .map(ConePoint::order)
            .filter(|&m| m > 0)
            .collect();
        partition.sort_unstable_by(|a, b| b.cmp(a));
        Stratum {
            genus: self.genus,
            partition,
        }
    }

    /// Sum of the shoelace areas of the polygons.
    pub fn area(&self) -> S {
        let mut total: Option<S> = None;
        for t in 0..self.mesh.num_triangles() {
            let a2 = self.mesh.triangle_area2(t);
            total = Some(match total {
                None => a2,
                Some(s) => s.add(&a2),
            });
        }
        let twice = total.expect("nonempty surface");
        twice.half()
    }

    /// Applies a unimodular matrix to every edge vector.
    pub fn apply_sl2(&self, g: &Mat2<S>) -> Result<Self, SurfaceError> {
        let det = g.det();
        if !det.is_one() {
            return Err(SurfaceError::NotUnimodular);
        }
        Ok(self.map_vectors(|v| v.transform(g)))
    }

    pub(crate) fn map_vectors(&self, f: impl Fn(&Vec2<S>) -> Vec2<S>) -> Self {
        let polygons = self
            .polygons
            .iter()
            .map(|p| p.iter().map(&f).collect())
            .collect();
        let mut mesh = self.mesh.clone();
        for v in mesh.vec.iter_mut() {
            *v = f(v);
        }
        Surface {
            polygons,
            gluing: self.gluing.clone(),
            label: self.label.clone(),
            mesh,
            cones: self.cones.clone(),
            genus: self.genus,
        }
    }

    /// Like [`Surface::from_mesh`] but keeps the cone ids already stored in
    /// the mesh.
    pub(crate) fn from_mesh_keep_ids(mesh: Mesh<S>, label: Option<String>) -> Self {
        let vertex = mesh.vertex.clone();
        let nverts = mesh.nverts;
        let mut s = Surface::from_mesh(mesh, label).expect("valid triangulation");
        // recompute_vertices renumbers classes; restore the original ids.
        let mut perm = vec![usize::MAX; s.mesh.nverts];
        for h in 0..vertex.len() {
            perm[s.mesh.vertex[h]] = vertex[h];
        }
        s.mesh.vertex = vertex;
        s.mesh.nverts = nverts;
        let mut cones = vec![
            ConePoint {
                id: 0,
                angle_multiple: 0
            };
            nverts
        ];
        for c in &s.cones {
            cones[perm[c.id]] = ConePoint {
                id: perm[c.id],
                angle_multiple: c.angle_multiple,
            };
        }
        s.cones = cones;
        s
    }

    /// Euler characteristic of the triangulation, `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let f = self.mesh.num_triangles() as i64;
        let e = self.mesh.num_half_edges() as i64 / 2;
        let v = self.mesh.num_vertices() as i64;
        v - e + f
    }
}

fn cone_analysis<S: Scalar>(mesh: &Mesh<S>) -> Result<(Vec<ConePoint>, u32), SurfaceError> {
    let k = mesh.angle_multiples();
    let mut excess: i64 = 0;
    let mut cones = Vec::with_capacity(k.len());
    for (id, &m) in k.iter().enumerate() {
        if m == 0 {
            return Err(SurfaceError::BadTopology(format!("vertex {id} has zero angle")));
        }
        excess += m as i64 - 1;
        cones.push(ConePoint {
            id,
            angle_multiple: m,
        });
    }
    // Gauss-Bonnet: sum (k_i - 1) = 2g - 2
    if excess % 2 != 0 {
        return Err(SurfaceError::BadTopology("odd total excess angle".into()));
    }
    let genus = (excess + 2) / 2;
    let f = mesh.num_triangles() as i64;
    let e = mesh.num_half_edges() as i64 / 2;
    let v = mesh.num_vertices() as i64;
    if v - e + f != 2 - 2 * genus {
        return Err(SurfaceError::BadTopology(format!(
            "Euler characteristic {} disagrees with genus {genus}",
            v - e + f
        )));
    }
    Ok((cones, genus as u32))
}

impl TranslationSurface {
    pub fn field(&self) -> QuadField {
        self.mesh.vec[0].x.field()
    }

    pub fn d(&self) -> u64 {
        self.field().d()
    }

    /// Reflection in the vertical axis, `(x, y) -> (-x, y)`, re-oriented so
    /// polygons stay counterclockwise. Cone ids are preserved.
    pub fn mirror_x(&self) -> Self {
        let m = &self.mesh;
        let nt = m.num_triangles();
        // Triangle [e0, e1, e2] reflects to [-r(e2), -r(e1), -r(e0)], where
        // r(x, y) = (-x, y). Slot i of the new triangle holds old slot 2 - i.
        let refl = |v: &Vec2<QuadNum>| Vec2::new(v.x.clone(), v.y.neg());
        let slot = |h: usize| 3 * (h / 3) + (2 - h % 3);
        let mut vec = Vec::with_capacity(3 * nt);
        let mut twin = Vec::with_capacity(3 * nt);
        let mut vertex = Vec::with_capacity(3 * nt);
        for h in 0..3 * nt {
            let old = slot(h);
            vec.push(refl(&m.vec[old]));
            twin.push(slot(m.twin[old]));
            // new edge at slot h runs from the old end of `old` to its origin
            vertex.push(m.vertex[mesh::next(old)]);
        }
        let mesh = Mesh {
            vec,
            twin,
            vertex,
            nverts: m.nverts,
        };
        let mut s = Surface::from_mesh_keep_ids(mesh, self.label.clone());
        s.label = self.label.as_ref().map(|l| format!("{l}-mirror"));
        s
    }

    /// Ids of the cone points of order at least one.
    pub fn singular_ids(&self) -> Vec<usize> {
        self.cones
            .iter()
            .filter(|c| c.angle_multiple > 1)
            .map(|c| c.id)
            .collect()
    }
}

pub fn build_surface<S: Scalar>(
    polygons: Vec<Vec<Vec2<S>>>,
    gluing: Vec<(EdgeRef, EdgeRef)>,
) -> Result<Surface<S>, SurfaceError> {
    Surface::build(polygons, gluing, None)
}

#[cfg(test)]
mod tests;
