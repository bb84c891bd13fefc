//! Exact computation on translation surfaces of genus two: surface
//! construction, cylinder decompositions, saddle connections, rel
//! deformations, and numerical laboratories for horocycle averages.

pub mod constructions;
pub mod cylinders;
pub mod divergence;
pub mod ergodic;
pub mod exactfield;
pub mod geometry;
pub mod saddles;
pub mod surface;

pub use exactfield::{QuadField, QuadNum, Rational};
pub use geometry::{Mat2, Scalar, Vec2};
pub use surface::{build_surface, ConePoint, Stratum, Surface, SurfaceError, TranslationSurface};
