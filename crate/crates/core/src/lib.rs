//! Square-tiled translation surfaces, their SL(2,Z) orbits and cylinder
//! decompositions, torus covers branched over two points, and the modular
//! fibers of genus-2 elliptic differentials.

pub mod acceptance;
pub mod arith;
pub mod counting;
pub mod cover;
pub mod error;
pub mod export;
pub mod fiber;
pub mod geometry;
pub mod origami;
pub mod perm;
pub mod sl2z;

pub use error::{Error, Result};
pub use origami::Origami;
pub use perm::Perm;
