//! Earthquake deformations of hyperbolic surfaces assembled from two-pants
//! blocks, with the length-spectrum diagnostics needed to decide whether an
//! earthquake path stays in the length-spectrum Teichmüller space.

pub mod error;
pub mod hyp2;
pub mod lamination;
pub mod pants;
pub mod quake;
pub mod spectrum;

pub use error::{QuakeError, Result};
