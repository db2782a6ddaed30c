//! Finsler geometry of the unitary group: geodesics and convexity of the
//! rectifiable distance, minimal curves on unitary orbits, and the special
//! cases of projection orbits and the 2×2 nilpotent orbit.

pub mod error;
pub mod geodesic;
pub mod io;
pub mod linalg;
pub mod nilpotent;
pub mod norms;
pub mod orbit;
pub mod projection;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{AntiHermMatrix, CMat, HermMatrix, UnitaryMatrix, C64};
pub use norms::{FinslerNorm, NormKind};
