//! Decomposable convex optimization with separation oracles.
//!
//! Minimizes `c·x` over `Π K_i ∩ {A x = b}` where each block `K_i` is known
//! only through a separation oracle. Each block keeps an inner body (hull
//! of oracle-certified points) and an outer body (ball cut by returned
//! halfspaces); the solver follows a barrier path on the inner bodies and
//! refines whichever block the outer centroid shows to be too loose.

pub mod barriers;
pub mod error;
pub mod geometry;
pub mod init;
pub mod linalg;
pub mod oracles;
pub mod sampling;
pub mod sfm;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
