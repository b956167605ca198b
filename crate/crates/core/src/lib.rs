//! Vortex-blob dynamics for the 2D Euler equations on the cylinder `R x T`,
//! and exact evaluation of the tail-mass recursion that bounds how far
//! nonnegative vorticity can spread horizontally.
//!
//! The periodic direction is `y` with period `2 pi`. Velocities come from the
//! regularized Biot-Savart kernel by direct summation; the `parallel` feature
//! (on by default) spreads targets over a rayon pool without changing any
//! floating-point result.

pub mod confinement;
pub mod dynamics;
pub mod field;
pub mod geometry;
pub mod io;
mod par;
pub mod scenario;

pub use dynamics::{simulate, Execution, Integrator, SimConfig};
pub use field::{DiagnosticsRecord, VortexBlob, VorticityEnsemble};
pub use geometry::{CylinderPoint, Displacement, Velocity2};
