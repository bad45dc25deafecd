//! Level set topology optimization for minimum mean compliance in 2D.
//!
//! The level set field evolves under either a semi-implicit reaction-diffusion
//! step (a regularized gradient flow driven by the topological derivative of
//! the compliance Lagrangian) or an accelerated variant whose two-field history
//! term adds Nesterov-style momentum. Three benchmark models (cantilever,
//! bridge, radiator) are built on structured triangulations of rectangles, the
//! elasticity state equation is solved with P1 elements and an ersatz material
//! in the void phase, and an augmented Lagrangian multiplier enforces the
//! volume-fraction limit.

pub mod config;
pub mod error;
pub mod evolution;
pub mod fem;
pub mod io;
pub mod levelset;
pub mod mesh2d;
pub mod multiplier;
pub mod optimizer;
pub mod par;
pub mod sensitivity;
pub mod sparse;

pub use error::{Error, Result};
