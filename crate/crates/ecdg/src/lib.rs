//! Energy-conserving discontinuous Galerkin methods for linear symmetric
//! hyperbolic systems `B0 u_t = B1 u_x + B2 u_y` in one and two dimensions.
//!
//! The crate is organised bottom-up: dense linear algebra and eigen-pairings
//! ([`algebra`]), meshes ([`mesh`]), orthonormal reference bases and
//! quadrature ([`basis`]), the system catalog with exact solutions
//! ([`systems`]), numerical fluxes ([`flux`]), the matrix-free semi-discrete
//! operator ([`operator`]), Taylor-type time stepping ([`timestep`]), Gauss-Radau
//! and coupled projections ([`projections`]), and the experiment harness
//! ([`harness`]) driven by the command line ([`cli`]).

pub mod algebra;
pub mod basis;
pub mod cli;
pub mod error;
pub mod flux;
pub mod harness;
pub mod mesh;
pub mod operator;
pub mod projections;
pub mod systems;
pub mod timestep;

pub use error::{EcdgError, MeshError, Result};
