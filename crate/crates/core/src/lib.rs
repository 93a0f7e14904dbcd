//! Maslov index and eigenvalue counting for θ-periodic matrix Schrödinger
//! operators `H_θ = -d²/dx² + V(x)` on a finite interval.
//!
//! The crate has two independent sides that are compared against each other:
//!
//! * the symplectic side ([`symplectic`], [`propagation`], [`maslov`]) builds the
//!   Lagrangian planes of boundary conditions and solution traces, and computes
//!   Maslov indices of paths of such planes by crossing forms or by spectral flow
//!   of the Souriau map;
//! * the spectral side ([`oracle`]) counts eigenvalues directly, by Floquet
//!   root-finding on the monodromy matrix and by a finite-difference
//!   discretization.
//!
//! [`harness`] turns the counting identities that relate the two sides into
//! executable checks.
//!
//! The low-level modules are generic over the scalar type (see [`Real`]); the
//! index machinery is `f64`-only, and the aliases below name the concrete types.

pub mod harness;
pub mod maslov;
pub mod oracle;
pub mod potential;
pub mod propagation;
pub mod scalar;
pub mod symplectic;

mod error;
mod numeric;

pub use error::{Error, Result};
pub use scalar::Real;

/// Symplectic space over `f64`.
pub type Space64 = symplectic::SymplecticSpace<f64>;
/// Symplectic space over `f32`.
pub type Space32 = symplectic::SymplecticSpace<f32>;
/// Orthonormal Lagrangian frame over `f64`.
pub type Frame64 = symplectic::LagrangianFrame<f64>;
/// Orthonormal Lagrangian frame over `f32`.
pub type Frame32 = symplectic::LagrangianFrame<f32>;
/// Matrix potential over `f64`.
pub type Potential64 = potential::Potential<f64>;
/// Matrix potential over `f32`.
pub type Potential32 = potential::Potential<f32>;
/// Realified Schrödinger system over `f64`.
pub type System64<'a> = propagation::RealifiedSystem<'a, f64>;
/// Realified Schrödinger system over `f32`.
pub type System32<'a> = propagation::RealifiedSystem<'a, f32>;
