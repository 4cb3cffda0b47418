//! Continuous finite-element ALE solver for hyperbolic systems with graph viscosity.

pub mod ale;
pub mod checks;
pub mod fem;
pub mod harness;
pub mod scheme;
pub mod systems;
