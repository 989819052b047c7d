//! Symbolic and numerical verification of third-order evolution equations
//! that describe pseudospherical or spherical surfaces.

pub mod expr;
pub mod coframe;
pub mod families;
pub mod conservation;
pub mod numcheck;
