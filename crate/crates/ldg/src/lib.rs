//! Numerical lab for the norm-constrained Landau-de Gennes model with S1-equivariant
//! Q-tensor fields on axisymmetric domains.

pub mod boundary_data;
pub mod cli;
pub mod config;
pub mod io;
pub mod quadrature;
pub mod solver;
pub mod spheres;
pub mod tensor_core;
pub mod topology;
pub mod variation;
pub mod verify;
