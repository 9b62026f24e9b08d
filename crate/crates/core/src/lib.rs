//! Birkhoff pseudospectral discretization of scalar optimal control problems:
//! Lobatto grids, integration matrices, the primal-dual Hessian, its spectrum,
//! and a Newton solver for the discrete optimality system.

pub mod birkhoff;
pub mod complexity;
pub mod grid;
pub mod kkt;
pub mod matrix_market;
pub mod model;
pub mod solver;
pub mod spectral;
mod poly;
