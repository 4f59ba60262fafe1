//! Grid calculus: cumulative quadrature, high-order differentiation,
//! log-derivative forms, linear ODE solutions and the verification
//! eigensolver.

pub mod eigen;
pub mod ode;
pub mod quadrature;
pub mod stencil;

pub use eigen::{eigensolve, eigensolve_with_states, EigenMethod, EigenSolveConfig};
pub use ode::{
    inhomogeneous_residual, second_solution, solve_homogeneous, solve_inhomogeneous, wronskian_unit_deviation,
    Direction,
};
pub use quadrature::{
    chain_integral, cumulative_integral, cumulative_integral_from_index, edge_tail_piece, integrate, l2_norm,
    singular_edge_exponent, EdgePiece,
};
pub use stencil::{derivative, find_interior_node, log_second_derivative, NODE_FLOOR};
