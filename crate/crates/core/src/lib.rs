//! Construction and verification of confluent second-order and hyperconfluent
//! third-order SUSY partner potentials for one-dimensional Schrödinger
//! problems.
//!
//! The engine builds, from a nodeless seed solution u1 at a factorization
//! energy, the reduced Wronskian w = W(u1, u2), the length-3 Jordan chain
//! (u1, u2, u3), the scalar profile f with W(u1, u2, u3) = u1 f, and the
//! partner potentials
//!
//!   V2 = V0 - 2 (ln w)''
//!   V3 = V0 - 2 (ln u1)'' - 2 (ln f)''
//!
//! together with the intertwining operators that map eigenstates across, the
//! extra ("missing") state at the factorization energy, and the admissible
//! window f0 < -sigma_minus that keeps the transformation free of nodes. An
//! independent finite-difference eigensolver verifies the predicted spectral
//! outcome: a created level, strict isospectrality, or a deleted ground
//! state.
//!
//! Modules follow the pipeline: [`grid`] and [`model`] define the currency,
//! [`numerics`] the calculus, [`specfun`] the Coulomb series, [`confluent2`]
//! and [`hyperconfluent3`] the transformations, [`models`] the closed-form
//! packs used as oracles, [`verify`] the machine-checkable claims, and
//! [`pipeline`]/[`cli`] the orchestration.

pub mod chain;
pub mod cli;
pub mod confluent2;
pub mod error;
pub mod grid;
pub mod hyperconfluent3;
pub mod model;
pub mod models;
pub mod numerics;
pub mod pipeline;
pub mod specfun;
pub mod verify;

pub use chain::{
    Anchoring, JordanChain, MappedState, MissingState, Regime, SeedKind, SpectrumLevel, SpectrumReport,
    TransformResult,
};
pub use error::{Error, Result};
pub use grid::{Boundary, Grid, GridFn};
pub use model::{Model, ModelKind};
