//! Shared domain types: the Jordan chain carried through a transformation,
//! the transformation result, spectral reports, and state wrappers.

use serde::Serialize;

use crate::grid::GridFn;

/// How the integration constant of w is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchoring {
    /// w0 = -nu_minus, so w vanishes at the left edge.
    LeftAnchored,
    /// Mirror image: w vanishes at the right edge.
    RightAnchored,
    /// Explicit w0 at the anchor point x0.
    ExplicitW0 { w0: f64, x0: f64 },
}

/// Spectral outcome of a transformation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "regime")]
pub enum Regime {
    /// A new level appears at the factorization energy.
    Augmented,
    /// The spectra coincide.
    Isospectral,
    /// The ground level is removed.
    GroundDeleted,
    /// The candidate transformation has a node and is rejected.
    Singular { reason: String },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Augmented => "augmented",
            Regime::Isospectral => "isospectral",
            Regime::GroundDeleted => "ground-deleted",
            Regime::Singular { .. } => "singular",
        }
    }
}

/// Whether the seed is a bona fide ground state or a nodeless nonphysical
/// solution below the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    NonPhysical,
    GroundState,
}

/// The length-3 Jordan chain at the factorization energy, with the reduced
/// quantities w = W(u1, u2) and f (the scalar factor of the third-order
/// Wronskian), and the free constants that fix them.
#[derive(Debug, Clone)]
pub struct JordanChain {
    pub epsilon: f64,
    pub u1: GridFn,
    pub u2: GridFn,
    pub u3: GridFn,
    pub w: GridFn,
    pub f: GridFn,
    pub beta1: f64,
    pub f0: f64,
    pub anchoring: Anchoring,
    /// Grid index of the reference point x0 for all chain integrals.
    pub x0_index: usize,
}

/// Output of a partner construction.
#[derive(Debug, Clone)]
pub struct TransformResult {
    pub v2: Option<GridFn>,
    pub v3: GridFn,
    pub sigma_minus: f64,
    pub f0_used: f64,
    pub regime: Regime,
    pub chain: JordanChain,
}

/// One converged level of a spectrum computation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumLevel {
    pub index: usize,
    pub energy: f64,
    /// Backward-relative residual of the eigenpair under the high-order
    /// stencil; an a-posteriori discretization error indicator.
    pub residual: f64,
}

/// Eigensolver output, with optional comparison against expected levels.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub levels: Vec<SpectrumLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Regime>,
    /// Rows of (expected, found, |delta|).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<(f64, f64, f64)>>,
    /// Set when any level's residual exceeds 10x the solver tolerance.
    pub discretization_too_coarse: bool,
}

impl SpectrumReport {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// A state produced by mapping an eigenfunction through an intertwiner.
#[derive(Debug, Clone)]
pub struct MappedState {
    /// Unit-norm state on the grid.
    pub state: GridFn,
    /// Norm of the mapped state before renormalization; the operator algebra
    /// predicts 1 up to discretization.
    pub raw_norm: f64,
}

/// A candidate bound state at the factorization energy, with its
/// normalizability diagnosis on the truncated grid.
#[derive(Debug, Clone)]
pub struct MissingState {
    /// Normalized when `normalizable`, otherwise the raw tabulation.
    pub state: GridFn,
    /// Norm of the raw (un-normalized) tabulation.
    pub raw_norm: f64,
    /// Fraction of the squared norm carried by the edge windows.
    pub left_edge_fraction: f64,
    pub right_edge_fraction: f64,
    pub normalizable: bool,
}
