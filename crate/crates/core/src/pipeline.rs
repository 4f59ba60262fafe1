//! End-to-end construction: from a model choice to the full chain, both
//! partner-potential routes, the extra state and the regime classification.
//!
//! The f0-independent work (seed, w, companion, u2, u3, V2, intertwiner
//! coefficients) is done once in [`ChainBase`]; each f0 then costs a few
//! O(n) passes, which keeps parameter sweeps cheap.

use std::sync::Arc;

use crate::chain::{Anchoring, JordanChain, MissingState, Regime, SeedKind, TransformResult};
use crate::confluent2::{b2_coefficients_from_chain, compute_u2, compute_v2, compute_w, B2Coefficients};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::hyperconfluent3::{
    classify_regime, compute_f, compute_u_second_level, compute_v3_direct, compute_v3_iterative, compute_u3,
    missing_state_3, read_off_w1, sigma_minus,
};
use crate::model::{Model, ModelKind};
use crate::models::FreeParticlePack;
use crate::numerics::ode::{second_solution, solve_homogeneous, Direction};
use crate::numerics::stencil::find_interior_node;

/// Which base problem to transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelChoice {
    Free { k: f64 },
    Coulomb { l: u32 },
}

impl ModelChoice {
    pub fn model(&self) -> Result<Model> {
        match *self {
            ModelChoice::Free { k } => Model::free_particle(k),
            ModelChoice::Coulomb { l } => Model::coulomb(l),
        }
    }

    pub fn default_grid_n(&self) -> usize {
        match self {
            ModelChoice::Free { .. } => 40_001,
            ModelChoice::Coulomb { .. } => 60_000,
        }
    }
}

/// Everything about a transformation that does not depend on f0.
#[derive(Debug, Clone)]
pub struct ChainBase {
    pub model: Model,
    pub grid: Arc<Grid>,
    pub v0: GridFn,
    pub u1: GridFn,
    pub u1_tilde: GridFn,
    pub w: GridFn,
    pub u2: GridFn,
    pub u3: GridFn,
    /// W(u1, u3) at x0, read off the constructed chain.
    pub w1: f64,
    pub v2: GridFn,
    pub b2: B2Coefficients,
    pub sigma_minus: f64,
    pub epsilon: f64,
    /// Ground-state energy the seed is measured against; +inf encodes "no
    /// discrete spectrum below the seed" (free particle).
    pub e0: f64,
    pub seed_kind: SeedKind,
    pub beta1: f64,
    pub x0_index: usize,
}

/// A complete partner construction at a specific f0.
#[derive(Debug, Clone)]
pub struct PartnerArtifacts {
    pub f0: f64,
    pub regime: Regime,
    pub f: GridFn,
    pub v3_direct: GridFn,
    pub v3_iterative: GridFn,
    pub u_second_level: GridFn,
    pub missing: MissingState,
    /// Well center of the free-particle partner, when defined.
    pub x1: Option<f64>,
    pub transform: TransformResult,
}

impl ChainBase {
    pub fn build(choice: ModelChoice, grid_n: Option<usize>, beta1: f64) -> Result<Self> {
        let model = choice.model()?;
        let n = grid_n.unwrap_or_else(|| choice.default_grid_n());
        let grid = model.default_grid(n)?;
        Self::build_on_grid(model, grid, beta1)
    }

    pub fn build_on_grid(model: Model, grid: Arc<Grid>, beta1: f64) -> Result<Self> {
        let v0 = model.tabulate(&grid)?;
        let epsilon = model.seed_energy();
        let u1 = match model.tabulate_seed(&grid) {
            Some(u1) => u1?,
            // no closed-form seed: integrate out of the left edge with the
            // local exponential character e^{kappa x}, kappa^2 = V - eps,
            // which is the nodeless solution growing into the domain
            // whenever eps lies at or below the spectrum
            None => {
                let kappa = (v0.values()[0] - epsilon).max(0.0).sqrt();
                solve_homogeneous(&v0, epsilon, Direction::LeftToRight, (1.0, kappa))?
            }
        };
        if let Some(x) = find_interior_node(&u1) {
            return Err(Error::NodeDetected { x });
        }

        // reference point for the chain integrals: the nominal endpoint when
        // the left edge is a finite singular point (its hidden stretch is a
        // convergent sliver), otherwise an interior anchor — integrals like
        // ∫ w/u1^2 diverge toward a truncated-infinite edge
        let x0_index = if grid.left().is_singular() {
            0
        } else {
            match model.kind() {
                ModelKind::FreeParticle { .. } => grid.snap(0.0),
                _ => grid.len() / 2,
            }
        };
        let x0 = grid.x(x0_index);

        let w = compute_w(&u1, Anchoring::LeftAnchored)?;
        let sigma = sigma_minus(&u1, &w, x0)?;
        let u2 = compute_u2(&u1, &w, beta1, x0)?;
        // anchor the companion where the seed peaks; 1/u1^2 is then smallest
        // and the quadrature is best conditioned
        let mut i_peak = 0usize;
        for i in 0..u1.len() {
            if u1.values()[i].abs() > u1.values()[i_peak].abs() {
                i_peak = i;
            }
        }
        let u1_tilde = second_solution(&u1, grid.x(i_peak))?;
        let u3 = compute_u3(&u1, &u1_tilde, &u2)?;
        let w1 = read_off_w1(&u1, &u3, x0)?;
        let v2 = compute_v2(&v0, &w)?;
        let b2 = b2_coefficients_from_chain(&v0, &u1, &w, epsilon)?;

        let (e0, seed_kind) = match model.kind() {
            ModelKind::FreeParticle { .. } => (f64::INFINITY, SeedKind::NonPhysical),
            ModelKind::Coulomb { .. } => (epsilon, SeedKind::GroundState),
            ModelKind::Custom { .. } => (f64::INFINITY, SeedKind::NonPhysical),
        };

        Ok(ChainBase {
            model,
            grid,
            v0,
            u1,
            u1_tilde,
            w,
            u2,
            u3,
            w1,
            v2,
            b2,
            sigma_minus: sigma,
            epsilon,
            e0,
            seed_kind,
            beta1,
            x0_index,
        })
    }

    /// Window margin and spectral regime at this f0, without building V3.
    pub fn classify(&self, f0: f64) -> Result<(f64, Regime)> {
        let regime = classify_regime(self.epsilon, self.e0, f0, self.sigma_minus, self.seed_kind)?;
        Ok((f0 + self.sigma_minus, regime))
    }

    /// The f0 implied by the constructed chain itself (w1 - w0 beta1); the
    /// iterative and direct routes coincide exactly there.
    pub fn implied_f0(&self) -> f64 {
        let w0 = self.w.values()[self.x0_index];
        self.w1 - w0 * self.beta1
    }

    /// f(x) at this f0.
    pub fn f_profile(&self, f0: f64) -> Result<GridFn> {
        compute_f(&self.u1, &self.w, f0, self.grid.x(self.x0_index))
    }

    /// Norm of the raw (un-normalized) candidate state at the factorization
    /// energy; errs on singular f0.
    pub fn missing_norm(&self, f0: f64) -> Result<f64> {
        let f = self.f_profile(f0)?;
        Ok(missing_state_3(&self.u1, &self.w, &f)?.raw_norm)
    }

    /// Full partner construction at f0. Singular f0 values surface as
    /// `NodeDetected` with the location of the first node of f.
    pub fn with_f0(&self, f0: f64) -> Result<PartnerArtifacts> {
        let (_, regime) = self.classify(f0)?;
        let f = self.f_profile(f0)?;
        if let Regime::Singular { .. } = regime {
            let x = find_interior_node(&f).unwrap_or(self.grid.x_min());
            return Err(Error::NodeDetected { x });
        }
        let v3_direct = compute_v3_direct(&self.v0, &self.u1, &f)?;
        let x0 = self.grid.x(self.x0_index);
        let u_second_level = compute_u_second_level(&self.u1, &self.w, -f0, 1.0, x0)?;
        let v3_iterative = compute_v3_iterative(&self.v2, &u_second_level)?;
        let missing = missing_state_3(&self.u1, &self.w, &f)?;
        let x1 = match self.model.kind() {
            ModelKind::FreeParticle { k } => FreeParticlePack::new(*k)?.x1_of_f0(f0).ok(),
            _ => None,
        };
        let chain = JordanChain {
            epsilon: self.epsilon,
            u1: self.u1.clone(),
            u2: self.u2.clone(),
            u3: self.u3.clone(),
            w: self.w.clone(),
            f: f.clone(),
            beta1: self.beta1,
            f0,
            anchoring: Anchoring::LeftAnchored,
            x0_index: self.x0_index,
        };
        let transform = TransformResult {
            v2: Some(self.v2.clone()),
            v3: v3_direct.clone(),
            sigma_minus: self.sigma_minus,
            f0_used: f0,
            regime: regime.clone(),
            chain,
        };
        Ok(PartnerArtifacts {
            f0,
            regime,
            f,
            v3_direct,
            v3_iterative,
            u_second_level,
            missing,
            x1,
            transform,
        })
    }
}

/// Location and depth of the deepest interior local minimum of a potential.
pub fn well_minimum(v: &GridFn) -> Option<(f64, f64)> {
    let (a, b) = v.grid().resolved_interior();
    let vals = v.values();
    let mut best: Option<(usize, f64)> = None;
    for i in a.max(1)..=b.min(vals.len() - 2) {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            match best {
                Some((_, d)) if d <= vals[i] => {}
                _ => best = Some((i, vals[i])),
            }
        }
    }
    best.map(|(i, d)| (v.grid().x(i), d))
}
