//! Base problems: a potential on a domain, plus whatever closed-form data
//! (seed solution, exact levels) the problem offers.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, GridFn};

pub type RealRule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which base problem a [`Model`] describes.
#[derive(Clone)]
pub enum ModelKind {
    /// V0 = 0 on the full line, factorization energy -k^2.
    FreeParticle { k: f64 },
    /// Radial effective potential -2/r + l(l+1)/r^2 on (0, inf).
    Coulomb { l: u32 },
    /// Caller-supplied potential.
    Custom { name: String },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::FreeParticle { k } => write!(f, "free-particle(k={k})"),
            ModelKind::Coulomb { l } => write!(f, "coulomb(l={l})"),
            ModelKind::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

/// Declarative description of a base problem.
#[derive(Clone)]
pub struct Model {
    kind: ModelKind,
    potential: RealRule,
    /// Nominal domain endpoints (may be infinite or singular).
    domain: (f64, f64),
    seed: Option<RealRule>,
    eigenvalues: Option<Arc<dyn Fn(usize) -> f64 + Send + Sync>>,
    seed_energy: f64,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("seed_energy", &self.seed_energy)
            .field("has_seed", &self.seed.is_some())
            .field("has_eigenvalues", &self.eigenvalues.is_some())
            .finish()
    }
}

impl Model {
    pub fn free_particle(k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Domain {
                what: format!("free particle needs k > 0, got {k}"),
            });
        }
        Ok(Model {
            kind: ModelKind::FreeParticle { k },
            potential: Arc::new(|_| 0.0),
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            seed: Some(Arc::new(move |x| (k * x).exp())),
            eigenvalues: None,
            seed_energy: -k * k,
        })
    }

    pub fn coulomb(l: u32) -> Result<Self> {
        // Factorials beyond (2l+2)! lose precision in f64.
        if l > 8 {
            return Err(Error::Domain {
                what: format!("coulomb supports l <= 8, got {l}"),
            });
        }
        let lf = f64::from(l);
        let norm = (lf + 1.0) * factorial(2 * l + 1).sqrt();
        let e0 = -1.0 / ((lf + 1.0) * (lf + 1.0));
        Ok(Model {
            kind: ModelKind::Coulomb { l },
            potential: Arc::new(move |r| -2.0 / r + lf * (lf + 1.0) / (r * r)),
            domain: (0.0, f64::INFINITY),
            seed: Some(Arc::new(move |r| {
                (2.0 * r / (lf + 1.0)).powi(l as i32 + 1) * (-r / (lf + 1.0)).exp() / norm
            })),
            eigenvalues: Some(Arc::new(move |n| {
                -1.0 / ((n as f64 + lf + 1.0) * (n as f64 + lf + 1.0))
            })),
            seed_energy: e0,
        })
    }

    pub fn custom(name: impl Into<String>, potential: RealRule, domain: (f64, f64), seed_energy: f64) -> Self {
        Model {
            kind: ModelKind::Custom { name: name.into() },
            potential,
            domain,
            seed: None,
            eigenvalues: None,
            seed_energy,
        }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn seed_energy(&self) -> f64 {
        self.seed_energy
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        (self.potential)(x)
    }

    pub fn seed_rule(&self) -> Option<&RealRule> {
        self.seed.as_ref()
    }

    pub fn eigenvalue(&self, n: usize) -> Option<f64> {
        self.eigenvalues.as_ref().map(|rule| rule(n))
    }

    /// Default truncated grid for this model.
    ///
    /// Free particle: [-20/k, 20/k] (ground-state tails decay like e^{-k|x|},
    /// leaving <~1e-8 at the cut). Coulomb: (delta, 60(l+1)] with delta = 1e-3.
    pub fn default_grid(&self, n: usize) -> Result<Arc<Grid>> {
        match self.kind {
            ModelKind::FreeParticle { k } => Grid::new(
                -20.0 / k,
                20.0 / k,
                n,
                Boundary::TruncatedInfinite { nominal: f64::NEG_INFINITY },
                Boundary::TruncatedInfinite { nominal: f64::INFINITY },
            ),
            ModelKind::Coulomb { l } => Grid::new(
                0.0,
                60.0 * (f64::from(l) + 1.0),
                n,
                Boundary::TruncatedSingular { nominal: 0.0, delta: 1e-3 },
                Boundary::TruncatedInfinite { nominal: f64::INFINITY },
            ),
            ModelKind::Custom { .. } => {
                let (a, b) = self.domain;
                if a.is_finite() && b.is_finite() {
                    Grid::finite(a, b, n)
                } else {
                    Err(Error::Config(
                        "custom models with unbounded domains need an explicit grid".into(),
                    ))
                }
            }
        }
    }

    /// Sample the potential on `grid`.
    pub fn tabulate(&self, grid: &Arc<Grid>) -> Result<GridFn> {
        let (lo, hi) = self.domain;
        if grid.x_min() < lo - 1e-12 || grid.x_max() > hi + 1e-12 {
            return Err(Error::Config(format!(
                "grid [{}, {}] leaves the model domain [{lo}, {hi}]",
                grid.x_min(),
                grid.x_max()
            )));
        }
        if let ModelKind::Coulomb { .. } = self.kind {
            if grid.x_min() == 0.0 {
                return Err(Error::SingularPointEvaluation { x: 0.0 });
            }
        }
        GridFn::tabulate(grid, "V0", |x| self.potential_at(x))
    }

    /// Sample the closed-form seed, if the model has one.
    pub fn tabulate_seed(&self, grid: &Arc<Grid>) -> Option<Result<GridFn>> {
        self.seed
            .as_ref()
            .map(|rule| GridFn::tabulate(grid, "u1", |x| rule(x)))
    }
}

/// n! in f64; callers keep n small enough for exact representation.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
