//! Uniform sample grids and functions tabulated on them.
//!
//! Every quantity in the engine lives on a [`Grid`]: a strictly increasing,
//! uniformly spaced set of samples over a possibly truncated domain. Domains
//! that nominally extend to infinity or touch a singular point (the radial
//! origin) are truncated; the boundary kind records what the cut stands for
//! so that downstream code can treat the edge appropriately.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// What a grid endpoint represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Boundary {
    /// A genuine wall: the wavefunction vanishes exactly here.
    Finite,
    /// Truncation of an infinite domain; `nominal` is the signed infinity
    /// the edge stands for.
    TruncatedInfinite { nominal: f64 },
    /// Truncation near a singular point of the potential. The grid starts
    /// `delta` away from `nominal` (e.g. r = delta instead of r = 0).
    TruncatedSingular { nominal: f64, delta: f64 },
}

impl Boundary {
    pub fn is_singular(&self) -> bool {
        matches!(self, Boundary::TruncatedSingular { .. })
    }
}

/// Uniform one-dimensional grid.
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    h: f64,
    left: Boundary,
    right: Boundary,
    #[serde(skip)]
    xs: Vec<f64>,
}

/// Number of samples trimmed from each smooth edge when norms and residuals
/// are restricted to the interior (one-sided stencils degrade edge accuracy).
pub const EDGE_TRIM: usize = 5;

/// Coefficient of the resolution cutoff near a truncated-singular endpoint.
///
/// Fields entering the transformations behave like powers of the distance d
/// to the singular point, so a 4th-order stencil carries an O((h/d)^4 / d^2)
/// error there; requiring it below ~1e-5 gives d ~ (C h^4)^(1/6) with this C.
/// For h = 1e-3 the cutoff is d ~ 0.15.
pub const SINGULAR_RESOLVE_COEFF: f64 = 1.2e7;

impl Grid {
    /// Build a uniform grid on `[x_min, x_max]` with `n` samples.
    ///
    /// Truncated-singular endpoints are offset by their `delta`: the nominal
    /// coordinate is passed in `x_min`/`x_max` and the first (last) sample
    /// lands at `nominal + delta` (`nominal - delta`).
    pub fn new(x_min: f64, x_max: f64, n: usize, left: Boundary, right: Boundary) -> Result<Arc<Self>> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::NonFinite {
                what: format!("grid bounds ({x_min}, {x_max})"),
            });
        }
        if n < 3 {
            return Err(Error::TooFewPoints { required: 3, got: n });
        }
        let x_min = match left {
            Boundary::TruncatedSingular { nominal, delta } => {
                if delta <= 0.0 {
                    return Err(Error::Config("singular-endpoint offset must be positive".into()));
                }
                nominal + delta
            }
            _ => x_min,
        };
        let x_max = match right {
            Boundary::TruncatedSingular { nominal, delta } => {
                if delta <= 0.0 {
                    return Err(Error::Config("singular-endpoint offset must be positive".into()));
                }
                nominal - delta
            }
            _ => x_max,
        };
        if x_min >= x_max {
            return Err(Error::DegenerateDomain { x_min, x_max });
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        let xs = (0..n).map(|i| x_min + i as f64 * h).collect();
        Ok(Arc::new(Grid {
            x_min,
            x_max,
            n,
            h,
            left,
            right,
            xs,
        }))
    }

    /// Finite interval with plain walls.
    pub fn finite(x_min: f64, x_max: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(x_min, x_max, n, Boundary::Finite, Boundary::Finite)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn left(&self) -> Boundary {
        self.left
    }

    pub fn right(&self) -> Boundary {
        self.right
    }

    pub fn x(&self, i: usize) -> f64 {
        self.xs[i]
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Index of the sample nearest to `x` (clamped to the grid).
    pub fn snap(&self, x: f64) -> usize {
        let t = (x - self.x_min) / self.h;
        (t.round().max(0.0) as usize).min(self.n - 1)
    }

    /// Structural equality: same bounds, count and boundary kinds.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.left == other.left
            && self.right == other.right
    }

    /// Interior window `[first, last]` (inclusive) on which sup-norms and
    /// residuals are comparable.
    ///
    /// Smooth edges lose `EDGE_TRIM` samples to one-sided stencils. A
    /// truncated-singular edge additionally loses the zone the uniform grid
    /// cannot resolve: within distance d ~ (C h^4)^(1/6) of the singular
    /// point, finite differences of fields that vary on the scale of d are
    /// dominated by truncation error, so no check is meaningful there.
    pub fn resolved_interior(&self) -> (usize, usize) {
        let d_resolve = (SINGULAR_RESOLVE_COEFF * self.h.powi(4)).powf(1.0 / 6.0);
        let mut first = EDGE_TRIM;
        let mut last = self.n - 1 - EDGE_TRIM;
        if let Boundary::TruncatedSingular { nominal, .. } = self.left {
            let cut = nominal + d_resolve;
            while first < self.n && self.xs[first] < cut {
                first += 1;
            }
        }
        if let Boundary::TruncatedSingular { nominal, .. } = self.right {
            let cut = nominal - d_resolve;
            while last > 0 && self.xs[last] > cut {
                last -= 1;
            }
        }
        (first.min(self.n - 1), last.max(first.min(self.n - 1)))
    }
}

/// Extra attributes a tabulated function may carry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FnFlags {
    /// The two samples nearest a singular endpoint may legitimately be
    /// non-finite (e.g. a centrifugal potential at r -> 0).
    pub allows_endpoint_blowup: bool,
    /// Edge samples were produced by one-sided stencils and carry larger
    /// truncation error than the interior.
    pub reduced_edge_accuracy: bool,
}

/// A real-valued function tabulated on a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFn {
    grid: Arc<Grid>,
    values: Vec<f64>,
    label: String,
    flags: FnFlags,
}

impl GridFn {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let f = GridFn {
            grid,
            values,
            label: label.into(),
            flags: FnFlags::default(),
        };
        f.check_invariants()?;
        Ok(f)
    }

    /// Like [`GridFn::new`] but tolerating non-finite samples adjacent to
    /// singular endpoints.
    pub fn new_with_endpoint_blowup(grid: Arc<Grid>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let f = GridFn {
            grid,
            values,
            label: label.into(),
            flags: FnFlags {
                allows_endpoint_blowup: true,
                ..FnFlags::default()
            },
        };
        f.check_invariants()?;
        Ok(f)
    }

    /// Tabulate `f` at every grid sample.
    pub fn tabulate(grid: &Arc<Grid>, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.xs().iter().map(|&x| f(x)).collect();
        Self::new(Arc::clone(grid), values, label)
    }

    fn check_invariants(&self) -> Result<()> {
        if self.values.len() != self.grid.len() {
            return Err(Error::GridMismatch {
                context: format!(
                    "`{}` has {} values on a {}-point grid",
                    self.label,
                    self.values.len(),
                    self.grid.len()
                ),
            });
        }
        let n = self.values.len();
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                let near_edge = i < 2 || i >= n - 2;
                let edge_ok = self.flags.allows_endpoint_blowup
                    && near_edge
                    && ((i < 2 && self.grid.left().is_singular()) || (i >= n - 2 && self.grid.right().is_singular()));
                if !edge_ok {
                    return Err(Error::NonFinite {
                        what: format!("`{}` at x = {}", self.label, self.grid.x(i)),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> FnFlags {
        self.flags
    }

    pub fn set_reduced_edge_accuracy(&mut self) {
        self.flags.reduced_edge_accuracy = true;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw constructor for internal use where invariants are known to hold.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>, label: String, flags: FnFlags) -> Self {
        GridFn {
            grid,
            values,
            label,
            flags,
        }
    }

    pub fn same_grid(&self, other: &GridFn) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_layout(&other.grid)
    }

    pub fn require_same_grid(&self, other: &GridFn, context: &str) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                context: format!("{context}: `{}` vs `{}`", self.label, other.label),
            })
        }
    }

    /// Pointwise map, keeping the grid.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
            label: label.into(),
            flags: self.flags,
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip(&self, other: &GridFn, label: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Result<GridFn> {
        self.require_same_grid(other, "zip")?;
        Ok(GridFn {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            label: label.into(),
            flags: FnFlags {
                allows_endpoint_blowup: self.flags.allows_endpoint_blowup || other.flags.allows_endpoint_blowup,
                reduced_edge_accuracy: self.flags.reduced_edge_accuracy || other.flags.reduced_edge_accuracy,
            },
        })
    }

    /// Sup-norm over the resolved interior.
    pub fn sup_norm_interior(&self) -> f64 {
        let (a, b) = self.grid.resolved_interior();
        self.values[a..=b].iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Sup-norm over all samples.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}
