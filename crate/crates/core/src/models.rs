//! Closed-form model packs: the free particle and the radial Coulomb
//! problem. These supply analytic seeds, the reduced Wronskian, the chain
//! profile f and the partner potential in closed form wherever one exists —
//! the oracles the generic quadrature pipeline is validated against.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::model::{factorial, Model};
use crate::numerics::stencil::derivative;
use crate::specfun::{coulomb_f, lower_incomplete_gamma_int, CoulombFRep};

/// Free particle with factorization energy -k^2 and seed e^{kx}.
///
/// The whole chain is elementary: w = -e^{2kx}/(2k),
/// f = f0 + (1 - e^{2kx})/(8k^3), and inside the admissible window
/// f0 < -1/(8k^3) the partner is the one-well reflectionless potential
/// -2k^2 sech^2(k(x - x1)), with x1 set by f0.
#[derive(Debug, Clone, Copy)]
pub struct FreeParticlePack {
    k: f64,
}

impl FreeParticlePack {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Domain {
                what: format!("free particle needs k > 0, got {k}"),
            });
        }
        Ok(FreeParticlePack { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        -self.k * self.k
    }

    pub fn u1(&self, x: f64) -> f64 {
        (self.k * x).exp()
    }

    pub fn w(&self, x: f64) -> f64 {
        -(2.0 * self.k * x).exp() / (2.0 * self.k)
    }

    pub fn f(&self, f0: f64, x: f64) -> f64 {
        f0 + (1.0 - (2.0 * self.k * x).exp()) / (8.0 * self.k.powi(3))
    }

    pub fn sigma_minus(&self) -> f64 {
        1.0 / (8.0 * self.k.powi(3))
    }

    /// Well center x1 with f0 = -(1 + e^{2 k x1}) / (8 k^3).
    pub fn x1_of_f0(&self, f0: f64) -> Result<f64> {
        let arg = -8.0 * self.k.powi(3) * f0 - 1.0;
        if arg <= 0.0 {
            return Err(Error::ForbiddenWindow {
                f0,
                boundary: -self.sigma_minus(),
            });
        }
        Ok(arg.ln() / (2.0 * self.k))
    }

    /// The partner potential in closed form: -2 k^2 sech^2(k (x - x1)).
    pub fn v3_closed(&self, x1: f64, x: f64) -> f64 {
        let s = 1.0 / (self.k * (x - x1)).cosh();
        -2.0 * self.k * self.k * s * s
    }

    pub fn model(&self) -> Model {
        Model::free_particle(self.k).expect("validated in new")
    }
}

/// Radial Coulomb problem at angular momentum l, seeded by the normalized
/// ground state.
///
/// w comes out as an incomplete gamma, f as the double/2F2 series evaluated
/// by [`crate::specfun`], and the partner takes the form
/// V3 = -2/r + (l+1)(l+2)/r^2 + 2 [w^2/(f u1^2)]'.
#[derive(Debug, Clone, Copy)]
pub struct CoulombPack {
    l: u32,
}

impl CoulombPack {
    pub fn new(l: u32) -> Result<Self> {
        if l > 8 {
            return Err(Error::Domain {
                what: format!("coulomb supports l <= 8, got {l}"),
            });
        }
        Ok(CoulombPack { l })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn epsilon(&self) -> f64 {
        let lf = f64::from(self.l);
        -1.0 / ((lf + 1.0) * (lf + 1.0))
    }

    pub fn v0(&self, r: f64) -> f64 {
        let lf = f64::from(self.l);
        -2.0 / r + lf * (lf + 1.0) / (r * r)
    }

    pub fn u1(&self, r: f64) -> f64 {
        let lf = f64::from(self.l);
        let norm = (lf + 1.0) * factorial(2 * self.l + 1).sqrt();
        (2.0 * r / (lf + 1.0)).powi(self.l as i32 + 1) * (-r / (lf + 1.0)).exp() / norm
    }

    pub fn energy(&self, n: usize) -> f64 {
        let lf = f64::from(self.l);
        let nn = n as f64 + lf + 1.0;
        -1.0 / (nn * nn)
    }

    /// w(r) = -gamma(2l+3, 2r/(l+1)) / (2l+2)!.
    pub fn w(&self, r: f64) -> Result<f64> {
        let t = 2.0 * r / (f64::from(self.l) + 1.0);
        Ok(-lower_incomplete_gamma_int(2 * self.l + 3, t)? / factorial(2 * self.l + 2))
    }

    /// w/u1 with its vanishing limit imposed at r = 0.
    pub fn w_over_u1(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self.w(r)? / self.u1(r))
    }

    /// Partial sum of the tail-series form of w/u1; the cross-check against
    /// the closed-form ratio.
    pub fn w_over_u1_series(&self, r: f64, terms: usize) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let lf = f64::from(self.l);
        let t = 2.0 * r / (lf + 1.0);
        let mut sum = 0.0f64;
        let base = 2 * self.l + 3;
        // term_k = t^{k - l - 1} / k!
        let mut power = t.powi((base - self.l - 1) as i32);
        let mut kfact = factorial(base);
        for k in base..base + terms as u32 {
            if k > base {
                power *= t;
                kfact *= f64::from(k);
            }
            sum += power / kfact;
        }
        -(lf + 1.0) * factorial(2 * self.l + 1).sqrt() * (-r / (lf + 1.0)).exp() * sum
    }

    /// f(r) by the requested series representation.
    pub fn f(&self, f0: f64, r: f64, rep: CoulombFRep) -> Result<f64> {
        coulomb_f(self.l, f0, r, rep)
    }

    /// The partner potential on a grid, from the closed forms: the first two
    /// terms analytically, the last as a 4th-order finite difference of the
    /// closed-form bracket w^2 / (f u1^2).
    pub fn v3_on_grid(&self, f0: f64, grid: &Arc<Grid>) -> Result<GridFn> {
        if f0 >= 0.0 {
            return Err(Error::ForbiddenWindow { f0, boundary: 0.0 });
        }
        let lf = f64::from(self.l);
        let mut bracket = Vec::with_capacity(grid.len());
        for &r in grid.xs() {
            let w = self.w(r)?;
            let u = self.u1(r);
            let f = self.f(f0, r, CoulombFRep::HypPlusTail)?;
            bracket.push(w * w / (f * u * u));
        }
        let bracket = GridFn::new(Arc::clone(grid), bracket, "w^2/(f u1^2)")?;
        let d = derivative(&bracket, 1)?;
        let mut out = Vec::with_capacity(grid.len());
        for (i, &r) in grid.xs().iter().enumerate() {
            out.push(-2.0 / r + (lf + 1.0) * (lf + 2.0) / (r * r) + 2.0 * d.values()[i]);
        }
        let mut v3 = GridFn::new(Arc::clone(grid), out, "V3_closed")?;
        v3.set_reduced_edge_accuracy();
        Ok(v3)
    }

    /// Normalized bound states u_n(r) for l = 0 in closed form (test
    /// oracles; n = 0, 1, 2).
    pub fn bound_state_l0(&self, n: usize, r: f64) -> Result<f64> {
        if self.l != 0 {
            return Err(Error::Domain {
                what: "closed-form states are provided for l = 0 only".into(),
            });
        }
        Ok(match n {
            0 => 2.0 * r * (-r).exp(),
            1 => (0.5f64).sqrt() * r * (1.0 - 0.5 * r) * (-0.5 * r).exp(),
            2 => 2.0 / (3.0 * 3.0f64.sqrt()) * r * (1.0 - 2.0 * r / 3.0 + 2.0 * r * r / 27.0) * (-r / 3.0).exp(),
            _ => {
                return Err(Error::Domain {
                    what: format!("closed-form states cover n <= 2, got {n}"),
                })
            }
        })
    }

    pub fn model(&self) -> Model {
        Model::coulomb(self.l).expect("validated in new")
    }
}

/// One row of the partner-vs-base tabulation.
#[derive(Debug, Clone, Copy)]
pub struct Figure1Row {
    pub r: f64,
    pub v0: f64,
    pub v3: f64,
}

/// The l = 0 partner against the bare Coulomb potential, with the induced
/// well located.
#[derive(Debug, Clone)]
pub struct Figure1 {
    pub rows: Vec<Figure1Row>,
    pub well_r: f64,
    pub well_depth: f64,
}

/// Tabulate V0 = -2/r and its partner for the given f0 < 0 over (delta,
/// r_max], locating the induced well.
pub fn coulomb_figure1(f0: f64, r_max: f64, n: usize) -> Result<Figure1> {
    if f0 >= 0.0 {
        return Err(Error::ForbiddenWindow { f0, boundary: 0.0 });
    }
    let pack = CoulombPack::new(0)?;
    let grid = Grid::new(
        0.0,
        r_max,
        n,
        crate::grid::Boundary::TruncatedSingular { nominal: 0.0, delta: 1e-3 },
        crate::grid::Boundary::TruncatedInfinite { nominal: f64::INFINITY },
    )?;
    let v3 = pack.v3_on_grid(f0, &grid)?;
    let mut rows = Vec::with_capacity(n);
    for (i, &r) in grid.xs().iter().enumerate() {
        rows.push(Figure1Row {
            r,
            v0: pack.v0(r),
            v3: v3.values()[i],
        });
    }
    let (a, b) = grid.resolved_interior();
    let mut i_min = a;
    for i in a..=b {
        if v3.values()[i] < v3.values()[i_min] {
            i_min = i;
        }
    }
    Ok(Figure1 {
        rows,
        well_r: grid.x(i_min),
        well_depth: v3.values()[i_min],
    })
}
