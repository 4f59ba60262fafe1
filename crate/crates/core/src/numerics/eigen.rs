//! Bound-state eigensolvers for -psi'' + V psi = E psi with Dirichlet walls.
//!
//! The default method discretizes with the standard 3-point second difference
//! on every grid sample, with phantom zeros one spacing outside each end (for
//! a radial grid starting at r = delta ~ h this puts the wall at r ~ 0, where
//! it belongs). Eigenvalues come from Sturm-sequence bisection, eigenvectors
//! from inverse iteration. A Numerov shooting method is kept as an
//! independent cross-check.

use crate::chain::{SpectrumLevel, SpectrumReport};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::numerics::ode::{solve_homogeneous, Direction};
use crate::numerics::quadrature::l2_norm;
use crate::numerics::stencil::derivative;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    DenseTridiagonal,
    NumerovShooting,
}

#[derive(Debug, Clone)]
pub struct EigenSolveConfig {
    pub n_levels: usize,
    pub method: EigenMethod,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

impl EigenSolveConfig {
    pub fn new(n_levels: usize, bracket: (f64, f64)) -> Self {
        EigenSolveConfig {
            n_levels,
            method: EigenMethod::DenseTridiagonal,
            bracket,
            tolerance: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bracket.0 >= self.bracket.1 {
            return Err(Error::Config(format!(
                "energy bracket ({}, {}) must be increasing",
                self.bracket.0, self.bracket.1
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.n_levels == 0 {
            return Err(Error::Config("n_levels must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of eigenvalues of the discretized Hamiltonian strictly below
/// `lambda` (Sturm sequence sign count). `sub[i] * sup[i]` couples rows i
/// and i+1; the matrix must be similar to a symmetric one (all products
/// positive), which holds for these second-difference operators.
fn sturm_count(diag: &[f64], sub: &[f64], sup: &[f64], lambda: f64) -> usize {
    let mut count = 0usize;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        if q == 0.0 {
            q = 1e-300;
        }
        q = (diag[i] - lambda) - sub[i - 1] * sup[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (T - lambda I) x = b for the tridiagonal T, by LU with partial
/// pivoting (pivoting keeps inverse iteration stable arbitrarily close to
/// lambda).
fn tridiag_solve_shifted(diag: &[f64], sub_diag: &[f64], sup_diag: &[f64], lambda: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&v| v - lambda).collect();
    let mut c = vec![0.0; n]; // superdiagonal, c[i] = T[i][i+1]
    let mut f = vec![0.0; n]; // second superdiagonal fill-in from pivoting
    c[..n - 1].copy_from_slice(sup_diag);
    let mut rhs = b.to_vec();

    for i in 0..n - 1 {
        let mut sub = sub_diag[i]; // current subdiagonal entry T[i+1][i]
        if sub.abs() > d[i].abs() {
            // swap rows i and i+1 within the band structure
            let (di, ci, fi) = (d[i], c[i], f[i]);
            d[i] = sub;
            c[i] = d[i + 1];
            f[i] = c[i + 1];
            sub = di;
            d[i + 1] = ci;
            c[i + 1] = fi;
            rhs.swap(i, i + 1);
        }
        let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
        let m = sub / piv;
        d[i + 1] -= m * c[i];
        c[i + 1] -= m * f[i];
        rhs[i + 1] -= m * rhs[i];
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= c[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= f[i] * x[i + 2];
        }
        let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
        x[i] = s / piv;
    }
    x
}

/// Backward-relative residual of the eigenpair under the 4th-order stencil,
/// over the resolved interior. This deliberately measures the pair against a
/// higher-order operator than the one diagonalized, so it reports the
/// discretization error of the matrix, not round-off.
fn eigenpair_residual(v: &GridFn, lambda: f64, psi: &GridFn) -> Result<f64> {
    let d2 = derivative(psi, 2)?;
    let (a, b) = v.grid().resolved_interior();
    let mut scale = 0.0f64;
    for i in a..=b {
        scale = scale.max(d2.values()[i].abs() + ((v.values()[i] - lambda) * psi.values()[i]).abs());
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut sup = 0.0f64;
    for i in a..=b {
        let res = -d2.values()[i] + (v.values()[i] - lambda) * psi.values()[i];
        sup = sup.max(res.abs());
    }
    Ok(sup / scale)
}

/// Lowest eigenvalues of -psi'' + V psi inside a bracket, with eigenvector
/// residuals. Returns fewer than `n_levels` levels when the bracket holds
/// fewer; errs when it holds none.
pub fn eigensolve(v: &GridFn, cfg: &EigenSolveConfig) -> Result<SpectrumReport> {
    let (report, _) = eigensolve_with_states(v, cfg)?;
    Ok(report)
}

/// Like [`eigensolve`] but also returning the normalized eigenvectors.
pub fn eigensolve_with_states(v: &GridFn, cfg: &EigenSolveConfig) -> Result<(SpectrumReport, Vec<GridFn>)> {
    cfg.validate()?;
    for (i, val) in v.values().iter().enumerate() {
        if !val.is_finite() {
            return Err(Error::NonFinite {
                what: format!("potential `{}` at x = {}", v.label(), v.grid().x(i)),
            });
        }
    }
    match cfg.method {
        EigenMethod::DenseTridiagonal => eigensolve_dense(v, cfg),
        EigenMethod::NumerovShooting => eigensolve_shooting(v, cfg),
    }
}

fn normalized_with_fixed_sign(mut psi: GridFn, label: String) -> Result<GridFn> {
    let norm = l2_norm(&psi)?;
    if norm > 0.0 {
        // make the first antinode positive so output bytes are reproducible
        let sup = psi.sup_norm();
        let mut sign = 1.0;
        for &vv in psi.values() {
            if vv.abs() > 0.1 * sup {
                sign = vv.signum();
                break;
            }
        }
        psi = psi.map(label, |vv| vv * sign / norm);
    }
    Ok(psi)
}

/// Discretized -d2/dx2 + V with the Dirichlet wall placed where the
/// boundary kind says it belongs.
struct DenseOperator {
    /// First grid index that is an unknown.
    i_start: usize,
    diag: Vec<f64>,
    sub: Vec<f64>,
    sup: Vec<f64>,
}

fn assemble(v: &GridFn) -> DenseOperator {
    let grid = v.grid();
    let n = grid.len();
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);

    // wall distance from the outermost unknown sample:
    //  - finite edge: the sample itself carries psi = 0 and drops out;
    //  - truncated-singular: the wall is the nominal point, delta away;
    //  - truncated-infinite: a phantom zero one spacing out (the tail is
    //    dead there anyway).
    let edge = |b: crate::grid::Boundary| -> (usize, Option<f64>) {
        match b {
            crate::grid::Boundary::Finite => (1, None),
            crate::grid::Boundary::TruncatedSingular { delta, .. } => (0, Some(delta)),
            crate::grid::Boundary::TruncatedInfinite { .. } => (0, Some(h)),
        }
    };
    let (skip_l, wall_l) = edge(grid.left());
    let (skip_r, wall_r) = edge(grid.right());
    let i_start = skip_l;
    let i_end = n - 1 - skip_r;
    let m = i_end - i_start + 1;

    let mut diag = Vec::with_capacity(m);
    let mut sub = vec![-inv_h2; m - 1];
    let mut sup = vec![-inv_h2; m - 1];
    for i in i_start..=i_end {
        diag.push(2.0 * inv_h2 + v.values()[i]);
    }
    // non-uniform second difference against a wall at distance d != h:
    //   psi'' ~ 2 psi_wall/(d(d+h)) - 2 psi_0/(d h) + 2 psi_1/(h(d+h))
    if let Some(d) = wall_l {
        if (d - h).abs() > 1e-12 * h {
            diag[0] = 2.0 / (d * h) + v.values()[i_start];
            sup[0] = -2.0 / (h * (d + h));
        }
    }
    if let Some(d) = wall_r {
        if (d - h).abs() > 1e-12 * h {
            diag[m - 1] = 2.0 / (d * h) + v.values()[i_end];
            sub[m - 2] = -2.0 / (h * (d + h));
        }
    }
    DenseOperator { i_start, diag, sub, sup }
}

fn eigensolve_dense(v: &GridFn, cfg: &EigenSolveConfig) -> Result<(SpectrumReport, Vec<GridFn>)> {
    let grid = v.grid();
    let op = assemble(v);
    let (diag, sub, sup) = (&op.diag, &op.sub, &op.sup);

    let (e_lo, e_hi) = cfg.bracket;
    let n_lo = sturm_count(diag, sub, sup, e_lo);
    let n_hi = sturm_count(diag, sub, sup, e_hi);
    if n_hi == n_lo {
        return Err(Error::NoEigenvalueInBracket { lo: e_lo, hi: e_hi });
    }
    let levels = cfg.n_levels.min(n_hi - n_lo);

    let mut report_levels = Vec::with_capacity(levels);
    let mut states = Vec::with_capacity(levels);
    let mut too_coarse = false;
    for j in 0..levels {
        let k = n_lo + j;
        let mut lo = e_lo;
        let mut hi = e_hi;
        for _ in 0..200 {
            if hi - lo < 0.25 * cfg.tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if sturm_count(diag, sub, sup, mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);

        let m = diag.len();
        let mut x = vec![1.0; m];
        for _ in 0..3 {
            let y = tridiag_solve_shifted(diag, sub, sup, lambda, &x);
            let mx = y.iter().fold(0.0f64, |mm, &vv| mm.max(vv.abs()));
            if mx == 0.0 || !mx.is_finite() {
                break;
            }
            x = y.iter().map(|&vv| vv / mx).collect();
        }
        let mut full = vec![0.0; grid.len()];
        full[op.i_start..op.i_start + m].copy_from_slice(&x);
        let psi = GridFn::from_parts(grid.clone(), full, format!("psi[{k}]"), Default::default());
        let psi = normalized_with_fixed_sign(psi, format!("psi[{k}]"))?;
        let residual = eigenpair_residual(v, lambda, &psi)?;
        too_coarse |= residual > 10.0 * cfg.tolerance;
        report_levels.push(SpectrumLevel { index: k, energy: lambda, residual });
        states.push(psi);
    }
    Ok((
        SpectrumReport {
            levels: report_levels,
            classification: None,
            comparison: None,
            discretization_too_coarse: too_coarse,
        },
        states,
    ))
}

/// Interior sign changes of the left-to-right shooting solution; equals the
/// number of eigenvalues below E by oscillation theory.
fn shooting_node_count(v: &GridFn, energy: f64) -> Result<usize> {
    let u = solve_homogeneous(v, energy, Direction::LeftToRight, (0.0, 1.0))?;
    let vals = u.values();
    let mut count = 0usize;
    let mut last = 1.0f64; // sign of the initial rise
    for &x in &vals[1..vals.len() - 1] {
        if x != 0.0 {
            let s = x.signum();
            if s != last {
                count += 1;
                last = s;
            }
        }
    }
    Ok(count)
}

/// Wronskian mismatch of the two one-sided shooting solutions at `i_match`,
/// normalized scale-free; vanishes at an eigenvalue.
fn shooting_mismatch(v: &GridFn, energy: f64, i_match: usize) -> Result<f64> {
    let left = solve_homogeneous(v, energy, Direction::LeftToRight, (0.0, 1.0))?;
    let right = solve_homogeneous(v, energy, Direction::RightToLeft, (0.0, -1.0))?;
    let dl = derivative(&left, 1)?;
    let dr = derivative(&right, 1)?;
    let (l, lp) = (left.values()[i_match], dl.values()[i_match]);
    let (r, rp) = (right.values()[i_match], dr.values()[i_match]);
    let s = (l * l + lp * lp).sqrt() * (r * r + rp * rp).sqrt();
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok((l * rp - lp * r) / s)
}

fn eigensolve_shooting(v: &GridFn, cfg: &EigenSolveConfig) -> Result<(SpectrumReport, Vec<GridFn>)> {
    let grid = v.grid();
    let (e_lo, e_hi) = cfg.bracket;
    let n_lo = shooting_node_count(v, e_lo)?;
    let n_hi = shooting_node_count(v, e_hi)?;
    if n_hi == n_lo {
        return Err(Error::NoEigenvalueInBracket { lo: e_lo, hi: e_hi });
    }
    let levels = cfg.n_levels.min(n_hi - n_lo);

    // match at the potential minimum (midpoint for a flat potential)
    let (a, b) = grid.resolved_interior();
    let mut i_match = (a + b) / 2;
    let mut vmin = f64::INFINITY;
    for i in a..=b {
        if v.values()[i] < vmin {
            vmin = v.values()[i];
            i_match = i;
        }
    }

    let mut report_levels = Vec::with_capacity(levels);
    let mut states = Vec::with_capacity(levels);
    let mut too_coarse = false;
    for j in 0..levels {
        let k = n_lo + j;
        let mut lo = e_lo;
        let mut hi = e_hi;
        for _ in 0..200 {
            if hi - lo < 0.25 * cfg.tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if shooting_node_count(v, mid)? <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // polish on the smooth matching function when it brackets a sign change
        let width = (hi - lo).max(cfg.tolerance);
        let (mut mlo, mut mhi) = ((lo - 20.0 * width).max(e_lo), (hi + 20.0 * width).min(e_hi));
        let flo = shooting_mismatch(v, mlo, i_match)?;
        let fhi = shooting_mismatch(v, mhi, i_match)?;
        let lambda = if flo.signum() != fhi.signum() {
            let mut fl = flo;
            for _ in 0..200 {
                if mhi - mlo < 0.25 * cfg.tolerance {
                    break;
                }
                let mid = 0.5 * (mlo + mhi);
                let fm = shooting_mismatch(v, mid, i_match)?;
                if fm.signum() == fl.signum() {
                    mlo = mid;
                    fl = fm;
                } else {
                    mhi = mid;
                }
            }
            0.5 * (mlo + mhi)
        } else {
            0.5 * (lo + hi)
        };

        let left = solve_homogeneous(v, lambda, Direction::LeftToRight, (0.0, 1.0))?;
        let right = solve_homogeneous(v, lambda, Direction::RightToLeft, (0.0, -1.0))?;
        let scale = if right.values()[i_match] != 0.0 {
            left.values()[i_match] / right.values()[i_match]
        } else {
            1.0
        };
        let n = grid.len();
        let mut vals = Vec::with_capacity(n);
        for i in 0..n {
            vals.push(if i <= i_match {
                left.values()[i]
            } else {
                right.values()[i] * scale
            });
        }
        let psi = GridFn::from_parts(grid.clone(), vals, format!("psi[{k}]"), Default::default());
        let psi = normalized_with_fixed_sign(psi, format!("psi[{k}]"))?;
        let residual = eigenpair_residual(v, lambda, &psi)?;
        too_coarse |= residual > 10.0 * cfg.tolerance;
        report_levels.push(SpectrumLevel { index: k, energy: lambda, residual });
        states.push(psi);
    }
    Ok((
        SpectrumReport {
            levels: report_levels,
            classification: None,
            comparison: None,
            discretization_too_coarse: too_coarse,
        },
        states,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    fn coulomb_grid(n: usize, rmax: f64) -> std::sync::Arc<Grid> {
        Grid::new(
            0.0,
            rmax,
            n,
            Boundary::TruncatedSingular { nominal: 0.0, delta: 1e-3 },
            Boundary::TruncatedInfinite { nominal: f64::INFINITY },
        )
        .unwrap()
    }

    #[test]
    fn coulomb_lowest_three() {
        // oracle: E_n = -1/(n+1)^2
        let g = coulomb_grid(60001, 60.0);
        let v = GridFn::tabulate(&g, "V0", |r| -2.0 / r).unwrap();
        let cfg = EigenSolveConfig::new(3, (-1.5, -0.01));
        let rep = eigensolve(&v, &cfg).unwrap();
        let e = rep.energies();
        assert!((e[0] + 1.0).abs() < 1e-3, "E0 = {}", e[0]);
        assert!((e[1] + 0.25).abs() < 1e-3, "E1 = {}", e[1]);
        assert!((e[2] + 1.0 / 9.0).abs() < 1e-3, "E2 = {}", e[2]);
        assert!(!rep.discretization_too_coarse);
    }

    #[test]
    fn poschl_teller_single_level() {
        // oracle: -2 sech^2 x holds exactly one bound state, at -1
        let g = Grid::new(
            -20.0,
            20.0,
            40001,
            Boundary::TruncatedInfinite { nominal: f64::NEG_INFINITY },
            Boundary::TruncatedInfinite { nominal: f64::INFINITY },
        )
        .unwrap();
        let v = GridFn::tabulate(&g, "PT", |x| -2.0 / x.cosh().powi(2)).unwrap();
        let cfg = EigenSolveConfig::new(4, (-1.9, -1e-4));
        let rep = eigensolve(&v, &cfg).unwrap();
        assert_eq!(rep.levels.len(), 1, "exactly one bound state");
        assert!((rep.levels[0].energy + 1.0).abs() < 1e-4);
    }

    #[test]
    fn empty_bracket_errors() {
        let g = Grid::finite(-20.0, 20.0, 2001).unwrap();
        let v = GridFn::tabulate(&g, "0", |_| 0.0).unwrap();
        let cfg = EigenSolveConfig::new(1, (-2.0, -0.01));
        assert!(matches!(
            eigensolve(&v, &cfg),
            Err(Error::NoEigenvalueInBracket { .. })
        ));
    }

    #[test]
    fn eigenvector_satisfies_equation() {
        let g = coulomb_grid(30001, 40.0);
        let v = GridFn::tabulate(&g, "V0", |r| -2.0 / r).unwrap();
        let (rep, states) = eigensolve_with_states(&v, &EigenSolveConfig::new(2, (-1.5, -0.01))).unwrap();
        // ground state should match 2 r e^{-r} pointwise after normalization
        let exact = GridFn::tabulate(&g, "u", |r| 2.0 * r * (-r).exp()).unwrap();
        let i = g.snap(1.0);
        let ratio = states[0].values()[i] / exact.values()[i];
        for j in [g.snap(0.5), g.snap(2.0), g.snap(5.0)] {
            let r = states[0].values()[j] / exact.values()[j];
            assert!((r / ratio - 1.0).abs() < 1e-3, "not proportional at {j}");
        }
        assert!(rep.levels[0].residual < 1e-5);
    }

    #[test]
    fn shooting_agrees_with_dense() {
        let g = Grid::finite(-15.0, 15.0, 15001).unwrap();
        let v = GridFn::tabulate(&g, "PT", |x| -2.0 / x.cosh().powi(2)).unwrap();
        let dense = eigensolve(&v, &EigenSolveConfig::new(1, (-1.9, -1e-3))).unwrap();
        let mut cfg = EigenSolveConfig::new(1, (-1.9, -1e-3));
        cfg.method = EigenMethod::NumerovShooting;
        let shoot = eigensolve(&v, &cfg).unwrap();
        let d = (dense.levels[0].energy - shoot.levels[0].energy).abs();
        assert!(d < 1e-4, "dense {} vs shooting {}", dense.levels[0].energy, shoot.levels[0].energy);
    }

    #[test]
    fn richardson_stability_under_refinement() {
        // doubling the resolution must move eigenvalues less than the tolerance
        let e_at = |n: usize| {
            let g = Grid::finite(-15.0, 15.0, n).unwrap();
            let v = GridFn::tabulate(&g, "PT", |x| -2.0 / x.cosh().powi(2)).unwrap();
            eigensolve(&v, &EigenSolveConfig::new(1, (-1.9, -1e-3))).unwrap().levels[0].energy
        };
        let coarse = e_at(7501);
        let fine = e_at(15001);
        assert!((coarse - fine).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let g = coulomb_grid(101, 60.0);
        let v = GridFn::tabulate(&g, "V0", |r| -2.0 / r).unwrap();
        let cfg = EigenSolveConfig::new(1, (-1.5, -0.01));
        let rep = eigensolve(&v, &cfg).unwrap();
        assert!(rep.discretization_too_coarse);
    }

    #[test]
    fn harmonic_oscillator_ladder() {
        // oracle: E_n = 2n + 1 for V = x^2 in these units
        let g = Grid::finite(-12.0, 12.0, 24001).unwrap();
        let v = GridFn::tabulate(&g, "x^2", |x| x * x).unwrap();
        let rep = eigensolve(&v, &EigenSolveConfig::new(3, (0.0, 6.0))).unwrap();
        let e = rep.energies();
        assert!((e[0] - 1.0).abs() < 1e-5);
        assert!((e[1] - 3.0).abs() < 1e-5);
        assert!((e[2] - 5.0).abs() < 1e-5);
    }

}
