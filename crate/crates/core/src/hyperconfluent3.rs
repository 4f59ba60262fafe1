//! The hyperconfluent third-order transformation: the profile f, the window
//! boundary sigma_minus, the partner V3 by the direct and iterative routes,
//! the third chain member, the third-order intertwiner, mapped and missing
//! states, and the spectral regime classification.

use crate::chain::{MappedState, MissingState, Regime, SeedKind};
use crate::confluent2::{apply_b2, normalize_mapped, norm_diagnosis, B2Coefficients};
use crate::error::{Error, Result};
use crate::grid::{FnFlags, GridFn};
use crate::numerics::ode::solve_inhomogeneous;
use crate::numerics::quadrature::{chain_integral, cumulative_integral_from_index};
use crate::numerics::stencil::{derivative, find_interior_node, log_second_derivative};

/// Tolerance for deciding that f0 sits exactly on the window boundary
/// -sigma_minus, where the spectral regime switches.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Cumulative ∫_{x0}^x (w/u1)^2, the integral behind both f and the window
/// boundary. An anchor on the first sample of a truncated edge means the
/// nominal endpoint (the hidden stretch enters analytically).
fn accumulated_sigma(u1: &GridFn, w: &GridFn, i0: usize) -> Result<GridFn> {
    if let Some(x) = find_interior_node(u1) {
        return Err(Error::NodeDetected { x });
    }
    let integrand = w.zip(u1, "(w/u1)^2", |wv, uv| {
        let r = wv / uv;
        r * r
    })?;
    chain_integral(&integrand, i0)
}

/// f(x) = f0 - ∫_{x0}^x (w/u1)^2, tabulated by cumulative quadrature.
pub fn compute_f(u1: &GridFn, w: &GridFn, f0: f64, x0: f64) -> Result<GridFn> {
    u1.require_same_grid(w, "compute_f")?;
    let i0 = u1.grid().snap(x0);
    let sigma = accumulated_sigma(u1, w, i0)?;
    Ok(sigma.map("f", move |s| f0 - s))
}

/// The admissible-window boundary sigma_minus = ∫_{xl}^{x0} (w/u1)^2 for a
/// left-anchored w; f stays nodeless exactly when f0 < -sigma_minus.
pub fn sigma_minus(u1: &GridFn, w: &GridFn, x0: f64) -> Result<f64> {
    u1.require_same_grid(w, "sigma_minus")?;
    // left-anchored w vanishes at the left edge; anything else is misuse
    let w_edge = w.values()[0].abs();
    if w_edge > 1e-6 * w.sup_norm() {
        return Err(Error::Config(
            "sigma_minus needs a left-anchored w (w must vanish at the left edge)".into(),
        ));
    }
    let i0 = u1.grid().snap(x0);
    let sigma = accumulated_sigma(u1, w, 0)?;
    Ok(sigma.values()[i0].max(0.0))
}

/// V3 = V0 - 2 (ln u1)'' - 2 (ln f)'', both factors sign-free.
pub fn compute_v3_direct(v0: &GridFn, u1: &GridFn, f: &GridFn) -> Result<GridFn> {
    v0.require_same_grid(u1, "compute_v3_direct")?;
    v0.require_same_grid(f, "compute_v3_direct")?;
    let lu = log_second_derivative(u1)?;
    let lf = log_second_derivative(f)?;
    let mut out = Vec::with_capacity(v0.len());
    for i in 0..v0.len() {
        out.push(v0.values()[i] - 2.0 * lu.values()[i] - 2.0 * lf.values()[i]);
    }
    let mut v3 = GridFn::from_parts(v0.grid().clone(), out, "V3".into(), FnFlags::default());
    v3.set_reduced_edge_accuracy();
    Ok(v3)
}

/// General solution of the second-order partner problem at the factorization
/// energy: u2lvl = -c2 (u1/w) [ -c1/c2 - ∫_{x0}^x (w/u1)^2 ].
///
/// With -c1/c2 = f0 this is (u1/w) f up to the factor -c2.
pub fn compute_u_second_level(u1: &GridFn, w: &GridFn, c1: f64, c2: f64, x0: f64) -> Result<GridFn> {
    if c2 == 0.0 {
        return Err(Error::DegenerateCombination);
    }
    u1.require_same_grid(w, "compute_u_second_level")?;
    if let Some(x) = find_interior_node(w) {
        return Err(Error::NodeDetected { x });
    }
    let i0 = u1.grid().snap(x0);
    let sigma = accumulated_sigma(u1, w, i0)?;
    let ratio = u1.zip(w, "u1/w", |u, wv| u / wv)?;
    let out = ratio.zip(&sigma, "u2lvl", move |r, s| -c2 * r * (-c1 / c2 - s))?;
    Ok(out)
}

/// V3 = V2 - 2 (ln u2lvl)'': the iterative route through the second-order
/// partner. Must reproduce the direct route when f0 = -c1/c2.
pub fn compute_v3_iterative(v2: &GridFn, u_second_level: &GridFn) -> Result<GridFn> {
    v2.require_same_grid(u_second_level, "compute_v3_iterative")?;
    let lu = log_second_derivative(u_second_level)?;
    let mut v3 = v2.zip(&lu, "V3_iter", |v, l| v - 2.0 * l)?;
    v3.set_reduced_edge_accuracy();
    Ok(v3)
}

/// Third chain member: the particular solution of (H0 - eps) u3 = u2.
pub fn compute_u3(u1: &GridFn, u1_tilde: &GridFn, u2: &GridFn) -> Result<GridFn> {
    let mut u3 = solve_inhomogeneous(u1, u1_tilde, u2)?;
    u3 = GridFn::from_parts(u3.grid().clone(), u3.values().to_vec(), "u3".into(), u3.flags());
    Ok(u3)
}

/// Reduced evaluation of W(u1, u2, u3) = u1 W(u1, u3) - u2 W(u1, u2), with
/// W(u1, u3)(x) = w1 - ∫_{x0}^x u1 u2 and w1 read off the constructed u3 at
/// x0. Only first derivatives enter.
pub fn wronskian3(u1: &GridFn, u2: &GridFn, u3: &GridFn, x0: f64) -> Result<GridFn> {
    u1.require_same_grid(u2, "wronskian3")?;
    u1.require_same_grid(u3, "wronskian3")?;
    let d1 = derivative(u1, 1)?;
    let d2 = derivative(u2, 1)?;
    let d3 = derivative(u3, 1)?;
    let i0 = u1.grid().snap(x0);
    let w1 = u1.values()[i0] * d3.values()[i0] - d1.values()[i0] * u3.values()[i0];
    let u1u2 = u1.zip(u2, "u1*u2", |a, b| a * b)?;
    let int12 = cumulative_integral_from_index(&u1u2, i0)?;
    let n = u1.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let w12 = u1.values()[i] * d2.values()[i] - d1.values()[i] * u2.values()[i];
        let w13 = w1 - int12.values()[i];
        out.push(u1.values()[i] * w13 - u2.values()[i] * w12);
    }
    let mut g = GridFn::from_parts(u1.grid().clone(), out, "W(u1,u2,u3)".into(), FnFlags::default());
    g.set_reduced_edge_accuracy();
    Ok(g)
}

/// W(u1, u3)(x0) for the constructed chain; the implied f0 is
/// w1 - w0 beta1.
pub fn read_off_w1(u1: &GridFn, u3: &GridFn, x0: f64) -> Result<f64> {
    u1.require_same_grid(u3, "read_off_w1")?;
    let d1 = derivative(u1, 1)?;
    let d3 = derivative(u3, 1)?;
    let i0 = u1.grid().snap(x0);
    Ok(u1.values()[i0] * d3.values()[i0] - d1.values()[i0] * u3.values()[i0])
}

/// The raw 3x3 Wronskian determinant with finite-difference second
/// derivatives; the independent cross-check for [`wronskian3`].
pub fn wronskian3_determinant(u1: &GridFn, u2: &GridFn, u3: &GridFn) -> Result<GridFn> {
    u1.require_same_grid(u2, "wronskian3_determinant")?;
    u1.require_same_grid(u3, "wronskian3_determinant")?;
    let d = |g: &GridFn, o: u8| derivative(g, o);
    let (a1, a2) = (d(u1, 1)?, d(u1, 2)?);
    let (b1, b2) = (d(u2, 1)?, d(u2, 2)?);
    let (c1, c2) = (d(u3, 1)?, d(u3, 2)?);
    let n = u1.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (f, fp, fpp) = (u1.values()[i], a1.values()[i], a2.values()[i]);
        let (g, gp, gpp) = (u2.values()[i], b1.values()[i], b2.values()[i]);
        let (h, hp, hpp) = (u3.values()[i], c1.values()[i], c2.values()[i]);
        out.push(f * (gp * hpp - hp * gpp) - g * (fp * hpp - hp * fpp) + h * (fp * gpp - gp * fpp));
    }
    let mut det = GridFn::from_parts(u1.grid().clone(), out, "det3".into(), FnFlags::default());
    det.set_reduced_edge_accuracy();
    Ok(det)
}

fn a3_apply(u_second_level: &GridFn, stage1: &GridFn, label: String) -> Result<GridFn> {
    let d_u = derivative(u_second_level, 1)?;
    let d_stage = derivative(stage1, 1)?;
    let n = stage1.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let logder = d_u.values()[i] / u_second_level.values()[i];
        out.push(-d_stage.values()[i] + logder * stage1.values()[i]);
    }
    let mut g = GridFn::from_parts(stage1.grid().clone(), out, label, FnFlags::default());
    g.set_reduced_edge_accuracy();
    Ok(g)
}

/// Apply the third-order intertwiner B3 = A3 B2, with
/// A3 = -d/dx + (u2lvl)'/u2lvl evaluated sign-free.
pub fn apply_b3(b2: &B2Coefficients, u_second_level: &GridFn, psi: &GridFn) -> Result<GridFn> {
    u_second_level.require_same_grid(psi, "apply_b3")?;
    if let Some(x) = find_interior_node(u_second_level) {
        return Err(Error::NodeDetected { x });
    }
    let stage1 = apply_b2(b2, psi)?;
    a3_apply(u_second_level, &stage1, format!("B3({})", psi.label()))
}

/// [`apply_b3`] for a state known to solve the base problem at `energy`.
///
/// The stage-one image and its derivative are assembled from the state's
/// own equation and the analytic coefficient derivatives (when the
/// coefficients carry them), so no quantity built by quadrature is ever
/// finite-differenced: the noise floor of the composite operator stays
/// orders of magnitude below the intertwining tolerances.
pub fn apply_b3_on_solution(
    b2: &B2Coefficients,
    u_second_level: &GridFn,
    psi: &GridFn,
    energy: f64,
) -> Result<GridFn> {
    u_second_level.require_same_grid(psi, "apply_b3_on_solution")?;
    if let Some(x) = find_interior_node(u_second_level) {
        return Err(Error::NodeDetected { x });
    }
    let (eta_prime, gamma_prime) = match (&b2.eta_prime, &b2.gamma_prime) {
        (Some(e), Some(g)) => (e, g),
        _ => {
            // coefficients without analytic derivatives: fall back to
            // differencing the stage-one image
            let stage1 = crate::confluent2::apply_b2_on_solution(b2, psi, energy)?;
            return a3_apply(u_second_level, &stage1, format!("B3({})", psi.label()));
        }
    };
    let d_psi = derivative(psi, 1)?;
    let d_u = derivative(u_second_level, 1)?;
    let d_v0 = derivative(&b2.v0, 1)?;
    let n = psi.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = psi.values()[i];
        let pp = d_psi.values()[i];
        let q = b2.v0.values()[i] - energy;
        let eta = b2.eta.values()[i];
        let gamma = b2.gamma.values()[i];
        let stage1 = q * p - eta * pp + gamma * p;
        // (B2 psi)' with psi'' = (V0 - E) psi expanded through the product rule
        let stage1_prime = d_v0.values()[i] * p + q * pp - eta_prime.values()[i] * pp - eta * q * p
            + gamma_prime.values()[i] * p
            + gamma * pp;
        let logder = d_u.values()[i] / u_second_level.values()[i];
        out.push(-stage1_prime + logder * stage1);
    }
    let mut g = GridFn::from_parts(
        psi.grid().clone(),
        out,
        format!("B3({})", psi.label()),
        FnFlags::default(),
    );
    g.set_reduced_edge_accuracy();
    Ok(g)
}

/// Map a bound state through the third-order intertwiner:
/// B3 psi_n / sqrt((E_n - eps)^3), renormalized, raw norm reported.
pub fn map_eigenstate_3(
    b2: &B2Coefficients,
    u_second_level: &GridFn,
    psi_n: &GridFn,
    e_n: f64,
    eps: f64,
) -> Result<MappedState> {
    if e_n <= eps {
        return Err(Error::LevelBelowSeed { e_n, eps });
    }
    let mapped = apply_b3_on_solution(b2, u_second_level, psi_n, e_n)?;
    let denom = ((e_n - eps).powi(3)).sqrt();
    let scaled = mapped.map(format!("psi3({})", psi_n.label()), move |v| v / denom);
    normalize_mapped(scaled, format!("psi3({})", psi_n.label()))
}

/// The candidate eigenstate of the third-order partner at the factorization
/// energy, proportional to w / (u1 f), with its normalizability diagnosis.
pub fn missing_state_3(u1: &GridFn, w: &GridFn, f: &GridFn) -> Result<MissingState> {
    u1.require_same_grid(w, "missing_state_3")?;
    u1.require_same_grid(f, "missing_state_3")?;
    if let Some(x) = find_interior_node(u1) {
        return Err(Error::NodeDetected { x });
    }
    if let Some(x) = find_interior_node(f) {
        return Err(Error::NodeDetected { x });
    }
    let uf = u1.zip(f, "u1*f", |a, b| a * b)?;
    let state = w.zip(&uf, "psi_eps3", |wv, d| wv / d)?;
    norm_diagnosis(state)
}

/// Spectral regime for the given window position.
///
/// Nonphysical seed below the spectrum: strictly inside the window creates a
/// level at eps; on the boundary the extra state loses normalizability and
/// the spectra coincide. Ground-state seed: strictly inside keeps the
/// spectrum; on the boundary the ground level is deleted. Outside the
/// window the transformation is singular.
pub fn classify_regime(eps: f64, e0: f64, f0: f64, sigma_minus: f64, seed_kind: SeedKind) -> Result<Regime> {
    if !sigma_minus.is_finite() || sigma_minus < 0.0 {
        return Err(Error::Domain {
            what: format!("sigma_minus must be finite and nonnegative, got {sigma_minus}"),
        });
    }
    if eps > e0 + BOUNDARY_TOL * (1.0 + e0.abs()) {
        return Err(Error::SeedAboveGroundState { eps, e0 });
    }
    let on_boundary = (f0 + sigma_minus).abs() < BOUNDARY_TOL * (1.0 + sigma_minus);
    if on_boundary {
        return Ok(match seed_kind {
            SeedKind::NonPhysical => Regime::Isospectral,
            SeedKind::GroundState => Regime::GroundDeleted,
        });
    }
    if f0 < -sigma_minus {
        return Ok(match seed_kind {
            SeedKind::NonPhysical => Regime::Augmented,
            SeedKind::GroundState => Regime::Isospectral,
        });
    }
    Ok(Regime::Singular {
        reason: format!("f0 = {f0} exceeds the window boundary -sigma_minus = {}", -sigma_minus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Anchoring;
    use crate::confluent2::{b2_coefficients, compute_u2, compute_v2, compute_w};
    use crate::grid::{Boundary, Grid};
    use crate::numerics::ode::second_solution;
    use std::sync::Arc;

    fn free_grid() -> Arc<Grid> {
        Grid::new(
            -20.0,
            20.0,
            40001,
            Boundary::TruncatedInfinite { nominal: f64::NEG_INFINITY },
            Boundary::TruncatedInfinite { nominal: f64::INFINITY },
        )
        .unwrap()
    }

    fn coulomb_grid() -> Arc<Grid> {
        Grid::new(
            0.0,
            60.0,
            60000,
            Boundary::TruncatedSingular { nominal: 0.0, delta: 1e-3 },
            Boundary::TruncatedInfinite { nominal: f64::INFINITY },
        )
        .unwrap()
    }

    struct FreeChain {
        u1: GridFn,
        v0: GridFn,
        w: GridFn,
    }

    fn free_chain() -> FreeChain {
        let g = free_grid();
        let u1 = GridFn::tabulate(&g, "u1", f64::exp).unwrap();
        let v0 = GridFn::tabulate(&g, "V0", |_| 0.0).unwrap();
        let w = compute_w(&u1, Anchoring::LeftAnchored).unwrap();
        FreeChain { u1, v0, w }
    }

    #[test]
    fn free_f_closed_form() {
        // f = f0 + (1 - e^{2x})/8 for k = 1, x0 = 0
        let c = free_chain();
        let g = c.u1.grid().clone();
        let f = compute_f(&c.u1, &c.w, -0.25, 0.0).unwrap();
        let i0 = g.snap(0.0);
        assert!((f.values()[i0] + 0.25).abs() < 1e-9, "f(0) = f0");
        let i1 = g.snap(1.0);
        let expected = -0.25 + (1.0 - (2.0f64).exp()) / 8.0;
        assert!((f.values()[i1] - expected).abs() < 1e-8);
    }

    #[test]
    fn free_f_hyperbolic_form() {
        // f0 = -1/4 makes x1 = 0 and f(x) = -e^x cosh(x)/4
        let c = free_chain();
        let g = c.u1.grid().clone();
        let f = compute_f(&c.u1, &c.w, -0.25, 0.0).unwrap();
        for x in [-2.0, -0.3, 1.7] {
            let i = g.snap(x);
            let expected = -x.exp() * x.cosh() / 4.0;
            assert!((f.values()[i] - expected).abs() < 1e-8 * (1.0 + expected.abs()), "f({x})");
        }
    }

    #[test]
    fn sigma_minus_free_particle() {
        let c = free_chain();
        let s = sigma_minus(&c.u1, &c.w, 0.0).unwrap();
        assert!((s - 0.125).abs() < 1e-8, "sigma_minus = {s}");
    }

    #[test]
    fn sigma_minus_empty_interval() {
        let c = free_chain();
        let s = sigma_minus(&c.u1, &c.w, -20.0).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn sigma_minus_coulomb_vanishes_at_origin_anchor() {
        let g = coulomb_grid();
        let u1 = GridFn::tabulate(&g, "u1", |r| 2.0 * r * (-r).exp()).unwrap();
        let w = compute_w(&u1, Anchoring::LeftAnchored).unwrap();
        let s = sigma_minus(&u1, &w, 1e-3).unwrap();
        assert!(s < 1e-12, "sigma_minus = {s}");
    }

    #[test]
    fn v3_direct_poschl_teller() {
        // oracle: V3 = -2 sech^2(x) for k = 1, f0 = -1/4
        let c = free_chain();
        let g = c.u1.grid().clone();
        let f = compute_f(&c.u1, &c.w, -0.25, 0.0).unwrap();
        let v3 = compute_v3_direct(&c.v0, &c.u1, &f).unwrap();
        let i0 = g.snap(0.0);
        assert!((v3.values()[i0] + 2.0).abs() < 1e-5, "V3(0) = {}", v3.values()[i0]);
        let i10 = g.snap(10.0);
        assert!(v3.values()[i10].abs() < 1e-6);
        let im10 = g.snap(-10.0);
        assert!(v3.values()[im10].abs() < 1e-6);
    }

    #[test]
    fn v3_direct_shifted_well() {
        // f0 = -(1 + e^2)/8 puts the well center at x1 = 1
        let c = free_chain();
        let g = c.u1.grid().clone();
        let f0 = -(1.0 + (2.0f64).exp()) / 8.0;
        let f = compute_f(&c.u1, &c.w, f0, 0.0).unwrap();
        let v3 = compute_v3_direct(&c.v0, &c.u1, &f).unwrap();
        let (a, b) = g.resolved_interior();
        let mut i_min = a;
        for i in a..=b {
            if v3.values()[i] < v3.values()[i_min] {
                i_min = i;
            }
        }
        assert!((g.x(i_min) - 1.0).abs() <= 2.0 * g.h(), "minimum at {}", g.x(i_min));
    }

    #[test]
    fn forbidden_f0_gives_node() {
        let c = free_chain();
        let f = compute_f(&c.u1, &c.w, -0.12, 0.0).unwrap();
        match compute_v3_direct(&c.v0, &c.u1, &f) {
            Err(Error::NodeDetected { x }) => {
                // f crosses zero where e^{2x} = 1 + 8 f0
                let expected = 0.5 * (1.0 + 8.0 * (-0.12f64)).ln();
                assert!((x - expected).abs() < 1e-2, "node at {x}, expected {expected}");
            }
            other => panic!("expected node, got {other:?}"),
        }
    }

    #[test]
    fn u_second_level_satisfies_partner_equation() {
        let c = free_chain();
        let v2 = compute_v2(&c.v0, &c.w).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, 0.25, -1.0, 0.0).unwrap();
        let zero = GridFn::tabulate(c.u1.grid(), "0", |_| 0.0).unwrap();
        let res = crate::numerics::inhomogeneous_residual(&v2, -1.0, &u2l, &zero).unwrap();
        assert!(res < 1e-5, "(H2 - eps) u2lvl relative residual {res}");
    }

    #[test]
    fn u_second_level_satisfies_partner_equation_coulomb() {
        let g = coulomb_grid();
        let u1 = GridFn::tabulate(&g, "u1", |r| 2.0 * r * (-r).exp()).unwrap();
        let v0 = GridFn::tabulate(&g, "V0", |r| -2.0 / r).unwrap();
        let w = compute_w(&u1, Anchoring::LeftAnchored).unwrap();
        let v2 = compute_v2(&v0, &w).unwrap();
        let u2l = compute_u_second_level(&u1, &w, 0.1, 1.0, 1e-3).unwrap();
        let zero = GridFn::tabulate(&g, "0", |_| 0.0).unwrap();
        let res = crate::numerics::inhomogeneous_residual(&v2, -1.0, &u2l, &zero).unwrap();
        assert!(res < 1e-5, "(H2 - eps) u2lvl relative residual {res}");
    }

    #[test]
    fn mapped_state_3_dirichlet_endpoints() {
        let g = coulomb_grid();
        let u1 = GridFn::tabulate(&g, "u1", |r| 2.0 * r * (-r).exp()).unwrap();
        let v0 = GridFn::tabulate(&g, "V0", |r| -2.0 / r).unwrap();
        let w = compute_w(&u1, Anchoring::LeftAnchored).unwrap();
        let b2 = crate::confluent2::b2_coefficients_from_chain(&v0, &u1, &w, -1.0).unwrap();
        let u2l = compute_u_second_level(&u1, &w, 0.1, 1.0, 1e-3).unwrap();
        let psi1 = GridFn::tabulate(&g, "psi1", |r| {
            (0.5f64).sqrt() * r * (1.0 - 0.5 * r) * (-0.5 * r).exp()
        })
        .unwrap();
        let mapped = map_eigenstate_3(&b2, &u2l, &psi1, -0.25, -1.0).unwrap();
        assert!((mapped.raw_norm - 1.0).abs() < 5e-2, "raw norm {}", mapped.raw_norm);
        assert!(mapped.state.values()[0].abs() < 1e-5);
        assert!(mapped.state.values()[g.len() - 1].abs() < 1e-5);
    }

    #[test]
    fn w_over_u1_limits_at_the_edges() {
        // left limit vanishes; the magnitude grows toward the right edge
        for (u1, w) in [
            {
                let c = free_chain();
                (c.u1.clone(), c.w.clone())
            },
            {
                let g = coulomb_grid();
                let u1 = GridFn::tabulate(&g, "u1", |r| 2.0 * r * (-r).exp()).unwrap();
                let w = compute_w(&u1, Anchoring::LeftAnchored).unwrap();
                (u1, w)
            },
        ] {
            let ratio = w.zip(&u1, "w/u1", |a, b| a / b).unwrap();
            let n = ratio.len();
            let sup = ratio.sup_norm();
            assert!(ratio.values()[0].abs() < 1e-8 * sup, "vanishes at the left edge");
            let decade = n / 10;
            assert!(
                ratio.values()[n - 1].abs() > ratio.values()[n - 1 - decade].abs(),
                "grows toward the right edge"
            );
        }
    }

    #[test]
    fn u_second_level_is_ratio_times_f() {
        // with -c1/c2 = f0 the combination collapses to (u1/w) f
        let c = free_chain();
        let f0 = -0.25;
        let u2l = compute_u_second_level(&c.u1, &c.w, -f0, 1.0, 0.0).unwrap();
        let f = compute_f(&c.u1, &c.w, f0, 0.0).unwrap();
        let g = c.u1.grid().clone();
        for x in [-5.0, 0.0, 3.0] {
            let i = g.snap(x);
            let expected = -(c.u1.values()[i] / c.w.values()[i]) * f.values()[i];
            let scale = 1.0 + expected.abs();
            assert!((u2l.values()[i] - expected).abs() < 1e-8 * scale, "at x = {x}");
        }
    }

    #[test]
    fn degenerate_combination_rejected() {
        let c = free_chain();
        assert!(matches!(
            compute_u_second_level(&c.u1, &c.w, 1.0, 0.0, 0.0),
            Err(Error::DegenerateCombination)
        ));
    }

    #[test]
    fn route_equivalence_free_particle() {
        let c = free_chain();
        let g = c.u1.grid().clone();
        let f0 = -0.25;
        let f = compute_f(&c.u1, &c.w, f0, 0.0).unwrap();
        let direct = compute_v3_direct(&c.v0, &c.u1, &f).unwrap();
        let v2 = compute_v2(&c.v0, &c.w).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, -f0, 1.0, 0.0).unwrap();
        let iterative = compute_v3_iterative(&v2, &u2l).unwrap();
        let (a, b) = g.resolved_interior();
        let mut sup = 0.0f64;
        for i in a..=b {
            sup = sup.max((direct.values()[i] - iterative.values()[i]).abs());
        }
        assert!(sup < 1e-5, "route difference {sup}");
    }

    #[test]
    fn route_mismatch_is_visible() {
        // a deliberately wrong f0 must separate the two routes
        let c = free_chain();
        let f = compute_f(&c.u1, &c.w, -0.25, 0.0).unwrap();
        let direct = compute_v3_direct(&c.v0, &c.u1, &f).unwrap();
        let v2 = compute_v2(&c.v0, &c.w).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, 0.30, 1.0, 0.0).unwrap();
        let iterative = compute_v3_iterative(&v2, &u2l).unwrap();
        let (a, b) = c.u1.grid().resolved_interior();
        let mut sup = 0.0f64;
        for i in a..=b {
            sup = sup.max((direct.values()[i] - iterative.values()[i]).abs());
        }
        assert!(sup > 1e-2, "routes should differ, sup = {sup}");
    }

    #[test]
    fn u3_residual_and_wronskian_factorization() {
        let c = free_chain();
        let g = c.u1.grid().clone();
        let u2 = compute_u2(&c.u1, &c.w, 0.0, 0.0).unwrap();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &u2).unwrap();
        let res = crate::numerics::inhomogeneous_residual(&c.v0, -1.0, &u3, &u2).unwrap();
        assert!(res < 1e-5, "chain residual {res}");

        // W(u1,u2,u3) = u1 f with f0 = w1 (beta1 = 0)
        let w3 = wronskian3(&c.u1, &u2, &u3, 0.0).unwrap();
        let w1 = read_off_w1(&c.u1, &u3, 0.0).unwrap();
        let f = compute_f(&c.u1, &c.w, w1, 0.0).unwrap();
        let (a, b) = g.resolved_interior();
        let mut worst = 0.0f64;
        for i in a..=b {
            let expected = c.u1.values()[i] * f.values()[i];
            let rel = (w3.values()[i] - expected).abs() / (1.0 + expected.abs());
            worst = worst.max(rel);
        }
        assert!(worst < 1e-6, "factorization deviation {worst}");

        // and the raw determinant agrees
        let det = wronskian3_determinant(&c.u1, &u2, &u3).unwrap();
        let mut worst_det = 0.0f64;
        for i in a..=b {
            let rel = (w3.values()[i] - det.values()[i]).abs() / (1.0 + det.values()[i].abs());
            worst_det = worst_det.max(rel);
        }
        assert!(worst_det < 1e-5, "determinant deviation {worst_det}");
    }

    #[test]
    fn wronskian_factorization_with_nonzero_beta1() {
        // with u2 shifted by beta1 u1, the factor f picks up
        // f0 = w1 - w0 beta1
        let c = free_chain();
        let beta1 = 0.6;
        let u2 = compute_u2(&c.u1, &c.w, beta1, 0.0).unwrap();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &u2).unwrap();
        let w1 = read_off_w1(&c.u1, &u3, 0.0).unwrap();
        let g = c.u1.grid().clone();
        let w0 = c.w.values()[g.snap(0.0)];
        let f = compute_f(&c.u1, &c.w, w1 - w0 * beta1, 0.0).unwrap();
        let w3 = wronskian3(&c.u1, &u2, &u3, 0.0).unwrap();
        let (a, b) = g.resolved_interior();
        let mut worst = 0.0f64;
        for i in a..=b {
            let expected = c.u1.values()[i] * f.values()[i];
            worst = worst.max((w3.values()[i] - expected).abs() / (1.0 + expected.abs()));
        }
        assert!(worst < 1e-6, "factorization deviation {worst}");
    }

    #[test]
    fn wronskian3_invariant_under_u1_shifts() {
        let c = free_chain();
        let u2 = compute_u2(&c.u1, &c.w, 0.0, 0.0).unwrap();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &u2).unwrap();
        let shifted = u3.zip(&c.u1, "u3+cu1", |a, b| a + 0.37 * b).unwrap();
        let w3 = wronskian3(&c.u1, &u2, &u3, 0.0).unwrap();
        let w3s = wronskian3(&c.u1, &u2, &shifted, 0.0).unwrap();
        let (a, b) = c.u1.grid().resolved_interior();
        for i in (a..=b).step_by(503) {
            let scale = 1.0 + w3.values()[i].abs();
            assert!((w3.values()[i] - w3s.values()[i]).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn zero_source_gives_zero_u3() {
        let c = free_chain();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let zero = GridFn::tabulate(c.u1.grid(), "0", |_| 0.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &zero).unwrap();
        assert!(u3.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn b3_kernel_and_nonkernel() {
        let c = free_chain();
        let f0 = -0.25;
        let u2 = compute_u2(&c.u1, &c.w, 0.0, 0.0).unwrap();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &u2).unwrap();
        let b2 = b2_coefficients(&c.v0, &c.w, -1.0).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, -f0, 1.0, 0.0).unwrap();
        let (a, b) = c.u1.grid().resolved_interior();
        let rel_norm = |out: &GridFn, reference: &GridFn| {
            let mut sup = 0.0f64;
            let mut scale = 0.0f64;
            for i in a..=b {
                sup = sup.max(out.values()[i].abs());
                scale = scale.max(reference.values()[i].abs());
            }
            sup / scale
        };
        for (name, member) in [("u1", &c.u1), ("u2", &u2), ("u3", &u3)] {
            let out = apply_b3(&b2, &u2l, member).unwrap();
            let r = rel_norm(&out, member);
            assert!(r < 1e-4, "B3 {name} relative residual {r}");
        }
        // the companion is NOT annihilated: B3 tilde is bounded while tilde
        // grows exponentially, so measure survival pointwise
        let out = apply_b3(&b2, &u2l, &tilde).unwrap();
        let mut survival = 0.0f64;
        for i in a..=b {
            survival = survival.max(out.values()[i].abs() / (1.0 + tilde.values()[i].abs()));
        }
        assert!(survival > 1e-1, "companion should survive B3, got {survival}");
    }

    #[test]
    fn b2_u3_proportional_to_u_second_level() {
        let c = free_chain();
        let u2 = compute_u2(&c.u1, &c.w, 0.0, 0.0).unwrap();
        let tilde = second_solution(&c.u1, 20.0).unwrap();
        let u3 = compute_u3(&c.u1, &tilde, &u2).unwrap();
        let b2 = b2_coefficients(&c.v0, &c.w, -1.0).unwrap();
        let w1 = read_off_w1(&c.u1, &u3, 0.0).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, -w1, 1.0, 0.0).unwrap();
        let stage = apply_b2(&b2, &u3).unwrap();
        let (a, b) = c.u1.grid().resolved_interior();
        let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
        for i in a..=b {
            dot += stage.values()[i] * u2l.values()[i];
            na += stage.values()[i] * stage.values()[i];
            nb += u2l.values()[i] * u2l.values()[i];
        }
        let cosine = dot.abs() / (na.sqrt() * nb.sqrt());
        assert!(cosine > 1.0 - 1e-6, "cosine similarity {cosine}");
    }

    #[test]
    fn missing_state_3_is_poschl_teller_ground_state() {
        // oracle: the PT well has ground state ∝ sech(k(x - x1))
        let c = free_chain();
        let f = compute_f(&c.u1, &c.w, -0.25, 0.0).unwrap();
        let m = missing_state_3(&c.u1, &c.w, &f).unwrap();
        assert!(m.normalizable);
        let g = c.u1.grid().clone();
        let exact = GridFn::tabulate(&g, "sech", |x| 1.0 / x.cosh()).unwrap();
        let norm = crate::numerics::quadrature::l2_norm(&exact).unwrap();
        let exact = exact.map("sech_n", |v| v / norm);
        let prod = m.state.zip(&exact, "overlap", |a, b| a * b).unwrap();
        let dot = crate::numerics::quadrature::integrate(&prod).unwrap();
        assert!(dot.abs() > 1.0 - 1e-6, "fidelity {dot}");
    }

    #[test]
    fn map_eigenstate_3_requires_level_above_seed() {
        let c = free_chain();
        let b2 = b2_coefficients(&c.v0, &c.w, -1.0).unwrap();
        let u2l = compute_u_second_level(&c.u1, &c.w, 0.25, 1.0, 0.0).unwrap();
        assert!(matches!(
            map_eigenstate_3(&b2, &u2l, &c.u1, -1.0, -1.0),
            Err(Error::LevelBelowSeed { .. })
        ));
    }

    #[test]
    fn regime_table() {
        use SeedKind::*;
        // free particle: no discrete spectrum, E0 sentinel is +inf
        let r = classify_regime(-1.0, f64::INFINITY, -0.25, 0.125, NonPhysical).unwrap();
        assert_eq!(r, Regime::Augmented);
        let r = classify_regime(-1.0, f64::INFINITY, -0.125, 0.125, NonPhysical).unwrap();
        assert_eq!(r, Regime::Isospectral);
        // coulomb ground-state seed: sigma_minus = 0
        let r = classify_regime(-1.0, -1.0, -0.1, 0.0, GroundState).unwrap();
        assert_eq!(r, Regime::Isospectral);
        let r = classify_regime(-1.0, -1.0, 0.0, 0.0, GroundState).unwrap();
        assert_eq!(r, Regime::GroundDeleted);
        let r = classify_regime(-1.0, -1.0, 0.05, 0.0, GroundState).unwrap();
        assert!(matches!(r, Regime::Singular { .. }));
        // seed above the ground state is inconsistent with a nodeless seed
        assert!(classify_regime(-0.5, -1.0, -0.1, 0.0, GroundState).is_err());
    }
}
