//! The confluent second-order transformation: the reduced Wronskian w, the
//! partner potential V2, the second-order intertwiner and its action on
//! states, and the chain member u2.
//!
//! Everything is driven by one seed u1 at the factorization energy. Since
//! W'(u1, u2) = -u1^2, the Wronskian is w(x) = w0 - ∫_{x0}^x u1^2, and the
//! anchoring choice of w0 decides where (and whether) w vanishes.

use crate::chain::{Anchoring, MappedState, MissingState};
use crate::error::{Error, Result};
use crate::grid::{Boundary, EDGE_TRIM, FnFlags, GridFn};
use crate::numerics::quadrature::{chain_integral, cumulative_integral_from_index, edge_tail_piece, integrate, EdgePiece};
use crate::numerics::stencil::{derivative, find_interior_node, log_second_derivative};

/// Coefficients of the second-order intertwiner psi'' - eta psi' + gamma psi.
#[derive(Debug, Clone)]
pub struct B2Coefficients {
    pub eta: GridFn,
    pub gamma: GridFn,
    pub epsilon: f64,
    /// The base potential the coefficients were built against; kept so
    /// states with a known energy can be mapped through their own equation.
    pub v0: GridFn,
    /// Analytic eta' and gamma', available when the coefficients were built
    /// through the chain identities; they let operator chains differentiate
    /// coefficients without touching quadrature-built tables.
    pub eta_prime: Option<GridFn>,
    pub gamma_prime: Option<GridFn>,
}

fn reflected(g: &GridFn) -> Result<GridFn> {
    let grid = g.grid();
    let reflect_boundary = |b: Boundary| match b {
        Boundary::Finite => Boundary::Finite,
        Boundary::TruncatedInfinite { nominal } => Boundary::TruncatedInfinite { nominal: -nominal },
        Boundary::TruncatedSingular { nominal, delta } => Boundary::TruncatedSingular { nominal: -nominal, delta },
    };
    let mirrored = crate::grid::Grid::new(
        -grid.x_max(),
        -grid.x_min(),
        grid.len(),
        reflect_boundary(grid.right()),
        reflect_boundary(grid.left()),
    )?;
    let mut values = g.values().to_vec();
    values.reverse();
    Ok(GridFn::from_parts(
        mirrored,
        values,
        format!("reflect({})", g.label()),
        g.flags(),
    ))
}

/// The reduced Wronskian w = W(u1, u2) for the requested anchoring.
///
/// Left-anchored takes w0 = -nu_minus so that w vanishes at the nominal left
/// endpoint; right-anchored mirrors the domain and reuses the same path.
/// Explicit w0 follows w(x) = w0 - ∫_{x0}^x u1^2 verbatim.
pub fn compute_w(u1: &GridFn, anchoring: Anchoring) -> Result<GridFn> {
    if u1.sup_norm() == 0.0 {
        return Err(Error::DegenerateSeed {
            context: "u1 vanishes identically".into(),
        });
    }
    let u1sq = u1.zip(u1, "u1^2", |a, b| a * b)?;
    match anchoring {
        Anchoring::LeftAnchored => {
            let integral = chain_integral(&u1sq, 0)?;
            let mut w = integral.map("w", |v| -v);
            // exact zero at the first sample would poison every later ratio;
            // keep the analytically imposed edge value instead
            if w.values()[0] == 0.0 {
                if let EdgePiece::Finite(p) = edge_tail_piece(&u1sq, true) {
                    if p > 0.0 {
                        let mut vals = w.values().to_vec();
                        vals[0] = -p;
                        w = GridFn::from_parts(w.grid().clone(), vals, "w".into(), w.flags());
                    }
                }
            }
            Ok(w)
        }
        Anchoring::RightAnchored => {
            let mirrored = reflected(u1)?;
            let w_m = compute_w(&mirrored, Anchoring::LeftAnchored)?;
            let back = reflected(&w_m)?;
            // reflecting w(x) = -∫_{xl}^{x} flips the integral's orientation
            let w = GridFn::from_parts(
                u1.grid().clone(),
                back.values().iter().map(|v| -v).collect(),
                "w".into(),
                FnFlags::default(),
            );
            Ok(w)
        }
        Anchoring::ExplicitW0 { w0, x0 } => {
            let i0 = u1.grid().snap(x0);
            let integral = cumulative_integral_from_index(&u1sq, i0)?;
            Ok(integral.map("w", move |v| w0 - v))
        }
    }
}

/// Admissibility bounds for w0: nu_minus = ∫_{xl}^{x0} u1^2 and
/// nu_plus = ∫_{x0}^{xr} u1^2, each flagged divergent when the hidden edge
/// tail does not converge. w stays nodeless for w0 <= -nu_minus or
/// w0 >= nu_plus.
#[derive(Debug, Clone, Copy)]
pub struct WWindows {
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub minus_divergent: bool,
    pub plus_divergent: bool,
}

pub fn w_windows(u1: &GridFn, x0: f64) -> Result<WWindows> {
    let u1sq = u1.zip(u1, "u1^2", |a, b| a * b)?;
    let i0 = u1.grid().snap(x0);
    let cum = cumulative_integral_from_index(&u1sq, 0)?;
    let left_piece = edge_tail_piece(&u1sq, true);
    let right_piece = edge_tail_piece(&u1sq, false);
    let nu_minus = cum.values()[i0] + left_piece.value();
    let nu_plus = (cum.values()[u1.len() - 1] - cum.values()[i0]) + right_piece.value();
    Ok(WWindows {
        nu_minus,
        nu_plus,
        minus_divergent: left_piece.is_divergent(),
        plus_divergent: right_piece.is_divergent(),
    })
}

/// V2 = V0 - 2 (ln w)''. Nodes of w surface as `NodeDetected`.
pub fn compute_v2(v0: &GridFn, w: &GridFn) -> Result<GridFn> {
    v0.require_same_grid(w, "compute_v2")?;
    let lnpp = log_second_derivative(w)?;
    let mut v2 = v0.zip(&lnpp, "V2", |v, l| v - 2.0 * l)?;
    v2.set_reduced_edge_accuracy();
    Ok(v2)
}

/// Intertwiner coefficients: eta = w'/w and
/// gamma = eta'/2 + eta^2/2 - V0 + eps, with eta' expanded as
/// w''/w - (w'/w)^2 so only the smooth w is ever differenced.
pub fn b2_coefficients(v0: &GridFn, w: &GridFn, eps: f64) -> Result<B2Coefficients> {
    v0.require_same_grid(w, "b2_coefficients")?;
    if let Some(x) = find_interior_node(w) {
        return Err(Error::NodeDetected { x });
    }
    let dw = derivative(w, 1)?;
    let dw2 = derivative(w, 2)?;
    let n = w.len();
    let mut eta = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for i in 0..n {
        let e = dw.values()[i] / w.values()[i];
        let ep = dw2.values()[i] / w.values()[i] - e * e;
        eta.push(e);
        gamma.push(0.5 * ep + 0.5 * e * e - v0.values()[i] + eps);
    }
    let mut eta = GridFn::from_parts(w.grid().clone(), eta, "eta".into(), FnFlags::default());
    let mut gamma = GridFn::from_parts(w.grid().clone(), gamma, "gamma".into(), FnFlags::default());
    eta.set_reduced_edge_accuracy();
    gamma.set_reduced_edge_accuracy();
    Ok(B2Coefficients {
        eta,
        gamma,
        epsilon: eps,
        v0: v0.clone(),
        eta_prime: None,
        gamma_prime: None,
    })
}

/// Intertwiner coefficients built through the chain identity w' = -u1^2:
/// eta = -u1^2/w and eta' = -2 u1 u1'/w - eta^2, so no difference of the
/// quadrature-built w ever enters. Operator chains built on these
/// coefficients stay well above the rounding floor; [`b2_coefficients`]
/// remains the generic form when only w is at hand.
pub fn b2_coefficients_from_chain(v0: &GridFn, u1: &GridFn, w: &GridFn, eps: f64) -> Result<B2Coefficients> {
    v0.require_same_grid(w, "b2_coefficients_from_chain")?;
    v0.require_same_grid(u1, "b2_coefficients_from_chain")?;
    if let Some(x) = find_interior_node(w) {
        return Err(Error::NodeDetected { x });
    }
    let du1 = derivative(u1, 1)?;
    let dv0 = derivative(v0, 1)?;
    let n = w.len();
    let mut eta = Vec::with_capacity(n);
    let mut eta_p = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut gamma_p = Vec::with_capacity(n);
    for i in 0..n {
        let u = u1.values()[i];
        let up = du1.values()[i];
        let wv = w.values()[i];
        let q = v0.values()[i] - eps;
        let e = -u * u / wv;
        // w' = -u1^2 and u1'' = (V0 - eps) u1 close the derivatives
        let ep = -2.0 * u * up / wv - e * e;
        let epp = -2.0 * (up * up + q * u * u) / wv - 2.0 * u * u * u * up / (wv * wv) - 2.0 * e * ep;
        eta.push(e);
        eta_p.push(ep);
        gamma.push(0.5 * ep + 0.5 * e * e - v0.values()[i] + eps);
        gamma_p.push(0.5 * epp + e * ep - dv0.values()[i]);
    }
    let pack = |vals: Vec<f64>, label: &str| {
        let mut g = GridFn::from_parts(w.grid().clone(), vals, label.into(), FnFlags::default());
        g.set_reduced_edge_accuracy();
        g
    };
    Ok(B2Coefficients {
        eta: pack(eta, "eta"),
        gamma: pack(gamma, "gamma"),
        epsilon: eps,
        v0: v0.clone(),
        eta_prime: Some(pack(eta_p, "eta'")),
        gamma_prime: Some(pack(gamma_p, "gamma'")),
    })
}

/// Apply the second-order intertwiner: psi'' - eta psi' + gamma psi.
pub fn apply_b2(coeffs: &B2Coefficients, psi: &GridFn) -> Result<GridFn> {
    coeffs.eta.require_same_grid(psi, "apply_b2")?;
    let d1 = derivative(psi, 1)?;
    let d2 = derivative(psi, 2)?;
    let n = psi.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(d2.values()[i] - coeffs.eta.values()[i] * d1.values()[i] + coeffs.gamma.values()[i] * psi.values()[i]);
    }
    let mut g = GridFn::from_parts(
        psi.grid().clone(),
        out,
        format!("B2({})", psi.label()),
        FnFlags::default(),
    );
    g.set_reduced_edge_accuracy();
    Ok(g)
}

/// Apply the intertwiner to a state known to solve the base problem at
/// `energy`: the second derivative comes from the state's own equation,
/// psi'' = (V0 - E) psi, which costs one less differencing of tabulated
/// data and keeps chained operator applications above the rounding floor.
pub fn apply_b2_on_solution(coeffs: &B2Coefficients, psi: &GridFn, energy: f64) -> Result<GridFn> {
    coeffs.eta.require_same_grid(psi, "apply_b2_on_solution")?;
    let d1 = derivative(psi, 1)?;
    let n = psi.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d2 = (coeffs.v0.values()[i] - energy) * psi.values()[i];
        out.push(d2 - coeffs.eta.values()[i] * d1.values()[i] + coeffs.gamma.values()[i] * psi.values()[i]);
    }
    let mut g = GridFn::from_parts(
        psi.grid().clone(),
        out,
        format!("B2({})", psi.label()),
        FnFlags::default(),
    );
    g.set_reduced_edge_accuracy();
    Ok(g)
}

/// Impose the Dirichlet limit on the trailing samples of a mapped state at
/// truncated-singular edges. The true state vanishes like a power of the
/// distance to the singular point; the computed samples there are edge-
/// stencil artifacts of no physical content.
fn impose_singular_dirichlet(state: &mut [f64], grid: &crate::grid::Grid) {
    if grid.left().is_singular() {
        for v in state.iter_mut().take(EDGE_TRIM) {
            *v = 0.0;
        }
    }
    if grid.right().is_singular() {
        let n = state.len();
        for v in state.iter_mut().skip(n - EDGE_TRIM) {
            *v = 0.0;
        }
    }
}

pub(crate) fn normalize_mapped(raw: GridFn, label: String) -> Result<MappedState> {
    let mut values = raw.values().to_vec();
    impose_singular_dirichlet(&mut values, raw.grid());
    let state = GridFn::from_parts(raw.grid().clone(), values, label.clone(), raw.flags());
    let raw_norm = crate::numerics::quadrature::l2_norm(&state)?;
    if raw_norm == 0.0 {
        return Err(Error::DegenerateSeed {
            context: format!("mapped state `{label}` vanishes"),
        });
    }
    let normalized = state.map(label, |v| v / raw_norm);
    Ok(MappedState {
        state: normalized,
        raw_norm,
    })
}

/// Map a bound state of the base problem through the second-order
/// intertwiner: B2 psi_n / (E_n - eps), then renormalize on the grid. The
/// pre-normalization norm is reported; the algebra predicts 1.
pub fn map_eigenstate_2(coeffs: &B2Coefficients, psi_n: &GridFn, e_n: f64) -> Result<MappedState> {
    if (e_n - coeffs.epsilon).abs() < 1e-14 * (1.0 + e_n.abs()) {
        return Err(Error::EnergyAtSeed { energy: e_n });
    }
    let mapped = apply_b2_on_solution(coeffs, psi_n, e_n)?;
    let scaled = mapped.map(format!("psi2({})", psi_n.label()), |v| v / (e_n - coeffs.epsilon));
    normalize_mapped(scaled, format!("psi2({})", psi_n.label()))
}

/// Norm-convergence diagnosis shared by the missing states: the edge
/// fractions estimate how much squared norm lies beyond each truncated
/// edge, extrapolating the local power law / decay rate.
pub(crate) fn norm_diagnosis(state: GridFn) -> Result<MissingState> {
    let sq = state.zip(&state, "norm^2", |a, b| a * b)?;
    let total = integrate(&sq)?;
    if !(total > 0.0) {
        return Err(Error::DegenerateSeed {
            context: "candidate state has no norm".into(),
        });
    }
    let frac = |piece: EdgePiece| match piece {
        EdgePiece::None => 0.0,
        EdgePiece::Finite(p) => (p / total).abs(),
        EdgePiece::Divergent => 1.0,
    };
    let left = frac(edge_tail_piece(&sq, true));
    let right = frac(edge_tail_piece(&sq, false));
    let normalizable = left < 1e-6 && right < 1e-6;
    let raw_norm = total.sqrt();
    let state = if normalizable {
        state.map(state.label().to_string(), |v| v / raw_norm)
    } else {
        state
    };
    Ok(MissingState {
        state,
        raw_norm,
        left_edge_fraction: left,
        right_edge_fraction: right,
        normalizable,
    })
}

/// The eigenstate of the second-order partner at the factorization energy,
/// proportional to u1/w. Normalized to unit grid norm when the norm
/// converges on the truncated domain; flagged otherwise, with the raw
/// proportionality norm reported either way.
pub fn missing_state_2(u1: &GridFn, w: &GridFn) -> Result<MissingState> {
    u1.require_same_grid(w, "missing_state_2")?;
    if let Some(x) = find_interior_node(w) {
        return Err(Error::NodeDetected { x });
    }
    let state = u1.zip(w, "u1/w", |a, b| a / b)?;
    norm_diagnosis(state)
}

/// The chain member u2 = u1 [ beta1 + ∫_{x0}^x w / u1^2 ], satisfying
/// (H0 - eps) u2 = u1.
pub fn compute_u2(u1: &GridFn, w: &GridFn, beta1: f64, x0: f64) -> Result<GridFn> {
    u1.require_same_grid(w, "compute_u2")?;
    if let Some(x) = find_interior_node(u1) {
        return Err(Error::NodeDetected { x });
    }
    let integrand = w.zip(u1, "w/u1^2", |wv, uv| wv / (uv * uv))?;
    for left in [true, false] {
        if let Some(p) = crate::numerics::quadrature::singular_edge_exponent(&integrand, left) {
            if p <= -1.0 {
                let x = if left {
                    integrand.grid().x(0)
                } else {
                    integrand.grid().x(integrand.len() - 1)
                };
                return Err(Error::IntegrandBlowUp { x, exponent: p });
            }
        }
    }
    let i0 = u1.grid().snap(x0);
    let integral = chain_integral(&integrand, i0)?;
    u1.zip(&integral, "u2", move |u, i| u * (beta1 + i))
}
