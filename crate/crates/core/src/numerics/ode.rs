//! Linear second-order ODE machinery on grids: Numerov integration of
//! u'' = (V - eps) u, the unit-Wronskian companion solution, and particular
//! solutions of the inhomogeneous equation by variation of parameters.

use crate::error::{Error, Result};
use crate::grid::{FnFlags, GridFn};
use crate::numerics::quadrature::cumulative_integral_from_index;
use crate::numerics::stencil::{derivative, find_interior_node};

/// Integration direction for [`solve_homogeneous`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Magnitude at which the running solution is rescaled to avoid overflow.
const RESCALE_AT: f64 = 1e250;

/// Numerov integration of u'' = (V0 - eps) u at O(h^4).
///
/// `ic` is (value, slope) at the starting endpoint. Normalization is the
/// caller's business. If the solution grows beyond the overflow guard it is
/// rescaled in place (exact powers of two) and the event is noted in the
/// label; already-stored samples are scaled back retroactively, so the
/// returned function is continuous but may underflow to zero far from the
/// growing end.
pub fn solve_homogeneous(v0: &GridFn, eps: f64, direction: Direction, ic: (f64, f64)) -> Result<GridFn> {
    let (value, slope) = ic;
    if value == 0.0 && slope == 0.0 {
        return Err(Error::ZeroInitialConditions);
    }
    if !value.is_finite() || !slope.is_finite() {
        return Err(Error::NonFinite {
            what: "initial conditions".into(),
        });
    }
    let n = v0.len();
    if n < 7 {
        return Err(Error::TooFewPoints { required: 7, got: n });
    }
    let grid = v0.grid();
    let h = grid.h();
    // signed step and index order
    let (idx, step): (Box<dyn Fn(usize) -> usize>, f64) = match direction {
        Direction::LeftToRight => (Box::new(|i| i), h),
        Direction::RightToLeft => (Box::new(move |i| n - 1 - i), -h),
    };

    let q = |i: usize| v0.values()[i] - eps;

    // Start the three-term recurrence with a Taylor step whose local error is
    // O(h^6), matching the recurrence's own order: u'' = Qu gives the higher
    // derivatives from Q and its first three derivatives.
    let dv = derivative(v0, 1)?;
    let dv2 = derivative(v0, 2)?;
    let dv3 = derivative(&dv2, 1)?;
    let i0 = idx(0);
    let (q0, q0p, q0pp, q0ppp) = (q(i0), dv.values()[i0], dv2.values()[i0], dv3.values()[i0]);
    let s = step;
    let u0 = value;
    let u0p = slope;
    let d2 = q0 * u0;
    let d3 = q0p * u0 + q0 * u0p;
    let d4 = q0pp * u0 + 2.0 * q0p * u0p + q0 * q0 * u0;
    let d5 = q0ppp * u0 + 3.0 * q0pp * u0p + 4.0 * q0 * q0p * u0 + q0 * q0 * u0p;
    let u1 = u0 + s * (u0p + s / 2.0 * (d2 + s / 3.0 * (d3 + s / 4.0 * (d4 + s / 5.0 * d5))));

    let mut out = vec![0.0; n];
    out[idx(0)] = u0;
    out[idx(1)] = u1;
    let h2_12 = h * h / 12.0;
    let mut rescales: Vec<(usize, i32)> = Vec::new();
    let mut prev = u0;
    let mut cur = u1;
    for k in 2..n {
        let (im2, im1, i) = (idx(k - 2), idx(k - 1), idx(k));
        let next = ((2.0 + 10.0 * h2_12 * q(im1)) * cur - (1.0 - h2_12 * q(im2)) * prev) / (1.0 - h2_12 * q(i));
        if !next.is_finite() {
            return Err(Error::NonFinite {
                what: format!("homogeneous solution at x = {}", grid.x(i)),
            });
        }
        prev = cur;
        cur = next;
        out[i] = next;
        if next.abs() > RESCALE_AT {
            let exp = next.abs().log2().ceil() as i32;
            let scale = (2.0f64).powi(-exp);
            for v in out.iter_mut() {
                *v *= scale;
            }
            prev *= scale;
            cur *= scale;
            rescales.push((k, exp));
        }
    }
    let mut label = format!("numerov(eps={eps})");
    for (k, exp) in &rescales {
        label.push_str(&format!(" [rescaled 2^-{exp} @ step {k}]"));
    }
    Ok(GridFn::from_parts(grid.clone(), out, label, FnFlags::default()))
}

/// Companion solution with unit Wronskian: u1 * ∫_{x0}^{x} dy / u1^2.
///
/// W(u1, out) = 1 pointwise (to quadrature accuracy) wherever the grid
/// resolves 1/u1^2.
pub fn second_solution(u1: &GridFn, x0: f64) -> Result<GridFn> {
    if let Some(x) = find_interior_node(u1) {
        return Err(Error::NodeDetected { x });
    }
    let inv_sq = u1.map(format!("1/({})^2", u1.label()), |v| 1.0 / (v * v));
    let i0 = u1.grid().snap(x0);
    let integral = cumulative_integral_from_index(&inv_sq, i0)?;
    let out = u1.zip(&integral, format!("companion({})", u1.label()), |u, i| u * i)?;
    Ok(out)
}

/// Max deviation of W(u1, u2) from 1 over the resolved interior.
pub fn wronskian_unit_deviation(u1: &GridFn, u2: &GridFn) -> Result<f64> {
    u1.require_same_grid(u2, "wronskian")?;
    let d1 = derivative(u1, 1)?;
    let d2 = derivative(u2, 1)?;
    let (a, b) = u1.grid().resolved_interior();
    let mut worst = 0.0f64;
    for i in a..=b {
        let w = u1.values()[i] * d2.values()[i] - d1.values()[i] * u2.values()[i];
        worst = worst.max((w - 1.0).abs());
    }
    Ok(worst)
}

/// Particular solution of -phi'' + (V0 - eps) phi = source, built from the
/// homogeneous pair (u1, u1_tilde) with W(u1, u1_tilde) = 1 by variation of
/// parameters:
///     phi = u1 * ∫_{xl}^{x} ubar s  -  ubar * ∫_{xl}^{x} u1 s.
///
/// The companion is first re-combined as ubar = u1_tilde - c*u1 with c
/// fixed at the edge where |u1| is largest, which keeps both products on
/// the scale of the answer (the naive mid-anchored form loses every
/// significant digit to cancellation on exponentially growing seeds).
/// Recombination does not change the Wronskian, and one particular solution
/// is as good as another here. The overall sign is pinned by the defining
/// residual, which the tests enforce.
///
/// The companion must be well conditioned — anchored near the seed's peak,
/// as [`second_solution`] from the pipeline produces it; the unit-Wronskian
/// precondition rejects companions whose decaying content has been lost to
/// rounding.
pub fn solve_inhomogeneous(u1: &GridFn, u1_tilde: &GridFn, source: &GridFn) -> Result<GridFn> {
    u1.require_same_grid(u1_tilde, "inhomogeneous pair")?;
    u1.require_same_grid(source, "inhomogeneous source")?;
    let dev = wronskian_unit_deviation(u1, u1_tilde)?;
    if dev > 1e-4 {
        return Err(Error::WronskianNotUnit { deviation: dev });
    }
    let n = u1.len();
    let edge = if u1.values()[0].abs() >= u1.values()[n - 1].abs() {
        0
    } else {
        n - 1
    };
    let c = u1_tilde.values()[edge] / u1.values()[edge];
    let ubar = u1_tilde.zip(u1, "ubar", |t, u| t - c * u)?;

    let u1s = u1.zip(source, "u1*s", |u, s| u * s)?;
    let ubars = ubar.zip(source, "ubar*s", |u, s| u * s)?;
    let a = cumulative_integral_from_index(&u1s, 0)?;
    let b = cumulative_integral_from_index(&ubars, 0)?;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        values.push(u1.values()[i] * b.values()[i] - ubar.values()[i] * a.values()[i]);
    }
    Ok(GridFn::from_parts(
        u1.grid().clone(),
        values,
        format!("particular({})", source.label()),
        FnFlags::default(),
    ))
}

/// Pointwise backward-relative residual of -phi'' + (V0 - eps) phi = source
/// over the resolved interior: |residual| scaled by the size of the terms
/// that combine at that sample, so exponentially large solutions are judged
/// by significant digits rather than absolute leftovers.
pub fn inhomogeneous_residual(v0: &GridFn, eps: f64, phi: &GridFn, source: &GridFn) -> Result<f64> {
    let d2 = derivative(phi, 2)?;
    let (a, b) = phi.grid().resolved_interior();
    // floor at 1e-3 of the dominant term anywhere, so turning points where
    // every term vanishes do not dominate the ratio
    let mut global = 0.0f64;
    for i in a..=b {
        let s = d2.values()[i].abs()
            + ((v0.values()[i] - eps) * phi.values()[i]).abs()
            + source.values()[i].abs();
        global = global.max(s);
    }
    let floor = 1e-3 * global;
    let mut sup = 0.0f64;
    for i in a..=b {
        let lhs = -d2.values()[i] + (v0.values()[i] - eps) * phi.values()[i];
        let res = lhs - source.values()[i];
        let scale = d2.values()[i].abs()
            + ((v0.values()[i] - eps) * phi.values()[i]).abs()
            + source.values()[i].abs()
            + floor;
        if scale > 0.0 {
            sup = sup.max(res.abs() / scale);
        }
    }
    Ok(sup)
}
