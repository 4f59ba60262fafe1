//! High-order finite differences on uniform grids.
//!
//! Interior samples use 4th-order central stencils; the outermost two samples
//! on each side fall back to one-sided stencils of the same order, and the
//! result is flagged `reduced_edge_accuracy`.

use crate::error::{Error, Result};
use crate::grid::GridFn;

/// Relative floor below which a sample counts as a node of the function.
/// Chosen below the discretization noise of the default grids.
pub const NODE_FLOOR: f64 = 1e-12;

/// First or second derivative of `g`, 4th order everywhere.
pub fn derivative(g: &GridFn, order: u8) -> Result<GridFn> {
    let n = g.len();
    if n < 7 {
        return Err(Error::TooFewPoints { required: 7, got: n });
    }
    let v = g.values();
    let h = g.grid().h();
    let mut out = vec![0.0; n];
    match order {
        1 => {
            let c = 1.0 / (12.0 * h);
            out[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
            out[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
            for i in 2..n - 2 {
                out[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
            }
            out[n - 2] = -c * (-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] - 6.0 * v[n - 4] + v[n - 5]);
            out[n - 1] = -c * (-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] + 16.0 * v[n - 4] - 3.0 * v[n - 5]);
        }
        2 => {
            let c = 1.0 / (12.0 * h * h);
            out[0] = c * (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]);
            out[1] = c * (10.0 * v[0] - 15.0 * v[1] - 4.0 * v[2] + 14.0 * v[3] - 6.0 * v[4] + v[5]);
            for i in 2..n - 2 {
                out[i] = c * (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]);
            }
            out[n - 2] =
                c * (10.0 * v[n - 1] - 15.0 * v[n - 2] - 4.0 * v[n - 3] + 14.0 * v[n - 4] - 6.0 * v[n - 5] + v[n - 6]);
            out[n - 1] = c
                * (45.0 * v[n - 1] - 154.0 * v[n - 2] + 214.0 * v[n - 3] - 156.0 * v[n - 4] + 61.0 * v[n - 5]
                    - 10.0 * v[n - 6]);
        }
        _ => {
            return Err(Error::Domain {
                what: format!("derivative order must be 1 or 2, got {order}"),
            })
        }
    }
    let mut d = GridFn::from_parts(
        g.grid().clone(),
        out,
        format!("d{order}({})", g.label()),
        g.flags(),
    );
    d.set_reduced_edge_accuracy();
    Ok(d)
}

/// Half-width of the neighborhood a sample is compared against when
/// deciding whether it is indistinguishable from zero.
const NODE_WINDOW: usize = 32;

/// First interior node of `g`, if any: an interior sign change, an exact
/// zero, or a sample below `NODE_FLOOR` relative to its local amplitude.
///
/// The floor is local, not global: the chain profiles legitimately span
/// hundreds of orders of magnitude across the domain, so only a sample that
/// is negligible against its own neighborhood signals a zero crossing.
pub fn find_interior_node(g: &GridFn) -> Option<f64> {
    let v = g.values();
    let n = v.len();
    if n < 3 {
        return None;
    }
    for i in 1..n - 1 {
        if v[i] == 0.0 {
            return Some(g.grid().x(i));
        }
        if i + 1 < n - 1 && v[i].signum() != v[i + 1].signum() {
            return Some(g.grid().x(i));
        }
        let lo = i.saturating_sub(NODE_WINDOW).max(1);
        let hi = (i + NODE_WINDOW).min(n - 2);
        let local = v[lo..=hi].iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if v[i].abs() < NODE_FLOOR * local {
            return Some(g.grid().x(i));
        }
    }
    None
}

/// (ln g)'' computed sign-free as g''/g - (g'/g)^2.
///
/// No logarithm is ever taken, so strictly negative g (the anchored w and f)
/// is as good as positive g. Errors with the node location if g vanishes or
/// changes sign in the interior.
pub fn log_second_derivative(g: &GridFn) -> Result<GridFn> {
    if let Some(x) = find_interior_node(g) {
        return Err(Error::NodeDetected { x });
    }
    let d1 = derivative(g, 1)?;
    let d2 = derivative(g, 2)?;
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let gi = g.values()[i];
        let r1 = d1.values()[i] / gi;
        out[i] = d2.values()[i] / gi - r1 * r1;
    }
    let mut f = GridFn::from_parts(g.grid().clone(), out, format!("lnpp({})", g.label()), g.flags());
    f.set_reduced_edge_accuracy();
    Ok(f)
}
