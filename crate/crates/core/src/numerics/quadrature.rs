//! Cumulative quadrature on uniform grids.
//!
//! Each cell integral uses the cubic through the four surrounding samples
//! (Newton-Cotes weights (-1, 13, 13, -1)/24, one-sided (9, 19, -5, 1)/24 at
//! the ends), so prefix sums are exact for cubics at every index and 4th
//! order for smooth integrands — the same order as composite Simpson without
//! its parity special cases.

use crate::error::{Error, Result};
use crate::grid::{FnFlags, GridFn};

/// Running compensated (Kahan) sum.
#[derive(Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Integral of the cubic interpolant over each cell `[x_j, x_{j+1}]`.
fn cell_integrals(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let c = h / 24.0;
    let mut out = Vec::with_capacity(n - 1);
    out.push(c * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]));
    for j in 1..n - 2 {
        out.push(c * (-values[j - 1] + 13.0 * values[j] + 13.0 * values[j + 1] - values[j + 2]));
    }
    out.push(c * (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1]));
    out
}

/// Cumulative integral F(x) = ∫_{x0}^{x} g, anchored at the grid sample
/// nearest `x0` (F vanishes there); the snap is recorded in the label.
pub fn cumulative_integral(g: &GridFn, x0: f64) -> Result<GridFn> {
    let i0 = g.grid().snap(x0);
    cumulative_integral_from_index(g, i0)
}

/// Same as [`cumulative_integral`] with the anchor given as a sample index.
pub fn cumulative_integral_from_index(g: &GridFn, i0: usize) -> Result<GridFn> {
    let n = g.len();
    if n < 4 {
        return Err(Error::TooFewPoints { required: 4, got: n });
    }
    for (i, v) in g.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: format!("integrand `{}` at x = {}", g.label(), g.grid().x(i)),
            });
        }
    }
    let cells = cell_integrals(g.values(), g.grid().h());
    // accumulate outward from the anchor in both directions; a single global
    // prefix would cancel catastrophically wherever |F| is small against the
    // integral's overall scale
    let mut values = vec![0.0; n];
    let mut acc = Kahan::default();
    for (j, c) in cells.iter().enumerate().skip(i0) {
        acc.add(*c);
        values[j + 1] = acc.value();
    }
    let mut acc = Kahan::default();
    for j in (0..i0).rev() {
        acc.add(-cells[j]);
        values[j] = acc.value();
    }
    let label = if g.grid().x(i0) == g.grid().x_min() {
        format!("int({})", g.label())
    } else {
        format!("int({}) from x0={}", g.label(), g.grid().x(i0))
    };
    Ok(GridFn::from_parts(
        g.grid().clone(),
        values,
        label,
        FnFlags::default(),
    ))
}

/// Definite integral over the whole grid.
pub fn integrate(g: &GridFn) -> Result<f64> {
    let f = cumulative_integral_from_index(g, 0)?;
    Ok(*f.values().last().unwrap())
}

/// L2 norm sqrt(∫ g^2) over the grid.
pub fn l2_norm(g: &GridFn) -> Result<f64> {
    let sq = g.map(format!("({})^2", g.label()), |v| v * v);
    Ok(integrate(&sq)?.max(0.0).sqrt())
}

/// Estimated integral of `g` over the stretch of domain a truncated edge
/// hides: from the nominal singular point (or infinity) to the first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgePiece {
    /// Finite edge: nothing is hidden.
    None,
    /// The hidden stretch contributes this much.
    Finite(f64),
    /// The integral of `g` does not converge at this edge.
    Divergent,
}

impl EdgePiece {
    pub fn value(self) -> f64 {
        match self {
            EdgePiece::Finite(v) => v,
            _ => 0.0,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, EdgePiece::Divergent)
    }
}

fn edge_probe(g: &GridFn, left: bool) -> (usize, usize) {
    let n = g.len();
    let w = 4.min(n - 1);
    if left {
        (0, w)
    } else {
        (n - 1, n - 1 - w)
    }
}

/// Estimate what `∫ g` misses beyond a truncated edge.
///
/// At a truncated-singular edge g is modelled as a power of the distance to
/// the singular point; at a truncated-infinite edge as an exponential. This
/// is how the analytic limits at the nominal endpoints (w -> 0 at the
/// origin, anchoring integrals from -infinity) are imposed without ever
/// sampling the nominal point itself.
pub fn edge_tail_piece(g: &GridFn, left: bool) -> EdgePiece {
    let grid = g.grid();
    let boundary = if left { grid.left() } else { grid.right() };
    let (i_edge, i_in) = edge_probe(g, left);
    let g_edge = g.values()[i_edge];
    let g_in = g.values()[i_in];
    match boundary {
        crate::grid::Boundary::Finite => EdgePiece::None,
        crate::grid::Boundary::TruncatedSingular { nominal, .. } => {
            if g_edge == 0.0 {
                return EdgePiece::Finite(0.0);
            }
            if g_in == 0.0 || g_in.signum() != g_edge.signum() {
                return EdgePiece::Finite(0.0);
            }
            let d_edge = (grid.x(i_edge) - nominal).abs();
            let d_in = (grid.x(i_in) - nominal).abs();
            let p = (g_in / g_edge).abs().ln() / (d_in / d_edge).ln();
            if p <= -0.95 {
                EdgePiece::Divergent
            } else {
                EdgePiece::Finite(g_edge * d_edge / (p + 1.0))
            }
        }
        crate::grid::Boundary::TruncatedInfinite { .. } => {
            if g_edge == 0.0 {
                return EdgePiece::Finite(0.0);
            }
            if g_in == 0.0 || g_in.signum() != g_edge.signum() {
                return EdgePiece::Finite(0.0);
            }
            // outward decay rate; g ~ g_edge e^{-s d} beyond the edge
            let span = (grid.x(i_in) - grid.x(i_edge)).abs();
            let s = (g_in / g_edge).abs().ln() / span;
            if s <= 1e-6 {
                EdgePiece::Divergent
            } else {
                EdgePiece::Finite(g_edge / s)
            }
        }
    }
}

/// Local power-law exponent of `g` at a truncated-singular edge, or `None`
/// at other edges. `g ~ d^p` in the distance `d` to the singular point.
pub fn singular_edge_exponent(g: &GridFn, left: bool) -> Option<f64> {
    let grid = g.grid();
    let boundary = if left { grid.left() } else { grid.right() };
    let nominal = match boundary {
        crate::grid::Boundary::TruncatedSingular { nominal, .. } => nominal,
        _ => return None,
    };
    let (i_edge, i_in) = edge_probe(g, left);
    let g_edge = g.values()[i_edge];
    let g_in = g.values()[i_in];
    if g_edge == 0.0 || g_in == 0.0 {
        return None;
    }
    let d_edge = (grid.x(i_edge) - nominal).abs();
    let d_in = (grid.x(i_in) - nominal).abs();
    Some((g_in / g_edge).abs().ln() / (d_in / d_edge).ln())
}

/// Cumulative integral anchored at sample `i0`, shifted so that an anchor on
/// the first or last sample of a truncated edge means "anchored at the
/// nominal endpoint": the hidden edge stretch is added analytically.
pub fn chain_integral(g: &GridFn, i0: usize) -> Result<GridFn> {
    let mut f = cumulative_integral_from_index(g, i0)?;
    let piece = if i0 == 0 {
        match edge_tail_piece(g, true) {
            EdgePiece::Divergent => return Err(Error::DivergentIntegral { side: "left" }),
            p => p.value(),
        }
    } else if i0 == g.len() - 1 {
        match edge_tail_piece(g, false) {
            EdgePiece::Divergent => return Err(Error::DivergentIntegral { side: "right" }),
            p => -p.value(),
        }
    } else {
        0.0
    };
    if piece != 0.0 {
        f = f.map(f.label().to_string(), |v| v + piece);
    }
    Ok(f)
}
