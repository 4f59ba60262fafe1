//! Executable verification: every claim the transformations make becomes a
//! named check with a value, a threshold and a pass flag, collected into a
//! self-describing JSON report.
//!
//! Residual norms are backward-relative (scaled by the magnitude of the
//! terms that combine), evaluated on the resolved interior, so thresholds
//! are comparable across models even when the functions span hundreds of
//! orders of magnitude.

use serde::Serialize;
use serde_json::json;

use crate::chain::{JordanChain, SpectrumReport};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::numerics::stencil::{derivative, find_interior_node, NODE_FLOOR};

/// One verification check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub meta: serde_json::Value,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, meta: serde_json::Value) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value <= threshold,
            meta,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, meta: serde_json::Value) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value >= threshold,
            meta,
        }
    }
}

/// A bundle of checks plus the hash of the configuration that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub config_hash: String,
}

impl VerifyReport {
    pub fn new(config_hash: impl Into<String>) -> Self {
        VerifyReport {
            checks: Vec::new(),
            config_hash: config_hash.into(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn grid_meta(g: &GridFn) -> serde_json::Value {
    let grid = g.grid();
    let (a, b) = grid.resolved_interior();
    json!({
        "n": grid.len(),
        "h": grid.h(),
        "x_min": grid.x_min(),
        "x_max": grid.x_max(),
        "window": [grid.x(a), grid.x(b)],
        "trimmed_left": a,
        "trimmed_right": grid.len() - 1 - b,
    })
}

/// Outcome of an intertwining test: either a relative residual, or the
/// recognition that the state was a kernel member (the residual quotient is
/// meaningless on those).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntertwiningOutcome {
    Residual(f64),
    KernelMember,
}

/// sup |(-d2 + V_target - E)(Op psi)| / sup |Op psi| over the resolved
/// interior, the operational form of the intertwining relation
/// H_target Op = Op H_source on an eigenstate of the source problem.
pub fn intertwining_residual(
    v_source: &GridFn,
    v_target: &GridFn,
    op: impl Fn(&GridFn) -> Result<GridFn>,
    psi: &GridFn,
    e: f64,
) -> Result<IntertwiningOutcome> {
    v_source.require_same_grid(v_target, "intertwining grids")?;
    v_source.require_same_grid(psi, "intertwining state")?;
    let mapped = op(psi)?;
    let (a, b) = v_target.grid().resolved_interior();
    let mut sup_mapped = 0.0f64;
    let mut sup_psi = 0.0f64;
    for i in a..=b {
        sup_mapped = sup_mapped.max(mapped.values()[i].abs());
        sup_psi = sup_psi.max(psi.values()[i].abs());
    }
    if sup_mapped < 1e-3 * sup_psi {
        return Ok(IntertwiningOutcome::KernelMember);
    }
    let d2 = derivative(&mapped, 2)?;
    let mut sup_res = 0.0f64;
    for i in a..=b {
        let res = -d2.values()[i] + (v_target.values()[i] - e) * mapped.values()[i];
        sup_res = sup_res.max(res.abs());
    }
    Ok(IntertwiningOutcome::Residual(sup_res / sup_mapped))
}

/// Result of matching a computed spectrum against expected levels.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumComparison {
    pub pass: bool,
    /// (expected, found, |delta|) for each greedy in-order match.
    pub rows: Vec<(f64, f64, f64)>,
    pub unmatched_expected: Vec<f64>,
    pub unmatched_found: Vec<f64>,
}

/// Greedy in-order matching of found levels against expected ones within
/// `tol`; spectra here are well separated, so no assignment problem arises.
pub fn spectrum_compare(report: &SpectrumReport, expected: &[f64], tol: f64) -> SpectrumComparison {
    let found = report.energies();
    let mut rows = Vec::new();
    let mut unmatched_expected = Vec::new();
    let mut unmatched_found = Vec::new();
    let mut i = 0usize;
    let mut j = 0usize;
    while i < expected.len() && j < found.len() {
        let delta = (expected[i] - found[j]).abs();
        if delta <= tol {
            rows.push((expected[i], found[j], delta));
            i += 1;
            j += 1;
        } else if found[j] < expected[i] {
            unmatched_found.push(found[j]);
            j += 1;
        } else {
            unmatched_expected.push(expected[i]);
            i += 1;
        }
    }
    unmatched_expected.extend_from_slice(&expected[i..]);
    unmatched_found.extend_from_slice(&found[j..]);
    SpectrumComparison {
        pass: unmatched_expected.is_empty(),
        rows,
        unmatched_expected,
        unmatched_found,
    }
}

/// Norms of the candidate missing state across a family of f0 values;
/// singular members are reported per point rather than aborting the sweep.
pub fn norm_sweep(
    f0_values: &[f64],
    mut psi_eps_norm: impl FnMut(f64) -> Result<f64>,
) -> Vec<(f64, Result<f64>)> {
    f0_values.iter().map(|&f0| (f0, psi_eps_norm(f0))).collect()
}

/// Sup of |a - b| over the resolved interior, with the window recorded.
pub fn sup_difference(a: &GridFn, b: &GridFn) -> Result<(f64, serde_json::Value)> {
    a.require_same_grid(b, "sup_difference")?;
    let (lo, hi) = a.grid().resolved_interior();
    let mut sup = 0.0f64;
    for i in lo..=hi {
        sup = sup.max((a.values()[i] - b.values()[i]).abs());
    }
    Ok((sup, grid_meta(a)))
}

/// Relative sup of |a - b| / (1 + |b|) over the resolved interior.
pub fn sup_relative_difference(a: &GridFn, b: &GridFn) -> Result<(f64, serde_json::Value)> {
    a.require_same_grid(b, "sup_relative_difference")?;
    let (lo, hi) = a.grid().resolved_interior();
    let mut sup = 0.0f64;
    for i in lo..=hi {
        sup = sup.max((a.values()[i] - b.values()[i]).abs() / (1.0 + b.values()[i].abs()));
    }
    Ok((sup, grid_meta(a)))
}

/// Relative sup-norm of `out` against a reference amplitude, the form used
/// for kernel residuals.
pub fn relative_sup(out: &GridFn, reference: &GridFn) -> Result<f64> {
    out.require_same_grid(reference, "relative_sup")?;
    let (lo, hi) = out.grid().resolved_interior();
    let mut sup = 0.0f64;
    let mut scale = 0.0f64;
    for i in lo..=hi {
        sup = sup.max(out.values()[i].abs());
        scale = scale.max(reference.values()[i].abs());
    }
    if scale == 0.0 {
        return Err(Error::DegenerateSeed {
            context: "reference amplitude vanishes on the interior".into(),
        });
    }
    Ok(sup / scale)
}

/// The structural invariants a constructed chain must satisfy: a nodeless
/// seed, a single-signed w, and the discrete Wronskian identity
/// W(u1, u2) = w.
pub fn chain_invariants(chain: &JordanChain, v0: &GridFn) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let meta = grid_meta(&chain.u1);

    let u1_node = find_interior_node(&chain.u1);
    checks.push(Check::at_most(
        "chain.u1-nodeless",
        if u1_node.is_some() { 1.0 } else { 0.0 },
        0.0,
        json!({ "node_at": u1_node, "floor": NODE_FLOOR }),
    ));

    let w_node = find_interior_node(&chain.w);
    checks.push(Check::at_most(
        "chain.w-single-signed",
        if w_node.is_some() { 1.0 } else { 0.0 },
        0.0,
        json!({ "node_at": w_node }),
    ));

    // W(u1, u2) = w pointwise
    let d1 = derivative(&chain.u1, 1)?;
    let d2 = derivative(&chain.u2, 1)?;
    let (lo, hi) = chain.u1.grid().resolved_interior();
    let mut worst = 0.0f64;
    for i in lo..=hi {
        let w12 = chain.u1.values()[i] * d2.values()[i] - d1.values()[i] * chain.u2.values()[i];
        let rel = (w12 - chain.w.values()[i]).abs() / (1.0 + chain.w.values()[i].abs());
        worst = worst.max(rel);
    }
    checks.push(Check::at_most("chain.wronskian-identity", worst, 1e-7, meta.clone()));

    // (H0 - eps) u2 = u1 and (H0 - eps) u3 = u2
    let r2 = crate::numerics::inhomogeneous_residual(v0, chain.epsilon, &chain.u2, &chain.u1)?;
    checks.push(Check::at_most("chain.u2-equation", r2, 1e-5, meta.clone()));
    let r3 = crate::numerics::inhomogeneous_residual(v0, chain.epsilon, &chain.u3, &chain.u2)?;
    checks.push(Check::at_most("chain.u3-equation", r3, 1e-5, meta));

    Ok(checks)
}

/// The standard model suites behind `susy-forge verify`: each claim of the
/// construction, instantiated on the free particle and the Coulomb problem,
/// as checks with pinned thresholds.
pub mod suites {
    use super::*;
    use crate::chain::Regime;
    use crate::grid::Grid;
    use crate::hyperconfluent3::{apply_b3, apply_b3_on_solution, map_eigenstate_3};
    use crate::models::{CoulombPack, FreeParticlePack};
    use crate::numerics::eigen::{eigensolve, EigenSolveConfig};
    use crate::numerics::ode::{solve_homogeneous, Direction};
    use crate::numerics::quadrature::{cumulative_integral, integrate, l2_norm};
    use crate::pipeline::{well_minimum, ChainBase, ModelChoice};

    /// Quadrature, differentiation and integration-order canaries that do
    /// not depend on the model.
    pub fn numerics_suite(report: &mut VerifyReport) -> Result<()> {
        // cumulative quadrature is exact on cubics
        let g = Grid::finite(-1.0, 2.0, 301)?;
        let cubic = GridFn::tabulate(&g, "cubic", |x| 3.0 * x * x * x - 2.0 * x * x + x - 4.0)?;
        let anti = |x: f64| 0.75 * x.powi(4) - 2.0 / 3.0 * x.powi(3) + 0.5 * x * x - 4.0 * x;
        let f = cumulative_integral(&cubic, -1.0)?;
        let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            worst = worst.max((f.values()[i] - (anti(g.x(i)) - anti(-1.0))).abs() / scale);
        }
        report.push(Check::at_most("numerics.quadrature-cubic-exact", worst, 1e-12, json!({"n": 301})));

        // derivative error contracts at 4th order under grid halving
        let err_for = |n: usize| -> Result<f64> {
            let g = Grid::finite(-1.0, 1.0, n)?;
            let f = GridFn::tabulate(&g, "sin", f64::sin)?;
            let d1 = derivative(&f, 1)?;
            let d2 = derivative(&f, 2)?;
            let (a, b) = g.resolved_interior();
            let mut e = 0.0f64;
            for i in a..=b {
                e = e.max((d1.values()[i] - g.x(i).cos()).abs());
                e = e.max((d2.values()[i] + g.x(i).sin()).abs());
            }
            Ok(e)
        };
        let ratio = err_for(51)? / err_for(101)?;
        report.push(Check::at_least("numerics.derivative-order", ratio, 12.0, json!({"grids": [51, 101]})));

        // same for the homogeneous integrator, against the closed form e^x
        let numerov_err = |n: usize| -> Result<f64> {
            let g = Grid::finite(0.0, 2.0, n)?;
            let v0 = GridFn::tabulate(&g, "V0", |_| 0.0)?;
            let u = solve_homogeneous(&v0, -1.0, Direction::LeftToRight, (1.0, 1.0))?;
            Ok((u.values()[n - 1] - (2.0f64).exp()).abs())
        };
        let ratio = numerov_err(51)? / numerov_err(101)?;
        report.push(Check::at_least("numerics.numerov-order", ratio, 12.0, json!({"grids": [51, 101]})));
        Ok(())
    }

    fn push_spectrum_checks(
        report: &mut VerifyReport,
        prefix: &str,
        rep: &SpectrumReport,
        expected: &[f64],
        tol: f64,
    ) {
        let cmp = spectrum_compare(rep, expected, tol);
        let worst = cmp
            .rows
            .iter()
            .map(|r| r.2)
            .fold(0.0f64, f64::max)
            .max(if cmp.pass { 0.0 } else { f64::INFINITY });
        report.push(Check::at_most(
            format!("{prefix}.levels"),
            worst,
            tol,
            json!({
                "rows": cmp.rows,
                "unmatched_expected": cmp.unmatched_expected,
                "unmatched_found": cmp.unmatched_found,
            }),
        ));
        let max_residual = rep.levels.iter().map(|l| l.residual).fold(0.0f64, f64::max);
        report.push(Check::at_most(
            format!("{prefix}.eigensolver-resolution"),
            max_residual,
            1e-5,
            if rep.discretization_too_coarse {
                json!({"diagnosis": "discretization-too-coarse"})
            } else {
                json!({})
            },
        ));
    }

    fn kernel_checks(report: &mut VerifyReport, prefix: &str, base: &ChainBase, u_second: &GridFn) -> Result<()> {
        for (name, member) in [("u1", &base.u1), ("u2", &base.u2), ("u3", &base.u3)] {
            let out = apply_b3(&base.b2, u_second, member)?;
            let r = relative_sup(&out, member)?;
            report.push(Check::at_most(format!("{prefix}.kernel-b3-{name}"), r, 1e-4, json!({})));
        }
        // the companion must NOT be annihilated; B3 of the companion is
        // bounded while the companion grows exponentially, so survival is a
        // pointwise-relative statement
        let out = apply_b3(&base.b2, u_second, &base.u1_tilde)?;
        let (lo, hi) = out.grid().resolved_interior();
        let mut survival = 0.0f64;
        for i in lo..=hi {
            survival = survival.max(out.values()[i].abs() / (1.0 + base.u1_tilde.values()[i].abs()));
        }
        report.push(Check::at_least(format!("{prefix}.b3-keeps-companion"), survival, 1e-1, json!({})));
        Ok(())
    }

    fn monotone_norm_check(report: &mut VerifyReport, name: &str, base: &ChainBase, f0s: &[f64], min_ratio: f64) {
        let norms = norm_sweep(f0s, |f0| base.missing_norm(f0));
        let mut worst_ratio = f64::INFINITY;
        let mut previous: Option<f64> = None;
        let mut values = Vec::new();
        for (_, n) in &norms {
            match n {
                Ok(v) => {
                    if let Some(p) = previous {
                        worst_ratio = worst_ratio.min(v / p);
                    }
                    previous = Some(*v);
                    values.push(*v);
                }
                Err(_) => {
                    worst_ratio = f64::NEG_INFINITY;
                }
            }
        }
        report.push(Check::at_least(
            name,
            worst_ratio,
            min_ratio,
            json!({"f0": f0s, "norms": values}),
        ));
    }

    /// All free-particle claims at wave number k (thresholds pinned at the
    /// k = 1 scale).
    pub fn free_particle_suite(report: &mut VerifyReport, k: f64, grid_n: Option<usize>) -> Result<()> {
        numerics_suite(report)?;
        let pack = FreeParticlePack::new(k)?;
        let base = match ChainBase::build(ModelChoice::Free { k }, grid_n, 0.0) {
            Ok(b) => b,
            Err(e) => {
                report.push(Check::at_most(
                    "free.chain-construction",
                    f64::INFINITY,
                    0.0,
                    json!({"error": e.to_string(), "diagnosis": "discretization-too-coarse"}),
                ));
                return Ok(());
            }
        };
        let meta = json!({"k": k, "n": base.grid.len()});

        report.push(Check::at_most(
            "free.sigma-minus",
            (base.sigma_minus - pack.sigma_minus()).abs(),
            1e-8,
            meta.clone(),
        ));

        // f0 = -2 sigma_minus puts the well center at x1 = 0
        let f0 = -2.0 * pack.sigma_minus();
        let art = base.with_f0(f0)?;
        let closed = GridFn::tabulate(&base.grid, "V3_closed", |x| pack.v3_closed(0.0, x))?;
        let (sup, win) = sup_difference(&art.v3_direct, &closed)?;
        report.push(Check::at_most("free.pt-reproduction", sup, 1e-5, win));

        let (sup, win) = sup_difference(&art.v3_direct, &art.v3_iterative)?;
        report.push(Check::at_most("free.route-equivalence", sup, 1e-4, win));

        // w' = -u1^2, relative to the seed scale
        let dw = derivative(&base.w, 1)?;
        let (a, b) = base.grid.resolved_interior();
        let scale = base.u1.values()[a..=b].iter().fold(0.0f64, |m, &v| m.max(v * v));
        let mut worst = 0.0f64;
        for i in a..=b {
            let u2 = base.u1.values()[i] * base.u1.values()[i];
            worst = worst.max((dw.values()[i] + u2).abs());
        }
        report.push(Check::at_most("free.w-prime-identity", worst / scale, 5e-8, meta.clone()));

        for check in chain_invariants(&art.transform.chain, &base.v0)? {
            report.push(Check {
                name: format!("free.{}", check.name),
                ..check
            });
        }
        kernel_checks(report, "free", &base, &art.u_second_level)?;

        // the partner holds exactly one level, at -k^2
        let bracket = (-1.9 * k * k, -1e-4 * k.max(1.0));
        let rep = eigensolve(&art.v3_direct, &EigenSolveConfig::new(4, bracket))?;
        report.push(Check::at_most(
            "free.level-count",
            (rep.levels.len() as f64 - 1.0).abs(),
            0.0,
            json!({"bracket": bracket}),
        ));
        push_spectrum_checks(report, "free.partner", &rep, &[-k * k], 1e-4);

        // missing state is the well's ground state
        let exact = GridFn::tabulate(&base.grid, "sech", |x| 1.0 / (k * x).cosh())?;
        let norm = l2_norm(&exact)?;
        let exact = exact.map("sech_n", |v| v / norm);
        let prod = art.missing.state.zip(&exact, "overlap", |p, q| p * q)?;
        let fidelity = integrate(&prod)?.abs();
        report.push(Check::at_least("free.missing-state-fidelity", fidelity, 1.0 - 1e-6, meta.clone()));

        // norms of the extra state diverge toward the window boundary
        let scale3 = 1.0 / (k * k * k);
        let f0s: Vec<f64> = [-0.225, -0.175, -0.135, -0.126].iter().map(|v| v * scale3).collect();
        monotone_norm_check(report, "free.norm-sweep-monotone", &base, &f0s, 1.0 + 1e-6);
        Ok(())
    }

    /// All Coulomb claims at angular momentum l (closed-form state checks
    /// run at l = 0 where the oracles exist).
    pub fn coulomb_suite(report: &mut VerifyReport, l: u32, grid_n: Option<usize>) -> Result<()> {
        let pack = CoulombPack::new(l)?;
        let base = match ChainBase::build(ModelChoice::Coulomb { l }, grid_n, 0.0) {
            Ok(b) => b,
            Err(e) => {
                report.push(Check::at_most(
                    "coulomb.chain-construction",
                    f64::INFINITY,
                    0.0,
                    json!({"error": e.to_string(), "diagnosis": "discretization-too-coarse"}),
                ));
                return Ok(());
            }
        };
        let meta = json!({"l": l, "n": base.grid.len()});
        let f0 = -0.1;
        let art = base.with_f0(f0)?;

        // quadrature-built w against the incomplete-gamma closed form
        let mut worst = 0.0f64;
        for i in 0..base.grid.len() {
            let r = base.grid.x(i);
            if r > 30.0 {
                break;
            }
            worst = worst.max((base.w.values()[i] - pack.w(r)?).abs());
        }
        report.push(Check::at_most("coulomb.w-quadrature-vs-closed", worst, 1e-7, meta.clone()));

        // the two printed series for f agree, and match the quadrature
        let mut rep_dev = 0.0f64;
        let mut quad_dev = 0.0f64;
        for &r in &[0.5, 1.0, 2.0, 5.0] {
            let ds = pack.f(f0, r, crate::specfun::CoulombFRep::DoubleSum)?;
            let ht = pack.f(f0, r, crate::specfun::CoulombFRep::HypPlusTail)?;
            rep_dev = rep_dev.max((ds - ht).abs() / (1.0 + ds.abs()));
            let i = base.grid.snap(r);
            quad_dev = quad_dev.max((art.f.values()[i] - ht).abs());
        }
        report.push(Check::at_most("coulomb.f-representations", rep_dev, 1e-9, meta.clone()));
        report.push(Check::at_most("coulomb.f-quadrature-consistency", quad_dev, 1e-7, meta.clone()));

        let (sup, win) = sup_difference(&art.v3_direct, &art.v3_iterative)?;
        report.push(Check::at_most("coulomb.route-equivalence", sup, 1e-4, win));

        for check in chain_invariants(&art.transform.chain, &base.v0)? {
            report.push(Check {
                name: format!("coulomb.{}", check.name),
                ..check
            });
        }
        kernel_checks(report, "coulomb", &base, &art.u_second_level)?;

        if l == 0 {
            // second-order intertwining on the closed-form excited states
            for n in [1usize, 2] {
                let psi = GridFn::tabulate(&base.grid, "psi", |r| pack.bound_state_l0(n, r).unwrap())?;
                let e_n = pack.energy(n);
                let out = intertwining_residual(
                    &base.v0,
                    &base.v2,
                    |p| crate::confluent2::apply_b2_on_solution(&base.b2, p, e_n),
                    &psi,
                    e_n,
                )?;
                let residual = match out {
                    IntertwiningOutcome::Residual(r) => r,
                    IntertwiningOutcome::KernelMember => f64::INFINITY,
                };
                report.push(Check::at_most(
                    format!("coulomb.intertwining-b2-psi{n}"),
                    residual,
                    1e-4,
                    meta.clone(),
                ));
            }

            // closed-form first excited state through the intertwiner
            let psi1 = GridFn::tabulate(&base.grid, "psi1", |r| pack.bound_state_l0(1, r).unwrap())?;
            let e1 = pack.energy(1);
            let out = intertwining_residual(
                &base.v0,
                &art.v3_direct,
                |p| apply_b3_on_solution(&base.b2, &art.u_second_level, p, e1),
                &psi1,
                e1,
            )?;
            let residual = match out {
                IntertwiningOutcome::Residual(r) => r,
                IntertwiningOutcome::KernelMember => f64::INFINITY,
            };
            report.push(Check::at_most("coulomb.intertwining-psi1", residual, 1e-3, meta.clone()));

            let mapped = map_eigenstate_3(&base.b2, &art.u_second_level, &psi1, e1, base.epsilon)?;
            report.push(Check::at_most(
                "coulomb.mapped-norm",
                (mapped.raw_norm - 1.0).abs(),
                5e-2,
                json!({"raw_norm": mapped.raw_norm}),
            ));
        }

        // strict isospectrality of V0 and V3
        let expected: Vec<f64> = (0..3).map(|n| pack.energy(n)).collect();
        let bracket = (1.5 * base.epsilon, -1e-6);
        let rep0 = eigensolve(&base.v0, &EigenSolveConfig::new(3, bracket))?;
        push_spectrum_checks(report, "coulomb.base", &rep0, &expected, 1e-3);
        let rep3 = eigensolve(&art.v3_direct, &EigenSolveConfig::new(3, bracket))?;
        push_spectrum_checks(report, "coulomb.partner", &rep3, &expected, 1e-3);

        // norms of the extra state double (at least) per decade of f0
        monotone_norm_check(report, "coulomb.norm-sweep-monotone", &base, &[-1e-1, -1e-2, -1e-3], 2.0);

        // the boundary value deletes the ground level
        let (_, regime) = base.classify(0.0)?;
        report.push(Check::at_most(
            "coulomb.ground-deleted-at-boundary",
            if regime == Regime::GroundDeleted { 0.0 } else { 1.0 },
            0.0,
            json!({"regime": regime.name()}),
        ));

        // the induced well sits near r ~ 1 and the partner rejoins the base
        // potential at large r
        let (well_r, well_depth) = well_minimum(&art.v3_direct).ok_or_else(|| Error::Domain {
            what: "partner potential has no interior minimum".into(),
        })?;
        report.push(Check::at_most(
            "coulomb.well-position",
            (well_r - 1.4).abs(),
            1.1,
            json!({"well_r": well_r, "well_depth": well_depth}),
        ));
        let i_far = base.grid.len() - 1 - crate::grid::EDGE_TRIM;
        let tail_gap = (art.v3_direct.values()[i_far] - base.v0.values()[i_far]).abs();
        report.push(Check::at_most("coulomb.tail-rejoins-base", tail_gap, 1e-3, meta));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::SpectrumLevel;
    use crate::grid::Grid;

    fn report_with(levels: &[f64]) -> SpectrumReport {
        SpectrumReport {
            levels: levels
                .iter()
                .enumerate()
                .map(|(i, &e)| SpectrumLevel {
                    index: i,
                    energy: e,
                    residual: 0.0,
                })
                .collect(),
            classification: None,
            comparison: None,
            discretization_too_coarse: false,
        }
    }

    #[test]
    fn compare_matches_in_order() {
        let rep = report_with(&[-1.0001, -0.2503, -0.1113]);
        let cmp = spectrum_compare(&rep, &[-1.0, -0.25, -1.0 / 9.0], 1e-3);
        assert!(cmp.pass);
        assert_eq!(cmp.rows.len(), 3);
    }

    #[test]
    fn compare_reports_unmatched() {
        // deletion: the found list is missing the ground level
        let rep = report_with(&[-0.25, -0.1111]);
        let cmp = spectrum_compare(&rep, &[-0.25, -1.0 / 9.0], 1e-3);
        assert!(cmp.pass, "deletion spectrum matches the shorter expectation");
        let cmp_with_ground = spectrum_compare(&rep, &[-1.0, -0.25, -1.0 / 9.0], 1e-3);
        assert!(!cmp_with_ground.pass);
        assert_eq!(cmp_with_ground.unmatched_expected, vec![-1.0]);
    }

    #[test]
    fn compare_reports_extra_found() {
        let rep = report_with(&[-1.0, -0.6, -0.25]);
        let cmp = spectrum_compare(&rep, &[-1.0, -0.25], 1e-3);
        assert!(cmp.pass);
        assert_eq!(cmp.unmatched_found, vec![-0.6]);
    }

    #[test]
    fn norm_sweep_empty_is_empty() {
        let out = norm_sweep(&[], |_| Ok(1.0));
        assert!(out.is_empty());
    }

    #[test]
    fn norm_sweep_reports_per_point_errors() {
        let out = norm_sweep(&[-0.3, 0.5], |f0| {
            if f0 > 0.0 {
                Err(Error::ForbiddenWindow { f0, boundary: 0.0 })
            } else {
                Ok(2.0)
            }
        });
        assert!(out[0].1.is_ok());
        assert!(out[1].1.is_err());
    }

    #[test]
    fn kernel_member_recognized() {
        let g = Grid::finite(-10.0, 10.0, 10001).unwrap();
        let v = GridFn::tabulate(&g, "V", |_| 0.0).unwrap();
        let psi = GridFn::tabulate(&g, "psi", |x| (-0.5 * x * x).exp()).unwrap();
        // the zero operator sends everything to the kernel
        let out = intertwining_residual(&v, &v, |p| Ok(p.map("0", |_| 0.0)), &psi, -1.0).unwrap();
        assert_eq!(out, IntertwiningOutcome::KernelMember);
    }

    #[test]
    fn identity_operator_measures_eigen_residual() {
        // Op = identity: the residual is that of psi itself under (H - E)
        let g = Grid::finite(-15.0, 15.0, 30001).unwrap();
        let v = GridFn::tabulate(&g, "V", |x| x * x).unwrap();
        let psi = GridFn::tabulate(&g, "psi", |x| (-0.5 * x * x).exp()).unwrap();
        match intertwining_residual(&v, &v, |p| Ok(p.clone()), &psi, 1.0).unwrap() {
            IntertwiningOutcome::Residual(r) => assert!(r < 1e-8, "residual {r}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn check_directions() {
        let c = Check::at_most("x", 1.0, 2.0, json!({}));
        assert!(c.pass);
        let c = Check::at_most("x", f64::NAN, 2.0, json!({}));
        assert!(!c.pass, "NaN never passes");
        let c = Check::at_least("ratio", 14.0, 12.0, json!({}));
        assert!(c.pass);
    }
}
