//! Special functions for the Coulomb closed forms: the lower incomplete
//! gamma function at integer order, the generalized hypergeometric 2F2, and
//! the radial profile f(r) in its two printed series representations.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Relative truncation target for all series here.
const REL_TOL: f64 = 1e-12;
/// Safety cap on series length; factorial decay means it never binds for the
/// arguments these routines see.
const TERM_CAP: usize = 100_000;
/// Consecutive sub-threshold terms required before a series stops.
const STOP_RUN: usize = 3;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 2001];
        let mut acc = 0.0f64;
        for (n, slot) in t.iter_mut().enumerate().skip(1) {
            acc += (n as f64).ln();
            *slot = acc;
        }
        t
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / (a-1)! for
/// integer a >= 1, stable at both ends.
///
/// For x below a+1 the all-positive ascending series is used; above, the
/// finite-sum complement 1 - e^{-x} sum_{k<a} x^k/k! (compensated summation),
/// where the subtraction is harmless because the sum is no longer close to
/// e^x.
fn reg_lower_gamma_int(a: u32, x: f64) -> f64 {
    debug_assert!(a >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    if x > 700.0 {
        return 1.0;
    }
    if a == 1 {
        return -(-x).exp_m1();
    }
    let af = f64::from(a);
    if x < af + 1.0 {
        // P(a,x) = x^a e^{-x} / a! * sum_{n>=0} x^n a! / (a+n)!
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut denom = af;
        for _ in 0..TERM_CAP {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term < REL_TOL * sum {
                break;
            }
        }
        // prefactor directly while it cannot overflow; through logs otherwise
        if a <= 20 {
            x.powi(a as i32) * (-x).exp() / factorial(a) * sum
        } else {
            let lnf = ln_factorials();
            (af * x.ln() - x - lnf[a as usize] + sum.ln()).exp()
        }
    } else {
        let mut term = 1.0f64;
        let mut sum = Kahan::default();
        sum.add(1.0);
        for k in 1..a {
            term *= x / f64::from(k);
            sum.add(term);
        }
        1.0 - (-x).exp() * sum.value()
    }
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Lower incomplete gamma gamma(a, x) at integer order a >= 1, x >= 0.
///
/// Saturates to (a-1)! for x > 700, where the remainder is below the
/// representable relative error anyway.
pub fn lower_incomplete_gamma_int(a: u32, x: f64) -> Result<f64> {
    if a == 0 {
        return Err(Error::Domain {
            what: "incomplete gamma needs a >= 1".into(),
        });
    }
    if a > 170 {
        return Err(Error::Domain {
            what: format!("(a-1)! overflows f64 for a = {a}"),
        });
    }
    if x < 0.0 {
        return Err(Error::Domain {
            what: format!("incomplete gamma needs x >= 0, got {x}"),
        });
    }
    Ok(factorial(a - 1) * reg_lower_gamma_int(a, x))
}

/// Generalized hypergeometric 2F2(a1, a2; b1, b2; z) by direct summation
/// with term recurrence.
pub fn hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    for b in [b1, b2] {
        if b <= 0.0 && b == b.floor() {
            return Err(Error::PoleInParameters { b });
        }
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut term = 1.0f64;
    let mut sum = Kahan::default();
    sum.add(1.0);
    let mut small_run = 0usize;
    for n in 0..TERM_CAP {
        let nf = n as f64;
        term *= (a1 + nf) * (a2 + nf) / ((b1 + nf) * (b2 + nf)) * z / (nf + 1.0);
        if !term.is_finite() {
            return Err(Error::NonFinite {
                what: format!("2F2 term at n = {}", n + 1),
            });
        }
        sum.add(term);
        if term.abs() < REL_TOL * sum.value().abs() {
            small_run += 1;
            if small_run >= STOP_RUN {
                return Ok(sum.value());
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NoConvergence { terms: TERM_CAP })
}

/// Which printed series representation of the Coulomb f(r) to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoulombFRep {
    /// Double sum of incomplete gammas over the two tail indices.
    DoubleSum,
    /// Closed 2F2 term plus a single-index gamma tail.
    HypPlusTail,
}

/// The Coulomb chain profile f(r) for angular momentum l and integration
/// constant f0, by the requested series representation.
///
/// Both representations must agree with each other and with the quadrature
/// of (w/u1)^2; the tests enforce this.
pub fn coulomb_f(l: u32, f0: f64, r: f64, rep: CoulombFRep) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::Domain {
            what: format!("coulomb_f needs r >= 0, got {r}"),
        });
    }
    if l > 8 {
        return Err(Error::Domain {
            what: format!("coulomb_f supports l <= 8, got {l}"),
        });
    }
    if r == 0.0 {
        return Ok(f0);
    }
    let lf = f64::from(l);
    let t = 2.0 * r / (lf + 1.0);
    match rep {
        CoulombFRep::DoubleSum => {
            // f0 - (l+1)^3 (2l+1)!/2 * sum_{k,m >= 2l+3} gamma(k+m-2l-1, t) / (k! m!)
            let lnf = ln_factorials();
            let log_pref = 3.0 * (lf + 1.0).ln() + lnf[(2 * l + 1) as usize] - std::f64::consts::LN_2;
            let base = 2 * l + 3;
            let mut outer = Kahan::default();
            let mut outer_small = 0usize;
            let mut total_terms = 0usize;
            for k in base..base + TERM_CAP as u32 {
                let mut inner = Kahan::default();
                let mut inner_small = 0usize;
                for m in base.. {
                    let s = k + m - 2 * l - 1;
                    if (s as usize) >= lnf.len() || (m as usize) >= lnf.len() {
                        return Err(Error::NoConvergence { terms: total_terms });
                    }
                    let p = reg_lower_gamma_int(s, t);
                    let log_term =
                        log_pref + lnf[(s - 1) as usize] - lnf[k as usize] - lnf[m as usize];
                    let term = p * log_term.exp();
                    inner.add(term);
                    total_terms += 1;
                    if total_terms > TERM_CAP {
                        return Err(Error::NoConvergence { terms: TERM_CAP });
                    }
                    // the row must be resolved on its own scale; stopping
                    // against the outer total would truncate every row to
                    // the same absolute error
                    if term.abs() < REL_TOL * inner.value().abs().max(f64::MIN_POSITIVE) {
                        inner_small += 1;
                        if inner_small >= STOP_RUN {
                            break;
                        }
                    } else {
                        inner_small = 0;
                    }
                }
                let row = inner.value();
                outer.add(row);
                if row.abs() < REL_TOL * outer.value().abs() {
                    outer_small += 1;
                    if outer_small >= STOP_RUN {
                        break;
                    }
                } else {
                    outer_small = 0;
                }
            }
            Ok(f0 - outer.value())
        }
        CoulombFRep::HypPlusTail => {
            // f0 - gamma(2l+3, t) / (2 (2l+3)!) r^2 2F2(1, 2; 3, 2l+4; t)
            //    + (l+1)^2/4 * sum_m gamma(m+2l+5, t) / ((m+2) (m+2l+3)!)
            let g = lower_incomplete_gamma_int(2 * l + 3, t)?;
            let hyp = hyp2f2(1.0, 2.0, 3.0, f64::from(2 * l + 4), t)?;
            let middle = g / (2.0 * factorial(2 * l + 3)) * r * r * hyp;
            // gamma(m+2l+5, t)/(m+2l+3)! = P(m+2l+5, t) * (m+2l+4), free of overflow
            let mut tail = Kahan::default();
            let mut small_run = 0usize;
            for m in 0..TERM_CAP as u32 {
                let a = m + 2 * l + 5;
                let term = reg_lower_gamma_int(a, t) * f64::from(a - 1) / f64::from(m + 2);
                tail.add(term);
                if term.abs() < REL_TOL * tail.value().abs() {
                    small_run += 1;
                    if small_run >= STOP_RUN {
                        break;
                    }
                } else {
                    small_run = 0;
                }
            }
            let tail = (lf + 1.0) * (lf + 1.0) / 4.0 * tail.value();
            Ok(f0 - middle + tail)
        }
    }
}
