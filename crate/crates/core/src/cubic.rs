//! Level-update polynomials.
//!
//! Replacing the density by its chord over a neighbor interval turns each
//! level's local optimality condition into a cubic in the new level
//! position. This module builds those cubics for both schemes and finds
//! the guaranteed real root inside the neighbor interval.
//!
//! For the unconstrained (Lloyd-Max style) scheme the coefficients depend
//! on whether the cell touches a reference endpoint: interior levels have
//! midpoint boundaries on both sides (the cubic degenerates to a
//! quadratic), the first and last levels have one boundary pinned to a
//! reference, and a lone level (`K = 1`) has both pinned, which reduces
//! the condition to the chord centroid.

use serde::{Deserialize, Serialize};

use crate::density::{LinearApprox, DEGENERACY_FLOOR};
use crate::error::{Error, Result};
use crate::roots;

/// Which quantizer family an object belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Unconstrained mean-square-error quantizer with chord-approximated
    /// centroid updates (approximate Lloyd-Max).
    Alm,
    /// Envelope-constrained quantizer (`decode(encode(x)) >= x`) with
    /// chord-approximated updates.
    Aeq,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Alm => "alm",
            Scheme::Aeq => "aeq",
        }
    }
}

/// Position of an ALM level relative to the reference endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KCase {
    /// k = 1 with K >= 2: left cell boundary pinned to the lower reference.
    First,
    /// 2 <= k <= K-1: midpoint boundaries on both sides.
    Interior,
    /// k = K with K >= 2: right cell boundary pinned to the upper reference.
    Last,
    /// K = 1: both boundaries pinned; the update is the chord centroid.
    Sole,
}

/// Floor applied to chord endpoint values so the bracket sign guarantees
/// survive densities that vanish at the support ends.
pub const PDF_FLOOR: f64 = 1e-12;

/// Maximum bracket width accepted by [`root_in_interval`].
pub const ROOT_BRACKET_TOL: f64 = 1e-13;

/// A level-update polynomial `c0 + c1 u + c2 u^2 + c3 u^3` with its
/// bracketing interval.
#[derive(Debug, Clone, Copy)]
pub struct CubicPoly {
    pub coeffs: [f64; 4],
    pub lo: f64,
    pub hi: f64,
    pub scheme: Scheme,
    /// Set for ALM polynomials; `None` for AEQ (one formula covers all k).
    pub k_case: Option<KCase>,
}

impl CubicPoly {
    /// Horner evaluation.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs;
        c0 + u * (c1 + u * (c2 + u * c3))
    }

    /// First derivative at `u`.
    #[inline]
    pub fn derivative_at(&self, u: f64) -> f64 {
        let [_, c1, c2, c3] = self.coeffs;
        c1 + u * (2.0 * c2 + u * 3.0 * c3)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// Chord endpoint values clamped below at [`PDF_FLOOR`], re-expressed as
/// slope and intercept. Positive values at both ends keep the chord positive
/// on the whole interval, which is what the bracket sign arguments need.
fn clamped_chord(q_prev: f64, q_next: f64, la: &LinearApprox) -> (f64, f64) {
    let f_lo = la.eval(q_prev).max(PDF_FLOOR);
    let f_hi = la.eval(q_next).max(PDF_FLOOR);
    let slope = if f_lo == f_hi {
        0.0
    } else {
        (f_hi - f_lo) / (q_next - q_prev)
    };
    let intercept = f_hi - slope * q_next;
    (slope, intercept)
}

fn check_interval(q_prev: f64, q_next: f64) -> Result<()> {
    if q_next - q_prev < DEGENERACY_FLOOR {
        return Err(Error::DegenerateInterval {
            lo: q_prev,
            hi: q_next,
            floor: DEGENERACY_FLOOR,
        });
    }
    Ok(())
}

/// Build the unconstrained-scheme update polynomial for a level whose
/// neighbors sit at `q_prev < q_next`.
pub fn alm_poly(k_case: KCase, q_prev: f64, q_next: f64, la: &LinearApprox) -> Result<CubicPoly> {
    check_interval(q_prev, q_next)?;
    let (m, c) = clamped_chord(q_prev, q_next, la);
    let (p, n) = (q_prev, q_next);
    let coeffs = match k_case {
        KCase::First => [
            m / 3.0 * (p * p * p - n * n * n / 8.0) + c / 2.0 * (p * p - n * n / 4.0),
            -m / 2.0 * p * p + c / 4.0 * n - c * p,
            m / 8.0 * n + 3.0 / 8.0 * c,
            m / 12.0,
        ],
        KCase::Interior => [
            -m / 24.0 * (n * n * n - p * p * p) - c / 8.0 * (n * n - p * p),
            c / 4.0 * (n - p),
            m / 8.0 * (n - p),
            0.0,
        ],
        KCase::Last => [
            m / 3.0 * (p * p * p / 8.0 - n * n * n) + c / 2.0 * (p * p / 4.0 - n * n),
            m / 2.0 * n * n - c / 4.0 * p + c * n,
            -m / 8.0 * p - 3.0 / 8.0 * c,
            -m / 12.0,
        ],
        // Both boundaries fixed: the optimality condition is linear, with
        // root at the centroid of the chord over [p, n].
        KCase::Sole => [
            -(m / 3.0 * (n * n * n - p * p * p) + c / 2.0 * (n * n - p * p)),
            m / 2.0 * (n * n - p * p) + c * (n - p),
            0.0,
            0.0,
        ],
    };
    Ok(CubicPoly {
        coeffs,
        lo: q_prev,
        hi: q_next,
        scheme: Scheme::Alm,
        k_case: Some(k_case),
    })
}

/// Build the envelope-scheme update polynomial; a single coefficient
/// formula covers every level.
pub fn aeq_poly(q_prev: f64, q_next: f64, la: &LinearApprox) -> Result<CubicPoly> {
    check_interval(q_prev, q_next)?;
    let (m, c) = clamped_chord(q_prev, q_next, la);
    let (p, n) = (q_prev, q_next);
    let coeffs = [
        2.0 / 3.0 * m * p * p * p + c * (p * p - n * n),
        -2.0 * c * (p - n) - m * (n * n + p * p),
        2.0 * m * n,
        -2.0 / 3.0 * m,
    ];
    Ok(CubicPoly {
        coeffs,
        lo: q_prev,
        hi: q_next,
        scheme: Scheme::Aeq,
        k_case: None,
    })
}

/// Deterministic bracketed root of the polynomial inside `[lo, hi]`.
///
/// The endpoint signs are guaranteed to differ for positive chords; if they
/// do not (density positivity violated or a coefficient bug), the interior
/// is scanned for a crossing before giving up. Bisection safeguarded by
/// Newton shrinks the bracket below [`ROOT_BRACKET_TOL`].
pub fn root_in_interval(poly: &CubicPoly) -> Result<f64> {
    let f = |u: f64| poly.eval(u);
    let f_lo = f(poly.lo);
    let f_hi = f(poly.hi);
    let bracket = if f_lo == 0.0 {
        (poly.lo, poly.lo, 0.0, 0.0)
    } else if f_hi == 0.0 {
        (poly.hi, poly.hi, 0.0, 0.0)
    } else if (f_lo > 0.0) != (f_hi > 0.0) {
        (poly.lo, poly.hi, f_lo, f_hi)
    } else {
        match roots::scan_for_bracket(&f, poly.lo, poly.hi, 64) {
            Some(b) => b,
            None => {
                return Err(Error::RootNotFound {
                    lo: poly.lo,
                    hi: poly.hi,
                    f_lo,
                    f_hi,
                    coeffs: poly.coeffs,
                })
            }
        }
    };
    let root = roots::refine_bracket(
        &f,
        |u| Some(poly.derivative_at(u)),
        bracket,
        ROOT_BRACKET_TOL,
    );
    Ok(root.clamp(poly.lo, poly.hi))
}
