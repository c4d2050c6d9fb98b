//! Source densities on the unit interval.
//!
//! Every density is supported on `[0, 1]`, normalized to unit mass, and
//! carries a declared bound on the magnitude of its slope. Truncated
//! families (normal, exponential) are renormalized by their mass on the
//! interval; user piecewise-linear densities are renormalized by their
//! trapezoid mass. The slope bound is advisory: nothing in the level
//! updates consumes it, but [`Density::slope_violations`] reports sampled
//! finite differences that exceed it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;

/// Width below which an approximation interval is considered degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Floor applied to slope-bound and peak estimates so the fields stay positive.
const ESTIMATE_FLOOR: f64 = 1e-9;

/// Declarative description of a density, as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform,
    Beta { alpha: f64, beta: f64 },
    TruncatedNormal { mu: f64, sigma: f64 },
    TruncatedExponential { lambda: f64 },
    UserPiecewiseLinear { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
enum Family {
    Uniform,
    Beta {
        alpha: f64,
        beta: f64,
        ln_norm: f64,
    },
    /// Gaussian kernel restricted to the interval; `mass` is the kernel
    /// integral over [0, 1], so pdf = kernel / mass.
    TruncatedNormal {
        mu: f64,
        sigma: f64,
        mass: f64,
    },
    TruncatedExponential {
        lambda: f64,
        mass: f64,
    },
    /// Knots are renormalized to unit mass at construction.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

/// A probability density on `[0, 1]` with a declared slope bound.
#[derive(Debug, Clone)]
pub struct Density {
    family: Family,
    spec: DensitySpec,
    slope_bound: f64,
    /// Supremum of the pdf when finite; used by rejection sampling.
    peak: Option<f64>,
}

/// Chord of the density between the endpoints of a neighbor interval.
#[derive(Debug, Clone, Copy)]
pub struct LinearApprox {
    pub slope: f64,
    pub intercept: f64,
    pub lo: f64,
    pub hi: f64,
}

impl LinearApprox {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// One sampled finite-difference ratio exceeding the declared slope bound.
#[derive(Debug, Clone, Copy)]
pub struct SlopeViolation {
    pub x: f64,
    pub ratio: f64,
}

/// Result of the finite-difference slope check.
#[derive(Debug, Clone)]
pub struct SlopeReport {
    pub max_ratio: f64,
    pub violations: Vec<SlopeViolation>,
}

impl Density {
    pub fn uniform() -> Density {
        Self::from_spec(&DensitySpec::Uniform).expect("uniform density is always valid")
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Density> {
        Self::from_spec(&DensitySpec::Beta { alpha, beta })
    }

    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Density> {
        Self::from_spec(&DensitySpec::TruncatedNormal { mu, sigma })
    }

    pub fn truncated_exponential(lambda: f64) -> Result<Density> {
        Self::from_spec(&DensitySpec::TruncatedExponential { lambda })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Density> {
        Self::from_spec(&DensitySpec::UserPiecewiseLinear { knots })
    }

    /// Build a density from its configuration record, validating parameters
    /// and precomputing normalization, slope bound, and peak.
    pub fn from_spec(spec: &DensitySpec) -> Result<Density> {
        let family = match spec {
            DensitySpec::Uniform => Family::Uniform,
            DensitySpec::Beta { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::InvalidDensity(format!(
                        "beta parameters must be positive and finite, got ({alpha}, {beta})"
                    )));
                }
                let ln_norm = ln_gamma(*alpha) + ln_gamma(*beta) - ln_gamma(alpha + beta);
                Family::Beta {
                    alpha: *alpha,
                    beta: *beta,
                    ln_norm,
                }
            }
            DensitySpec::TruncatedNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidDensity(format!(
                        "truncated normal needs finite mu and sigma > 0, got ({mu}, {sigma})"
                    )));
                }
                let (mu, sigma) = (*mu, *sigma);
                let kernel = move |x: f64| {
                    let z = (x - mu) / sigma;
                    (-0.5 * z * z).exp()
                };
                let mass = QuadratureGrid::with_tol(1e-14).integrate(kernel, 0.0, 1.0);
                if mass <= 0.0 || !mass.is_finite() {
                    return Err(Error::InvalidDensity(format!(
                        "truncated normal ({mu}, {sigma}) has no usable mass on [0, 1]"
                    )));
                }
                Family::TruncatedNormal { mu, sigma, mass }
            }
            DensitySpec::TruncatedExponential { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidDensity(format!(
                        "truncated exponential needs lambda > 0, got {lambda}"
                    )));
                }
                let mass = (1.0 - (-lambda).exp()) / lambda;
                Family::TruncatedExponential {
                    lambda: *lambda,
                    mass,
                }
            }
            DensitySpec::UserPiecewiseLinear { knots } => Family::PiecewiseLinear {
                knots: normalize_knots(knots)?,
            },
        };
        let slope_bound = declared_slope_bound(&family);
        let peak = peak_value(&family);
        Ok(Density {
            family,
            spec: spec.clone(),
            slope_bound,
            peak,
        })
    }

    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    /// Declared bound on |d pdf / dx|; advisory only.
    pub fn slope_bound(&self) -> f64 {
        self.slope_bound
    }

    /// Supremum of the pdf, when finite.
    pub fn peak(&self) -> Option<f64> {
        self.peak
    }

    /// Evaluate the pdf at `x in [0, 1]`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfSupport { x });
        }
        Ok(self.pdf_raw(x))
    }

    /// Evaluation without the domain check; callers guarantee `x in [0, 1]`.
    #[inline]
    pub(crate) fn pdf_raw(&self, x: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x));
        match &self.family {
            Family::Uniform => 1.0,
            Family::Beta {
                alpha,
                beta,
                ln_norm,
            } => beta_pdf(*alpha, *beta, *ln_norm, x),
            Family::TruncatedNormal { mu, sigma, mass } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / mass
            }
            Family::TruncatedExponential { lambda, mass } => (-lambda * x).exp() / mass,
            Family::PiecewiseLinear { knots } => pwl_eval(knots, x),
        }
    }

    /// Chord of the pdf over `[lo, hi]`, using the default degeneracy floor.
    pub fn linear_approx(&self, lo: f64, hi: f64) -> Result<LinearApprox> {
        self.linear_approx_with_floor(lo, hi, DEGENERACY_FLOOR)
    }

    /// Chord of the pdf over `[lo, hi]`: matches the pdf exactly at both
    /// endpoints, so a flat pdf yields slope zero.
    pub fn linear_approx_with_floor(&self, lo: f64, hi: f64, floor: f64) -> Result<LinearApprox> {
        if !(0.0..=1.0).contains(&lo) {
            return Err(Error::OutOfSupport { x: lo });
        }
        if !(0.0..=1.0).contains(&hi) {
            return Err(Error::OutOfSupport { x: hi });
        }
        if hi - lo < floor {
            return Err(Error::DegenerateInterval { lo, hi, floor });
        }
        let f_lo = self.pdf_raw(lo);
        let f_hi = self.pdf_raw(hi);
        let slope = if f_lo == f_hi {
            0.0
        } else {
            (f_hi - f_lo) / (hi - lo)
        };
        let intercept = f_hi - slope * hi;
        Ok(LinearApprox {
            slope,
            intercept,
            lo,
            hi,
        })
    }

    /// Draw one sample by rejection against the flat envelope `peak`.
    ///
    /// Panics if the density has an unbounded peak (e.g. Beta with a shape
    /// parameter below one); every built-in family used by the experiments
    /// is bounded.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let peak = self
            .peak
            .expect("rejection sampling requires a bounded density");
        loop {
            let x: f64 = rng.random_range(0.0..=1.0);
            let y: f64 = rng.random_range(0.0..peak);
            if y < self.pdf_raw(x) {
                return x;
            }
        }
    }

    /// Sampled finite-difference check of the declared slope bound.
    ///
    /// Evaluates `|pdf(x+h) - pdf(x)| / h` on `n` points and reports every
    /// ratio exceeding `slope_bound * (1 + 1e-6)`. The bound is not enforced
    /// at construction, so a nonempty report is diagnostic, not an error.
    pub fn slope_violations(&self, n: usize, h: f64) -> SlopeReport {
        let tol = self.slope_bound * (1.0 + 1e-6);
        let mut max_ratio: f64 = 0.0;
        let mut violations = Vec::new();
        for i in 0..n {
            let x = (i as f64 / n as f64) * (1.0 - h);
            let ratio = (self.pdf_raw(x + h) - self.pdf_raw(x)).abs() / h;
            max_ratio = max_ratio.max(ratio);
            if ratio > tol {
                violations.push(SlopeViolation { x, ratio });
            }
        }
        SlopeReport {
            max_ratio,
            violations,
        }
    }
}

fn beta_pdf(alpha: f64, beta: f64, ln_norm: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if alpha > 1.0 {
            0.0
        } else if alpha == 1.0 {
            (-ln_norm).exp()
        } else {
            f64::INFINITY
        };
    }
    if x == 1.0 {
        return if beta > 1.0 {
            0.0
        } else if beta == 1.0 {
            (-ln_norm).exp()
        } else {
            f64::INFINITY
        };
    }
    ((alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_norm).exp()
}

fn pwl_eval(knots: &[(f64, f64)], x: f64) -> f64 {
    // Binary search for the segment containing x.
    let idx = knots.partition_point(|&(kx, _)| kx <= x);
    if idx == 0 {
        return knots[0].1;
    }
    if idx == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, f0) = knots[idx - 1];
    let (x1, f1) = knots[idx];
    f0 + (f1 - f0) * (x - x0) / (x1 - x0)
}

fn normalize_knots(knots: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if knots.len() < 2 {
        return Err(Error::InvalidDensity(
            "piecewise-linear density needs at least two knots".into(),
        ));
    }
    let mut out = knots.to_vec();
    // Snap near-exact endpoints, then insist on full coverage of [0, 1].
    if out[0].0.abs() < 1e-12 {
        out[0].0 = 0.0;
    }
    if (out[out.len() - 1].0 - 1.0).abs() < 1e-12 {
        let last = out.len() - 1;
        out[last].0 = 1.0;
    }
    if out[0].0 != 0.0 || out[out.len() - 1].0 != 1.0 {
        return Err(Error::InvalidDensity(
            "piecewise-linear knots must start at x=0 and end at x=1".into(),
        ));
    }
    for pair in out.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::InvalidDensity(
                "piecewise-linear knot abscissae must be strictly increasing".into(),
            ));
        }
    }
    if out.iter().any(|&(_, f)| f < 0.0 || !f.is_finite()) {
        return Err(Error::InvalidDensity(
            "piecewise-linear knot values must be finite and nonnegative".into(),
        ));
    }
    let mass: f64 = out
        .windows(2)
        .map(|p| 0.5 * (p[1].1 + p[0].1) * (p[1].0 - p[0].0))
        .sum();
    if mass <= 0.0 {
        return Err(Error::InvalidDensity(
            "piecewise-linear density has zero mass".into(),
        ));
    }
    for knot in &mut out {
        knot.1 /= mass;
    }
    Ok(out)
}

/// Closed-form slope bounds where simple, dense sampling otherwise.
fn declared_slope_bound(family: &Family) -> f64 {
    match family {
        Family::Uniform => ESTIMATE_FLOOR,
        Family::TruncatedExponential { lambda, mass } => {
            // |f'| = lambda * f, maximal at x = 0 where f = 1 / mass.
            (lambda / mass).max(ESTIMATE_FLOOR)
        }
        Family::TruncatedNormal { mu, sigma, mass } => {
            // |f'| = f(x) |x - mu| / sigma^2, maximal at an endpoint or at
            // mu +/- sigma.
            let deriv = |x: f64| {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / mass * (x - mu).abs() / (sigma * sigma)
            };
            let mut cands = vec![0.0, 1.0];
            for c in [mu - sigma, mu + sigma] {
                if (0.0..=1.0).contains(&c) {
                    cands.push(c);
                }
            }
            cands.into_iter().map(deriv).fold(ESTIMATE_FLOOR, f64::max)
        }
        Family::PiecewiseLinear { knots } => knots
            .windows(2)
            .map(|p| ((p[1].1 - p[0].1) / (p[1].0 - p[0].0)).abs())
            .fold(ESTIMATE_FLOOR, f64::max),
        Family::Beta {
            alpha,
            beta,
            ln_norm,
        } => {
            // |f'(x)| = f(x) |(alpha-1)/x - (beta-1)/(1-x)|, sampled densely
            // with geometric refinement toward the endpoints. A 5% margin
            // covers grid undersampling.
            let deriv_abs = |x: f64| {
                let f = beta_pdf(*alpha, *beta, *ln_norm, x);
                (f * ((alpha - 1.0) / x - (beta - 1.0) / (1.0 - x))).abs()
            };
            let mut m: f64 = 0.0;
            let n = 4096;
            for i in 1..n {
                m = m.max(deriv_abs(i as f64 / n as f64));
            }
            let mut t = 1e-12;
            while t < 1e-3 {
                m = m.max(deriv_abs(t)).max(deriv_abs(1.0 - t));
                t *= 2.0;
            }
            (m * 1.05).max(ESTIMATE_FLOOR)
        }
    }
}

fn peak_value(family: &Family) -> Option<f64> {
    match family {
        Family::Uniform => Some(1.0),
        Family::TruncatedExponential { mass, .. } => Some(1.0 / mass),
        Family::TruncatedNormal { mu, sigma, mass } => {
            let x = mu.clamp(0.0, 1.0);
            let z = (x - mu) / sigma;
            Some((-0.5 * z * z).exp() / mass)
        }
        Family::PiecewiseLinear { knots } => knots
            .iter()
            .map(|&(_, f)| f)
            .fold(None, |acc: Option<f64>, f| {
                Some(acc.map_or(f, |a| a.max(f)))
            }),
        Family::Beta {
            alpha,
            beta,
            ln_norm,
        } => {
            if *alpha < 1.0 || *beta < 1.0 {
                return None;
            }
            let x = if *alpha > 1.0 || *beta > 1.0 {
                ((alpha - 1.0) / (alpha + beta - 2.0)).clamp(0.0, 1.0)
            } else {
                0.5
            };
            Some(beta_pdf(*alpha, *beta, *ln_norm, x))
        }
    }
}

/// Natural log of the Gamma function (Lanczos approximation, g = 7).
#[allow(clippy::excessive_precision)]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    const G: f64 = 7.0;
    use std::f64::consts::PI;
    if x < 0.5 {
        // Reflection formula; sin(pi x) > 0 on (0, 0.5).
        PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + G + 0.5;
        let mut acc = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}
