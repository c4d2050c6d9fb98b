//! Adaptive composite Simpson quadrature.
//!
//! Every integral in this crate (normalization masses, distortion costs,
//! centroid updates) goes through [`QuadratureGrid::integrate`]. Cells are
//! integrated one at a time by the callers, so integrand kinks at cell
//! boundaries never cross a panel.

/// Per-interval absolute tolerance used when the caller does not override it.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Cap on the number of panels; depth of the subdivision tree is `log2` of this.
pub const DEFAULT_MAX_SUBDIV: u32 = 1 << 20;

/// Parameters of the adaptive Simpson rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureGrid {
    pub abs_tol: f64,
    pub max_subdiv: u32,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            max_subdiv: DEFAULT_MAX_SUBDIV,
        }
    }
}

impl QuadratureGrid {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]` to the configured absolute tolerance.
    ///
    /// Subdivision stops once the Richardson error estimate of a panel is
    /// below its share of the tolerance or the depth budget is exhausted;
    /// either way the extrapolated value is used.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mid = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(mid), f(b));
        let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
        let max_depth = self.max_subdiv.max(1).ilog2();
        sign * adaptive(&f, a, b, fa, fm, fb, whole, self.abs_tol, max_depth)
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let (flm, frm) = (f(lm), f(rm));
    let h = b - a;
    let left = h * (fa + 4.0 * flm + fm) / 12.0;
    let right = h * (fm + 4.0 * frm + fb) / 12.0;
    let split = left + right;
    let err = split - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        // Richardson extrapolation: one order higher than plain Simpson.
        split + err / 15.0
    } else {
        adaptive(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics() {
        let grid = QuadratureGrid::default();
        // Simpson integrates cubics exactly; the adaptive wrapper must not
        // degrade that.
        let val = grid.integrate(|x| 3.0 * x * x + 2.0 * x - 1.0, 0.0, 1.0);
        assert!((val - 1.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_non_polynomial() {
        let grid = QuadratureGrid::default();
        let val = grid.integrate(|x| (4.0 * x).sin(), 0.0, 1.0);
        let exact = (1.0 - (4.0f64).cos()) / 4.0;
        assert!((val - exact).abs() < 1e-11);
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let f = |x: f64| (-3.0 * (x - 0.3) * (x - 0.3)).exp();
        let coarse = QuadratureGrid::with_tol(1e-10).integrate(f, 0.0, 1.0);
        let fine = QuadratureGrid::with_tol(5e-11).integrate(f, 0.0, 1.0);
        assert!((coarse - fine).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let grid = QuadratureGrid::default();
        let fwd = grid.integrate(|x| x * x, 0.2, 0.8);
        let bwd = grid.integrate(|x| x * x, 0.8, 0.2);
        assert!((fwd + bwd).abs() < 1e-15);
    }
}
