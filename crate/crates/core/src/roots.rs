//! Bracketed scalar root refinement shared by the polynomial solver and the
//! quadrature-based oracles: bisection safeguarded by Newton or false
//! position, with forced bisection whenever the bracket stalls.

/// Scan `[lo, hi]` on `n` equal subintervals for a strict sign change.
///
/// Returns `(a, b, f_a, f_b)` with `f_a * f_b < 0`, or the exact grid root
/// as a zero-width bracket. Grid points where `f` vanishes exactly are
/// treated as roots, so a zero at `lo` does not mask an interior crossing.
pub(crate) fn scan_for_bracket<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    n: usize,
) -> Option<(f64, f64, f64, f64)> {
    let f_lo = f(lo);
    let mut prev_x = lo;
    let mut prev_f = f_lo;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let fx = f(x);
        if fx == 0.0 {
            return Some((x, x, 0.0, 0.0));
        }
        if prev_f != 0.0 && (prev_f > 0.0) != (fx > 0.0) {
            return Some((prev_x, x, prev_f, fx));
        }
        prev_x = x;
        prev_f = fx;
    }
    // A zero exactly at the left endpoint with no interior crossing: the
    // endpoint is the root.
    if f_lo == 0.0 {
        return Some((lo, lo, 0.0, 0.0));
    }
    None
}

/// Shrink a sign-change bracket until its width is at most `xtol`.
///
/// `deriv` may return `None`, in which case a false-position step is used
/// instead of Newton. Candidates falling outside the open bracket, and any
/// iteration after one that failed to halve the bracket, fall back to the
/// midpoint, so the width halves at least every other step.
pub(crate) fn refine_bracket<F, D>(f: &F, deriv: D, bracket: (f64, f64, f64, f64), xtol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> Option<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = bracket;
    if a == b || fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!((fa > 0.0) != (fb > 0.0));
    let mut x = 0.5 * (a + b);
    let mut prev_width = b - a;
    let mut force_bisect = false;
    for _ in 0..256 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let width = b - a;
        if width <= xtol {
            return 0.5 * (a + b);
        }
        x = if force_bisect {
            0.5 * (a + b)
        } else {
            let cand = match deriv(x) {
                Some(d) if d != 0.0 && d.is_finite() => x - fx / d,
                _ => {
                    let denom = fb - fa;
                    if denom != 0.0 {
                        (a * fb - b * fa) / denom
                    } else {
                        0.5 * (a + b)
                    }
                }
            };
            if cand > a && cand < b {
                cand
            } else {
                0.5 * (a + b)
            }
        };
        force_bisect = width > 0.5 * prev_width;
        prev_width = width;
    }
    0.5 * (a + b)
}
