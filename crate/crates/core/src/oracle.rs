//! Exact references: quadrature-evaluated distortion, the classical
//! Lloyd-Max iteration, and the exact envelope quantizer.
//!
//! These solve the same fixed-point problems as the chord-based schemes but
//! against the true density, so they serve as the ground truth the fast
//! updates are compared with. Cells are always integrated one at a time.

pub use crate::quad::QuadratureGrid;

use crate::cubic::Scheme;
use crate::density::{Density, DEGENERACY_FLOOR};
use crate::error::{Error, Result};
use crate::quantizer::{init_levels, Codebook, InitScheme, Parity, RunConfig, StopRule};
use crate::roots;

/// Mass below which a cell is considered degenerate.
const CELL_MASS_FLOOR: f64 = 1e-14;

/// Update schedule for the exact iterations.
///
/// `Abeo` mirrors the chord-based solver (odd levels, then even levels, each
/// half-sweep reading its starting snapshot), so wall-clock comparisons
/// isolate the cost of quadrature against the cost of the cubic solve.
/// `Classic` is the textbook full alternation: all boundaries, then all
/// centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Abeo,
    Classic,
}

/// Configuration of an exact design run.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_iter: usize,
    pub stop: StopRule,
    pub schedule: Schedule,
    pub grid: QuadratureGrid,
    pub init: InitScheme,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_iter: 500,
            stop: StopRule::LevelChange(1e-10),
            schedule: Schedule::Abeo,
            grid: QuadratureGrid::default(),
            init: InitScheme::Equispaced,
        }
    }
}

/// Outcome of an exact design run.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub codebook: Codebook,
    pub iterations: usize,
    pub converged: bool,
    pub final_cost: f64,
}

/// Mean-square distortion of a codebook under its scheme's cell rule.
pub fn cost(cb: &Codebook, d: &Density, grid: &QuadratureGrid) -> f64 {
    let levels = cb.levels();
    match cb.scheme() {
        Scheme::Alm => {
            let bounds = cb.boundaries();
            bounds
                .windows(2)
                .enumerate()
                .map(|(j, w)| {
                    let q = levels[j + 1];
                    grid.integrate(|x| (q - x) * (q - x) * d.pdf_raw(x), w[0], w[1])
                })
                .sum()
        }
        Scheme::Aeq => levels
            .windows(2)
            .map(|w| {
                let q = w[1];
                grid.integrate(|x| (q - x) * (q - x) * d.pdf_raw(x), w[0], w[1])
            })
            .sum(),
    }
}

fn cell_mass_and_centroid(
    d: &Density,
    grid: &QuadratureGrid,
    index: usize,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let mass = grid.integrate(|x| d.pdf_raw(x), lo, hi);
    if mass.abs() < CELL_MASS_FLOOR {
        return Err(Error::DegenerateCell { index, mass });
    }
    let first_moment = grid.integrate(|x| x * d.pdf_raw(x), lo, hi);
    Ok(first_moment / mass)
}

/// Classical Lloyd-Max: midpoint boundaries, conditional-mean levels,
/// iterated to the configured stopping rule.
pub fn exact_lloyd_max(d: &Density, k: usize, cfg: &OracleConfig) -> Result<OracleRun> {
    let run_cfg = RunConfig {
        scheme: Scheme::Alm,
        k,
        max_iter: cfg.max_iter,
        threshold: 0.0,
        init: cfg.init.clone(),
    };
    let mut levels = init_levels(&run_cfg)?.levels().to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let prev = levels.clone();
        match cfg.schedule {
            Schedule::Abeo => {
                for parity in [Parity::Odd, Parity::Even] {
                    let snap = levels.clone();
                    for idx in 1..=k {
                        if !parity.matches(idx) {
                            continue;
                        }
                        let lo = if idx == 1 {
                            snap[0]
                        } else {
                            0.5 * (snap[idx - 1] + snap[idx])
                        };
                        let hi = if idx == k {
                            snap[k + 1]
                        } else {
                            0.5 * (snap[idx] + snap[idx + 1])
                        };
                        levels[idx] = cell_mass_and_centroid(d, &cfg.grid, idx, lo, hi)?;
                    }
                }
            }
            Schedule::Classic => {
                let snap = levels.clone();
                for idx in 1..=k {
                    let lo = if idx == 1 {
                        snap[0]
                    } else {
                        0.5 * (snap[idx - 1] + snap[idx])
                    };
                    let hi = if idx == k {
                        snap[k + 1]
                    } else {
                        0.5 * (snap[idx] + snap[idx + 1])
                    };
                    levels[idx] = cell_mass_and_centroid(d, &cfg.grid, idx, lo, hi)?;
                }
            }
        }
        if finish_iteration(d, cfg, Scheme::Alm, &prev, &levels)? {
            converged = true;
            break;
        }
    }
    let codebook = Codebook::new(Scheme::Alm, levels)?;
    let final_cost = cost(&codebook, d, &cfg.grid);
    Ok(OracleRun {
        codebook,
        iterations,
        converged,
        final_cost,
    })
}

/// Exact envelope quantizer: each free level solves the true optimality
/// condition by quadrature plus bracketed root finding, inside the same
/// alternating sweep as the chord-based scheme.
pub fn exact_envelope(d: &Density, k: usize, cfg: &OracleConfig) -> Result<OracleRun> {
    let run_cfg = RunConfig {
        scheme: Scheme::Aeq,
        k,
        max_iter: cfg.max_iter,
        threshold: 0.0,
        init: cfg.init.clone(),
    };
    let mut levels = init_levels(&run_cfg)?.levels().to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let prev = levels.clone();
        match cfg.schedule {
            Schedule::Abeo => {
                for parity in [Parity::Odd, Parity::Even] {
                    let snap = levels.clone();
                    for idx in 1..k {
                        if !parity.matches(idx) {
                            continue;
                        }
                        levels[idx] =
                            envelope_level_update(d, &cfg.grid, idx, snap[idx - 1], snap[idx + 1])?;
                    }
                }
            }
            Schedule::Classic => {
                // Full alternation: every level solves against the
                // pre-iteration snapshot.
                let snap = levels.clone();
                for idx in 1..k {
                    levels[idx] =
                        envelope_level_update(d, &cfg.grid, idx, snap[idx - 1], snap[idx + 1])?;
                }
            }
        }
        if finish_iteration(d, cfg, Scheme::Aeq, &prev, &levels)? {
            converged = true;
            break;
        }
    }
    let codebook = Codebook::new(Scheme::Aeq, levels)?;
    let final_cost = cost(&codebook, d, &cfg.grid);
    Ok(OracleRun {
        codebook,
        iterations,
        converged,
        final_cost,
    })
}

/// Root of `2 int_{q_prev}^{u} (u - x) f dx - (q_next - u)^2 f(u)` in
/// `[q_prev, q_next]`.
fn envelope_level_update(
    d: &Density,
    grid: &QuadratureGrid,
    index: usize,
    q_prev: f64,
    q_next: f64,
) -> Result<f64> {
    if q_next - q_prev < DEGENERACY_FLOOR {
        return Ok(0.5 * (q_prev + q_next));
    }
    let g = |u: f64| {
        let pull = grid.integrate(|x| 2.0 * (u - x) * d.pdf_raw(x), q_prev, u);
        let gap = q_next - u;
        pull - gap * gap * d.pdf_raw(u)
    };
    let g_lo = g(q_prev);
    let g_hi = g(q_next);
    let bracket = if g_lo == 0.0 && g_hi == 0.0 {
        // No mass in the neighborhood: any point is stationary; keep the midpoint.
        return Ok(0.5 * (q_prev + q_next));
    } else if g_lo == 0.0 || g_hi == 0.0 || (g_lo > 0.0) == (g_hi > 0.0) {
        match roots::scan_for_bracket(&g, q_prev, q_next, 64) {
            Some(b) => b,
            None => {
                return Err(Error::DegenerateCell {
                    index,
                    mass: g_lo.abs().min(g_hi.abs()),
                })
            }
        }
    } else {
        (q_prev, q_next, g_lo, g_hi)
    };
    let root = roots::refine_bracket(&g, |_| None, bracket, 1e-13);
    Ok(root.clamp(q_prev, q_next))
}

fn finish_iteration(
    d: &Density,
    cfg: &OracleConfig,
    scheme: Scheme,
    prev: &[f64],
    levels: &[f64],
) -> Result<bool> {
    let linf = prev
        .iter()
        .zip(levels)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(match cfg.stop {
        StopRule::LevelChange(t) => linf < t,
        StopRule::CostBelow(target) => {
            let cb = Codebook::new(scheme, levels.to_vec())?;
            cost(&cb, d, &cfg.grid) <= target
        }
    })
}

/// Gap between a chord-based codebook and its exact counterpart, with the
/// loose per-level bound from the widest exact neighbor interval.
#[derive(Debug, Clone)]
pub struct NearOptimalityGap {
    /// Sup-norm gap over all levels.
    pub linf: f64,
    /// Per-free-level |approx - exact|.
    pub per_level: Vec<f64>,
    /// Exact-codebook neighbor-interval widths `q*_{k+1} - q*_{k-1}` for the
    /// same indices.
    pub interval_widths: Vec<f64>,
    /// `sqrt(eps_K)`: the widest exact neighbor interval.
    pub sqrt_eps_k: f64,
}

pub fn near_optimality_gap(approx: &Codebook, exact: &Codebook) -> Result<NearOptimalityGap> {
    if approx.scheme() != exact.scheme() || approx.levels().len() != exact.levels().len() {
        return Err(Error::CodebookMismatch);
    }
    let a = approx.levels();
    let e = exact.levels();
    let linf = a
        .iter()
        .zip(e)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    let mut per_level = Vec::new();
    let mut interval_widths = Vec::new();
    for k in approx.free_indices() {
        per_level.push((a[k] - e[k]).abs());
        interval_widths.push(e[k + 1] - e[k - 1]);
    }
    let sqrt_eps_k = interval_widths.iter().copied().fold(0.0f64, f64::max);
    Ok(NearOptimalityGap {
        linf,
        per_level,
        interval_widths,
        sqrt_eps_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_alm_cost_closed_form() {
        // Optimal 3-level quantizer on a flat source: MSE = 1/(12 K^2).
        let cb = Codebook::new(Scheme::Alm, vec![0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0]).unwrap();
        let d = Density::uniform();
        let c = cost(&cb, &d, &QuadratureGrid::default());
        assert!((c - 1.0 / 108.0).abs() < 1e-13, "cost = {c}");
    }

    #[test]
    fn uniform_aeq_cost_closed_form() {
        // Equispaced envelope cells: K * int_0^{1/K} u^2 du = 1/(3 K^2).
        let cb = Codebook::new(Scheme::Aeq, vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let d = Density::uniform();
        let c = cost(&cb, &d, &QuadratureGrid::default());
        assert!((c - 1.0 / 48.0).abs() < 1e-13, "cost = {c}");
    }

    #[test]
    fn single_level_cost_is_variance_at_mean() {
        let d = Density::beta(2.0, 2.0).unwrap();
        // Beta(2,2): mean 1/2, variance = a b / ((a+b)^2 (a+b+1)) = 1/20.
        let cb = Codebook::new(Scheme::Alm, vec![0.0, 0.5, 1.0]).unwrap();
        let c = cost(&cb, &d, &QuadratureGrid::default());
        assert!((c - 0.05).abs() < 1e-11, "cost = {c}");
    }

    #[test]
    fn uniform_lloyd_max_closed_forms() {
        let d = Density::uniform();
        let cfg = OracleConfig::default();
        let run = exact_lloyd_max(&d, 3, &cfg).unwrap();
        assert!(run.converged);
        let expect = [0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0];
        for (a, b) in run.codebook.levels().iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }

        let run2 = exact_lloyd_max(&d, 2, &cfg).unwrap();
        let expect2 = [0.0, 0.25, 0.75, 1.0];
        for (a, b) in run2.codebook.levels().iter().zip(expect2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn classic_schedule_reaches_same_fixed_point() {
        let d = Density::beta(2.0, 2.0).unwrap();
        let classic_cfg = OracleConfig {
            schedule: Schedule::Classic,
            max_iter: 3000,
            ..OracleConfig::default()
        };
        let abeo = exact_lloyd_max(&d, 4, &OracleConfig::default()).unwrap();
        let classic = exact_lloyd_max(&d, 4, &classic_cfg).unwrap();
        for (a, b) in abeo.codebook.levels().iter().zip(classic.codebook.levels()) {
            assert!((a - b).abs() < 1e-8);
        }

        let abeo = exact_envelope(&d, 4, &OracleConfig::default()).unwrap();
        let classic = exact_envelope(&d, 4, &classic_cfg).unwrap();
        assert!(classic.converged);
        for (a, b) in abeo.codebook.levels().iter().zip(classic.codebook.levels()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetric_density_gives_symmetric_lloyd_max() {
        let d = Density::beta(2.0, 2.0).unwrap();
        let run = exact_lloyd_max(&d, 4, &OracleConfig::default()).unwrap();
        let q = run.codebook.designed_levels();
        for i in 0..q.len() {
            let mirror = 1.0 - q[q.len() - 1 - i];
            assert!((q[i] - mirror).abs() < 1e-8, "{q:?}");
        }
    }

    #[test]
    fn uniform_envelope_is_equispaced() {
        let d = Density::uniform();
        let run = exact_envelope(&d, 5, &OracleConfig::default()).unwrap();
        assert!(run.converged);
        for (i, v) in run.codebook.levels().iter().enumerate() {
            assert!(
                (v - i as f64 / 5.0).abs() < 1e-9,
                "{:?}",
                run.codebook.levels()
            );
        }
    }

    #[test]
    fn beta_2_2_envelope_is_right_shifted() {
        // The envelope constraint pushes levels upward relative to the
        // unconstrained optimum for the same symmetric density.
        let d = Density::beta(2.0, 2.0).unwrap();
        let cfg = OracleConfig {
            max_iter: 3000,
            ..OracleConfig::default()
        };
        let env = exact_envelope(&d, 8, &cfg).unwrap();
        let q = env.codebook.designed_levels();
        // Not symmetric about 1/2: compare with the mirrored set.
        let mut asym = 0.0f64;
        for i in 0..q.len() {
            asym = asym.max((q[i] - (1.0 - q[q.len() - 1 - i])).abs());
        }
        assert!(asym > 1e-3, "envelope levels unexpectedly symmetric: {q:?}");
        // Mean of the designed levels sits right of the density mean.
        let mean_q: f64 = q.iter().sum::<f64>() / q.len() as f64;
        assert!(mean_q > 0.5, "mean level {mean_q}");
    }

    #[test]
    fn vanishing_cell_mass_is_reported() {
        // A rate-50 exponential leaves ~1e-19 of mass in the top equispaced
        // cell, well under the degeneracy threshold.
        let d = Density::truncated_exponential(50.0).unwrap();
        match exact_lloyd_max(&d, 8, &OracleConfig::default()) {
            Err(Error::DegenerateCell { index, .. }) => assert!(index > 4),
            other => panic!("expected DegenerateCell, got {other:?}"),
        }
    }

    #[test]
    fn envelope_allots_levels_near_the_density_peak() {
        let d = Density::beta(2.0, 4.0).unwrap();
        let cfg = OracleConfig {
            max_iter: 3000,
            ..OracleConfig::default()
        };
        let run = exact_envelope(&d, 8, &cfg).unwrap();
        let count_in = |lo: f64, hi: f64| {
            run.codebook
                .designed_levels()
                .iter()
                .filter(|q| (lo..=hi).contains(*q))
                .count() as f64
        };
        assert!(
            count_in(0.15, 0.40) / 0.25 > count_in(0.60, 1.0) / 0.40,
            "{:?}",
            run.codebook.designed_levels()
        );
    }

    #[test]
    fn near_optimality_gap_zero_for_identical() {
        let cb = Codebook::new(Scheme::Aeq, vec![0.0, 0.5, 1.0]).unwrap();
        let gap = near_optimality_gap(&cb, &cb).unwrap();
        assert_eq!(gap.linf, 0.0);
        assert!(gap.per_level.iter().all(|g| *g == 0.0));
        assert!(gap.sqrt_eps_k > 0.0);
    }

    #[test]
    fn near_optimality_gap_rejects_mismatch() {
        let a = Codebook::new(Scheme::Aeq, vec![0.0, 0.5, 1.0]).unwrap();
        let b = Codebook::new(Scheme::Alm, vec![0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(
            near_optimality_gap(&a, &b),
            Err(Error::CodebookMismatch)
        ));
    }

    #[test]
    fn quadrature_self_consistency_on_cost() {
        let d = Density::beta(2.0, 4.0).unwrap();
        let cb = Codebook::new(Scheme::Alm, vec![0.0, 0.2, 0.45, 0.7, 1.0]).unwrap();
        let coarse = cost(&cb, &d, &QuadratureGrid::with_tol(1e-10));
        let fine = cost(&cb, &d, &QuadratureGrid::with_tol(5e-11));
        assert!((coarse - fine).abs() < 1e-10);
    }
}
