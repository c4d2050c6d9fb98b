//! Codebooks and the alternating even/odd (ABEO) fixed-point iteration.
//!
//! Levels are kept in a single ordered vector `q_0 <= q_1 <= ... <= q_{K'}`
//! with pinned references `q_0 = 0` and `q_{K'} = 1`. The unconstrained
//! scheme designs `K` levels strictly between the references (`K' = K + 1`);
//! the envelope scheme's top designed level coincides with the upper
//! reference (`K' = K`), so its free levels are `q_1 .. q_{K-1}`.
//!
//! A sweep updates all levels of one parity in parallel from the pre-sweep
//! snapshot: each update reads only its two (opposite-parity) neighbors, so
//! results are independent of update order within the half-sweep.

use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::cubic::{self, KCase, Scheme};
use crate::density::{Density, DEGENERACY_FLOOR};
use crate::error::{Error, Result};
use crate::oracle;
use crate::quad::QuadratureGrid;

/// Ordered quantization levels with fixed reference endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    scheme: Scheme,
    levels: Vec<f64>,
}

/// Serialized form of a codebook (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookExport {
    pub scheme: Scheme,
    pub k: usize,
    pub levels: Vec<f64>,
    pub boundaries: Vec<f64>,
}

impl Codebook {
    /// Validate and wrap a full level vector `q_0 .. q_{K'}`.
    pub fn new(scheme: Scheme, mut levels: Vec<f64>) -> Result<Codebook> {
        let min_len = match scheme {
            Scheme::Alm => 3,
            Scheme::Aeq => 2,
        };
        if levels.len() < min_len {
            return Err(Error::InvalidInit(format!(
                "{} needs at least {min_len} entries including references, got {}",
                scheme.as_str(),
                levels.len()
            )));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInit("levels must be finite".into()));
        }
        let last = levels.len() - 1;
        if levels[0].abs() <= 1e-12 {
            levels[0] = 0.0;
        }
        if (levels[last] - 1.0).abs() <= 1e-12 {
            levels[last] = 1.0;
        }
        if levels[0] != 0.0 || levels[last] != 1.0 {
            return Err(Error::InvalidInit(format!(
                "reference endpoints must be 0 and 1, got {} and {}",
                levels[0], levels[last]
            )));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInit("levels must be nondecreasing".into()));
        }
        Ok(Codebook { scheme, levels })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Full level vector including both references.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of designed levels `K`.
    pub fn num_levels(&self) -> usize {
        match self.scheme {
            Scheme::Alm => self.levels.len() - 2,
            Scheme::Aeq => self.levels.len() - 1,
        }
    }

    /// Designed levels `q_1 .. q_K` (for the envelope scheme the last one is
    /// the pinned upper reference).
    pub fn designed_levels(&self) -> &[f64] {
        match self.scheme {
            Scheme::Alm => &self.levels[1..self.levels.len() - 1],
            Scheme::Aeq => &self.levels[1..],
        }
    }

    /// Indices of levels an ABEO sweep may move.
    pub fn free_indices(&self) -> std::ops::RangeInclusive<usize> {
        match self.scheme {
            Scheme::Alm => 1..=self.num_levels(),
            Scheme::Aeq => 1..=self.num_levels().saturating_sub(1),
        }
    }

    pub fn num_free(&self) -> usize {
        self.levels.len().saturating_sub(2)
    }

    /// Decision boundaries delimiting the `K` cells.
    ///
    /// Unconstrained scheme: midpoints between adjacent designed levels,
    /// with the references closing the first and last cell. Envelope
    /// scheme: the level vector itself (cell `k` is `[q_{k-1}, q_k]`).
    pub fn boundaries(&self) -> Vec<f64> {
        match self.scheme {
            Scheme::Alm => {
                let q = &self.levels;
                let k = self.num_levels();
                let mut b = Vec::with_capacity(k + 1);
                b.push(q[0]);
                for j in 1..k {
                    b.push(0.5 * (q[j] + q[j + 1]));
                }
                b.push(q[q.len() - 1]);
                b
            }
            Scheme::Aeq => self.levels.clone(),
        }
    }

    /// Stable identifier tying encoded streams to the codebook that
    /// produced them.
    pub fn fingerprint(&self) -> String {
        let mut h = DefaultHasher::new();
        for v in &self.levels {
            v.to_bits().hash(&mut h);
        }
        format!(
            "{}-k{}-{:016x}",
            self.scheme.as_str(),
            self.num_levels(),
            h.finish()
        )
    }

    pub fn to_export(&self) -> CodebookExport {
        CodebookExport {
            scheme: self.scheme,
            k: self.num_levels(),
            levels: self.levels.clone(),
            boundaries: self.boundaries(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_export()).expect("codebook export serializes")
    }

    pub fn from_json(text: &str) -> Result<Codebook> {
        let export: CodebookExport = serde_json::from_str(text).map_err(|e| Error::ParseError {
            what: "codebook JSON".into(),
            detail: e.to_string(),
        })?;
        let cb = Codebook::new(export.scheme, export.levels)?;
        if cb.num_levels() != export.k {
            return Err(Error::ParseError {
                what: "codebook JSON".into(),
                detail: format!(
                    "declared k = {} does not match {} levels",
                    export.k,
                    cb.num_levels()
                ),
            });
        }
        Ok(cb)
    }
}

/// Initial level layout.
#[derive(Debug, Clone, PartialEq)]
pub enum InitScheme {
    Equispaced,
    Explicit(Vec<f64>),
}

/// Inputs of one design run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub k: usize,
    pub max_iter: usize,
    pub threshold: f64,
    pub init: InitScheme,
}

impl RunConfig {
    pub fn new(scheme: Scheme, k: usize) -> RunConfig {
        RunConfig {
            scheme,
            k,
            max_iter: 500,
            threshold: 1e-10,
            init: InitScheme::Equispaced,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }
}

/// Index parity selected by a half-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn matches(&self, index: usize) -> bool {
        match self {
            Parity::Odd => !index.is_multiple_of(2),
            Parity::Even => index.is_multiple_of(2),
        }
    }
}

/// Stopping rule for the fixed-point loop.
#[derive(Debug, Clone, Copy)]
pub enum StopRule {
    /// Stop when the sup-norm level movement of a full iteration drops
    /// below the threshold.
    LevelChange(f64),
    /// Stop when the exact cost of the current codebook drops to the
    /// target; used by the timing protocol.
    CostBelow(f64),
}

/// State recorded after each full (odd + even) iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub levels: Vec<f64>,
    /// Convex weights `theta_k`, indexed by level (entry `k - 1`); odd
    /// entries come from the odd half-sweep, even entries from the even one.
    pub thetas: Vec<f64>,
    pub cost: f64,
    pub linf_change: f64,
}

/// Full history of a design run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub initial_levels: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
}

impl RunTrace {
    pub fn iterations_used(&self) -> usize {
        self.iterations.len()
    }

    /// CSV export: `iter,level_0..level_{K'},theta_1..theta_m,cost,linf_change`
    /// with the initial state as row zero (empty theta/cost/change fields)
    /// and a `# converged=...` footer.
    pub fn to_csv(&self) -> String {
        let n = self.initial_levels.len();
        let m = self
            .iterations
            .first()
            .map_or(n.saturating_sub(2), |it| it.thetas.len());
        let mut out = String::new();
        out.push_str("iter");
        for i in 0..n {
            out.push_str(&format!(",level_{i}"));
        }
        for k in 1..=m {
            out.push_str(&format!(",theta_{k}"));
        }
        out.push_str(",cost,linf_change\n");
        out.push('0');
        for v in &self.initial_levels {
            out.push_str(&format!(",{v}"));
        }
        for _ in 0..m + 2 {
            out.push(',');
        }
        out.push('\n');
        for (i, rec) in self.iterations.iter().enumerate() {
            out.push_str(&format!("{}", i + 1));
            for v in &rec.levels {
                out.push_str(&format!(",{v}"));
            }
            for t in &rec.thetas {
                out.push_str(&format!(",{t}"));
            }
            out.push_str(&format!(",{},{}\n", rec.cost, rec.linf_change));
        }
        out.push_str(&format!("# converged={}\n", self.converged));
        out
    }

    pub fn from_csv(text: &str) -> Result<RunTrace> {
        let bad = |detail: String| Error::ParseError {
            what: "run trace CSV".into(),
            detail,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        let n = cols.iter().filter(|c| c.starts_with("level_")).count();
        let m = cols.iter().filter(|c| c.starts_with("theta_")).count();
        if n == 0 || cols.first() != Some(&"iter") {
            return Err(bad("unrecognized header".into()));
        }
        let expected = 1 + n + m + 2;
        let mut initial_levels = None;
        let mut iterations = Vec::new();
        let mut converged = false;
        for line in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(flag) = rest.trim().strip_prefix("converged=") {
                    converged = flag
                        .parse::<bool>()
                        .map_err(|e| bad(format!("footer: {e}")))?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected {
                return Err(bad(format!(
                    "row has {} fields, expected {expected}",
                    fields.len()
                )));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let levels = fields[1..1 + n]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<Vec<f64>>>()?;
            if fields[0] == "0" && fields[1 + n..].iter().all(|s| s.is_empty()) {
                initial_levels = Some(levels);
                continue;
            }
            let thetas = fields[1 + n..1 + n + m]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<Vec<f64>>>()?;
            let cost = parse(fields[1 + n + m])?;
            let linf_change = parse(fields[2 + n + m])?;
            iterations.push(IterationRecord {
                levels,
                thetas,
                cost,
                linf_change,
            });
        }
        Ok(RunTrace {
            initial_levels: initial_levels.ok_or_else(|| bad("missing init row".into()))?,
            iterations,
            converged,
        })
    }
}

/// Build the starting codebook for a run.
pub fn init_levels(cfg: &RunConfig) -> Result<Codebook> {
    if cfg.k == 0 {
        return Err(Error::InvalidInit("K must be at least 1".into()));
    }
    let count = match cfg.scheme {
        Scheme::Alm => cfg.k + 2,
        Scheme::Aeq => cfg.k + 1,
    };
    match &cfg.init {
        InitScheme::Equispaced => {
            let denom = (count - 1) as f64;
            let levels = (0..count).map(|i| i as f64 / denom).collect();
            Codebook::new(cfg.scheme, levels)
        }
        InitScheme::Explicit(levels) => {
            if levels.len() != count {
                return Err(Error::InvalidInit(format!(
                    "explicit init has {} entries, scheme {} with K = {} needs {count}",
                    levels.len(),
                    cfg.scheme.as_str(),
                    cfg.k
                )));
            }
            Codebook::new(cfg.scheme, levels.clone())
        }
    }
}

/// Move every level of one parity to the root of its update polynomial.
///
/// All updates read the pre-sweep snapshot, so same-parity updates commute;
/// references and opposite-parity levels are untouched. Returns the new
/// codebook and the `(index, theta)` pairs with
/// `q_new = theta * q_prev + (1 - theta) * q_next`.
pub fn abeo_half_sweep(
    cb: &Codebook,
    d: &Density,
    parity: Parity,
) -> Result<(Codebook, Vec<(usize, f64)>)> {
    let snapshot = cb.levels().to_vec();
    let mut levels = snapshot.clone();
    let k_total = cb.num_levels();
    let mut thetas = Vec::new();
    for k in cb.free_indices() {
        if !parity.matches(k) {
            continue;
        }
        let q_prev = snapshot[k - 1];
        let q_next = snapshot[k + 1];
        let (root, theta) = if q_next - q_prev < DEGENERACY_FLOOR {
            // Transiently coincident neighbors: fall back to the flat-density
            // limit rather than failing the sweep.
            (0.5 * (q_prev + q_next), 0.5)
        } else {
            let la = d.linear_approx(q_prev, q_next)?;
            let poly = match cb.scheme() {
                Scheme::Alm => {
                    let k_case = if k_total == 1 {
                        KCase::Sole
                    } else if k == 1 {
                        KCase::First
                    } else if k == k_total {
                        KCase::Last
                    } else {
                        KCase::Interior
                    };
                    cubic::alm_poly(k_case, q_prev, q_next, &la)?
                }
                Scheme::Aeq => cubic::aeq_poly(q_prev, q_next, &la)?,
            };
            let root = cubic::root_in_interval(&poly)?;
            (root, (q_next - root) / (q_next - q_prev))
        };
        levels[k] = root;
        thetas.push((k, theta));
    }
    debug_assert!(levels.windows(2).all(|w| w[1] >= w[0]));
    let new_cb = Codebook {
        scheme: cb.scheme(),
        levels,
    };
    Ok((new_cb, thetas))
}

/// Alternate odd and even half-sweeps until the stopping rule fires or the
/// iteration budget runs out (exhaustion is not an error; the converged
/// flag is simply false).
pub fn run_with_stop(cfg: &RunConfig, d: &Density, stop: StopRule) -> Result<(Codebook, RunTrace)> {
    if cfg.threshold.is_nan() || cfg.threshold < 0.0 {
        return Err(Error::InvalidInit(format!(
            "threshold must be nonnegative, got {}",
            cfg.threshold
        )));
    }
    let grid = QuadratureGrid::default();
    let mut cb = init_levels(cfg)?;
    let initial_levels = cb.levels().to_vec();
    let n_free = cb.num_free();
    let mut iterations = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let (after_odd, theta_odd) = abeo_half_sweep(&cb, d, Parity::Odd)?;
        let (after_even, theta_even) = abeo_half_sweep(&after_odd, d, Parity::Even)?;
        let mut thetas = vec![f64::NAN; n_free];
        for (k, t) in theta_odd.into_iter().chain(theta_even) {
            thetas[k - 1] = t;
        }
        debug_assert!(thetas.iter().all(|t| t.is_finite()));
        let linf_change = cb
            .levels()
            .iter()
            .zip(after_even.levels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let cost = oracle::cost(&after_even, d, &grid);
        iterations.push(IterationRecord {
            levels: after_even.levels().to_vec(),
            thetas,
            cost,
            linf_change,
        });
        cb = after_even;
        let hit = match stop {
            StopRule::LevelChange(t) => linf_change < t,
            StopRule::CostBelow(target) => cost <= target,
        };
        if hit {
            converged = true;
            break;
        }
    }
    Ok((
        cb,
        RunTrace {
            initial_levels,
            iterations,
            converged,
        },
    ))
}

/// Run with the configured level-movement threshold.
pub fn run(cfg: &RunConfig, d: &Density) -> Result<(Codebook, RunTrace)> {
    run_with_stop(cfg, d, StopRule::LevelChange(cfg.threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Values are shared across worker threads by the sweep contract.
    const _: fn() = || {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Codebook>();
    };

    #[test]
    fn equispaced_init_aeq() {
        let cfg = RunConfig::new(Scheme::Aeq, 4);
        let cb = init_levels(&cfg).unwrap();
        assert_eq!(cb.levels(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cb.num_levels(), 4);
    }

    #[test]
    fn equispaced_init_alm_has_extra_reference() {
        let cfg = RunConfig::new(Scheme::Alm, 3);
        let cb = init_levels(&cfg).unwrap();
        assert_eq!(cb.levels(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cb.num_levels(), 3);
    }

    #[test]
    fn single_level_envelope_is_references_only() {
        let cfg = RunConfig::new(Scheme::Aeq, 1);
        let cb = init_levels(&cfg).unwrap();
        assert_eq!(cb.levels(), &[0.0, 1.0]);
        assert_eq!(cb.num_free(), 0);
    }

    #[test]
    fn invalid_inits_rejected() {
        let cfg = RunConfig::new(Scheme::Aeq, 0);
        assert!(init_levels(&cfg).is_err());

        let cfg = RunConfig::new(Scheme::Aeq, 2)
            .with_init(InitScheme::Explicit(vec![0.0, 0.7, 0.3, 1.0]));
        assert!(matches!(init_levels(&cfg), Err(Error::InvalidInit(_))));

        let cfg =
            RunConfig::new(Scheme::Aeq, 2).with_init(InitScheme::Explicit(vec![0.1, 0.5, 1.0]));
        assert!(init_levels(&cfg).is_err());

        let cfg = RunConfig::new(Scheme::Aeq, 2).with_init(InitScheme::Explicit(vec![0.0, 1.0]));
        assert!(init_levels(&cfg).is_err(), "wrong length");
    }

    #[test]
    fn uniform_odd_sweep_moves_interior_to_midpoints() {
        let d = Density::uniform();
        let cb = Codebook::new(Scheme::Aeq, vec![0.0, 0.1, 0.45, 0.8, 1.0]).unwrap();
        let (next, thetas) = abeo_half_sweep(&cb, &d, Parity::Odd).unwrap();
        // q_1 -> midpoint(0, 0.45), q_3 -> midpoint(0.45, 1)
        assert!((next.levels()[1] - 0.225).abs() < 1e-12);
        assert!((next.levels()[3] - 0.725).abs() < 1e-12);
        assert_eq!(next.levels()[2], 0.45);
        for (_, t) in thetas {
            assert!((t - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn half_sweep_preserves_references() {
        let d = Density::beta(2.0, 4.0).unwrap();
        let cb = Codebook::new(Scheme::Alm, vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
        for parity in [Parity::Odd, Parity::Even] {
            let (next, _) = abeo_half_sweep(&cb, &d, parity).unwrap();
            assert_eq!(next.levels()[0], 0.0);
            assert_eq!(next.levels()[5], 1.0);
        }
    }

    #[test]
    fn uniform_alm_k3_fixed_point() {
        let d = Density::uniform();
        let cfg = RunConfig::new(Scheme::Alm, 3);
        let (cb, trace) = run(&cfg, &d).unwrap();
        assert!(trace.converged);
        let expect = [0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0];
        for (a, b) in cb.levels().iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{:?}", cb.levels());
        }
    }

    #[test]
    fn uniform_aeq_equispaced_is_fixed_point() {
        let d = Density::uniform();
        let cfg = RunConfig::new(Scheme::Aeq, 4);
        let (cb, trace) = run(&cfg, &d).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations_used(), 1);
        for (i, v) in cb.levels().iter().enumerate() {
            assert!((v - i as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_2_4_envelope_levels_cluster_near_peak() {
        let d = Density::beta(2.0, 4.0).unwrap();
        let cfg = RunConfig::new(Scheme::Aeq, 8).with_max_iter(2000);
        let (cb, trace) = run(&cfg, &d).unwrap();
        assert!(trace.converged);
        assert_eq!(cb.levels()[0], 0.0);
        assert_eq!(*cb.levels().last().unwrap(), 1.0);
        let count_in = |lo: f64, hi: f64| {
            cb.designed_levels()
                .iter()
                .filter(|q| (lo..=hi).contains(*q))
                .count() as f64
        };
        // Levels per unit length around the peak vs the upper tail.
        let peak_density = count_in(0.15, 0.40) / 0.25;
        let tail_density = count_in(0.60, 1.0) / 0.40;
        assert!(
            peak_density > tail_density,
            "levels {:?} not denser near the density peak",
            cb.designed_levels()
        );
    }

    #[test]
    fn boundaries_match_cell_rules() {
        let alm = Codebook::new(Scheme::Alm, vec![0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0]).unwrap();
        let b = alm.boundaries();
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (x, y) in b.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }

        let aeq = Codebook::new(Scheme::Aeq, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(aeq.boundaries(), vec![0.0, 0.5, 1.0]);

        let single = Codebook::new(Scheme::Alm, vec![0.0, 0.4, 1.0]).unwrap();
        assert_eq!(single.boundaries(), vec![0.0, 1.0]);
    }

    #[test]
    fn max_iter_exhaustion_is_not_an_error() {
        let d = Density::beta(2.0, 4.0).unwrap();
        let cfg = RunConfig::new(Scheme::Aeq, 8).with_max_iter(2);
        let (_, trace) = run(&cfg, &d).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.iterations_used(), 2);
    }

    #[test]
    fn trace_csv_round_trip() {
        let d = Density::beta(2.0, 2.0).unwrap();
        let cfg = RunConfig::new(Scheme::Alm, 3).with_max_iter(40);
        let (_, trace) = run(&cfg, &d).unwrap();
        let csv = trace.to_csv();
        let back = RunTrace::from_csv(&csv).unwrap();
        assert_eq!(back.initial_levels, trace.initial_levels);
        assert_eq!(back.converged, trace.converged);
        assert_eq!(back.iterations_used(), trace.iterations_used());
        for (a, b) in back.iterations.iter().zip(&trace.iterations) {
            assert_eq!(a.levels, b.levels);
            assert_eq!(a.thetas, b.thetas);
            assert_eq!(a.cost, b.cost);
            assert_eq!(a.linf_change, b.linf_change);
        }
    }

    #[test]
    fn codebook_json_round_trip() {
        let cb = Codebook::new(Scheme::Aeq, vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let back = Codebook::from_json(&cb.to_json()).unwrap();
        assert_eq!(back.levels(), cb.levels());
        assert_eq!(back.scheme(), cb.scheme());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn half_sweeps_preserve_ordering(
            raw in proptest::collection::vec(0.0..1.0f64, 3..10),
            beta_a in 1.5..5.0f64,
            beta_b in 1.5..5.0f64,
            odd_first in proptest::bool::ANY,
        ) {
            let mut levels = raw;
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut full = vec![0.0];
            full.extend(levels);
            full.push(1.0);
            let d = Density::beta(beta_a, beta_b).unwrap();
            for scheme in [Scheme::Alm, Scheme::Aeq] {
                let cb = Codebook::new(scheme, full.clone()).unwrap();
                let order = if odd_first {
                    [Parity::Odd, Parity::Even]
                } else {
                    [Parity::Even, Parity::Odd]
                };
                let mut cur = cb;
                for parity in order {
                    let (next, thetas) = abeo_half_sweep(&cur, &d, parity).unwrap();
                    prop_assert!(next.levels().windows(2).all(|w| w[1] >= w[0]));
                    for (_, t) in &thetas {
                        prop_assert!(*t >= 0.0 && *t <= 1.0);
                    }
                    cur = next;
                }
            }
        }
    }
}
