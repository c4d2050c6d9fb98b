//! Sweep matrices and their fixed-point structure.
//!
//! Every half-sweep is an affine map with pinned endpoints, so a full
//! iteration is multiplication by a row-stochastic matrix whose first and
//! last rows are identity rows. This module rebuilds those matrices from
//! recorded convex weights, checks the spectral properties that drive
//! global convergence, and estimates the limit of the running product
//! (rank two, with its last column equal to the fixed-point codebook).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantizer::{Parity, RunTrace};

/// What a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    OddHalf,
    EvenHalf,
    FullSweep,
    ProductLimit,
}

/// A square update matrix of dimension `K' + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateMatrix {
    pub kind: MatrixKind,
    mat: DMatrix<f64>,
}

impl UpdateMatrix {
    pub fn from_matrix(kind: MatrixKind, mat: DMatrix<f64>) -> Result<UpdateMatrix> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                left: mat.nrows(),
                right: mat.ncols(),
            });
        }
        Ok(UpdateMatrix { kind, mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.mat[(row, col)]
    }

    /// Apply the update to a level vector.
    pub fn apply(&self, levels: &[f64]) -> Result<Vec<f64>> {
        if levels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: levels.len(),
                right: self.dim(),
            });
        }
        let v = DVector::from_column_slice(levels);
        Ok((&self.mat * v).iter().copied().collect())
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_deviation(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.mat.row(i).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.mat.column(j).iter().copied().collect()
    }

    /// Comma-separated rows, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{}", self.mat[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(kind: MatrixKind, text: &str) -> Result<UpdateMatrix> {
        let bad = |detail: String| Error::ParseError {
            what: "matrix CSV".into(),
            detail,
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let row = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("{s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(bad("matrix is not square".into()));
        }
        let mat = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        UpdateMatrix::from_matrix(kind, mat)
    }
}

/// Build one half-sweep matrix from the convex weights.
///
/// `thetas[k-1]` is the weight of level `k`; rows of the selected parity
/// carry `(theta_k, 0, 1 - theta_k)` on columns `(k-1, k, k+1)`, every
/// other row is an identity row. Only the weights the parity actually uses
/// are validated.
pub fn build_half_matrix(thetas: &[f64], parity: Parity, dim: usize) -> Result<UpdateMatrix> {
    if dim < 2 || thetas.len() != dim - 2 {
        return Err(Error::DimensionMismatch {
            left: thetas.len(),
            right: dim.saturating_sub(2),
        });
    }
    let mut mat = DMatrix::identity(dim, dim);
    for k in 1..dim - 1 {
        if !parity.matches(k) {
            continue;
        }
        let theta = thetas[k - 1];
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidTheta { index: k, theta });
        }
        mat[(k, k)] = 0.0;
        mat[(k, k - 1)] = theta;
        mat[(k, k + 1)] = 1.0 - theta;
    }
    let kind = match parity {
        Parity::Odd => MatrixKind::OddHalf,
        Parity::Even => MatrixKind::EvenHalf,
    };
    Ok(UpdateMatrix { kind, mat })
}

/// Product of two updates, in application order: `applied_second * applied_first`.
pub fn compose(
    applied_first: &UpdateMatrix,
    applied_second: &UpdateMatrix,
) -> Result<UpdateMatrix> {
    if applied_first.dim() != applied_second.dim() {
        return Err(Error::DimensionMismatch {
            left: applied_first.dim(),
            right: applied_second.dim(),
        });
    }
    Ok(UpdateMatrix {
        kind: MatrixKind::FullSweep,
        mat: &applied_second.mat * &applied_first.mat,
    })
}

/// Full-iteration matrix for the sweep order used by the solver: odd
/// half-sweep applied first, then the even one.
pub fn full_sweep_matrix(odd: &UpdateMatrix, even: &UpdateMatrix) -> Result<UpdateMatrix> {
    compose(odd, even)
}

/// Rebuild the per-iteration full-sweep matrices of a recorded run.
pub fn sweep_matrices_from_trace(trace: &RunTrace) -> Result<Vec<UpdateMatrix>> {
    let dim = trace.initial_levels.len();
    trace
        .iterations
        .iter()
        .map(|rec| {
            let odd = build_half_matrix(&rec.thetas, Parity::Odd, dim)?;
            let even = build_half_matrix(&rec.thetas, Parity::Even, dim)?;
            full_sweep_matrix(&odd, &even)
        })
        .collect()
}

/// One verified property.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property_id: u8,
    pub pass: bool,
    pub detail: String,
}

/// Report of the six fixed-point-structure properties plus the spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
    /// Eigenvalue moduli, sorted descending.
    pub eigenvalue_moduli: Vec<f64>,
    /// Largest modulus strictly below the unit eigenvalue cluster; this is
    /// the contraction rate of the iteration.
    pub second_eigenvalue_modulus: f64,
    /// Complex-pair eigenvectors are skipped by the symmetry check.
    pub excluded_complex_pairs: usize,
}

impl PropertyReport {
    pub fn pass(&self, property_id: u8) -> bool {
        self.checks
            .iter()
            .find(|c| c.property_id == property_id)
            .is_some_and(|c| c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<PropertyReport> {
        serde_json::from_str(text).map_err(|e| Error::ParseError {
            what: "property report JSON".into(),
            detail: e.to_string(),
        })
    }
}

fn reversed(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(n, |i, _| v[n - 1 - i])
}

/// Distance to the nearest of `+reverse(v)` / `-reverse(v)` after
/// normalizing the sign by the largest-magnitude entry.
fn sym_antisym_distance(v: &DVector<f64>) -> f64 {
    let mut imax = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[imax].abs() {
            imax = i;
        }
    }
    if v[imax] == 0.0 {
        return 0.0;
    }
    let vn = v / v[imax];
    let r = reversed(&vn);
    let d_sym = (&vn - &r).amax();
    let d_anti = (&vn + &r).amax();
    d_sym.min(d_anti)
}

/// Nullspace basis of `m` via Gauss-Jordan elimination with partial
/// pivoting; entries below `tol` (scaled by the largest entry) are treated
/// as zero.
fn nullspace(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.amax().max(1.0);
    let tol_abs = tol * scale;
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut imax = r;
        let mut vmax = 0.0;
        for i in r..rows {
            if a[(i, c)].abs() > vmax {
                vmax = a[(i, c)].abs();
                imax = i;
            }
        }
        if vmax <= tol_abs {
            continue;
        }
        a.swap_rows(r, imax);
        let piv = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|fc| {
            let mut v = DVector::zeros(cols);
            v[fc] = 1.0;
            for (pr, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -a[(pr, fc)];
            }
            v
        })
        .collect()
}

fn eigen_residual(m: &DMatrix<f64>, lambda: f64, v: &DVector<f64>) -> f64 {
    let scale = v.amax().max(1e-300);
    ((m * v) - v * lambda).amax() / scale
}

/// Check the six structural properties of a full-sweep matrix.
///
/// All six hold for the flat-source matrix; generic matrices are expected
/// to satisfy 1-3 and 5, while 4 is reported without being guaranteed.
pub fn verify_uniform_properties(p: &UpdateMatrix) -> PropertyReport {
    let dim = p.dim();
    let m = &p.mat;
    let mut checks = Vec::new();

    // 1: row-stochastic with entries in [0, 1].
    let row_dev = p.row_sum_deviation();
    let entry_ok = m.iter().all(|&e| (-1e-12..=1.0 + 1e-12).contains(&e));
    checks.push(PropertyCheck {
        property_id: 1,
        pass: row_dev <= 1e-12 && entry_ok,
        detail: format!("max row-sum deviation {row_dev:.3e}, entries in range: {entry_ok}"),
    });

    // Eigenvalues.
    let eig = m.clone().complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|c| c.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let complex_pairs = eig.iter().filter(|c| c.im.abs() > 1e-8).count() / 2;

    // 2: spectrum inside the closed unit disk.
    let max_mod = moduli.first().copied().unwrap_or(0.0);
    checks.push(PropertyCheck {
        property_id: 2,
        pass: max_mod <= 1.0 + 1e-10,
        detail: format!("largest eigenvalue modulus {max_mod:.12}"),
    });

    // 3: unit eigenvalue with the all-ones eigenvector.
    let has_unit = eig
        .iter()
        .any(|c| (c - nalgebra::Complex::new(1.0, 0.0)).norm() <= 1e-8);
    let ones = DVector::from_element(dim, 1.0);
    let ones_residual = eigen_residual(m, 1.0, &ones);
    checks.push(PropertyCheck {
        property_id: 3,
        pass: has_unit && ones_residual <= 1e-10,
        detail: format!("unit eigenvalue present: {has_unit}, |P*1 - 1| = {ones_residual:.3e}"),
    });

    // 4: every real eigenvector decomposes into symmetric/antisymmetric
    // eigenvectors under index reversal.
    let mut real_vals: Vec<f64> = eig
        .iter()
        .filter(|c| c.im.abs() <= 1e-8)
        .map(|c| c.re)
        .collect();
    real_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters: Vec<f64> = Vec::new();
    for v in real_vals {
        match clusters.last() {
            Some(&last) if (v - last).abs() <= 1e-6 => {}
            _ => clusters.push(v),
        }
    }
    let mut sym_pass = true;
    let mut worst = 0.0f64;
    for &lambda in &clusters {
        let basis = nullspace(&(m - DMatrix::identity(dim, dim) * lambda), 1e-8);
        if basis.is_empty() {
            sym_pass = false;
            continue;
        }
        for b in &basis {
            let rev = reversed(b);
            let floor = 1e-9 * b.amax();
            let mut explained = false;
            for part in [(b + &rev) * 0.5, (b - &rev) * 0.5] {
                if part.amax() <= floor {
                    continue;
                }
                let res = eigen_residual(m, lambda, &part);
                let dist = sym_antisym_distance(&part);
                worst = worst.max(res).max(dist);
                if res <= 1e-8 && dist <= 1e-8 {
                    explained = true;
                } else {
                    sym_pass = false;
                }
            }
            if !explained {
                sym_pass = false;
            }
        }
    }
    checks.push(PropertyCheck {
        property_id: 4,
        pass: sym_pass,
        detail: format!(
            "worst symmetry/residual deviation {worst:.3e}; {complex_pairs} complex pair(s) excluded"
        ),
    });

    // 5: geometric multiplicity of the unit eigenvalue is two.
    let rank_p_minus_i = (m - DMatrix::identity(dim, dim)).rank(1e-10);
    checks.push(PropertyCheck {
        property_id: 5,
        pass: rank_p_minus_i == dim - 2,
        detail: format!("rank(P - I) = {rank_p_minus_i}, dim = {dim}"),
    });

    // 6: the ones-complement of a unit eigenvector is again one.
    let unit_basis = nullspace(&(m - DMatrix::identity(dim, dim)), 1e-8);
    let six = if unit_basis.is_empty() {
        PropertyCheck {
            property_id: 6,
            pass: false,
            detail: "no unit-eigenvalue eigenvector found".into(),
        }
    } else {
        // Pick the basis vector least aligned with the all-ones direction.
        let pick = unit_basis
            .iter()
            .min_by(|a, b| {
                let ca = (a.dot(&ones) / (a.norm() * ones.norm())).abs();
                let cb = (b.dot(&ones) / (b.norm() * ones.norm())).abs();
                ca.partial_cmp(&cb).unwrap()
            })
            .unwrap();
        let complement = &ones - pick;
        let res = eigen_residual(m, 1.0, &complement);
        PropertyCheck {
            property_id: 6,
            pass: res <= 1e-10,
            detail: format!("|P(1 - v1) - (1 - v1)| = {res:.3e}"),
        }
    };
    checks.push(six);

    // Contraction rate: largest modulus below the unit cluster.
    let unit_count = moduli.iter().filter(|&&x| (x - 1.0).abs() <= 1e-8).count();
    let second = moduli.get(unit_count).copied().unwrap_or(0.0);

    PropertyReport {
        checks,
        eigenvalue_moduli: moduli,
        second_eigenvalue_modulus: second,
        excluded_complex_pairs: complex_pairs,
    }
}

/// Limit estimate of the running product of sweep matrices.
#[derive(Debug, Clone)]
pub struct ProductLimitReport {
    pub limit: UpdateMatrix,
    pub factors_used: usize,
    /// Largest interior-column entry magnitude at termination.
    pub interior_max: f64,
    pub converged: bool,
    pub numerical_rank: usize,
    /// Deviation of (first column + last column) from the all-ones vector.
    pub ones_residual: f64,
    /// Interior maximum after each factor, for contraction diagnostics.
    pub interior_history: Vec<f64>,
}

fn interior_max(m: &DMatrix<f64>) -> f64 {
    let dim = m.nrows();
    let mut worst = 0.0f64;
    for j in 1..dim - 1 {
        for i in 0..dim {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// Multiply factors in application order until the interior columns vanish
/// or the cap is reached; past the end of the list the final factor
/// repeats. Hitting the cap is diagnostic, not an error.
pub fn product_limit(factors: &[UpdateMatrix], cap: usize, tol: f64) -> Result<ProductLimitReport> {
    let first = factors
        .first()
        .ok_or_else(|| Error::EmptyInput("product_limit needs at least one factor".into()))?;
    let dim = first.dim();
    for f in factors {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: f.dim(),
                right: dim,
            });
        }
    }
    let mut prod = first.mat.clone();
    let mut used = 1;
    let mut history = vec![interior_max(&prod)];
    while *history.last().unwrap() >= tol && used < cap {
        let next = if used < factors.len() {
            &factors[used].mat
        } else {
            &factors.last().unwrap().mat
        };
        prod = next * &prod;
        used += 1;
        history.push(interior_max(&prod));
    }
    let interior = *history.last().unwrap();
    let converged = interior < tol;
    let rank = prod.clone().rank(1e-10);
    let ones_residual = (0..dim)
        .map(|i| (prod[(i, 0)] + prod[(i, dim - 1)] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ProductLimitReport {
        limit: UpdateMatrix {
            kind: MatrixKind::ProductLimit,
            mat: prod,
        },
        factors_used: used,
        interior_max: interior,
        converged,
        numerical_rank: rank,
        ones_residual,
        interior_history: history,
    })
}
