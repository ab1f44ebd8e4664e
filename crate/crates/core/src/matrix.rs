//! Similarity-matrix ingestion, the double-centering transform, and exact
//! moment formulas for the matching statistic U = Σ_i e_{i,π(i)} under a
//! uniform fixed-point-free involution π.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, Accumulator};

/// Relative tolerance for the "variance is zero" clamp and for margin checks.
pub const MOMENT_REL_TOL: f64 = 1e-12;

/// How asymmetric raw input is reconciled during ingestion.
///
/// Only the pair sums e_ij + e_ji ever enter U, so averaging the raw matrix
/// with its transpose leaves the statistic unchanged for every matching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SymmetryPolicy {
    /// e_ij <- (raw_ij + raw_ji) / 2.
    #[default]
    Average,
    /// Reject any raw_ij != raw_ji.
    Strict,
}

/// Symmetric n x n similarity scores with zero diagonal, n even, n >= 4.
///
/// Carries the row sums e_{i+} and grand total e_{++} alongside the entries;
/// immutable after construction.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix {
    n: usize,
    e: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
    warnings: Vec<String>,
}

/// Double-centered scores d_ij: all row, column, and grand margins vanish.
#[derive(Clone, Debug)]
pub struct CenteredMatrix {
    n: usize,
    d: Vec<f64>,
    alpha: f64,
    sum_d2: f64,
    sum_d4: f64,
    margin_max_abs: f64,
    /// Largest |d| considered indistinguishable from zero, inherited from the
    /// scale of the source matrix.
    zero_floor: f64,
}

/// Mean and variance of U over the uniform distribution on Π_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Moments plus context, as emitted by the `moments` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct MomentsReport {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub warnings: Vec<String>,
}

impl MomentsReport {
    pub fn new(e: &SimilarityMatrix) -> crate::error::Result<Self> {
        let moments = e.exact_moments()?;
        let mut warnings = e.warnings().to_vec();
        if moments.variance == 0.0 {
            warnings.push(crate::engine::WARN_DEGENERATE.to_string());
        }
        Ok(Self {
            n: e.n(),
            mean: moments.mean,
            variance: moments.variance,
            warnings,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Anything that can be scored entrywise against a matching.
pub trait PairScores {
    fn n(&self) -> usize;
    fn score(&self, i: usize, j: usize) -> f64;
}

impl PairScores for SimilarityMatrix {
    fn n(&self) -> usize {
        self.n
    }
    #[inline]
    fn score(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.n + j]
    }
}

impl PairScores for CenteredMatrix {
    fn n(&self) -> usize {
        self.n
    }
    #[inline]
    fn score(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

fn validate_grid(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidDimension(format!(
                "row {} has {} entries, expected {} (matrix must be square)",
                i + 1,
                row.len(),
                n
            )));
        }
    }
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "matrix side must be even, got n = {n}"
        )));
    }
    if n < 4 {
        return Err(Error::TooSmall(n));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidValue(format!(
                    "non-finite entry {v} at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(n)
}

impl SimilarityMatrix {
    /// Ingest a raw square grid: validate, zero the diagonal, symmetrize per
    /// `policy`, and precompute margins.
    ///
    /// Diagonal terms never enter U; nonzero diagonal input is zeroed and
    /// recorded as a warning rather than rejected.
    pub fn ingest(raw: &[Vec<f64>], policy: SymmetryPolicy) -> Result<Self> {
        let n = validate_grid(raw)?;
        let mut warnings = Vec::new();

        if (0..n).any(|i| raw[i][i] != 0.0) {
            warnings.push("nonzero diagonal entries were zeroed".to_string());
        }

        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (raw[i][j], raw[j][i]);
                let v = match policy {
                    SymmetryPolicy::Average => 0.5 * (a + b),
                    SymmetryPolicy::Strict => {
                        if a != b {
                            return Err(Error::AsymmetricInput {
                                i: i + 1,
                                j: j + 1,
                                a,
                                b,
                            });
                        }
                        a
                    }
                };
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }

        let row_sums: Vec<f64> = (0..n)
            .map(|i| compensated_sum((0..n).map(|j| e[i * n + j])))
            .collect();
        let total = compensated_sum(e.iter().copied());

        Ok(Self {
            n,
            e,
            row_sums,
            total,
            warnings,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.n + j]
    }

    /// e_{i+}
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    /// e_{++}
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The double-centering transform: for i != j
    ///
    ///   d_ij = e_ij - e_{i+}/(n-2) - e_{+j}/(n-2) + e_{++}/((n-1)(n-2))
    ///
    /// and d_ii = 0. All margins of d vanish, which makes EU = 0 and
    /// Var(U) = 2(n-2)/((n-1)(n-3)) Σ d².
    pub fn center(&self) -> CenteredMatrix {
        let n = self.n;
        let nf = n as f64;
        let mut d = vec![0.0; n * n];
        let grand = self.total / ((nf - 1.0) * (nf - 2.0));
        for i in 0..n {
            let ri = self.row_sums[i] / (nf - 2.0);
            for j in 0..n {
                if i != j {
                    // column sums equal row sums by symmetry
                    let cj = self.row_sums[j] / (nf - 2.0);
                    d[i * n + j] = self.at(i, j) - ri - cj + grand;
                }
            }
        }
        let zero_floor = MOMENT_REL_TOL * self.max_abs();
        CenteredMatrix::from_parts(n, d, zero_floor)
    }

    /// EU and Var(U) for π uniform over Π_n:
    ///
    ///   EU = e_{++}/(n-1)
    ///   Var(U) = 2/((n-1)(n-3)) [ (n-2) Σ e² + e_{++}²/(n-1) - 2 Σ e_{i+}² ]
    ///
    /// Variance within ±1e-12 of zero relative to the formula's term scale is
    /// clamped to 0 (U is degenerate exactly when the centered scores vanish);
    /// more negative values indicate broken accumulation and error out.
    pub fn exact_moments(&self) -> Result<Moments> {
        let n = self.n as f64;
        let mean = self.total / (n - 1.0);

        let sum_e2 = compensated_sum(self.e.iter().map(|v| v * v));
        let sum_rows2 = compensated_sum(self.row_sums.iter().map(|v| v * v));
        let pref = 2.0 / ((n - 1.0) * (n - 3.0));
        let t1 = (n - 2.0) * sum_e2;
        let t2 = self.total * self.total / (n - 1.0);
        let t3 = -2.0 * sum_rows2;
        let variance = pref * compensated_sum([t1, t2, t3]);
        let scale = pref * (t1.abs() + t2.abs() + t3.abs());

        Ok(Moments {
            mean,
            variance: clamp_variance(variance, scale)?,
        })
    }
}

fn clamp_variance(variance: f64, scale: f64) -> Result<f64> {
    if variance.abs() <= MOMENT_REL_TOL * scale {
        Ok(0.0)
    } else if variance < 0.0 {
        Err(Error::InternalConsistency(format!(
            "variance {variance} more negative than -{MOMENT_REL_TOL} * {scale}"
        )))
    } else {
        Ok(variance)
    }
}

impl CenteredMatrix {
    fn from_parts(n: usize, d: Vec<f64>, extra_zero_floor: f64) -> Self {
        let mut max_abs = 0.0f64;
        let mut min_off = f64::INFINITY;
        let mut max_off = f64::NEG_INFINITY;
        let mut s2 = Accumulator::new();
        let mut s4 = Accumulator::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = d[i * n + j];
                max_abs = max_abs.max(v.abs());
                min_off = min_off.min(v);
                max_off = max_off.max(v);
                let v2 = v * v;
                s2.add(v2);
                s4.add(v2 * v2);
            }
        }

        let mut margin_max = 0.0f64;
        let mut total = Accumulator::new();
        for i in 0..n {
            let r = compensated_sum((0..n).map(|j| d[i * n + j]));
            let c = compensated_sum((0..n).map(|j| d[j * n + i]));
            margin_max = margin_max.max(r.abs()).max(c.abs());
            total.add(r);
        }
        margin_max = margin_max.max(total.value().abs());

        Self {
            n,
            d,
            alpha: max_off - min_off,
            sum_d2: s2.value(),
            sum_d4: s4.value(),
            margin_max_abs: margin_max,
            zero_floor: extra_zero_floor.max(0.0),
        }
    }

    /// Build from raw pre-centered values, validating symmetry, the zero
    /// diagonal, and the vanishing margins (to 1e-12 · n · max|d|).
    pub fn from_raw(rows: &[Vec<f64>]) -> Result<Self> {
        let n = validate_grid(rows)?;
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::InvalidValue(format!(
                    "centered matrix must have zero diagonal, got {} at ({}, {})",
                    rows[i][i],
                    i + 1,
                    i + 1
                )));
            }
            for j in 0..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > MOMENT_REL_TOL * a.abs().max(b.abs()) {
                    return Err(Error::InvalidValue(format!(
                        "centered matrix must be symmetric: {} vs {} at ({}, {})",
                        a,
                        b,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = rows[i][j];
            }
        }
        let out = Self::from_parts(n, d, 0.0);
        let tol = MOMENT_REL_TOL * n as f64 * out.max_abs();
        if out.margin_max_abs > tol {
            return Err(Error::InvalidValue(format!(
                "margins do not vanish: max |margin| = {} exceeds {}",
                out.margin_max_abs, tol
            )));
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// α = max_{i≠j, k≠l} |d_ij − d_kl|, i.e. the spread of the off-diagonal
    /// entries.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Σ_{i≠j} d_ij²
    pub fn sum_d2(&self) -> f64 {
        self.sum_d2
    }

    /// Σ_{i≠j} d_ij⁴
    pub fn sum_d4(&self) -> f64 {
        self.sum_d4
    }

    /// Largest absolute row/column/grand margin (all should vanish).
    pub fn margin_max_abs(&self) -> f64 {
        self.margin_max_abs
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.d[i * n + j].abs());
                }
            }
        }
        m
    }

    /// True when the centered scores are zero up to the source matrix's
    /// floating-point scale: U is then constant over Π_n.
    pub fn is_degenerate(&self) -> bool {
        self.max_abs() <= self.zero_floor
    }

    /// Var(U) in centered form: 2(n−2)/((n−1)(n−3)) Σ d².
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        if self.is_degenerate() {
            return 0.0;
        }
        2.0 * (n - 2.0) / ((n - 1.0) * (n - 3.0)) * self.sum_d2
    }
}

/// Mean and variance of V = Σ_i g_{i,π(i)} for an arbitrary (not necessarily
/// symmetric) zero-diagonal grid g, π uniform over Π_n.
///
/// With ḡ_{i+} = g_{i+}/(n−1) and f_ij = g_ij − ḡ_{i+} (i ≠ j, f_ii = 0):
///
///   EV     = Σ_i ḡ_{i+}
///   Var(V) = [ (n−2)(Σ f² + Σ f_ij f_ji) − Σ_k f_{+k}² ] / ((n−1)(n−3))
///
/// The row sums of f vanish by construction but the column sums need not;
/// the Σ_k f_{+k}² correction is what makes the formula exact for asymmetric
/// grids (it vanishes in the symmetric centered case, where the formula
/// reduces to 2(n−2)/((n−1)(n−3)) Σ d²). Checked against exhaustive
/// enumeration in the test suite.
pub fn grid_moments(g: &[Vec<f64>]) -> Result<Moments> {
    let n = validate_grid(g)?;
    for (i, row) in g.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(Error::InvalidValue(format!(
                "grid must have zero diagonal, got {} at ({}, {})",
                row[i],
                i + 1,
                i + 1
            )));
        }
    }
    let nf = n as f64;
    let row_means: Vec<f64> = g
        .iter()
        .map(|row| compensated_sum(row.iter().copied()) / (nf - 1.0))
        .collect();
    let mean = compensated_sum(row_means.iter().copied());

    let f = |i: usize, j: usize| -> f64 {
        if i == j {
            0.0
        } else {
            g[i][j] - row_means[i]
        }
    };

    let mut s_f2 = Accumulator::new();
    let mut s_fft = Accumulator::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = f(i, j);
                s_f2.add(v * v);
                s_fft.add(v * f(j, i));
            }
        }
    }
    let col2 = compensated_sum((0..n).map(|k| {
        let c = compensated_sum((0..n).map(|i| f(i, k)));
        c * c
    }));

    let denom = (nf - 1.0) * (nf - 3.0);
    let t1 = (nf - 2.0) * s_f2.value();
    let t2 = (nf - 2.0) * s_fft.value();
    let t3 = -col2;
    let variance = compensated_sum([t1, t2, t3]) / denom;
    let scale = (t1.abs() + t2.abs() + t3.abs()) / denom;

    Ok(Moments {
        mean,
        variance: clamp_variance(variance, scale)?,
    })
}
