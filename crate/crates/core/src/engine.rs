//! The permutation test itself: the statistic U, exact / Monte-Carlo /
//! normal-approximation p-values, and the explicit normal-approximation
//! error bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{
    enumerate_matchings, sample_into, stream_rng, Matching, SamplerConfig, RNG_NAME,
};
use crate::matrix::{CenteredMatrix, Moments, PairScores, SimilarityMatrix};
use crate::normal::{phi, phi_sf};
use crate::sum::Accumulator;

/// Relative tolerance for tie detection when comparing U values.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Bound constants: delta <= C1 sqrt(n) sqrt(Σd⁴)/Σd² + C2 α³ n^{5/2}/(Σd²)^{3/2}.
pub const C1: f64 = 86.0;
pub const C2: f64 = 243.0;

/// Replicates per RNG stream; fixed so Monte Carlo results are identical
/// for every parallelism degree.
const MC_CHUNK: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
    Normal,
    Auto,
}

/// a >= b up to the relative tie tolerance (ties count as exceedances).
#[inline]
fn ge_tol(a: f64, b: f64) -> bool {
    a >= b || (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

#[inline]
fn le_tol(a: f64, b: f64) -> bool {
    a <= b || (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

/// Does a null draw `u` count against `u0` under the given alternative?
/// Two-sided compares distances from the null mean.
#[inline]
fn exceeds(u: f64, u0: f64, mean: f64, alternative: Alternative) -> bool {
    match alternative {
        Alternative::Greater => ge_tol(u, u0),
        Alternative::Less => le_tol(u, u0),
        Alternative::TwoSided => ge_tol((u - mean).abs(), (u0 - mean).abs()),
    }
}

/// U = Σ_i m[i, π(i)]. Each unordered pair contributes both of its
/// symmetric entries.
pub fn statistic<M: PairScores>(m: &M, pi: &Matching) -> Result<f64> {
    if m.n() != pi.n() {
        return Err(Error::InvalidDimension(format!(
            "matrix side {} does not match matching length {}",
            m.n(),
            pi.n()
        )));
    }
    let mut acc = Accumulator::new();
    for i in 0..m.n() {
        acc.add(m.score(i, pi.partner(i)));
    }
    Ok(acc.value())
}

#[inline]
fn statistic_raw(e: &SimilarityMatrix, pair_of: &[usize]) -> f64 {
    let mut acc = Accumulator::new();
    for (i, &j) in pair_of.iter().enumerate() {
        acc.add(e.at(i, j));
    }
    acc.value()
}

/// Exact p-value by exhaustive enumeration of Π_n.
pub fn exact_pvalue(
    e: &SimilarityMatrix,
    pi0: &Matching,
    cutoff: usize,
    alternative: Alternative,
) -> Result<f64> {
    let u0 = statistic(e, pi0)?;
    let mean = e.total() / (e.n() as f64 - 1.0);
    let mut hits: u64 = 0;
    let mut count: u64 = 0;
    for pi in enumerate_matchings(e.n(), cutoff)? {
        let u = statistic_raw(e, pi.as_slice());
        if exceeds(u, u0, mean, alternative) {
            hits += 1;
        }
        count += 1;
    }
    Ok(hits as f64 / count as f64)
}

/// Monte Carlo p-value and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McPvalue {
    pub p: f64,
    pub std_error: f64,
}

/// Add-one Monte Carlo p-value: (1 + #exceedances)/(replicates + 1).
///
/// Replicates are drawn in fixed chunks of independent RNG streams
/// (stream id = replicate index / 8192), so the result is identical for
/// every parallelism degree and bit-reproducible given the seed.
pub fn mc_pvalue(
    e: &SimilarityMatrix,
    pi0: &Matching,
    cfg: &SamplerConfig,
    alternative: Alternative,
) -> Result<McPvalue> {
    let u0 = statistic(e, pi0)?;
    let n = e.n();
    let mean = e.total() / (n as f64 - 1.0);
    let replicates = cfg.replicates;
    let chunks = replicates.div_ceil(MC_CHUNK);

    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * MC_CHUNK;
            let hi = ((chunk + 1) * MC_CHUNK).min(replicates);
            let mut rng = stream_rng(cfg.seed, chunk as u64);
            let mut pair_of = vec![0usize; n];
            let mut free = Vec::with_capacity(n);
            let mut local: u64 = 0;
            for _ in lo..hi {
                free.clear();
                free.extend(0..n);
                sample_into(&mut pair_of, &mut free, &mut rng);
                let u = statistic_raw(e, &pair_of);
                if exceeds(u, u0, mean, alternative) {
                    local += 1;
                }
            }
            local
        })
        .sum();

    let p = (1.0 + hits as f64) / (replicates as f64 + 1.0);
    Ok(McPvalue {
        p,
        std_error: (p * (1.0 - p) / replicates as f64).sqrt(),
    })
}

/// p-value from a standardized statistic under the normal approximation.
pub fn pvalue_from_w(w: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::Greater => phi_sf(w),
        Alternative::Less => phi(w),
        Alternative::TwoSided => 2.0 * phi_sf(w.abs()),
    }
}

/// Normal-approximation p-value for the standardized statistic
/// W = (U − EU)/√Var(U).
pub fn normal_pvalue(
    e: &SimilarityMatrix,
    pi0: &Matching,
    alternative: Alternative,
) -> Result<f64> {
    let (_, _, w) = standardized(e, pi0)?;
    Ok(pvalue_from_w(w, alternative))
}

/// (U, moments, W); errors when the permutation distribution is degenerate.
pub fn standardized(e: &SimilarityMatrix, pi0: &Matching) -> Result<(f64, Moments, f64)> {
    let u = statistic(e, pi0)?;
    let moments = e.exact_moments()?;
    if moments.variance <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let w = (u - moments.mean) / moments.variance.sqrt();
    Ok((u, moments, w))
}

/// The two terms of the normal-approximation error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub term1: f64,
    pub term2: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub sum_d2: f64,
    pub sum_d4: f64,
}

impl BoundBreakdown {
    /// The bound itself: term1 + term2.
    pub fn delta(&self) -> f64 {
        self.term1 + self.term2
    }
}

/// Explicit bound on δ = sup_w |P(W ≤ w) − Φ(w)|:
///
///   δ ≤ 86 √n √(Σd⁴) / Σd²  +  243 α³ n^{5/2} / (Σd²)^{3/2}
///
/// The constants were derived under n ≥ 10; callers should surface a warning
/// below that. Both terms are invariant under d → c·d.
pub fn berry_esseen_bound(d: &CenteredMatrix) -> Result<BoundBreakdown> {
    if d.is_degenerate() || d.sum_d2() <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let n = d.n() as f64;
    let sum_d2 = d.sum_d2();
    let sum_d4 = d.sum_d4();
    let alpha = d.alpha();
    let term1 = C1 * n.sqrt() * sum_d4.sqrt() / sum_d2;
    let term2 = C2 * alpha.powi(3) * n.powf(2.5) / sum_d2.powf(1.5);
    Ok(BoundBreakdown {
        term1,
        term2,
        c1: C1,
        c2: C2,
        alpha,
        sum_d2,
        sum_d4,
    })
}

/// Full result of one test run. Serializes with stable field names.
#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub u: f64,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_std_error: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub rng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_normal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_terms: Option<BoundBreakdown>,
    pub alternative: Alternative,
    pub warnings: Vec<String>,
    pub mode: Mode,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const WARN_DEGENERATE: &str =
    "degenerate permutation distribution: variance is zero; W, p_normal and the error bound are unavailable";
pub const WARN_SMALL_N_BOUND: &str =
    "error-bound constants assume n >= 10; the bound at this n is an extrapolation";

/// Run the test end to end.
///
/// `auto` mode enumerates exactly when n is within the cutoff and falls back
/// to Monte Carlo otherwise. The normal-approximation p-value and the error
/// bound are attached whenever the distribution is non-degenerate.
pub fn run_test(
    e: &SimilarityMatrix,
    pi0: &Matching,
    cfg: &SamplerConfig,
    mode: Mode,
    alternative: Alternative,
) -> Result<TestReport> {
    let n = e.n();
    let u = statistic(e, pi0)?;
    let moments = e.exact_moments()?;
    let d = e.center();
    let degenerate = moments.variance <= 0.0 || d.is_degenerate();

    let mut warnings = e.warnings().to_vec();
    if degenerate {
        if mode == Mode::Normal {
            return Err(Error::DegenerateDistribution);
        }
        warnings.push(WARN_DEGENERATE.to_string());
    }

    let effective = match mode {
        Mode::Auto => {
            if n <= cfg.enumeration_cutoff {
                Mode::Exact
            } else {
                Mode::Mc
            }
        }
        m => m,
    };

    let mut p_exact = None;
    let mut p_mc = None;
    let mut mc_std_error = None;
    match effective {
        Mode::Exact => {
            p_exact = Some(exact_pvalue(e, pi0, cfg.enumeration_cutoff, alternative)?);
        }
        Mode::Mc => {
            let mc = mc_pvalue(e, pi0, cfg, alternative)?;
            p_mc = Some(mc.p);
            mc_std_error = Some(mc.std_error);
        }
        Mode::Normal => {}
        Mode::Auto => unreachable!(),
    }

    let (w, p_normal, delta_bound, bound_terms) = if degenerate {
        (None, None, None, None)
    } else {
        let w = (u - moments.mean) / moments.variance.sqrt();
        let bound = berry_esseen_bound(&d)?;
        if n < 10 {
            warnings.push(WARN_SMALL_N_BOUND.to_string());
        }
        (
            Some(w),
            Some(pvalue_from_w(w, alternative)),
            Some(bound.delta()),
            Some(bound),
        )
    };

    Ok(TestReport {
        n,
        u,
        mean: moments.mean,
        variance: moments.variance,
        w,
        p_exact,
        p_mc,
        mc_std_error,
        replicates: cfg.replicates,
        seed: cfg.seed,
        rng: RNG_NAME,
        p_normal,
        delta_bound,
        bound_terms,
        alternative,
        warnings,
        mode: effective,
    })
}

/// Kolmogorov distance of a sorted sample against Φ, evaluated at every jump
/// point from both sides (the sup over a discrete CDF against a continuous
/// one is attained at a jump).
pub(crate) fn ks_distance_sorted(ws: &[f64]) -> f64 {
    let n = ws.len() as f64;
    let mut sup = 0.0f64;
    let mut idx = 0usize;
    while idx < ws.len() {
        let x = ws[idx];
        let mut end = idx + 1;
        while end < ws.len() && ws[end] == x {
            end += 1;
        }
        let below = idx as f64 / n;
        let at = end as f64 / n;
        let cdf = phi(x);
        sup = sup.max((at - cdf).abs()).max((cdf - below).abs());
        idx = end;
    }
    sup
}
