//! Verification harness for the structural identities behind the test:
//! the coupling's conditional-linearity identity, the increment bound, the
//! vanishing margins of the centered matrix, and the realized quality of the
//! normal approximation.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{berry_esseen_bound, ks_distance_sorted};
use crate::error::{Error, Result};
use crate::matching::{
    enumerate_matchings, matching_count, random_ordered_pair, sample_into, stream_rng, Matching,
    SamplerConfig,
};
use crate::matrix::CenteredMatrix;
use crate::sum::Accumulator;

/// Stream-id offset for the sampled-matching pool, so it never reuses the
/// Monte Carlo replicate streams of the same seed.
const DIAG_STREAM_BASE: u64 = 1 << 32;

/// Exhaustive matching sets larger than this fall back to sampling.
const EXHAUSTIVE_LIMIT: u64 = 20_000;

/// Sampled ordered pairs per matching when the pair sweep is not exhaustive.
const SAMPLED_PAIRS: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub linearity_max_residual: f64,
    pub increment_bound_violations: u64,
    pub margin_max_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_ks_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_bound: Option<f64>,
    pub samples_used: usize,
    pub seed: u64,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// U(π*) − U(π) for the coupling that imposes π*(i) = j; zero when j = π(i).
#[inline]
fn delta_u(d: &CenteredMatrix, pi: &Matching, i: usize, j: usize) -> f64 {
    let pi_i = pi.partner(i);
    if pi_i == j {
        return 0.0;
    }
    let pi_j = pi.partner(j);
    2.0 * (d.at(i, j) + d.at(pi_i, pi_j) - d.at(i, pi_i) - d.at(j, pi_j))
}

/// Max over the given matchings of |E_{(I,J)}[U* − U] + (4/n) U(π)|, the
/// average taken exactly over all n(n−1) ordered pairs.
pub fn max_linearity_residual(d: &CenteredMatrix, pis: &[Matching]) -> f64 {
    let n = d.n();
    let pairs = (n * (n - 1)) as f64;
    pis.iter()
        .map(|pi| {
            let u = crate::engine::statistic(d, pi).expect("dimensions match");
            let mut acc = Accumulator::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc.add(delta_u(d, pi, i, j));
                    }
                }
            }
            (acc.value() / pairs + 4.0 / n as f64 * u).abs()
        })
        .fold(0.0, f64::max)
}

/// Count (π, I, J) with |U* − U| > 4α(1 + 1e-12). `pairs` = None sweeps all
/// ordered pairs for every matching.
pub fn count_increment_violations(
    d: &CenteredMatrix,
    pis: &[Matching],
    pairs: Option<&[(usize, usize)]>,
) -> u64 {
    let n = d.n();
    let limit = 4.0 * d.alpha() * (1.0 + 1e-12);
    let mut violations = 0u64;
    for pi in pis {
        match pairs {
            None => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j && delta_u(d, pi, i, j).abs() > limit {
                            violations += 1;
                        }
                    }
                }
            }
            Some(ps) => {
                for &(i, j) in ps {
                    if delta_u(d, pi, i, j).abs() > limit {
                        violations += 1;
                    }
                }
            }
        }
    }
    violations
}

/// Kolmogorov distance between the permutation law of W = U/σ and Φ, paired
/// with the explicit error bound.
///
/// Within the enumeration cutoff the distance is exact (full enumeration of
/// Π_n); beyond it the empirical distribution of `cfg.replicates` Monte Carlo
/// draws is used instead.
pub fn empirical_cdf_distance(d: &CenteredMatrix, cfg: &SamplerConfig) -> Result<(f64, f64)> {
    let bound = berry_esseen_bound(d)?; // degenerate input errors here
    let n = d.n();
    let sigma = d.variance().sqrt();
    if sigma <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }

    let mut ws: Vec<f64> = if n <= cfg.enumeration_cutoff {
        enumerate_matchings(n, cfg.enumeration_cutoff)?
            .map(|pi| crate::engine::statistic(d, &pi).expect("dimensions match") / sigma)
            .collect()
    } else {
        sample_standardized(d, cfg)
    };
    ws.sort_unstable_by(f64::total_cmp);
    Ok((ks_distance_sorted(&ws), bound.delta()))
}

/// Monte Carlo draws of W = U/σ, chunked over RNG streams exactly like the
/// p-value sampler so results are parallelism-independent.
fn sample_standardized(d: &CenteredMatrix, cfg: &SamplerConfig) -> Vec<f64> {
    const CHUNK: usize = 8192;
    let n = d.n();
    let sigma = d.variance().sqrt();
    let replicates = cfg.replicates;
    let chunks = replicates.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(replicates);
            let mut rng = stream_rng(cfg.seed, chunk as u64);
            let mut pair_of = vec![0usize; n];
            let mut free = Vec::with_capacity(n);
            let mut out = Vec::with_capacity(hi - lo);
            for _ in lo..hi {
                free.clear();
                free.extend(0..n);
                sample_into(&mut pair_of, &mut free, &mut rng);
                let mut acc = Accumulator::new();
                for (i, &j) in pair_of.iter().enumerate() {
                    acc.add(d.at(i, j));
                }
                out.push(acc.value() / sigma);
            }
            out
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Run the full diagnostic sweep.
///
/// Matchings are enumerated exhaustively while |Π_n| ≤ 20 000 (n ≤ 12);
/// otherwise `samples` matchings are drawn, and the increment check uses 16
/// sampled ordered pairs per matching instead of all n(n−1).
pub fn run_diagnostics(
    d: &CenteredMatrix,
    cfg: &SamplerConfig,
    samples: usize,
) -> Result<DiagnosticsReport> {
    let n = d.n();
    let exhaustive = matching_count(n) <= EXHAUSTIVE_LIMIT;
    let (pis, sampled_pairs) = if exhaustive {
        let pis: Vec<Matching> =
            enumerate_matchings(n, SamplerConfig::MAX_CUTOFF.max(n))?.collect();
        (pis, None)
    } else {
        let mut rng = stream_rng(cfg.seed, DIAG_STREAM_BASE);
        let pis: Vec<Matching> = (0..samples.max(1))
            .map(|_| Matching::sample(n, &mut rng).expect("n is even"))
            .collect();
        let pairs: Vec<(usize, usize)> = (0..SAMPLED_PAIRS)
            .map(|_| random_ordered_pair(n, &mut rng))
            .collect();
        (pis, Some(pairs))
    };

    let linearity_max_residual = max_linearity_residual(d, &pis);
    let increment_bound_violations = count_increment_violations(d, &pis, sampled_pairs.as_deref());

    let (empirical_ks_distance, delta_bound) = match empirical_cdf_distance(d, cfg) {
        Ok((ks, bound)) => (Some(ks), Some(bound)),
        Err(Error::DegenerateDistribution) => (None, None),
        Err(e) => return Err(e),
    };

    Ok(DiagnosticsReport {
        linearity_max_residual,
        increment_bound_violations,
        margin_max_abs: d.margin_max_abs(),
        empirical_ks_distance,
        delta_bound,
        samples_used: pis.len(),
        seed: cfg.seed,
    })
}
