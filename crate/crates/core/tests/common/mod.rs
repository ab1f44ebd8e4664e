//! Shared test oracles, independent of the library's implementation paths.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use permatch_core::{seeded_rng, SimilarityMatrix, SymmetryPolicy};
use rand::Rng;

/// chi-square 0.999 quantiles (scipy.stats.chi2.ppf(0.999, df)), frozen.
pub const CHI2_999_DF2: f64 = 13.815510557964274;
pub const CHI2_999_DF3: f64 = 16.26623619623813;
pub const CHI2_999_DF14: f64 = 36.12327368039813;
pub const CHI2_999_DF104: f64 = 154.31407954898623;
pub const CHI2_999_DF105: f64 = 155.5276771810864;

/// Reference enumerator for Π_n, written independently of the library's
/// backtracking iterator: plain recursion, lowest index first, partners in
/// increasing order. Returns 0-based partner vectors.
pub fn reference_matchings(n: usize) -> Vec<Vec<usize>> {
    fn rec(free: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<usize>>, n: usize) {
        if free.is_empty() {
            let mut pair_of = vec![0; n];
            for &(a, b) in acc.iter() {
                pair_of[a] = b;
                pair_of[b] = a;
            }
            out.push(pair_of);
            return;
        }
        let a = free[0];
        for k in 1..free.len() {
            let b = free[k];
            let rest: Vec<usize> = free[1..].iter().copied().filter(|&x| x != b).collect();
            acc.push((a, b));
            rec(&rest, acc, out, n);
            acc.pop();
        }
    }
    let free: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    rec(&free, &mut Vec::new(), &mut out, n);
    out
}

/// V = Σ_i g[i][π(i)], plain summation.
pub fn brute_statistic(g: &[Vec<f64>], pair_of: &[usize]) -> f64 {
    pair_of.iter().enumerate().map(|(i, &j)| g[i][j]).sum()
}

/// Mean and population variance of V over all of Π_n, by brute force.
pub fn brute_moments(g: &[Vec<f64>]) -> (f64, f64) {
    let n = g.len();
    let us: Vec<f64> = reference_matchings(n)
        .iter()
        .map(|pi| brute_statistic(g, pi))
        .collect();
    let count = us.len() as f64;
    let mean = us.iter().sum::<f64>() / count;
    let var = us.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / count;
    (mean, var)
}

/// Symmetric zero-diagonal grid with integer entries in [-9, 9].
pub fn random_symmetric_int(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(-9i32..=9) as f64;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// Asymmetric zero-diagonal grid with integer entries in [-9, 9].
pub fn random_asymmetric_int(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                g[i][j] = rng.gen_range(-9i32..=9) as f64;
            }
        }
    }
    g
}

/// Symmetric zero-diagonal grid with entries uniform in [0, 1).
pub fn random_symmetric_unit(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.gen_range(0.0..1.0);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

pub fn similarity(raw: &[Vec<f64>]) -> SimilarityMatrix {
    SimilarityMatrix::ingest(raw, SymmetryPolicy::Average).expect("valid test matrix")
}
