//! Fixed-point-free involutions of {1..n} (perfect matchings), their uniform
//! sampling, exhaustive enumeration, and the exchangeable-pair coupling step.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of the generator recorded in report metadata.
pub const RNG_NAME: &str = "chacha8";

/// A fixed-point-free involution π: π(π(i)) = i and π(i) ≠ i for all i.
///
/// Stored 0-based; the 1-based convention of the accompanying docs applies to
/// serialized output and the matching-file format.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    pair_of: Vec<usize>,
}

impl Matching {
    /// Validate and wrap a 0-based partner vector.
    pub fn try_new(pair_of: Vec<usize>) -> Result<Self> {
        let n = pair_of.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidMatching(format!(
                "length must be even and positive, got {n}"
            )));
        }
        for (i, &j) in pair_of.iter().enumerate() {
            if j >= n {
                return Err(Error::InvalidMatching(format!(
                    "partner index {} out of range at position {}",
                    j + 1,
                    i + 1
                )));
            }
            if j == i {
                return Err(Error::InvalidMatching(format!(
                    "fixed point at index {}",
                    i + 1
                )));
            }
            if pair_of[j] != i {
                return Err(Error::InvalidMatching(format!(
                    "not an involution at index {}",
                    i + 1
                )));
            }
        }
        Ok(Self { pair_of })
    }

    /// The designated pairing (1,2), (3,4), …, (n−1,n).
    pub fn canonical(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "matching size must be even and positive, got {n}"
            )));
        }
        let mut pair_of = vec![0; n];
        for k in 0..n / 2 {
            pair_of[2 * k] = 2 * k + 1;
            pair_of[2 * k + 1] = 2 * k;
        }
        Ok(Self { pair_of })
    }

    /// Uniform draw from Π_n: repeatedly match the lowest unmatched index to
    /// a uniformly chosen unmatched partner. Each matching has probability
    /// 1/((n−1)(n−3)···1).
    pub fn sample<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "matching size must be even and positive, got {n}"
            )));
        }
        let mut pair_of = vec![0; n];
        let mut free: Vec<usize> = (0..n).collect();
        sample_into(&mut pair_of, &mut free, rng);
        Ok(Self { pair_of })
    }

    /// Build from 1-based pairs, e.g. from a matching file. Every index in
    /// 1..=n must appear exactly once.
    pub fn from_one_based_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "matching size must be even and positive, got {n}"
            )));
        }
        let mut pair_of = vec![usize::MAX; n];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::InvalidMatching(format!(
                    "pair ({a}, {b}) out of range 1..={n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidMatching(format!(
                    "pair ({a}, {b}) is a fixed point"
                )));
            }
            let (i, j) = (a - 1, b - 1);
            if pair_of[i] != usize::MAX || pair_of[j] != usize::MAX {
                return Err(Error::InvalidMatching(format!(
                    "index {} listed more than once",
                    if pair_of[i] != usize::MAX { a } else { b }
                )));
            }
            pair_of[i] = j;
            pair_of[j] = i;
        }
        if let Some(i) = pair_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidMatching(format!(
                "index {} is unmatched",
                i + 1
            )));
        }
        Self::try_new(pair_of)
    }

    pub fn n(&self) -> usize {
        self.pair_of.len()
    }

    /// π(i), 0-based.
    #[inline]
    pub fn partner(&self, i: usize) -> usize {
        self.pair_of[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.pair_of
    }

    /// 1-based partner vector, the documented external representation.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.pair_of.iter().map(|&p| p + 1).collect()
    }

    /// The coupling step: impose π*(i) = j on π.
    ///
    /// π*(i) = j, π*(j) = i, π*(π(i)) = π(j), π*(π(j)) = π(i), all other
    /// values unchanged. When j = π(i) this returns π itself.
    pub fn coupling_step(&self, i: usize, j: usize) -> Result<Matching> {
        let n = self.n();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidPair { i, j });
        }
        let mut pair_of = self.pair_of.clone();
        couple_in_place(&mut pair_of, i, j);
        Ok(Matching { pair_of })
    }

    /// Coupling step with (I, J) drawn uniformly from ordered distinct pairs.
    pub fn coupling_step_random<R: Rng>(&self, rng: &mut R) -> (Matching, (usize, usize)) {
        let (i, j) = random_ordered_pair(self.n(), rng);
        let m = self
            .coupling_step(i, j)
            .expect("pair is distinct and in range");
        (m, (i, j))
    }
}

impl Serialize for Matching {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.pair_of.len()))?;
        for &p in &self.pair_of {
            seq.serialize_element(&(p + 1))?;
        }
        seq.end()
    }
}

/// Uniform ordered pair (i, j), i ≠ j, both in 0..n.
pub(crate) fn random_ordered_pair<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// In-place coupling on a raw partner vector; caller guarantees i != j.
#[inline]
pub(crate) fn couple_in_place(pair_of: &mut [usize], i: usize, j: usize) {
    let pi_i = pair_of[i];
    if pi_i == j {
        return;
    }
    let pi_j = pair_of[j];
    pair_of[i] = j;
    pair_of[j] = i;
    pair_of[pi_i] = pi_j;
    pair_of[pi_j] = pi_i;
}

/// Fill `pair_of` with a uniform matching, reusing `free` as scratch.
/// `free` must contain 0..n in ascending order on entry.
pub(crate) fn sample_into<R: Rng>(pair_of: &mut [usize], free: &mut Vec<usize>, rng: &mut R) {
    while free.len() > 1 {
        let anchor = free[0];
        let k = rng.gen_range(1..free.len());
        let partner = free[k];
        pair_of[anchor] = partner;
        pair_of[partner] = anchor;
        free.remove(k);
        free.remove(0);
    }
    debug_assert!(free.is_empty());
}

/// The deterministic RNG used everywhere: ChaCha8, seeded from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the same seed, for parallel replication.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// |Π_n| = (n−1)!! for even n. Saturates at u64::MAX (the true count
/// overflows 64 bits past n = 34).
pub fn matching_count(n: usize) -> u64 {
    let mut k = n.saturating_sub(1) as u64;
    let mut out = 1u64;
    while k > 1 {
        out = out.saturating_mul(k);
        k -= 2;
    }
    out
}

/// Monte Carlo and enumeration configuration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub replicates: usize,
    pub enumeration_cutoff: usize,
}

impl SamplerConfig {
    pub const MAX_CUTOFF: usize = 20;

    pub fn new(seed: u64, replicates: usize, enumeration_cutoff: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be >= 1".into()));
        }
        if enumeration_cutoff > Self::MAX_CUTOFF {
            return Err(Error::InvalidConfig(format!(
                "enumeration cutoff {} exceeds {}",
                enumeration_cutoff,
                Self::MAX_CUTOFF
            )));
        }
        Ok(Self {
            seed,
            replicates,
            enumeration_cutoff,
        })
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 100_000,
            enumeration_cutoff: 16,
        }
    }
}

/// Stream over all of Π_n in a deterministic order: the lowest unmatched
/// index is paired with each larger unmatched partner in increasing order,
/// recursively.
pub fn enumerate_matchings(n: usize, cutoff: usize) -> Result<MatchingEnumerator> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "matching size must be even and positive, got {n}"
        )));
    }
    if n > cutoff {
        return Err(Error::EnumerationTooLarge { n, cutoff });
    }
    Ok(MatchingEnumerator {
        n,
        pair_of: vec![UNMATCHED; n],
        stack: Vec::with_capacity(n / 2),
        state: EnumState::Fresh,
    })
}

const UNMATCHED: usize = usize::MAX;

enum EnumState {
    Fresh,
    Running,
    Done,
}

pub struct MatchingEnumerator {
    n: usize,
    pair_of: Vec<usize>,
    /// Chosen (anchor, partner) pairs, in choice order.
    stack: Vec<(usize, usize)>,
    state: EnumState,
}

impl MatchingEnumerator {
    fn lowest_unmatched(&self) -> Option<usize> {
        self.pair_of.iter().position(|&p| p == UNMATCHED)
    }

    fn next_free_partner(&self, anchor: usize, after: usize) -> Option<usize> {
        ((after + 1)..self.n).find(|&j| j != anchor && self.pair_of[j] == UNMATCHED)
    }

    fn push_pair(&mut self, a: usize, b: usize) {
        self.pair_of[a] = b;
        self.pair_of[b] = a;
        self.stack.push((a, b));
    }

    fn pop_pair(&mut self) -> (usize, usize) {
        let (a, b) = self.stack.pop().expect("stack not empty");
        self.pair_of[a] = UNMATCHED;
        self.pair_of[b] = UNMATCHED;
        (a, b)
    }

    /// Complete the current partial matching with smallest partners all the
    /// way down.
    fn descend(&mut self) {
        while let Some(a) = self.lowest_unmatched() {
            let b = self
                .next_free_partner(a, a)
                .expect("even count of unmatched indices");
            self.push_pair(a, b);
        }
    }
}

impl Iterator for MatchingEnumerator {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        match self.state {
            EnumState::Done => return None,
            EnumState::Fresh => {
                self.state = EnumState::Running;
                self.descend();
                return Some(Matching {
                    pair_of: self.pair_of.clone(),
                });
            }
            EnumState::Running => {}
        }
        // backtrack: advance the deepest choice that still has partners left
        loop {
            if self.stack.is_empty() {
                self.state = EnumState::Done;
                return None;
            }
            let (a, b) = self.pop_pair();
            if let Some(b2) = self.next_free_partner(a, b) {
                self.push_pair(a, b2);
                self.descend();
                return Some(Matching {
                    pair_of: self.pair_of.clone(),
                });
            }
        }
    }
}
