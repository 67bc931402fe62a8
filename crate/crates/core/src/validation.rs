//! External agreement indices between two partitions.
//!
//! Crisp partitions are compared through pair counts (Rand and adjusted
//! Rand). Fuzzy partitions are compared through the normalised degree of
//! concordance (NDC), built on the fuzzy equivalence
//! `E(i, j) = 1 - ‖w(x_i) - w(x_j)‖₁ / 2`, and its permutation-adjusted form
//! (ACI). NDC of two crisp partitions is exactly their Rand index.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::partition::Partition;
use crate::seed;

/// Unordered-pair agreement counts between partitions `P` and `Q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    /// together in both
    pub a: u64,
    /// together in `P` only
    pub b: u64,
    /// together in `Q` only
    pub c: u64,
    /// apart in both
    pub d: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

fn check_lengths(p: usize, q: usize) -> Result<()> {
    if p == q {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: p, right: q })
    }
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Pair counts from the contingency table, `O(n + K_P K_Q)`.
pub fn pair_counts(p: &Partition, q: &Partition) -> Result<PairCounts> {
    check_lengths(p.len(), q.len())?;
    let n = p.len() as u64;
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    for (&lp, &lq) in p.labels().iter().zip(q.labels()) {
        *table.entry((lp, lq)).or_insert(0) += 1;
    }
    let together_both: u64 = table.values().map(|&m| choose2(m)).sum();
    let together_p: u64 = p.cluster_sizes().iter().map(|&m| choose2(m as u64)).sum();
    let together_q: u64 = q.cluster_sizes().iter().map(|&m| choose2(m as u64)).sum();
    let a = together_both;
    let b = together_p - a;
    let c = together_q - a;
    let d = choose2(n) - a - b - c;
    Ok(PairCounts { a, b, c, d })
}

/// Reference `O(n²)` enumeration of all pairs.
pub fn pair_counts_brute_force(p: &Partition, q: &Partition) -> Result<PairCounts> {
    check_lengths(p.len(), q.len())?;
    let (lp, lq) = (p.labels(), q.labels());
    let mut counts = PairCounts::default();
    for i in 0..lp.len() {
        for j in i + 1..lp.len() {
            match (lp[i] == lp[j], lq[i] == lq[j]) {
                (true, true) => counts.a += 1,
                (true, false) => counts.b += 1,
                (false, true) => counts.c += 1,
                (false, false) => counts.d += 1,
            }
        }
    }
    Ok(counts)
}

pub fn rand_index(p: &Partition, q: &Partition) -> Result<f64> {
    check_lengths(p.len(), q.len())?;
    if p.len() < 2 {
        return Err(invalid("the Rand index needs at least two items"));
    }
    let c = pair_counts(p, q)?;
    Ok((c.a + c.d) as f64 / c.total() as f64)
}

/// Adjusted Rand index in closed pair-count form,
/// `2(ad - bc) / (b² + c² + 2ad + (a + d)(b + c))`.
pub fn adjusted_rand_index(p: &Partition, q: &Partition) -> Result<f64> {
    check_lengths(p.len(), q.len())?;
    if p.len() < 2 {
        return Err(invalid("the adjusted Rand index needs at least two items"));
    }
    let PairCounts { a, b, c, d } = pair_counts(p, q)?;
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let denom = b * b + c * c + 2.0 * a * d + (a + d) * (b + c);
    if denom == 0.0 {
        return if b == 0.0 && c == 0.0 { Ok(1.0) } else { Err(Error::Undefined("adjusted Rand index")) };
    }
    Ok(2.0 * (a * d - b * c) / denom)
}

/// `n × K` membership matrix whose rows are probability vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyPartition {
    n: usize,
    k: usize,
    memberships: Vec<f64>,
}

impl FuzzyPartition {
    pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(invalid("membership matrix needs at least one row and one column"));
        }
        let mut memberships = Vec::with_capacity(n * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(invalid(format!("row {i} has {} memberships, expected {k}", row.len())));
            }
            if row.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(invalid(format!("row {i} has a membership outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(invalid(format!("row {i} sums to {sum}, not 1")));
            }
            memberships.extend(row);
        }
        Ok(Self { n, k, memberships })
    }

    /// One-hot embedding of a crisp partition.
    pub fn from_crisp(p: &Partition) -> Self {
        let (n, k) = (p.len(), p.k());
        let mut memberships = vec![0.0; n * k];
        for (i, &l) in p.labels().iter().enumerate() {
            memberships[i * k + l] = 1.0;
        }
        Self { n, k, memberships }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.memberships[i * self.k..(i + 1) * self.k]
    }

    fn equivalence(&self, i: usize, j: usize) -> f64 {
        equivalence_unchecked(self.row(i), self.row(j))
    }
}

/// `1 - ‖w_i - w_j‖₁ / 2`, in `[0, 1]` for probability rows.
pub fn fuzzy_equivalence(w_i: &[f64], w_j: &[f64]) -> Result<f64> {
    check_lengths(w_i.len(), w_j.len())?;
    Ok(equivalence_unchecked(w_i, w_j))
}

#[inline]
fn equivalence_unchecked(w_i: &[f64], w_j: &[f64]) -> f64 {
    1.0 - 0.5 * w_i.iter().zip(w_j).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Normalised degree of concordance.
pub fn ndc(g: &FuzzyPartition, h: &FuzzyPartition) -> Result<f64> {
    check_lengths(g.len(), h.len())?;
    if g.len() < 2 {
        return Err(invalid("NDC needs at least two items"));
    }
    let identity: Vec<usize> = (0..h.len()).collect();
    Ok(ndc_permuted(g, h, &identity))
}

// NDC(G, H_π) where row i of H_π is row perm[i] of H.
fn ndc_permuted(g: &FuzzyPartition, h: &FuzzyPartition, perm: &[usize]) -> f64 {
    let n = g.len();
    let discord: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = perm[i];
            (i + 1..n)
                .map(|j| (g.equivalence(i, j) - h.equivalence(pi, perm[j])).abs())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    1.0 - discord / (n as f64 * (n - 1) as f64 / 2.0)
}

/// Adjusted concordance index
/// `(NDC - mean NDC_perm) / (1 - mean NDC_perm)`, where the mean is over
/// `n_perm` random row permutations of `h` with `g` held fixed.
pub fn aci(g: &FuzzyPartition, h: &FuzzyPartition, n_perm: usize, seed: u64) -> Result<f64> {
    let observed = ndc(g, h)?;
    if n_perm == 0 {
        return Err(invalid("at least one permutation is required"));
    }
    let mean = mean_permuted_ndc(g, h, n_perm, seed);
    if 1.0 - mean < 1e-12 {
        return Err(Error::DegenerateAdjustment { mean_ndc: mean });
    }
    Ok((observed - mean) / (1.0 - mean))
}

fn mean_permuted_ndc(g: &FuzzyPartition, h: &FuzzyPartition, n_perm: usize, seed: u64) -> f64 {
    let values: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|r| {
            let mut perm: Vec<usize> = (0..h.len()).collect();
            perm.shuffle(&mut seed::rng(seed::derive(seed, &[r as u64])));
            ndc_permuted(g, h, &perm)
        })
        .collect();
    values.iter().sum::<f64>() / n_perm as f64
}
