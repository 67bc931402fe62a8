//! Depth-weighted medoid seeding.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::depth::Similarity;
use crate::error::{invalid, Error, Result};
use crate::seed::Rng;

/// How medoids after the first are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Seeding {
    /// Probability proportional to a point's similarity to its closest
    /// medoid, normalised within that medoid's neighbourhood.
    #[default]
    Depth,
    /// Probability proportional to `max_sim - sim` to the closest medoid,
    /// the distance-proportional rule of k-means++. Not part of the original
    /// algorithm; provided for comparison.
    Spread,
    /// Uniform over the points not chosen yet.
    Uniform,
}

impl fmt::Display for Seeding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Seeding::Depth => "depth",
            Seeding::Spread => "spread",
            Seeding::Uniform => "uniform",
        })
    }
}

impl FromStr for Seeding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depth" => Ok(Seeding::Depth),
            "spread" => Ok(Seeding::Spread),
            "uniform" => Ok(Seeding::Uniform),
            other => Err(invalid(format!("unknown seeding '{other}' (expected depth, spread or uniform)"))),
        }
    }
}

/// Chooses `k` distinct medoid indices.
///
/// The first medoid is uniform. Afterwards every point is attached to its
/// most similar medoid `p(i)` and the next medoid is drawn among the
/// unchosen points with weight `sim(x_i, m_p(i)) / Σ_{h ∈ M_p(i)} sim(x_h, m_p(i))`.
/// With a single medoid this is exactly the `sim(x_i, m_1) / Σ_j sim(x_j, m_1)`
/// rule for the second one. All-zero weights fall back to uniform.
pub fn init_medoids<S: Similarity + ?Sized>(sim: &S, k: usize, seeding: Seeding, rng: &mut Rng) -> Result<Vec<usize>> {
    let n = sim.len();
    if k == 0 || k > n {
        return Err(invalid(format!("number of medoids must be in 1..={n}, got {k}")));
    }
    let mut chosen = vec![rng.random_range(0..n)];
    let mut is_chosen = vec![false; n];
    is_chosen[chosen[0]] = true;
    let mut owner = vec![0usize; n];
    let mut best: Vec<f64> = (0..n).map(|i| sim.sim(i, chosen[0])).collect();
    let max_sim = sim.kind().max_value();
    let mut weights = vec![0.0; n];

    while chosen.len() < k {
        match seeding {
            Seeding::Depth => {
                let mut hood = vec![0.0; chosen.len()];
                for i in 0..n {
                    hood[owner[i]] += best[i];
                }
                for i in 0..n {
                    let h = hood[owner[i]];
                    weights[i] = if is_chosen[i] || h <= 0.0 { 0.0 } else { best[i] / h };
                }
            }
            Seeding::Spread => {
                for i in 0..n {
                    weights[i] = if is_chosen[i] { 0.0 } else { (max_sim - best[i]).max(0.0) };
                }
            }
            Seeding::Uniform => {
                for i in 0..n {
                    weights[i] = if is_chosen[i] { 0.0 } else { 1.0 };
                }
            }
        }
        let next = draw_weighted(&weights, &is_chosen, rng);
        is_chosen[next] = true;
        let p = chosen.len();
        chosen.push(next);
        for i in 0..n {
            let s = sim.sim(i, next);
            if s > best[i] {
                best[i] = s;
                owner[i] = p;
            }
        }
    }
    Ok(chosen)
}

fn draw_weighted(weights: &[f64], excluded: &[bool], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        let mut target = rng.random::<f64>() * total;
        let mut last = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                if target < w {
                    return i;
                }
                target -= w;
                last = Some(i);
            }
        }
        if let Some(i) = last {
            return i;
        }
    }
    let free: Vec<usize> = (0..excluded.len()).filter(|&i| !excluded[i]).collect();
    free[rng.random_range(0..free.len())]
}
