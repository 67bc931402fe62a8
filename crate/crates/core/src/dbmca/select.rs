use crate::dbmca::{fit_best, ClusterModel, FitOptions};
use crate::depth::Similarity;
use crate::error::{invalid, Result};
use crate::seed;

/// Outcome of silhouette-based model selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub best_k: usize,
    /// One model per candidate, in the order of the requested range.
    pub models: Vec<ClusterModel>,
}

impl Selection {
    pub fn best(&self) -> &ClusterModel {
        self.model(self.best_k).expect("best_k is one of the candidates")
    }

    pub fn model(&self, k: usize) -> Option<&ClusterModel> {
        self.models.iter().find(|m| m.k() == k)
    }
}

/// Fits every `k` in `k_range` (best of `options.restarts`) and picks the one
/// with the largest mean silhouette, preferring the smaller `k` on ties.
pub fn select_k<S: Similarity + ?Sized>(
    sim: &S,
    k_range: &[usize],
    seed: u64,
    options: &FitOptions,
) -> Result<Selection> {
    if k_range.is_empty() {
        return Err(invalid("empty k range"));
    }
    let n = sim.len();
    if let Some(&bad) = k_range.iter().find(|&&k| k < 2 || k > n) {
        return Err(invalid(format!("silhouette selection needs 2 <= k <= {n}, got {bad}")));
    }
    let models = k_range
        .iter()
        .map(|&k| fit_best(sim, k, seed::derive(seed, &[k as u64]), options))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, f64)> = None;
    for m in &models {
        let s = m.silhouette.expect("k >= 2");
        let better = match best {
            None => true,
            Some((bk, bs)) => s > bs || (s == bs && m.k() < bk),
        };
        if better {
            best = Some((m.k(), s));
        }
    }
    Ok(Selection { best_k: best.expect("non-empty").0, models })
}
