use rayon::prelude::*;

use crate::depth::Similarity;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// Per-point silhouettes computed from depth similarities.
#[derive(Clone, Debug, PartialEq)]
pub struct SilhouetteReport {
    pub per_point: Vec<f64>,
    pub mean: f64,
}

/// Similarity-based silhouette.
///
/// With `a` the mean similarity of a point to the other members of its
/// cluster and `b` the largest mean similarity to any other cluster,
/// `s = 1 - b/a` if `a > b`, `0` if `a = b`, and `a/b - 1` if `a < b`.
/// Points in singleton clusters get 0.
pub fn silhouette<S: Similarity + ?Sized>(sim: &S, partition: &Partition) -> Result<SilhouetteReport> {
    let n = sim.len();
    if partition.len() != n {
        return Err(Error::LengthMismatch { left: partition.len(), right: n });
    }
    if partition.k() < 2 || n < 2 {
        return Err(Error::Undefined("silhouette with fewer than two clusters"));
    }
    let k = partition.k();
    let labels = partition.labels();
    let sizes = partition.cluster_sizes();

    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] < 2 {
                return 0.0;
            }
            let mut totals = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    totals[labels[j]] += sim.sim(i, j);
                }
            }
            let a = totals[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| totals[c] / sizes[c] as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            piecewise(a, b)
        })
        .collect();
    let mean = per_point.iter().sum::<f64>() / n as f64;
    Ok(SilhouetteReport { per_point, mean })
}

fn piecewise(a: f64, b: f64) -> f64 {
    if a > b {
        1.0 - b / a
    } else if a < b {
        a / b - 1.0
    } else {
        0.0
    }
}
