//! Spherical k-means baseline (cosine-similarity k-means with unit centroids).

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::partition::Partition;
use crate::seed;
use crate::sphere::{sample_dim, SpherePoint};

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalKMeans {
    pub partition: Partition,
    /// Unit-norm dense centroids.
    pub centroids: Vec<Vec<f64>>,
    /// `Σ_i x_i'c_label(i)` after each assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternates max-dot assignment with `c_k = normalize(Σ_{i ∈ C_k} x_i)`.
///
/// Seeds are drawn k-means++ style with probability proportional to the
/// cosine distance to the nearest chosen centroid (half the squared chord
/// length). A cluster that empties is re-seeded with the point that fits its
/// current centroid worst.
pub fn spherical_kmeans<P: SpherePoint>(sample: &[P], k: usize, seed: u64, max_iter: usize) -> Result<SphericalKMeans> {
    let d = sample_dim(sample)?;
    let n = sample.len();
    if k == 0 || k > n {
        return Err(invalid(format!("number of clusters must be in 1..={n}, got {k}")));
    }
    let mut rng = seed::rng(seed);
    let mut centroids = seed_centroids(sample, k, d, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let (new_labels, fits) = assign(sample, &centroids);
        let changed = new_labels != labels;
        labels = new_labels;
        trace.push(fits.iter().sum());
        if !changed {
            converged = true;
            break;
        }
        if iterations == max_iter {
            break;
        }
        iterations += 1;
        repair_empty(&mut labels, &fits, k);
        update_centroids(sample, &labels, &mut centroids);
    }

    Ok(SphericalKMeans {
        partition: Partition::new_unchecked(labels, k),
        centroids,
        objective_trace: trace,
        iterations,
        converged,
    })
}

fn seed_centroids<P: SpherePoint>(sample: &[P], k: usize, d: usize, rng: &mut seed::Rng) -> Vec<Vec<f64>> {
    let n = sample.len();
    let dense = |i: usize| {
        let mut c = vec![0.0; d];
        sample[i].add_scaled_to(&mut c, 1.0);
        c
    };
    let mut chosen = vec![rng.random_range(0..n)];
    let mut centroids = vec![dense(chosen[0])];
    let mut nearest: Vec<f64> = sample.iter().map(|x| 1.0 - x.dot_dense(&centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().map(|v| v.max(0.0)).sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                let w = w.max(0.0);
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total")
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        centroids.push(dense(next));
        let c = centroids.last().expect("just pushed");
        for (v, x) in nearest.iter_mut().zip(sample) {
            *v = v.min(1.0 - x.dot_dense(c));
        }
    }
    centroids
}

fn assign<P: SpherePoint>(sample: &[P], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    sample
        .iter()
        .map(|x| {
            let mut best = (0, x.dot_dense(&centroids[0]));
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let v = x.dot_dense(centroid);
                if v > best.1 {
                    best = (c, v);
                }
            }
            best
        })
        .unzip()
}

fn repair_empty(labels: &mut [usize], fits: &[f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .min_by(|&a, &b| fits[a].total_cmp(&fits[b]).then(a.cmp(&b)))
            .expect("k <= n leaves a cluster with two members");
        sizes[labels[donor]] -= 1;
        labels[donor] = empty;
        sizes[empty] = 1;
    }
}

fn update_centroids<P: SpherePoint>(sample: &[P], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let d = centroids[0].len();
    let mut sums = vec![vec![0.0; d]; centroids.len()];
    for (x, &l) in sample.iter().zip(labels) {
        x.add_scaled_to(&mut sums[l], 1.0);
    }
    for (c, s) in centroids.iter_mut().zip(sums) {
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        // a zero resultant keeps the previous direction
        if norm > 0.0 {
            *c = s.into_iter().map(|v| v / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{SparseUnitVector, UnitVector};
    use crate::validation::adjusted_rand_index;
    use crate::vmf::sample_uniform;

    #[test]
    fn single_cluster_centroid_is_normalized_mean() {
        let pts = sample_uniform(3, 50, 4).unwrap();
        let model = spherical_kmeans(&pts, 1, 0, 100).unwrap();
        let mut mean = vec![0.0; 3];
        for p in &pts {
            p.add_scaled_to(&mut mean, 1.0);
        }
        let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (c, m) in model.centroids[0].iter().zip(&mean) {
            assert!((c - m / norm).abs() < 1e-12);
        }
    }

    #[test]
    fn antipodal_point_masses_are_split() {
        let e = UnitVector::basis(4, 1).unwrap();
        let pts: Vec<_> = (0..20).map(|i| if i % 2 == 0 { e.clone() } else { e.neg() }).collect();
        let truth = Partition::new((0..20).map(|i| i % 2).collect(), 2).unwrap();
        for s in 0..10 {
            let model = spherical_kmeans(&pts, 2, s, 100).unwrap();
            assert_eq!(adjusted_rand_index(&model.partition, &truth).unwrap(), 1.0);
        }
    }

    #[test]
    fn objective_is_non_decreasing() {
        for s in 0..20 {
            let pts = sample_uniform(5, 200, s).unwrap();
            let model = spherical_kmeans(&pts, 6, s, 100).unwrap();
            assert!(model.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{:?}", model.objective_trace);
            assert!(model.converged);
            assert!(model.partition.cluster_sizes().iter().all(|&c| c > 0));
        }
    }

    #[test]
    fn sparse_input_matches_dense() {
        let raw: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 3.0), (2, 1.0)],
            vec![(0, 2.0), (2, 1.5)],
            vec![(1, 4.0), (5, 1.0)],
            vec![(1, 2.0), (5, 2.0), (6, 0.5)],
            vec![(3, 1.0), (4, 1.0)],
            vec![(3, 2.0), (4, 1.0)],
        ];
        let sparse: Vec<_> = raw.iter().map(|r| SparseUnitVector::normalize(8, r.clone()).unwrap()).collect();
        let dense: Vec<_> = sparse.iter().map(SparseUnitVector::to_dense).collect();
        let a = spherical_kmeans(&sparse, 3, 2, 100).unwrap();
        let b = spherical_kmeans(&dense, 3, 2, 100).unwrap();
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn bounds() {
        let pts = sample_uniform(3, 5, 1).unwrap();
        assert!(spherical_kmeans(&pts, 0, 0, 10).is_err());
        assert!(spherical_kmeans(&pts, 6, 0, 10).is_err());
        assert!(spherical_kmeans::<UnitVector>(&[], 1, 0, 10).is_err());
    }
}
