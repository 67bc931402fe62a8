//! Depth-based medoids clustering.
//!
//! Starting from depth-weighted seeds, the algorithm alternates two steps
//! until the medoid set is stable:
//!
//! * **assign** every point to the medoid it is most depth-similar to;
//! * **refine** each cluster's medoid to its deepest member, i.e. the member
//!   with the largest mean similarity to the rest of the cluster.
//!
//! Both steps increase `J = Σ_i sim(x_i, m_label(i))`, which is recorded per
//! iteration in [`ClusterModel::objective_trace`].

mod init;
mod select;
mod silhouette;
mod skmeans;

use std::collections::HashSet;

use rayon::prelude::*;

pub use init::{init_medoids, Seeding};
pub use select::{select_k, Selection};
pub use silhouette::{silhouette, SilhouetteReport};
pub use skmeans::{spherical_kmeans, SphericalKMeans};

use crate::depth::{argmax_first, DepthKind, Similarity};
use crate::error::{invalid, Result};
use crate::partition::Partition;
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Independent seeded runs per `k`; the run with the largest objective wins.
    pub restarts: usize,
    pub seeding: Seeding,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 100, restarts: 10, seeding: Seeding::Depth }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub partition: Partition,
    /// `medoids[k]` is the sample index of cluster `k`'s depth-medoid.
    pub medoids: Vec<usize>,
    pub kind: DepthKind,
    pub objective_trace: Vec<f64>,
    /// Number of refinement steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Mean depth-similarity silhouette; `None` when `k < 2`.
    pub silhouette: Option<f64>,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.medoids.len()
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

/// Labels each point with its most similar medoid (lowest cluster index on
/// ties). Every medoid is labelled with its own cluster, so no cluster is
/// ever empty.
pub fn assign<S: Similarity + ?Sized>(sim: &S, medoids: &[usize]) -> Result<Partition> {
    let n = sim.len();
    if medoids.is_empty() {
        return Err(invalid("at least one medoid is required"));
    }
    let mut seen = HashSet::with_capacity(medoids.len());
    for &m in medoids {
        if m >= n {
            return Err(invalid(format!("medoid index {m} out of range for {n} points")));
        }
        if !seen.insert(m) {
            return Err(invalid(format!("medoid index {m} appears twice")));
        }
    }
    Ok(assign_unchecked(sim, medoids))
}

fn assign_unchecked<S: Similarity + ?Sized>(sim: &S, medoids: &[usize]) -> Partition {
    let mut labels: Vec<usize> = (0..sim.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0;
            let mut best_sim = sim.sim(i, medoids[0]);
            for (k, &m) in medoids.iter().enumerate().skip(1) {
                let s = sim.sim(i, m);
                if s > best_sim {
                    best = k;
                    best_sim = s;
                }
            }
            best
        })
        .collect();
    for (k, &m) in medoids.iter().enumerate() {
        labels[m] = k;
    }
    Partition::new_unchecked(labels, medoids.len())
}

/// Deepest member of each cluster (lowest sample index on ties).
pub fn refine<S: Similarity + ?Sized>(sim: &S, partition: &Partition) -> Result<Vec<usize>> {
    if partition.len() != sim.len() {
        return Err(crate::Error::LengthMismatch { left: partition.len(), right: sim.len() });
    }
    let members = partition.members();
    if members.iter().any(Vec::is_empty) {
        return Err(invalid("cannot refine a partition with an empty cluster"));
    }
    Ok(members.par_iter().map(|c| cluster_medoid(sim, c)).collect())
}

fn cluster_medoid<S: Similarity + ?Sized>(sim: &S, members: &[usize]) -> usize {
    let totals: Vec<f64> = members
        .iter()
        .map(|&i| members.iter().map(|&j| sim.sim(i, j)).sum())
        .collect();
    members[argmax_first(&totals)]
}

pub fn objective<S: Similarity + ?Sized>(sim: &S, partition: &Partition, medoids: &[usize]) -> f64 {
    partition
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| sim.sim(i, medoids[l]))
        .sum()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(invalid(format!("number of clusters must be in 1..={n}, got {k}")))
    } else {
        Ok(())
    }
}

/// One seeded assign/refine run. The silhouette is filled in for `k >= 2`.
pub fn fit<S: Similarity + ?Sized>(sim: &S, k: usize, seed: u64, options: &FitOptions) -> Result<ClusterModel> {
    let mut model = run(sim, k, seed, options)?;
    attach_silhouette(sim, &mut model)?;
    Ok(model)
}

/// Best of `options.restarts` runs by final objective (earliest run on ties).
pub fn fit_best<S: Similarity + ?Sized>(sim: &S, k: usize, seed: u64, options: &FitOptions) -> Result<ClusterModel> {
    check_k(k, sim.len())?;
    let restarts = options.restarts.max(1);
    let runs = (0..restarts)
        .into_par_iter()
        .map(|r| run(sim, k, seed::derive(seed, &[r as u64]), options))
        .collect::<Result<Vec<_>>>()?;
    let mut best = None::<ClusterModel>;
    for m in runs {
        if best.as_ref().is_none_or(|b| m.objective() > b.objective()) {
            best = Some(m);
        }
    }
    let mut model = best.expect("at least one restart");
    attach_silhouette(sim, &mut model)?;
    Ok(model)
}

fn attach_silhouette<S: Similarity + ?Sized>(sim: &S, model: &mut ClusterModel) -> Result<()> {
    model.silhouette = if model.k() >= 2 && sim.len() >= 2 {
        Some(silhouette(sim, &model.partition)?.mean)
    } else {
        None
    };
    Ok(())
}

fn run<S: Similarity + ?Sized>(sim: &S, k: usize, seed: u64, options: &FitOptions) -> Result<ClusterModel> {
    check_k(k, sim.len())?;
    let mut rng = seed::rng(seed);
    let mut medoids = init_medoids(sim, k, options.seeding, &mut rng)?;
    let mut partition = assign_unchecked(sim, &medoids);
    let mut current = objective(sim, &partition, &medoids);
    let mut trace = vec![current];
    // medoid sets visited without a strict gain; bounds tie cycles
    let mut plateau: HashSet<Vec<usize>> = HashSet::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iter {
        let next = refine(sim, &partition)?;
        iterations += 1;
        if next == medoids {
            converged = true;
            break;
        }
        let next_partition = assign_unchecked(sim, &next);
        let value = objective(sim, &next_partition, &next);
        if value > current {
            plateau.clear();
        } else {
            plateau.insert(medoids.clone());
            if plateau.contains(&next) {
                converged = true;
                break;
            }
        }
        medoids = next;
        partition = next_partition;
        current = value;
        trace.push(value);
    }

    Ok(ClusterModel {
        partition,
        medoids,
        kind: sim.kind(),
        objective_trace: trace,
        iterations,
        converged,
        silhouette: None,
    })
}
