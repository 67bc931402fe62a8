//! Factorial simulation study on mixtures of von Mises-Fisher clusters.
//!
//! The design crosses the number of clusters (2 to 5), the dimension (3, 5,
//! 10), the noise level (concentration range) and whether the cluster centers
//! obey a separation structure, with ten replicates per combination. Each
//! dataset is clustered once per depth kind with the number of clusters
//! chosen by silhouette, and scored by ARI against the generating labels.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::dbmca::{select_k, FitOptions};
use crate::depth::{depth_matrix, DepthKind};
use crate::error::{invalid, Error, Result};
use crate::partition::Partition;
use crate::seed::{self, Rng};
use crate::sphere::UnitVector;
use crate::validation::adjusted_rand_index;
use crate::vmf::{sample_with, uniform_point, VmfParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseLevel {
    Low,
    Medium,
    High,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 3] = [NoiseLevel::Low, NoiseLevel::Medium, NoiseLevel::High];

    /// Interval the per-cluster concentration is drawn from.
    pub fn kappa_range(self) -> (f64, f64) {
        match self {
            NoiseLevel::Low => (10.0, 12.0),
            NoiseLevel::Medium => (6.0, 8.0),
            NoiseLevel::High => (2.0, 4.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseLevel::Low => "low",
            NoiseLevel::Medium => "medium",
            NoiseLevel::High => "high",
        }
    }

    fn key(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(NoiseLevel::Low),
            "medium" => Ok(NoiseLevel::Medium),
            "high" => Ok(NoiseLevel::High),
            other => Err(invalid(format!("unknown noise level '{other}' (expected low, medium or high)"))),
        }
    }
}

pub fn draw_kappa(noise: NoiseLevel, seed: u64) -> f64 {
    draw_kappa_with(noise, &mut seed::rng(seed))
}

fn draw_kappa_with(noise: NoiseLevel, rng: &mut Rng) -> f64 {
    let (lo, hi) = noise.kappa_range();
    rng.random_range(lo..=hi)
}

/// Uniform draws allowed for one center slot over all placement attempts.
pub const CENTER_DRAW_CAP: u64 = 1_000_000;

/// Uniform draws for one center within a single attempt before the whole
/// configuration is redrawn from the first center.
pub const CENTER_STALL_DRAWS: u64 = 20_000;

const FAR: (f64, f64) = (1.7, 2.0);
const ORTHOGONAL: (f64, f64) = (0.8, 1.2);
const NEAR: (f64, f64) = (0.5, 0.8);

/// Cosine-distance bands `(earlier center, band)` that center `j` (0-based)
/// must satisfy in a structured configuration.
pub fn structured_constraints(j: usize) -> Vec<(usize, (f64, f64))> {
    match j {
        0 => vec![],
        1 => vec![(0, FAR)],
        2 => vec![(0, ORTHOGONAL), (1, ORTHOGONAL)],
        3 => vec![(2, FAR)],
        4 => (0..4).map(|i| (i, NEAR)).collect(),
        _ => unreachable!("structured designs have at most five centers"),
    }
}

fn in_band(cos_dist: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&cos_dist)
}

/// Centers with prescribed pairwise separations.
///
/// The first center is uniform. Every later center is drawn uniformly and
/// kept only when its cosine distances to the earlier centers fall in the
/// bands of [`structured_constraints`]. Some configurations of the first
/// centers leave no room for the later ones, so a center that is not found
/// within [`CENTER_STALL_DRAWS`] draws restarts the configuration.
pub fn place_structured_centers(k: usize, dim: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if !(2..=5).contains(&k) {
        return Err(invalid(format!("structured designs need 2 to 5 centers, got {k}")));
    }
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    let mut rng = seed::rng(seed);
    let mut used = vec![0u64; k];
    let mut buf = vec![0.0; dim];
    'attempt: loop {
        let mut centers: Vec<Vec<f64>> = vec![uniform_point(dim, &mut rng).into_inner()];
        for j in 1..k {
            let constraints = structured_constraints(j);
            let mut stalled = 0;
            loop {
                if used[j] == CENTER_DRAW_CAP {
                    return Err(Error::InfeasibleConstraint { center: j + 1, attempts: CENTER_DRAW_CAP as usize });
                }
                if stalled == CENTER_STALL_DRAWS {
                    continue 'attempt;
                }
                used[j] += 1;
                stalled += 1;
                if !fill_uniform(&mut buf, &mut rng) {
                    continue;
                }
                let ok = constraints.iter().all(|&(i, band)| {
                    let c: f64 = centers[i].iter().zip(&buf).map(|(a, b)| a * b).sum();
                    in_band(1.0 - c, band)
                });
                if ok {
                    centers.push(buf.clone());
                    break;
                }
            }
        }
        return centers
            .into_iter()
            .map(UnitVector::new)
            .collect();
    }
}

// Gaussian direction written in place; false for a (practically impossible)
// zero vector.
fn fill_uniform(buf: &mut [f64], rng: &mut Rng) -> bool {
    for v in buf.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    buf.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Checks a structured configuration against its bands; returns the first
/// violated `(center, earlier center)` pair, both 0-based.
pub fn verify_structured_centers(centers: &[UnitVector]) -> std::result::Result<(), (usize, usize)> {
    for j in 1..centers.len().min(5) {
        for (i, band) in structured_constraints(j) {
            let c: f64 = centers[i].as_slice().iter().zip(centers[j].as_slice()).map(|(a, b)| a * b).sum();
            if !in_band(1.0 - c, band) {
                return Err((j, i));
            }
        }
    }
    Ok(())
}

/// `k` independent uniform centers.
pub fn place_unstructured_centers(k: usize, dim: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if k == 0 {
        return Err(invalid("at least one center is required"));
    }
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    let mut rng = seed::rng(seed);
    Ok((0..k).map(|_| uniform_point(dim, &mut rng)).collect())
}

pub const DEFAULT_SAMPLE_SIZE: usize = 500;
pub const REPLICATES: usize = 10;
pub const CLUSTER_LEVELS: [usize; 4] = [2, 3, 4, 5];
pub const DIM_LEVELS: [usize; 3] = [3, 5, 10];

/// One dataset of the design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimCell {
    pub n_clusters: usize,
    pub dim: usize,
    pub noise: NoiseLevel,
    pub structured: bool,
    pub replicate: usize,
    pub sample_size: usize,
}

impl SimCell {
    pub fn new(n_clusters: usize, dim: usize, noise: NoiseLevel, structured: bool, replicate: usize) -> Self {
        Self { n_clusters, dim, noise, structured, replicate, sample_size: DEFAULT_SAMPLE_SIZE }
    }

    pub fn id(&self) -> String {
        format!(
            "k{}-d{}-{}-{}-r{}",
            self.n_clusters,
            self.dim,
            self.noise,
            if self.structured { "s" } else { "u" },
            self.replicate
        )
    }

    /// Seed of the dataset, a hash of the master seed and the design factors.
    pub fn dataset_seed(&self, master_seed: u64) -> u64 {
        seed::derive(
            master_seed,
            &[
                self.n_clusters as u64,
                self.dim as u64,
                self.noise.key(),
                self.structured as u64,
                self.replicate as u64,
            ],
        )
    }

    fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || (self.structured && self.n_clusters > 5) {
            return Err(invalid(format!("unsupported number of clusters {}", self.n_clusters)));
        }
        if self.dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {}", self.dim)));
        }
        if self.sample_size < self.n_clusters {
            return Err(invalid("sample size is smaller than the number of clusters"));
        }
        Ok(())
    }
}

/// All 720 cells, ordered by clusters, dimension, noise, structure (structured
/// first) and replicate.
pub fn full_design() -> Vec<SimCell> {
    let mut cells = Vec::with_capacity(720);
    for &k in &CLUSTER_LEVELS {
        for &d in &DIM_LEVELS {
            for noise in NoiseLevel::ALL {
                for structured in [true, false] {
                    for r in 0..REPLICATES {
                        cells.push(SimCell::new(k, d, noise, structured, r));
                    }
                }
            }
        }
    }
    cells
}

/// Seeded subsample of `round(fraction · |design|)` cells, kept in design order.
pub fn subsample_design(design: &[SimCell], fraction: f64, seed: u64) -> Result<Vec<SimCell>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let m = ((design.len() as f64 * fraction).round() as usize).max(1).min(design.len());
    let mut idx: Vec<usize> = (0..design.len()).collect();
    idx.shuffle(&mut seed::rng(seed));
    let mut keep = idx[..m].to_vec();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| design[i]).collect())
}

/// Conjunction of `factor=value` terms, e.g. `dim=3,noise=low,structured=true`.
/// Recognised factors: `clusters`, `dim`, `noise`, `structured`, `replicate`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DesignFilter {
    pub n_clusters: Option<usize>,
    pub dim: Option<usize>,
    pub noise: Option<NoiseLevel>,
    pub structured: Option<bool>,
    pub replicate: Option<usize>,
}

impl DesignFilter {
    pub fn matches(&self, cell: &SimCell) -> bool {
        self.n_clusters.is_none_or(|v| v == cell.n_clusters)
            && self.dim.is_none_or(|v| v == cell.dim)
            && self.noise.is_none_or(|v| v == cell.noise)
            && self.structured.is_none_or(|v| v == cell.structured)
            && self.replicate.is_none_or(|v| v == cell.replicate)
    }

    pub fn apply(&self, design: &[SimCell]) -> Vec<SimCell> {
        design.iter().filter(|c| self.matches(c)).copied().collect()
    }
}

impl FromStr for DesignFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = DesignFilter::default();
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = term
                .split_once('=')
                .ok_or_else(|| invalid(format!("filter term '{term}' is not of the form factor=value")))?;
            let value = value.trim();
            let int = |v: &str| v.parse::<usize>().map_err(|_| invalid(format!("'{v}' is not an integer in '{term}'")));
            match key.trim() {
                "clusters" | "k" | "n_clusters" => f.n_clusters = Some(int(value)?),
                "dim" | "d" => f.dim = Some(int(value)?),
                "noise" => f.noise = Some(value.parse()?),
                "structured" => {
                    f.structured = Some(match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(invalid(format!("'{value}' is not a boolean in '{term}'"))),
                    })
                }
                "replicate" => f.replicate = Some(int(value)?),
                other => return Err(invalid(format!("unknown design factor '{other}'"))),
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimDataset {
    pub points: Vec<UnitVector>,
    pub true_labels: Partition,
    pub centers: Vec<UnitVector>,
    pub kappas: Vec<f64>,
}

/// Symmetric Dirichlet concentration of the cluster proportions.
pub const PROPORTION_ALPHA: f64 = 5.0;

/// Deterministic dataset for `cell`.
///
/// Proportions come from a symmetric Dirichlet and are redrawn until every
/// cluster holds at least half its balanced share `1/(2K)`; sizes are then
/// rounded by largest remainder. Each cluster gets its own concentration
/// from the noise range. Points are shuffled so labels are not sorted.
pub fn generate_dataset(cell: &SimCell, master_seed: u64) -> Result<SimDataset> {
    cell.validate()?;
    let base = cell.dataset_seed(master_seed);
    let k = cell.n_clusters;
    let centers = if cell.structured {
        place_structured_centers(k, cell.dim, seed::derive(base, &[0]))?
    } else {
        place_unstructured_centers(k, cell.dim, seed::derive(base, &[0]))?
    };
    let proportions = draw_proportions(k, &mut seed::rng(seed::derive(base, &[1])));
    let sizes = largest_remainder(&proportions, cell.sample_size);
    let mut kappa_rng = seed::rng(seed::derive(base, &[2]));
    let kappas: Vec<f64> = (0..k).map(|_| draw_kappa_with(cell.noise, &mut kappa_rng)).collect();

    let mut point_rng = seed::rng(seed::derive(base, &[3]));
    let mut tagged = Vec::with_capacity(cell.sample_size);
    for (c, (&size, &kappa)) in sizes.iter().zip(&kappas).enumerate() {
        let params = VmfParams::new(centers[c].clone(), kappa)?;
        tagged.extend(sample_with(&params, size, &mut point_rng).into_iter().map(|x| (c, x)));
    }
    tagged.shuffle(&mut seed::rng(seed::derive(base, &[4])));
    let (labels, points): (Vec<usize>, Vec<UnitVector>) = tagged.into_iter().unzip();
    Ok(SimDataset { points, true_labels: Partition::new(labels, k)?, centers, kappas })
}

fn draw_proportions(k: usize, rng: &mut Rng) -> Vec<f64> {
    let gamma = Gamma::new(PROPORTION_ALPHA, 1.0).expect("valid gamma parameters");
    let floor = 0.5 / k as f64;
    loop {
        let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        let p: Vec<f64> = g.iter().map(|v| v / total).collect();
        if p.iter().all(|&v| v >= floor) {
            return p;
        }
    }
}

fn largest_remainder(p: &[f64], n: usize) -> Vec<usize> {
    let raw: Vec<f64> = p.iter().map(|v| v * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let missing = n - sizes.iter().sum::<usize>();
    for &i in order.iter().cycle().take(missing) {
        sizes[i] += 1;
    }
    sizes
}

/// Silhouette and ARI of the model fitted at one candidate `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct KScore {
    pub k: usize,
    pub mean_silhouette: f64,
    pub ari: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutcome {
    pub selected_k: usize,
    pub ari_at_selected_k: f64,
    pub ari_at_true_k: f64,
    pub mean_silhouette: f64,
    pub per_k: Vec<KScore>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub cell: SimCell,
    pub kind: DepthKind,
    /// Error message of a failed cell.
    pub outcome: std::result::Result<SimOutcome, String>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyOptions {
    pub kinds: Vec<DepthKind>,
    pub k_range: Vec<usize>,
    pub fit: FitOptions,
    /// Worker threads; 0 uses all logical cores.
    pub workers: usize,
    /// Wall-clock timings make the output run-dependent, so by default the
    /// `runtime_ms` column is written as 0.
    pub record_runtime: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            kinds: DepthKind::ALL.to_vec(),
            k_range: (2..=10).collect(),
            fit: FitOptions::default(),
            workers: 0,
            record_runtime: false,
        }
    }
}

pub const RESULT_HEADER: [&str; 13] = [
    "cell_id",
    "n_clusters",
    "dim",
    "noise",
    "structured",
    "replicate",
    "depth_kind",
    "selected_k",
    "ari_selected",
    "ari_true_k",
    "mean_silhouette",
    "runtime_ms",
    "error",
];

pub const PER_K_HEADER: [&str; 5] = ["cell_id", "depth_kind", "k", "mean_silhouette", "ari"];

/// CSV sinks for [`run_study`]. Rows are flushed after every chunk of cells.
pub struct StudySinks<'a> {
    pub results: Option<&'a mut dyn Write>,
    pub per_k: Option<&'a mut dyn Write>,
}

impl StudySinks<'_> {
    pub fn none() -> Self {
        StudySinks { results: None, per_k: None }
    }
}

/// Runs every `(cell, kind)` pair and returns the results in design order.
///
/// Cells run in parallel on a pool of `options.workers` threads; rows are
/// written in design order regardless of completion order, so output depends
/// only on the design, the options and `master_seed`. A failing cell yields
/// rows with the error column set and does not stop the sweep.
pub fn run_study(
    design: &[SimCell],
    options: &StudyOptions,
    master_seed: u64,
    sinks: StudySinks<'_>,
) -> Result<Vec<SimResult>> {
    if design.is_empty() {
        return Err(invalid("empty design"));
    }
    if options.kinds.is_empty() {
        return Err(invalid("no depth kinds requested"));
    }
    if options.k_range.is_empty() || options.k_range.iter().any(|&k| k < 2) {
        return Err(invalid("candidate k values must all be at least 2"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;

    let mut results_csv = sinks.results.map(csv::Writer::from_writer);
    let mut per_k_csv = sinks.per_k.map(csv::Writer::from_writer);
    if let Some(w) = results_csv.as_mut() {
        w.write_record(RESULT_HEADER).map_err(csv_err)?;
    }
    if let Some(w) = per_k_csv.as_mut() {
        w.write_record(PER_K_HEADER).map_err(csv_err)?;
    }

    let chunk = (pool.current_num_threads() * 2).max(1);
    let mut all = Vec::with_capacity(design.len() * options.kinds.len());
    for cells in design.chunks(chunk) {
        let batch: Vec<Vec<SimResult>> = pool.install(|| {
            use rayon::prelude::*;
            cells.par_iter().map(|cell| run_cell(cell, options, master_seed)).collect()
        });
        for r in batch.into_iter().flatten() {
            if let Some(w) = results_csv.as_mut() {
                w.write_record(result_record(&r)).map_err(csv_err)?;
            }
            if let (Some(w), Ok(o)) = (per_k_csv.as_mut(), &r.outcome) {
                for s in &o.per_k {
                    w.write_record([
                        r.cell.id(),
                        r.kind.as_str().to_string(),
                        s.k.to_string(),
                        s.mean_silhouette.to_string(),
                        s.ari.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            all.push(r);
        }
        if let Some(w) = results_csv.as_mut() {
            w.flush()?;
        }
        if let Some(w) = per_k_csv.as_mut() {
            w.flush()?;
        }
    }
    Ok(all)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => invalid(format!("csv output: {other:?}")),
    }
}

fn result_record(r: &SimResult) -> Vec<String> {
    let c = &r.cell;
    let mut row = vec![
        c.id(),
        c.n_clusters.to_string(),
        c.dim.to_string(),
        c.noise.to_string(),
        c.structured.to_string(),
        c.replicate.to_string(),
        r.kind.as_str().to_string(),
    ];
    match &r.outcome {
        Ok(o) => row.extend([
            o.selected_k.to_string(),
            o.ari_at_selected_k.to_string(),
            o.ari_at_true_k.to_string(),
            o.mean_silhouette.to_string(),
            r.runtime_ms.to_string(),
            String::new(),
        ]),
        Err(msg) => row.extend([String::new(), String::new(), String::new(), String::new(), r.runtime_ms.to_string(), msg.clone()]),
    }
    row
}

/// All depth kinds for a single cell, sharing one generated dataset.
pub fn run_cell(cell: &SimCell, options: &StudyOptions, master_seed: u64) -> Vec<SimResult> {
    let started = Instant::now();
    let elapsed = |since: Instant| if options.record_runtime { since.elapsed().as_millis() as u64 } else { 0 };
    let data = match generate_dataset(cell, master_seed) {
        Ok(d) => d,
        Err(e) => {
            let ms = elapsed(started);
            return options
                .kinds
                .iter()
                .map(|&kind| SimResult { cell: *cell, kind, outcome: Err(e.to_string()), runtime_ms: ms })
                .collect();
        }
    };
    let cluster_seed = seed::derive(cell.dataset_seed(master_seed), &[5]);
    options
        .kinds
        .iter()
        .map(|&kind| {
            let t = Instant::now();
            let outcome = score_kind(&data, kind, options, seed::derive(cluster_seed, &[kind as u64])).map_err(|e| e.to_string());
            SimResult { cell: *cell, kind, outcome, runtime_ms: elapsed(t) }
        })
        .collect()
}

fn score_kind(data: &SimDataset, kind: DepthKind, options: &StudyOptions, seed: u64) -> Result<SimOutcome> {
    let n = data.points.len();
    let k_range: Vec<usize> = options.k_range.iter().copied().filter(|&k| k <= n).collect();
    if k_range.is_empty() {
        return Err(invalid("no candidate k fits the sample size"));
    }
    let sim = depth_matrix(&data.points, kind)?;
    let selection = select_k(&sim, &k_range, seed, &options.fit)?;
    let per_k = selection
        .models
        .iter()
        .map(|m| {
            Ok(KScore {
                k: m.k(),
                mean_silhouette: m.silhouette.expect("k >= 2"),
                ari: adjusted_rand_index(&m.partition, &data.true_labels)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = selection.best();
    let ari_at_selected_k = adjusted_rand_index(&best.partition, &data.true_labels)?;
    let true_k = data.true_labels.k();
    let ari_at_true_k = match per_k.iter().find(|s| s.k == true_k) {
        Some(s) => s.ari,
        None => {
            let m = crate::dbmca::fit_best(&sim, true_k, seed::derive(seed, &[true_k as u64]), &options.fit)?;
            adjusted_rand_index(&m.partition, &data.true_labels)?
        }
    };
    Ok(SimOutcome {
        selected_k: selection.best_k,
        ari_at_selected_k,
        ari_at_true_k,
        mean_silhouette: best.silhouette.expect("k >= 2"),
        per_k,
    })
}
