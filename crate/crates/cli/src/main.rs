mod io;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spheredepth::dbmca::{fit_best, select_k, silhouette, spherical_kmeans, FitOptions, Seeding};
use spheredepth::depth::{region_from_depths, sample_depths, SimilarityStore};
use spheredepth::simharness::{
    full_design, generate_dataset, run_study, subsample_design, DesignFilter, NoiseLevel, SimCell, StudyOptions,
    StudySinks,
};
use spheredepth::validation::{aci, adjusted_rand_index, ndc, rand_index, FuzzyPartition};
use spheredepth::vmf::{sample, VmfParams};
use spheredepth::{DepthKind, Partition, SpherePoint, UnitVector};

use crate::io::{format_row, open_output, read_clustering, read_label_file, read_points, write_header, Clustering, Points};

#[derive(Parser, Debug)]
#[command(name = "spheredepth", version, about = "Depth-based clustering of directional data")]
struct Cli {
    /// Worker threads (0 = all logical cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw synthetic points.
    Generate {
        #[command(subcommand)]
        source: GenerateSource,
    },
    /// Cluster points with depth-based medoids or spherical k-means.
    Cluster(ClusterArgs),
    /// Silhouette curve over a range of cluster counts.
    SelectK(SelectKArgs),
    /// Per-point sample depths.
    Depth(DepthArgs),
    /// Agreement indices between two clusterings.
    Validate(ValidateArgs),
    /// Run the factorial simulation study.
    Simulate(SimulateArgs),
    /// Sparsity and class-frequency summary of a document-term dataset.
    IngestReport(IngestArgs),
}

#[derive(Subcommand, Debug)]
enum GenerateSource {
    /// i.i.d. von Mises-Fisher sample.
    Vmf(VmfArgs),
    /// One dataset of the simulation design.
    Cell(CellArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    #[arg(long, env = "SPHEREDEPTH_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VmfArgs {
    #[arg(long = "d")]
    dim: usize,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    n: usize,
    /// Mean direction as comma-separated coordinates (default: last basis vector).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Option<Vec<f64>>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CellArgs {
    #[arg(long)]
    clusters: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    noise: NoiseArg,
    #[arg(long)]
    structured: bool,
    #[arg(long, default_value_t = 0)]
    replicate: usize,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the generating cluster of each point.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseArg {
    Low,
    Medium,
    High,
}

impl From<NoiseArg> for NoiseLevel {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Low => NoiseLevel::Low,
            NoiseArg::Medium => NoiseLevel::Medium,
            NoiseArg::High => NoiseLevel::High,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Arc,
    Cosine,
    Chord,
}

impl From<KindArg> for DepthKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Arc => DepthKind::Arc,
            KindArg::Cosine => DepthKind::Cosine,
            KindArg::Chord => DepthKind::Chord,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedingArg {
    Depth,
    Spread,
    Uniform,
}

impl From<SeedingArg> for Seeding {
    fn from(s: SeedingArg) -> Self {
        match s {
            SeedingArg::Depth => Seeding::Depth,
            SeedingArg::Spread => Seeding::Spread,
            SeedingArg::Uniform => Seeding::Uniform,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Dbmca,
    Skmeans,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct KRange(Vec<usize>);

fn parse_k_range(s: &str) -> std::result::Result<KRange, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("'{s}' is not of the form LOW:HIGH"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("'{a}' is not an integer"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("'{b}' is not an integer"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok(KRange((lo..=hi).collect()))
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Cosine)]
    depth: KindArg,
    #[arg(long, value_enum, default_value_t = SeedingArg::Depth)]
    seeding: SeedingArg,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[command(flatten)]
    seed: SeedArg,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        FitOptions { max_iter: self.max_iter, restarts: self.restarts, seeding: self.seeding.into() }
    }
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Dbmca)]
    method: Method,
    #[arg(long, conflicts_with = "k_range", required_unless_present = "k_range")]
    k: Option<usize>,
    /// Candidate cluster counts `LOW:HIGH`; the best silhouette wins.
    #[arg(long, value_parser = parse_k_range)]
    k_range: Option<KRange>,
    #[command(flatten)]
    fit: FitArgs,
    /// Reference labels; adds RI and ARI to the summary.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "cluster-out")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SelectKArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_k_range, default_value = "2:10")]
    k_range: KRange,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DepthArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Cosine)]
    depth: KindArg,
    /// Adds an `in_region` column for the α-depth region.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Crisp labels (one per line) or membership rows (comma-separated).
    left: PathBuf,
    right: PathBuf,
    /// Permutations for the chance-adjusted concordance index.
    #[arg(long, default_value_t = 100)]
    n_perm: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Design subset, e.g. `dim=3,noise=low,clusters=2,structured=true`.
    #[arg(long, default_value = "")]
    filter: String,
    /// Seeded fraction of the (filtered) design to run.
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [KindArg::Arc, KindArg::Cosine, KindArg::Chord])]
    kinds: Vec<KindArg>,
    #[arg(long, value_parser = parse_k_range, default_value = "2:10")]
    k_range: KRange,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Fill the runtime_ms column with wall-clock timings (output is then no
    /// longer reproducible byte for byte).
    #[arg(long)]
    record_runtime: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-form per-k silhouette and ARI table.
    #[arg(long)]
    per_k_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid parameter values detected after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .context("cannot start worker pool")?;
    match cli.command {
        Command::Generate { source: GenerateSource::Vmf(a) } => generate_vmf(&a),
        Command::Generate { source: GenerateSource::Cell(a) } => generate_cell(&a),
        Command::Cluster(a) => cluster(&a),
        Command::SelectK(a) => select(&a),
        Command::Depth(a) => depth(&a),
        Command::Validate(a) => validate(&a),
        Command::Simulate(a) => simulate(&a, cli.workers),
        Command::IngestReport(a) => ingest_report(&a),
    }
}

fn write_points(w: &mut dyn Write, points: &[UnitVector]) -> Result<()> {
    for p in points {
        writeln!(w, "{}", format_row(p.as_slice()))?;
    }
    Ok(())
}

fn generate_vmf(a: &VmfArgs) -> Result<()> {
    if a.dim < 2 {
        return Err(usage("--d must be at least 2"));
    }
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    if !(a.kappa >= 0.0 && a.kappa.is_finite()) {
        return Err(usage("--kappa must be a finite non-negative number"));
    }
    let mu = match &a.mu {
        Some(v) if v.len() != a.dim => return Err(usage(format!("--mu has {} coordinates, --d is {}", v.len(), a.dim))),
        Some(v) => spheredepth::sphere::normalize(v).map_err(|e| usage(format!("--mu: {e}")))?,
        None => UnitVector::basis(a.dim, a.dim - 1)?,
    };
    let params = VmfParams::new(mu, a.kappa)?;
    let points = sample(&params, a.n, a.seed.seed)?;
    let mut w = open_output(a.out.as_ref())?;
    write_header(&mut w, "generate vmf", &format!("{a:?}"))?;
    write_points(&mut w, &points)?;
    w.flush()?;
    Ok(())
}

fn generate_cell(a: &CellArgs) -> Result<()> {
    if !(2..=5).contains(&a.clusters) && a.structured {
        return Err(usage("structured cells need --clusters between 2 and 5"));
    }
    if a.clusters == 0 || a.dim < 2 || a.n < a.clusters {
        return Err(usage("need --clusters >= 1, --dim >= 2 and --n >= --clusters"));
    }
    let cell = SimCell { sample_size: a.n, ..SimCell::new(a.clusters, a.dim, a.noise.into(), a.structured, a.replicate) };
    let data = generate_dataset(&cell, a.seed.seed)?;
    let config = format!("{a:?}");
    let mut w = open_output(a.out.as_ref())?;
    write_header(&mut w, "generate cell", &config)?;
    write_points(&mut w, &data.points)?;
    w.flush()?;
    if let Some(path) = &a.labels_out {
        let mut lw = open_output(Some(path))?;
        write_header(&mut lw, "generate cell", &config)?;
        for l in data.true_labels.labels() {
            writeln!(lw, "{l}")?;
        }
        lw.flush()?;
    }
    Ok(())
}

/// Result of clustering at one `k`, independent of the method.
struct Fitted {
    partition: Partition,
    /// Medoid indices (DBMCA) or centroid coordinates (spherical k-means).
    representatives: Representatives,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    silhouette: Option<f64>,
}

enum Representatives {
    Medoids(Vec<usize>),
    Centroids(Vec<Vec<f64>>),
}

fn fit_one<P: SpherePoint>(
    points: &[P],
    sim: &SimilarityStore<'_, P>,
    method: Method,
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<Fitted> {
    match method {
        Method::Dbmca => {
            let m = fit_best(sim, k, seed, opts)?;
            Ok(Fitted {
                partition: m.partition,
                representatives: Representatives::Medoids(m.medoids),
                trace: m.objective_trace,
                iterations: m.iterations,
                converged: m.converged,
                silhouette: m.silhouette,
            })
        }
        Method::Skmeans => {
            let m = spherical_kmeans(points, k, seed, opts.max_iter)?;
            let silhouette = if k >= 2 { Some(silhouette(sim, &m.partition)?.mean) } else { None };
            Ok(Fitted {
                partition: m.partition,
                representatives: Representatives::Centroids(m.centroids),
                trace: m.objective_trace,
                iterations: m.iterations,
                converged: m.converged,
                silhouette,
            })
        }
    }
}

fn cluster(a: &ClusterArgs) -> Result<()> {
    let points = read_points(&a.input)?;
    let truth = a.truth.as_deref().map(read_label_file).transpose()?;
    if let Some(t) = &truth {
        if t.labels.len() != points.len() {
            bail!("--truth has {} labels for {} points", t.labels.len(), points.len());
        }
    }
    let config = format!("{a:?}");
    match &points {
        Points::Dense(p) => cluster_points(p, a, truth.as_ref().map(|t| &t.partition), &config),
        Points::Sparse(p) => cluster_points(p, a, truth.as_ref().map(|t| &t.partition), &config),
    }
}

fn cluster_points<P: SpherePoint>(points: &[P], a: &ClusterArgs, truth: Option<&Partition>, config: &str) -> Result<()> {
    let n = points.len();
    let candidates = match (&a.k, &a.k_range) {
        (Some(k), _) => vec![*k],
        (None, Some(r)) => r.0.clone(),
        (None, None) => unreachable!("clap requires one of --k and --k-range"),
    };
    if let Some(&bad) = candidates.iter().find(|&&k| k == 0 || k > n) {
        bail!("k = {bad} is not in 1..={n} for {n} points");
    }
    if a.k_range.is_some() && candidates.iter().any(|&k| k < 2) {
        return Err(usage("--k-range needs every k >= 2 (the silhouette is undefined for one cluster)"));
    }
    let kind: DepthKind = a.fit.depth.into();
    let sim = SimilarityStore::build(points, kind)?;
    let opts = a.fit.options();
    let fits = candidates
        .iter()
        .map(|&k| fit_one(points, &sim, a.method, k, spheredepth::seed::derive(a.fit.seed.seed, &[k as u64]), &opts))
        .collect::<Result<Vec<_>>>()?;
    let best = if fits.len() == 1 {
        0
    } else {
        let mut best = 0;
        for (i, f) in fits.iter().enumerate() {
            if f.silhouette.unwrap_or(f64::NEG_INFINITY) > fits[best].silhouette.unwrap_or(f64::NEG_INFINITY) {
                best = i;
            }
        }
        best
    };
    let chosen = &fits[best];

    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let out = |name: &str| Some(a.out_dir.join(name));

    let mut w = open_output(out("labels.txt").as_ref())?;
    write_header(&mut w, "cluster", config)?;
    for l in chosen.partition.labels() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;

    let mut w = open_output(out(match chosen.representatives {
        Representatives::Medoids(_) => "medoids.csv",
        Representatives::Centroids(_) => "centroids.csv",
    }).as_ref())?;
    write_header(&mut w, "cluster", config)?;
    match &chosen.representatives {
        Representatives::Medoids(m) => {
            writeln!(w, "cluster,index")?;
            for (c, i) in m.iter().enumerate() {
                writeln!(w, "{c},{i}")?;
            }
        }
        Representatives::Centroids(cs) => {
            for c in cs {
                writeln!(w, "{}", format_row(c))?;
            }
        }
    }
    w.flush()?;

    let mut w = open_output(out("trace.csv").as_ref())?;
    write_header(&mut w, "cluster", config)?;
    writeln!(w, "step,objective")?;
    for (s, v) in chosen.trace.iter().enumerate() {
        writeln!(w, "{s},{v}")?;
    }
    w.flush()?;

    let mut w = open_output(out("summary.csv").as_ref())?;
    write_header(&mut w, "cluster", config)?;
    writeln!(w, "k,selected,mean_silhouette,objective,iterations,converged,ri,ari")?;
    let mut report = Vec::new();
    for (i, f) in fits.iter().enumerate() {
        let (ri, ari) = match truth {
            Some(t) => (rand_index(&f.partition, t)?.to_string(), adjusted_rand_index(&f.partition, t)?.to_string()),
            None => (String::new(), String::new()),
        };
        let line = format!(
            "{},{},{},{},{},{},{ri},{ari}",
            f.partition.k(),
            i == best,
            f.silhouette.map(|s| s.to_string()).unwrap_or_default(),
            f.trace.last().copied().unwrap_or(f64::NAN),
            f.iterations,
            f.converged,
        );
        writeln!(w, "{line}")?;
        report.push(line);
    }
    w.flush()?;

    println!("k,selected,mean_silhouette,objective,iterations,converged,ri,ari");
    for line in report {
        println!("{line}");
    }
    Ok(())
}

fn select(a: &SelectKArgs) -> Result<()> {
    if a.k_range.0.iter().any(|&k| k < 2) {
        return Err(usage("--k-range needs every k >= 2"));
    }
    let points = read_points(&a.input)?;
    let config = format!("{a:?}");
    match &points {
        Points::Dense(p) => select_points(p, a, &config),
        Points::Sparse(p) => select_points(p, a, &config),
    }
}

fn select_points<P: SpherePoint>(points: &[P], a: &SelectKArgs, config: &str) -> Result<()> {
    let sim = SimilarityStore::build(points, a.fit.depth.into())?;
    let sel = select_k(&sim, &a.k_range.0, a.fit.seed.seed, &a.fit.options())?;
    let mut w = open_output(a.out.as_ref())?;
    write_header(&mut w, "select-k", config)?;
    writeln!(w, "k,mean_silhouette,objective,selected")?;
    for m in &sel.models {
        writeln!(w, "{},{},{},{}", m.k(), m.silhouette.unwrap_or(f64::NAN), m.objective(), m.k() == sel.best_k)?;
    }
    w.flush()?;
    Ok(())
}

fn depth(a: &DepthArgs) -> Result<()> {
    if let Some(alpha) = a.alpha {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(usage("--alpha must be positive"));
        }
    }
    let points = read_points(&a.input)?;
    let kind: DepthKind = a.depth.into();
    let depths = match &points {
        Points::Dense(p) => sample_depths(p, kind)?,
        Points::Sparse(p) => sample_depths(p, kind)?,
    };
    let region = a.alpha.map(|alpha| region_from_depths(&depths, alpha));
    let mut w = open_output(a.out.as_ref())?;
    write_header(&mut w, "depth", &format!("{a:?}"))?;
    match &region {
        Some(r) => {
            let mut inside = vec![false; depths.len()];
            r.member_indices.iter().for_each(|&i| inside[i] = true);
            writeln!(w, "index,depth,in_region")?;
            for (i, d) in depths.iter().enumerate() {
                writeln!(w, "{i},{d},{}", inside[i])?;
            }
        }
        None => {
            writeln!(w, "index,depth")?;
            for (i, d) in depths.iter().enumerate() {
                writeln!(w, "{i},{d}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn validate(a: &ValidateArgs) -> Result<()> {
    let left = read_clustering(&a.left)?;
    let right = read_clustering(&a.right)?;
    let mut rows: Vec<(&str, f64)> = Vec::new();
    let fuzzy = |c: &Clustering| match c {
        Clustering::Crisp(l) => FuzzyPartition::from_crisp(&l.partition),
        Clustering::Fuzzy(f) => f.clone(),
    };
    if let (Clustering::Crisp(l), Clustering::Crisp(r)) = (&left, &right) {
        rows.push(("ri", rand_index(&l.partition, &r.partition)?));
        rows.push(("ari", adjusted_rand_index(&l.partition, &r.partition)?));
    }
    let (g, h) = (fuzzy(&left), fuzzy(&right));
    rows.push(("ndc", ndc(&g, &h)?));
    match aci(&g, &h, a.n_perm, a.seed.seed) {
        Ok(v) => rows.push(("aci", v)),
        Err(spheredepth::Error::DegenerateAdjustment { .. }) => rows.push(("aci", f64::NAN)),
        Err(e) => return Err(e.into()),
    }
    let mut w = open_output(None)?;
    write_header(&mut w, "validate", &format!("{a:?}"))?;
    writeln!(w, "index,value")?;
    for (name, v) in rows {
        writeln!(w, "{name},{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(a: &SimulateArgs, workers: usize) -> Result<()> {
    let filter: DesignFilter = a.filter.parse().map_err(|e| usage(format!("--filter: {e}")))?;
    let mut design = filter.apply(&full_design());
    if let Some(f) = a.subsample {
        design = subsample_design(&design, f, a.seed.seed).map_err(|e| usage(format!("--subsample: {e}")))?;
    }
    if design.is_empty() {
        return Err(usage("the filter selects no design cells"));
    }
    if a.k_range.0.iter().any(|&k| k < 2) {
        return Err(usage("--k-range needs every k >= 2"));
    }
    let options = StudyOptions {
        kinds: a.kinds.iter().map(|&k| k.into()).collect(),
        k_range: a.k_range.0.clone(),
        fit: FitOptions { restarts: a.restarts, ..FitOptions::default() },
        workers,
        record_runtime: a.record_runtime,
    };
    let config = format!("{a:?}");
    let mut out = open_output(a.out.as_ref())?;
    write_header(&mut out, "simulate", &config)?;
    let mut per_k = a.per_k_out.as_ref().map(|p| open_output(Some(p))).transpose()?;
    if let Some(w) = per_k.as_mut() {
        write_header(w, "simulate", &config)?;
    }
    let results = run_study(
        &design,
        &options,
        a.seed.seed,
        StudySinks { results: Some(&mut out), per_k: per_k.as_mut().map(|w| w as &mut dyn Write) },
    )?;
    out.flush()?;
    if let Some(w) = per_k.as_mut() {
        w.flush()?;
    }
    let failed = results.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see the error column", results.len());
    }
    if failed == results.len() {
        bail!("every run failed");
    }
    Ok(())
}

fn ingest_report(a: &IngestArgs) -> Result<()> {
    let m = spheredepth::ingest::read_cluto_matrix(&a.matrix).with_context(|| format!("in {}", a.matrix.display()))?;
    let labels = a.labels.as_deref().map(|p| read_label_for(p, m.n_rows)).transpose()?;
    let mut w = open_output(a.out.as_ref())?;
    write_header(&mut w, "ingest-report", &format!("{a:?}"))?;
    writeln!(w, "rows,cols,nnz,zero_fraction,empty_rows")?;
    let empty = m.rows.iter().filter(|r| r.iter().all(|&(_, v)| v == 0.0)).count();
    writeln!(w, "{},{},{},{},{empty}", m.n_rows, m.n_cols, m.nnz(), m.zero_fraction())?;
    if let Some(l) = labels {
        writeln!(w)?;
        w.flush()?;
        l.write_frequency_csv(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn read_label_for(path: &Path, n: usize) -> Result<spheredepth::ingest::LabelFile> {
    let l = read_label_file(path)?;
    if l.labels.len() != n {
        bail!("{} has {} labels for {n} matrix rows", path.display(), l.labels.len());
    }
    Ok(l)
}
