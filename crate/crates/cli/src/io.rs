//! File formats shared by the subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use spheredepth::ingest::{normalize_rows, parse_cluto, parse_labels, LabelFile};
use spheredepth::sphere::normalize;
use spheredepth::validation::FuzzyPartition;
use spheredepth::{SparseUnitVector, UnitVector};

/// Points loaded from either supported input format.
pub enum Points {
    Dense(Vec<UnitVector>),
    Sparse(Vec<SparseUnitVector>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Dense(p) => p.len(),
            Points::Sparse(p) => p.len(),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Dense headerless CSV (one point per row, projected onto the sphere) or a
/// CLUTO sparse matrix, told apart by the first non-comment line: commas mean
/// CSV, three integers mean a CLUTO header.
pub fn read_points(path: &Path) -> Result<Points> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let Some((_, first)) = content_lines(&text).next() else {
        bail!("{} contains no points", path.display());
    };
    if first.contains(',') {
        let mut points = Vec::new();
        let mut dim = None;
        for (line, row) in content_lines(&text) {
            let coords = row
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("{}:{line}: not a row of numbers", path.display()))?;
            if *dim.get_or_insert(coords.len()) != coords.len() {
                bail!("{}:{line}: expected {} columns, found {}", path.display(), dim.unwrap_or(0), coords.len());
            }
            let p = normalize(&coords).with_context(|| format!("{}:{line}", path.display()))?;
            points.push(p);
        }
        Ok(Points::Dense(points))
    } else if first.split_whitespace().count() == 3 && first.split_whitespace().all(|t| t.parse::<usize>().is_ok()) {
        let m = parse_cluto(text.as_bytes()).with_context(|| format!("in {}", path.display()))?;
        Ok(Points::Sparse(normalize_rows(&m).with_context(|| format!("in {}", path.display()))?))
    } else {
        bail!("{}: cannot tell the format (expected comma-separated coordinates or a `rows cols nnz` header)", path.display())
    }
}

pub fn strip_comments(text: &str) -> String {
    content_lines(text).map(|(_, l)| format!("{l}\n")).collect()
}

pub fn read_label_file(path: &Path) -> Result<LabelFile> {
    let text = strip_comments(&fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?);
    let n = text.lines().count();
    parse_labels(text.as_bytes(), n).with_context(|| format!("in {}", path.display()))
}

/// Either a crisp label file or a membership matrix (rows of comma-separated
/// weights).
pub enum Clustering {
    Crisp(LabelFile),
    Fuzzy(FuzzyPartition),
}

pub fn read_clustering(path: &Path) -> Result<Clustering> {
    let text = strip_comments(&fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?);
    if text.lines().next().is_some_and(|l| l.contains(',')) {
        let rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                l.split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .with_context(|| format!("{}: membership row {} is not numeric", path.display(), i + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Clustering::Fuzzy(FuzzyPartition::new(rows).with_context(|| format!("in {}", path.display()))?))
    } else {
        let n = text.lines().count();
        Ok(Clustering::Crisp(parse_labels(text.as_bytes(), n).with_context(|| format!("in {}", path.display()))?))
    }
}

/// Output destination: a file, or stdout when no path is given.
pub fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Provenance lines written at the top of every output.
pub fn write_header(w: &mut dyn Write, command: &str, config: &str) -> Result<()> {
    writeln!(w, "# spheredepth {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# config: {config}")?;
    Ok(())
}

pub fn format_row(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}
