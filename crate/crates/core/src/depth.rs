//! Distance-based angular depths (arc, cosine and chord) of points relative to
//! an empirical sample, and the pairwise depth similarity they induce.
//!
//! Each depth is a constant minus the mean distance to the sample:
//!
//! | kind   | similarity to one point `w` | range    |
//! |--------|-----------------------------|----------|
//! | arc    | `π - arccos(x'w)`           | `[0, π]` |
//! | cosine | `1 + x'w`                   | `[0, 2]` |
//! | chord  | `2 - sqrt(2(1 - x'w))`      | `[0, 2]` |
//!
//! so the empirical depth of `x` is the mean of its similarities to the
//! sample points, and the deepest point is the sample medoid under the
//! corresponding distance.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::sphere::{check_dims, clamp_cos, sample_dim, SpherePoint};

/// Which angular depth is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DepthKind {
    Arc,
    Cosine,
    Chord,
}

impl DepthKind {
    pub const ALL: [DepthKind; 3] = [DepthKind::Arc, DepthKind::Cosine, DepthKind::Chord];

    /// Similarity of two unit vectors given their inner product.
    #[inline]
    pub fn similarity_from_dot(self, dot: f64) -> f64 {
        let c = clamp_cos(dot);
        match self {
            DepthKind::Arc => std::f64::consts::PI - c.acos(),
            DepthKind::Cosine => 1.0 + c,
            DepthKind::Chord => 2.0 - (2.0 * (1.0 - c)).max(0.0).sqrt(),
        }
    }

    /// Depth of a point relative to a point mass at itself.
    pub fn max_value(self) -> f64 {
        match self {
            DepthKind::Arc => std::f64::consts::PI,
            DepthKind::Cosine | DepthKind::Chord => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DepthKind::Arc => "arc",
            DepthKind::Cosine => "cosine",
            DepthKind::Chord => "chord",
        }
    }

    /// Conventional acronym (ADD, CDD, ChDD).
    pub fn acronym(self) -> &'static str {
        match self {
            DepthKind::Arc => "ADD",
            DepthKind::Cosine => "CDD",
            DepthKind::Chord => "ChDD",
        }
    }
}

impl fmt::Display for DepthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DepthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arc" | "add" => Ok(DepthKind::Arc),
            "cosine" | "cdd" => Ok(DepthKind::Cosine),
            "chord" | "chdd" => Ok(DepthKind::Chord),
            other => Err(invalid(format!("unknown depth kind '{other}' (expected arc, cosine or chord)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthValue {
    pub value: f64,
    pub kind: DepthKind,
}

/// Sample indices whose depth is at least `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaRegion {
    pub alpha: f64,
    pub member_indices: Vec<usize>,
}

pub fn pairwise_similarity<P: SpherePoint>(x: &P, y: &P, kind: DepthKind) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(kind.similarity_from_dot(x.dot_unchecked(y)))
}

pub fn sample_depth<P: SpherePoint>(x: &P, sample: &[P], kind: DepthKind) -> Result<DepthValue> {
    let d = sample_dim(sample)?;
    check_dims(d, x.dim())?;
    Ok(DepthValue { value: depth_unchecked(x, sample, kind), kind })
}

fn depth_unchecked<P: SpherePoint>(x: &P, sample: &[P], kind: DepthKind) -> f64 {
    let total: f64 = sample.iter().map(|w| kind.similarity_from_dot(x.dot_unchecked(w))).sum();
    total / sample.len() as f64
}

/// Depth of every sample point relative to the whole sample.
pub fn sample_depths<P: SpherePoint>(sample: &[P], kind: DepthKind) -> Result<Vec<f64>> {
    sample_dim(sample)?;
    Ok(sample.par_iter().map(|x| depth_unchecked(x, sample, kind)).collect())
}

/// Index of the deepest sample point; ties go to the lowest index.
pub fn deepest_point_index<P: SpherePoint>(sample: &[P], kind: DepthKind) -> Result<usize> {
    Ok(argmax_first(&sample_depths(sample, kind)?))
}

pub fn alpha_region<P: SpherePoint>(sample: &[P], kind: DepthKind, alpha: f64) -> Result<AlphaRegion> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let depths = sample_depths(sample, kind)?;
    Ok(region_from_depths(&depths, alpha))
}

pub fn region_from_depths(depths: &[f64], alpha: f64) -> AlphaRegion {
    let member_indices = depths
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= alpha)
        .map(|(i, _)| i)
        .collect();
    AlphaRegion { alpha, member_indices }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Pairwise depth similarities over a fixed sample.
pub trait Similarity: Sync {
    fn len(&self) -> usize;

    fn kind(&self) -> DepthKind;

    fn sim(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples above this size are not materialised as a full matrix.
pub const MATERIALIZE_LIMIT: usize = 10_000;

/// Dense, symmetric `n × n` matrix of pairwise similarities.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMatrix {
    n: usize,
    kind: DepthKind,
    values: Vec<f64>,
}

impl DepthMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

impl Similarity for DepthMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn kind(&self) -> DepthKind {
        self.kind
    }

    #[inline]
    fn sim(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

pub fn depth_matrix<P: SpherePoint>(sample: &[P], kind: DepthKind) -> Result<DepthMatrix> {
    sample_dim(sample)?;
    let n = sample.len();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = &sample[i];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = if i == j { kind.max_value() } else { kind.similarity_from_dot(xi.dot_unchecked(&sample[j])) };
        }
    });
    Ok(DepthMatrix { n, kind, values })
}

/// Similarities computed on demand from the sample.
#[derive(Clone, Copy, Debug)]
pub struct LazySimilarity<'a, P> {
    sample: &'a [P],
    kind: DepthKind,
}

impl<'a, P: SpherePoint> LazySimilarity<'a, P> {
    pub fn new(sample: &'a [P], kind: DepthKind) -> Result<Self> {
        sample_dim(sample)?;
        Ok(Self { sample, kind })
    }
}

impl<P: SpherePoint> Similarity for LazySimilarity<'_, P> {
    fn len(&self) -> usize {
        self.sample.len()
    }

    fn kind(&self) -> DepthKind {
        self.kind
    }

    #[inline]
    fn sim(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.kind.max_value()
        } else {
            self.kind.similarity_from_dot(self.sample[i].dot_unchecked(&self.sample[j]))
        }
    }
}

/// Materialised matrix for moderate samples, lazy evaluation above
/// [`MATERIALIZE_LIMIT`].
pub enum SimilarityStore<'a, P> {
    Matrix(DepthMatrix),
    Lazy(LazySimilarity<'a, P>),
}

impl<'a, P: SpherePoint> SimilarityStore<'a, P> {
    pub fn build(sample: &'a [P], kind: DepthKind) -> Result<Self> {
        if sample.len() <= MATERIALIZE_LIMIT {
            Ok(Self::Matrix(depth_matrix(sample, kind)?))
        } else {
            Ok(Self::Lazy(LazySimilarity::new(sample, kind)?))
        }
    }
}

impl<P: SpherePoint> Similarity for SimilarityStore<'_, P> {
    fn len(&self) -> usize {
        match self {
            Self::Matrix(m) => m.len(),
            Self::Lazy(l) => l.len(),
        }
    }

    fn kind(&self) -> DepthKind {
        match self {
            Self::Matrix(m) => m.kind(),
            Self::Lazy(l) => l.kind(),
        }
    }

    #[inline]
    fn sim(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Matrix(m) => m.sim(i, j),
            Self::Lazy(l) => l.sim(i, j),
        }
    }
}
