//! Points on the unit hypersphere and the distances between them.
//!
//! Dense and sparse points share the [`SpherePoint`] trait, so every
//! algorithm in the crate is written once and monomorphised per
//! representation.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Maximum deviation of `‖x‖` from 1 accepted without renormalising.
pub const UNIT_TOLERANCE: f64 = 1e-10;
/// Maximum deviation of `‖x‖` from 1 that a constructor silently repairs.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// A point on the unit sphere, in whichever storage suits the data.
pub trait SpherePoint: Send + Sync {
    fn dim(&self) -> usize;

    /// Inner product with a point of the same dimension. Dimensions are not
    /// checked here; use [`dot`] at API boundaries.
    fn dot_unchecked(&self, other: &Self) -> f64;

    /// Inner product with a dense vector of length `dim()`.
    fn dot_dense(&self, dense: &[f64]) -> f64;

    /// `acc += scale * self`.
    fn add_scaled_to(&self, acc: &mut [f64], scale: f64);
}

/// Dense unit vector with `d >= 2` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps coordinates that are already (nearly) unit length.
    ///
    /// Vectors within [`RENORMALIZE_TOLERANCE`] of unit norm are rescaled;
    /// anything further away is rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {}", coords.len())));
        }
        let norm = l2_norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(rescale(coords, norm)))
    }

    /// The `i`-th canonical basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if d < 2 || i >= d {
            return Err(invalid(format!("basis vector {i} of R^{d}")));
        }
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Ok(Self(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl SpherePoint for UnitVector {
    fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    fn dot_unchecked(&self, other: &Self) -> f64 {
        dense_dot(&self.0, &other.0)
    }

    #[inline]
    fn dot_dense(&self, dense: &[f64]) -> f64 {
        dense_dot(&self.0, dense)
    }

    fn add_scaled_to(&self, acc: &mut [f64], scale: f64) {
        for (a, v) in acc.iter_mut().zip(&self.0) {
            *a += scale * v;
        }
    }
}

/// Sparse unit vector; indices are 0-based and strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseUnitVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseUnitVector {
    /// Builds a sparse unit vector from `(index, value)` pairs, applying the
    /// same norm tolerance rules as [`UnitVector::new`].
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let (indices, values) = check_entries(dim, entries)?;
        let norm = l2_norm(&values);
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { dim, indices, values: rescale(values, norm) })
    }

    /// Divides the entries by their L2 norm.
    pub fn normalize(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let (indices, values) = check_entries(dim, entries)?;
        let norm = l2_norm(&values);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector { index: None });
        }
        Ok(Self { dim, indices, values: rescale(values, norm) })
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> UnitVector {
        let mut coords = vec![0.0; self.dim];
        for (i, v) in self.entries() {
            coords[i] = v;
        }
        UnitVector(coords)
    }
}

impl SpherePoint for SparseUnitVector {
    fn dim(&self) -> usize {
        self.dim
    }

    fn dot_unchecked(&self, other: &Self) -> f64 {
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries().map(|(i, v)| v * dense[i]).sum()
    }

    fn add_scaled_to(&self, acc: &mut [f64], scale: f64) {
        for (i, v) in self.entries() {
            acc[i] += scale * v;
        }
    }
}

fn check_entries(dim: usize, entries: Vec<(usize, f64)>) -> Result<(Vec<usize>, Vec<f64>)> {
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    let mut indices = Vec::with_capacity(entries.len());
    let mut values = Vec::with_capacity(entries.len());
    for (idx, val) in entries {
        if idx >= dim {
            return Err(invalid(format!("index {idx} out of range for dimension {dim}")));
        }
        if indices.last().is_some_and(|&last| idx <= last) {
            return Err(invalid(format!("sparse indices must be strictly increasing (at {idx})")));
        }
        if val == 0.0 || !val.is_finite() {
            return Err(invalid(format!("sparse value at index {idx} must be finite and nonzero")));
        }
        indices.push(idx);
        values.push(val);
    }
    Ok((indices, values))
}

#[inline]
fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2_norm(v: &[f64]) -> f64 {
    dense_dot(v, v).sqrt()
}

// Leaves vectors that are already unit length to working precision untouched,
// which makes `normalize` idempotent bit for bit.
fn rescale(mut v: Vec<f64>, norm: f64) -> Vec<f64> {
    if (norm - 1.0).abs() > 4.0 * f64::EPSILON {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Projects a nonzero vector onto the sphere.
pub fn normalize(v: &[f64]) -> Result<UnitVector> {
    if v.len() < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {}", v.len())));
    }
    let norm = l2_norm(v);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector { index: None });
    }
    Ok(UnitVector(rescale(v.to_vec(), norm)))
}

/// Dimension-checked inner product.
pub fn dot<P: SpherePoint>(x: &P, y: &P) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.dot_unchecked(y))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Checks that a sample is non-empty and of one dimension; returns it.
pub fn sample_dim<P: SpherePoint>(sample: &[P]) -> Result<usize> {
    let first = sample.first().ok_or(Error::EmptySample)?;
    let d = first.dim();
    for p in sample {
        check_dims(d, p.dim())?;
    }
    Ok(d)
}

// Inner products of unit vectors within rounding noise of ±1 are snapped to
// ±1, so a point and itself (or its negation) get exact extreme distances.
const COS_SNAP: f64 = 64.0 * f64::EPSILON;

#[inline]
pub(crate) fn clamp_cos(c: f64) -> f64 {
    if c >= 1.0 - COS_SNAP {
        1.0
    } else if c <= -1.0 + COS_SNAP {
        -1.0
    } else {
        c
    }
}

/// `1 - x'y`, in `[0, 2]`.
pub fn cosine_distance<P: SpherePoint>(x: &P, y: &P) -> Result<f64> {
    Ok(1.0 - clamp_cos(dot(x, y)?))
}

/// Great-circle distance `arccos(x'y)`, in `[0, π]`.
pub fn geodesic_distance<P: SpherePoint>(x: &P, y: &P) -> Result<f64> {
    Ok(clamp_cos(dot(x, y)?).acos())
}

/// Euclidean chord length `sqrt(2(1 - x'y))`, in `[0, 2]`.
pub fn chord_distance<P: SpherePoint>(x: &P, y: &P) -> Result<f64> {
    Ok((2.0 * (1.0 - clamp_cos(dot(x, y)?)).max(0.0)).sqrt())
}

/// An orthogonal `d × d` matrix.
#[derive(Clone, Debug)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &UnitVector) -> Result<UnitVector> {
        check_dims(self.dim(), x.dim())?;
        let v = &self.matrix * nalgebra::DVector::from_column_slice(x.as_slice());
        UnitVector::new(v.as_slice().to_vec())
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_rotation(d: usize, seed: u64) -> Result<Rotation> {
    if d < 2 {
        return Err(invalid(format!("rotation dimension must be at least 2, got {d}")));
    }
    let mut rng = seed::rng(seed);
    let gaussian = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(Rotation { matrix: q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn uv(c: &[f64]) -> UnitVector {
        normalize(c).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let v = normalize(&[3.0, 4.0]).unwrap();
        assert!((v.as_slice()[0] - 0.6).abs() < 1e-15 && (v.as_slice()[1] - 0.8).abs() < 1e-15);
        assert_eq!(normalize(&[0.0, 0.0, 1.0]).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(normalize(&[1.0; 4]).unwrap().as_slice(), &[0.5; 4]);
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::ZeroVector { .. })));
        assert!(normalize(&[1.0]).is_err());
    }

    #[test]
    fn constructor_tolerances() {
        let nearly = UnitVector::new(vec![0.6 * (1.0 + 1e-8), 0.8 * (1.0 + 1e-8)]).unwrap();
        assert!((l2_norm(nearly.as_slice()) - 1.0).abs() < 1e-15);
        assert!(matches!(UnitVector::new(vec![0.6, 0.81]), Err(Error::NotUnit { .. })));
    }

    #[test]
    fn distance_examples() {
        let e1 = uv(&[1.0, 0.0, 0.0]);
        let e2 = uv(&[0.0, 1.0, 0.0]);
        let m1 = e1.neg();
        assert_eq!(cosine_distance(&e1, &e1).unwrap(), 0.0);
        assert_eq!(cosine_distance(&e1, &m1).unwrap(), 2.0);
        assert_eq!(cosine_distance(&e1, &e2).unwrap(), 1.0);
        assert_eq!(geodesic_distance(&e1, &e1).unwrap(), 0.0);
        assert!((geodesic_distance(&e1, &m1).unwrap() - PI).abs() < 1e-15);
        assert!((geodesic_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(chord_distance(&e1, &e1).unwrap(), 0.0);
        assert_eq!(chord_distance(&e1, &m1).unwrap(), 2.0);
        assert!((chord_distance(&e1, &e2).unwrap() - SQRT_2).abs() < 1e-15);
        let short = uv(&[1.0, 0.0]);
        assert!(matches!(
            cosine_distance(&e1, &short),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn near_coincident_dot_does_not_produce_nan() {
        let a = uv(&[1.0, 1e-9, 0.3]);
        assert!(!geodesic_distance(&a, &a).unwrap().is_nan());
        assert!(!chord_distance(&a, &a).unwrap().is_nan());
    }

    #[test]
    fn sparse_examples() {
        let a = SparseUnitVector::new(2, vec![(0, 1.0)]).unwrap();
        let b = SparseUnitVector::new(2, vec![(0, 0.6), (1, 0.8)]).unwrap();
        assert!((dot(&a, &b).unwrap() - 0.6).abs() < 1e-15);
        assert!((dot(&b, &b).unwrap() - 1.0).abs() < 1e-10);
        let c = SparseUnitVector::new(4, vec![(1, 1.0)]).unwrap();
        let d = SparseUnitVector::new(4, vec![(0, 0.6), (3, 0.8)]).unwrap();
        assert_eq!(dot(&c, &d).unwrap(), 0.0);
        assert!(dot(&a, &c).is_err());
        assert!(SparseUnitVector::new(3, vec![(1, 1.0), (1, 0.0)]).is_err());
        assert!(SparseUnitVector::new(3, vec![(2, 0.6), (1, 0.8)]).is_err());
        assert!(SparseUnitVector::new(3, vec![(3, 1.0)]).is_err());
        assert!(matches!(SparseUnitVector::normalize(3, vec![]), Err(Error::ZeroVector { .. })));
    }

    #[test]
    fn rotation_examples() {
        let r = random_rotation(2, 11).unwrap();
        let m = r.matrix();
        let err = (m.transpose() * m - DMatrix::<f64>::identity(2, 2)).abs().max();
        assert!(err < 1e-10);
        assert_eq!(random_rotation(5, 3).unwrap().matrix(), random_rotation(5, 3).unwrap().matrix());
        let x = uv(&[0.2, -0.4, 0.7, 0.1, 0.5]);
        let rx = random_rotation(5, 3).unwrap().apply(&x).unwrap();
        assert!((l2_norm(rx.as_slice()) - 1.0).abs() < 1e-10);
        assert!(random_rotation(1, 0).is_err());
        for d in [3, 7] {
            let det = random_rotation(d, 99).unwrap().matrix().determinant();
            assert!((det.abs() - 1.0).abs() < 1e-10);
        }
    }

    fn dense_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, d).prop_filter("nonzero", |v| l2_norm(v) > 1e-3)
    }

    fn sparse_pair() -> impl Strategy<Value = (Vec<(usize, f64)>, Vec<(usize, f64)>)> {
        let entries = || {
            prop::collection::btree_map(0usize..40, 0.1f64..3.0, 1..12)
                .prop_map(|m| m.into_iter().collect::<Vec<_>>())
        };
        (entries(), entries())
    }

    proptest! {
        #[test]
        fn chord_squared_is_twice_cosine(a in dense_vec(4), b in dense_vec(4)) {
            let (x, y) = (uv(&a), uv(&b));
            let ch = chord_distance(&x, &y).unwrap();
            prop_assert!((ch * ch - 2.0 * cosine_distance(&x, &y).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn distances_are_symmetric(a in dense_vec(3), b in dense_vec(3)) {
            let (x, y) = (uv(&a), uv(&b));
            prop_assert_eq!(geodesic_distance(&x, &y).unwrap(), geodesic_distance(&y, &x).unwrap());
            prop_assert_eq!(cosine_distance(&x, &y).unwrap(), cosine_distance(&y, &x).unwrap());
            prop_assert_eq!(chord_distance(&x, &y).unwrap(), chord_distance(&y, &x).unwrap());
        }

        #[test]
        fn distances_are_rotation_invariant(a in dense_vec(5), b in dense_vec(5), s in any::<u64>()) {
            let (x, y) = (uv(&a), uv(&b));
            let r = random_rotation(5, s).unwrap();
            let (rx, ry) = (r.apply(&x).unwrap(), r.apply(&y).unwrap());
            prop_assert!((geodesic_distance(&x, &y).unwrap() - geodesic_distance(&rx, &ry).unwrap()).abs() < 1e-9);
            prop_assert!((cosine_distance(&x, &y).unwrap() - cosine_distance(&rx, &ry).unwrap()).abs() < 1e-9);
            prop_assert!((chord_distance(&x, &y).unwrap() - chord_distance(&rx, &ry).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn normalize_is_idempotent(a in dense_vec(6)) {
            let once = normalize(&a).unwrap();
            let twice = normalize(once.as_slice()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn sparse_dot_matches_dense((ea, eb) in sparse_pair()) {
            let a = SparseUnitVector::normalize(40, ea).unwrap();
            let b = SparseUnitVector::normalize(40, eb).unwrap();
            let dense = a.to_dense().dot_unchecked(&b.to_dense());
            prop_assert!((a.dot_unchecked(&b) - dense).abs() < 1e-12);
        }
    }
}
