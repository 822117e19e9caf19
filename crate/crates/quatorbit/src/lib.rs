//! Geometry of real subspaces of the quaternionic space ℍⁿ.
//!
//! The crate computes principal and Kähler angles, restricted Kähler forms
//! and their standard bases, decompositions into quaternionic, complex and
//! totally real parts, and complete invariants for the action of Sp(n) on
//! several families of subspaces. It can also construct explicit Sp(n)
//! elements carrying one subspace onto another.
//!
//! ℍⁿ is realised as ℝ⁴ⁿ: quaternionic coordinate `α` occupies the real
//! slots `4α..4α+4` in the order `(1, i, j, k)`. The structures `I, J, K`
//! act by right multiplication with `-i, -j, -k`, so they commute with the
//! left ℍ-linear maps that make up Sp(n).
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the default
//! tolerances are tuned for.

pub mod angles;
pub mod check;
pub mod decompose;
pub mod hqspace;
pub mod io;
pub mod kaehlerform;
pub mod lab;
pub mod orbit;
pub mod subspace;

use nalgebra::{DMatrix, RealField, SymmetricEigen};
use num_traits::{FromPrimitive, ToPrimitive};

/// Scalar type accepted by every routine in the crate.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a working scalar back into `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Singular values of `m` in descending order, padded with zeros to
/// `m.ncols()`, and matching right singular vectors as columns.
///
/// The vectors come from the symmetric eigenproblem of `mᵀm`: nalgebra's
/// SVD returns inaccurate singular vectors when singular values repeat,
/// which is the normal case for restricted Kähler forms.
pub(crate) fn right_singular<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let c = m.ncols();
    if c == 0 || m.nrows() == 0 {
        return (vec![T::zero(); c], DMatrix::identity(c, c));
    }
    let mut values: Vec<T> = m.singular_values().iter().cloned().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    values.resize(c, T::zero());
    let eig = SymmetricEigen::new(m.transpose() * m);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    (values, eig.eigenvectors.select_columns(order.iter()))
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("input is degenerate: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical thresholds shared by the algorithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Rank decisions: dropped Gram-Schmidt residuals, intersections.
    pub rank: T,
    /// Snapping of cosines to 0 or 1 and of ξ, χ, η to ±1.
    pub snap: T,
    /// Comparison of invariants between subspaces.
    pub compare: T,
    /// Isoclinicity test on `GGᵀ - σ² Id`.
    pub iso: T,
    /// Two singular values closer than this belong to one cluster.
    pub cluster_gap: T,
    /// Cosines above `1 + clamp` trigger a health warning before clamping.
    pub clamp: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            rank: lit(1e-8),
            snap: lit(1e-8),
            compare: lit(1e-6),
            iso: lit(1e-8),
            cluster_gap: lit(1e-7),
            clamp: lit(1e-7),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Thresholds suitable for single precision.
    pub fn single_precision() -> Self {
        Self {
            rank: lit(1e-4),
            snap: lit(1e-4),
            compare: lit(1e-3),
            iso: lit(1e-4),
            cluster_gap: lit(1e-3),
            clamp: lit(1e-4),
        }
    }
}

pub type Quaternion64 = hqspace::Quaternion<f64>;
pub type Structure64 = hqspace::Structure<f64>;
pub type Space64 = hqspace::HQSpace<f64>;
pub type Frame64 = subspace::Frame<f64>;
pub type Tolerances64 = Tolerances<f64>;
pub type Decomposition64 = decompose::Decomposition<f64>;
pub type OrbitInvariant64 = orbit::OrbitInvariant<f64>;
pub type Ic4Invariants64 = orbit::Ic4Invariants<f64>;
pub type Space32 = hqspace::HQSpace<f32>;
pub type Frame32 = subspace::Frame<f32>;
