//! Orthonormal frames of real subspaces and the lattice operations on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::hqspace::{hermitian_product, right_multiply, Structure};
use crate::{Real, Result};

/// A real subspace of ℝ⁴ⁿ, stored as a `4n × m` matrix with orthonormal
/// columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    pub basis: DMatrix<T>,
}

impl<T: Real> Frame<T> {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<T>) -> Self {
        Self { basis }
    }

    /// Orthonormal frame of the span of the given columns.
    pub fn span(vectors: &DMatrix<T>, tol: T) -> Self {
        Self { basis: orthonormalize(vectors, tol) }
    }

    pub fn empty(ambient: usize) -> Self {
        Self { basis: DMatrix::zeros(ambient, 0) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<T>) -> DVector<T> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Largest deviation `|BᵀB - Id|` of the stored basis.
    pub fn orthonormality_residual(&self) -> T {
        let m = self.dim();
        (self.basis.transpose() * &self.basis - DMatrix::identity(m, m)).amax()
    }

    /// Image of the subspace under a structure.
    pub fn apply(&self, a: &Structure<T>) -> Self {
        Self { basis: a.apply_columns(&self.basis) }
    }

    /// Image under a linear map of ℝ⁴ⁿ, re-orthonormalised.
    pub fn transform(&self, g: &DMatrix<T>, tol: T) -> Self {
        Self::span(&(g * &self.basis), tol)
    }
}

/// Gram-Schmidt with one reorthogonalisation pass. Columns whose residual
/// falls below `tol` times their original norm are dropped.
pub fn orthonormalize<T: Real>(vectors: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let mut out: Vec<DVector<T>> = Vec::new();
    for col in vectors.column_iter() {
        let norm0 = col.norm();
        if norm0 == T::zero() {
            continue;
        }
        let mut v = col.into_owned();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q, T::one());
            }
        }
        let r = v.norm();
        if r > tol * norm0 {
            out.push(v / r);
        }
    }
    columns(vectors.nrows(), &out)
}

/// Quaternionic Gram-Schmidt: the result is orthonormal for the Hermitian
/// product, so its columns are ℍ-independent.
pub fn h_orthonormalize<T: Real>(vectors: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let mut out: Vec<DVector<T>> = Vec::new();
    for col in vectors.column_iter() {
        let norm0 = col.norm();
        if norm0 == T::zero() {
            continue;
        }
        let mut v = col.into_owned();
        for _ in 0..2 {
            for q in &out {
                let c = hermitian_product(q.as_view(), v.as_view());
                v -= right_multiply(q.as_view(), c);
            }
        }
        let r = v.norm();
        if r > tol * norm0 {
            out.push(v / r);
        }
    }
    columns(vectors.nrows(), &out)
}

/// Extends ℍ-orthonormal columns to an ℍ-orthonormal basis of ℍⁿ.
pub fn h_complete<T: Real>(vectors: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let dim = vectors.nrows();
    let mut all = vectors.clone();
    let cols = all.ncols();
    all = all.insert_columns(cols, dim / 4, T::zero());
    for a in 0..dim / 4 {
        all[(4 * a, cols + a)] = T::one();
    }
    h_orthonormalize(&all, tol)
}

/// Stacks vectors as the columns of a matrix with `rows` rows.
pub fn columns<T: Real>(rows: usize, cols: &[DVector<T>]) -> DMatrix<T> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// `U ∩ W`, taken as the principal directions with cosine at least `1 - tol`.
pub fn intersect<T: Real>(u: &Frame<T>, w: &Frame<T>, tol: T) -> Frame<T> {
    if u.dim() == 0 || w.dim() == 0 {
        return Frame::empty(u.ambient());
    }
    let m = w.basis.transpose() * &u.basis;
    let (values, left) = crate::right_singular(&m);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= T::one() - tol).collect();
    let coords = left.select_columns(keep.iter());
    Frame::span(&(&u.basis * coords), tol)
}

/// `U + W`.
pub fn sum<T: Real>(u: &Frame<T>, w: &Frame<T>, tol: T) -> Frame<T> {
    let mut cols = u.basis.clone();
    let c = cols.ncols();
    cols = cols.insert_columns(c, w.dim(), T::zero());
    cols.columns_mut(c, w.dim()).copy_from(&w.basis);
    Frame::span(&cols, tol)
}

/// Orthogonal complement of `U` inside `W`, assuming `U ⊂ W`.
pub fn complement_in<T: Real>(w: &Frame<T>, u: &Frame<T>) -> Frame<T> {
    if u.dim() == 0 || w.dim() == 0 {
        return w.clone();
    }
    let m = w.basis.transpose() * &u.basis;
    let eig = SymmetricEigen::new(&m * m.transpose());
    let half = crate::lit::<T>(0.5);
    let keep: Vec<usize> =
        (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] < half).collect();
    let coords = eig.eigenvectors.select_columns(keep.iter());
    let b = &w.basis * coords;
    Frame::from_orthonormal(orthonormalize(&b, crate::lit(1e-3)))
}

/// Quaternionification `𝒬U = U + IU + JU + KU`.
pub fn quaternionify<T: Real>(u: &Frame<T>, tol: T) -> Frame<T> {
    let m = u.dim();
    let mut cols = DMatrix::zeros(u.ambient(), 4 * m);
    cols.columns_mut(0, m).copy_from(&u.basis);
    for (slot, s) in [Structure::i(), Structure::j(), Structure::k()].iter().enumerate() {
        cols.columns_mut((slot + 1) * m, m).copy_from(&s.apply_columns(&u.basis));
    }
    Frame::span(&cols, tol)
}

/// Hermitian orthogonality of `U` and `W`: every principal angle between
/// `𝒬U` and `𝒬W` is a right angle up to `tol`.
pub fn is_hermitian_orthogonal<T: Real>(u: &Frame<T>, w: &Frame<T>, tol: T) -> Result<bool> {
    let qu = quaternionify(u, tol);
    let qw = quaternionify(w, tol);
    if qu.dim() == 0 || qw.dim() == 0 {
        return Ok(true);
    }
    let m = qu.basis.transpose() * &qw.basis;
    let s = m.singular_values();
    Ok(s.iter().all(|&c| c <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let a = e(8, 0);
        let b = e(8, 1);
        let c = &a * 2.0 - &b * 3.0;
        let f = orthonormalize(&columns(8, &[a, b, c]), 1e-10);
        assert_eq!(f.ncols(), 2);
    }

    #[test]
    fn quaternionify_of_real_line_is_four_dimensional() {
        let u = Frame::span(&columns(8, &[e(8, 0)]), 1e-10);
        assert_eq!(quaternionify(&u, 1e-10).dim(), 4);
    }

    #[test]
    fn intersection_and_sum() {
        let u = Frame::span(&columns(8, &[e(8, 0), e(8, 1)]), 1e-10);
        let w = Frame::span(&columns(8, &[e(8, 1), e(8, 2)]), 1e-10);
        assert_eq!(intersect(&u, &w, 1e-8).dim(), 1);
        assert_eq!(sum(&u, &w, 1e-8).dim(), 3);
    }

    #[test]
    fn complement_inside() {
        let w = Frame::span(&columns(8, &[e(8, 0), e(8, 1), e(8, 2)]), 1e-10);
        let u = Frame::span(&columns(8, &[e(8, 1)]), 1e-10);
        let c = complement_in(&w, &u);
        assert_eq!(c.dim(), 2);
        assert!((u.basis.transpose() * &c.basis).amax() < 1e-14);
    }

    #[test]
    fn h_orthonormal_columns_have_identity_gram() {
        let v = DMatrix::from_fn(8, 2, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let h = h_orthonormalize(&v, 1e-10);
        let q = hermitian_product(h.column(0), h.column(1));
        assert!(q.norm() < 1e-14);
        let full = h_complete(&h, 1e-10);
        assert_eq!(full.ncols(), 2);
    }

    #[test]
    fn hermitian_orthogonality() {
        let u = Frame::span(&columns(8, &[e(8, 0)]), 1e-10);
        let w = Frame::span(&columns(8, &[e(8, 5)]), 1e-10);
        let x = Frame::span(&columns(8, &[e(8, 2)]), 1e-10);
        assert!(is_hermitian_orthogonal(&u, &w, 1e-9).unwrap());
        assert!(!is_hermitian_orthogonal(&u, &x, 1e-9).unwrap());
    }
}
