//! Kähler forms restricted to a subspace and their standard bases.
//!
//! For a structure `A` and a subspace `U` with orthonormal basis `B`, the
//! restricted form is the skew matrix `Ω = Bᵀ(AB)`, so
//! `Ω_ij = ⟨X_i, A X_j⟩`. A standard basis brings `Ω` to block diagonal form
//! with blocks `[[0, σ], [-σ, 0]]`, `σ` non-increasing.

use nalgebra::{DMatrix, DVector};

use crate::hqspace::Structure;
use crate::subspace::{columns, orthonormalize, Frame};
use crate::{lit, Real, Tolerances};

#[derive(Clone, Debug)]
pub struct SkewForm<T> {
    pub frame: Frame<T>,
    pub omega: DMatrix<T>,
}

/// `Ω = Bᵀ(AB)` on the given frame.
pub fn restrict_form<T: Real>(a: &Structure<T>, u: &Frame<T>) -> SkewForm<T> {
    let omega = u.basis.transpose() * a.apply_columns(&u.basis);
    SkewForm { frame: u.clone(), omega }
}

/// Linear combination `Σ c_p Ω_p` of the restrictions of `I, J, K`.
pub fn combine_forms<T: Real>(forms: &[DMatrix<T>; 3], c: &nalgebra::Vector3<T>) -> DMatrix<T> {
    &forms[0] * c.x + &forms[1] * c.y + &forms[2] * c.z
}

#[derive(Clone, Debug)]
pub struct StandardBasis<T> {
    /// `X_1, …, X_m`; pairs `(X_{2i-1}, X_{2i})` carry the blocks.
    pub frame: Frame<T>,
    /// One value per 2×2 block, `⌊m/2⌋` entries, non-increasing, snapped.
    pub sigmas: Vec<T>,
    /// Dimension of the kernel part (blocks with `σ = 0` plus a possible
    /// trailing singleton).
    pub kernel_dim: usize,
    pub warnings: Vec<String>,
}

/// A cluster of equal `σ` with the subspace it spans, in frame coordinates.
struct Cluster<T> {
    sigma: T,
    coords: DMatrix<T>,
}

fn snap<T: Real>(s: T, tol: T) -> T {
    if (s - T::one()).abs() <= tol || s > T::one() {
        T::one()
    } else if s <= tol {
        T::zero()
    } else {
        s
    }
}

/// Groups singular values of `Ω` into clusters of the invariant subspaces
/// of `-Ω²`, largest first.
fn clusters<T: Real>(omega: &DMatrix<T>, tol: &Tolerances<T>) -> Vec<Cluster<T>> {
    let m = omega.nrows();
    if m == 0 {
        return Vec::new();
    }
    let (values, v) = crate::right_singular(omega);
    let mut out: Vec<Cluster<T>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut prev = T::zero();
    for (i, &s) in values.iter().enumerate() {
        if !current.is_empty() && (prev - s).abs() > tol.cluster_gap {
            out.push(finish_cluster(&values, &v, &current, tol));
            current.clear();
        }
        current.push(i);
        prev = s;
    }
    out.push(finish_cluster(&values, &v, &current, tol));
    // Snapping can merge neighbouring clusters at 0 or 1.
    let mut merged: Vec<Cluster<T>> = Vec::new();
    for c in out {
        if let Some(last) = merged.last_mut() {
            if last.sigma == c.sigma {
                let k = last.coords.ncols();
                let mut coords = last.coords.clone().insert_columns(k, c.coords.ncols(), T::zero());
                coords.columns_mut(k, c.coords.ncols()).copy_from(&c.coords);
                last.coords = coords;
                continue;
            }
        }
        merged.push(c);
    }
    merged
}

fn finish_cluster<T: Real>(
    s: &[T],
    v: &DMatrix<T>,
    idx: &[usize],
    tol: &Tolerances<T>,
) -> Cluster<T> {
    let mean = idx.iter().fold(T::zero(), |a, &i| a + s[i]) / lit(idx.len() as f64);
    Cluster { sigma: snap(mean, tol.snap), coords: v.select_columns(idx.iter()) }
}

/// Splits a cluster subspace (frame coordinates) into standard pairs.
fn pair_up<T: Real>(omega: &DMatrix<T>, coords: &DMatrix<T>, warnings: &mut Vec<String>) -> Vec<DVector<T>> {
    let mut out = Vec::new();
    let mut q = coords.clone();
    while q.ncols() >= 2 {
        let x = q.column(0).into_owned();
        let ox = omega.transpose() * &x;
        let norm = ox.norm();
        if norm == T::zero() {
            warnings.push("vanishing form inside a positive cluster".into());
            break;
        }
        let mut y = ox / norm;
        y -= &x * x.dot(&y);
        y /= y.norm();
        let d = q.ncols();
        let proj = &q - (&x * (x.transpose() * &q)) - (&y * (y.transpose() * &q));
        let (_, u) = crate::right_singular(&proj.transpose());
        q = u.columns(0, d - 2).into_owned();
        out.push(x);
        out.push(y);
    }
    if q.ncols() == 1 {
        warnings.push("odd-dimensional cluster with positive σ".into());
        out.push(q.column(0).into_owned());
    }
    out
}

/// Standard basis of `ω^A` on `U`.
pub fn standard_basis<T: Real>(form: &SkewForm<T>, tol: &Tolerances<T>) -> StandardBasis<T> {
    let m = form.omega.nrows();
    let mut warnings = Vec::new();
    let mut coords: Vec<DVector<T>> = Vec::new();
    let mut sigmas = Vec::new();
    let mut kernel: Vec<DVector<T>> = Vec::new();
    for c in clusters(&form.omega, tol) {
        if c.sigma == T::zero() {
            kernel.extend(c.coords.column_iter().map(|v| v.into_owned()));
            continue;
        }
        let pairs = pair_up(&form.omega, &c.coords, &mut warnings);
        for chunk in pairs.chunks(2) {
            if chunk.len() == 2 {
                sigmas.push(c.sigma);
                coords.extend(chunk.iter().cloned());
            } else {
                kernel.push(chunk[0].clone());
            }
        }
    }
    let kernel_dim = kernel.len();
    for _ in 0..kernel_dim / 2 {
        sigmas.push(T::zero());
    }
    coords.extend(kernel);
    let local = orthonormalize(&columns(m, &coords), lit(1e-6));
    if local.ncols() != m {
        warnings.push(format!("standard basis lost rank: {} of {}", local.ncols(), m));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    StandardBasis {
        frame: Frame::from_orthonormal(&form.frame.basis * local),
        sigmas,
        kernel_dim,
        warnings,
    }
}

/// Decomposition of `U` into `ω^A`-invariant subspaces, one per distinct
/// `σ`, ordered by non-increasing `σ`. The kernel appears last with `σ = 0`.
pub fn invariant_subspaces<T: Real>(
    a: &Structure<T>,
    u: &Frame<T>,
    tol: &Tolerances<T>,
) -> Vec<(T, Frame<T>)> {
    let form = restrict_form(a, u);
    clusters(&form.omega, tol)
        .into_iter()
        .map(|c| (c.sigma, Frame::from_orthonormal(&u.basis * c.coords)))
        .collect()
}

/// Largest `A`-invariant subspace of `U`: the directions where
/// `σ ≥ 1 - tol`.
pub fn max_invariant_subspace<T: Real>(a: &Structure<T>, u: &Frame<T>, tol: T) -> Frame<T> {
    if u.dim() == 0 {
        return u.clone();
    }
    let form = restrict_form(a, u);
    let (values, v) = crate::right_singular(&form.omega);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= T::one() - tol).collect();
    let coords = v.select_columns(keep.iter());
    Frame::from_orthonormal(orthonormalize(&(&u.basis * coords), lit(1e-6)))
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
    fn standard_form_of_tilted_plane() {
        let t: f64 = 0.7;
        let x = e(8, 0);
        let y = Structure::i().apply(x.as_view()) * -t.cos() + e(8, 4) * t.sin();
        let u = Frame::span(&columns(8, &[x, y]), 1e-12);
        let sb = standard_basis(&restrict_form(&Structure::i(), &u), &Tolerances::default());
        assert_eq!(sb.sigmas.len(), 1);
        assert!((sb.sigmas[0] - t.cos()).abs() < 1e-12);
        let om = restrict_form(&Structure::i(), &sb.frame).omega;
        assert!((om[(0, 1)] - t.cos()).abs() < 1e-12);
    }

    #[test]
    fn invariant_part_of_mixed_subspace() {
        let x = e(12, 0);
        let ix = Structure::i().apply(x.as_view());
        let u = Frame::span(&columns(12, &[x, ix, e(12, 4)]), 1e-12);
        let inv = max_invariant_subspace(&Structure::i(), &u, 1e-8);
        assert_eq!(inv.dim(), 2);
        let parts = invariant_subspaces(&Structure::i(), &u, &Tolerances::default());
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, 1.0);
        assert_eq!(parts[1].0, 0.0);
        assert_eq!(parts[1].1.dim(), 1);
    }
}
