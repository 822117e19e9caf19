//! Principal, Kähler, Hermitian and characteristic angles; isoclinicity.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::hqspace::{hermitian_product, Structure};
use crate::subspace::{quaternionify, Frame};
use crate::{lit, Error, Real, Result};

/// Principal angles between `U` (dim p) and `W` (dim q), with principal
/// vectors `u_i ∈ U`, `w_i ∈ W` such that `⟨u_i, w_i⟩ = cos θ_i`.
#[derive(Clone, Debug)]
pub struct PrincipalAngles<T> {
    /// Ascending, `min(p, q)` entries.
    pub angles: Vec<T>,
    pub cosines: Vec<T>,
    pub u_vectors: DMatrix<T>,
    pub w_vectors: DMatrix<T>,
    /// Set when a cosine exceeded `1 + clamp` before clamping.
    pub clamped: bool,
}

impl<T: Real> PrincipalAngles<T> {
    pub fn max_angle(&self) -> T {
        self.angles.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

pub fn principal_angles<T: Real>(u: &Frame<T>, w: &Frame<T>) -> PrincipalAngles<T> {
    let k = u.dim().min(w.dim());
    let mut out = PrincipalAngles {
        angles: Vec::with_capacity(k),
        cosines: Vec::with_capacity(k),
        u_vectors: DMatrix::zeros(u.ambient(), k),
        w_vectors: DMatrix::zeros(w.ambient(), k),
        clamped: false,
    };
    if k == 0 {
        return out;
    }
    let m = u.basis.transpose() * &w.basis;
    let mt = m.transpose();
    let (values, left) = crate::right_singular(&mt);
    let (_, right_all) = crate::right_singular(&m);
    // Right vectors follow the left ones where `Mᵀu` is well conditioned;
    // the rest are completed from the bottom of the spectrum of `MᵀM`.
    let floor = lit::<T>(1e-8);
    let mut right: Vec<DVector<T>> = Vec::with_capacity(k);
    for i in 0..k {
        if values[i] > floor {
            let v = &mt * left.column(i);
            right.push(&v / v.norm());
        }
    }
    let mut spare = (0..right_all.ncols()).rev();
    while right.len() < k {
        let Some(j) = spare.next() else { break };
        let mut v = right_all.column(j).into_owned();
        for _ in 0..2 {
            for r in &right {
                let c = r.dot(&v);
                v.axpy(-c, r, T::one());
            }
        }
        let n = v.norm();
        if n > lit(0.5) {
            right.push(v / n);
        }
    }
    let clamp = lit::<T>(1e-7);
    for slot in 0..k {
        let mut c = values[slot];
        if c > T::one() + clamp {
            out.clamped = true;
            log::warn!("principal cosine {} clamped to 1", crate::to_f64(c));
        }
        if c > T::one() {
            c = T::one();
        }
        let uv = &u.basis * left.column(slot);
        let wv = &w.basis * &right[slot];
        // The sine from the orthogonal residual keeps small angles accurate.
        let resid = (&wv - u.project(&wv)).norm();
        let theta = resid.atan2(c);
        out.u_vectors.set_column(slot, &uv);
        out.w_vectors.set_column(slot, &wv);
        out.cosines.push(c);
        out.angles.push(theta);
    }
    out
}

/// `arccos ∏ cos θ_i` for `dim U ≤ dim W`.
pub fn subspace_angle<T: Real>(u: &Frame<T>, w: &Frame<T>) -> Result<T> {
    if u.dim() > w.dim() {
        return Err(Error::Dimension(format!(
            "subspace angle needs dim U ≤ dim W, got {} > {}",
            u.dim(),
            w.dim()
        )));
    }
    let pa = principal_angles(u, w);
    let prod = pa.cosines.iter().fold(T::one(), |a, &c| a * c);
    Ok(clamp_unit(prod).acos())
}

/// `|det BᵤᵀB_w|` for subspaces of equal dimension, which equals the
/// product of principal cosines.
pub fn gram_determinant<T: Real>(u: &Frame<T>, w: &Frame<T>) -> Result<T> {
    if u.dim() != w.dim() {
        return Err(Error::Dimension("Gram determinant needs equal dimensions".into()));
    }
    Ok((u.basis.transpose() * &w.basis).determinant().abs())
}

pub(crate) fn clamp_unit<T: Real>(c: T) -> T {
    if c > T::one() {
        T::one()
    } else if c < -T::one() {
        -T::one()
    } else {
        c
    }
}

/// `|X ∧ Y| = sqrt(|X|²|Y|² - ⟨X,Y⟩²)`.
pub fn wedge_norm<T: Real>(x: DVectorView<'_, T>, y: DVectorView<'_, T>) -> T {
    let d = x.norm_squared() * y.norm_squared() - x.dot(&y).powi(2);
    if d > T::zero() {
        d.sqrt()
    } else {
        T::zero()
    }
}

/// Kähler angle of the oriented plane `(X, Y)` with respect to `A`.
pub fn kaehler_angle<T: Real>(
    a: &Structure<T>,
    x: DVectorView<'_, T>,
    y: DVectorView<'_, T>,
    tol: T,
) -> Result<T> {
    let mis = wedge_norm(x, y);
    if mis <= tol * x.norm() * y.norm() {
        return Err(Error::Degenerate("Kähler angle of parallel vectors".into()));
    }
    let c = x.dot(&a.apply(y)) / mis;
    Ok(clamp_unit(c).acos())
}

/// Hermitian angle: `cos θ_h = |L·M| / (|L||M|)`.
pub fn hermitian_angle<T: Real>(l: DVectorView<'_, T>, m: DVectorView<'_, T>) -> Result<T> {
    let (nl, nm) = (l.norm(), m.norm());
    if nl == T::zero() || nm == T::zero() {
        return Err(Error::Degenerate("Hermitian angle of a zero vector".into()));
    }
    Ok(clamp_unit(hermitian_product(l, m).norm() / (nl * nm)).acos())
}

/// Characteristic angle of two lines: `cos θ = cos⁴ θ_h`.
pub fn characteristic_angle<T: Real>(l: DVectorView<'_, T>, m: DVectorView<'_, T>) -> Result<T> {
    let c = hermitian_angle(l, m)?.cos();
    Ok(clamp_unit(c.powi(4)).acos())
}

/// Characteristic angle as the subspace angle between `𝒬L` and `𝒬M`.
pub fn characteristic_angle_via_lines<T: Real>(l: &DVector<T>, m: &DVector<T>, tol: T) -> Result<T> {
    let ql = quaternionify(&Frame::span(&DMatrix::from_column_slice(l.len(), 1, l.as_slice()), tol), tol);
    let qm = quaternionify(&Frame::span(&DMatrix::from_column_slice(m.len(), 1, m.as_slice()), tol), tol);
    subspace_angle(&ql, &qm)
}

#[derive(Clone, Copy, Debug)]
pub struct Isoclinicity<T> {
    pub isoclinic: bool,
    /// Angle `arccos σ` with `σ² = tr(GGᵀ)/m`.
    pub angle: T,
    /// `max |GGᵀ - σ² Id|`.
    pub deviation: T,
}

/// Whether `(U, AU)` is isoclinic, from `G = Bᵀ(AB)`.
pub fn isoclinicity<T: Real>(a: &Structure<T>, u: &Frame<T>, tol: T) -> Isoclinicity<T> {
    let m = u.dim();
    if m == 0 {
        return Isoclinicity { isoclinic: true, angle: T::frac_pi_2(), deviation: T::zero() };
    }
    let g = u.basis.transpose() * a.apply_columns(&u.basis);
    let ggt = &g * g.transpose();
    let s2 = ggt.trace() / lit(m as f64);
    let deviation = (ggt - DMatrix::identity(m, m) * s2).amax();
    Isoclinicity {
        isoclinic: deviation <= tol,
        angle: clamp_unit(s2.sqrt()).acos(),
        deviation,
    }
}

/// Isoclinic Kähler angle of a 4-dimensional subspace from
/// `cos² θ^A = -¼ tr[(Ω^A)²]`.
pub fn isoclinic_angle_trace<T: Real>(a: &Structure<T>, u: &Frame<T>) -> Result<T> {
    if u.dim() != 4 {
        return Err(Error::Dimension(format!("expected a 4-dimensional subspace, got {}", u.dim())));
    }
    let omega = u.basis.transpose() * a.apply_columns(&u.basis);
    let c2 = -(&omega * &omega).trace() / lit(4.0);
    Ok(clamp_unit(c2.max(T::zero()).sqrt()).acos())
}
