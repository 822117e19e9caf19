//! Quaternions, the structures `I, J, K` on ℝ⁴ⁿ and the Hermitian product.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, DVectorView, Matrix3, Vector3};

use crate::{lit, Error, Real, Result};

/// A quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quaternion<T> {
    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn from_parts(w: T, v: Vector3<T>) -> Self {
        Self::new(w, v.x, v.y, v.z)
    }

    pub fn imag(&self) -> Vector3<T> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_squared(&self) -> T {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b, c, d) = (self.w, self.x, self.y, self.z);
        let (e, f, g, h) = (o.w, o.x, o.y, o.z);
        Self::new(
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        )
    }
}

/// Unit imaginary coefficients `(α, β, γ)` of a structure `αI + βJ + γK`.
///
/// Coefficients always refer to the standard triple `I, J, K`; an
/// [`HQSpace`] converts them to and from its admissible basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Structure<T> {
    pub coeffs: Vector3<T>,
}

impl<T: Real> Structure<T> {
    /// Builds a structure, rejecting coefficient vectors that are not unit.
    pub fn new(alpha: T, beta: T, gamma: T, tol: T) -> Result<Self> {
        let coeffs = Vector3::new(alpha, beta, gamma);
        if (coeffs.norm() - T::one()).abs() > tol {
            return Err(Error::Precondition(format!(
                "structure coefficients must be unit, got norm {}",
                crate::to_f64(coeffs.norm())
            )));
        }
        Ok(Self { coeffs })
    }

    /// Normalises an arbitrary nonzero vector into a structure.
    pub fn from_vector(v: Vector3<T>) -> Self {
        Self { coeffs: v / v.norm() }
    }

    pub fn i() -> Self {
        Self { coeffs: Vector3::x() }
    }

    pub fn j() -> Self {
        Self { coeffs: Vector3::y() }
    }

    pub fn k() -> Self {
        Self { coeffs: Vector3::z() }
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: -self.coeffs }
    }

    /// Representative of `±A` whose first coefficient of magnitude above
    /// `1e-9` is positive.
    pub fn canonical(&self) -> Self {
        let eps = lit::<T>(1e-9);
        for c in self.coeffs.iter() {
            if c.abs() > eps {
                return if *c < T::zero() { self.neg() } else { *self };
            }
        }
        *self
    }

    /// Applies the structure to a vector of ℝ⁴ⁿ.
    pub fn apply(&self, x: DVectorView<'_, T>) -> DVector<T> {
        let (al, be, ga) = (self.coeffs.x, self.coeffs.y, self.coeffs.z);
        let mut out = DVector::zeros(x.len());
        for s in (0..x.len()).step_by(4) {
            let (a, b, c, d) = (x[s], x[s + 1], x[s + 2], x[s + 3]);
            out[s] = al * b + be * c + ga * d;
            out[s + 1] = -al * a + be * d - ga * c;
            out[s + 2] = -al * d - be * a + ga * b;
            out[s + 3] = al * c - be * b - ga * a;
        }
        out
    }

    /// Applies the structure to every column of a matrix.
    pub fn apply_columns(&self, m: &DMatrix<T>) -> DMatrix<T> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for (j, col) in m.column_iter().enumerate() {
            out.set_column(j, &self.apply(col.as_view()));
        }
        out
    }

    /// Dense `4n × 4n` matrix of the structure.
    pub fn matrix(&self, n: usize) -> DMatrix<T> {
        self.apply_columns(&DMatrix::identity(4 * n, 4 * n))
    }
}

/// Completes a unit structure `I` to an oriented triple `(I, J, K)` with
/// `IJ = K`. The choice of `J` is deterministic.
pub fn adapted_triple<T: Real>(i: &Structure<T>) -> (Structure<T>, Structure<T>, Structure<T>) {
    let a = i.coeffs;
    let mut e = Vector3::x();
    let mut best = a.x.abs();
    if a.y.abs() < best {
        best = a.y.abs();
        e = Vector3::y();
    }
    if a.z.abs() < best {
        e = Vector3::z();
    }
    let j = Structure::from_vector(e - a * a.dot(&e));
    let k = Structure::from_vector(a.cross(&j.coeffs));
    (*i, j, k)
}

/// The ambient space ℍⁿ together with an admissible basis `(I', J', K')`.
///
/// The basis is stored as the rotation `C ∈ SO(3)` with
/// `(I', J', K') = (I, J, K) C`.
#[derive(Clone, Debug, PartialEq)]
pub struct HQSpace<T> {
    pub n: usize,
    pub basis: Matrix3<T>,
}

impl<T: Real> HQSpace<T> {
    pub fn new(n: usize) -> Self {
        Self { n, basis: Matrix3::identity() }
    }

    /// Real dimension `4n`.
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    /// Replaces the admissible basis after checking that `c ∈ SO(3)`.
    pub fn with_basis(&self, c: Matrix3<T>, tol: T) -> Result<Self> {
        let orth = (c.transpose() * c - Matrix3::identity()).norm();
        let det = c.determinant();
        if orth > tol || (det - T::one()).abs() > tol {
            return Err(Error::Precondition(format!(
                "basis change is not in SO(3): |CᵀC - I| = {:e}, det = {}",
                crate::to_f64(orth),
                crate::to_f64(det)
            )));
        }
        Ok(Self { n: self.n, basis: c })
    }

    /// Admissible basis `(I,J,K)C`, composed on top of the current one.
    pub fn rotate_basis(&self, c: Matrix3<T>, tol: T) -> Result<Self> {
        let checked = Self::new(self.n).with_basis(c, tol)?;
        Ok(Self { n: self.n, basis: self.basis * checked.basis })
    }

    pub fn struct_i(&self) -> Structure<T> {
        Structure { coeffs: self.basis.column(0).into_owned() }
    }

    pub fn struct_j(&self) -> Structure<T> {
        Structure { coeffs: self.basis.column(1).into_owned() }
    }

    pub fn struct_k(&self) -> Structure<T> {
        Structure { coeffs: self.basis.column(2).into_owned() }
    }

    /// Coefficients of a structure with respect to the admissible basis.
    pub fn to_basis_coords(&self, a: &Structure<T>) -> Vector3<T> {
        self.basis.transpose() * a.coeffs
    }

    /// Structure given by coefficients in the admissible basis.
    pub fn from_basis_coords(&self, v: Vector3<T>) -> Structure<T> {
        Structure { coeffs: self.basis * v }
    }

    /// Hermitian product with imaginary units taken from the admissible
    /// basis: `⟨L,M⟩ + ⟨L,I'M⟩i + ⟨L,J'M⟩j + ⟨L,K'M⟩k`.
    pub fn hermitian_product(&self, l: DVectorView<'_, T>, m: DVectorView<'_, T>) -> Quaternion<T> {
        let q = hermitian_product(l, m);
        Quaternion::from_parts(q.w, self.basis.transpose() * q.imag())
    }
}

/// Quaternionic coordinate `alpha` of a vector of ℝ⁴ⁿ.
pub fn coordinate<T: Real>(x: DVectorView<'_, T>, alpha: usize) -> Quaternion<T> {
    let s = 4 * alpha;
    Quaternion::new(x[s], x[s + 1], x[s + 2], x[s + 3])
}

/// Hermitian product `Σ conj(h_α) h'_α` in coordinates.
pub fn hermitian_product<T: Real>(l: DVectorView<'_, T>, m: DVectorView<'_, T>) -> Quaternion<T> {
    let mut acc = Quaternion::zero();
    for a in 0..l.len() / 4 {
        acc = acc + coordinate(l, a).conj() * coordinate(m, a);
    }
    acc
}

/// Hermitian product assembled from real products with the structures.
pub fn hermitian_product_operator<T: Real>(
    l: DVectorView<'_, T>,
    m: DVectorView<'_, T>,
) -> Quaternion<T> {
    Quaternion::new(
        l.dot(&m),
        l.dot(&Structure::i().apply(m)),
        l.dot(&Structure::j().apply(m)),
        l.dot(&Structure::k().apply(m)),
    )
}

/// Right multiplication `X ↦ Xq`, coordinatewise.
pub fn right_multiply<T: Real>(x: DVectorView<'_, T>, q: Quaternion<T>) -> DVector<T> {
    let mut out = DVector::zeros(x.len());
    for a in 0..x.len() / 4 {
        let p = coordinate(x, a) * q;
        let s = 4 * a;
        out[s] = p.w;
        out[s + 1] = p.x;
        out[s + 2] = p.y;
        out[s + 3] = p.z;
    }
    out
}

/// Right multiplication applied to every column.
pub fn right_multiply_columns<T: Real>(m: &DMatrix<T>, q: Quaternion<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, col) in m.column_iter().enumerate() {
        out.set_column(j, &right_multiply(col.as_view(), q));
    }
    out
}

/// Frobenius norms of `[g, I]`, `[g, J]`, `[g, K]`.
pub fn commutator_norms<T: Real>(g: &DMatrix<T>) -> [T; 3] {
    let n = g.nrows() / 4;
    let mut out = [T::zero(); 3];
    for (slot, s) in [Structure::i(), Structure::j(), Structure::k()].iter().enumerate() {
        let a = s.matrix(n);
        out[slot] = (g * &a - &a * g).norm();
    }
    out
}

/// Real `4n × 4n` matrix of the left ℍ-linear map sending the ℍ-orthonormal
/// vectors `from[p]` to `to[p]`. Both sets must span all of ℍⁿ.
pub fn h_linear_map<T: Real>(from: &DMatrix<T>, to: &DMatrix<T>) -> DMatrix<T> {
    let dim = from.nrows();
    let mut g = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut e = DVector::zeros(dim);
        e[c] = T::one();
        let mut img = DVector::zeros(dim);
        for p in 0..from.ncols() {
            let q = hermitian_product(from.column(p), e.as_view());
            img += right_multiply(to.column(p), q);
        }
        g.set_column(c, &img);
    }
    g
}
