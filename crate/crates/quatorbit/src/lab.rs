//! Test-subspace generators, random group elements and reference oracles.
//!
//! Every random routine draws from a ChaCha stream derived from one 64-bit
//! seed, so results are reproducible across platforms.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use serde::{Deserialize, Serialize};

use crate::hqspace::{adapted_triple, h_linear_map, right_multiply_columns, HQSpace, Quaternion, Structure};
use crate::subspace::{columns, h_complete, h_orthonormalize, orthonormalize, Frame};
use crate::{lit, Error, Real, Result};

/// Deterministic generator for stream `stream` of seed `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian<T: Real, R: Rng>(rng: &mut R) -> T {
    lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<T: Real, R: Rng>(rng: &mut R, dim: usize) -> DVector<T> {
    DVector::from_fn(dim, |_, _| gaussian(rng))
}

pub fn gaussian_matrix<T: Real, R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly distributed `m`-dimensional subspace of ℝ⁴ⁿ.
pub fn random_frame<T: Real, R: Rng>(rng: &mut R, n: usize, m: usize) -> Frame<T> {
    loop {
        let f = Frame::span(&gaussian_matrix(rng, 4 * n, m), lit(1e-6));
        if f.dim() == m {
            return f;
        }
    }
}

/// Uniformly distributed unit structure.
pub fn random_structure<T: Real, R: Rng>(rng: &mut R) -> Structure<T> {
    loop {
        let v = Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng));
        if v.norm() > lit(1e-3) {
            return Structure::from_vector(v);
        }
    }
}

/// Haar-distributed rotation in SO(3).
pub fn random_so3<T: Real, R: Rng>(rng: &mut R) -> Matrix3<T> {
    let m = Matrix3::from_fn(|_, _| gaussian::<T, R>(rng));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..3 {
        if r[(i, i)] < T::zero() {
            let c = -q.column(i);
            q.set_column(i, &c);
        }
    }
    if q.determinant() < T::zero() {
        let c = -q.column(0);
        q.set_column(0, &c);
    }
    q
}

/// Random unit quaternion, uniform on S³.
pub fn random_sp1<T: Real, R: Rng>(rng: &mut R) -> Quaternion<T> {
    loop {
        let q = Quaternion::new(gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng));
        let n = q.norm();
        if n > lit(1e-3) {
            return q.scale(T::one() / n);
        }
    }
}

/// Random element of Sp(n) as a real `4n × 4n` matrix: a Gaussian
/// quaternionic matrix made unitary by quaternionic Gram-Schmidt.
pub fn random_sp_n<T: Real, R: Rng>(rng: &mut R, n: usize) -> DMatrix<T> {
    loop {
        let cols = h_orthonormalize(&gaussian_matrix(rng, 4 * n, n), lit(1e-6));
        if cols.ncols() == n {
            let id = h_complete(&DMatrix::zeros(4 * n, 0), lit(1e-6));
            return h_linear_map(&id, &cols);
        }
    }
}

/// Right action of a unit quaternion on every basis vector of `U`.
pub fn act_sp1<T: Real>(u: &Frame<T>, q: Quaternion<T>) -> Frame<T> {
    Frame::from_orthonormal(right_multiply_columns(&u.basis, q))
}

/// Real unit vector of quaternionic slot `a`.
pub fn slot_vector<T: Real>(n: usize, a: usize) -> DVector<T> {
    let mut v = DVector::zeros(4 * n);
    v[4 * a] = T::one();
    v
}

fn need_slots(n: usize, used: usize) -> Result<()> {
    if used > n {
        return Err(Error::Dimension(format!("generator needs {used} quaternionic slots, space has {n}")));
    }
    Ok(())
}

/// The 4-dimensional `I`-complex subspace with Kähler angle `θ`, on slots
/// `slot` and `slot + 1`: `span(X, IX, Z, IZ)` with `X = e_a` and
/// `Z = cos θ (-K e_a) + sin θ e_b`.
pub fn make_complex4<T: Real>(n: usize, i: &Structure<T>, theta: T, slot: usize) -> Result<Frame<T>> {
    need_slots(n, slot + 2)?;
    Ok(Frame::from_orthonormal(columns(4 * n, &complex4_vectors(n, i, theta, slot))))
}

fn complex4_vectors<T: Real>(n: usize, i: &Structure<T>, theta: T, slot: usize) -> Vec<DVector<T>> {
    let (_, _, k) = adapted_triple(i);
    let x = slot_vector::<T>(n, slot);
    let z = -k.apply(x.as_view()) * theta.cos() + slot_vector::<T>(n, slot + 1) * theta.sin();
    vec![x.clone(), i.apply(x.as_view()), z.clone(), i.apply(z.as_view())]
}

/// One pure `I`-complex block: a 4-dimensional addend per multiangle entry
/// and an optional totally complex 2-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpec<T> {
    pub structure: Structure<T>,
    pub multiangle: Vec<T>,
    pub trailing_plane: bool,
}

impl<T: Real> ComplexSpec<T> {
    pub fn slots(&self) -> usize {
        2 * self.multiangle.len() + usize::from(self.trailing_plane)
    }

    pub fn dim(&self) -> usize {
        4 * self.multiangle.len() + 2 * usize::from(self.trailing_plane)
    }

    /// Multiangle as reported by the decomposition: sorted, with the
    /// trailing plane contributing `π/2`.
    pub fn expected_multiangle(&self) -> Vec<T> {
        let mut m = self.multiangle.clone();
        if self.trailing_plane {
            m.push(T::frac_pi_2());
        }
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }
}

fn complex_vectors<T: Real>(n: usize, spec: &ComplexSpec<T>, slot: usize) -> Vec<DVector<T>> {
    let mut out = Vec::new();
    let mut s = slot;
    for &t in &spec.multiangle {
        out.extend(complex4_vectors(n, &spec.structure, t, s));
        s += 2;
    }
    if spec.trailing_plane {
        let x = slot_vector::<T>(n, s);
        out.push(spec.structure.apply(x.as_view()));
        out.push(x);
    }
    out
}

/// Pure complex subspace with prescribed structure and multiangle.
pub fn make_complex_even<T: Real>(n: usize, spec: &ComplexSpec<T>, slot: usize) -> Result<Frame<T>> {
    need_slots(n, slot + spec.slots())?;
    Ok(Frame::span(&columns(4 * n, &complex_vectors(n, spec, slot)), lit(1e-9)))
}

/// Σ-complex subspace: Hermitian-orthogonal pure complex blocks on
/// disjoint slots.
pub fn make_sigma<T: Real>(n: usize, specs: &[ComplexSpec<T>]) -> Result<Frame<T>> {
    let total: usize = specs.iter().map(|s| s.slots()).sum();
    need_slots(n, total)?;
    let mut vecs = Vec::new();
    let mut slot = 0;
    for s in specs {
        vecs.extend(complex_vectors(n, s, slot));
        slot += s.slots();
    }
    Ok(Frame::span(&columns(4 * n, &vecs), lit(1e-9)))
}

/// Quaternionic subspace `𝒬e_0 ⊕ … ` of real dimension `dim` (a multiple of 4).
pub fn make_quaternionic<T: Real>(n: usize, dim: usize) -> Result<Frame<T>> {
    if dim % 4 != 0 {
        return Err(Error::Dimension("quaternionic dimension must be a multiple of 4".into()));
    }
    need_slots(n, dim / 4)?;
    let mut vecs = Vec::new();
    for a in 0..dim / 4 {
        let x = slot_vector::<T>(n, a);
        vecs.push(x.clone());
        for s in [Structure::i(), Structure::j(), Structure::k()] {
            vecs.push(s.apply(x.as_view()));
        }
    }
    Ok(Frame::span(&columns(4 * n, &vecs), lit(1e-9)))
}

/// Real Hermitian-product subspace `span(e_0, …, e_{k-1})`, one slot each.
pub fn make_rhps<T: Real>(n: usize, k: usize) -> Result<Frame<T>> {
    need_slots(n, k)?;
    let vecs: Vec<_> = (0..k).map(|a| slot_vector::<T>(n, a)).collect();
    Ok(Frame::from_orthonormal(columns(4 * n, &vecs)))
}

/// 2-plane `span(X, Y)` with `X·Y = q` for a pure imaginary `q`, `|q| ≤ 1`.
pub fn make_two_plane<T: Real>(n: usize, q: Vector3<T>) -> Result<Frame<T>> {
    let norm = q.norm();
    if norm > T::one() + lit(1e-12) {
        return Err(Error::Precondition("imaginary measure must have norm at most 1".into()));
    }
    need_slots(n, 2)?;
    let x = slot_vector::<T>(n, 0);
    let mut y = crate::hqspace::right_multiply(x.as_view(), Quaternion::from_parts(T::zero(), q));
    let rest = (T::one() - norm * norm).max(T::zero()).sqrt();
    y += slot_vector::<T>(n, 1) * rest;
    Ok(Frame::from_orthonormal(columns(4 * n, &[x, y])))
}

/// One pure complex block of a [`GeneratorSpec::SigmaComplex`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexBlock {
    pub structure: [f64; 3],
    pub multiangle: Vec<f64>,
    #[serde(default)]
    pub trailing_plane: bool,
}

/// Serializable description of a generated subspace. Structure
/// coefficients are taken in the admissible basis of the target space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum GeneratorSpec {
    TwoPlane { im: [f64; 3] },
    Complex4 { structure: [f64; 3], theta: f64 },
    ComplexEven(ComplexBlock),
    SigmaComplex { parts: Vec<ComplexBlock> },
    Quaternionic { dim: usize },
    TotallyRealRhps { dim: usize },
}

fn block_spec(space: &HQSpace<f64>, b: &ComplexBlock) -> Result<ComplexSpec<f64>> {
    let v = Vector3::from(b.structure);
    if v.norm() == 0.0 {
        return Err(Error::Precondition("structure coefficients vanish".into()));
    }
    let right = 0.0..=std::f64::consts::FRAC_PI_2;
    if b.multiangle.iter().any(|t| !right.contains(t)) {
        return Err(Error::Precondition("multiangle entries must lie in [0, π/2]".into()));
    }
    if b.multiangle.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("multiangle must be sorted ascending".into()));
    }
    Ok(ComplexSpec {
        structure: Structure::from_vector(space.from_basis_coords(v).coeffs),
        multiangle: b.multiangle.clone(),
        trailing_plane: b.trailing_plane,
    })
}

impl GeneratorSpec {
    /// The generated subspace, on leading coordinate slots.
    pub fn generate(&self, space: &HQSpace<f64>) -> Result<Frame<f64>> {
        let n = space.n;
        match self {
            Self::TwoPlane { im } => make_two_plane(n, space.from_basis_coords(Vector3::from(*im)).coeffs),
            Self::Complex4 { structure, theta } => {
                let block = ComplexBlock { structure: *structure, multiangle: vec![*theta], trailing_plane: false };
                let spec = block_spec(space, &block)?;
                make_complex4(n, &spec.structure, *theta, 0)
            }
            Self::ComplexEven(block) => make_complex_even(n, &block_spec(space, block)?, 0),
            Self::SigmaComplex { parts } => {
                let specs = parts.iter().map(|b| block_spec(space, b)).collect::<Result<Vec<_>>>()?;
                make_sigma(n, &specs)
            }
            Self::Quaternionic { dim } => make_quaternionic(n, *dim),
            Self::TotallyRealRhps { dim } => make_rhps(n, *dim),
        }
    }
}

/// Random Σ-complex specification fitting into `n` slots: two or three
/// well separated structures, each with one or two addends.
pub fn random_sigma_spec<R: Rng>(rng: &mut R, n: usize) -> Vec<ComplexSpec<f64>> {
    loop {
        let count = rng.random_range(2..=3usize);
        let mut specs: Vec<ComplexSpec<f64>> = Vec::new();
        let mut slots = 0;
        for _ in 0..count {
            let structure = loop {
                let s: Structure<f64> = random_structure(rng);
                if specs.iter().all(|o| o.structure.coeffs.dot(&s.coeffs).abs() < 0.9) {
                    break s;
                }
            };
            let addends = rng.random_range(1..=2usize);
            let multiangle: Vec<f64> = (0..addends)
                .map(|_| {
                    if rng.random_bool(0.15) {
                        std::f64::consts::FRAC_PI_2
                    } else {
                        rng.random_range(0.1..1.5)
                    }
                })
                .collect();
            let trailing_plane = rng.random_bool(0.25);
            let spec = ComplexSpec { structure, multiangle, trailing_plane };
            slots += spec.slots();
            specs.push(spec);
        }
        if slots <= n {
            return specs;
        }
    }
}

/// Reference principal angles from the eigenvalues of `MMᵀ`,
/// `M = BᵤᵀB_w`; ascending.
pub fn oracle_principal_angles<T: Real>(u: &Frame<T>, w: &Frame<T>) -> Vec<T> {
    let (a, b) = if u.dim() <= w.dim() { (u, w) } else { (w, u) };
    if a.dim() == 0 {
        return Vec::new();
    }
    let m = a.basis.transpose() * &b.basis;
    let eig = SymmetricEigen::new(&m * m.transpose());
    let mut angles: Vec<T> = eig
        .eigenvalues
        .iter()
        .map(|&l| crate::angles::clamp_unit(l.max(T::zero()).sqrt()).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles
}

/// Reference Hermitian product using nalgebra's quaternion type.
pub fn oracle_hermitian_product(l: &DVector<f64>, m: &DVector<f64>) -> Quaternion<f64> {
    let mut acc = nalgebra::Quaternion::new(0.0, 0.0, 0.0, 0.0);
    for a in 0..l.len() / 4 {
        let s = 4 * a;
        let h = nalgebra::Quaternion::new(l[s], l[s + 1], l[s + 2], l[s + 3]);
        let g = nalgebra::Quaternion::new(m[s], m[s + 1], m[s + 2], m[s + 3]);
        acc += h.conjugate() * g;
    }
    Quaternion::new(acc.w, acc.i, acc.j, acc.k)
}

/// Orthonormal basis of a random subspace of `U`'s span, reusing `U`.
pub fn random_rebasis<T: Real, R: Rng>(rng: &mut R, u: &Frame<T>) -> Frame<T> {
    let m = u.dim();
    loop {
        let mix = gaussian_matrix::<T, R>(rng, m, m);
        let b = orthonormalize(&(&u.basis * mix), lit(1e-6));
        if b.ncols() == m {
            return Frame::from_orthonormal(b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hqspace::commutator_norms;

    #[test]
    fn sp_n_sample_is_orthogonal_and_h_linear() {
        let mut r = rng(7, 0);
        let g: DMatrix<f64> = random_sp_n(&mut r, 4);
        assert!((g.transpose() * &g - DMatrix::identity(16, 16)).norm() < 1e-12);
        for c in commutator_norms(&g) {
            assert!(c < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = gaussian(&mut rng(3, 5));
        let b: f64 = gaussian(&mut rng(3, 5));
        let c: f64 = gaussian(&mut rng(3, 6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generators_produce_requested_dimensions() {
        let u: Frame<f64> = make_complex4(4, &Structure::i(), 0.5, 0).unwrap();
        assert_eq!(u.dim(), 4);
        assert!(u.orthonormality_residual() < 1e-14);
        assert_eq!(make_quaternionic::<f64>(4, 8).unwrap().dim(), 8);
        assert_eq!(make_rhps::<f64>(4, 3).unwrap().dim(), 3);
        assert!(make_rhps::<f64>(2, 3).is_err());
        let spec = ComplexSpec { structure: Structure::j(), multiangle: vec![0.3, 0.9], trailing_plane: true };
        assert_eq!(make_complex_even(8, &spec, 1).unwrap().dim(), 10);
    }

    #[test]
    fn two_plane_has_requested_measure() {
        let q = Vector3::new(0.3, -0.2, 0.5);
        let u: Frame<f64> = make_two_plane(2, q).unwrap();
        let p = crate::hqspace::hermitian_product(u.basis.column(0), u.basis.column(1));
        assert!((p.imag() - q).norm() < 1e-15);
        assert!(p.w.abs() < 1e-15);
    }
}
