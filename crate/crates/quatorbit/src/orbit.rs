//! Sp(n)-invariants of subspaces, orbit comparison and explicit witnesses.

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector4};

use crate::angles::{isoclinicity, principal_angles, wedge_norm};
use crate::decompose::{full_decompose, Decomposition, SearchConfig};
use crate::hqspace::{
    adapted_triple, commutator_norms, h_linear_map, hermitian_product, right_multiply, HQSpace, Quaternion,
    Structure,
};
use crate::kaehlerform::restrict_form;
use crate::subspace::{columns, complement_in, h_complete, orthonormalize, Frame};
use crate::{lit, Error, Real, Result, Tolerances};

/// Imaginary measure `Im(X·Y) / |X ∧ Y|` of the oriented plane `(X, Y)`,
/// with coordinates in the admissible basis of `space`.
pub fn imaginary_measure<T: Real>(
    space: &HQSpace<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    tol: T,
) -> Result<Vector3<T>> {
    let mis = wedge_norm(x.as_view(), y.as_view());
    if mis <= tol * x.norm() * y.norm() {
        return Err(Error::Degenerate("imaginary measure of parallel vectors".into()));
    }
    Ok(space.hermitian_product(x.as_view(), y.as_view()).imag() / mis)
}

/// Mean of `|Im(X_r·X_s)|²` over pairs `r < s` of an orthonormal basis.
pub fn characteristic_deviation<T: Real>(u: &Frame<T>) -> Result<T> {
    let m = u.dim();
    if m < 2 {
        return Err(Error::Dimension("characteristic deviation needs dim ≥ 2".into()));
    }
    let mut acc = T::zero();
    for r in 0..m {
        for s in r + 1..m {
            acc += hermitian_product(u.basis.column(r), u.basis.column(s)).imag().norm_squared();
        }
    }
    Ok(acc / lit((m * (m - 1) / 2) as f64))
}

/// The six chains of a subspace in 𝓘𝓒⁴, as `4n × 4` matrices.
#[derive(Clone, Debug)]
pub struct Chains<T> {
    pub x: DMatrix<T>,
    pub y: DMatrix<T>,
    pub z: DMatrix<T>,
    pub x_tilde: DMatrix<T>,
    pub y_tilde: DMatrix<T>,
    pub z_tilde: DMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct Ic4Invariants<T> {
    /// Isoclinic angles `(θ^I, θ^J, θ^K)` for the admissible basis.
    pub angles: [T; 3],
    pub xi: T,
    pub chi: T,
    pub eta: T,
    pub gamma: T,
    pub delta: T,
    pub c_ij: Matrix4<T>,
    pub c_ik: Matrix4<T>,
    /// Set when the subspace splits into 2-planes and the simplified chain
    /// definition was used.
    pub degenerate: bool,
    pub chains: Chains<T>,
    pub warnings: Vec<String>,
}

fn snap_unit<T: Real>(v: T, tol: T) -> T {
    if (v - T::one()).abs() <= tol || v > T::one() {
        T::one()
    } else if (v + T::one()).abs() <= tol || v < -T::one() {
        -T::one()
    } else {
        v
    }
}

fn first_orthogonal<T: Real>(given: &[Vector4<T>]) -> Vector4<T> {
    let mut best = Vector4::zeros();
    let mut best_norm = T::zero();
    for e in 0..4 {
        let mut v = Vector4::zeros();
        v[e] = T::one();
        for g in given {
            v -= g * g.dot(&v);
        }
        let nv = v.norm();
        if nv > best_norm {
            best_norm = nv;
            best = v / nv;
        }
    }
    best
}

fn closed_forms<T: Real>(xi: T, chi: T, gamma: T, delta: T) -> (Matrix4<T>, Matrix4<T>) {
    let (o, l) = (T::zero(), T::one());
    let sx = (l - xi * xi).max(o).sqrt();
    let sc = (l - chi * chi).max(o).sqrt();
    #[rustfmt::skip]
    let c_ij = Matrix4::new(
        l, o, o, o,
        o, xi, o, -sx,
        o, o, l, o,
        o, sx, o, xi,
    );
    #[rustfmt::skip]
    let c_ik = Matrix4::new(
        l, o, o, o,
        o, chi, o, -sc,
        o, -delta * sc, gamma, -chi * delta,
        o, gamma * sc, delta, chi * gamma,
    );
    (c_ij, c_ik)
}

/// Closed-form matrices `C_IJ`, `C_IK` determined by `(ξ, χ, Γ, Δ)`.
pub fn canonical_matrices<T: Real>(inv: &Ic4Invariants<T>) -> (Matrix4<T>, Matrix4<T>) {
    closed_forms(inv.xi, inv.chi, inv.gamma, inv.delta)
}

/// Invariants of a subspace in 𝓘𝓒⁴, built from the leading vector `X_1`
/// (the first basis vector when `leading` is `None`).
pub fn ic4_invariants<T: Real>(
    space: &HQSpace<T>,
    u: &Frame<T>,
    leading: Option<&DVector<T>>,
    tol: &Tolerances<T>,
) -> Result<Ic4Invariants<T>> {
    if u.dim() != 4 {
        return Err(Error::Dimension(format!("𝓘𝓒⁴ needs a 4-dimensional subspace, got {}", u.dim())));
    }
    let structs = [space.struct_i(), space.struct_j(), space.struct_k()];
    let mut cos = [T::zero(); 3];
    let mut angles = [T::zero(); 3];
    let mut om: Vec<nalgebra::Matrix4<T>> = Vec::new();
    for (p, s) in structs.iter().enumerate() {
        let iso = isoclinicity(s, u, tol.iso);
        if !iso.isoclinic {
            return Err(Error::Precondition(format!(
                "subspace is not isoclinic for structure {} (deviation {:e})",
                ["I", "J", "K"][p],
                crate::to_f64(iso.deviation)
            )));
        }
        let c = iso.angle.cos();
        cos[p] = if c <= tol.snap { T::zero() } else if c >= T::one() - tol.snap { T::one() } else { c };
        angles[p] = iso.angle;
        let o = restrict_form(s, u).omega;
        om.push(Matrix4::from_fn(|i, j| o[(i, j)]));
    }
    let x1: Vector4<T> = match leading {
        Some(v) => {
            let c = u.basis.transpose() * v;
            let c = Vector4::new(c[0], c[1], c[2], c[3]);
            if c.norm() < lit(1e-6) {
                return Err(Error::Precondition("leading vector is not in the subspace".into()));
            }
            c / c.norm()
        }
        None => Vector4::x(),
    };
    let partner = |p: usize, v: &Vector4<T>| om[p].transpose() * v / cos[p];
    let lift = |p: usize, v: &Vector4<T>| om[p] * v / cos[p];
    let mut warnings = Vec::new();

    let mut degenerate = cos.iter().any(|&c| c == T::zero());
    let (mut xi, mut chi, mut eta) = (T::one(), T::one(), T::one());
    if !degenerate {
        let (x2, y2, z2) = (partner(0, &x1), partner(1, &x1), partner(2, &x1));
        xi = snap_unit(x2.dot(&y2), tol.snap);
        chi = snap_unit(x2.dot(&z2), tol.snap);
        eta = snap_unit(y2.dot(&z2), tol.snap);
        let units = [xi, chi, eta].iter().filter(|v| v.abs() == T::one()).count();
        if units > 0 {
            degenerate = true;
            if units == 1 {
                warnings.push("exactly one of ξ, χ, η is ±1; using the split branch".to_string());
            }
        }
    }

    let to_ambient = |c: [Vector4<T>; 4]| {
        let mut m = DMatrix::zeros(u.ambient(), 4);
        for (j, v) in c.iter().enumerate() {
            m.set_column(j, &(&u.basis * DVector::from_column_slice(v.as_slice())));
        }
        m
    };

    let (chains, gamma, delta) = if degenerate {
        let primary = (0..3).find(|&p| cos[p] > T::zero());
        let x2 = match primary {
            Some(p) => partner(p, &x1),
            None => first_orthogonal(&[x1]),
        };
        let mut others = [None, None, None];
        for p in 0..3 {
            if cos[p] > T::zero() {
                others[p] = Some(partner(p, &x1));
            }
        }
        let sign = |p: usize| others[p].map_or(T::one(), |v| snap_unit(v.dot(&x2), tol.snap));
        xi = sign(1) * sign(0);
        chi = sign(2) * sign(0);
        eta = match (others[1], others[2]) {
            (Some(a), Some(b)) => snap_unit(a.dot(&b), tol.snap),
            _ => xi * chi,
        };
        for (name, v) in [("ξ", xi), ("χ", chi), ("η", eta)] {
            if v.abs() != T::one() {
                warnings.push(format!("{name} = {} is not ±1 on the split branch", crate::to_f64(v)));
            }
        }
        let x3 = first_orthogonal(&[x1, x2]);
        let x4 = match primary {
            Some(p) => {
                let v = partner(p, &x3);
                let v = v - x1 * x1.dot(&v) - x2 * x2.dot(&v) - x3 * x3.dot(&v);
                v / v.norm()
            }
            None => first_orthogonal(&[x1, x2, x3]),
        };
        let x = [x1, x2, x3, x4];
        let y = [x1, x2 * xi, x3, x4 * xi];
        let z = [x1, x2 * chi, x3, x4 * chi];
        let chains = Chains {
            x: to_ambient(x),
            y: to_ambient(y),
            z: to_ambient(z),
            x_tilde: to_ambient(x),
            y_tilde: to_ambient(y),
            z_tilde: to_ambient(z),
        };
        (chains, T::one(), T::zero())
    } else {
        let (x2, y2, z2) = (partner(0, &x1), partner(1, &x1), partner(2, &x1));
        let sx = (T::one() - xi * xi).sqrt();
        let sc = (T::one() - chi * chi).sqrt();
        let se = (T::one() - eta * eta).sqrt();
        let x4 = (y2 - x2 * xi) / sx;
        let y4 = (-x2 + y2 * xi) / sx;
        let x3 = lift(0, &x4);
        let y3 = lift(1, &y4);
        let xt4 = (z2 - x2 * chi) / sc;
        let z4 = (-x2 + z2 * chi) / sc;
        let xt3 = lift(0, &xt4);
        let z3 = lift(2, &z4);
        let yt4 = (z2 - y2 * eta) / se;
        let zt4 = (-y2 + z2 * eta) / se;
        let yt3 = lift(1, &yt4);
        let zt3 = lift(2, &zt4);
        let gamma = (eta - xi * chi) / (sx * sc);
        let delta = x4.dot(&xt3);
        let chains = Chains {
            x: to_ambient([x1, x2, x3, x4]),
            y: to_ambient([x1, y2, y3, y4]),
            z: to_ambient([x1, z2, z3, z4]),
            x_tilde: to_ambient([x1, x2, xt3, xt4]),
            y_tilde: to_ambient([x1, y2, yt3, yt4]),
            z_tilde: to_ambient([x1, z2, zt3, zt4]),
        };
        (chains, gamma, delta)
    };
    let gram = |a: &DMatrix<T>, b: &DMatrix<T>| {
        let g = a.transpose() * b;
        Matrix4::from_fn(|i, j| g[(i, j)])
    };
    let c_ij = gram(&chains.x, &chains.y);
    let c_ik = gram(&chains.x, &chains.z);
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Ic4Invariants { angles, xi, chi, eta, gamma, delta, c_ij, c_ik, degenerate, chains, warnings })
}

/// `cos² θ^A` from the expansion in `ξ, χ, η` and the isoclinic angles;
/// `a` holds the coefficients of `A` in the admissible basis.
pub fn isoclinic_cos2_expansion<T: Real>(inv: &Ic4Invariants<T>, a: &Vector3<T>) -> T {
    let [ci, cj, ck] = inv.angles.map(|t| t.cos());
    let two = lit::<T>(2.0);
    a.x * a.x * ci * ci
        + a.y * a.y * cj * cj
        + a.z * a.z * ck * ck
        + two * inv.xi * a.x * a.y * ci * cj
        + two * inv.chi * a.x * a.z * ci * ck
        + two * inv.eta * a.y * a.z * cj * ck
}

/// Isoclinic angle of a 4-dimensional `I`-complex subspace with Kähler
/// angle `θ` against a structure `A` with `⟨A, I⟩ = α`.
pub fn complex4_isoclinic_angle<T: Real>(alpha: T, theta: T) -> T {
    let c2 = alpha * alpha + (T::one() - alpha * alpha) * theta.cos().powi(2);
    crate::angles::clamp_unit(c2.sqrt()).acos()
}

/// Kähler angle of a 4-dimensional `I`-complex subspace read off any
/// `I`-orthonormal pair: `cos θ = sqrt(⟨X,KY⟩² + ⟨X,JY⟩²)`.
pub fn i_perp_kaehler_angle<T: Real>(i: &Structure<T>, u: &Frame<T>, tol: T) -> Result<T> {
    if u.dim() != 4 {
        return Err(Error::Dimension("expected a 4-dimensional complex subspace".into()));
    }
    let x = u.basis.column(0).into_owned();
    let plane = Frame::span(&columns(u.ambient(), &[x.clone(), i.apply(x.as_view())]), tol);
    let rest = complement_in(u, &plane);
    if rest.dim() != 2 {
        return Err(Error::Precondition("subspace is not invariant under the structure".into()));
    }
    let y = rest.basis.column(0);
    let (_, j, k) = adapted_triple(i);
    let c = (x.dot(&k.apply(y)).powi(2) + x.dot(&j.apply(y)).powi(2)).sqrt();
    Ok(crate::angles::clamp_unit(c).acos())
}

/// The singular partner `Z = K⁻¹ Pr^{KU} X / cos θ` of `X`, and the
/// associated plane `L(X, Z)`.
pub fn associated_plane<T: Real>(
    i: &Structure<T>,
    u: &Frame<T>,
    x: &DVector<T>,
    k: &Structure<T>,
    tol: T,
) -> Result<Frame<T>> {
    if i.coeffs.dot(&k.coeffs).abs() > lit(1e-9) {
        return Err(Error::Precondition("K must be orthogonal to I".into()));
    }
    let c = k.apply_columns(&u.basis).transpose() * x;
    if c.norm() <= tol {
        return Err(Error::Degenerate("no singular partner: the Kähler angle is a right angle".into()));
    }
    let z = &u.basis * (&c / c.norm());
    let xn = x / x.norm();
    Ok(Frame::from_orthonormal(columns(u.ambient(), &[xn, z])))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubspaceClass<T> {
    TwoPlane,
    Quaternionic,
    Ic4,
    PureComplex(Structure<T>),
    SigmaComplex,
    TotallyReal,
    Other,
}

impl<T> SubspaceClass<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TwoPlane => "two-plane",
            Self::Quaternionic => "quaternionic",
            Self::Ic4 => "ic4",
            Self::PureComplex(_) => "pure-complex",
            Self::SigmaComplex => "sigma-complex",
            Self::TotallyReal => "totally-real",
            Self::Other => "other",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Classification<T> {
    pub class: SubspaceClass<T>,
    /// Whether `U` lies in 𝓘𝓒⁴ for the admissible basis.
    pub ic4: bool,
    pub decomposition: Option<Decomposition<T>>,
}

fn in_ic4<T: Real>(space: &HQSpace<T>, u: &Frame<T>, tol: &Tolerances<T>) -> bool {
    u.dim() == 4
        && [space.struct_i(), space.struct_j(), space.struct_k()]
            .iter()
            .all(|s| isoclinicity(s, u, tol.iso).isoclinic)
}

pub fn classify<T: Real>(space: &HQSpace<T>, u: &Frame<T>, tol: &Tolerances<T>) -> Result<Classification<T>> {
    let ic4 = in_ic4(space, u, tol);
    if u.dim() == 2 {
        return Ok(Classification { class: SubspaceClass::TwoPlane, ic4, decomposition: None });
    }
    let dec = full_decompose(u, tol, &SearchConfig::default())?;
    let class = if dec.quaternionic.dim() == u.dim() && u.dim() > 0 {
        SubspaceClass::Quaternionic
    } else if dec.quaternionic.dim() == 0 && dec.real.dim() == 0 && dec.sigma.len() == 1 {
        SubspaceClass::PureComplex(dec.sigma[0].structure)
    } else if dec.quaternionic.dim() == 0 && dec.real.dim() == 0 && dec.sigma.len() > 1 {
        SubspaceClass::SigmaComplex
    } else if dec.quaternionic.dim() == 0 && dec.sigma.is_empty() {
        if ic4 {
            SubspaceClass::Ic4
        } else {
            SubspaceClass::TotallyReal
        }
    } else {
        SubspaceClass::Other
    };
    Ok(Classification { class, ic4, decomposition: Some(dec) })
}

/// Complete Sp(n)-invariant of a subspace in one of the supported classes.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitInvariant<T> {
    /// Imaginary measure up to sign, stored with a canonical sign.
    TwoPlane { measure: Vector3<T> },
    Ic4 { angles: [T; 3], xi: T, chi: T, eta: T, delta: T },
    Complex { structure: Structure<T>, multiangle: Vec<T> },
    SigmaComplex { parts: Vec<(Structure<T>, Vec<T>)> },
    Quaternionic { dim: usize },
    /// Subspaces on which every Kähler form vanishes (real Hermitian
    /// product subspaces); one orbit per dimension.
    Rhps { dim: usize },
}

impl<T: Real> OrbitInvariant<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::TwoPlane { .. } => "two-plane",
            Self::Ic4 { .. } => "ic4",
            Self::Complex { .. } => "complex",
            Self::SigmaComplex { .. } => "sigma-complex",
            Self::Quaternionic { .. } => "quaternionic",
            Self::Rhps { .. } => "rhps",
        }
    }
}

fn canonical_vector<T: Real>(v: Vector3<T>) -> Vector3<T> {
    let s = Structure { coeffs: v }.canonical();
    s.coeffs
}

fn forms_vanish<T: Real>(u: &Frame<T>, tol: T) -> bool {
    [Structure::i(), Structure::j(), Structure::k()]
        .iter()
        .all(|s| restrict_form(s, u).omega.amax() <= tol)
}

pub fn orbit_invariant<T: Real>(space: &HQSpace<T>, u: &Frame<T>, tol: &Tolerances<T>) -> Result<OrbitInvariant<T>> {
    if u.dim() < 2 || forms_vanish(u, tol.snap) {
        return Ok(OrbitInvariant::Rhps { dim: u.dim() });
    }
    let cls = classify(space, u, tol)?;
    let to_basis = |s: &Structure<T>| Structure { coeffs: space.to_basis_coords(s) }.canonical();
    match cls.class {
        SubspaceClass::TwoPlane => {
            let b = &u.basis;
            let m = imaginary_measure(space, &b.column(0).into_owned(), &b.column(1).into_owned(), tol.rank)?;
            Ok(OrbitInvariant::TwoPlane { measure: canonical_vector(m) })
        }
        SubspaceClass::Quaternionic => Ok(OrbitInvariant::Quaternionic { dim: u.dim() }),
        SubspaceClass::PureComplex(_) => {
            let dec = cls.decomposition.expect("decomposition");
            let s = &dec.sigma[0];
            Ok(OrbitInvariant::Complex { structure: to_basis(&s.structure), multiangle: s.multiangle() })
        }
        SubspaceClass::SigmaComplex => {
            let dec = cls.decomposition.expect("decomposition");
            Ok(OrbitInvariant::SigmaComplex {
                parts: dec.sigma.iter().map(|s| (to_basis(&s.structure), s.multiangle())).collect(),
            })
        }
        SubspaceClass::Ic4 => {
            let inv = ic4_invariants(space, u, None, tol)?;
            Ok(OrbitInvariant::Ic4 {
                angles: inv.angles,
                xi: inv.xi,
                chi: inv.chi,
                eta: inv.eta,
                delta: inv.delta,
            })
        }
        SubspaceClass::TotallyReal | SubspaceClass::Other => Err(Error::Precondition(format!(
            "no complete invariant for class {}",
            cls.class.name()
        ))),
    }
}

fn sign_free_distance<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> T {
    (a - b).amax().min((a + b).amax())
}

fn angles_distance<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    if a.len() != b.len() {
        return None;
    }
    Some(a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs())))
}

/// Pairs the parts of two Σ-complex invariants greedily by distance.
fn match_parts<T: Real>(
    a: &[(Structure<T>, Vec<T>)],
    b: &[(Structure<T>, Vec<T>)],
) -> Option<(Vec<usize>, T)> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut out = Vec::new();
    let mut worst = T::zero();
    for (sa, ma) in a {
        let mut best: Option<(usize, T)> = None;
        for (j, (sb, mb)) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let Some(da) = angles_distance(ma, mb) else { continue };
            let d = sign_free_distance(&sa.coeffs, &sb.coeffs).max(da);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best?;
        used[j] = true;
        out.push(j);
        worst = worst.max(d);
    }
    Some((out, worst))
}

/// Largest coordinate difference between two invariants, or `None` when
/// they are of different kinds or shapes.
pub fn invariant_distance<T: Real>(a: &OrbitInvariant<T>, b: &OrbitInvariant<T>) -> Option<T> {
    use OrbitInvariant::*;
    match (a, b) {
        (TwoPlane { measure: p }, TwoPlane { measure: q }) => Some(sign_free_distance(p, q)),
        (
            Ic4 { angles: a1, xi: x1, chi: c1, eta: e1, delta: d1 },
            Ic4 { angles: a2, xi: x2, chi: c2, eta: e2, delta: d2 },
        ) => {
            let d = angles_distance(a1, a2)?;
            Some(
                [(*x1 - *x2), (*c1 - *c2), (*e1 - *e2), (*d1 - *d2)]
                    .iter()
                    .fold(d, |m, v| m.max(v.abs())),
            )
        }
        (Complex { structure: s1, multiangle: m1 }, Complex { structure: s2, multiangle: m2 }) => {
            Some(sign_free_distance(&s1.coeffs, &s2.coeffs).max(angles_distance(m1, m2)?))
        }
        (SigmaComplex { parts: p1 }, SigmaComplex { parts: p2 }) => match_parts(p1, p2).map(|(_, d)| d),
        (Quaternionic { dim: d1 }, Quaternionic { dim: d2 }) | (Rhps { dim: d1 }, Rhps { dim: d2 }) => {
            (d1 == d2).then_some(T::zero())
        }
        _ => None,
    }
}

/// Whether two invariants agree within `tol`.
pub fn invariants_match<T: Real>(a: &OrbitInvariant<T>, b: &OrbitInvariant<T>, tol: T) -> bool {
    invariant_distance(a, b).is_some_and(|d| d <= tol)
}

pub fn same_orbit<T: Real>(space: &HQSpace<T>, u: &Frame<T>, w: &Frame<T>, tol: &Tolerances<T>) -> Result<bool> {
    if u.dim() != w.dim() {
        return Ok(false);
    }
    let a = orbit_invariant(space, u, tol)?;
    let b = orbit_invariant(space, w, tol)?;
    Ok(invariants_match(&a, &b, tol.compare))
}

/// Oriented 2-plane comparison: each plane carries the orientation of its
/// stored basis, and the imaginary measures must agree with their signs.
pub fn same_oriented_two_plane_orbit<T: Real>(
    space: &HQSpace<T>,
    u: &Frame<T>,
    w: &Frame<T>,
    tol: &Tolerances<T>,
) -> Result<bool> {
    if u.dim() != 2 || w.dim() != 2 {
        return Err(Error::Dimension("oriented comparison needs two 2-planes".into()));
    }
    let m = |f: &Frame<T>| {
        imaginary_measure(space, &f.basis.column(0).into_owned(), &f.basis.column(1).into_owned(), tol.rank)
    };
    Ok((m(u)? - m(w)?).amax() <= tol.compare)
}

/// An element `g ∈ Sp(n)` with `gU = W`, with the checks performed on it.
#[derive(Clone, Debug)]
pub struct SpnWitness<T> {
    pub matrix: DMatrix<T>,
    pub max_principal_angle: T,
    pub commutator_norms: [T; 3],
    pub orthogonality_residual: T,
}

/// Basis of a complex subspace whose Hermitian Gram matrix depends only on
/// its structure and multiangle.
fn complex_basis<T: Real>(
    s: &Structure<T>,
    addends: &[crate::decompose::ComplexAddend<T>],
    tol: &Tolerances<T>,
) -> Vec<DVector<T>> {
    let (_, _, k) = adapted_triple(s);
    let mut out = Vec::new();
    for a in addends {
        let f = &a.frame;
        let x = f.basis.column(0).into_owned();
        if f.dim() == 2 {
            out.push(x);
        } else if (a.theta - T::frac_pi_2()).abs() <= tol.compare {
            let plane = Frame::span(&columns(f.ambient(), &[x.clone(), s.apply(x.as_view())]), tol.rank);
            let rest = complement_in(f, &plane);
            out.push(x);
            out.push(rest.basis.column(0).into_owned());
        } else {
            let c = k.apply_columns(&f.basis).transpose() * &x;
            out.push(x);
            out.push(&f.basis * (&c / c.norm()));
        }
    }
    out
}

fn matched_bases<T: Real>(
    space: &HQSpace<T>,
    u: &Frame<T>,
    w: &Frame<T>,
    inv: &OrbitInvariant<T>,
    tol: &Tolerances<T>,
) -> Result<(Vec<DVector<T>>, Vec<DVector<T>>)> {
    let cols = |f: &Frame<T>| f.basis.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>();
    match inv {
        OrbitInvariant::Rhps { .. } | OrbitInvariant::Quaternionic { .. } => Ok((cols(u), cols(w))),
        OrbitInvariant::TwoPlane { .. } => {
            let (a, b) = (u.basis.column(0).into_owned(), u.basis.column(1).into_owned());
            let (c, mut d) = (w.basis.column(0).into_owned(), w.basis.column(1).into_owned());
            let mu = hermitian_product(a.as_view(), b.as_view()).imag();
            let mw = hermitian_product(c.as_view(), d.as_view()).imag();
            if (mu + mw).norm() < (mu - mw).norm() {
                d = -d;
            }
            Ok((vec![a, b], vec![c, d]))
        }
        OrbitInvariant::Ic4 { .. } => {
            let iu = ic4_invariants(space, u, None, tol)?;
            let iw = ic4_invariants(space, w, None, tol)?;
            let split = |m: &DMatrix<T>| m.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>();
            Ok((split(&iu.chains.x), split(&iw.chains.x)))
        }
        OrbitInvariant::Complex { .. } | OrbitInvariant::SigmaComplex { .. } => {
            let cfg = SearchConfig::default();
            let du = full_decompose(u, tol, &cfg)?;
            let dw = full_decompose(w, tol, &cfg)?;
            let parts = |d: &Decomposition<T>| {
                d.sigma.iter().map(|s| (s.structure, s.multiangle())).collect::<Vec<_>>()
            };
            let pairing = match_parts(&parts(&du), &parts(&dw))
                .filter(|(_, d)| *d <= tol.compare)
                .ok_or_else(|| Error::Precondition("decompositions do not match".into()))?
                .0;
            let (mut bu, mut bw) = (Vec::new(), Vec::new());
            for (i, &j) in pairing.iter().enumerate() {
                let s = du.sigma[i].structure;
                bu.extend(complex_basis(&s, &du.sigma[i].addends, tol));
                bw.extend(complex_basis(&s, &dw.sigma[j].addends, tol));
            }
            Ok((bu, bw))
        }
    }
}

/// Quaternionic Gram-Schmidt run on both sequences with the rank decisions
/// of the first; the Hermitian Gram matrices must agree for this to match.
fn joint_h_orthonormalize<T: Real>(
    xs: &[DVector<T>],
    ys: &[DVector<T>],
    tol: T,
) -> Option<(Vec<DVector<T>>, Vec<DVector<T>>)> {
    let (mut es, mut fs): (Vec<DVector<T>>, Vec<DVector<T>>) = (Vec::new(), Vec::new());
    let slack = lit::<T>(1e-4);
    for (x, y) in xs.iter().zip(ys) {
        let (mut v, mut w) = (x.clone(), y.clone());
        for _ in 0..2 {
            for (e, f) in es.iter().zip(&fs) {
                v -= right_multiply(e.as_view(), hermitian_product(e.as_view(), v.as_view()));
                w -= right_multiply(f.as_view(), hermitian_product(f.as_view(), w.as_view()));
            }
        }
        let (rv, rw) = (v.norm(), w.norm());
        if rv > tol.max(slack) {
            if rw <= slack {
                return None;
            }
            es.push(v / rv);
            fs.push(w / rw);
        } else if rw > slack {
            return None;
        }
    }
    Some((es, fs))
}

/// Some `g ∈ Sp(n)` with `gU = W`, or `None` if the constructed map fails
/// verification. Errors when the subspaces lie in different orbits.
pub fn sp_n_witness<T: Real>(
    space: &HQSpace<T>,
    u: &Frame<T>,
    w: &Frame<T>,
    tol: &Tolerances<T>,
) -> Result<Option<SpnWitness<T>>> {
    if u.dim() != w.dim() {
        return Err(Error::Precondition("subspaces of different dimension".into()));
    }
    let iu = orbit_invariant(space, u, tol)?;
    let iw = orbit_invariant(space, w, tol)?;
    if !invariants_match(&iu, &iw, tol.compare) {
        return Err(Error::Precondition("subspaces lie in different Sp(n) orbits".into()));
    }
    let (xs, ys) = matched_bases(space, u, w, &iu, tol)?;
    let Some((es, fs)) = joint_h_orthonormalize(&xs, &ys, tol.rank) else {
        return Ok(None);
    };
    let dim = u.ambient();
    let e_full = h_complete(&columns(dim, &es), tol.rank);
    let f_full = h_complete(&columns(dim, &fs), tol.rank);
    if e_full.ncols() != dim / 4 || f_full.ncols() != dim / 4 {
        return Ok(None);
    }
    let g = h_linear_map(&e_full, &f_full);
    let gu = Frame::from_orthonormal(orthonormalize(&(&g * &u.basis), tol.rank));
    let max_principal_angle = if gu.dim() == w.dim() {
        principal_angles(&gu, w).max_angle()
    } else {
        T::frac_pi_2()
    };
    let orthogonality_residual = (g.transpose() * &g - DMatrix::identity(dim, dim)).norm();
    let commutator_norms = commutator_norms(&g);
    let ok = max_principal_angle <= tol.compare
        && orthogonality_residual <= tol.compare
        && commutator_norms.iter().all(|&c| c <= tol.compare);
    Ok(ok.then_some(SpnWitness { matrix: g, max_principal_angle, commutator_norms, orthogonality_residual }))
}

/// Right action of Sp(1) composed with an Sp(n) element, as used by the
/// invariance checks of the characteristic deviation.
pub fn act_sp_n_sp1<T: Real>(g: &DMatrix<T>, q: Quaternion<T>, u: &Frame<T>) -> Frame<T> {
    let moved = crate::hqspace::right_multiply_columns(&(g * &u.basis), q);
    Frame::from_orthonormal(moved)
}
