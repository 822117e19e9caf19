//! Decomposition `U = U_Q ⊕ Σ (U_i, I_i) ⊕ U_R` and Kähler multiangles.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};

use crate::hqspace::{adapted_triple, Structure};
use crate::kaehlerform::{combine_forms, invariant_subspaces, max_invariant_subspace, restrict_form};
use crate::subspace::{columns, complement_in, Frame};
use crate::{lit, Error, Real, Result, Tolerances};

/// Grid and ascent parameters of the search for complex structures.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Polar subdivisions of S² (only the upper half is visited, since
    /// `A` and `-A` give the same value).
    pub polar: usize,
    pub azimuth: usize,
    /// Number of best grid nodes refined by local ascent.
    pub seeds: usize,
    pub max_iter: usize,
    pub converge: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { polar: 64, azimuth: 128, seeds: 6, max_iter: 2000, converge: 1e-12 }
    }
}

/// A 4-dimensional complex addend with its Kähler angle, or the trailing
/// totally complex 2-plane when the complex dimension is odd.
#[derive(Clone, Debug)]
pub struct ComplexAddend<T> {
    pub theta: T,
    pub frame: Frame<T>,
}

#[derive(Clone, Debug)]
pub struct SigmaAddend<T> {
    pub structure: Structure<T>,
    pub frame: Frame<T>,
    pub addends: Vec<ComplexAddend<T>>,
}

impl<T: Real> SigmaAddend<T> {
    pub fn multiangle(&self) -> Vec<T> {
        self.addends.iter().map(|a| a.theta).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition<T> {
    pub quaternionic: Frame<T>,
    /// Sorted lexicographically by structure coefficients.
    pub sigma: Vec<SigmaAddend<T>>,
    pub real: Frame<T>,
    /// `max |BᵀB - Id|` over the concatenated parts.
    pub orthogonality_residual: T,
    pub warnings: Vec<String>,
}

impl<T: Real> Decomposition<T> {
    pub fn dim(&self) -> usize {
        self.quaternionic.dim() + self.sigma.iter().map(|s| s.frame.dim()).sum::<usize>() + self.real.dim()
    }
}

fn forms<T: Real>(w: &Frame<T>) -> [DMatrix<T>; 3] {
    [
        restrict_form(&Structure::i(), w).omega,
        restrict_form(&Structure::j(), w).omega,
        restrict_form(&Structure::k(), w).omega,
    ]
}

fn sigma_max<T: Real>(forms: &[DMatrix<T>; 3], a: &Vector3<T>) -> T {
    combine_forms(forms, a).singular_values().max()
}

/// Alternating ascent of `‖Ω(a)ᵀx‖` over unit `a` and unit `x`.
fn ascend<T: Real>(forms: &[DMatrix<T>; 3], start: Vector3<T>, cfg: &SearchConfig) -> (Vector3<T>, T) {
    let mut a = start.normalize();
    let mut best = T::zero();
    for _ in 0..cfg.max_iter {
        let (_, u) = crate::right_singular(&combine_forms(forms, &a).transpose());
        let x = u.column(0);
        let m = DMatrix::from_columns(&[
            forms[0].transpose() * x,
            forms[1].transpose() * x,
            forms[2].transpose() * x,
        ]);
        let mtm: Matrix3<T> = Matrix3::from_fn(|i, j| m.column(i).dot(&m.column(j)));
        let eig = SymmetricEigen::new(mtm);
        let k = eig.eigenvalues.imax();
        let mut next: Vector3<T> = eig.eigenvectors.column(k).into_owned();
        if next.dot(&a) < T::zero() {
            next = -next;
        }
        let value = eig.eigenvalues[k].max(T::zero()).sqrt();
        let step = (next - a).norm();
        a = next;
        let gain = value - best;
        best = value;
        if step < lit(cfg.converge) || gain.abs() < lit(cfg.converge * 1e-3) && step < lit(1e-9) {
            break;
        }
    }
    (a, best)
}

/// Pins down a structure once its invariant subspace is known: the unit
/// `a` maximising `‖Ω(a)‖²_F` on that subspace is the top eigenvector of a
/// 3×3 Gram matrix, which is resolved to machine precision.
fn refine<T: Real>(w: &Frame<T>, a: Vector3<T>, tol: T) -> Vector3<T> {
    let mut a = a;
    for _ in 0..3 {
        let sub = max_invariant_subspace(&Structure::from_vector(a), w, tol.max(lit(1e-6)));
        if sub.dim() < 2 {
            break;
        }
        let f = forms(&sub);
        let g = Matrix3::from_fn(|i, j| f[i].dot(&f[j]));
        let eig = SymmetricEigen::new(g);
        let mut next: Vector3<T> = eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned();
        if next.dot(&a) < T::zero() {
            next = -next;
        }
        a = next;
    }
    a
}

/// Some unit `A` for which `W` contains an `A`-complex vector, found by a
/// grid search on S² followed by local ascent of `σ_max(Ω^A)`.
pub fn find_complex_structure<T: Real>(w: &Frame<T>, tol: T, cfg: &SearchConfig) -> Option<Structure<T>> {
    if w.dim() < 2 {
        return None;
    }
    let f = forms(w);
    let threshold = T::one() - tol;

    // Cheap candidates first: the basis structures and the Frobenius optimum.
    let g = Matrix3::from_fn(|i, j| f[i].dot(&f[j]));
    let eig = SymmetricEigen::new(g);
    let mut candidates: Vec<Vector3<T>> = vec![eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned()];
    candidates.extend([Vector3::x(), Vector3::y(), Vector3::z()]);
    for c in &candidates {
        if sigma_max(&f, c) >= threshold {
            return Some(Structure::from_vector(refine(w, *c, tol)).canonical());
        }
    }

    let mut nodes: Vec<(T, Vector3<T>)> = Vec::with_capacity(cfg.polar * cfg.azimuth / 2);
    for i in 0..cfg.polar.div_ceil(2) {
        let phi = std::f64::consts::PI * (i as f64 + 0.5) / cfg.polar as f64;
        for j in 0..cfg.azimuth {
            let lam = 2.0 * std::f64::consts::PI * j as f64 / cfg.azimuth as f64;
            let a = Vector3::new(
                lit(phi.sin() * lam.cos()),
                lit(phi.sin() * lam.sin()),
                lit(phi.cos()),
            );
            nodes.push((sigma_max(&f, &a), a));
        }
    }
    nodes.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best: Option<(T, Vector3<T>)> = None;
    for (_, start) in nodes.iter().take(cfg.seeds) {
        let (a, v) = ascend(&f, *start, cfg);
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, a));
        }
        if v >= threshold {
            break;
        }
    }
    match best {
        Some((v, a)) if v >= threshold => Some(Structure::from_vector(refine(w, a, tol)).canonical()),
        _ => None,
    }
}

/// Largest quaternionic subspace `U_Q ⊂ U`.
pub fn maximal_quaternionic<T: Real>(u: &Frame<T>, tol: T) -> Frame<T> {
    let mut w = u.clone();
    loop {
        let before = w.dim();
        for s in [Structure::i(), Structure::j(), Structure::k()] {
            w = max_invariant_subspace(&s, &w, tol);
        }
        if w.dim() == before || w.dim() == 0 {
            return w;
        }
    }
}

/// Splits a pure `I`-complex subspace into 4-dimensional addends with
/// their Kähler angles, plus a trailing 2-plane when `dim U ≡ 2 mod 4`.
pub fn decompose_complex<T: Real>(
    i: &Structure<T>,
    u: &Frame<T>,
    tol: &Tolerances<T>,
) -> Result<Vec<ComplexAddend<T>>> {
    if u.dim() % 2 != 0 {
        return Err(Error::Precondition(format!("complex subspace of odd dimension {}", u.dim())));
    }
    if max_invariant_subspace(i, u, tol.rank).dim() != u.dim() {
        return Err(Error::Precondition("subspace is not invariant under the structure".into()));
    }
    if maximal_quaternionic(u, tol.rank).dim() != 0 {
        return Err(Error::Precondition("complex subspace is not pure".into()));
    }
    let (_, _, k) = adapted_triple(i);
    let mut out = Vec::new();
    let mut planes: Vec<Frame<T>> = Vec::new();
    for (sigma, cluster) in invariant_subspaces(&k, u, tol) {
        if sigma == T::zero() {
            let mut rest = cluster;
            while rest.dim() >= 2 {
                let x = rest.basis.column(0).into_owned();
                let plane = Frame::span(&columns(u.ambient(), &[x.clone(), i.apply(x.as_view())]), tol.rank);
                rest = complement_in(&rest, &plane);
                planes.push(plane);
            }
            continue;
        }
        if sigma >= T::one() {
            return Err(Error::Precondition("complex subspace is not pure".into()));
        }
        if cluster.dim() % 4 != 0 {
            log::warn!("cluster of dimension {} at σ = {}", cluster.dim(), crate::to_f64(sigma));
        }
        let theta = sigma.acos();
        let mut rest = cluster;
        while rest.dim() >= 4 {
            let x = rest.basis.column(0).into_owned();
            let kw = k.apply_columns(&rest.basis);
            let c = kw.transpose() * &x;
            let z = &rest.basis * (&c / c.norm());
            let addend = Frame::span(
                &columns(u.ambient(), &[x.clone(), i.apply(x.as_view()), z.clone(), i.apply(z.as_view())]),
                tol.rank,
            );
            rest = complement_in(&rest, &addend);
            out.push(ComplexAddend { theta, frame: addend });
        }
    }
    for pair in planes.chunks(2) {
        let mut cols = pair[0].basis.clone();
        if pair.len() == 2 {
            cols = cols.insert_columns(2, 2, T::zero());
            cols.columns_mut(2, 2).copy_from(&pair[1].basis);
        }
        out.push(ComplexAddend { theta: T::frac_pi_2(), frame: Frame::from_orthonormal(cols) });
    }
    Ok(out)
}

/// Kähler multiangle of a pure complex subspace, ascending.
pub fn kaehler_multiangle<T: Real>(i: &Structure<T>, u: &Frame<T>, tol: &Tolerances<T>) -> Result<Vec<T>> {
    Ok(decompose_complex(i, u, tol)?.into_iter().map(|a| a.theta).collect())
}

fn lex_cmp<T: Real>(a: &Structure<T>, b: &Structure<T>) -> std::cmp::Ordering {
    for (x, y) in a.coeffs.iter().zip(b.coeffs.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Full decomposition of `U` into quaternionic, complex and real parts.
pub fn full_decompose<T: Real>(u: &Frame<T>, tol: &Tolerances<T>, cfg: &SearchConfig) -> Result<Decomposition<T>> {
    let mut warnings = Vec::new();
    let q = maximal_quaternionic(u, tol.rank);
    let mut rest = complement_in(u, &q);
    let mut sigma: Vec<SigmaAddend<T>> = Vec::new();
    while let Some(a) = find_complex_structure(&rest, tol.rank, cfg) {
        let w = max_invariant_subspace(&a, &rest, tol.rank);
        if w.dim() < 2 {
            warnings.push("structure search converged without an invariant subspace".into());
            break;
        }
        if sigma.iter().any(|s| (s.structure.coeffs - a.coeffs).norm() < lit(1e-6)) {
            warnings.push("structure found twice".into());
            break;
        }
        let addends = decompose_complex(&a, &w, tol)?;
        rest = complement_in(&rest, &w);
        sigma.push(SigmaAddend { structure: a, frame: w, addends });
    }
    sigma.sort_by(|x, y| lex_cmp(&x.structure, &y.structure));

    let mut all = q.basis.clone();
    for part in sigma.iter().map(|s| &s.frame).chain(std::iter::once(&rest)) {
        let c = all.ncols();
        all = all.insert_columns(c, part.dim(), T::zero());
        all.columns_mut(c, part.dim()).copy_from(&part.basis);
    }
    let orthogonality_residual = Frame::from_orthonormal(all).orthonormality_residual();
    let dec = Decomposition { quaternionic: q, sigma, real: rest, orthogonality_residual, warnings };
    if dec.dim() != u.dim() {
        return Err(Error::Degenerate(format!(
            "decomposition covers {} of {} dimensions",
            dec.dim(),
            u.dim()
        )));
    }
    for w in &dec.warnings {
        log::warn!("{w}");
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{make_complex4, make_sigma, ComplexSpec};

    #[test]
    fn multiangle_of_generated_complex_subspace() {
        let s = Structure::<f64>::from_vector(Vector3::new(1.0, 2.0, 2.0));
        let u = make_complex4(4, &s, 0.6, 1).unwrap();
        let m = kaehler_multiangle(&s, &u, &Tolerances::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sigma_complex_is_recovered() {
        let specs = vec![
            ComplexSpec { structure: Structure::<f64>::i(), multiangle: vec![0.4], trailing_plane: false },
            ComplexSpec {
                structure: Structure::from_vector(Vector3::new(0.0, 1.0, 1.0)),
                multiangle: vec![1.1],
                trailing_plane: true,
            },
        ];
        let u = make_sigma(8, &specs).unwrap();
        let d = full_decompose(&u, &Tolerances::default(), &SearchConfig::default()).unwrap();
        assert_eq!(d.quaternionic.dim(), 0);
        assert_eq!(d.real.dim(), 0);
        assert_eq!(d.sigma.len(), 2);
        let b = Vector3::new(0.0, 1.0, 1.0).normalize();
        assert!((d.sigma[0].structure.coeffs - b).norm() < 1e-10, "{:?}", d.sigma[0].structure);
        assert!((d.sigma[1].structure.coeffs - Vector3::x()).norm() < 1e-10);
        let m = d.sigma[0].multiangle();
        assert!((m[0] - 1.1).abs() < 1e-9 && (m[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}
