//! Numerical acceptance checks, shared by the `acceptance` test target and
//! the `selftest` command.
//!
//! Each check draws its own ChaCha stream from the suite seed, evaluates the
//! worst residual over its samples and compares it with a fixed tolerance.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Matrix4, Vector3};
use rand::Rng;

use crate::angles::{
    characteristic_angle, characteristic_angle_via_lines, gram_determinant, isoclinic_angle_trace, isoclinicity,
    kaehler_angle, principal_angles, subspace_angle,
};
use crate::decompose::{full_decompose, SearchConfig};
use crate::hqspace::{
    adapted_triple, commutator_norms, hermitian_product, hermitian_product_operator, HQSpace, Structure,
};
use crate::kaehlerform::invariant_subspaces;
use crate::lab::*;
use crate::orbit::*;
use crate::subspace::{columns, complement_in, Frame};
use crate::Tolerances;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    /// Multiplier on every sample count; 1.0 runs the full suite.
    pub scale: f64,
    /// Replaces every numeric tolerance, to exercise failure reporting.
    pub tol_override: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { n: 8, seed: 20240917, scale: 1.0, tol_override: None }
    }
}

impl SuiteConfig {
    fn count(&self, full: usize) -> usize {
        ((full as f64 * self.scale).ceil() as usize).max(1)
    }

    fn tol(&self, t: f64) -> f64 {
        self.tol_override.unwrap_or(t)
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Largest residual observed (or number of failures for counting checks).
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {:<28} worst {:.3e} (tol {:.1e}, {} samples){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.tolerance,
            self.samples,
            if self.detail.is_empty() { String::new() } else { format!(" {}", self.detail) }
        )
    }
}

/// Running maximum with a note on where it was attained.
struct Worst {
    value: f64,
    note: String,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, note: String::new() }
    }

    fn see(&mut self, v: f64, note: impl FnOnce() -> String) {
        if v.is_nan() || v > self.value {
            self.value = if v.is_nan() { f64::INFINITY } else { v };
            self.note = note();
        }
    }
}

fn result(id: u8, name: &'static str, worst: Worst, tol: f64, samples: usize) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed: worst.value <= tol,
        worst: worst.value,
        tolerance: tol,
        samples,
        detail: if worst.value > tol { worst.note } else { String::new() },
    }
}

fn counted(id: u8, name: &'static str, failures: usize, samples: usize, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed: failures == 0,
        worst: failures as f64,
        tolerance: 0.0,
        samples,
        detail,
    }
}

fn random_theta<R: Rng>(r: &mut R) -> f64 {
    r.random_range(1e-3..FRAC_PI_2 - 1e-3)
}

/// Structure-algebra identities for random unit structures.
pub fn criterion_1(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 1);
    let count = cfg.count(200);
    let mut worst = Worst::new();
    let id = DMatrix::<f64>::identity(4 * cfg.n, 4 * cfg.n);
    let (i, j, k) = (Structure::<f64>::i().matrix(cfg.n), Structure::<f64>::j().matrix(cfg.n), Structure::<f64>::k().matrix(cfg.n));
    worst.see((&i * &j - &k).norm(), || "IJ - K".into());
    for _ in 0..count {
        let s: Structure<f64> = random_structure(&mut r);
        let a = s.matrix(cfg.n);
        worst.see((&a * &a + &id).norm(), || format!("A² + Id for {:?}", s.coeffs.as_slice()));
        worst.see((a.transpose() * &a - &id).norm(), || format!("AᵀA - Id for {:?}", s.coeffs.as_slice()));
    }
    result(1, "structure algebra", worst, cfg.tol(1e-12), count)
}

/// Hermitian product: coordinate and operator forms, reference oracle and
/// invariance of `Re` and `|Im|` under admissible basis changes.
pub fn criterion_2(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 2);
    let pairs = cfg.count(1000);
    let bases = cfg.count(50);
    let mut worst = Worst::new();
    let mut samples = Vec::new();
    for _ in 0..pairs {
        let l: DVector<f64> = gaussian_vector(&mut r, 4 * cfg.n);
        let m: DVector<f64> = gaussian_vector(&mut r, 4 * cfg.n);
        let p = hermitian_product(l.as_view(), m.as_view());
        let q = hermitian_product_operator(l.as_view(), m.as_view());
        let o = oracle_hermitian_product(&l, &m);
        worst.see((p - q).norm(), || "coordinate vs operator form".into());
        worst.see((p - o).norm(), || "coordinate form vs reference".into());
        samples.push((l, m, p));
    }
    for _ in 0..bases {
        let c = random_so3(&mut r);
        let space = HQSpace::new(cfg.n).with_basis(c, 1e-12).expect("rotation");
        for (l, m, p) in samples.iter().take(20) {
            let q = space.hermitian_product(l.as_view(), m.as_view());
            worst.see((q.w - p.w).abs(), || "real part under basis change".into());
            worst.see((q.imag().norm() - p.imag().norm()).abs(), || "|Im| under basis change".into());
        }
    }
    result(2, "hermitian product", worst, cfg.tol(1e-12), pairs + bases)
}

/// Principal angles against the eigenvalue oracle; product-of-cosines and
/// characteristic-angle identities.
pub fn criterion_3(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 3);
    let count = cfg.count(500);
    let mut worst = Worst::new();
    for _ in 0..count {
        let p = r.random_range(1..=8usize);
        let q = r.random_range(p..=8usize);
        let u: Frame<f64> = random_frame(&mut r, cfg.n, p);
        let w: Frame<f64> = random_frame(&mut r, cfg.n, q);
        let pa = principal_angles(&u, &w);
        let oracle = oracle_principal_angles(&u, &w);
        for (a, b) in pa.angles.iter().zip(&oracle) {
            worst.see((a - b).abs(), || format!("principal angle, dims {p},{q}"));
        }
        let back = principal_angles(&w, &u);
        for (a, b) in pa.angles.iter().zip(&back.angles) {
            worst.see((a - b).abs(), || "principal angles are not symmetric".into());
        }
        let m = u.basis.transpose() * &w.basis;
        let det = (&m * m.transpose()).determinant().max(0.0).sqrt();
        let prod = subspace_angle(&u, &w).expect("p ≤ q").cos();
        worst.see((prod - det).abs(), || "product of cosines vs sqrt det(MMᵀ)".into());
        if p == q {
            worst.see((prod - gram_determinant(&u, &w).unwrap()).abs(), || "product of cosines vs |det|".into());
        }
        let l: DVector<f64> = gaussian_vector(&mut r, 4 * cfg.n);
        let mv: DVector<f64> = gaussian_vector(&mut r, 4 * cfg.n);
        let ca = characteristic_angle(l.as_view(), mv.as_view()).unwrap().cos();
        let cb = characteristic_angle_via_lines(&l, &mv, 1e-10).unwrap().cos();
        worst.see((ca - cb).abs(), || "characteristic angle vs angle of quaternionic lines".into());
    }
    result(3, "principal angles", worst, cfg.tol(1e-9), count)
}

/// Four routes to the isoclinic Kähler angle of a 4-dimensional complex
/// subspace: trace formula, ξχη expansion, closed form and SVD.
pub fn criterion_4(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 4);
    let subspaces = cfg.count(100);
    let structures = cfg.count(500);
    let space = HQSpace::<f64>::new(cfg.n);
    let tol = Tolerances::default();
    let mut worst = Worst::new();
    for _ in 0..subspaces {
        let i: Structure<f64> = random_structure(&mut r);
        let theta = random_theta(&mut r);
        let slot = r.random_range(0..cfg.n - 1);
        let u = make_complex4(cfg.n, &i, theta, slot).unwrap();
        let g = random_sp_n(&mut r, cfg.n);
        let u = u.transform(&g, 1e-10);
        let inv = ic4_invariants(&space, &u, None, &tol).expect("generated subspace lies in 𝓘𝓒⁴");
        for _ in 0..structures {
            let a: Structure<f64> = random_structure(&mut r);
            let trace = isoclinic_angle_trace(&a, &u).unwrap();
            let expansion = isoclinic_cos2_expansion(&inv, &a.coeffs).max(0.0).sqrt().min(1.0).acos();
            let closed = complex4_isoclinic_angle(a.coeffs.dot(&i.coeffs), theta);
            let au = u.apply(&a);
            let svd = principal_angles(&u, &au);
            let iso = isoclinicity(&a, &u, tol.iso);
            let routes = [trace, expansion, closed];
            for (x, y) in [(0, 1), (0, 2), (1, 2)] {
                worst.see((routes[x] - routes[y]).abs(), || format!("routes {x},{y} at θ = {theta}"));
            }
            for s in svd.angles.iter().chain(std::iter::once(&iso.angle)) {
                for v in routes {
                    worst.see((s - v).abs(), || format!("SVD vs formula at θ = {theta}"));
                }
            }
        }
    }
    result(4, "isoclinic angle routes", worst, cfg.tol(1e-8), subspaces * structures)
}

/// Chain invariants of complex and totally complex subspaces.
pub fn criterion_5(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 5);
    let count = cfg.count(100);
    let space = HQSpace::<f64>::new(cfg.n);
    let tol = Tolerances::default();
    let mut worst = Worst::new();
    #[rustfmt::skip]
    let c_ij = Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    #[rustfmt::skip]
    let c_ik = Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0);
    for _ in 0..count {
        let theta = random_theta(&mut r);
        let g = random_sp_n(&mut r, cfg.n);
        let u = make_complex4(cfg.n, &Structure::i(), theta, 0).unwrap().transform(&g, 1e-10);
        let lead = &u.basis * gaussian_vector::<f64, _>(&mut r, 4);
        let inv = ic4_invariants(&space, &u, Some(&lead), &tol).expect("complex subspace lies in 𝓘𝓒⁴");
        let got = [inv.xi, inv.chi, inv.eta, inv.gamma, inv.delta];
        let want = [0.0, 0.0, 0.0, 0.0, -1.0];
        for (k, (a, b)) in got.iter().zip(want).enumerate() {
            worst.see((a - b).abs(), || format!("invariant {k} at θ = {theta}"));
        }
        worst.see((inv.c_ij - c_ij).amax(), || "C_IJ of a complex subspace".into());
        worst.see((inv.c_ik - c_ik).amax(), || "C_IK of a complex subspace".into());

        // A general structure gives nonzero ξ, χ, η; the Gram matrices must
        // still follow the closed forms.
        let a: Structure<f64> = random_structure(&mut r);
        let v = make_complex4(cfg.n, &a, theta, 2).unwrap();
        let inv = ic4_invariants(&space, &v, None, &tol).expect("complex subspace lies in 𝓘𝓒⁴");
        let (ij, ik) = canonical_matrices(&inv);
        worst.see((inv.c_ij - ij).amax(), || format!("closed form C_IJ, structure {:?}", a.coeffs.as_slice()));
        worst.see((inv.c_ik - ik).amax(), || format!("closed form C_IK, structure {:?}", a.coeffs.as_slice()));
        let c = &inv.chains;
        worst.see((c.x.column(2) - c.y.column(2)).amax(), || "X₃ ≠ Y₃".into());
        worst.see((c.x_tilde.column(2) - c.z.column(2)).amax(), || "X̃₃ ≠ Z₃".into());

        let t = make_complex4(cfg.n, &Structure::i(), FRAC_PI_2, cfg.n - 2).unwrap().transform(&g, 1e-10);
        let inv = ic4_invariants(&space, &t, None, &tol).expect("totally complex subspace lies in 𝓘𝓒⁴");
        worst.see((inv.c_ij - Matrix4::identity()).amax(), || "C_IJ of a totally complex subspace".into());
        worst.see((inv.c_ik - Matrix4::identity()).amax(), || "C_IK of a totally complex subspace".into());
    }
    result(5, "ic4 chain invariants", worst, cfg.tol(1e-8), count)
}

/// The generated families used by the orbit checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TwoPlane,
    Complex4,
    ComplexEven,
    Sigma,
    Quaternionic,
    Rhps,
}

pub const FAMILIES: [Family; 6] =
    [Family::TwoPlane, Family::Complex4, Family::ComplexEven, Family::Sigma, Family::Quaternionic, Family::Rhps];

/// A random member of a family, placed in `n` slots.
pub fn sample_family<R: Rng>(r: &mut R, family: Family, n: usize) -> Frame<f64> {
    match family {
        Family::TwoPlane => {
            let v: DVector<f64> = gaussian_vector(r, 3);
            let q = Vector3::new(v[0], v[1], v[2]).normalize() * r.random_range(0.05..0.95);
            make_two_plane(n, q).unwrap()
        }
        Family::Complex4 => {
            let s: Structure<f64> = random_structure(r);
            make_complex4(n, &s, random_theta(r), 0).unwrap()
        }
        Family::ComplexEven => {
            let addends = r.random_range(2..=3usize).min(n / 2);
            let spec = ComplexSpec {
                structure: random_structure(r),
                multiangle: (0..addends).map(|_| random_theta(r)).collect(),
                trailing_plane: 2 * addends < n && r.random_bool(0.5),
            };
            make_complex_even(n, &spec, 0).unwrap()
        }
        Family::Sigma => make_sigma(n, &random_sigma_spec(r, n)).unwrap(),
        Family::Quaternionic => make_quaternionic(n, 4 * r.random_range(1..=3usize.min(n))).unwrap(),
        Family::Rhps => make_rhps(n, r.random_range(2..=6usize.min(n))).unwrap(),
    }
}

/// Invariance of the orbit invariant under random Sp(n) elements.
pub fn criterion_6(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 6);
    let count = cfg.count(200);
    let space = HQSpace::<f64>::new(cfg.n);
    let tol = Tolerances::default();
    let mut worst = Worst::new();
    let mut failures = 0;
    for family in FAMILIES {
        let u = sample_family(&mut r, family, cfg.n);
        let base = orbit_invariant(&space, &u, &tol).expect("generated subspace has an invariant");
        for _ in 0..count {
            let g = random_sp_n(&mut r, cfg.n);
            let gu = u.transform(&g, 1e-10);
            match orbit_invariant(&space, &gu, &tol) {
                Ok(inv) => match invariant_distance(&base, &inv) {
                    Some(d) => worst.see(d, || format!("{family:?}")),
                    None => {
                        failures += 1;
                        worst.see(f64::INFINITY, || format!("{family:?}: {} vs {}", base.tag(), inv.tag()));
                    }
                },
                Err(e) => {
                    failures += 1;
                    worst.see(f64::INFINITY, || format!("{family:?}: {e}"));
                }
            }
            if !same_orbit(&space, &u, &gu, &tol).unwrap_or(false) {
                failures += 1;
                worst.see(f64::INFINITY, || format!("{family:?}: same_orbit returned false"));
            }
        }
    }
    let mut res = result(6, "Sp(n) invariance", worst, cfg.tol(1e-6), count * FAMILIES.len());
    if failures > 0 {
        res.passed = false;
        res.detail = format!("{failures} mismatches; {}", res.detail);
    }
    res
}

/// Distinct orbits are never reported equal.
pub fn criterion_7(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 7);
    let count = cfg.count(500);
    let space = HQSpace::<f64>::new(cfg.n);
    let tol = Tolerances::default();
    let mut false_positives = 0;
    let mut errors = 0;
    for trial in 0..count {
        let i: Structure<f64> = random_structure(&mut r);
        let theta = r.random_range(0.05..FRAC_PI_2 - 0.05);
        let (i2, theta2) = if trial % 2 == 0 {
            let delta = r.random_range(1e-3..0.05) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
            (i, theta + delta)
        } else {
            let (_, j, _) = adapted_triple(&i);
            let tilt = r.random_range(1e-3..FRAC_PI_2);
            (Structure::from_vector(i.coeffs * tilt.cos() + j.coeffs * tilt.sin()), theta)
        };
        let u = make_complex4(cfg.n, &i, theta, 0).unwrap();
        let g = random_sp_n(&mut r, cfg.n);
        let w = make_complex4(cfg.n, &i2, theta2, 2).unwrap().transform(&g, 1e-10);
        match same_orbit(&space, &u, &w, &tol) {
            Ok(true) => false_positives += 1,
            Ok(false) => {}
            Err(_) => errors += 1,
        }
    }
    counted(
        7,
        "orbit separation",
        false_positives + errors,
        count,
        if false_positives + errors > 0 { format!("{false_positives} false positives, {errors} errors") } else { String::new() },
    )
}

/// Explicit Sp(n) witnesses between subspaces in the same orbit.
pub fn criterion_8(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 8);
    let count = cfg.count(100);
    let space = HQSpace::<f64>::new(cfg.n);
    let tol = Tolerances::default();
    let mut angle = Worst::new();
    let mut algebra = Worst::new();
    let mut missing = 0;
    for t in 0..count {
        let family = FAMILIES[t % FAMILIES.len()];
        let u = sample_family(&mut r, family, cfg.n);
        let g = random_sp_n(&mut r, cfg.n);
        let w = u.transform(&g, 1e-10);
        match sp_n_witness(&space, &u, &w, &tol) {
            Ok(Some(h)) => {
                angle.see(h.max_principal_angle, || format!("{family:?}"));
                algebra.see(h.orthogonality_residual, || format!("{family:?}: hᵀh - Id"));
                for c in h.commutator_norms {
                    algebra.see(c, || format!("{family:?}: commutator"));
                }
                let recheck = commutator_norms(&h.matrix).iter().cloned().fold(0.0, f64::max);
                algebra.see(recheck, || format!("{family:?}: commutator recheck"));
            }
            Ok(None) | Err(_) => missing += 1,
        }
    }
    let (ta, tb) = (cfg.tol(1e-7), cfg.tol(1e-9));
    let passed = missing == 0 && angle.value <= ta && algebra.value <= tb;
    CriterionResult {
        id: 8,
        name: "Sp(n) witness",
        passed,
        worst: angle.value.max(algebra.value),
        tolerance: ta,
        samples: count,
        detail: format!(
            "max angle {:.2e} (tol {:.0e}), algebra {:.2e} (tol {:.0e}), {} missing{}",
            angle.value,
            ta,
            algebra.value,
            tb,
            missing,
            if passed { String::new() } else { format!("; {} {}", angle.note, algebra.note) }
        ),
    }
}

/// Recovery of scrambled Σ-complex subspaces by the full decomposition.
pub fn criterion_9(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 9);
    let count = cfg.count(100);
    let tol = Tolerances::default();
    let search = SearchConfig::default();
    let mut worst = Worst::new();
    let mut failures = 0;
    for _ in 0..count {
        let specs = random_sigma_spec(&mut r, cfg.n);
        let g = random_sp_n(&mut r, cfg.n);
        let u = make_sigma(cfg.n, &specs).unwrap().transform(&g, 1e-10);
        let dec = match full_decompose(&u, &tol, &search) {
            Ok(d) => d,
            Err(e) => {
                failures += 1;
                worst.see(f64::INFINITY, || e.to_string());
                continue;
            }
        };
        if dec.quaternionic.dim() != 0 || dec.real.dim() != 0 || dec.sigma.len() != specs.len() {
            failures += 1;
            worst.see(f64::INFINITY, || {
                format!("found {} structures for {}, real part {}", dec.sigma.len(), specs.len(), dec.real.dim())
            });
            continue;
        }
        let mut used = vec![false; specs.len()];
        for part in &dec.sigma {
            let found = specs.iter().enumerate().find(|(k, s)| {
                !used[*k] && {
                    let c = s.structure.canonical().coeffs;
                    (c - part.structure.coeffs).amax() <= 1e-6
                }
            });
            let Some((k, spec)) = found else {
                failures += 1;
                worst.see(f64::INFINITY, || format!("unexpected structure {:?}", part.structure.coeffs.as_slice()));
                continue;
            };
            used[k] = true;
            worst.see((spec.structure.canonical().coeffs - part.structure.coeffs).amax(), || "structure".into());
            let want = spec.expected_multiangle();
            let got = part.multiangle();
            if want.len() != got.len() {
                failures += 1;
                worst.see(f64::INFINITY, || format!("multiangle length {} vs {}", got.len(), want.len()));
                continue;
            }
            for (a, b) in want.iter().zip(&got) {
                worst.see((a - b).abs(), || "multiangle".into());
            }
        }
    }
    let mut res = result(9, "sigma decomposition", worst, cfg.tol(1e-6), count);
    if failures > 0 {
        res.passed = false;
        res.detail = format!("{failures} structural mismatches; {}", res.detail);
    }
    res
}

/// Cluster sizes of `ω^K` on pure complex subspaces of complex dimension
/// at most 4.
pub fn criterion_10(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 10);
    let count = cfg.count(200);
    let tol = Tolerances::default();
    let mut violations = 0;
    let mut note = String::new();
    for t in 0..count {
        let i: Structure<f64> = random_structure(&mut r);
        let u = match t % 3 {
            0 => {
                let m = r.random_range(1..=4usize);
                let v: DMatrix<f64> = gaussian_matrix(&mut r, 4 * cfg.n, m);
                let iv = i.apply_columns(&v);
                let mut cols: Vec<DVector<f64>> = v.column_iter().map(|c| c.into_owned()).collect();
                cols.extend(iv.column_iter().map(|c| c.into_owned()));
                Frame::span(&columns(4 * cfg.n, &cols), 1e-10)
            }
            1 => {
                let theta = random_theta(&mut r);
                let spec = ComplexSpec { structure: i, multiangle: vec![theta, theta], trailing_plane: false };
                make_complex_even(cfg.n, &spec, 0).unwrap()
            }
            _ => {
                let spec = ComplexSpec {
                    structure: i,
                    multiangle: vec![FRAC_PI_2; r.random_range(0..=1usize)],
                    trailing_plane: true,
                };
                make_complex_even(cfg.n, &spec, 0).unwrap()
            }
        };
        let g = random_sp_n(&mut r, cfg.n);
        let u = u.transform(&g, 1e-10);
        let (_, _, k) = adapted_triple(&i);
        for (sigma, part) in invariant_subspaces(&k, &u, &tol) {
            let ok = if sigma == 0.0 { part.dim() % 2 == 0 } else { part.dim() % 4 == 0 };
            if !ok {
                violations += 1;
                note = format!("cluster of dimension {} at σ = {sigma}", part.dim());
            }
        }
    }
    counted(10, "multiplicity law", violations, count, note)
}

/// Characteristic deviation: basis independence, closed form, and
/// invariance under Sp(n)·Sp(1).
pub fn criterion_11(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 11);
    let count = cfg.count(200);
    let mut basis = Worst::new();
    let mut closed = Worst::new();
    let mut group = Worst::new();
    for _ in 0..count {
        let m = r.random_range(2..=8usize);
        let u: Frame<f64> = random_frame(&mut r, cfg.n, m);
        let d = characteristic_deviation(&u).unwrap();
        let d2 = characteristic_deviation(&random_rebasis(&mut r, &u)).unwrap();
        basis.see((d - d2).abs(), || format!("dim {m}"));

        let theta = random_theta(&mut r);
        let s: Structure<f64> = random_structure(&mut r);
        let c = make_complex4(cfg.n, &s, theta, 0).unwrap();
        let dc = characteristic_deviation(&c).unwrap();
        closed.see((dc - (2.0 * theta.cos().powi(2) + 1.0) / 3.0).abs(), || format!("θ = {theta}"));

        let g = random_sp_n(&mut r, cfg.n);
        let q = random_sp1(&mut r);
        for (frame, value) in [(&u, d), (&c, dc)] {
            let moved = act_sp_n_sp1(&g, q, frame);
            group.see((characteristic_deviation(&moved).unwrap() - value).abs(), || "Sp(n)·Sp(1)".into());
        }
    }
    let (tb, tg) = (cfg.tol(1e-9), cfg.tol(1e-8));
    let passed = basis.value <= tb && closed.value <= tb && group.value <= tg;
    CriterionResult {
        id: 11,
        name: "characteristic deviation",
        passed,
        worst: basis.value.max(closed.value).max(group.value),
        tolerance: tb,
        samples: count,
        detail: format!(
            "basis {:.2e}, closed form {:.2e} (tol {:.0e}); Sp(n)·Sp(1) {:.2e} (tol {:.0e})",
            basis.value, closed.value, tb, group.value, tg
        ),
    }
}

/// The six characterisations of associated planes, and the worked example
/// with `I' = (I + 2J + 2K)/3`.
pub fn criterion_12(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = rng(cfg.seed, 12);
    let count = cfg.count(100);
    let space = HQSpace::<f64>::new(cfg.n);
    let mut worst = Worst::new();
    for _ in 0..count {
        let i: Structure<f64> = random_structure(&mut r);
        let theta = random_theta(&mut r);
        let g = random_sp_n(&mut r, cfg.n);
        let u = make_complex4(cfg.n, &i, theta, 0).unwrap().transform(&g, 1e-10);
        let (_, j, k0) = adapted_triple(&i);
        let phi: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let k = Structure::from_vector(j.coeffs * phi.cos() + k0.coeffs * phi.sin());
        let x = &u.basis * gaussian_vector::<f64, _>(&mut r, 4);
        let x = &x / x.norm();
        let plane = associated_plane(&i, &u, &x, &k, 1e-10).unwrap();
        let z = plane.basis.column(1).into_owned();
        let ct = theta.cos();

        // Pr^{KU} U' = K U'.
        let ku = u.apply(&k);
        let projected = Frame::span(&columns(4 * cfg.n, &[ku.project(&x), ku.project(&z)]), 1e-12);
        worst.see(principal_angles(&projected, &plane.apply(&k)).max_angle(), || "Pr^{KU} U' = KU'".into());

        // U = U' ⊕ IU', orthogonally.
        let iu = plane.apply(&i);
        worst.see((plane.basis.transpose() * &iu.basis).amax(), || "U' ⊥ IU'".into());
        let both = Frame::span(&columns(4 * cfg.n, &[x.clone(), z.clone(), iu.basis.column(0).into_owned(), iu.basis.column(1).into_owned()]), 1e-12);
        worst.see(principal_angles(&both, &u).max_angle(), || "U' ⊕ IU' = U".into());

        // (X, Z) is ω^K-standard with σ = cos θ.
        worst.see((x.dot(&k.apply(z.as_view())) - ct).abs(), || "ω^K-standard pair".into());

        // K-Kähler angle of U' is θ.
        let kt = kaehler_angle(&k, x.as_view(), z.as_view(), 1e-12).unwrap();
        worst.see((kt - theta).abs(), || "K-Kähler angle".into());

        // Imaginary measure in i⊥ with norm cos θ.
        let im = imaginary_measure(&space, &x, &z, 1e-12).unwrap();
        worst.see(im.dot(&i.coeffs).abs(), || "𝓘𝓜 ∈ i⊥".into());
        worst.see((im.norm() - ct).abs(), || "|𝓘𝓜| = cos θ".into());

        // (X, Z) is I-orthonormal.
        worst.see(x.dot(&z).abs().max(x.dot(&i.apply(z.as_view())).abs()), || "I-orthogonality".into());

        // The I⊥-Kähler angle read off I-orthonormal pairs.
        let ip = i_perp_kaehler_angle(&i, &u, 1e-10).unwrap();
        worst.see((ip - theta).abs(), || "I⊥-Kähler angle".into());
    }
    let mut res = result(12, "associated planes", worst, cfg.tol(1e-8), count);

    let mut example = Worst::new();
    for theta in [0.3, 0.7, 1.2] {
        let i = Structure::<f64>::i();
        let u = make_complex4(cfg.n, &i, theta, 0).unwrap();
        let x = u.basis.column(0).into_owned();
        let z = associated_plane(&i, &u, &x, &Structure::k(), 1e-12).unwrap().basis.column(1).into_owned();
        let kp = Structure::from_vector(Vector3::new(0.0, -1.0, 1.0));
        let zb = associated_plane(&i, &u, &x, &kp, 1e-12).unwrap().basis.column(1).into_owned();
        let expected = (i.apply(z.as_view()) + &z) / 2f64.sqrt();
        example.see((&zb - expected).amax(), || format!("Z̄₂ at θ = {theta}"));
        let ip = Structure::from_vector(Vector3::new(1.0, 2.0, 2.0));
        let ub = Frame::span(
            &columns(4 * cfg.n, &[x.clone(), zb.clone(), ip.apply(x.as_view()), ip.apply(zb.as_view())]),
            1e-12,
        );
        let angle = i_perp_kaehler_angle(&ip, &ub, 1e-12).unwrap();
        example.see((angle.cos() - theta.cos()).abs(), || format!("cos θ^{{I'⊥}} at θ = {theta}"));
        let rest = complement_in(&ub, &Frame::span(&columns(4 * cfg.n, &[x.clone(), ip.apply(x.as_view())]), 1e-12));
        example.see((rest.dim() as f64 - 2.0).abs(), || "Ū is I'-complex".into());
    }
    let te = cfg.tol(1e-10);
    if example.value > te {
        res.passed = false;
    }
    res.detail = format!(
        "{}worked example {:.2e} (tol {:.0e})",
        if res.detail.is_empty() { String::new() } else { format!("{}; ", res.detail) },
        example.value,
        te
    );
    res
}

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(cfg),
        12 => criterion_12(cfg),
        _ => return None,
    })
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    (1..=12).filter_map(|id| run_criterion(id, cfg)).collect()
}
