use nalgebra::{DMatrix, DVector, Vector3};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

use quatorbit::angles::{isoclinicity, principal_angles};
use quatorbit::decompose::{full_decompose, SearchConfig};
use quatorbit::hqspace::{adapted_triple, hermitian_product, HQSpace, Structure};
use quatorbit::kaehlerform::{invariant_subspaces, restrict_form, standard_basis};
use quatorbit::lab::*;
use quatorbit::orbit::*;
use quatorbit::subspace::{columns, complement_in, intersect, is_hermitian_orthogonal, quaternionify, sum, Frame};
use quatorbit::Tolerances;

const N: usize = 6;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() }
}

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

fn max_angle(u: &Frame<f64>, w: &Frame<f64>) -> f64 {
    if u.dim() != w.dim() {
        return f64::INFINITY;
    }
    principal_angles(u, w).max_angle()
}

fn is_invariant(s: &Structure<f64>, u: &Frame<f64>) -> bool {
    u.dim() == 0 || max_angle(u, &u.apply(s)) < 1e-8
}

fn is_quaternionic(u: &Frame<f64>) -> bool {
    [Structure::i(), Structure::j(), Structure::k()].iter().all(|s| is_invariant(s, u))
}

fn random_complex(r: &mut ChaCha8Rng, s: &Structure<f64>, m: usize) -> Frame<f64> {
    let v: DMatrix<f64> = gaussian_matrix(r, 4 * N, m);
    let iv = s.apply_columns(&v);
    let mut cols: Vec<DVector<f64>> = v.column_iter().map(|c| c.into_owned()).collect();
    cols.extend(iv.column_iter().map(|c| c.into_owned()));
    Frame::span(&columns(4 * N, &cols), 1e-10)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn structures_are_orthogonal_complex_structures(seed in any::<u64>()) {
        let mut r = rng(seed, 0);
        let a: Structure<f64> = random_structure(&mut r);
        let x: DVector<f64> = gaussian_vector(&mut r, 4 * N);
        let y: DVector<f64> = gaussian_vector(&mut r, 4 * N);
        let (ax, ay) = (a.apply(x.as_view()), a.apply(y.as_view()));
        prop_assert!((a.apply(ax.as_view()) + &x).amax() < 1e-12);
        prop_assert!((ax.dot(&ay) - x.dot(&y)).abs() < 1e-12 * x.norm() * y.norm());
    }

    #[test]
    fn hermitian_product_is_bilinear_and_conjugate_symmetric(seed in any::<u64>(), c in -3.0f64..3.0) {
        let mut r = rng(seed, 1);
        let l: DVector<f64> = gaussian_vector(&mut r, 4 * N);
        let l2: DVector<f64> = gaussian_vector(&mut r, 4 * N);
        let m: DVector<f64> = gaussian_vector(&mut r, 4 * N);
        let lhs = hermitian_product((&l * c + &l2).as_view(), m.as_view());
        let rhs = hermitian_product(l.as_view(), m.as_view()).scale(c) + hermitian_product(l2.as_view(), m.as_view());
        prop_assert!((lhs - rhs).norm() < 1e-11);
        let swapped = hermitian_product(m.as_view(), l.as_view()).conj();
        prop_assert!((hermitian_product(l.as_view(), m.as_view()) - swapped).norm() < 1e-12);
    }

    #[test]
    fn two_plane_cosine_sum_is_basis_independent(seed in any::<u64>()) {
        let mut r = rng(seed, 2);
        let u: Frame<f64> = random_frame(&mut r, N, 2);
        let cos2_sum = |space: &HQSpace<f64>| {
            [space.struct_i(), space.struct_j(), space.struct_k()]
                .iter()
                .map(|s| isoclinicity(s, &u, 1e-8).angle.cos().powi(2))
                .sum::<f64>()
        };
        let base = cos2_sum(&HQSpace::new(N));
        let rotated = HQSpace::new(N).with_basis(random_so3(&mut r), 1e-12).unwrap();
        prop_assert!((cos2_sum(&rotated) - base).abs() < 1e-9);
    }

    #[test]
    fn ic4_cosine_sum_is_intrinsic(seed in any::<u64>(), theta in 0.0f64..1.5707) {
        let mut r = rng(seed, 3);
        let s: Structure<f64> = random_structure(&mut r);
        let u = make_complex4(N, &s, theta, 0).unwrap();
        let total = |space: &HQSpace<f64>| {
            [space.struct_i(), space.struct_j(), space.struct_k()]
                .iter()
                .map(|a| isoclinicity(a, &u, 1e-8).angle.cos().powi(2))
                .sum::<f64>()
        };
        let rotated = HQSpace::new(N).with_basis(random_so3(&mut r), 1e-12).unwrap();
        prop_assert!((total(&rotated) - total(&HQSpace::new(N))).abs() < 1e-9);
    }

    #[test]
    fn odd_dimensional_isoclinic_subspaces_are_totally_real(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed, 4);
        let u = make_rhps::<f64>(N, 2 * k - 1).unwrap().transform(&random_sp_n(&mut r, N), 1e-10);
        for s in [Structure::i(), Structure::j(), Structure::k()] {
            let iso = isoclinicity(&s, &u, 1e-8);
            prop_assert!(iso.isoclinic);
            prop_assert!((iso.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        }
    }

    #[test]
    fn principal_angles_are_symmetric_and_basis_free(seed in any::<u64>(), p in 1usize..7, q in 1usize..7) {
        let mut r = rng(seed, 5);
        let u: Frame<f64> = random_frame(&mut r, N, p);
        let w: Frame<f64> = random_frame(&mut r, N, q);
        let a = principal_angles(&u, &w).angles;
        let b = principal_angles(&w, &u).angles;
        let c = principal_angles(&random_rebasis(&mut r, &u), &w).angles;
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            prop_assert!((x - y).abs() < 1e-9 && (x - z).abs() < 1e-9);
        }
    }

    #[test]
    fn standard_basis_has_block_pattern(seed in any::<u64>(), m in 2usize..9) {
        let mut r = rng(seed, 6);
        let u: Frame<f64> = random_frame(&mut r, N, m);
        let a: Structure<f64> = random_structure(&mut r);
        let sb = standard_basis(&restrict_form(&a, &u), &tol());
        let omega = restrict_form(&a, &sb.frame).omega;
        let mut expected = DMatrix::zeros(m, m);
        for (k, &s) in sb.sigmas.iter().enumerate() {
            expected[(2 * k, 2 * k + 1)] = s;
            expected[(2 * k + 1, 2 * k)] = -s;
        }
        prop_assert!((omega - expected).amax() < 1e-9);
    }

    #[test]
    fn sigmas_are_cosines_of_principal_angles(seed in any::<u64>(), m in 2usize..9) {
        let mut r = rng(seed, 7);
        let u: Frame<f64> = random_frame(&mut r, N, m);
        let a: Structure<f64> = random_structure(&mut r);
        let sb = standard_basis(&restrict_form(&a, &u), &tol());
        let mut sigmas: Vec<f64> = sb.sigmas.iter().flat_map(|&s| [s, s]).collect();
        if m % 2 == 1 {
            sigmas.push(0.0);
        }
        sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let cosines = principal_angles(&u, &u.apply(&a)).cosines;
        for (s, c) in sigmas.iter().zip(&cosines) {
            prop_assert!((s - c).abs() < 1e-9, "{:?} vs {:?}", sigmas, cosines);
        }
    }

    #[test]
    fn cluster_projectors_do_not_depend_on_the_basis(seed in any::<u64>()) {
        let mut r = rng(seed, 8);
        let s: Structure<f64> = random_structure(&mut r);
        let u = random_complex(&mut r, &s, 3);
        let (_, _, k) = adapted_triple(&s);
        let projectors = |f: &Frame<f64>| -> Vec<(f64, DMatrix<f64>)> {
            invariant_subspaces(&k, f, &tol()).into_iter().map(|(sg, c)| (sg, &c.basis * c.basis.transpose())).collect()
        };
        let base = projectors(&u);
        for _ in 0..10 {
            let other = projectors(&random_rebasis(&mut r, &u));
            prop_assert_eq!(other.len(), base.len());
            for ((s1, p1), (s2, p2)) in base.iter().zip(&other) {
                prop_assert!((s1 - s2).abs() < 1e-9);
                prop_assert!((p1 - p2).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn multiplicity_law_for_complex_subspaces(seed in any::<u64>(), m in 1usize..5) {
        let mut r = rng(seed, 9);
        let s: Structure<f64> = random_structure(&mut r);
        let u = random_complex(&mut r, &s, m);
        let (_, _, k) = adapted_triple(&s);
        for (sigma, part) in invariant_subspaces(&k, &u, &tol()) {
            if sigma == 0.0 {
                prop_assert_eq!(part.dim() % 2, 0);
            } else {
                prop_assert_eq!(part.dim() % 4, 0, "σ = {}", sigma);
            }
        }
    }

    #[test]
    fn quaternionic_lattice_is_closed(seed in any::<u64>()) {
        let mut r = rng(seed, 10);
        let g = random_sp_n(&mut r, N);
        let a = make_quaternionic::<f64>(N, 8).unwrap();
        let b = make_quaternionic::<f64>(N, 12).unwrap().transform(&g, 1e-10);
        let s = sum(&a, &b, 1e-8);
        let i = intersect(&a, &b, 1e-8);
        prop_assert!(is_quaternionic(&s) && s.dim() % 4 == 0);
        prop_assert!(is_quaternionic(&i) && i.dim() % 4 == 0);
        let c = make_quaternionic::<f64>(N, 4).unwrap();
        let rest = complement_in(&a, &c);
        prop_assert_eq!(rest.dim(), 4);
        prop_assert!(is_quaternionic(&rest));
    }

    #[test]
    fn complex_lattice_is_closed(seed in any::<u64>()) {
        let mut r = rng(seed, 11);
        let s: Structure<f64> = random_structure(&mut r);
        let a = random_complex(&mut r, &s, 2);
        let b = random_complex(&mut r, &s, 2);
        prop_assert!(is_invariant(&s, &sum(&a, &b, 1e-8)));
        let big = sum(&a, &random_complex(&mut r, &s, 4), 1e-8);
        let i = intersect(&big, &sum(&a, &random_complex(&mut r, &s, 4), 1e-8), 1e-8);
        prop_assert!(i.dim() >= a.dim());
        prop_assert!(is_invariant(&s, &i));
    }

    #[test]
    fn intersection_with_another_structure_is_totally_real(seed in any::<u64>()) {
        let mut r = rng(seed, 12);
        let s: Structure<f64> = random_structure(&mut r);
        let u = random_complex(&mut r, &s, 2);
        let (_, j, _) = adapted_triple(&s);
        let t: f64 = r.random_range(0.2..3.0);
        let a = Structure::from_vector(s.coeffs * t.cos() + j.coeffs * t.sin());
        let meet = intersect(&u, &u.apply(&a), 1e-8);
        for b in [Structure::i(), Structure::j(), Structure::k()] {
            prop_assert!(restrict_form(&b, &meet).omega.amax() < 1e-8);
        }
    }

    #[test]
    fn decomposition_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed, 13);
        let q = make_quaternionic::<f64>(N, 4).unwrap();
        let spec = ComplexSpec { structure: random_structure(&mut r), multiangle: vec![r.random_range(0.1..1.4)], trailing_plane: false };
        let c = make_complex_even(N, &spec, 1).unwrap();
        let x = slot_vector::<f64>(N, 3);
        let y = &x * 0.6 + slot_vector::<f64>(N, 4) * 0.8;
        let real = Frame::span(&columns(4 * N, &[x, slot_vector(N, 5)]), 1e-10);
        let _ = y;
        let u = sum(&sum(&q, &c, 1e-10), &real, 1e-10).transform(&random_sp_n(&mut r, N), 1e-10);
        let dec = full_decompose(&u, &tol(), &SearchConfig::default()).unwrap();
        prop_assert_eq!((dec.quaternionic.dim(), dec.sigma.len(), dec.real.dim()), (4, 1, 2));

        let dq = full_decompose(&dec.quaternionic, &tol(), &SearchConfig::default()).unwrap();
        prop_assert_eq!((dq.quaternionic.dim(), dq.sigma.len(), dq.real.dim()), (4, 0, 0));
        let part = &dec.sigma[0];
        let dc = full_decompose(&part.frame, &tol(), &SearchConfig::default()).unwrap();
        prop_assert_eq!((dc.quaternionic.dim(), dc.sigma.len(), dc.real.dim()), (0, 1, 0));
        prop_assert!((dc.sigma[0].structure.coeffs - part.structure.coeffs).amax() < 1e-9);
        let dr = full_decompose(&dec.real, &tol(), &SearchConfig::default()).unwrap();
        prop_assert_eq!((dr.quaternionic.dim(), dr.sigma.len(), dr.real.dim()), (0, 0, 2));

        prop_assert_eq!(intersect(&quaternionify(&dec.real, 1e-8), &dec.quaternionic, 1e-8).dim(), 0);
    }

    #[test]
    fn ic4_invariants_do_not_depend_on_the_leading_vector(seed in any::<u64>(), theta in 0.05f64..1.5) {
        let mut r = rng(seed, 14);
        let s: Structure<f64> = random_structure(&mut r);
        let u = make_complex4(N, &s, theta, 0).unwrap().transform(&random_sp_n(&mut r, N), 1e-10);
        let space = HQSpace::new(N);
        let base = ic4_invariants(&space, &u, None, &tol()).unwrap();
        for _ in 0..20 {
            let lead = &u.basis * gaussian_vector::<f64, _>(&mut r, 4);
            let inv = ic4_invariants(&space, &u, Some(&lead), &tol()).unwrap();
            for (a, b) in [(base.xi, inv.xi), (base.chi, inv.chi), (base.eta, inv.eta), (base.gamma, inv.gamma), (base.delta, inv.delta)] {
                prop_assert!((a - b).abs() < 1e-7);
            }
            prop_assert!((base.c_ij - inv.c_ij).amax() < 1e-7 && (base.c_ik - inv.c_ik).amax() < 1e-7);
        }
    }

    #[test]
    fn chain_triple_vanishes_only_in_adapted_bases(seed in any::<u64>(), theta in 0.05f64..1.5) {
        let mut r = rng(seed, 15);
        let b: f64 = r.random_range(0.2..0.9);
        let s = Structure::from_vector(Vector3::new(b, (1.0 - b * b).sqrt(), 0.0));
        let u = make_complex4(N, &s, theta, 0).unwrap();
        let inv = ic4_invariants(&HQSpace::new(N), &u, None, &tol()).unwrap();
        prop_assert!(inv.xi.abs().max(inv.chi.abs()).max(inv.eta.abs()) > 1e-6);
        let c = nalgebra::Matrix3::from_columns(&[
            s.coeffs,
            adapted_triple(&s).1.coeffs,
            adapted_triple(&s).2.coeffs,
        ]);
        let adapted = HQSpace::new(N).with_basis(c, 1e-12).unwrap();
        let inv = ic4_invariants(&adapted, &u, None, &tol()).unwrap();
        prop_assert!(inv.xi.abs().max(inv.chi.abs()).max(inv.eta.abs()) < 1e-9);
    }

    #[test]
    fn generators_round_trip_through_the_invariant(seed in any::<u64>()) {
        let mut r = rng(seed, 16);
        let space = HQSpace::new(N);
        let specs = random_sigma_spec(&mut r, N);
        let u = make_sigma(N, &specs).unwrap();
        match orbit_invariant(&space, &u, &tol()).unwrap() {
            OrbitInvariant::SigmaComplex { parts } => {
                prop_assert_eq!(parts.len(), specs.len());
                for spec in &specs {
                    let c = spec.structure.canonical().coeffs;
                    let part = parts.iter().find(|(s, _)| (s.coeffs - c).amax() < 1e-7);
                    prop_assert!(part.is_some());
                    let want = spec.expected_multiangle();
                    let got = &part.unwrap().1;
                    prop_assert_eq!(got.len(), want.len());
                    for (a, b) in got.iter().zip(&want) {
                        prop_assert!((a - b).abs() < 1e-7);
                    }
                }
            }
            other => prop_assert!(false, "{:?}", other),
        }
        let theta = r.random_range(0.05..1.5);
        let s: Structure<f64> = random_structure(&mut r);
        match orbit_invariant(&space, &make_complex4(N, &s, theta, 1).unwrap(), &tol()).unwrap() {
            OrbitInvariant::Complex { structure, multiangle } => {
                prop_assert!((structure.coeffs - s.canonical().coeffs).amax() < 1e-7);
                prop_assert!(multiangle.len() == 1 && (multiangle[0] - theta).abs() < 1e-7);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn disjoint_generators_are_hermitian_orthogonal(seed in any::<u64>()) {
        let mut r = rng(seed, 17);
        let s: Structure<f64> = random_structure(&mut r);
        let a = make_complex4(N, &s, r.random_range(0.1..1.4), 0).unwrap();
        let b = make_complex4(N, &s, r.random_range(0.1..1.4), 2).unwrap();
        let g = random_sp_n(&mut r, N);
        prop_assert!(is_hermitian_orthogonal(&a.transform(&g, 1e-10), &b.transform(&g, 1e-10), 1e-9).unwrap());
        let c = make_complex4(N, &s, 0.5, 1).unwrap();
        prop_assert!(!is_hermitian_orthogonal(&a, &c, 1e-9).unwrap());
    }

    #[test]
    fn sp1_rotates_the_imaginary_measure(seed in any::<u64>()) {
        let mut r = rng(seed, 18);
        let space = HQSpace::new(N);
        let u: Frame<f64> = random_frame(&mut r, N, 2);
        let q = random_sp1(&mut r);
        let g = random_sp_n(&mut r, N);
        let moved = act_sp1(&u.transform(&g, 1e-12), q);
        let col = |f: &Frame<f64>, k: usize| f.basis.column(k).into_owned();
        let before = imaginary_measure(&space, &col(&u, 0), &col(&u, 1), 1e-12).unwrap();
        let gu = Frame::from_orthonormal(&g * &u.basis);
        let moved_basis = act_sp1(&gu, q);
        let after = imaginary_measure(&space, &col(&moved_basis, 0), &col(&moved_basis, 1), 1e-12).unwrap();
        prop_assert!((after.norm() - before.norm()).abs() < 1e-12);
        let rotated = (q.conj() * quatorbit::hqspace::Quaternion::from_parts(0.0, before) * q).imag();
        prop_assert!((after - rotated).amax() < 1e-12);
        prop_assert!(moved.dim() == 2);
    }

    #[test]
    fn characteristic_deviation_is_sp_n_sp1_invariant(seed in any::<u64>(), m in 2usize..7) {
        let mut r = rng(seed, 19);
        let u: Frame<f64> = random_frame(&mut r, N, m);
        let d = characteristic_deviation(&u).unwrap();
        let moved = act_sp_n_sp1(&random_sp_n(&mut r, N), random_sp1(&mut r), &u);
        prop_assert!((characteristic_deviation(&moved).unwrap() - d).abs() < 1e-8);
    }

    #[test]
    fn orbit_invariant_survives_sp_n(seed in any::<u64>(), family in 0usize..6) {
        let mut r = rng(seed, 20);
        let space = HQSpace::new(N);
        let u = quatorbit::check::sample_family(&mut r, quatorbit::check::FAMILIES[family], N);
        let a = orbit_invariant(&space, &u, &tol()).unwrap();
        let b = orbit_invariant(&space, &u.transform(&random_sp_n(&mut r, N), 1e-10), &tol()).unwrap();
        let d = invariant_distance(&a, &b);
        prop_assert!(d.is_some_and(|d| d < 1e-6), "{:?} vs {:?}", a, b);
    }
}

use rand::Rng;
