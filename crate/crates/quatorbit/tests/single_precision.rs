//! The generic code paths instantiated at `f32`.

use quatorbit::angles::{isoclinicity, principal_angles};
use quatorbit::decompose::{full_decompose, SearchConfig};
use quatorbit::hqspace::{HQSpace, Structure};
use quatorbit::lab::{make_complex4, random_frame, random_sp_n, rng};
use quatorbit::orbit::{orbit_invariant, OrbitInvariant};
use quatorbit::{Frame32, Tolerances};

#[test]
fn complex4_in_single_precision() {
    let tol = Tolerances::<f32>::single_precision();
    let s = Structure::<f32>::from_vector(nalgebra::Vector3::new(1.0, 2.0, 2.0));
    let g = random_sp_n::<f32, _>(&mut rng(3, 0), 3);
    let u = make_complex4(3, &s, 0.7f32, 0).unwrap().transform(&g, 1e-5);
    let iso = isoclinicity(&Structure::i(), &u, tol.iso);
    assert!(iso.isoclinic);
    let want = (1.0f32 / 9.0 + 8.0 / 9.0 * 0.7f32.cos().powi(2)).sqrt().acos();
    assert!((iso.angle - want).abs() < 1e-4);

    let dec = full_decompose(&u, &tol, &SearchConfig::default()).unwrap();
    assert_eq!(dec.sigma.len(), 1);
    match orbit_invariant(&HQSpace::<f32>::new(3), &u, &tol).unwrap() {
        OrbitInvariant::Complex { structure, multiangle } => {
            assert!((structure.coeffs - s.canonical().coeffs).amax() < 1e-3);
            assert!((multiangle[0] - 0.7).abs() < 1e-3);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn principal_angles_in_single_precision() {
    let mut r = rng(5, 0);
    let u: Frame32 = random_frame(&mut r, 3, 3);
    let w: Frame32 = random_frame(&mut r, 3, 4);
    let pa = principal_angles(&u, &w);
    let back = principal_angles(&w, &u);
    for (a, b) in pa.angles.iter().zip(&back.angles) {
        assert!((a - b).abs() < 1e-4);
    }
}
