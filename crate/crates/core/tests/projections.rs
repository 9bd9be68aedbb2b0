mod common;

use hillriesz::floquet::Floquet;
use hillriesz::potential::fixtures;
use hillriesz::resolvent::{checked_projection, default_radius, idempotency_defect, riesz_projection_with};
use hillriesz::rootbasis::{build_cluster_vectors, residue_mismatch, ClusterVectors, Sign};
use hillriesz::spectra::Boundary;
use hillriesz::C64;

const G: usize = 257;

fn distinct_values(cat: &hillriesz::spectra::SpectrumCatalog, k_limit: usize) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for r in cat.periodic.iter().filter(|r| r.k <= k_limit) {
        match out.iter_mut().find(|(z, _)| (z - r.value).norm() < 1e-6) {
            Some(e) => e.1 += r.multiplicity,
            None => out.push((r.value, r.multiplicity)),
        }
    }
    out
}

#[test]
fn traces_equal_algebraic_multiplicity() {
    for (name, v) in common::all_fixtures() {
        let (fl, cat) = common::catalog(&v, G, 6, Boundary::Periodic);
        let values = distinct_values(&cat, 2);
        assert!(values.len() >= 3, "{name}: {values:?}");
        for (z, m) in values {
            let p = checked_projection(&fl, &cat, z, None, 256).unwrap();
            assert!((p.trace - m as f64).norm() < 1e-6, "{name} at {z}: trace {}", p.trace);
            assert!(idempotency_defect(&p) < 1e-5, "{name} at {z}");
        }
    }
}

#[test]
fn antiperiodic_traces() {
    let v = fixtures::mathieu();
    let (fl, cat) = common::catalog(&v, G, 6, Boundary::Antiperiodic);
    for (z, m) in distinct_values(&cat, 1) {
        let p = checked_projection(&fl, &cat, z, None, 256).unwrap();
        assert!((p.trace - m as f64).norm() < 1e-6);
    }
}

#[test]
fn single_eigenvalue_residue_in_complex_pair() {
    let v = fixtures::complex_pair();
    let (fl, cat) = common::catalog(&v, 2 * G - 1, 6, Boundary::Periodic);
    for k in 1..=2 {
        let cl = *cat.cluster(k).unwrap();
        assert!(cl.klass.is_simple());
        let cv = build_cluster_vectors(&fl, &cl).unwrap();
        for (i, (lam, sign)) in [(cl.lam_plus, Sign::Plus), (cl.lam_minus, Sign::Minus)].into_iter().enumerate() {
            let r = default_radius(&cat, lam);
            let p = riesz_projection_with(&fl, 0.0, lam, r, 256).unwrap();
            assert_eq!(p.multiplicity, 1);
            assert_eq!(cv.phi[i].sign, sign);
            let one = ClusterVectors {
                k,
                shape: cv.shape,
                phi: vec![cv.phi[i].clone()],
                chi: vec![cv.chi[i].clone()],
                constants: Vec::new(),
                flags: Vec::new(),
            };
            let miss = residue_mismatch(&p, &one).unwrap();
            assert!(miss < 1e-5, "k = {k}, {sign:?}: {miss}");
        }
    }
}

#[test]
fn contour_through_spectrum_is_refused() {
    let v = fixtures::mathieu();
    let fl = Floquet::new(&v, G).unwrap();
    let (_, cat) = common::catalog(&v, G, 6, Boundary::Periodic);
    let c1 = cat.cluster(1).unwrap();
    let r = (c1.lam_plus - c1.lam_minus).norm();
    assert!(checked_projection(&fl, &cat, c1.lam_plus, Some(r), 128).is_err());
}
