mod common;

use hillriesz::oracle::{compare_catalog, truncation_eigenvalues};
use hillriesz::potential::fixtures;
use hillriesz::spectra::{Boundary, Operator};

#[test]
fn mathieu_matches_truncation_on_ten_clusters() {
    let v = fixtures::mathieu();
    for b in [Boundary::Periodic, Boundary::Antiperiodic] {
        let (_, cat) = common::catalog(&v, 1025, 12, b);
        let cmp = compare_catalog(&cat, &v, 128, 10).unwrap();
        assert!(cmp.max_mismatch < 1e-6, "{b:?}: {cmp:?}");
    }
}

#[test]
fn complex_fixtures_match_truncation() {
    for v in [fixtures::complex_pair(), fixtures::gasymov(), fixtures::single_mode()] {
        let (_, cat) = common::catalog(&v, 1025, 10, Boundary::Periodic);
        let cmp = compare_catalog(&cat, &v, 96, 8).unwrap();
        assert!(cmp.max_mismatch < 1e-6, "{cmp:?}");
    }
}

#[test]
fn mathieu_dirichlet_interlaces_periodic() {
    let v = fixtures::mathieu();
    let (_, cat) = common::catalog(&v, 1025, 12, Boundary::Periodic);
    for c in cat.clusters.iter().filter(|c| c.k <= 10) {
        let (lo, hi) = (c.lam_minus.re.min(c.lam_plus.re), c.lam_minus.re.max(c.lam_plus.re));
        let slack = if c.klass.is_double() { 2.0 * c.xi_plus.norm() * cat.cluster_tol * (1.0 + c.k as f64) } else { 1e-9 };
        assert!(c.k == 0 || (c.mu.re >= lo - slack && c.mu.re <= hi + slack), "k = {}: {} not in [{lo}, {hi}]", c.k, c.mu.re);
        for z in [c.lam_plus, c.lam_minus, c.mu] {
            assert!(z.im.abs() < 1e-9);
        }
    }
    // the same interlacing read off the truncations
    let p = truncation_eigenvalues(&v, Operator::P, 64, 21).unwrap();
    let d = truncation_eigenvalues(&v, Operator::D, 64, 20).unwrap();
    for k in 1..=10 {
        let (a, b) = (p[2 * k - 1].re, p[2 * k].re);
        let mu = d[2 * k - 1].re;
        assert!(mu >= a - 1e-9 && mu <= b + 1e-9, "k = {k}");
    }
}

#[test]
fn neumann_matches_truncation() {
    let v = fixtures::complex_pair();
    let (_, cat) = common::catalog(&v, 1025, 8, Boundary::Periodic);
    let cmp = compare_catalog(&cat, &v, 96, 8).unwrap();
    assert!(cmp.by_operator.contains_key("N"));
    assert!(cmp.by_operator["N"] < 1e-6);
}
