#![allow(dead_code)]

use hillriesz::floquet::Floquet;
use hillriesz::potential::{fixtures, Potential};
use hillriesz::spectra::{add_neumann, build_catalog_with, Boundary, SpectraOptions, SpectrumCatalog};

pub fn all_fixtures() -> Vec<(&'static str, Potential)> {
    vec![
        ("zero", fixtures::zero()),
        ("mathieu", fixtures::mathieu()),
        ("gasymov", fixtures::gasymov()),
        ("complex", fixtures::complex_pair()),
    ]
}

pub fn catalog(v: &Potential, g: usize, k: usize, b: Boundary) -> (Floquet, SpectrumCatalog) {
    let fl = Floquet::new(v, g).unwrap();
    let opts = SpectraOptions { grid_points: g, ..SpectraOptions::default() };
    let mut cat = build_catalog_with(&fl, v, k, b, &opts).unwrap();
    if b == Boundary::Periodic {
        add_neumann(&mut cat, &fl, v, &opts).unwrap();
    }
    (fl, cat)
}
