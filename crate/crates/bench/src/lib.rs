//! Fixtures shared by the benchmarks.

use ee_core::partition::belt;
use ee_core::{Dispersion, LatticeGeometry, Region};

/// A square 2D lattice with a half-width belt perpendicular to x.
pub fn half_belt(n: usize) -> (LatticeGeometry, Region) {
    let geom = LatticeGeometry::new(2, n).expect("valid size");
    let region = belt(&geom, 0, 0, n / 2).expect("valid width");
    (geom, region)
}

pub fn dispersions() -> Vec<(&'static str, Dispersion)> {
    vec![
        ("ebl", Dispersion::ebl()),
        (
            "closed",
            Dispersion::closed_surface(1.0, 0.75).expect("valid parameters"),
        ),
        ("gapped", Dispersion::gapped(1.0).expect("valid mass")),
    ]
}
