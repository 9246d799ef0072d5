use ee_core::analysis::{check_ssa, fit_log_scaling, ScalingModel, ScalingPoint};
use ee_core::chains::{decompose_belt, ChainOptions};
use ee_core::partition::{belt, complement, from_sites, translate};
use ee_core::{Dispersion, Error, GroundState, LatticeGeometry, Region};
use proptest::prelude::*;

fn lattice(n: usize) -> LatticeGeometry {
    LatticeGeometry::new(2, n).unwrap()
}

#[test]
fn dispersion_literals_round_trip() {
    for lit in ["ebl", "closed:alpha=1,beta=0.75", "point", "gapped:m=0.5"] {
        let d = Dispersion::parse(lit).unwrap();
        assert_eq!(Dispersion::parse(&d.to_string()).unwrap().to_string(), d.to_string());
    }
    assert!(Dispersion::parse("closed:alpha=1").is_err());
    assert!(Dispersion::parse("wave").is_err());
}

#[test]
fn region_literals() {
    let geom = lattice(8);
    assert_eq!(Region::parse(&geom, "belt:x,0,3").unwrap().len(), 24);
    assert_eq!(Region::parse(&geom, "rect:1,1,2,3").unwrap().len(), 6);
    assert!(Region::parse(&geom, "belt:x,0,8").is_err());
    assert!(Region::parse(&geom, "blob:1").is_err());
}

#[test]
fn belts_through_both_paths() {
    let geom = lattice(10);
    let disp = Dispersion::closed_surface(1.0, 0.75).unwrap();
    let state = GroundState::new(&disp, &geom).unwrap();
    for l in [1, 4, 9] {
        let region = belt(&geom, 1, 3, l).unwrap();
        let dense = state.entropy(&region).unwrap().value;
        let chains = decompose_belt(&disp, &geom, &region, ChainOptions::default()).unwrap();
        assert!((dense - chains.total.value).abs() < 1e-8);
    }
}

#[test]
fn belt_entropy_symmetric_about_half() {
    let geom = lattice(16);
    let disp = Dispersion::ebl();
    let s = |l| {
        decompose_belt(&disp, &geom, &belt(&geom, 0, 0, l).unwrap(), ChainOptions::default())
            .unwrap()
            .total
            .value
    };
    for l in 1..8 {
        assert!((s(l) - s(16 - l)).abs() < 1e-9);
    }
}

#[test]
fn regularization_is_reported() {
    let geom = lattice(8);
    let err = GroundState::new(&Dispersion::closed_surface(1.0, 1.0).unwrap(), &geom).unwrap_err();
    assert!(matches!(err, Error::Regularization { .. }));
    assert!(err.is_numerical());
}

#[test]
fn noisy_log_fit_recovers_coefficient() {
    let pts: Vec<ScalingPoint> = [8usize, 16, 32, 64, 128]
        .iter()
        .enumerate()
        .map(|(i, &l)| ScalingPoint {
            l,
            n: 2 * l,
            s: (l as f64).ln() / 3.0 + 0.5 + if i % 2 == 0 { 1e-4 } else { -1e-4 },
        })
        .collect();
    let fit = fit_log_scaling(&pts, ScalingModel::Plain).unwrap();
    assert!((fit.slope - 1.0 / 3.0).abs() < 1e-3);
    assert!(fit.residual < 3e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn complement_and_translation_preserve_entropy(
        bits in proptest::collection::vec(any::<bool>(), 36),
        dx in -5i64..5,
        dy in -5i64..5,
    ) {
        let geom = lattice(6);
        let state = GroundState::new(&Dispersion::ebl(), &geom).unwrap();
        let a = from_sites(&geom, bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)).unwrap();
        let s = state.entropy(&a).unwrap().value;
        prop_assert!(s >= -1e-12);
        prop_assert!((s - state.entropy(&complement(&a)).unwrap().value).abs() < 1e-7);
        let moved = translate(&a, &[dx, dy]).unwrap();
        prop_assert!((s - state.entropy(&moved).unwrap().value).abs() < 1e-7);
    }

    #[test]
    fn ssa_slack_nonnegative(
        a_bits in proptest::collection::vec(any::<bool>(), 36),
        b_bits in proptest::collection::vec(any::<bool>(), 36),
    ) {
        let geom = lattice(6);
        let pick = |bits: &[bool]| from_sites(&geom, bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)).unwrap();
        let r = check_ssa(&Dispersion::gapped(0.3).unwrap(), &geom, &pick(&a_bits), &pick(&b_bits)).unwrap();
        prop_assert!(r.slack >= -1e-8);
    }
}
