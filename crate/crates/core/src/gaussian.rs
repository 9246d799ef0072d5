//! Ground-state correlations and entanglement entropy of harmonic lattices.
//!
//! For `H = 1/2 sum p^2 + 1/2 q^T V q` the ground state is Gaussian with
//! `<q q> = V^{-1/2} / 2` and `<p p> = V^{1/2} / 2`. On the antiperiodic grid
//! both are plane-wave sums,
//!
//! ```text
//! X(r) = 1/(2 N^d) sum_k cos(k.r) / omega(k)
//! P(r) = 1/(2 N^d) sum_k cos(k.r) * omega(k)
//! ```
//!
//! The entropy of a region follows from the symplectic eigenvalues `nu_j`
//! of its restricted pair `(X_A, P_A)`: `nu_j^2` are the eigenvalues of
//! `sqrt(X_A) P_A sqrt(X_A)` and
//! `S = sum_j (nu_j + 1/2) ln(nu_j + 1/2) - (nu_j - 1/2) ln(nu_j - 1/2)`.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::CouplingMatrix;
use crate::kspace::{Dispersion, LatticeGeometry};
use crate::linalg::{sym_apply, sym_eigen, symmetrize};
use crate::partition::Region;
use crate::transform::DisplacementTable;

/// Symplectic eigenvalues more than this far below 1/2 count as clamped.
pub const CLAMP_REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    ChainDecomposition,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::ChainDecomposition => "chains",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyResult {
    /// Entropy in nats.
    pub value: f64,
    pub region_size: usize,
    pub method: Method,
    /// Smallest symplectic eigenvalue before clamping; `None` for an empty region.
    pub nu_min: Option<f64>,
    pub clamped_count: usize,
}

impl EntropyResult {
    pub fn empty(method: Method) -> Self {
        EntropyResult {
            value: 0.0,
            region_size: 0,
            method,
            nu_min: None,
            clamped_count: 0,
        }
    }
}

/// Position and momentum correlations restricted to a region.
#[derive(Debug, Clone)]
pub struct CorrelationPair {
    pub x: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub region: Region,
    pub source: String,
}

/// Modal entropy `f(nu)`; `f(1/2) = 0`.
pub fn entropy_function(nu: f64) -> f64 {
    let plus = nu + 0.5;
    let minus = nu - 0.5;
    let tail = if minus > 0.0 { minus * minus.ln() } else { 0.0 };
    plus * plus.ln() - tail
}

/// Ground state of a harmonic lattice, held as its two correlation functions
/// over all lattice displacements.
#[derive(Debug, Clone)]
pub struct GroundState {
    geometry: LatticeGeometry,
    source: String,
    x_table: DisplacementTable,
    p_table: DisplacementTable,
}

impl GroundState {
    pub fn new(disp: &Dispersion, geom: &LatticeGeometry) -> Result<Self> {
        let omega = disp.grid_values(geom)?;
        Ok(Self::from_grid_frequencies(geom, &omega, disp.to_string()))
    }

    /// `omega` must already be validated positive, in grid order.
    pub(crate) fn from_grid_frequencies(geom: &LatticeGeometry, omega: &[f64], source: String) -> Self {
        let inv: Vec<f64> = omega.iter().map(|w| 0.5 / w).collect();
        let half: Vec<f64> = omega.iter().map(|w| 0.5 * w).collect();
        GroundState {
            geometry: geom.clone(),
            source,
            x_table: DisplacementTable::from_grid(geom, &inv),
            p_table: DisplacementTable::from_grid(geom, &half),
        }
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn correlations(&self, region: &Region) -> Result<CorrelationPair> {
        if region.geometry() != &self.geometry {
            return Err(Error::GeometryMismatch(format!(
                "region on {} for ground state on {}",
                region.geometry(),
                self.geometry
            )));
        }
        let coords: Vec<_> = region.coords().collect();
        let n = coords.len();
        let fill = |table: &DisplacementTable| {
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| (0..n).map(|j| table.between(&coords[i], &coords[j])).collect())
                .collect();
            let mut m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            symmetrize(&mut m);
            m
        };
        Ok(CorrelationPair {
            x: fill(&self.x_table),
            p: fill(&self.p_table),
            region: region.clone(),
            source: format!("{} on {}", self.source, self.geometry),
        })
    }

    pub fn entropy(&self, region: &Region) -> Result<EntropyResult> {
        if region.is_empty() {
            return Ok(EntropyResult::empty(Method::Dense));
        }
        entropy_from_correlations(&self.correlations(region)?)
    }
}

/// Raw symplectic eigenvalues of `(X, P)` in descending order, before clamping.
pub fn symplectic_eigenvalues(x: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = sym_eigen(x.clone())?;
    let lowest = eig.eigenvalues.min();
    if !(lowest > 0.0) {
        return Err(Error::NotPositiveDefinite(lowest));
    }
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(lambda.sqrt());
    }
    let sqrt_x = &scaled * q.transpose();
    let mut m = &sqrt_x * p * &sqrt_x;
    symmetrize(&mut m);
    let mut nu: Vec<f64> = sym_eigen(m)?.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    Ok(nu)
}

pub fn entropy_from_correlations(corr: &CorrelationPair) -> Result<EntropyResult> {
    let size = corr.x.nrows();
    if size == 0 {
        return Ok(EntropyResult::empty(Method::Dense));
    }
    let nu = symplectic_eigenvalues(&corr.x, &corr.p)?;
    let nu_min = nu.last().copied();
    let clamped_count = nu.iter().filter(|&&v| v < 0.5 - CLAMP_REPORT_TOLERANCE).count();
    let value = nu.iter().map(|&v| entropy_function(v.max(0.5))).sum();
    Ok(EntropyResult {
        value,
        region_size: size,
        method: Method::Dense,
        nu_min,
        clamped_count,
    })
}

pub fn correlations(disp: &Dispersion, geom: &LatticeGeometry, region: &Region) -> Result<CorrelationPair> {
    GroundState::new(disp, geom)?.correlations(region)
}

pub fn entropy(disp: &Dispersion, geom: &LatticeGeometry, region: &Region) -> Result<EntropyResult> {
    GroundState::new(disp, geom)?.entropy(region)
}

/// Cross-check path: `X = V^{-1/2}/2`, `P = V^{1/2}/2` from a dense
/// eigendecomposition of `V`, restricted to `region`.
pub fn correlations_from_coupling(v: &CouplingMatrix, region: &Region) -> Result<CorrelationPair> {
    if region.geometry() != v.geometry() {
        return Err(Error::GeometryMismatch(format!(
            "region on {} for coupling on {}",
            region.geometry(),
            v.geometry()
        )));
    }
    let x_full = sym_apply(v.dense().clone(), |l| 0.5 / l.sqrt())?;
    let p_full = sym_apply(v.dense().clone(), |l| 0.5 * l.sqrt())?;
    let s = region.sites();
    Ok(CorrelationPair {
        x: DMatrix::from_fn(s.len(), s.len(), |i, j| x_full[(s[i], s[j])]),
        p: DMatrix::from_fn(s.len(), s.len(), |i, j| p_full[(s[i], s[j])]),
        region: region.clone(),
        source: format!("dense V on {}", v.geometry()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_coupling;
    use crate::partition::{belt, complement, from_sites, mask_from_predicate, mirror, translate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(d: usize, n: usize) -> LatticeGeometry {
        LatticeGeometry::new(d, n).unwrap()
    }

    fn full(geom: &LatticeGeometry) -> Region {
        mask_from_predicate(geom, |_| true)
    }

    fn random_region(geom: &LatticeGeometry, rng: &mut ChaCha8Rng) -> Region {
        let p = rng.gen_range(0.2..0.8);
        let sites: Vec<usize> = (0..geom.sites()).filter(|_| rng.gen_bool(p)).collect();
        from_sites(geom, sites).unwrap()
    }

    #[test]
    fn entropy_function_values() {
        assert_eq!(entropy_function(0.5), 0.0);
        assert!((entropy_function(1.5) - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((entropy_function(1.5) - 1.386294).abs() < 1e-6);
        let grid: Vec<f64> = (0..200).map(|i| 0.5 + 1e-6 + i as f64 * 0.05).collect();
        for w in grid.windows(2) {
            assert!(entropy_function(w[1]) > entropy_function(w[0]));
        }
    }

    #[test]
    fn full_system_is_pure() {
        for (d, n) in [(1, 9), (2, 6), (3, 4)] {
            let geom = g(d, n);
            for disp in [
                Dispersion::ebl(),
                Dispersion::PointGapless,
                Dispersion::gapped(0.5).unwrap(),
            ] {
                let corr = correlations(&disp, &geom, &full(&geom)).unwrap();
                let xp = &corr.x * &corr.p;
                let dev = (xp - DMatrix::identity(geom.sites(), geom.sites()) * 0.25).amax();
                assert!(dev < 1e-9, "{disp} {geom}: {dev}");
                let s = entropy_from_correlations(&corr).unwrap();
                assert!(s.value.abs() < 1e-8, "{disp} {geom}: {}", s.value);
            }
        }
    }

    #[test]
    fn constant_frequency_decouples() {
        let geom = g(2, 5);
        let c = 2.5;
        let disp = Dispersion::constant(&geom, c).unwrap();
        let region = belt(&geom, 0, 1, 2).unwrap();
        let corr = correlations(&disp, &geom, &region).unwrap();
        let id = DMatrix::<f64>::identity(region.len(), region.len());
        assert!((&corr.x - &id / (2.0 * c)).amax() < 1e-14);
        assert!((&corr.p - &id * (c / 2.0)).amax() < 1e-14);
        assert!(entropy(&disp, &geom, &region).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn single_site_matches_dense_square_root() {
        let geom = g(2, 8);
        let disp = Dispersion::ebl();
        let site = from_sites(&geom, [geom.index(&[3, 5, 0])]).unwrap();
        let sum = correlations(&disp, &geom, &site).unwrap();
        let v = build_coupling(&disp, &geom).unwrap();
        let dense = correlations_from_coupling(&v, &site).unwrap();
        assert!((sum.x[(0, 0)] - dense.x[(0, 0)]).abs() < 1e-10);
        assert!((sum.p[(0, 0)] - dense.p[(0, 0)]).abs() < 1e-10);
        assert!(4.0 * sum.x[(0, 0)] * sum.p[(0, 0)] >= 1.0);
    }

    #[test]
    fn plane_wave_sums_match_dense_square_roots() {
        let geom = g(2, 6);
        let disp = Dispersion::closed_surface(1.0, 0.75).unwrap();
        let v = build_coupling(&disp, &geom).unwrap();
        let region = belt(&geom, 1, 2, 3).unwrap();
        let a = correlations(&disp, &geom, &region).unwrap();
        let b = correlations_from_coupling(&v, &region).unwrap();
        assert!((&a.x - &b.x).amax() < 1e-9);
        assert!((&a.p - &b.p).amax() < 1e-9);
    }

    #[test]
    fn block_entropy_equals_complement_block() {
        let geom = g(1, 8);
        let block = belt(&geom, 0, 0, 4).unwrap();
        let s = entropy(&Dispersion::ebl(), &geom, &block).unwrap();
        let sc = entropy(&Dispersion::ebl(), &geom, &complement(&block)).unwrap();
        assert!(s.value > 0.1);
        assert!((s.value - sc.value).abs() < 1e-9);
    }

    #[test]
    fn empty_and_full_regions() {
        let geom = g(2, 6);
        let empty = mask_from_predicate(&geom, |_| false);
        let s = entropy(&Dispersion::ebl(), &geom, &empty).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.nu_min, None);
        let s = entropy(&Dispersion::ebl(), &geom, &full(&geom)).unwrap();
        assert!(s.value.abs() < 1e-8);
        assert_eq!(s.clamped_count, 0);
    }

    #[test]
    fn heisenberg_bound_on_subregions() {
        let geom = g(2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = GroundState::new(&Dispersion::ebl(), &geom).unwrap();
        for _ in 0..5 {
            let r = random_region(&geom, &mut rng);
            let corr = state.correlations(&r).unwrap();
            let nu = symplectic_eigenvalues(&corr.x, &corr.p).unwrap();
            assert!(nu.iter().all(|&v| v >= 0.5 - 1e-9));
            assert!(nu.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn scale_invariance() {
        let geom = g(2, 6);
        let region = crate::partition::rectangle(&geom, [0, 1], 3, 2).unwrap();
        let base_values = Dispersion::PointGapless.grid_values(&geom).unwrap();
        let base = GroundState::from_grid_frequencies(&geom, &base_values, "point".into());
        let b = base.correlations(&region).unwrap();
        let s0 = entropy_from_correlations(&b).unwrap().value;
        for c in [0.1, 7.3] {
            let scaled: Vec<f64> = base_values.iter().map(|w| c * w).collect();
            let st = GroundState::from_grid_frequencies(&geom, &scaled, "scaled".into());
            let corr = st.correlations(&region).unwrap();
            assert!((&corr.x - &b.x / c).amax() < 1e-12);
            assert!((&corr.p - &b.p * c).amax() < 1e-12);
            let s = entropy_from_correlations(&corr).unwrap().value;
            assert!((s - s0).abs() < 1e-9, "c={c}: {s} vs {s0}");
        }
    }

    #[test]
    fn complement_symmetry_on_random_regions() {
        let geom = g(2, 10);
        let state = GroundState::new(&Dispersion::ebl(), &geom).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_region(&geom, &mut rng);
            let s = state.entropy(&a).unwrap().value;
            let sc = state.entropy(&complement(&a)).unwrap().value;
            assert!((s - sc).abs() < 1e-6, "{s} vs {sc}");
        }
    }

    #[test]
    fn symmetric_product_matches_nonsymmetric_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let n = rng.gen_range(2..7);
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let x = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
            let p = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
            let nu = symplectic_eigenvalues(&x, &p).unwrap();
            let mut oracle: Vec<f64> = (&x * &p).complex_eigenvalues().iter().map(|z| z.re).collect();
            oracle.sort_by(|a, b| b.total_cmp(a));
            for (v, o) in nu.iter().zip(&oracle) {
                assert!((v * v - o).abs() / o.abs() < 1e-8, "{} vs {o}", v * v);
            }
        }
    }

    #[test]
    fn translation_and_mirror_invariance() {
        let geom = g(2, 10);
        let state = GroundState::new(&Dispersion::ebl(), &geom).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let shape = mask_from_predicate(&geom, |c| c[0] < 4 && c[1] < 3 + c[0] / 2);
        let s = state.entropy(&shape).unwrap().value;
        for _ in 0..5 {
            let v = [rng.gen_range(-10..10), rng.gen_range(-10..10)];
            let t = state.entropy(&translate(&shape, &v).unwrap()).unwrap().value;
            assert!((t - s).abs() < 1e-8, "{v:?}: {t} vs {s}");
        }
        for axis in 0..2 {
            let m = state.entropy(&mirror(&shape, axis).unwrap()).unwrap().value;
            assert!((m - s).abs() < 1e-8);
        }
    }

    #[test]
    fn geometry_mismatch_is_rejected() {
        let state = GroundState::new(&Dispersion::ebl(), &g(2, 6)).unwrap();
        let r = belt(&g(2, 7), 0, 0, 2).unwrap();
        assert!(matches!(state.entropy(&r), Err(Error::GeometryMismatch(_))));
    }
}
