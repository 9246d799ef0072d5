//! Real-space coupling matrix `V` of the oscillator Hamiltonian
//! `H = 1/2 sum p^2 + 1/2 q^T V q` (unit mass, hbar = 1).
//!
//! `V` is obtained from `omega^2(k)` by the antiperiodic inverse transform, so
//! its eigenvalues are exactly the squared grid frequencies and its entries
//! depend only on the displacement between oscillators, flipping sign across
//! the boundary.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kspace::{Dispersion, LatticeGeometry};
use crate::transform::DisplacementTable;

/// Largest lattice (in sites) for which dense matrices are formed.
pub const DENSE_SITE_CAP: usize = 4096;

/// Entries smaller than this are flushed to zero after the transform.
pub const FLUSH_THRESHOLD: f64 = 1e-12;

const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    geometry: LatticeGeometry,
    dense: DMatrix<f64>,
    stencil: Vec<(Vec<i64>, f64)>,
    structure: Option<Vec<DMatrix<f64>>>,
    spectrum: Vec<f64>,
}

impl CouplingMatrix {
    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    /// Axis matrices `V^1, ..., V^d` with `V = V^1 (x) ... (x) V^d`, when the
    /// dispersion is factorized.
    pub fn structure(&self) -> Option<&[DMatrix<f64>]> {
        self.structure.as_deref()
    }

    /// `omega^2(k)` in grid order.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Nonzero couplings by displacement, `|r_i| <= N_i - 1`.
    pub fn stencil(&self) -> &[(Vec<i64>, f64)] {
        &self.stencil
    }

    pub fn coupling_at(&self, disp: &[i64]) -> f64 {
        self.stencil.iter().find(|(d, _)| d == disp).map_or(0.0, |(_, v)| *v)
    }

    /// Plain-text dump: a header comment, then `i j V_ij` for each nonzero entry.
    pub fn write_dump<W: Write>(&self, mut out: W, dispersion: &str) -> std::io::Result<()> {
        writeln!(out, "# ee coupling v1 {} disp={}", self.geometry, dispersion)?;
        let n = self.dense.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = self.dense[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn check_dense_size(geom: &LatticeGeometry) -> Result<()> {
    if geom.sites() > DENSE_SITE_CAP {
        return Err(Error::DenseTooLarge {
            sites: geom.sites(),
            cap: DENSE_SITE_CAP,
        });
    }
    Ok(())
}

pub fn build_coupling(disp: &Dispersion, geom: &LatticeGeometry) -> Result<CouplingMatrix> {
    let mut v = transform_coupling(disp, geom)?;
    if disp.is_factorized() {
        v.structure = Some(
            (0..geom.dims())
                .map(|axis| axis_chain_matrix(disp, geom, axis).map(|m| m.dense))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(v)
}

fn transform_coupling(disp: &Dispersion, geom: &LatticeGeometry) -> Result<CouplingMatrix> {
    check_dense_size(geom)?;
    let omega = disp.grid_values(geom)?;
    let spectrum: Vec<f64> = omega.iter().map(|w| w * w).collect();
    let table = DisplacementTable::from_grid(geom, &spectrum);
    let (imag, at) = table.max_imag();
    if imag > IMAG_TOLERANCE {
        return Err(Error::ComplexCoupling(imag, at));
    }
    let flush = |v: f64| if v.abs() < FLUSH_THRESHOLD { 0.0 } else { v };

    let n = geom.sites();
    let coords: Vec<_> = (0..n).map(|i| geom.coord(i)).collect();
    let mut dense = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = flush(table.between(&coords[i], &coords[j]));
            dense[(i, j)] = v;
            dense[(j, i)] = v;
        }
    }
    let stencil = table
        .entries()
        .map(|(d, v)| (d, flush(v.re)))
        .filter(|(_, v)| *v != 0.0)
        .collect();

    Ok(CouplingMatrix {
        geometry: geom.clone(),
        dense,
        stencil,
        structure: None,
        spectrum,
    })
}

/// The 1D coupling matrix along `axis` of a factorized dispersion, with
/// spectrum `|f_axis(k)|^2`.
pub fn axis_chain_matrix(disp: &Dispersion, geom: &LatticeGeometry, axis: usize) -> Result<CouplingMatrix> {
    let factor = disp.axis_factor(axis).ok_or_else(|| {
        Error::InvalidDispersion(format!("axis chain matrix needs a factorized dispersion, got {disp}"))
    })?;
    if axis >= geom.dims() {
        return Err(Error::InvalidGeometry(format!("axis {axis} out of range for {geom}")));
    }
    let line = LatticeGeometry::with_extents(vec![geom.extent(axis)])?;
    let chain = Dispersion::Factorized { factors: vec![factor] };
    transform_coupling(&chain, &line)
}

/// Largest Chebyshev distance, measured the short way around each axis, of
/// any coupling with `|V_r| > 1e-10`.
pub fn coupling_range(v: &CouplingMatrix) -> usize {
    let extents = v.geometry.extents();
    v.stencil
        .iter()
        .filter(|(_, val)| val.abs() > 1e-10)
        .map(|(d, _)| {
            d.iter()
                .zip(extents)
                .map(|(&r, &n)| {
                    let r = r.unsigned_abs() as usize;
                    r.min(n - r)
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kspace::{make_kgrid, min_grid_frequency, AxisFactor};
    use crate::linalg::sym_eigenvalues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn geom(d: usize, n: usize) -> LatticeGeometry {
        LatticeGeometry::new(d, n).unwrap()
    }

    #[test]
    fn nearest_neighbour_chain_values() {
        for n in [3usize, 4, 7, 12, 33] {
            let v = build_coupling(&Dispersion::ebl(), &geom(1, n)).unwrap();
            assert_eq!(v.coupling_at(&[0]), 2.0, "N={n}");
            // Rounding can leave the last bit off; the flush restores exact zeros.
            assert!((v.coupling_at(&[1]) + 1.0).abs() < 1e-14);
            for r in 2..n as i64 - 1 {
                assert_eq!(v.coupling_at(&[r]), 0.0, "N={n} r={r}");
            }
            // r = N - 1 is one step across the antiperiodic boundary.
            assert!((v.coupling_at(&[n as i64 - 1]) - 1.0).abs() < 1e-14);
            assert!((v.dense()[(0, n - 1)] - 1.0).abs() < 1e-14);
            assert!((v.dense()[(n - 1, 0)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_site_chain_is_diagonal() {
        // Both modes k = pi/2, 3pi/2 have omega^2 = 4 sin^2(pi/4) = 2.
        let v = build_coupling(&Dispersion::ebl(), &geom(1, 2)).unwrap();
        assert!((v.dense() - DMatrix::identity(2, 2) * 2.0).amax() < 1e-14);
    }

    #[test]
    fn four_site_chain_by_direct_transform() {
        let v = axis_chain_matrix(&Dispersion::ebl(), &geom(2, 4), 0).unwrap();
        let ks = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        for i in 0..4 {
            for j in 0..4 {
                let r = i as f64 - j as f64;
                let direct: f64 = ks
                    .iter()
                    .map(|k| 4.0 * (k / 2.0).sin().powi(2) * (k * r).cos())
                    .sum::<f64>()
                    / 4.0;
                assert!((v.dense()[(i, j)] - direct).abs() < 1e-14);
            }
        }
        let expected = [
            [2.0, -1.0, 0.0, 1.0],
            [-1.0, 2.0, -1.0, 0.0],
            [0.0, -1.0, 2.0, -1.0],
            [1.0, 0.0, -1.0, 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((v.dense()[(i, j)] - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scaled_factor_scales_matrix() {
        let g = geom(1, 9);
        let base = axis_chain_matrix(&Dispersion::ebl(), &g, 0).unwrap();
        let c = 1.7;
        let scaled = Dispersion::Factorized {
            factors: vec![AxisFactor::Sine { scale: c }],
        };
        let m = axis_chain_matrix(&scaled, &g, 0).unwrap();
        assert!((m.dense() - base.dense() * (c * c)).amax() < 1e-13);
        assert!(axis_chain_matrix(&Dispersion::PointGapless, &g, 0).is_err());
    }

    #[test]
    fn ebl_couples_first_and_second_neighbours_only() {
        for n in [4, 8, 11] {
            let v = build_coupling(&Dispersion::ebl(), &geom(2, n)).unwrap();
            assert_eq!(coupling_range(&v), 1);
            for (d, _) in v.stencil() {
                let wrapped: Vec<usize> = d
                    .iter()
                    .map(|&r| (r.unsigned_abs() as usize).min(n - r.unsigned_abs() as usize))
                    .collect();
                assert!(wrapped.iter().all(|&r| r <= 1), "{d:?}");
            }
            assert!((v.coupling_at(&[1, 1]) - 1.0).abs() < 1e-14);
            assert!((v.coupling_at(&[1, 0]) + 2.0).abs() < 1e-14);
            assert!((v.coupling_at(&[0, 0]) - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coupling_ranges_by_kind() {
        let g = geom(2, 10);
        let gapped = build_coupling(&Dispersion::gapped(1.3).unwrap(), &g).unwrap();
        assert_eq!(coupling_range(&gapped), 1);
        let closed = build_coupling(&Dispersion::closed_surface(1.0, 0.75).unwrap(), &g).unwrap();
        assert_eq!(coupling_range(&closed), 2);
        let point = build_coupling(&Dispersion::PointGapless, &g).unwrap();
        assert_eq!(coupling_range(&point), 1);
    }

    #[test]
    fn spectral_round_trip() {
        let kinds = [
            Dispersion::ebl(),
            Dispersion::PointGapless,
            Dispersion::gapped(0.7).unwrap(),
            Dispersion::closed_surface(1.0, 0.75).unwrap(),
        ];
        for d in 1..=2 {
            for n in [3, 6, 9, 12] {
                for disp in &kinds {
                    let v = build_coupling(disp, &geom(d, n)).unwrap();
                    let mut eig: Vec<f64> = sym_eigenvalues(v.dense().clone()).unwrap().iter().copied().collect();
                    let mut expected = v.spectrum().to_vec();
                    eig.sort_by(f64::total_cmp);
                    expected.sort_by(f64::total_cmp);
                    for (a, b) in eig.iter().zip(&expected) {
                        let scale = b.abs().max(1e-3);
                        assert!((a - b).abs() / scale < 1e-9, "{disp} d={d} N={n}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn antiperiodic_plane_waves_are_eigenvectors() {
        let g = geom(2, 8);
        let disp = Dispersion::closed_surface(1.0, 0.75).unwrap();
        let v = build_coupling(&disp, &g).unwrap();
        let grid = make_kgrid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let idx = rng.gen_range(0..grid.len());
            let k = &grid.points()[idx];
            let w2 = disp.eval(k).unwrap().powi(2);
            for phase in [|x: f64| x.cos(), |x: f64| x.sin()] {
                let wave = nalgebra::DVector::from_iterator(
                    g.sites(),
                    (0..g.sites()).map(|i| {
                        let c = g.coord(i);
                        phase(k[0] * c[0] as f64 + k[1] * c[1] as f64)
                    }),
                );
                let residual = v.dense() * &wave - &wave * w2;
                assert!(residual.amax() < 1e-9);
            }
        }
    }

    #[test]
    fn factorized_structure_matches_dense() {
        let g = geom(2, 9);
        let v = build_coupling(&Dispersion::ebl(), &g).unwrap();
        let axes = v.structure().unwrap();
        let kron = axes[0].kronecker(&axes[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let i = rng.gen_range(0..g.sites());
            let j = rng.gen_range(0..g.sites());
            assert!((kron[(i, j)] - v.dense()[(i, j)]).abs() < 1e-12);
        }
        assert!(build_coupling(&Dispersion::PointGapless, &g)
            .unwrap()
            .structure()
            .is_none());
    }

    #[test]
    fn minimum_eigenvalue_is_softest_mode_squared() {
        for n in [4, 8, 12, 16] {
            let g = geom(2, n);
            let v = build_coupling(&Dispersion::ebl(), &g).unwrap();
            let (_, w) = min_grid_frequency(&Dispersion::ebl(), &make_kgrid(&g)).unwrap();
            let lowest = sym_eigenvalues(v.dense().clone()).unwrap().min();
            assert!((lowest - w * w).abs() < 1e-12, "N={n}");
            let closed_form = 16.0 * (PI / (2.0 * n as f64)).sin().powi(4);
            assert!((lowest - closed_form).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_cap_and_regularization_errors() {
        assert!(matches!(
            build_coupling(&Dispersion::ebl(), &geom(2, 65)),
            Err(Error::DenseTooLarge { .. })
        ));
        let err = build_coupling(&Dispersion::closed_surface(1.0, 1.0).unwrap(), &geom(2, 6)).unwrap_err();
        assert!(matches!(err, Error::Regularization { .. }));
    }

    #[test]
    fn dump_format() {
        let v = build_coupling(&Dispersion::ebl(), &geom(1, 3)).unwrap();
        let mut buf = Vec::new();
        v.write_dump(&mut buf, "ebl").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# ee coupling v1 d=1 N=3 disp=ebl");
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0], "0 0 2");
        assert_eq!(rows[2], "0 2 1");
        assert!(rows.iter().all(|r| r.split_whitespace().count() == 3));
    }
}
