//! Inverse transforms from the antiperiodic momentum grid to lattice
//! displacements.
//!
//! For a table `v(k)` on the grid this evaluates
//! `T(r) = (1 / N^d) sum_k v(k) exp(i k . r)` for every displacement with
//! `|r_i| <= N_i - 1`, one axis at a time. Because `k` is antiperiodic,
//! `T(r + N e_i) = -T(r)`; the table covers every difference of two lattice
//! sites, so no wrapping is ever needed when reading it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::kspace::{Coord, LatticeGeometry, MAX_DIMS};

#[derive(Debug, Clone)]
pub struct DisplacementTable {
    extents: Vec<usize>,
    values: Vec<Complex64>,
}

impl DisplacementTable {
    /// Transform of `grid_values` (lexicographic grid order).
    pub fn from_grid(geom: &LatticeGeometry, grid_values: &[f64]) -> Self {
        assert_eq!(grid_values.len(), geom.sites());
        let extents = geom.extents().to_vec();
        let mut shape = extents.clone();
        let mut data: Vec<Complex64> = grid_values.iter().map(|&v| Complex64::new(v, 0.0)).collect();

        for (axis, &n) in extents.iter().enumerate() {
            let m = 2 * n - 1;
            let phases = phase_table(n);
            let outer: usize = shape[..axis].iter().product();
            let inner: usize = shape[axis + 1..].iter().product();
            let mut out = vec![Complex64::new(0.0, 0.0); outer * m * inner];
            out.par_chunks_mut(inner).enumerate().for_each(|(row, acc)| {
                let (o, delta) = (row / m, row % m);
                let base = o * n * inner;
                for (label, p) in phases[delta].iter().enumerate() {
                    let src = &data[base + label * inner..base + (label + 1) * inner];
                    for (a, s) in acc.iter_mut().zip(src) {
                        *a += p * s;
                    }
                }
            });
            shape[axis] = m;
            data = out;
        }

        let norm = 1.0 / geom.sites() as f64;
        for v in &mut data {
            *v *= norm;
        }
        Self { extents, values: data }
    }

    fn offset(&self, disp: &[i64]) -> usize {
        self.extents.iter().zip(disp).fold(0, |acc, (&n, &r)| {
            debug_assert!(r.unsigned_abs() < n as u64);
            acc * (2 * n - 1) + (r + n as i64 - 1) as usize
        })
    }

    pub fn get(&self, disp: &[i64]) -> Complex64 {
        self.values[self.offset(disp)]
    }

    /// Real part at the displacement between two sites.
    pub fn between(&self, a: &Coord, b: &Coord) -> f64 {
        let mut d = [0i64; MAX_DIMS];
        for axis in 0..self.extents.len() {
            d[axis] = a[axis] as i64 - b[axis] as i64;
        }
        self.values[self.offset(&d[..self.extents.len()])].re
    }

    /// Every displacement in the table with its value.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        let ranges: Vec<usize> = self.extents.iter().map(|&n| 2 * n - 1).collect();
        self.values.iter().enumerate().map(move |(mut i, &v)| {
            let mut d = vec![0i64; ranges.len()];
            for axis in (0..ranges.len()).rev() {
                d[axis] = (i % ranges[axis]) as i64 - (self.extents[axis] as i64 - 1);
                i /= ranges[axis];
            }
            (d, v)
        })
    }

    pub fn max_imag(&self) -> (f64, Vec<i64>) {
        self.entries()
            .map(|(d, v)| (v.im.abs(), d))
            .fold((0.0, Vec::new()), |best, cur| if cur.0 > best.0 { cur } else { best })
    }
}

/// `phases[delta + N - 1][n] = exp(i (2n + 1) pi delta / N)`, with the angle
/// reduced exactly in integers before the trig call.
fn phase_table(n: usize) -> Vec<Vec<Complex64>> {
    let two_n = 2 * n as i64;
    (-(n as i64 - 1)..=(n as i64 - 1))
        .map(|delta| {
            (0..n as i64)
                .map(|label| {
                    let m = ((2 * label + 1) * delta).rem_euclid(two_n);
                    Complex64::from_polar(1.0, m as f64 * std::f64::consts::PI / n as f64)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kspace::make_kgrid;

    #[test]
    fn matches_direct_plane_wave_sum() {
        let geom = LatticeGeometry::with_extents(vec![5, 4]).unwrap();
        let grid = make_kgrid(&geom);
        let values: Vec<f64> = grid
            .points()
            .iter()
            .map(|k| 1.0 + k[0].sin().powi(2) + 0.3 * k[1].cos() + 0.1 * k[0] * k[1])
            .collect();
        let table = DisplacementTable::from_grid(&geom, &values);
        for (d, v) in table.entries() {
            let mut direct = Complex64::new(0.0, 0.0);
            for (k, &w) in grid.points().iter().zip(&values) {
                let phase = k[0] * d[0] as f64 + k[1] * d[1] as f64;
                direct += Complex64::from_polar(w, phase);
            }
            direct /= geom.sites() as f64;
            assert!((direct - v).norm() < 1e-13, "{d:?}: {direct} vs {v}");
        }
    }

    #[test]
    fn antiperiodic_sign_flip() {
        let geom = LatticeGeometry::new(1, 6).unwrap();
        let values: Vec<f64> = make_kgrid(&geom).points().iter().map(|k| 3.0 - k[0].cos()).collect();
        let t = DisplacementTable::from_grid(&geom, &values);
        for r in 1..6i64 {
            assert!((t.get(&[r]) + t.get(&[r - 6])).norm() < 1e-14);
        }
    }
}
