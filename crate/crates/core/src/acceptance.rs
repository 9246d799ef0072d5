//! End-to-end acceptance checks. Each one returns a report instead of
//! panicking so the same code backs the test suite and `ee selftest`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    belt_sweep, belt_widths, check_ssa_state, closed_surface_gamma, fit_log_scaling, rectangle_bounds, ScalingModel,
    ScalingPoint,
};
use crate::chains::{chain_block_entropy, chain_entropy_profile, decompose_belt, ChainOptions};
use crate::error::Result;
use crate::gaussian::GroundState;
use crate::hamiltonian::build_coupling;
use crate::kspace::{Dispersion, LatticeGeometry};
use crate::partition::{belt, complement, disk, from_sites, Region};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// A failure is reported but does not count against the suite.
    pub warning_only: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn status(&self) -> &'static str {
        match (self.passed, self.warning_only) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        }
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2}: {} -- {}",
            self.status(),
            self.id,
            self.title,
            self.detail
        )
    }
}

fn report(id: u32, title: &'static str, outcome: Result<(bool, String)>) -> CriterionReport {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport {
        id,
        title,
        passed,
        warning_only: false,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_region(geom: &LatticeGeometry, rng: &mut ChaCha8Rng) -> Result<Region> {
    let p = rng.gen_range(0.15..0.6);
    let sites: Vec<usize> = (0..geom.sites()).filter(|_| rng.gen_bool(p)).collect();
    from_sites(geom, sites)
}

pub fn decomposition_exactness() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disps = [
            Dispersion::ebl(),
            Dispersion::closed_surface(1.0, 0.75)?,
            Dispersion::PointGapless,
            Dispersion::gapped(1.0)?,
        ];
        let mut worst = 0.0f64;
        let mut cases = 0;
        for disp in &disps {
            for n in [8, 12] {
                let geom = LatticeGeometry::new(2, n)?;
                let state = GroundState::new(disp, &geom)?;
                for l in 1..n {
                    let region = belt(&geom, 0, 0, l)?;
                    let dense = state.entropy(&region)?.value;
                    let chains = decompose_belt(disp, &geom, &region, ChainOptions::default())?
                        .total
                        .value;
                    worst = worst.max((dense - chains).abs());
                    cases += 1;
                }
            }
        }
        Ok((
            worst <= 1e-8,
            format!("{cases} belts, max |dense - chains| = {worst:.2e} (tol 1e-8)"),
        ))
    };
    report(1, "decomposition exactness", run())
}

pub fn one_dimensional_coefficient() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let pts = belt_sweep(&Dispersion::ebl(), 1, &[64, 128, 256, 512], 0.5)?;
        let fit = fit_log_scaling(&pts, ScalingModel::Plain)?;
        let err = rel(fit.slope, 1.0 / 3.0);
        Ok((
            err <= 0.03,
            format!("slope {:.5}, {:.2}% from 1/3 (tol 3%)", fit.slope, 100.0 * err),
        ))
    };
    report(2, "1D critical chain coefficient", run())
}

pub fn belt_law() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disp = Dispersion::ebl();
        let pts = belt_sweep(&disp, 2, &[16, 32, 64, 128], 0.5)?;
        let fit = fit_log_scaling(&pts, ScalingModel::PerTransverseSite { dims: 2 })?;
        let err = rel(fit.slope, 1.0 / 3.0);

        // Identical chains: at fixed chain length and width, S / (transverse count)
        // does not depend on how many chains there are.
        let (n_along, l) = (32, 8);
        let mut per_chain = Vec::new();
        for m in [16, 32, 64, 128] {
            let geom = LatticeGeometry::with_extents(vec![n_along, m])?;
            let region = belt(&geom, 0, 0, l)?;
            let d = decompose_belt(&disp, &geom, &region, ChainOptions { force_full: true })?;
            per_chain.push(d.total.value / m as f64);
        }
        let single = chain_block_entropy(&Dispersion::ebl().grid_values(&LatticeGeometry::new(1, n_along)?)?, l)?.value;
        let spread = per_chain.iter().map(|s| (s - single).abs()).fold(0.0, f64::max);

        // On square lattices the chain length is N too, so S(N, L)/N still moves.
        let square: Vec<String> = [16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let geom = LatticeGeometry::new(2, n)?;
                let d = decompose_belt(&disp, &geom, &belt(&geom, 0, 0, l)?, ChainOptions::default())?;
                Ok(format!("{:.6}", d.total.value / n as f64))
            })
            .collect::<Result<_>>()?;

        Ok((
            err <= 0.03 && spread <= 1e-10,
            format!(
                "slope {:.5} ({:.2}% from 1/3, tol 3%); S/M at chain length {n_along}, L={l}, M in 16..128 deviates \
                 {spread:.1e} from one chain (tol 1e-10); square-lattice S(N,{l})/N = [{}]",
                fit.slope,
                100.0 * err,
                square.join(", ")
            ),
        ))
    };
    report(3, "belt law", run())
}

pub fn three_dimensional_belt() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disp = Dispersion::ebl();
        let mut worst = 0.0f64;
        for (n, dense) in [(8, true), (16, false)] {
            let l = n / 2;
            let geom = LatticeGeometry::new(3, n)?;
            let region = belt(&geom, 0, 0, l)?;
            let s = if dense {
                GroundState::new(&disp, &geom)?.entropy(&region)?.value
            } else {
                decompose_belt(&disp, &geom, &region, ChainOptions { force_full: true })?
                    .total
                    .value
            };
            let one_d = chain_block_entropy(&disp.grid_values(&LatticeGeometry::new(1, n)?)?, l)?.value;
            worst = worst.max((s / (n * n) as f64 - one_d).abs());
        }
        let pts = belt_sweep(&disp, 3, &[8, 16, 32, 64], 0.5)?;
        let fit = fit_log_scaling(&pts, ScalingModel::PerTransverseSite { dims: 3 })?;
        let err = rel(fit.slope, 1.0 / 3.0);
        Ok((
            worst <= 1e-8 && err <= 0.05,
            format!(
                "max |S/N^2 - S_1D| = {worst:.1e} at N=8 (dense), 16 (all chains) (tol 1e-8); \
                 slope over N=8..64 {:.5}, {:.2}% from 1/3 (tol 5%)",
                fit.slope,
                100.0 * err
            ),
        ))
    };
    report(4, "3D belt", run())
}

pub fn purity_and_complement() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let geom = LatticeGeometry::new(2, 10)?;
        let state = GroundState::new(&Dispersion::ebl(), &geom)?;
        let full = state.entropy(&from_sites(&geom, 0..geom.sites())?)?.value;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let a = random_region(&geom, &mut rng)?;
            let diff = (state.entropy(&a)?.value - state.entropy(&complement(&a))?.value).abs();
            worst = worst.max(diff);
        }
        Ok((
            full <= 1e-8 && worst <= 1e-6,
            format!("S(full) = {full:.1e} (tol 1e-8); max |S(A) - S(A^c)| = {worst:.1e} over 20 masks (tol 1e-6)"),
        ))
    };
    report(5, "purity and complement", run())
}

pub fn strong_subadditivity() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disp = Dispersion::ebl();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut min_slack = f64::INFINITY;
        let mut cases = 0;
        for n in [10, 12] {
            let geom = LatticeGeometry::new(2, n)?;
            let state = GroundState::new(&disp, &geom)?;
            for _ in 0..25 {
                let (a, b) = (random_region(&geom, &mut rng)?, random_region(&geom, &mut rng)?);
                min_slack = min_slack.min(check_ssa_state(&state, &a, &b)?.slack);
                cases += 1;
            }
            for lx in 1..n {
                for ly in 1..n {
                    let r = check_ssa_state(&state, &belt(&geom, 0, 0, lx)?, &belt(&geom, 1, 0, ly)?)?;
                    min_slack = min_slack.min(r.slack);
                    cases += 1;
                }
            }
        }
        Ok((
            min_slack >= -1e-8,
            format!("{cases} pairs, min slack {min_slack:.3e} (tol -1e-8)"),
        ))
    };
    report(6, "strong subadditivity", run())
}

pub fn rectangle_bound_check() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disp = Dispersion::ebl();
        let mut exact_ok = true;
        for (n, lx, ly) in [(8, 4, 4), (8, 3, 5), (12, 6, 6), (12, 4, 7), (16, 8, 8), (16, 5, 11)] {
            let r = rectangle_bounds(&disp, &LatticeGeometry::new(2, n)?, lx, ly)?;
            exact_ok &= r.s_rect <= r.exact_upper + 1e-8;
        }
        let n = 32;
        let r = rectangle_bounds(&disp, &LatticeGeometry::new(2, n)?, 16, 16)?;
        exact_ok &= r.s_rect <= r.exact_upper + 1e-8;
        let ep = r.equal_partition.expect("equal partition");
        let asym_ok = ep.upper >= r.s_rect && r.s_rect >= ep.lower;
        Ok((
            exact_ok && asym_ok,
            format!(
                "N=32 equal partition: {:.3} >= S = {:.3} >= {:.3}; SSA upper {:.3}; exact bound held at all 7 sizes: {exact_ok}",
                ep.upper, r.s_rect, ep.lower, r.exact_upper
            ),
        ))
    };
    report(7, "rectangle bounds", run())
}

pub fn closed_surface() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let disp = Dispersion::closed_surface(1.0, 0.75)?;
        let geom = LatticeGeometry::new(2, 64)?;
        let g = closed_surface_gamma(&disp, &geom, &[8, 16, 32])?;

        let d = decompose_belt(&disp, &geom, &belt(&geom, 0, 0, 32)?, ChainOptions::default())?;
        let profile = chain_entropy_profile(&d);
        let peak = profile
            .iter()
            .max_by(|a, b| a.entropy.total_cmp(&b.entropy))
            .expect("nonempty profile");
        let ky = peak.k_perp[0];
        let peak_critical = (0.0..=1.0).contains(&(0.75 - (0.5 * ky).sin().powi(2)));

        Ok((
            g.relative_error <= 0.15 && peak_critical,
            format!(
                "fitted gamma' {:.4} vs predicted {:.4} ({} critical chains), {:.1}% off (tol 15%); \
                 profile peak at k_perp = {ky:.4} on a critical line: {peak_critical}",
                g.fitted_gamma,
                g.predicted_gamma,
                g.critical_chains,
                100.0 * g.relative_error
            ),
        ))
    };
    report(8, "closed Bose surface", run())
}

pub fn area_law_controls() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let geom = LatticeGeometry::new(2, 64)?;
        let widths: Vec<usize> = (8..=32).collect();
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, disp) in [
            ("gapped(m=1)", Dispersion::gapped(1.0)?),
            ("point", Dispersion::PointGapless),
        ] {
            let pts: Vec<ScalingPoint> = belt_widths(&disp, &geom, &widths)?;
            let fit = fit_log_scaling(&pts, ScalingModel::PerTransverseSite { dims: 2 })?;
            ok &= fit.slope.abs() < 0.02;
            parts.push(format!("{name} slope {:.2e}", fit.slope));
        }
        Ok((ok, format!("{} (tol |c| < 0.02)", parts.join(", "))))
    };
    report(9, "area-law controls", run())
}

pub fn regularization_spectrum() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut worst_min = 0.0f64;
        for n in [4, 6, 8, 12, 16] {
            let v = build_coupling(&Dispersion::ebl(), &LatticeGeometry::new(2, n)?)?;
            let eig = SymmetricEigen::new(v.dense().clone()).eigenvalues;
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let expect = 16.0 * (PI / (2.0 * n as f64)).sin().powi(4);
            worst_min = worst_min.max((min - expect).abs());
        }

        let mut entries_ok = true;
        for n in [3, 4, 8, 16] {
            let v = build_coupling(&Dispersion::ebl(), &LatticeGeometry::new(1, n)?)?;
            let m = v.dense();
            for i in 0..n {
                for j in 0..n {
                    let expect = match (j + n - i) % n {
                        0 => 2.0,
                        1 if j > i => -1.0,
                        1 => 1.0,
                        k if k == n - 1 && j < i => -1.0,
                        k if k == n - 1 => 1.0,
                        _ => 0.0,
                    };
                    let got = m[(i, j)];
                    entries_ok &= if expect == 0.0 {
                        got == 0.0
                    } else {
                        (got - expect).abs() <= 1e-14
                    };
                }
            }
        }
        Ok((
            worst_min <= 1e-12 && entries_ok,
            format!(
                "max |lambda_min - 16 sin^4(pi/2N)| = {worst_min:.1e} for N in 4..16 (tol 1e-12); \
                 1D entries {{2, -1, 0, .., +1}}: {entries_ok}"
            ),
        ))
    };
    report(10, "regularization spectrum", run())
}

pub fn smooth_boundary_growth() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for n in [12, 14, 16] {
            let geom = LatticeGeometry::new(2, n)?;
            let state = GroundState::new(&Dispersion::ebl(), &geom)?;
            let c = n as f64 / 2.0;
            let ratios: Vec<f64> = [3.0, 4.0, 5.0]
                .iter()
                .map(|&r| {
                    let region = disk(&geom, &[c, c], r)?;
                    Ok(state.entropy(&region)?.value / region.boundary_bonds() as f64)
                })
                .collect::<Result<_>>()?;
            ok &= ratios.windows(2).all(|w| w[1] > w[0]);
            parts.push(format!(
                "N={n}: [{}]",
                ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
            ));
        }
        Ok((ok, format!("S/perimeter for r=3,4,5: {}", parts.join("; "))))
    };
    let mut r = report(11, "smooth-boundary growth", run());
    r.warning_only = true;
    r
}

/// Every criterion by number. Criterion 7 builds a 1024-site state and
/// takes the longest.
pub const CRITERIA: [(u32, fn() -> CriterionReport); 11] = [
    (1, decomposition_exactness),
    (2, one_dimensional_coefficient),
    (3, belt_law),
    (4, three_dimensional_belt),
    (5, purity_and_complement),
    (6, strong_subadditivity),
    (7, rectangle_bound_check),
    (8, closed_surface),
    (9, area_law_controls),
    (10, regularization_spectrum),
    (11, smooth_boundary_growth),
];

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(_, f)| f()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_labels() {
        let mut r = CriterionReport {
            id: 1,
            title: "x",
            passed: true,
            warning_only: false,
            detail: String::new(),
        };
        assert_eq!(r.status(), "PASS");
        r.passed = false;
        assert_eq!(r.status(), "FAIL");
        r.warning_only = true;
        assert_eq!(r.status(), "WARN");
        assert!(r.to_string().starts_with("[WARN] criterion  1: x"));
    }

    #[test]
    fn errors_become_failures() {
        let r = report(3, "t", Err(crate::Error::Fit("boom".into())));
        assert!(!r.passed);
        assert!(r.detail.contains("boom"));
    }
}
