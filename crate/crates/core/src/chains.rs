//! Belt entropies from decoupled 1D chains.
//!
//! A belt is invariant under translations along every axis except the one it
//! is perpendicular to. Fourier transforming along those transverse axes never
//! mixes sites inside the belt with sites outside it, and splits the lattice
//! into independent chains, one per transverse momentum `k_perp`, each with
//! dispersion `omega_1d(k) = omega(k, k_perp)`. The belt entropy is the sum of
//! the contiguous-block entropies of those chains.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{EntropyResult, GroundState, Method};
use crate::kspace::{make_kgrid, momentum, CustomTable, Dispersion, LatticeGeometry};
use crate::partition::{belt, BeltShape, Region};

#[derive(Debug, Clone, Copy, Default)]
pub struct ChainOptions {
    /// Solve every chain even when a factorized dispersion makes them identical.
    pub force_full: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainEntry {
    pub index: usize,
    pub k_perp: Vec<f64>,
    /// `omega_1d` on the chain's antiperiodic grid.
    #[serde(skip)]
    pub omega: Vec<f64>,
    pub entropy: EntropyResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDecomposition {
    pub belt: BeltShape,
    pub per_chain: Vec<ChainEntry>,
    pub total: EntropyResult,
}

impl ChainDecomposition {
    pub fn transverse_modes(&self) -> impl Iterator<Item = &[f64]> {
        self.per_chain.iter().map(|c| c.k_perp.as_slice())
    }
}

/// Entropy of the first `width` sites of a 1D antiperiodic chain with
/// frequencies `omega` (grid order).
pub fn chain_block_entropy(omega: &[f64], width: usize) -> Result<EntropyResult> {
    let table = CustomTable::new(vec![omega.len()], omega.to_vec())?;
    let line = LatticeGeometry::with_extents(vec![omega.len()])?;
    let state = GroundState::new(&Dispersion::Custom(table), &line)?;
    state.entropy(&belt(&line, 0, 0, width)?)
}

fn transverse_grid(geom: &LatticeGeometry, axis: usize) -> Vec<Vec<f64>> {
    match geom.without_axis(axis) {
        Some(t) => make_kgrid(&t).points().to_vec(),
        None => vec![Vec::new()],
    }
}

fn full_momentum(k_axis: f64, axis: usize, k_perp: &[f64]) -> Vec<f64> {
    let mut k = k_perp.to_vec();
    k.insert(axis, k_axis);
    k
}

fn chain_frequencies(disp: &Dispersion, geom: &LatticeGeometry, axis: usize, k_perp: &[f64]) -> Result<Vec<f64>> {
    let n = geom.extent(axis);
    (0..n)
        .map(|i| {
            let k = full_momentum(momentum(i, n), axis, k_perp);
            let w = disp.eval(&k)?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Regularization { k, omega: w });
            }
            Ok(w)
        })
        .collect()
}

pub fn decompose_belt(
    disp: &Dispersion,
    geom: &LatticeGeometry,
    region: &Region,
    opts: ChainOptions,
) -> Result<ChainDecomposition> {
    if region.geometry() != geom {
        return Err(Error::GeometryMismatch(format!(
            "belt on {} for lattice {geom}",
            region.geometry()
        )));
    }
    let shape = region.as_belt().ok_or_else(|| {
        Error::NotABelt(format!(
            "{} sites are not a full-width slab perpendicular to a Cartesian axis",
            region.len()
        ))
    })?;
    let axis = shape.axis;
    let modes = transverse_grid(geom, axis);

    let per_chain: Vec<ChainEntry> = if disp.is_factorized() && !opts.force_full {
        // Chains differ only by the positive scale |prod f_perp(k_perp)|, which
        // leaves every symplectic eigenvalue unchanged. The scale still has to be
        // nonzero on every transverse mode.
        let probe_k = momentum(0, geom.extent(axis));
        for k_perp in modes.iter().skip(1) {
            let k = full_momentum(probe_k, axis, k_perp);
            let w = disp.eval(&k)?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Regularization { k, omega: w });
            }
        }
        let omega = chain_frequencies(disp, geom, axis, &modes[0])?;
        let entropy = chain_block_entropy(&omega, shape.width)?;
        modes
            .iter()
            .enumerate()
            .map(|(index, k_perp)| ChainEntry {
                index,
                k_perp: k_perp.clone(),
                omega: Vec::new(),
                entropy: EntropyResult {
                    method: Method::ChainDecomposition,
                    ..entropy.clone()
                },
            })
            .collect()
    } else {
        modes
            .par_iter()
            .enumerate()
            .map(|(index, k_perp)| {
                let omega = chain_frequencies(disp, geom, axis, k_perp)?;
                let mut entropy = chain_block_entropy(&omega, shape.width)?;
                entropy.method = Method::ChainDecomposition;
                Ok(ChainEntry {
                    index,
                    k_perp: k_perp.clone(),
                    omega,
                    entropy,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    let value = per_chain.iter().map(|c| c.entropy.value).sum();
    let nu_min = per_chain.iter().filter_map(|c| c.entropy.nu_min).reduce(f64::min);
    let clamped_count = per_chain.iter().map(|c| c.entropy.clamped_count).sum();
    Ok(ChainDecomposition {
        belt: BeltShape { offset: 0, ..shape },
        per_chain,
        total: EntropyResult {
            value,
            region_size: region.len(),
            method: Method::ChainDecomposition,
            nu_min,
            clamped_count,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub index: usize,
    pub k_perp: Vec<f64>,
    pub entropy: f64,
}

pub fn chain_entropy_profile(decomp: &ChainDecomposition) -> Vec<ProfileRow> {
    decomp
        .per_chain
        .iter()
        .map(|c| ProfileRow {
            index: c.index,
            k_perp: c.k_perp.clone(),
            entropy: c.entropy.value,
        })
        .collect()
}

/// CSV with a versioned comment line; multi-component `k_perp` values are
/// joined with `;`.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# ee chain-profile v1")?;
    writeln!(out, "k_perp_index,k_perp_value,S_chain")?;
    for r in rows {
        let k: Vec<String> = r.k_perp.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{},{}", r.index, k.join(";"), r.entropy)?;
    }
    Ok(())
}
