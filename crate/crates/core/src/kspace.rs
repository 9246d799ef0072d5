//! Antiperiodic momentum grids and the dispersion relations defined on them.
//!
//! Every lattice carries antiperiodic boundary conditions, so the allowed
//! momenta along an axis of extent `N` are `k = (2n + 1) pi / N`. No grid point
//! has a vanishing component, which keeps Bose-surface dispersions strictly
//! positive on the grid without adding a mass term.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIMS: usize = 3;

/// Lattice coordinates; entries beyond `dims` are zero.
pub type Coord = [usize; MAX_DIMS];

/// Cartesian lattice with lattice constant 1.
///
/// Square lattices (`N` sites along every axis) are the usual case; distinct
/// per-axis extents are allowed so belts can be compared at different
/// transverse sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeGeometry {
    extents: Vec<usize>,
}

impl LatticeGeometry {
    /// `N^d` lattice.
    pub fn new(dims: usize, edge: usize) -> Result<Self> {
        if !(1..=MAX_DIMS).contains(&dims) {
            return Err(Error::InvalidGeometry(format!(
                "dimension d = {dims} not in 1..={MAX_DIMS}"
            )));
        }
        Self::with_extents(vec![edge; dims])
    }

    pub fn with_extents(extents: Vec<usize>) -> Result<Self> {
        if extents.is_empty() || extents.len() > MAX_DIMS {
            return Err(Error::InvalidGeometry(format!(
                "dimension d = {} not in 1..={MAX_DIMS}",
                extents.len()
            )));
        }
        if let Some(&n) = extents.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGeometry(format!("edge N = {n} must be >= 2")));
        }
        Ok(Self { extents })
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extents[axis]
    }

    /// Edge length along the first axis (the edge of a square lattice).
    pub fn edge(&self) -> usize {
        self.extents[0]
    }

    pub fn is_square(&self) -> bool {
        self.extents.iter().all(|&n| n == self.extents[0])
    }

    pub fn sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Lexicographic site index; the last axis runs fastest.
    pub fn index(&self, coord: &Coord) -> usize {
        self.extents
            .iter()
            .enumerate()
            .fold(0, |acc, (axis, &n)| acc * n + coord[axis])
    }

    pub fn coord(&self, mut index: usize) -> Coord {
        let mut c = [0; MAX_DIMS];
        for axis in (0..self.dims()).rev() {
            let n = self.extents[axis];
            c[axis] = index % n;
            index /= n;
        }
        c
    }

    /// The geometry with one axis removed, or `None` for a 1D lattice.
    pub fn without_axis(&self, axis: usize) -> Option<LatticeGeometry> {
        if self.dims() == 1 {
            return None;
        }
        let mut extents = self.extents.clone();
        extents.remove(axis);
        Some(LatticeGeometry { extents })
    }
}

impl fmt::Display for LatticeGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.extents.iter().map(|n| n.to_string()).collect();
        write!(f, "d={} N={}", self.dims(), parts.join("x"))
    }
}

/// Antiperiodic momentum `(2n + 1) pi / N`.
pub fn momentum(n: usize, edge: usize) -> f64 {
    (2 * n + 1) as f64 * PI / edge as f64
}

/// All antiperiodic momenta of a lattice, in lexicographic order of the
/// integer labels `(n_1, ..., n_d)`.
#[derive(Debug, Clone)]
pub struct KGrid {
    geometry: LatticeGeometry,
    points: Vec<Vec<f64>>,
}

impl KGrid {
    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The 1D momenta along one axis.
    pub fn axis_momenta(&self, axis: usize) -> Vec<f64> {
        let n = self.geometry.extent(axis);
        (0..n).map(|i| momentum(i, n)).collect()
    }
}

pub fn make_kgrid(geom: &LatticeGeometry) -> KGrid {
    let points = (0..geom.sites())
        .map(|i| {
            let c = geom.coord(i);
            (0..geom.dims())
                .map(|axis| momentum(c[axis], geom.extent(axis)))
                .collect()
        })
        .collect();
    KGrid {
        geometry: geom.clone(),
        points,
    }
}

/// One factor `f_i(k_i)` of a factorized dispersion.
#[derive(Debug, Clone, Copy)]
pub enum AxisFactor {
    /// `scale * 2 sin(k / 2)`.
    Sine {
        scale: f64,
    },
    Function(fn(f64) -> f64),
}

impl AxisFactor {
    pub const DEFAULT: AxisFactor = AxisFactor::Sine { scale: 1.0 };

    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            AxisFactor::Sine { scale } => scale * 2.0 * (0.5 * k).sin(),
            AxisFactor::Function(f) => f(k),
        }
    }

    fn is_default(&self) -> bool {
        matches!(self, AxisFactor::Sine { scale } if *scale == 1.0)
    }
}

/// Frequencies tabulated on an antiperiodic grid.
#[derive(Debug, Clone)]
pub struct CustomTable {
    extents: Vec<usize>,
    values: Vec<f64>,
    source: Option<String>,
}

impl CustomTable {
    /// Validates that every value is finite and positive and that the table is
    /// symmetric under `k_i -> 2 pi - k_i` on each axis separately, which real
    /// couplings and the chain decomposition both require.
    pub fn new(extents: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let geom = LatticeGeometry::with_extents(extents.clone())?;
        if values.len() != geom.sites() {
            return Err(Error::InvalidDispersion(format!(
                "custom table has {} values, grid {} needs {}",
                values.len(),
                geom,
                geom.sites()
            )));
        }
        if let Some((i, &w)) = values.iter().enumerate().find(|(_, w)| !w.is_finite() || **w <= 0.0) {
            let k = grid_point(&geom, i);
            return Err(Error::Regularization { k, omega: w });
        }
        for i in 0..values.len() {
            let c = geom.coord(i);
            for axis in 0..geom.dims() {
                let mut m = c;
                m[axis] = geom.extent(axis) - 1 - c[axis];
                let w = values[geom.index(&m)];
                if (w - values[i]).abs() > 1e-12 * values[i].abs().max(1.0) {
                    return Err(Error::InvalidDispersion(format!(
                        "custom table not reflection symmetric along axis {axis} at k = {:?}",
                        grid_point(&geom, i)
                    )));
                }
            }
        }
        Ok(Self {
            extents,
            values,
            source: None,
        })
    }

    /// Reads a table file: `#` comment lines, then the extents on the first
    /// data line, then `prod(extents)` frequencies in lexicographic grid order.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: empty custom table", path.display())))?;
        let extents = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad extent {t:?} in custom table")))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {t:?} in custom table")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self::new(extents, values)?;
        table.source = Some(path.display().to_string());
        Ok(table)
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn grid_point(geom: &LatticeGeometry, index: usize) -> Vec<f64> {
    let c = geom.coord(index);
    (0..geom.dims())
        .map(|axis| momentum(c[axis], geom.extent(axis)))
        .collect()
}

/// Bosonic dispersion `omega(k) >= 0`.
#[derive(Debug, Clone)]
pub enum Dispersion {
    /// `omega = |prod_i f_i(k_i)|`; axes without an explicit factor use `2 sin(k/2)`.
    Factorized {
        factors: Vec<AxisFactor>,
    },
    /// `omega = alpha |sum_i sin^2(k_i/2) - beta|`.
    ClosedSurface {
        alpha: f64,
        beta: f64,
    },
    /// `omega^2 = sum_i 4 sin^2(k_i/2)`, gapless at `k = 0` only.
    PointGapless,
    /// `omega^2 = prod_i 4 sin^2(k_i/2) + m^2`.
    Gapped {
        mass: f64,
    },
    Custom(CustomTable),
}

impl Dispersion {
    /// Exciton-Bose-liquid type dispersion with default factors on every axis.
    pub fn ebl() -> Self {
        Dispersion::Factorized { factors: Vec::new() }
    }

    pub fn closed_surface(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidDispersion(format!(
                "closed surface needs alpha > 0 and finite beta, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Dispersion::ClosedSurface { alpha, beta })
    }

    pub fn gapped(mass: f64) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::InvalidDispersion(format!(
                "gapped dispersion needs m > 0, got m={mass}"
            )));
        }
        Ok(Dispersion::Gapped { mass })
    }

    /// Constant frequency `c` on every point of `geom`'s grid.
    pub fn constant(geom: &LatticeGeometry, c: f64) -> Result<Self> {
        CustomTable::new(geom.extents().to_vec(), vec![c; geom.sites()]).map(Dispersion::Custom)
    }

    /// Parses `ebl`, `closed:alpha=<f>,beta=<f>`, `point`, `gapped:m=<f>` or
    /// `custom:<path>`; the custom form reads the table from disk.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, args) {
            ("ebl", None) => Ok(Self::ebl()),
            ("point", None) => Ok(Dispersion::PointGapless),
            ("closed", Some(a)) => {
                let kv = parse_kv(a, &["alpha", "beta"])?;
                Self::closed_surface(kv[0], kv[1])
            }
            ("gapped", Some(a)) => {
                let kv = parse_kv(a, &["m"])?;
                Self::gapped(kv[0])
            }
            ("custom", Some(path)) => CustomTable::load(Path::new(path)).map(Dispersion::Custom),
            _ => Err(Error::Parse(format!(
                "unknown dispersion {s:?}; expected ebl, closed:alpha=..,beta=.., point, gapped:m=.. or custom:<path>"
            ))),
        }
    }

    pub fn is_factorized(&self) -> bool {
        matches!(self, Dispersion::Factorized { .. })
    }

    /// The factor along `axis` of a factorized dispersion.
    pub fn axis_factor(&self, axis: usize) -> Option<AxisFactor> {
        match self {
            Dispersion::Factorized { factors } => Some(factors.get(axis).copied().unwrap_or(AxisFactor::DEFAULT)),
            _ => None,
        }
    }

    /// `omega(k)`. Tabulated dispersions only accept grid momenta.
    pub fn eval(&self, k: &[f64]) -> Result<f64> {
        if k.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidDispersion(format!("NaN momentum {k:?}")));
        }
        let half_sin2 = |x: f64| {
            let s = (0.5 * x).sin();
            s * s
        };
        let w = match self {
            Dispersion::Factorized { factors } => k
                .iter()
                .enumerate()
                .map(|(axis, &x)| factors.get(axis).unwrap_or(&AxisFactor::DEFAULT).eval(x))
                .product::<f64>()
                .abs(),
            Dispersion::ClosedSurface { alpha, beta } => {
                alpha * (k.iter().map(|&x| half_sin2(x)).sum::<f64>() - beta).abs()
            }
            Dispersion::PointGapless => k.iter().map(|&x| 4.0 * half_sin2(x)).sum::<f64>().sqrt(),
            Dispersion::Gapped { mass } => {
                let f2: f64 = k.iter().map(|&x| 4.0 * half_sin2(x)).product();
                (f2 + mass * mass).sqrt()
            }
            Dispersion::Custom(table) => {
                let geom = LatticeGeometry::with_extents(table.extents.clone())?;
                if k.len() != geom.dims() {
                    return Err(Error::InvalidDispersion(format!(
                        "momentum {k:?} has wrong dimension for custom table on {geom}"
                    )));
                }
                let mut c = [0; MAX_DIMS];
                for (axis, &x) in k.iter().enumerate() {
                    let n = geom.extent(axis);
                    let label = (x * n as f64 / PI - 1.0) / 2.0;
                    let rounded = label.round();
                    if (label - rounded).abs() > 1e-9 || rounded < 0.0 || rounded >= n as f64 {
                        return Err(Error::InvalidDispersion(format!(
                            "momentum {k:?} is not on the antiperiodic grid of the custom table"
                        )));
                    }
                    c[axis] = rounded as usize;
                }
                table.values[geom.index(&c)]
            }
        };
        Ok(w)
    }

    /// `omega` on every grid point of `geom`, lexicographic order. Fails if any
    /// mode is not strictly positive.
    pub fn grid_values(&self, geom: &LatticeGeometry) -> Result<Vec<f64>> {
        if let Dispersion::Custom(table) = self {
            if table.extents != geom.extents() {
                return Err(Error::GeometryMismatch(format!(
                    "custom table has extents {:?}, lattice is {geom}",
                    table.extents
                )));
            }
            return Ok(table.values.clone());
        }
        let mut out = Vec::with_capacity(geom.sites());
        for i in 0..geom.sites() {
            let k = grid_point(geom, i);
            let w = self.eval(&k)?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Regularization { k, omega: w });
            }
            out.push(w);
        }
        Ok(out)
    }
}

fn parse_kv(args: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut out = vec![None; keys.len()];
    for part in args.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
        let slot = keys
            .iter()
            .position(|k| *k == key.trim())
            .ok_or_else(|| Error::Parse(format!("unknown parameter {key:?}")))?;
        let v = value
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {value:?} for {key}")))?;
        out[slot] = Some(v);
    }
    keys.iter()
        .zip(out)
        .map(|(k, v)| v.ok_or_else(|| Error::Parse(format!("missing parameter {k}"))))
        .collect()
}

impl fmt::Display for Dispersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dispersion::Factorized { factors } if factors.iter().all(AxisFactor::is_default) => {
                write!(f, "ebl")
            }
            Dispersion::Factorized { factors } => write!(f, "factorized{factors:?}"),
            Dispersion::ClosedSurface { alpha, beta } => {
                write!(f, "closed:alpha={alpha},beta={beta}")
            }
            Dispersion::PointGapless => write!(f, "point"),
            Dispersion::Gapped { mass } => write!(f, "gapped:m={mass}"),
            Dispersion::Custom(t) => match &t.source {
                Some(p) => write!(f, "custom:{p}"),
                None => write!(f, "custom:<table {:?}>", t.extents),
            },
        }
    }
}

pub fn eval_dispersion(disp: &Dispersion, k: &[f64]) -> Result<f64> {
    disp.eval(k)
}

/// Exhaustive scan for the softest grid mode; ties resolve to the first point
/// in grid order.
pub fn min_grid_frequency(disp: &Dispersion, grid: &KGrid) -> Result<(Vec<f64>, f64)> {
    let values = disp.grid_values(grid.geometry())?;
    let (best, &w) = values
        .iter()
        .enumerate()
        .fold(None::<(usize, &f64)>, |acc, (i, w)| match acc {
            Some((_, b)) if b <= w => acc,
            _ => Some((i, w)),
        })
        .ok_or_else(|| Error::InvalidGeometry("empty grid".into()))?;
    Ok((grid.points()[best].clone(), w))
}

/// Number of grid lines running along `axis` whose continuum 1D dispersion
/// reaches zero, i.e. transverse momenta with `0 <= beta - sum sin^2(k_perp/2) <= 1`.
pub fn critical_chain_count(disp: &Dispersion, grid: &KGrid, axis: usize) -> Result<usize> {
    let Dispersion::ClosedSurface { beta, .. } = *disp else {
        return Err(Error::InvalidDispersion(format!(
            "critical chain count needs a closed-surface dispersion, got {disp}"
        )));
    };
    let geom = grid.geometry();
    if axis >= geom.dims() {
        return Err(Error::InvalidGeometry(format!("axis {axis} out of range for {geom}")));
    }
    if !(beta > 0.0 && beta < geom.dims() as f64) {
        return Err(Error::InvalidDispersion(format!(
            "beta = {beta} outside (0, {}): no Bose surface",
            geom.dims()
        )));
    }
    let Some(transverse) = geom.without_axis(axis) else {
        return Ok(usize::from((0.0..=1.0).contains(&beta)));
    };
    let count = make_kgrid(&transverse)
        .points()
        .iter()
        .filter(|kp| {
            let s: f64 = kp.iter().map(|&x| (0.5 * x).sin().powi(2)).sum();
            (0.0..=1.0).contains(&(beta - s))
        })
        .count();
    Ok(count)
}
