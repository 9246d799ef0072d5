use std::fmt;
use std::path::PathBuf;

use ee_core::hamiltonian::DENSE_SITE_CAP;
use ee_core::{Dispersion, LatticeGeometry, Region};

use crate::args::{MethodArg, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Entropy,
    Belt,
    RectBounds,
    Ssa,
    Gamma,
    Profile,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Entropy => "entropy",
            Kind::Belt => "belt",
            Kind::RectBounds => "rect-bounds",
            Kind::Ssa => "ssa",
            Kind::Gamma => "gamma",
            Kind::Profile => "profile",
        }
    }
}

/// A validated experiment: every literal parsed, every size checked.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub dispersion: Dispersion,
    pub dims: usize,
    /// One `(N, widths)` entry per lattice size. Widths are empty for
    /// experiments that take explicit regions.
    pub runs: Vec<(usize, Vec<usize>)>,
    pub region: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub rect: Option<(usize, usize)>,
    pub method: MethodArg,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn geometry(&self, n: usize) -> LatticeGeometry {
        LatticeGeometry::new(self.dims, n).expect("validated geometry")
    }
}

/// Every defect found in one pass, one line each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics(pub Vec<String>);

impl Diagnostics {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, line) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "error: {line}")?;
        }
        Ok(())
    }
}

fn check_widths(diag: &mut Diagnostics, flag: &str, n: usize, widths: &[usize]) {
    for &l in widths {
        if l == 0 || l >= n {
            diag.push(format!("{flag}: L = {l} must satisfy 1 <= L <= N - 1 = {}", n - 1));
        }
    }
}

fn check_dense(diag: &mut Diagnostics, method: MethodArg, dims: usize, n: usize) {
    if method == MethodArg::Chains {
        return;
    }
    let sites = n.checked_pow(dims as u32).unwrap_or(usize::MAX);
    if sites > DENSE_SITE_CAP {
        diag.push(format!(
            "--method {}: N^d = {n}^{dims} = {sites} sites exceeds the dense cap of {DENSE_SITE_CAP}; \
             use --method chains for belts",
            if method == MethodArg::Dense { "dense" } else { "both" }
        ));
    }
}

fn check_region(diag: &mut Diagnostics, flag: &str, geom: &LatticeGeometry, literal: &str, method: MethodArg) {
    match Region::parse(geom, literal) {
        Err(e) => diag.push(format!("{flag} {literal}: {e}")),
        Ok(r) if method != MethodArg::Dense && r.as_belt().is_none() => {
            diag.push(format!("{flag} {literal}: --method chains needs a belt region"))
        }
        Ok(_) => {}
    }
}

pub fn validate(kind: Kind, p: &Params) -> Result<ExperimentSpec, Diagnostics> {
    let mut diag = Diagnostics::default();

    let disp_literal = p.disp.as_deref().unwrap_or("ebl");
    let dispersion = match Dispersion::parse(disp_literal) {
        Ok(d) => Some(d),
        Err(e) => {
            diag.push(format!("--disp {disp_literal}: {e}"));
            None
        }
    };

    let dims = p.d.unwrap_or(2);
    if !(1..=3).contains(&dims) {
        diag.push(format!("--d {dims}: dimension must be 1, 2 or 3"));
    }
    if kind == Kind::RectBounds && dims != 2 {
        diag.push(format!("--d {dims}: rect-bounds needs d = 2"));
    }
    if p.threads == Some(0) {
        diag.push("--threads 0: need at least one thread");
    }
    if let Some(r) = p.ratio {
        if !(r > 0.0 && r < 1.0) {
            diag.push(format!("--ratio {r}: must lie strictly between 0 and 1"));
        }
    }

    let default_method = match kind {
        Kind::Belt | Kind::Gamma | Kind::Profile => MethodArg::Chains,
        _ => MethodArg::Dense,
    };
    let method = p.method.unwrap_or(default_method);
    match (kind, method) {
        (Kind::RectBounds | Kind::Ssa, m) if m != MethodArg::Dense => {
            diag.push(format!("--method: {} supports only dense", kind.name()))
        }
        (Kind::Gamma | Kind::Profile, m) if m != MethodArg::Chains => {
            diag.push(format!("--method: {} supports only chains", kind.name()))
        }
        _ => {}
    }

    let edges: Vec<usize> = match (kind, &p.sweep_n, p.n) {
        (Kind::Belt, Some(s), _) if !s.is_empty() => s.clone(),
        (_, _, Some(n)) => vec![n],
        _ => {
            diag.push(if kind == Kind::Belt {
                "--N or --sweep-N: no lattice size given"
            } else {
                "--N: no lattice size given"
            });
            vec![]
        }
    };
    let mut geoms = Vec::new();
    for &n in &edges {
        if n < 2 {
            diag.push(format!("--N {n}: need N >= 2"));
        } else if (1..=3).contains(&dims) {
            geoms.push(LatticeGeometry::new(dims, n).expect("checked sizes"));
            check_dense(&mut diag, method, dims, n);
        }
    }

    let mut runs = Vec::new();
    let mut rect = None;
    for geom in &geoms {
        let n = geom.edge();
        let widths = match kind {
            Kind::Belt => match (&p.l, p.ratio) {
                (Some(ls), _) => ls.clone(),
                (None, r) => vec![(r.unwrap_or(0.5) * n as f64).round() as usize],
            },
            Kind::Gamma => p.l.clone().unwrap_or_else(|| vec![n / 8, n / 4, n / 2]),
            Kind::Profile if p.region.is_none() => p.l.clone().unwrap_or_else(|| vec![n / 2]),
            _ => vec![],
        };
        let flag = if p.l.is_some() { "--L" } else { "--ratio" };
        check_widths(&mut diag, flag, n, &widths);
        if kind == Kind::Profile && widths.len() > 1 {
            diag.push("--L: profile takes a single width");
        }

        match kind {
            Kind::Entropy => match &p.region {
                Some(lit) => check_region(&mut diag, "--region", geom, lit, method),
                None => diag.push("--region: entropy needs a region"),
            },
            Kind::Profile => {
                if let Some(lit) = &p.region {
                    check_region(&mut diag, "--region", geom, lit, MethodArg::Chains);
                }
            }
            Kind::Ssa => {
                for (flag, lit) in [("--A", &p.a), ("--B", &p.b)] {
                    match lit {
                        Some(lit) => check_region(&mut diag, flag, geom, lit, MethodArg::Dense),
                        None => diag.push(format!("{flag}: ssa needs two regions")),
                    }
                }
            }
            Kind::RectBounds => {
                let (lx, ly) = (p.lx.unwrap_or(n / 2), p.ly.unwrap_or(n / 2));
                check_widths(&mut diag, "--lx", n, &[lx]);
                check_widths(&mut diag, "--ly", n, &[ly]);
                rect = Some((lx, ly));
            }
            _ => {}
        }
        runs.push((n, widths));
    }

    if kind == Kind::Gamma {
        match &dispersion {
            Some(Dispersion::ClosedSurface { beta, .. }) if !(*beta > 0.0 && *beta < dims as f64) => diag.push(
                format!("--disp {disp_literal}: beta = {beta} outside (0, {dims}), there is no Bose surface"),
            ),
            Some(Dispersion::ClosedSurface { .. }) | None => {}
            Some(_) => diag.push(format!(
                "--disp {disp_literal}: gamma needs a closed:alpha=..,beta=.. dispersion"
            )),
        }
        if runs.iter().any(|(_, w)| w.len() < 3) {
            diag.push("--L: gamma fits need at least three widths");
        }
    }

    if !diag.is_empty() {
        return Err(diag);
    }
    Ok(ExperimentSpec {
        kind,
        dispersion: dispersion.expect("no diagnostics"),
        dims,
        runs,
        region: p.region.clone(),
        a: p.a.clone(),
        b: p.b.clone(),
        rect,
        method,
        out: p.out.clone(),
        threads: p.threads,
        timing: !p.no_timing,
    })
}
