use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ee_core::acceptance::{self, CriterionReport};
use ee_core::analysis::{bounds_from_entropies, fit_log_scaling, gamma_from_points, smaller_side};
use ee_core::chains::{chain_entropy_profile, decompose_belt, write_profile_csv, ChainOptions};
use ee_core::kspace::{make_kgrid, min_grid_frequency};
use ee_core::partition::{belt, intersect, rectangle, union};
use ee_core::{EntropyResult, GroundState, LatticeGeometry, Method, Region, ScalingModel, ScalingPoint, SsaReport};

use crate::args::{Cli, Command, MethodArg, Params, SelftestArgs};
use crate::experiment::{validate, Diagnostics, ExperimentSpec, Kind};
use crate::output::{write_results_csv, Check, FitSummary, Gap, Row, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(Diagnostics),
    #[error("error: {context}: {source}")]
    Core { context: String, source: ee_core::Error },
    #[error("error: {context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("error: selftest: {0} criteria failed")]
    Selftest(usize),
}

impl CliError {
    /// 2 for bad input, 3 for numerical breakdown, 1 for a failed selftest.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_numerical() => 3,
            CliError::Selftest(_) => 1,
            _ => 2,
        }
    }
}

fn core_err(context: impl Into<String>) -> impl FnOnce(ee_core::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Core { context, source }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        context: path.display().to_string(),
        source,
    }
}

fn suffixed(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(ext);
    PathBuf::from(s)
}

/// Entropy evaluation with one ground state per lattice size and a cache
/// keyed by (N, sites, method).
struct Runner<'a> {
    spec: &'a ExperimentSpec,
    states: HashMap<usize, GroundState>,
    cache: HashMap<(usize, Vec<usize>, Method), (EntropyResult, f64)>,
}

impl<'a> Runner<'a> {
    fn new(spec: &'a ExperimentSpec) -> Self {
        Runner {
            spec,
            states: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    fn methods(&self) -> &'static [Method] {
        match self.spec.method {
            MethodArg::Dense => &[Method::Dense],
            MethodArg::Chains => &[Method::ChainDecomposition],
            MethodArg::Both => &[Method::Dense, Method::ChainDecomposition],
        }
    }

    fn entropy(&mut self, region: &Region, label: &str, method: Method) -> Result<Row, CliError> {
        let geom = region.geometry().clone();
        let n = geom.edge();
        let key = (n, region.sites().to_vec(), method);
        if !self.cache.contains_key(&key) {
            let context = format!("--disp {} N={n} region {label} ({method})", self.spec.dispersion);
            let start = Instant::now();
            let result = match method {
                Method::Dense => {
                    if !self.states.contains_key(&n) {
                        let state = GroundState::new(&self.spec.dispersion, &geom).map_err(core_err(&context))?;
                        self.states.insert(n, state);
                    }
                    self.states[&n].entropy(region).map_err(core_err(&context))?
                }
                Method::ChainDecomposition => {
                    decompose_belt(&self.spec.dispersion, &geom, region, ChainOptions::default())
                        .map_err(core_err(&context))?
                        .total
                }
            };
            self.cache.insert(key.clone(), (result, start.elapsed().as_secs_f64()));
        }
        let (result, seconds) = &self.cache[&key];
        Ok(Row {
            n,
            l: region.as_belt().map(|b| b.width),
            region: label.to_string(),
            method: method.to_string(),
            s: result.value,
            nu_min: result.nu_min,
            clamped: result.clamped_count,
            seconds: if self.spec.timing { *seconds } else { 0.0 },
        })
    }

    /// Rows for every requested method, plus a dense/chains agreement check.
    fn entropy_rows(
        &mut self,
        region: &Region,
        label: &str,
        rows: &mut Vec<Row>,
        checks: &mut Vec<Check>,
    ) -> Result<(), CliError> {
        let start = rows.len();
        for &m in self.methods() {
            rows.push(self.entropy(region, label, m)?);
        }
        if self.spec.method == MethodArg::Both {
            let diff = (rows[start].s - rows[start + 1].s).abs();
            checks.push(Check {
                name: format!("dense_vs_chains N={} {label}", rows[start].n),
                passed: diff <= 1e-8,
                enforced: true,
                value: diff,
                bound: 1e-8,
            });
        }
        Ok(())
    }

    fn summary(&self, checks: Vec<Check>, rows: Vec<Row>) -> Summary {
        Summary {
            command: self.spec.kind.name(),
            dispersion: self.spec.dispersion.to_string(),
            d: self.spec.dims,
            gaps: self
                .spec
                .runs
                .iter()
                .filter_map(|&(n, _)| {
                    let (k, omega) = min_grid_frequency(&self.spec.dispersion, &make_kgrid(&self.geometry(n))).ok()?;
                    Some(Gap {
                        n,
                        k,
                        omega_min: omega,
                        omega_min_squared: omega * omega,
                    })
                })
                .collect(),
            fit: None,
            checks,
            report: None,
            rows,
        }
    }

    fn geometry(&self, n: usize) -> LatticeGeometry {
        self.spec.geometry(n)
    }

    fn parse_region(&self, n: usize, literal: &str) -> Result<Region, CliError> {
        Region::parse(&self.geometry(n), literal).map_err(core_err(format!("--region {literal}")))
    }
}

fn belt_label(l: usize) -> String {
    format!("belt:x,0,{l}")
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable report")
}

fn run_entropy(r: &mut Runner) -> Result<Summary, CliError> {
    let (mut rows, mut checks) = (Vec::new(), Vec::new());
    let literal = r.spec.region.clone().expect("validated region");
    for (n, _) in r.spec.runs.clone() {
        let region = r.parse_region(n, &literal)?;
        r.entropy_rows(&region, &literal, &mut rows, &mut checks)?;
    }
    Ok(r.summary(checks, rows))
}

fn run_belt(r: &mut Runner) -> Result<Summary, CliError> {
    let (mut rows, mut checks) = (Vec::new(), Vec::new());
    let mut points = Vec::new();
    for (n, widths) in r.spec.runs.clone() {
        let geom = r.geometry(n);
        for l in widths {
            let region = belt(&geom, 0, 0, l).map_err(core_err(format!("--L {l}")))?;
            let start = rows.len();
            r.entropy_rows(&region, &belt_label(l), &mut rows, &mut checks)?;
            points.push(ScalingPoint { l, n, s: rows[start].s });
        }
    }
    let mut summary = r.summary(checks, rows);
    // Fewer than three points or a single width: no fit, rows only.
    summary.fit = fit_log_scaling(&points, ScalingModel::PerTransverseSite { dims: r.spec.dims })
        .ok()
        .map(|f| FitSummary {
            c: f.slope,
            b: f.intercept,
            residual: f.residual,
        });
    Ok(summary)
}

fn run_rect_bounds(r: &mut Runner) -> Result<Summary, CliError> {
    let n = r.spec.runs[0].0;
    let (lx, ly) = r.spec.rect.expect("validated rectangle");
    let geom = r.geometry(n);
    let err = |what: &str| core_err(format!("--lx {lx} --ly {ly} ({what})"));
    let a = belt(&geom, 0, 0, lx).map_err(err("A"))?;
    let b = belt(&geom, 1, 0, ly).map_err(err("B"))?;
    let rect = rectangle(&geom, [0, 0], lx, ly).map_err(err("rectangle"))?;
    let u = smaller_side(&union(&a, &b).map_err(err("union"))?);

    let mut rows = Vec::new();
    for (region, label) in [
        (&rect, format!("rect:0,0,{lx},{ly}")),
        (&a, belt_label(lx)),
        (&b, format!("belt:y,0,{ly}")),
        (&u, "A|B".to_string()),
    ] {
        rows.push(r.entropy(region, &label, Method::Dense)?);
    }
    let bounds = bounds_from_entropies(n, lx, ly, rows[0].s, rows[1].s, rows[2].s, rows[3].s);
    let checks = bounds
        .checks
        .iter()
        .map(|c| Check {
            name: c.name.clone(),
            passed: c.holds,
            enforced: c.enforced,
            value: c.value,
            bound: c.bound,
        })
        .collect();
    let mut summary = r.summary(checks, rows);
    summary.report = Some(to_json(&bounds));
    Ok(summary)
}

fn run_ssa(r: &mut Runner) -> Result<Summary, CliError> {
    let n = r.spec.runs[0].0;
    let (la, lb) = (
        r.spec.a.clone().expect("validated A"),
        r.spec.b.clone().expect("validated B"),
    );
    let a = Region::parse(&r.geometry(n), &la).map_err(core_err(format!("--A {la}")))?;
    let b = Region::parse(&r.geometry(n), &lb).map_err(core_err(format!("--B {lb}")))?;
    let u = smaller_side(&union(&a, &b).map_err(core_err("--A/--B union"))?);
    let i = intersect(&a, &b).map_err(core_err("--A/--B intersection"))?;

    let mut rows = Vec::new();
    for (region, label) in [
        (&a, la.clone()),
        (&b, lb.clone()),
        (&u, "A|B".into()),
        (&i, "A&B".into()),
    ] {
        rows.push(r.entropy(region, &label, Method::Dense)?);
    }
    let report = SsaReport {
        size_a: a.len(),
        size_b: b.len(),
        s_a: rows[0].s,
        s_b: rows[1].s,
        s_union: rows[2].s,
        s_intersection: rows[3].s,
        slack: rows[0].s + rows[1].s - rows[2].s - rows[3].s,
    };
    let checks = vec![Check {
        name: "ssa_slack".into(),
        passed: report.holds(),
        enforced: true,
        value: report.slack,
        bound: -ee_core::analysis::EXACT_INEQUALITY_TOLERANCE,
    }];
    let mut summary = r.summary(checks, rows);
    summary.report = Some(to_json(&report));
    Ok(summary)
}

fn run_gamma(r: &mut Runner) -> Result<Summary, CliError> {
    let (n, widths) = r.spec.runs[0].clone();
    let geom = r.geometry(n);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &l in &widths {
        let region = belt(&geom, 0, 0, l).map_err(core_err(format!("--L {l}")))?;
        let row = r.entropy(&region, &belt_label(l), Method::ChainDecomposition)?;
        points.push(ScalingPoint { l, n, s: row.s });
        rows.push(row);
    }
    let report = gamma_from_points(&r.spec.dispersion, &geom, &points)
        .map_err(core_err(format!("--disp {}", r.spec.dispersion)))?;
    let checks = vec![Check {
        name: "gamma_relative_error".into(),
        passed: report.relative_error <= 0.15,
        enforced: false,
        value: report.relative_error,
        bound: 0.15,
    }];
    let mut summary = r.summary(checks, rows);
    summary.fit = Some(FitSummary {
        c: report.fit.slope,
        b: report.fit.intercept,
        residual: report.fit.residual,
    });
    summary.report = Some(to_json(&report));
    Ok(summary)
}

/// Returns the summary and the per-chain table, which replaces the results CSV.
fn run_profile(r: &mut Runner) -> Result<(Summary, Vec<u8>), CliError> {
    let (n, widths) = r.spec.runs[0].clone();
    let geom = r.geometry(n);
    let (region, label) = match &r.spec.region {
        Some(lit) => (r.parse_region(n, lit)?, lit.clone()),
        None => (
            belt(&geom, 0, 0, widths[0]).map_err(core_err("--L"))?,
            belt_label(widths[0]),
        ),
    };
    let context = format!("--disp {} N={n} region {label}", r.spec.dispersion);
    let start = Instant::now();
    let d = decompose_belt(&r.spec.dispersion, &geom, &region, ChainOptions::default()).map_err(core_err(&context))?;
    let seconds = if r.spec.timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let profile = chain_entropy_profile(&d);
    let mut table = Vec::new();
    write_profile_csv(&profile, &mut table).expect("in-memory write");
    let rows = vec![Row {
        n,
        l: Some(d.belt.width),
        region: label,
        method: d.total.method.to_string(),
        s: d.total.value,
        nu_min: d.total.nu_min,
        clamped: d.total.clamped_count,
        seconds,
    }];
    let mut summary = r.summary(vec![], rows);
    summary.report = Some(to_json(&profile));
    Ok((summary, table))
}

fn emit(out: Option<&Path>, summary: &Summary, csv: Option<Vec<u8>>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(summary).expect("serializable summary") + "\n";
    match out {
        None => print!("{json}"),
        Some(prefix) => {
            let csv = match csv {
                Some(bytes) => bytes,
                None => {
                    let mut buf = Vec::new();
                    write_results_csv(&summary.rows, &mut buf).expect("in-memory write");
                    buf
                }
            };
            let csv_path = suffixed(prefix, ".csv");
            std::fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;
            let json_path = suffixed(prefix, ".json");
            std::fs::write(&json_path, json).map_err(io_err(&json_path))?;
        }
    }
    Ok(())
}

/// Thread count from the flag or config, then `EE_THREADS`; `None` means
/// one per core.
fn thread_count(requested: Option<usize>) -> Result<Option<usize>, CliError> {
    if requested.is_some() {
        return Ok(requested);
    }
    match std::env::var("EE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Validation(Diagnostics(vec![format!(
                "EE_THREADS={v}: expected a positive integer"
            )]))),
        },
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads)?.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(Diagnostics(vec![format!("--threads: {e}")])))?;
    Ok(pool.install(f))
}

/// Validates and runs one experiment, writing its outputs.
pub fn execute(kind: Kind, params: Params) -> Result<Summary, CliError> {
    let params = params
        .resolve()
        .map_err(|e| CliError::Validation(Diagnostics(vec![e])))?;
    let spec = validate(kind, &params).map_err(CliError::Validation)?;
    let (summary, csv) = in_pool(spec.threads, || {
        let mut r = Runner::new(&spec);
        match kind {
            Kind::Entropy => run_entropy(&mut r).map(|s| (s, None)),
            Kind::Belt => run_belt(&mut r).map(|s| (s, None)),
            Kind::RectBounds => run_rect_bounds(&mut r).map(|s| (s, None)),
            Kind::Ssa => run_ssa(&mut r).map(|s| (s, None)),
            Kind::Gamma => run_gamma(&mut r).map(|s| (s, None)),
            Kind::Profile => run_profile(&mut r).map(|(s, t)| (s, Some(t))),
        }
    })??;
    emit(spec.out.as_deref(), &summary, csv)?;
    Ok(summary)
}

pub fn selftest(args: SelftestArgs) -> Result<Vec<CriterionReport>, CliError> {
    let wanted = |id: u32| args.only.as_ref().map_or(true, |o| o.contains(&id));
    let reports = in_pool(args.threads, || {
        acceptance::CRITERIA
            .iter()
            .filter(|(id, _)| wanted(*id))
            .map(|(_, f)| {
                let r = f();
                println!("{r}");
                r
            })
            .collect::<Vec<_>>()
    })?;
    if let Some(prefix) = &args.out {
        let path = suffixed(prefix, ".json");
        let json = serde_json::to_string_pretty(&reports).expect("serializable reports") + "\n";
        std::fs::write(&path, json).map_err(io_err(&path))?;
    }
    match reports.iter().filter(|r| !r.passed && !r.warning_only).count() {
        0 => Ok(reports),
        failed => Err(CliError::Selftest(failed)),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Entropy(p) => execute(Kind::Entropy, p).map(drop),
        Command::Belt(p) => execute(Kind::Belt, p).map(drop),
        Command::RectBounds(p) => execute(Kind::RectBounds, p).map(drop),
        Command::Ssa(p) => execute(Kind::Ssa, p).map(drop),
        Command::Gamma(p) => execute(Kind::Gamma, p).map(drop),
        Command::Profile(p) => execute(Kind::Profile, p).map(drop),
        Command::Selftest(a) => selftest(a).map(drop),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
