use std::io::Write;

use serde::Serialize;

pub const RESULTS_HEADER: &str = "# ee results v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub region: String,
    pub method: String,
    #[serde(rename = "S")]
    pub s: f64,
    pub nu_min: Option<f64>,
    pub clamped: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub c: f64,
    pub b: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// A failed check that is not enforced is informational.
    pub enforced: bool,
    pub value: f64,
    pub bound: f64,
}

/// Smallest grid frequency and its square (the lowest eigenvalue of V).
#[derive(Debug, Clone, Serialize)]
pub struct Gap {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: Vec<f64>,
    pub omega_min: f64,
    pub omega_min_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub dispersion: String,
    pub d: usize,
    pub gaps: Vec<Gap>,
    pub fit: Option<FitSummary>,
    pub checks: Vec<Check>,
    pub report: Option<serde_json::Value>,
    pub rows: Vec<Row>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `# ee results v1`, then `N,L,region,method,S,nu_min,clamped,seconds`.
pub fn write_results_csv<W: Write>(rows: &[Row], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "L", "region", "method", "S", "nu_min", "clamped", "seconds"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            opt(r.l),
            r.region.clone(),
            r.method.clone(),
            r.s.to_string(),
            opt(r.nu_min),
            r.clamped.to_string(),
            r.seconds.to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![Row {
            n: 12,
            l: None,
            region: "rect:0,0,6,6".into(),
            method: "dense".into(),
            s: 0.5,
            nu_min: Some(0.5),
            clamped: 2,
            seconds: 0.0,
        }];
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# ee results v1\nN,L,region,method,S,nu_min,clamped,seconds\n12,,\"rect:0,0,6,6\",dense,0.5,0.5,2,0\n"
        );
    }
}
