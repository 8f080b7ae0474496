//! Per-point merit records and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use qrl_core::unitary::EdgeId;

use crate::error::Result;

pub const HEADER: [&str; 15] = [
    "edge",
    "t",
    "alpha_x",
    "alpha_y",
    "alpha_z",
    "alpha_norm",
    "metric",
    "value",
    "status",
    "probe_phi1",
    "probe_phi2",
    "sigma_p1",
    "sigma_p2",
    "sigma_p3",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Probe-optimized conditional Renyi-2 entropy.
    H2,
    /// Probe-maximized prior-averaged QFI trace.
    Qfi,
    /// Clamped one-shot capacity lower bound.
    Bound,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::H2 => "h2",
            Metric::Qfi => "qfi",
            Metric::Bound => "bound",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h2" => Ok(Metric::H2),
            "qfi" => Ok(Metric::Qfi),
            "bound" => Ok(Metric::Bound),
            other => Err(format!("unknown metric '{other}', expected h2, qfi or bound")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The raw bound was negative and reported as zero.
    Clamped,
    /// The averaged QFI grows without bound as the cutoff shrinks.
    Divergent,
    /// An optimizer hit its iteration cap or the point failed outright.
    NonConverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Clamped => "clamped",
            Status::Divergent => "divergent",
            Status::NonConverged => "non-converged",
        }
    }
}

/// One `(edge, t, metric)` evaluation. Vertex reports put the vertex name in
/// `edge` and leave `t` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritRow {
    pub edge: String,
    pub t: Option<f64>,
    pub alpha: [f64; 3],
    pub alpha_norm: f64,
    pub metric: Metric,
    pub value: Option<f64>,
    pub status: Status,
    pub probe: Option<[f64; 2]>,
    pub sigma: Option<[f64; 3]>,
    pub wall_time_ms: f64,
}

// Shortest round-trip form, so equal values always print equal bytes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl MeritRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.edge.clone(),
            opt(self.t),
            num(self.alpha[0]),
            num(self.alpha[1]),
            num(self.alpha[2]),
            num(self.alpha_norm),
            self.metric.name().to_string(),
            opt(self.value),
            self.status.as_str().to_string(),
        ];
        r.extend((0..2).map(|i| opt(self.probe.map(|p| p[i]))));
        r.extend((0..3).map(|i| opt(self.sigma.map(|s| s[i]))));
        r.push(format!("{:.3}", self.wall_time_ms));
        r
    }
}

fn edge_rank(name: &str) -> usize {
    name.parse::<EdgeId>()
        .ok()
        .and_then(|e| EdgeId::ALL.iter().position(|x| *x == e))
        .unwrap_or(usize::MAX)
}

/// Orders rows by edge, then `t`, then metric name; independent of the order
/// in which workers finished.
pub fn sort_rows(rows: &mut [MeritRow]) {
    rows.sort_by(|a, b| {
        edge_rank(&a.edge)
            .cmp(&edge_rank(&b.edge))
            .then_with(|| a.edge.cmp(&b.edge))
            .then_with(|| a.t.unwrap_or(-1.0).total_cmp(&b.t.unwrap_or(-1.0)))
            .then_with(|| a.metric.name().cmp(b.metric.name()))
    });
}

pub fn write_rows<W: Write>(out: W, rows: &[MeritRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[MeritRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// CSV text with the `wall_time_ms` column removed, for reproducibility
/// comparisons.
pub fn without_wall_time(csv_text: &str) -> Result<String> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(csv_text.as_bytes());
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let keep: Vec<&str> = rec.iter().take(rec.len().saturating_sub(1)).collect();
        w.write_record(keep)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
