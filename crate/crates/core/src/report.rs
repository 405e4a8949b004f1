//! Tabular output: CSV with a leading provenance comment, or aligned text.
//!
//! Reals are written with 12 significant digits in `%g` style and rationals
//! as `p/q`. Parsing an emitted CSV and writing it again gives the same bytes.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::analysis::BoundReport;
use crate::error::{Error, Result};
use crate::experiment::SweepRow;
use crate::graph::Graph;
use crate::greedy::SurvivalStats;
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i128),
    Real(f64),
    Rational(BigRational),
    Text(String),
}

impl Cell {
    pub fn opt_real(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Real)
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Rational(r) => format_rational(r),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Inverse of the rendering, up to the numeric type of the text.
    fn infer(s: &str) -> Cell {
        if s.is_empty() {
            return Cell::Empty;
        }
        if let Ok(i) = s.parse::<i128>() {
            return Cell::Int(i);
        }
        if let Some((p, q)) = s.split_once('/') {
            if let (Ok(p), Ok(q)) = (p.parse::<BigInt>(), q.parse::<BigInt>()) {
                if q > BigInt::from(0) {
                    let r = BigRational::new(p, q);
                    if format_rational(&r) == s {
                        return Cell::Rational(r);
                    }
                }
            }
        }
        if let Ok(x) = s.parse::<f64>() {
            if format_real(x) == s {
                return Cell::Real(x);
            }
        }
        Cell::Text(s.to_string())
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Rational(r) => Some(crate::analysis::rational_to_f64(r)),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i128> {
        match self {
            Cell::Int(i) => Some(*i),
            _ => None,
        }
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<BigRational> for Cell {
    fn from(r: BigRational) -> Self {
        Cell::Rational(r)
    }
}

/// `%.12g`: 12 significant digits, trailing zeros removed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `p/q` in lowest terms; integers keep the `/1`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Provenance line written as `# ...` before the header.
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        Table {
            comment: comment.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).map(|c| &self.rows[row][c])
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        format!("# {}\n{body}", self.comment)
    }

    pub fn parse_csv(text: &str) -> Result<Table> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let comment = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::parse(1, "expected a '# ' provenance line"))?
            .to_string();
        let mut reader = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::parse(2, e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(i + 3, e.to_string()))?;
            rows.push(rec.iter().map(Cell::infer).collect());
        }
        Ok(Table {
            comment,
            header,
            rows,
        })
    }

    /// Space-aligned columns, right-justified.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect();
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                rendered
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("# {}\n", self.comment);
        let mut line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", parts.join("  "));
        };
        line(&self.header);
        for r in &rendered {
            line(r);
        }
        out
    }
}

/// Provenance line: tool version, graph summary and parameters in order.
pub fn provenance(mode: &str, g: &Graph, params: &[(&str, String)]) -> String {
    let mut s = format!(
        "dpcover {} mode={mode} graph={} n={} m={}",
        env!("CARGO_PKG_VERSION"),
        g.name().unwrap_or("-").replace(char::is_whitespace, "_"),
        g.vertex_count(),
        g.edge_count()
    );
    for (k, v) in params {
        let _ = write!(s, " {k}={v}");
    }
    s
}

fn bound_cell(b: &Option<BoundReport>) -> Cell {
    Cell::opt_real(b.as_ref().map(|b| b.value))
}

pub const ESTIMATE_HEADER: &[&str] = &[
    "a", "b", "trials", "successes", "estimate", "ci_low", "ci_high", "level", "seed", "method",
];

pub fn estimate_table(comment: String, a: usize, b: usize, e: &Estimate) -> Table {
    let mut t = Table::new(comment, ESTIMATE_HEADER);
    t.push(vec![
        a.into(),
        b.into(),
        e.trials.into(),
        e.successes.into(),
        e.point.into(),
        e.ci_low.into(),
        e.ci_high.into(),
        e.level.into(),
        e.seed.0.into(),
        e.method.as_str().into(),
    ]);
    t
}

pub const SWEEP_HEADER: &[&str] = &[
    "k",
    "b",
    "trials",
    "successes",
    "estimate",
    "ci_low",
    "ci_high",
    "method",
    "gt_successes",
    "gt_estimate",
    "sandwich_violations",
    "expected",
    "markov",
    "variance_ratio",
    "chebyshev",
    "gt_bound",
    "rho",
    "d",
];

/// One row per sweep row. `expected` is written as a real since the exact
/// rational grows with `n`.
pub fn sweep_table(comment: String, rows: &[SweepRow]) -> Table {
    let mut t = Table::new(comment, SWEEP_HEADER);
    for r in rows {
        let e = &r.estimate;
        t.push(vec![
            r.k.into(),
            r.b.into(),
            e.trials.into(),
            e.successes.into(),
            e.point.into(),
            e.ci_low.into(),
            e.ci_high.into(),
            e.method.as_str().into(),
            r.gt.as_ref().map_or(Cell::Empty, |g| g.successes.into()),
            Cell::opt_real(r.gt.as_ref().map(|g| g.point)),
            r.sandwich_violations.into(),
            crate::analysis::rational_to_f64(&r.expected).into(),
            r.markov.value.into(),
            bound_cell(&r.variance_ratio),
            bound_cell(&r.chebyshev),
            bound_cell(&r.gt_bound),
            r.rho.clone().into(),
            r.d.into(),
        ]);
    }
    t
}

pub const GT_HEADER: &[&str] = &[
    "kind",
    "position",
    "vertex",
    "back_degree",
    "mean_survival",
    "min_index_survival",
    "reference",
    "bound",
    "stderr",
    "max_abs_z",
    "trials",
    "successes",
    "estimate",
    "ci_low",
    "ci_high",
];

/// One row per vertex in processing order plus a summary row.
/// `mean_survival` is the mean of `|L'(v)|/a`, `reference` is
/// `(1-b/a)^{d_i}` and `bound` is `(1-b/a)^d`.
pub fn gt_table(comment: String, stats: &SurvivalStats, rate: &Estimate) -> Table {
    let mut t = Table::new(comment, GT_HEADER);
    let bound = stats.bound();
    for (pos, &v) in stats.ordering.order.iter().enumerate() {
        let (mean, stderr) = stats.vertex_mean(pos);
        let min_index = (0..stats.a)
            .map(|j| stats.mean_survival(pos, j))
            .fold(f64::INFINITY, f64::min);
        let mut row = vec![
            "vertex".into(),
            pos.into(),
            (v as usize).into(),
            stats.ordering.back_degrees[pos].into(),
            mean.into(),
            min_index.into(),
            stats.reference(pos).into(),
            bound.into(),
            stderr.into(),
            stats.max_abs_z(pos).into(),
        ];
        row.extend(std::iter::repeat_n(Cell::Empty, 5));
        t.push(row);
    }
    let mut row: Vec<Cell> = vec!["summary".into()];
    row.extend(std::iter::repeat_n(Cell::Empty, 6));
    row.push(bound.into());
    row.extend([Cell::Empty, Cell::Empty]);
    row.extend([
        rate.trials.into(),
        rate.successes.into(),
        rate.point.into(),
        rate.ci_low.into(),
        rate.ci_high.into(),
    ]);
    t.push(row);
    t
}

pub const ANALYZE_HEADER: &[&str] = &["quantity", "value", "clamped", "formula"];

pub fn analyze_push(t: &mut Table, name: &str, value: Cell, report: Option<&BoundReport>) {
    t.push(vec![
        name.into(),
        value,
        report.map_or(Cell::Empty, |r| Cell::Int(r.clamped as i128)),
        report.map_or(Cell::Empty, |r| r.provenance.as_str().into()),
    ]);
}
