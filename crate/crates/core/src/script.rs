//! Experiment descriptions and their deterministic CSV output.
//!
//! A description names a graph source, a mode and its parameters. The same
//! [`Experiment`] drives both the TOML scripts and the CLI subcommands.
//!
//! ```toml
//! mode = "sweep"
//! output = "k8.csv"
//! k_min = 1
//! k_max = 9
//! trials = 2000
//! seed = 42
//!
//! [graph]
//! family = "complete"
//! q = 8
//! ```

use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::Deserialize;

use crate::analysis::{
    chebyshev_non_color_bound, expected_bfold_transversals, gt_failure_bound, ln_rational,
    markov_color_bound, rational_to_f64, threshold_function, variance_ratio_bound, MomentParams,
    ThresholdFamily,
};
use crate::error::{Error, Result};
use crate::experiment::{estimate_probability, sweep_k, DEFAULT_LEVEL, DEFAULT_TRIALS};
use crate::graph::{self, Graph};
use crate::greedy::survival_stats;
use crate::report::{self, analyze_push, provenance, Cell, Table};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Estimate,
    Sweep,
    Gt,
    Analyze,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSource {
    File { path: PathBuf },
    Complete { q: usize },
    Multipartite { parts: usize, size: usize },
    /// `t` disjoint copies of `K_q`.
    Copies { t: usize, q: usize },
    Random { n: usize, p: f64, seed: u64 },
    Degenerate { n: usize, d: usize, seed: u64 },
}

impl GraphSource {
    /// Builds the graph; relative file paths are taken from `base`.
    pub fn load(&self, base: &Path) -> Result<Graph> {
        Ok(match self {
            GraphSource::File { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)?;
                let g = Graph::parse(&text)?;
                if g.name().is_none() {
                    let stem = full.file_stem().map(|s| s.to_string_lossy().into_owned());
                    match stem {
                        Some(s) => g.with_name(s),
                        None => g,
                    }
                } else {
                    g
                }
            }
            GraphSource::Complete { q } => graph::complete(*q)?,
            GraphSource::Multipartite { parts, size } => graph::complete_multipartite(*parts, *size)?,
            GraphSource::Copies { t, q } => graph::disjoint_copies(*t, &graph::complete(*q)?)?,
            GraphSource::Random { n, p, seed } => graph::uniform_random(*n, *p, Seed(*seed))?,
            GraphSource::Degenerate { n, d, seed } => graph::random_degenerate(*n, *d, Seed(*seed))?,
        })
    }
}

fn default_b() -> usize {
    1
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub graph: GraphSource,
    /// Fold count (`a`) for estimate, gt and analyze.
    pub k: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
}

impl Experiment {
    pub fn parse(text: &str) -> Result<Experiment> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::parse(line, e.message().to_string())
        })
    }

    fn need_k(&self) -> Result<usize> {
        self.k
            .ok_or_else(|| Error::invalid(format!("mode {:?} needs k", self.mode)))
    }

    /// Runs the experiment on `g` and returns its table.
    pub fn run_on(&self, g: &Graph) -> Result<Table> {
        let seed = Seed(self.seed);
        let common = |extra: Vec<(&'static str, String)>| {
            let mut params = extra;
            params.extend([
                ("b", self.b.to_string()),
                ("trials", self.trials.to_string()),
                ("seed", self.seed.to_string()),
                ("level", report::format_real(self.level)),
            ]);
            params
        };
        match self.mode {
            Mode::Estimate => {
                let k = self.need_k()?;
                let e = estimate_probability(g, k, self.b, self.trials, seed, self.level)?;
                let comment = provenance("estimate", g, &common(vec![("a", k.to_string())]));
                Ok(report::estimate_table(comment, k, self.b, &e))
            }
            Mode::Sweep => {
                let (lo, hi) = match (self.k_min, self.k_max) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => return Err(Error::invalid("mode sweep needs k_min and k_max")),
                };
                let rows = sweep_k(g, lo, hi, self.b, self.trials, seed, self.level)?;
                let comment = provenance(
                    "sweep",
                    g,
                    &common(vec![("k_min", lo.to_string()), ("k_max", hi.to_string())]),
                );
                Ok(report::sweep_table(comment, &rows))
            }
            Mode::Gt => {
                let k = self.need_k()?;
                let stats = survival_stats(g, k, self.b, self.trials, seed)?;
                let rate = stats.success_rate(self.level, seed)?;
                let comment = provenance("gt", g, &common(vec![("a", k.to_string())]));
                Ok(report::gt_table(comment, &stats, &rate))
            }
            Mode::Analyze => {
                let k = self.need_k()?;
                let comment = provenance(
                    "analyze",
                    g,
                    &[("a", k.to_string()), ("b", self.b.to_string())],
                );
                analyze_table(comment, g, k, self.b)
            }
        }
    }

    /// Loads the graph relative to `base`, runs, and writes `output`
    /// atomically (resolved against `base`).
    pub fn run_to_file(&self, base: &Path) -> Result<Table> {
        let out = self
            .output
            .as_ref()
            .ok_or_else(|| Error::invalid("experiment has no output path"))?;
        let g = self.graph.load(base)?;
        let table = self.run_on(&g)?;
        write_atomic(&base.join(out), table.to_csv().as_bytes())?;
        Ok(table)
    }
}

/// Replaces `path` with `bytes` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Parses the script at `path` and runs it. Paths inside the script are
/// relative to the script's directory.
pub fn run_experiment_script(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    let exp = Experiment::parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    exp.run_to_file(base)
}

/// Moments and bounds for `g` at fold count `k`, one quantity per row.
pub fn analyze_table(comment: String, g: &Graph, k: usize, b: usize) -> Result<Table> {
    let p = MomentParams::for_graph(g, k, b)?;
    let mut t = Table::new(comment, report::ANALYZE_HEADER);
    analyze_push(&mut t, "n", p.n.into(), None);
    analyze_push(&mut t, "m", p.m.into(), None);
    analyze_push(&mut t, "rho", p.rho.clone().into(), None);
    analyze_push(&mut t, "d", p.d.into(), None);
    analyze_push(&mut t, "a", p.k.into(), None);
    analyze_push(&mut t, "b", p.b.into(), None);
    let e = expected_bfold_transversals(&p);
    analyze_push(&mut t, "expected", rational_to_f64(&e).into(), None);
    analyze_push(&mut t, "ln_expected", ln_rational(&e).into(), None);
    let markov = markov_color_bound(&p);
    analyze_push(&mut t, "markov", markov.value.into(), Some(&markov));
    let second_moment = b == 1 && k >= 2 && p.m > 0 && !e.is_zero();
    if second_moment {
        let v = variance_ratio_bound(&p)?;
        analyze_push(&mut t, "variance_ratio", v.value.into(), Some(&v));
        let c = chebyshev_non_color_bound(&p)?;
        analyze_push(&mut t, "chebyshev", c.value.into(), Some(&c));
    } else {
        analyze_push(&mut t, "variance_ratio", Cell::Empty, None);
        analyze_push(&mut t, "chebyshev", Cell::Empty, None);
    }
    if k >= 2 {
        let gt = gt_failure_bound(&p)?;
        analyze_push(&mut t, "gt_union", gt.value.into(), Some(&gt));
    } else {
        analyze_push(&mut t, "gt_union", Cell::Empty, None);
    }
    let rho = rational_to_f64(&p.rho);
    let general = threshold_function(ThresholdFamily::General { rho }).ok();
    analyze_push(&mut t, "threshold_general", Cell::opt_real(general), None);
    let complete = p.m == p.n * (p.n - 1) / 2;
    let clique = if complete {
        threshold_function(ThresholdFamily::Complete { n: p.n }).ok()
    } else {
        None
    };
    analyze_push(&mut t, "threshold_complete", Cell::opt_real(clique), None);
    Ok(t)
}
