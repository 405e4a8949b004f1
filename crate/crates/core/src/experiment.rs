//! Seeded Monte Carlo estimation and k-sweeps.
//!
//! Trial `i` of any estimate uses the cover drawn from `seed.derive(i)`, and
//! only success counts are aggregated, so results do not depend on the
//! number of worker threads.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::analysis::{
    chebyshev_non_color_bound, expected_bfold_transversals, gt_failure_bound, markov_color_bound,
    variance_ratio_bound, BoundReport, MomentParams,
};
use crate::cover::sample_cover;
use crate::degeneracy::DegeneracyOrdering;
use crate::density::max_density_exact;
use crate::error::{Error, Guard, Result};
use crate::graph::Graph;
use crate::greedy::gt_run;
use crate::rng::Seed;
use crate::stats::{z_for_level, Estimate, Method};
use crate::transversal::{find_bfold_transversal, find_transversal};

pub const MAX_TRIALS: u64 = 100_000_000;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_LEVEL: f64 = 0.95;

fn check(a: usize, b: usize, trials: u64, level: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if trials > MAX_TRIALS {
        return Err(Error::guard(Guard::Trials, format!("{trials} trials requested")));
    }
    if a == 0 || b == 0 || b > a {
        return Err(Error::invalid(format!("need 1 <= b <= a, got b={b}, a={a}")));
    }
    z_for_level(level)?;
    Ok(())
}

/// Logs progress at every whole percent of `total`.
struct Progress {
    done: AtomicU64,
    total: u64,
    label: String,
}

impl Progress {
    fn new(total: u64, label: String) -> Self {
        Progress {
            done: AtomicU64::new(0),
            total,
            label,
        }
    }

    fn tick(&self) {
        let done = self.done.fetch_add(1, Ordering::Relaxed) + 1;
        if done * 100 / self.total != (done - 1) * 100 / self.total {
            log::info!("{}: {}% ({done}/{})", self.label, done * 100 / self.total, self.total);
        }
    }
}

/// Per-trial outcomes on one cover: exact decision and greedy success.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    exact: u64,
    gt: u64,
    sandwich_violations: u64,
}

fn run_trials(
    g: &Graph,
    a: usize,
    b: usize,
    trials: u64,
    seed: Seed,
    with_gt: bool,
) -> Result<Tally> {
    let ordering = DegeneracyOrdering::smallest_last(g);
    let progress = Progress::new(trials, format!("a={a} b={b}"));
    (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let cover = sample_cover(g, a, seed.derive(i))?;
            let exact = if b == 1 {
                find_transversal(&cover).is_some()
            } else {
                find_bfold_transversal(&cover, b)?.is_some()
            };
            let gt = with_gt && gt_run(&cover, b, &ordering)?.success;
            progress.tick();
            Ok(Tally {
                exact: exact as u64,
                gt: gt as u64,
                sandwich_violations: (gt && !exact) as u64,
            })
        })
        .try_reduce(Tally::default, |x, y| {
            Ok(Tally {
                exact: x.exact + y.exact,
                gt: x.gt + y.gt,
                sandwich_violations: x.sandwich_violations + y.sandwich_violations,
            })
        })
}

/// Probability that a random `a`-fold cover of `g` has an independent
/// `b`-fold transversal, decided exactly on each sampled cover.
pub fn estimate_probability(
    g: &Graph,
    a: usize,
    b: usize,
    trials: u64,
    seed: Seed,
    level: f64,
) -> Result<Estimate> {
    check(a, b, trials, level)?;
    let tally = run_trials(g, a, b, trials, seed, false)?;
    Estimate::new(tally.exact, trials, level, seed, Method::ExactSolver)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub b: usize,
    pub estimate: Estimate,
    /// Greedy success rate on the same covers (`None` for certified rows).
    pub gt: Option<Estimate>,
    /// Trials where the greedy procedure succeeded but no transversal exists.
    pub sandwich_violations: u64,
    pub expected: BigRational,
    pub markov: BoundReport,
    pub variance_ratio: Option<BoundReport>,
    pub chebyshev: Option<BoundReport>,
    pub gt_bound: Option<BoundReport>,
    pub rho: BigRational,
    pub d: usize,
}

/// One row per `k` in `k_min..=k_max`. Every row uses `seed`, so a row equals
/// [`estimate_probability`] at that `k`. For `b = 1` and `k > 2 rho` the row is
/// certified without sampling.
pub fn sweep_k(
    g: &Graph,
    k_min: usize,
    k_max: usize,
    b: usize,
    trials: u64,
    seed: Seed,
    level: f64,
) -> Result<Vec<SweepRow>> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::invalid(format!("need 1 <= k_min <= k_max, got {k_min}..{k_max}")));
    }
    if b == 0 || b > k_min {
        return Err(Error::invalid(format!("need 1 <= b <= k_min, got b={b}")));
    }
    check(k_min, b, trials, level)?;
    let rho = max_density_exact(g).max_density;
    let d = DegeneracyOrdering::smallest_last(g).degeneracy;
    let two_rho = &rho * BigRational::from_integer(BigInt::from(2));
    let mut rows = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let params = MomentParams::new(g.vertex_count(), g.edge_count(), k, b, rho.clone(), d)?;
        let certified = b == 1 && BigRational::from_integer(BigInt::from(k)) > two_rho;
        let (estimate, gt, violations) = if certified {
            (Estimate::certified(trials, level, seed)?, None, 0)
        } else {
            let tally = run_trials(g, k, b, trials, seed, true)?;
            (
                Estimate::new(tally.exact, trials, level, seed, Method::ExactSolver)?,
                Some(Estimate::new(tally.gt, trials, level, seed, Method::GtProcedure)?),
                tally.sandwich_violations,
            )
        };
        let expected = expected_bfold_transversals(&params);
        let second_moment = b == 1 && k >= 2 && g.edge_count() > 0 && !expected.is_zero();
        rows.push(SweepRow {
            k,
            b,
            estimate,
            gt,
            sandwich_violations: violations,
            expected,
            markov: markov_color_bound(&params),
            variance_ratio: if second_moment { Some(variance_ratio_bound(&params)?) } else { None },
            chebyshev: if second_moment { Some(chebyshev_non_color_bound(&params)?) } else { None },
            gt_bound: if k >= 2 { Some(gt_failure_bound(&params)?) } else { None },
            rho: rho.clone(),
            d,
        });
    }
    Ok(rows)
}

/// Largest `k` whose estimate is below 1/2 and smallest `k` whose estimate
/// is at least 1/2. Purely descriptive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingWindow {
    pub below: Option<usize>,
    pub above: Option<usize>,
}

pub fn crossing_window(rows: &[SweepRow]) -> CrossingWindow {
    CrossingWindow {
        below: rows.iter().filter(|r| r.estimate.point < 0.5).map(|r| r.k).max(),
        above: rows.iter().filter(|r| r.estimate.point >= 0.5).map(|r| r.k).min(),
    }
}

/// Pairs of rows `(k, k')`, `k < k'`, where the estimate at `k'` falls below
/// the one at `k` by more than the two interval half-widths combined.
pub fn monotonicity_breaks(rows: &[SweepRow]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for s in &rows[i + 1..] {
            let slack = r.estimate.half_width() + s.estimate.half_width();
            if s.estimate.point < r.estimate.point - slack {
                out.push((r.k, s.k));
            }
        }
    }
    out
}
