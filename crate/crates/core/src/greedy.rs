//! The greedy transversal procedure and its survival statistics.
//!
//! Vertices are processed in a given ordering. At each vertex the indices
//! matched to an already chosen index of an earlier neighbor are removed; the
//! `b` smallest survivors are chosen, or `{0, .., b-1}` when fewer than `b`
//! survive (the run is then marked as failed but still visits every vertex).

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index;
use rayon::prelude::*;

use crate::cover::{enumerate_covers, sample_cover, Cover};
use crate::degeneracy::DegeneracyOrdering;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Seed;
use crate::stats::{Estimate, Method};
use crate::transversal::{binomial_u64, BFoldTransversal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtOutcome {
    /// Chosen index set per vertex (indexed by vertex id).
    pub transversal: BFoldTransversal,
    /// True iff every vertex kept at least `b` survivors.
    pub success: bool,
    /// Survivor count `|L'(v_i)|` per position in the processing order.
    pub survivor_counts: Vec<usize>,
}

/// Runs the procedure on `cover` in the order given by `ordering`.
pub fn gt_run(cover: &Cover<'_>, b: usize, ordering: &DegeneracyOrdering) -> Result<GtOutcome> {
    let mut counts = Vec::with_capacity(ordering.order.len());
    let (transversal, success) = gt_pass(cover, b, ordering, |_, survived| {
        counts.push(survived.iter().filter(|&&s| s).count());
    })?;
    Ok(GtOutcome {
        transversal,
        success,
        survivor_counts: counts,
    })
}

/// Core pass; `visit(position, survived)` sees the survivor indicator of
/// every index at each position.
fn gt_pass(
    cover: &Cover<'_>,
    b: usize,
    ordering: &DegeneracyOrdering,
    mut visit: impl FnMut(usize, &[bool]),
) -> Result<(BFoldTransversal, bool)> {
    let g = cover.graph();
    let a = cover.k();
    if b == 0 || b > a {
        return Err(Error::invalid(format!("need 1 <= b <= a, got b={b}, a={a}")));
    }
    if ordering.order.len() != g.vertex_count() {
        return Err(Error::invalid("ordering does not match the cover's graph"));
    }
    let position = ordering.positions();
    let mut chosen: Vec<Vec<u32>> = vec![Vec::new(); g.vertex_count()];
    let mut survived = vec![true; a];
    let mut success = true;
    for (i, &v) in ordering.order.iter().enumerate() {
        survived.fill(true);
        for &(w, j) in g.neighbors(v) {
            if position[w as usize] < i {
                for &idx in &chosen[w as usize] {
                    survived[cover.matched(j as usize, w, idx) as usize] = false;
                }
            }
        }
        visit(i, &survived);
        let pick: Vec<u32> = (0..a as u32)
            .filter(|&x| survived[x as usize])
            .take(b)
            .collect();
        chosen[v as usize] = if pick.len() == b {
            pick
        } else {
            success = false;
            (0..b as u32).collect()
        };
    }
    Ok((BFoldTransversal { choice: chosen }, success))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if trials > crate::experiment::MAX_TRIALS {
        return Err(Error::guard(
            crate::Guard::Trials,
            format!("{trials} trials requested"),
        ));
    }
    Ok(())
}

/// Fraction of random `a`-fold covers on which the procedure succeeds, using
/// the smallest-last ordering. Trial `i` uses the cover drawn from
/// `seed.derive(i)`.
pub fn gt_success_rate(
    g: &Graph,
    a: usize,
    b: usize,
    trials: u64,
    seed: Seed,
    level: f64,
) -> Result<Estimate> {
    check_trials(trials)?;
    if b == 0 || b > a {
        return Err(Error::invalid(format!("need 1 <= b <= a, got b={b}, a={a}")));
    }
    let ordering = DegeneracyOrdering::smallest_last(g);
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let cover = sample_cover(g, a, seed.derive(i))?;
            Ok(gt_run(&cover, b, &ordering)?.success as u64)
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;
    Estimate::new(successes, trials, level, seed, Method::GtProcedure)
}

/// Index subsets of size 2 and 3 tracked for the correlation check.
/// All of them when there are at most this many, otherwise a seeded sample.
pub const MAX_EXHAUSTIVE_SUBSETS: u64 = 20_000;
/// Per-size sample count used when subsets are sampled.
pub const SAMPLED_SUBSETS_PER_SIZE: usize = 64;

/// Empirical survival statistics of the procedure over random covers.
#[derive(Debug, Clone)]
pub struct SurvivalStats {
    pub trials: u64,
    pub a: usize,
    pub b: usize,
    pub ordering: DegeneracyOrdering,
    /// `survived[pos * a + j]`: trials in which index `j` survived at `pos`.
    pub survived: Vec<u64>,
    /// Per position, sum over trials of `|L'(v_i)|` and of its square.
    pub survivor_sum: Vec<u64>,
    pub survivor_sq_sum: Vec<u64>,
    /// Tracked index subsets (each sorted, size 2 or 3).
    pub subsets: Vec<Vec<u32>>,
    /// `joint_removed[pos * subsets.len() + s]`: trials in which every index
    /// of subset `s` was removed at `pos`.
    pub joint_removed: Vec<u64>,
    pub gt_successes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDeviation {
    pub position: usize,
    pub index: u32,
    pub mean: f64,
    pub reference: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationExcess {
    pub position: usize,
    pub subset: Vec<u32>,
    pub joint: f64,
    pub product: f64,
    pub stderr: f64,
}

impl SurvivalStats {
    /// `(1 - b/a)^d` with `d` the ordering's maximum back degree.
    pub fn bound(&self) -> f64 {
        (1.0 - self.b as f64 / self.a as f64).powi(self.ordering.degeneracy as i32)
    }

    /// `(1 - b/a)^{d_i}` for the back degree at `position`; the exact
    /// survival probability of every index there.
    pub fn reference(&self, position: usize) -> f64 {
        (1.0 - self.b as f64 / self.a as f64).powi(self.ordering.back_degrees[position] as i32)
    }

    pub fn mean_survival(&self, position: usize, index: usize) -> f64 {
        self.survived[position * self.a + index] as f64 / self.trials as f64
    }

    /// Mean of `|L'(v_i)| / a` at `position`, with its empirical standard error.
    pub fn vertex_mean(&self, position: usize) -> (f64, f64) {
        let t = self.trials as f64;
        let a = self.a as f64;
        let mean = self.survivor_sum[position] as f64 / t;
        let var = (self.survivor_sq_sum[position] as f64 / t - mean * mean).max(0.0);
        let stderr = if self.trials > 1 {
            (var * t / (t - 1.0) / t).sqrt() / a
        } else {
            0.0
        };
        (mean / a, stderr)
    }

    /// Binomial standard error of a frequency with success probability `p`.
    pub fn stderr_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Largest `|mean - reference| / stderr` at `position` (0 when exact).
    pub fn max_abs_z(&self, position: usize) -> f64 {
        let r = self.reference(position);
        let se = self.stderr_at(r);
        (0..self.a)
            .map(|j| {
                let dev = (self.mean_survival(position, j) - r).abs();
                if dev == 0.0 {
                    0.0
                } else if se == 0.0 {
                    f64::INFINITY
                } else {
                    dev / se
                }
            })
            .fold(0.0, f64::max)
    }

    /// Every (position, index) whose survival frequency lies more than
    /// `z` standard errors from `(1 - b/a)^{d_i}`.
    pub fn survival_deviations(&self, z: f64) -> Vec<SurvivalDeviation> {
        let mut out = Vec::new();
        for pos in 0..self.ordering.order.len() {
            let r = self.reference(pos);
            let se = self.stderr_at(r);
            for j in 0..self.a {
                let mean = self.mean_survival(pos, j);
                if (mean - r).abs() > z * se + 1e-12 {
                    out.push(SurvivalDeviation {
                        position: pos,
                        index: j as u32,
                        mean,
                        reference: r,
                        stderr: se,
                    });
                }
            }
        }
        out
    }

    /// Every (position, index) whose survival frequency is below the global
    /// bound `(1 - b/a)^d` by more than `z` standard errors.
    pub fn bound_violations(&self, z: f64) -> Vec<SurvivalDeviation> {
        let bound = self.bound();
        let se = self.stderr_at(bound);
        let mut out = Vec::new();
        for pos in 0..self.ordering.order.len() {
            for j in 0..self.a {
                let mean = self.mean_survival(pos, j);
                if mean < bound - z * se - 1e-12 {
                    out.push(SurvivalDeviation {
                        position: pos,
                        index: j as u32,
                        mean,
                        reference: bound,
                        stderr: se,
                    });
                }
            }
        }
        out
    }

    /// Tracked subsets whose joint removal frequency exceeds the product of
    /// the marginal removal frequencies by more than `z` standard errors.
    pub fn correlation_excesses(&self, z: f64) -> Vec<CorrelationExcess> {
        let t = self.trials as f64;
        let s = self.subsets.len();
        let mut out = Vec::new();
        for pos in 0..self.ordering.order.len() {
            for (si, subset) in self.subsets.iter().enumerate() {
                let joint = self.joint_removed[pos * s + si] as f64 / t;
                let product: f64 = subset
                    .iter()
                    .map(|&j| 1.0 - self.mean_survival(pos, j as usize))
                    .product();
                let stderr = self.stderr_at(joint.max(product));
                if joint > product + z * stderr + 1e-12 {
                    out.push(CorrelationExcess {
                        position: pos,
                        subset: subset.clone(),
                        joint,
                        product,
                        stderr,
                    });
                }
            }
        }
        out
    }

    pub fn success_rate(&self, level: f64, seed: Seed) -> Result<Estimate> {
        Estimate::new(self.gt_successes, self.trials, level, seed, Method::GtProcedure)
    }
}

fn tracked_subsets(a: usize, seed: Seed) -> Vec<Vec<u32>> {
    let a64 = a as u64;
    let total = binomial_u64(a64, 2).unwrap_or(u64::MAX)
        .saturating_add(binomial_u64(a64, 3).unwrap_or(u64::MAX));
    let mut out = Vec::new();
    if total <= MAX_EXHAUSTIVE_SUBSETS {
        for x in 0..a as u32 {
            for y in x + 1..a as u32 {
                out.push(vec![x, y]);
                for z in y + 1..a as u32 {
                    out.push(vec![x, y, z]);
                }
            }
        }
        out.sort_by_key(|s| (s.len(), s.clone()));
        return out;
    }
    let mut rng = seed.derive(u64::MAX).stream(0);
    for size in [2usize, 3] {
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < SAMPLED_SUBSETS_PER_SIZE {
            let mut s: Vec<u32> = index::sample(&mut rng, a, size)
                .into_iter()
                .map(|x| x as u32)
                .collect();
            s.sort_unstable();
            seen.insert(s);
        }
        out.extend(seen);
    }
    out
}

/// Survival statistics over `trials` random `a`-fold covers, using the
/// smallest-last ordering of `g`. Requires at least 100 trials.
pub fn survival_stats(g: &Graph, a: usize, b: usize, trials: u64, seed: Seed) -> Result<SurvivalStats> {
    survival_stats_with(g, a, b, trials, seed, DegeneracyOrdering::smallest_last(g))
}

pub fn survival_stats_with(
    g: &Graph,
    a: usize,
    b: usize,
    trials: u64,
    seed: Seed,
    ordering: DegeneracyOrdering,
) -> Result<SurvivalStats> {
    if trials < 100 {
        return Err(Error::invalid("survival statistics need at least 100 trials"));
    }
    check_trials(trials)?;
    if b == 0 || b > a {
        return Err(Error::invalid(format!("need 1 <= b <= a, got b={b}, a={a}")));
    }
    let n = g.vertex_count();
    let subsets = tracked_subsets(a, seed);
    let exhaustive = subsets.len() as u64
        == binomial_u64(a as u64, 2).unwrap_or(0) + binomial_u64(a as u64, 3).unwrap_or(0);
    let s = subsets.len();
    // Exhaustive mode: subset code -> slot, for enumerating subsets of the
    // removed set directly.
    let slot_of = |sub: &[u32]| -> usize {
        subsets
            .binary_search_by(|probe| (probe.len(), probe.as_slice()).cmp(&(sub.len(), sub)))
            .expect("subset is tracked")
    };

    #[derive(Clone)]
    struct Acc {
        survived: Vec<u64>,
        sum: Vec<u64>,
        sq: Vec<u64>,
        joint: Vec<u64>,
        successes: u64,
    }
    let zero = Acc {
        survived: vec![0; n * a],
        sum: vec![0; n],
        sq: vec![0; n],
        joint: vec![0; n * s],
        successes: 0,
    };
    let acc = (0..trials)
        .into_par_iter()
        .try_fold(
            || zero.clone(),
            |mut acc, i| -> Result<Acc> {
                let cover = sample_cover(g, a, seed.derive(i))?;
                let mut removed: Vec<u32> = Vec::with_capacity(a);
                let (_, ok) = gt_pass(&cover, b, &ordering, |pos, survived| {
                    removed.clear();
                    let mut count = 0u64;
                    for (j, &sv) in survived.iter().enumerate() {
                        if sv {
                            acc.survived[pos * a + j] += 1;
                            count += 1;
                        } else {
                            removed.push(j as u32);
                        }
                    }
                    acc.sum[pos] += count;
                    acc.sq[pos] += count * count;
                    if exhaustive {
                        for x in 0..removed.len() {
                            for y in x + 1..removed.len() {
                                acc.joint[pos * s + slot_of(&[removed[x], removed[y]])] += 1;
                                for z in y + 1..removed.len() {
                                    let sl = slot_of(&[removed[x], removed[y], removed[z]]);
                                    acc.joint[pos * s + sl] += 1;
                                }
                            }
                        }
                    } else {
                        for (si, sub) in subsets.iter().enumerate() {
                            if sub.iter().all(|&j| !survived[j as usize]) {
                                acc.joint[pos * s + si] += 1;
                            }
                        }
                    }
                })?;
                acc.successes += ok as u64;
                Ok(acc)
            },
        )
        .try_reduce(
            || zero.clone(),
            |mut x, y| {
                for (p, q) in x.survived.iter_mut().zip(&y.survived) {
                    *p += q;
                }
                for (p, q) in x.sum.iter_mut().zip(&y.sum) {
                    *p += q;
                }
                for (p, q) in x.sq.iter_mut().zip(&y.sq) {
                    *p += q;
                }
                for (p, q) in x.joint.iter_mut().zip(&y.joint) {
                    *p += q;
                }
                x.successes += y.successes;
                Ok(x)
            },
        )?;
    Ok(SurvivalStats {
        trials,
        a,
        b,
        ordering,
        survived: acc.survived,
        survivor_sum: acc.sum,
        survivor_sq_sum: acc.sq,
        subsets,
        joint_removed: acc.joint,
        gt_successes: acc.successes,
    })
}

/// Exact removal probabilities under the uniform cover distribution, by
/// enumerating every cover. Entry `[pos][mask]` is the probability that
/// every index in `mask` is removed at `pos` (`a <= 16`).
pub fn exact_removal_probabilities(
    g: &Graph,
    a: usize,
    b: usize,
    ordering: &DegeneracyOrdering,
) -> Result<Vec<Vec<BigRational>>> {
    if a > 16 {
        return Err(Error::invalid("exact removal probabilities need a <= 16"));
    }
    let n = g.vertex_count();
    let masks = 1usize << a;
    let mut counts = vec![vec![0u64; masks]; n];
    let mut total = 0u64;
    for cover in enumerate_covers(g, a)? {
        total += 1;
        gt_pass(&cover, b, ordering, |pos, survived| {
            let removed = survived
                .iter()
                .enumerate()
                .filter(|(_, &s)| !s)
                .fold(0usize, |m, (j, _)| m | 1 << j);
            // Every submask of the removed set had all its indices removed.
            let mut sub = removed;
            loop {
                counts[pos][sub] += 1;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & removed;
            }
        })?;
    }
    Ok(counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| BigRational::new(BigInt::from(c), BigInt::from(total)))
                .collect()
        })
        .collect())
}
