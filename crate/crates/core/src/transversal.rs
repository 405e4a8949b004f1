//! Independent transversals of a cover: decision, search and exact counting.
//!
//! The search keeps, for every unprocessed vertex, the set of indices that do
//! not conflict with the choices made so far. It branches on the vertex with
//! the fewest surviving indices (ties by position in the degeneracy ordering)
//! and backtracks as soon as some vertex has fewer than `b` survivors.
//!
//! For the decision problem a vertex `v` whose survivor count is at least
//! `b * (open_degree(v) + 1)` is set aside: every remaining neighbor can block
//! at most `b` of its indices, so `v` can always be completed greedily at the
//! end. Counting explores the full tree without this shortcut.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cover::{enumerate_covers, Cover};
use crate::degeneracy::DegeneracyOrdering;
use crate::error::{Error, Guard, Result};
use crate::graph::{Graph, Vertex};

/// Maximum `k^n` (or `C(k,b)^n`) accepted by the counting routines.
pub const COUNT_GUARD: u64 = 100_000_000;

/// One index per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    pub choice: Vec<u32>,
}

/// `b` indices per vertex, each set sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BFoldTransversal {
    pub choice: Vec<Vec<u32>>,
}

impl BFoldTransversal {
    pub fn b(&self) -> usize {
        self.choice.first().map_or(0, Vec::len)
    }
}

impl From<Transversal> for BFoldTransversal {
    fn from(t: Transversal) -> Self {
        BFoldTransversal {
            choice: t.choice.into_iter().map(|i| vec![i]).collect(),
        }
    }
}

/// True iff no edge `j = (u, v)` has `σ_j(choice[u]) = choice[v]`.
pub fn is_independent(cover: &Cover<'_>, t: &Transversal) -> Result<bool> {
    let g = cover.graph();
    if t.choice.len() != g.vertex_count() {
        return Err(Error::invalid(format!(
            "transversal has {} entries for {} vertices",
            t.choice.len(),
            g.vertex_count()
        )));
    }
    if let Some(&bad) = t.choice.iter().find(|&&i| i as usize >= cover.k()) {
        return Err(Error::invalid(format!("index {bad} out of range 0..{}", cover.k())));
    }
    Ok(g.edges().iter().enumerate().all(|(j, &(u, v))| {
        cover.matched(j, u, t.choice[u as usize]) != t.choice[v as usize]
    }))
}

/// True iff `σ_j(S_u) ∩ S_v = ∅` on every edge.
pub fn is_independent_bfold(cover: &Cover<'_>, t: &BFoldTransversal) -> Result<bool> {
    let g = cover.graph();
    let k = cover.k();
    if t.choice.len() != g.vertex_count() {
        return Err(Error::invalid(format!(
            "transversal has {} entries for {} vertices",
            t.choice.len(),
            g.vertex_count()
        )));
    }
    let b = t.b();
    for set in &t.choice {
        let mut seen = vec![false; k];
        if set.len() != b {
            return Err(Error::invalid("all vertices must receive the same number of indices"));
        }
        for &i in set {
            if i as usize >= k || std::mem::replace(&mut seen[i as usize], true) {
                return Err(Error::invalid(format!("bad index set {set:?}")));
            }
        }
    }
    Ok(g.edges().iter().enumerate().all(|(j, &(u, v))| {
        let sv = &t.choice[v as usize];
        t.choice[u as usize]
            .iter()
            .all(|&i| !sv.contains(&cover.matched(j, u, i)))
    }))
}

/// Finds an independent transversal if one exists.
pub fn find_transversal(cover: &Cover<'_>) -> Option<Transversal> {
    let found = Search::new(cover, 1, Mode::Decide).decide()?;
    let t = Transversal {
        choice: found.into_iter().map(|s| s[0]).collect(),
    };
    assert!(
        is_independent(cover, &t).expect("solver output is well formed"),
        "solver returned a dependent transversal"
    );
    Some(t)
}

/// Finds an independent `b`-fold transversal if one exists.
pub fn find_bfold_transversal(cover: &Cover<'_>, b: usize) -> Result<Option<BFoldTransversal>> {
    check_b(cover, b)?;
    let Some(found) = Search::new(cover, b, Mode::Decide).decide() else {
        return Ok(None);
    };
    let t = BFoldTransversal { choice: found };
    assert!(
        is_independent_bfold(cover, &t)?,
        "solver returned a dependent b-fold transversal"
    );
    Ok(Some(t))
}

/// Exact number of independent transversals.
pub fn count_transversals(cover: &Cover<'_>) -> Result<u64> {
    count_bfold_transversals(cover, 1)
}

/// Exact number of independent `b`-fold transversals.
pub fn count_bfold_transversals(cover: &Cover<'_>, b: usize) -> Result<u64> {
    check_b(cover, b)?;
    let n = cover.graph().vertex_count() as u32;
    let per_vertex = binomial_u64(cover.k() as u64, b as u64);
    match per_vertex.and_then(|c| c.checked_pow(n)) {
        Some(total) if total <= COUNT_GUARD => {}
        _ => {
            return Err(Error::guard(
                Guard::TransversalCount,
                format!("C({},{b})^{n} candidate transversals", cover.k()),
            ))
        }
    }
    Ok(Search::new(cover, b, Mode::Count).count())
}

/// Exact probability that a uniformly random `k`-fold cover of `g` has an
/// independent `b`-fold transversal, by enumerating all `(k!)^m` covers.
pub fn exact_colorability_probability(g: &Graph, k: usize, b: usize) -> Result<BigRational> {
    if b == 0 || b > k {
        return Err(Error::invalid(format!("need 1 <= b <= k, got b={b}, k={k}")));
    }
    let mut total = 0u64;
    let mut good = 0u64;
    for cover in enumerate_covers(g, k)? {
        total += 1;
        if find_bfold_transversal(&cover, b)?.is_some() {
            good += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(good), BigInt::from(total)))
}

fn check_b(cover: &Cover<'_>, b: usize) -> Result<()> {
    if b == 0 || b > cover.k() {
        return Err(Error::invalid(format!(
            "need 1 <= b <= k, got b={b}, k={}",
            cover.k()
        )));
    }
    Ok(())
}

pub(crate) fn binomial_u64(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Decide,
    Count,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Open,
    Assigned,
    Deferred,
}

enum Undo {
    Removed(u32, u32),
    OpenDegree(u32),
    Status(u32),
}

struct Search<'a, 'g> {
    cover: &'a Cover<'g>,
    graph: &'g Graph,
    b: usize,
    mode: Mode,
    words: usize,
    survivors: Vec<u64>,
    survivor_count: Vec<u32>,
    status: Vec<Status>,
    open_degree: Vec<u32>,
    chosen: Vec<Vec<u32>>,
    deferred: Vec<Vertex>,
    position: Vec<usize>,
    trail: Vec<Undo>,
}

impl<'a, 'g> Search<'a, 'g> {
    fn new(cover: &'a Cover<'g>, b: usize, mode: Mode) -> Self {
        let graph = cover.graph();
        let n = graph.vertex_count();
        let k = cover.k();
        let words = k.div_ceil(64);
        let mut full = vec![u64::MAX; words];
        if !k.is_multiple_of(64) {
            full[words - 1] = (1u64 << (k % 64)) - 1;
        }
        let survivors = (0..n).flat_map(|_| full.iter().copied()).collect();
        let ordering = DegeneracyOrdering::smallest_last(graph);
        Search {
            cover,
            graph,
            b,
            mode,
            words,
            survivors,
            survivor_count: vec![k as u32; n],
            status: vec![Status::Open; n],
            open_degree: (0..n as Vertex).map(|v| graph.degree(v) as u32).collect(),
            chosen: vec![Vec::new(); n],
            deferred: Vec::new(),
            position: ordering.positions(),
            trail: Vec::new(),
        }
    }

    fn has(&self, v: usize, i: u32) -> bool {
        self.survivors[v * self.words + (i / 64) as usize] >> (i % 64) & 1 == 1
    }

    fn remove(&mut self, v: usize, i: u32) {
        self.survivors[v * self.words + (i / 64) as usize] &= !(1u64 << (i % 64));
        self.survivor_count[v] -= 1;
        self.trail.push(Undo::Removed(v as u32, i));
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail above mark") {
                Undo::Removed(v, i) => {
                    let v = v as usize;
                    self.survivors[v * self.words + (i / 64) as usize] |= 1u64 << (i % 64);
                    self.survivor_count[v] += 1;
                }
                Undo::OpenDegree(v) => self.open_degree[v as usize] += 1,
                Undo::Status(v) => {
                    if self.status[v as usize] == Status::Deferred {
                        self.deferred.pop();
                    }
                    self.status[v as usize] = Status::Open;
                }
            }
        }
    }

    fn can_defer(&self, v: usize) -> bool {
        self.mode == Mode::Decide
            && self.status[v] == Status::Open
            && self.survivor_count[v] as usize >= self.b * (self.open_degree[v] as usize + 1)
    }

    /// Removes `v` from the open set, updating open degrees and cascading
    /// deferrals.
    fn close(&mut self, v: Vertex, status: Status) {
        self.status[v as usize] = status;
        self.trail.push(Undo::Status(v));
        if status == Status::Deferred {
            self.deferred.push(v);
        }
        let mut pending = vec![v];
        while let Some(x) = pending.pop() {
            for &(w, _) in self.graph.neighbors(x) {
                let wi = w as usize;
                if self.status[wi] != Status::Open {
                    continue;
                }
                self.open_degree[wi] -= 1;
                self.trail.push(Undo::OpenDegree(w));
                if self.can_defer(wi) {
                    self.status[wi] = Status::Deferred;
                    self.trail.push(Undo::Status(w));
                    self.deferred.push(w);
                    pending.push(w);
                }
            }
        }
    }

    /// Assigns index set `set` to `v` and filters its open neighbors.
    fn assign(&mut self, v: Vertex, set: &[u32]) -> bool {
        let mut ok = true;
        for &(w, j) in self.graph.neighbors(v) {
            let wi = w as usize;
            if self.status[wi] != Status::Open {
                continue;
            }
            for &i in set {
                let x = self.cover.matched(j as usize, v, i);
                if self.has(wi, x) {
                    self.remove(wi, x);
                }
            }
            if (self.survivor_count[wi] as usize) < self.b {
                ok = false;
            }
        }
        self.chosen[v as usize].clear();
        self.chosen[v as usize].extend_from_slice(set);
        self.close(v, Status::Assigned);
        ok
    }

    fn initial_deferrals(&mut self) {
        if self.mode != Mode::Decide {
            return;
        }
        for v in 0..self.graph.vertex_count() as Vertex {
            if self.can_defer(v as usize) {
                self.close(v, Status::Deferred);
            }
        }
    }

    fn select(&self) -> Option<Vertex> {
        (0..self.graph.vertex_count())
            .filter(|&v| self.status[v] == Status::Open)
            .min_by_key(|&v| (self.survivor_count[v], self.position[v]))
            .map(|v| v as Vertex)
    }

    /// Candidate index sets for `v`, flattened `b` at a time, in
    /// lexicographic order.
    fn candidates(&self, v: Vertex) -> Vec<u32> {
        let avail: Vec<u32> = (0..self.cover.k() as u32)
            .filter(|&i| self.has(v as usize, i))
            .collect();
        if self.b == 1 {
            return avail;
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..self.b).collect();
        let len = avail.len();
        loop {
            out.extend(idx.iter().map(|&p| avail[p]));
            let mut pos = self.b;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if idx[pos] < len - self.b + pos {
                    break;
                }
            }
            idx[pos] += 1;
            for q in pos + 1..self.b {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }

    fn decide(mut self) -> Option<Vec<Vec<u32>>> {
        self.initial_deferrals();
        if !self.search() {
            return None;
        }
        self.complete_deferred();
        Some(self.chosen)
    }

    fn search(&mut self) -> bool {
        let Some(v) = self.select() else {
            return true;
        };
        let cands = self.candidates(v);
        for set in cands.chunks_exact(self.b) {
            let mark = self.trail.len();
            if self.assign(v, set) && self.search() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }

    /// Greedy completion of set-aside vertices, most recently deferred first.
    fn complete_deferred(&mut self) {
        let k = self.cover.k();
        let deferred = std::mem::take(&mut self.deferred);
        let mut done = vec![false; self.graph.vertex_count()];
        for (v, s) in self.status.iter().enumerate() {
            done[v] = *s == Status::Assigned;
        }
        for &v in deferred.iter().rev() {
            let mut blocked = vec![false; k];
            for &(w, j) in self.graph.neighbors(v) {
                if done[w as usize] {
                    for &i in &self.chosen[w as usize] {
                        blocked[self.cover.matched(j as usize, w, i) as usize] = true;
                    }
                }
            }
            let set: Vec<u32> = (0..k as u32)
                .filter(|&i| !blocked[i as usize])
                .take(self.b)
                .collect();
            assert_eq!(set.len(), self.b, "deferred vertex {v} could not be completed");
            self.chosen[v as usize] = set;
            done[v as usize] = true;
        }
    }

    fn count(mut self) -> u64 {
        self.count_rec()
    }

    fn count_rec(&mut self) -> u64 {
        let Some(v) = self.select() else {
            return 1;
        };
        let cands = self.candidates(v);
        let mut total = 0;
        for set in cands.chunks_exact(self.b) {
            let mark = self.trail.len();
            if self.assign(v, set) {
                total += self.count_rec();
            }
            self.undo_to(mark);
        }
        total
    }
}
