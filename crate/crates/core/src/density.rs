//! Exact maximum density `max |E(H)| / |V(H)|` over nonempty subgraphs.
//!
//! The maximum is attained by an induced subgraph, so only vertex subsets are
//! searched. [`max_density_exact`] uses the parametric min-cut construction for
//! densest subgraph with exact rational guesses; [`max_density_brute_force`]
//! enumerates subsets and serves as its oracle on small graphs.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Guard, Result};
use crate::graph::{Graph, Vertex};

pub const BRUTE_FORCE_MAX_VERTICES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityReport {
    /// `m / n` of the whole graph.
    pub density: BigRational,
    /// Maximum density over nonempty subgraphs.
    pub max_density: BigRational,
    /// Vertex subset whose induced subgraph attains `max_density`, sorted.
    pub witness: Vec<Vertex>,
}

pub fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn edgeless_report() -> DensityReport {
    DensityReport {
        density: BigRational::zero(),
        max_density: BigRational::zero(),
        witness: vec![0],
    }
}

/// Maximum density via binary search over rational density guesses, each
/// decided by one max-flow computation. Stops once the search interval is
/// narrower than `1/(n(n-1))`, the minimum gap between distinct densities.
pub fn max_density_exact(g: &Graph) -> DensityReport {
    let n = g.vertex_count();
    let m = g.edge_count();
    if m == 0 {
        return edgeless_report();
    }
    let density = ratio(m, n);
    let gap = ratio(1, n * (n - 1));
    let mut witness: Vec<Vertex> = (0..n as Vertex).collect();
    let mut lo = density.clone();
    let mut hi = ratio(n - 1, 2);
    let two = BigRational::from_integer(BigInt::from(2));
    while &hi - &lo >= gap {
        let mid = (&lo + &hi) / &two;
        match denser_than(g, &mid) {
            Some(sub) => {
                lo = ratio(g.induced_edge_count(&sub), sub.len());
                witness = sub;
            }
            None => hi = mid,
        }
    }
    DensityReport {
        density,
        max_density: lo,
        witness,
    }
}

/// Returns a vertex set of density strictly greater than `guess`, if any.
fn denser_than(g: &Graph, guess: &BigRational) -> Option<Vec<Vertex>> {
    let p = guess.numer().to_i128().expect("density numerator fits in i128");
    let q = guess.denom().to_i128().expect("density denominator fits in i128");
    let n = g.vertex_count();
    let m = g.edge_count() as i128;
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for v in 0..n {
        net.add_arc(s, v, m * q);
        let deg = g.degree(v as Vertex) as i128;
        net.add_arc(v, t, m * q + 2 * p - deg * q);
    }
    for &(u, v) in g.edges() {
        net.add_edge(u as usize, v as usize, q);
    }
    let cut = net.max_flow(s, t);
    if cut >= m * q * n as i128 {
        return None;
    }
    let side = net.source_side(s);
    let sub: Vec<Vertex> = (0..n).filter(|&v| side[v]).map(|v| v as Vertex).collect();
    debug_assert!(!sub.is_empty());
    Some(sub)
}

/// Exhaustive maximum over all nonempty vertex subsets. Rejects `n > 20`.
pub fn max_density_brute_force(g: &Graph) -> Result<DensityReport> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::guard(
            Guard::BruteForceVertices,
            format!("graph has {n} vertices"),
        ));
    }
    if g.edge_count() == 0 {
        return Ok(edgeless_report());
    }
    let adj: Vec<u32> = (0..n as Vertex)
        .map(|v| g.neighbors(v).iter().fold(0u32, |acc, &(w, _)| acc | 1 << w))
        .collect();
    // Best (edges, size) compared as fractions by cross-multiplication.
    let mut best = (0usize, 1usize, 1u32);
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        let twice: u32 = (0..n)
            .filter(|&v| mask >> v & 1 == 1)
            .map(|v| (adj[v] & mask).count_ones())
            .sum();
        let edges = twice as usize / 2;
        if edges * best.1 > best.0 * size {
            best = (edges, size, mask);
        }
    }
    let witness = (0..n as Vertex).filter(|&v| best.2 >> v & 1 == 1).collect();
    Ok(DensityReport {
        density: ratio(g.edge_count(), n),
        max_density: ratio(best.0, best.1),
        witness,
    })
}

/// Dinic max flow on integer capacities.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i128>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    fn push(&mut self, from: usize, to: usize, cap: i128) {
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i128) {
        self.push(from, to, cap);
        self.push(to, from, 0);
    }

    /// Undirected edge: capacity `cap` in both directions.
    fn add_edge(&mut self, a: usize, b: usize, cap: i128) {
        self.push(a, b, cap);
        self.push(b, a, cap);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: i128) -> i128 {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.head[u].len() {
            let a = self.head[u][self.iter[u]];
            let v = self.to[a];
            if self.cap[a] > 0 && self.level[v] == self.level[u] + 1 {
                let pushed = self.dfs(v, t, limit.min(self.cap[a]));
                if pushed > 0 {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i128 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.fill(0);
            loop {
                let f = self.dfs(s, t, i128::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }

    /// Nodes reachable from `s` in the residual network after `max_flow`.
    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
