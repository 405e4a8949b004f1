//! Simple undirected graphs with an ordered edge list.
//!
//! The position of an edge in [`Graph::edges`] is significant: covers attach
//! one permutation per edge position, so two graphs with the same edge set
//! listed in different orders are different values.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::Seed;

/// Vertex identifier, 0-based.
pub type Vertex = u32;

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    name: Option<String>,
    /// `adjacency[v]` lists `(neighbor, edge index)` pairs in edge order.
    adjacency: Vec<Vec<(Vertex, u32)>>,
    edge_index: HashMap<(Vertex, Vertex), u32>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph on vertices `0..n`. Every edge must satisfy `u < v < n`
    /// and appear at most once.
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a graph needs at least one vertex"));
        }
        if n > Vertex::MAX as usize {
            return Err(Error::invalid(format!("vertex count {n} too large")));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (j, &(u, v)) in edges.iter().enumerate() {
            if u >= v {
                return Err(Error::invalid(format!(
                    "edge {j} = ({u},{v}) must satisfy u < v"
                )));
            }
            if v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge {j} = ({u},{v}) has an endpoint outside 0..{n}"
                )));
            }
            if edge_index.insert((u, v), j as u32).is_some() {
                return Err(Error::invalid(format!("edge ({u},{v}) appears twice")));
            }
            adjacency[u as usize].push((v, j as u32));
            adjacency[v as usize].push((u, j as u32));
        }
        Ok(Graph {
            n,
            edges,
            name: None,
            adjacency,
            edge_index,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Neighbors of `v` paired with the index of the connecting edge.
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, u32)] {
        &self.adjacency[v as usize]
    }

    /// Index of the edge `{u, v}` in the edge list, in either orientation.
    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edge_index.get(&key).map(|&j| j as usize)
    }

    /// Number of edges with both endpoints in `vertices`.
    pub fn induced_edge_count(&self, vertices: &[Vertex]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in vertices {
            inside[v as usize] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v)| inside[u as usize] && inside[v as usize])
            .count()
    }

    /// Graph obtained by deleting the edges at the given positions, keeping
    /// the relative order of the remaining edges.
    pub fn without_edges(&self, removed: &[usize]) -> Result<Graph> {
        let mut keep = vec![true; self.edges.len()];
        for &j in removed {
            if j >= keep.len() {
                return Err(Error::invalid(format!("no edge at position {j}")));
            }
            keep[j] = false;
        }
        let edges = self
            .edges
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(&e, _)| e)
            .collect();
        Graph::new(self.n, edges)
    }

    /// Parses the text interchange format: a header line `n m` followed by
    /// `m` lines `u v`. Lines starting with `#` and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header line \"n m\""))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(hline, "header must be \"n m\""));
        }
        let n: usize = parse_num(fields[0], hline)?;
        let m: usize = parse_num(fields[1], hline)?;
        let mut edges = Vec::with_capacity(m);
        let mut last_line = hline;
        for (lineno, line) in lines {
            last_line = lineno;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::parse(lineno, "edge line must be \"u v\""));
            }
            if edges.len() == m {
                return Err(Error::parse(lineno, format!("more than {m} edge lines")));
            }
            edges.push((parse_num(f[0], lineno)?, parse_num(f[1], lineno)?));
        }
        if edges.len() != m {
            return Err(Error::parse(
                last_line,
                format!("expected {m} edges, found {}", edges.len()),
            ));
        }
        Graph::new(n, edges).map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::parse(hline, msg),
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "# {name}");
        }
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("expected a nonnegative integer, got {s:?}")))
}

/// Complete graph `K_q`, edges in lexicographic order.
pub fn complete(q: usize) -> Result<Graph> {
    if q == 0 {
        return Err(Error::invalid("complete graph needs q >= 1"));
    }
    let mut edges = Vec::with_capacity(q * (q - 1) / 2);
    for u in 0..q as Vertex {
        for v in u + 1..q as Vertex {
            edges.push((u, v));
        }
    }
    Ok(Graph::new(q, edges)?.with_name(format!("K{q}")))
}

/// Complete multipartite graph `K_{parts x size}`; vertex `v` lies in part `v / size`.
pub fn complete_multipartite(parts: usize, size: usize) -> Result<Graph> {
    if parts < 2 {
        return Err(Error::invalid("complete multipartite graph needs at least 2 parts"));
    }
    if size == 0 {
        return Err(Error::invalid("parts must have size >= 1"));
    }
    let n = parts * size;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if u / size != v / size {
                edges.push((u as Vertex, v as Vertex));
            }
        }
    }
    Ok(Graph::new(n, edges)?.with_name(format!("K{parts}x{size}")))
}

/// Disjoint union of `t` copies of `base`; copy `r` occupies the vertex block
/// `[r*n, (r+1)*n)` and edges are listed copy by copy.
pub fn disjoint_copies(t: usize, base: &Graph) -> Result<Graph> {
    if t == 0 {
        return Err(Error::invalid("need at least one copy"));
    }
    let n = base.vertex_count();
    let mut edges = Vec::with_capacity(t * base.edge_count());
    for r in 0..t {
        let off = (r * n) as Vertex;
        edges.extend(base.edges().iter().map(|&(u, v)| (u + off, v + off)));
    }
    let g = Graph::new(t * n, edges)?;
    Ok(match base.name() {
        Some(name) => g.with_name(format!("{t}{name}")),
        None => g,
    })
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Result<Graph> {
    let edges = (1..n as Vertex).map(|v| (v - 1, v)).collect();
    Ok(Graph::new(n, edges)?.with_name(format!("P{n}")))
}

/// Cycle on `n >= 3` vertices, edges in lexicographic order.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid("cycle needs n >= 3"));
    }
    let mut edges: Vec<(Vertex, Vertex)> = (1..n as Vertex).map(|v| (v - 1, v)).collect();
    edges.insert(1, (0, n as Vertex - 1));
    edges.sort_unstable();
    Ok(Graph::new(n, edges)?.with_name(format!("C{n}")))
}

/// Erdős–Rényi `G(n, p)`: every pair is an edge independently with
/// probability `p`. Edges are listed lexicographically.
pub fn uniform_random(n: usize, p: f64, seed: Seed) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} not in [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let mut edges = Vec::new();
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges)?.with_name(format!("G({n},{p})")))
}

/// Random graph in which vertex `i` is joined to `min(i, d)` distinct earlier
/// vertices chosen uniformly; the result is `d`-degenerate.
pub fn random_degenerate(n: usize, d: usize, seed: Seed) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let mut edges = Vec::new();
    for v in 1..n {
        let mut back: Vec<usize> = index::sample(&mut rng, v, d.min(v)).into_vec();
        back.sort_unstable();
        edges.extend(back.into_iter().map(|u| (u as Vertex, v as Vertex)));
    }
    edges.sort_unstable();
    Ok(Graph::new(n, edges)?.with_name(format!("D({n},{d})")))
}
