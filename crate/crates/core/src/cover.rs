//! Full `k`-fold DP-covers.
//!
//! A cover of `G` attaches to every edge `j = (u, v)`, `u < v`, a permutation
//! `σ_j` of `0..k`: the cover vertex `(u, i)` is matched to `(v, σ_j(i))`.
//! The lists `L(v) = {(v, i)}` are implicit.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Guard, Result};
use crate::graph::{Graph, Vertex};
use crate::rng::Seed;

/// Maximum `(k!)^m` accepted by [`enumerate_covers`].
pub const ENUMERATION_GUARD: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover<'g> {
    graph: &'g Graph,
    k: usize,
    /// Row-major `m x k`: `forward[j*k + i] = σ_j(i)`.
    forward: Vec<u32>,
    /// Row-major inverses: `backward[j*k + σ_j(i)] = i`.
    backward: Vec<u32>,
}

impl<'g> Cover<'g> {
    /// Builds a cover from one image sequence per edge, validating each.
    pub fn from_perms(graph: &'g Graph, k: usize, perms: &[Vec<u32>]) -> Result<Self> {
        validate_cover(graph, k, perms).map_err(Error::InvalidCover)?;
        let forward: Vec<u32> = perms.iter().flatten().copied().collect();
        Ok(Self::from_flat(graph, k, forward))
    }

    fn from_flat(graph: &'g Graph, k: usize, forward: Vec<u32>) -> Self {
        let mut backward = vec![0u32; forward.len()];
        for (j, row) in forward.chunks_exact(k.max(1)).enumerate() {
            for (i, &img) in row.iter().enumerate() {
                backward[j * k + img as usize] = i as u32;
            }
        }
        Cover {
            graph,
            k,
            forward,
            backward,
        }
    }

    /// Every edge carries the identity matching.
    pub fn identity(graph: &'g Graph, k: usize) -> Result<Self> {
        check_k(k)?;
        let forward = (0..graph.edge_count())
            .flat_map(|_| 0..k as u32)
            .collect();
        Ok(Self::from_flat(graph, k, forward))
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Image sequence `σ_j(0), ..., σ_j(k-1)` of edge `j`.
    pub fn perm(&self, j: usize) -> &[u32] {
        &self.forward[j * self.k..(j + 1) * self.k]
    }

    /// Index at the other endpoint of edge `j` matched to index `i` at `from`.
    #[inline]
    pub fn matched(&self, j: usize, from: Vertex, i: u32) -> u32 {
        let (u, _) = self.graph.edges()[j];
        if from == u {
            self.forward[j * self.k + i as usize]
        } else {
            self.backward[j * self.k + i as usize]
        }
    }

    /// Re-checks the bijection invariant on every edge.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let perms: Vec<Vec<u32>> = (0..self.graph.edge_count())
            .map(|j| self.perm(j).to_vec())
            .collect();
        validate_cover(self.graph, self.k, &perms)
    }

    /// Lexicographic rank of each edge permutation.
    pub fn ranks(&self) -> Vec<u64> {
        (0..self.graph.edge_count())
            .map(|j| perm_rank(self.perm(j)))
            .collect()
    }

    /// Text form: line `k`, then `u v : p0 ... p(k-1)` per edge in edge order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.k);
        for (j, &(u, v)) in self.graph.edges().iter().enumerate() {
            let _ = write!(out, "{u} {v} :");
            for p in self.perm(j) {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form against `graph`; edge lines must follow the
    /// graph's edge order.
    pub fn parse(graph: &'g Graph, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (kline, kstr) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing fold count line"))?;
        let k: usize = kstr
            .parse()
            .map_err(|_| Error::parse(kline, format!("bad fold count {kstr:?}")))?;
        if k == 0 {
            return Err(Error::parse(kline, "fold count must be >= 1"));
        }
        let mut perms = Vec::with_capacity(graph.edge_count());
        let mut last = kline;
        for (lineno, line) in lines {
            last = lineno;
            let j = perms.len();
            let Some(&(eu, ev)) = graph.edges().get(j) else {
                return Err(Error::parse(lineno, "more edge lines than graph edges"));
            };
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, "expected \"u v : p0 ... p(k-1)\""))?;
            let ends: Vec<&str> = head.split_whitespace().collect();
            if ends != [eu.to_string(), ev.to_string()] {
                return Err(Error::parse(
                    lineno,
                    format!("expected edge {eu} {v}, found {head:?}", v = ev),
                ));
            }
            let perm = tail
                .split_whitespace()
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|_| Error::parse(lineno, format!("bad index {s:?}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            if let Err(reason) = check_perm(&perm, k) {
                return Err(Error::parse(lineno, reason));
            }
            perms.push(perm);
        }
        if perms.len() != graph.edge_count() {
            return Err(Error::parse(
                last,
                format!("expected {} edge lines, found {}", graph.edge_count(), perms.len()),
            ));
        }
        Cover::from_perms(graph, k, &perms)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("fold count k must be >= 1"));
    }
    if k > u32::MAX as usize {
        return Err(Error::invalid("fold count too large"));
    }
    Ok(())
}

fn check_perm(perm: &[u32], k: usize) -> std::result::Result<(), String> {
    if perm.len() != k {
        return Err(format!("permutation has {} entries, expected {k}", perm.len()));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p as usize >= k {
            return Err(format!("image {p} out of range 0..{k}"));
        }
        if std::mem::replace(&mut seen[p as usize], true) {
            return Err(format!("image {p} repeated"));
        }
    }
    Ok(())
}

/// `Ok` iff there is one permutation of `0..k` per edge of `graph`.
pub fn validate_cover(graph: &Graph, k: usize, perms: &[Vec<u32>]) -> std::result::Result<(), String> {
    if k == 0 {
        return Err("fold count must be >= 1".into());
    }
    if perms.len() != graph.edge_count() {
        return Err(format!(
            "{} permutations for {} edges",
            perms.len(),
            graph.edge_count()
        ));
    }
    for (j, p) in perms.iter().enumerate() {
        check_perm(p, k).map_err(|e| format!("edge {j}: {e}"))?;
    }
    Ok(())
}

/// Uniformly random cover: each edge gets an independent uniform permutation
/// drawn by Fisher–Yates from substream `(seed, edge index)`.
pub fn sample_cover(graph: &Graph, k: usize, seed: Seed) -> Result<Cover<'_>> {
    check_k(k)?;
    let m = graph.edge_count();
    let base = ChaCha8Rng::seed_from_u64(seed.0);
    let mut forward = Vec::with_capacity(m * k);
    for j in 0..m {
        let mut rng = base.clone();
        rng.set_stream(j as u64);
        let start = forward.len();
        forward.extend(0..k as u32);
        shuffle(&mut forward[start..], &mut rng);
    }
    Ok(Cover::from_flat(graph, k, forward))
}

/// Fisher–Yates with unbiased bounded draws.
fn shuffle<R: Rng>(items: &mut [u32], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let r = rng.random_range(0..=i as u32) as usize;
        items.swap(i, r);
    }
}

/// Lexicographic rank of a permutation of `0..k` (`k <= 20`).
pub fn perm_rank(perm: &[u32]) -> u64 {
    let k = perm.len();
    let mut rank = 0u64;
    for i in 0..k {
        let smaller_after = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count() as u64;
        rank = rank * (k - i) as u64 + smaller_after;
    }
    rank
}

/// Inverse of [`perm_rank`].
pub fn perm_unrank(k: usize, mut rank: u64) -> Vec<u32> {
    let mut digits = vec![0u64; k];
    for i in (0..k).rev() {
        let radix = (k - i) as u64;
        digits[i] = rank % radix;
        rank /= radix;
    }
    let mut pool: Vec<u32> = (0..k as u32).collect();
    digits.iter().map(|&d| pool.remove(d as usize)).collect()
}

/// `k!` if it fits in `u64`.
pub fn factorial(k: usize) -> Option<u64> {
    (1..=k as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))
}

/// Number of covers `(k!)^m`, if it fits in `u64`.
pub fn cover_count(graph: &Graph, k: usize) -> Option<u64> {
    factorial(k)?.checked_pow(graph.edge_count().try_into().ok()?)
}

/// Iterator over every cover of `graph`, in mixed-radix order of the per-edge
/// permutation ranks with the last edge varying fastest.
pub struct CoverEnumerator<'g> {
    graph: &'g Graph,
    k: usize,
    table: Vec<Vec<u32>>,
    digits: Vec<usize>,
    done: bool,
}

pub fn enumerate_covers(graph: &Graph, k: usize) -> Result<CoverEnumerator<'_>> {
    check_k(k)?;
    match cover_count(graph, k) {
        Some(c) if c <= ENUMERATION_GUARD => {}
        _ => {
            return Err(Error::guard(
                Guard::CoverEnumeration,
                format!("({k}!)^{} covers", graph.edge_count()),
            ))
        }
    }
    let table = if graph.edge_count() == 0 {
        Vec::new()
    } else {
        let f = factorial(k).expect("checked by guard");
        (0..f).map(|r| perm_unrank(k, r)).collect()
    };
    Ok(CoverEnumerator {
        graph,
        k,
        table,
        digits: vec![0; graph.edge_count()],
        done: false,
    })
}

impl<'g> Iterator for CoverEnumerator<'g> {
    type Item = Cover<'g>;

    fn next(&mut self) -> Option<Cover<'g>> {
        if self.done {
            return None;
        }
        let forward: Vec<u32> = self
            .digits
            .iter()
            .flat_map(|&d| self.table[d].iter().copied())
            .collect();
        let cover = Cover::from_flat(self.graph, self.k, forward);
        // Advance the mixed-radix counter.
        let radix = self.table.len();
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < radix {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(cover)
    }
}

/// Restriction of `cover` to the subgraph `sub`, embedded by `vertex_map`
/// (`vertex_map[x]` is the image of `sub`'s vertex `x`). An edge whose
/// embedding reverses the `u < v` orientation receives the inverse permutation.
pub fn subcover<'s>(cover: &Cover<'_>, sub: &'s Graph, vertex_map: &[Vertex]) -> Result<Cover<'s>> {
    let host = cover.graph();
    if vertex_map.len() != sub.vertex_count() {
        return Err(Error::invalid(format!(
            "vertex map has {} entries for {} vertices",
            vertex_map.len(),
            sub.vertex_count()
        )));
    }
    let mut used = vec![false; host.vertex_count()];
    for &x in vertex_map {
        if x as usize >= host.vertex_count() {
            return Err(Error::invalid(format!("vertex {x} not in the host graph")));
        }
        if std::mem::replace(&mut used[x as usize], true) {
            return Err(Error::invalid(format!("vertex map is not injective at {x}")));
        }
    }
    let k = cover.k();
    let mut forward = Vec::with_capacity(sub.edge_count() * k);
    for &(x, y) in sub.edges() {
        let (hx, hy) = (vertex_map[x as usize], vertex_map[y as usize]);
        let j = host.edge_between(hx, hy).ok_or_else(|| {
            Error::invalid(format!("edge ({x},{y}) maps to non-edge ({hx},{hy})"))
        })?;
        if hx < hy {
            forward.extend_from_slice(cover.perm(j));
        } else {
            forward.extend_from_slice(&cover.backward[j * k..(j + 1) * k]);
        }
    }
    Ok(Cover::from_flat(sub, k, forward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete;

    #[test]
    fn sampling_is_deterministic() {
        let g = complete(6).unwrap();
        assert_eq!(
            sample_cover(&g, 5, Seed(3)).unwrap(),
            sample_cover(&g, 5, Seed(3)).unwrap()
        );
        assert_ne!(
            sample_cover(&g, 5, Seed(3)).unwrap(),
            sample_cover(&g, 5, Seed(4)).unwrap()
        );
    }

    #[test]
    fn k_one_is_identity() {
        let g = complete(4).unwrap();
        let c = sample_cover(&g, 1, Seed(9)).unwrap();
        assert!((0..6).all(|j| c.perm(j) == [0]));
        assert!(sample_cover(&g, 0, Seed(9)).is_err());
    }

    #[test]
    fn edge_substreams_do_not_depend_on_edge_count() {
        // Edge j draws from stream j, so a prefix of the edge list sees the
        // same permutations.
        let big = complete(5).unwrap();
        let small = Graph::new(5, big.edges()[..4].to_vec()).unwrap();
        let a = sample_cover(&big, 4, Seed(1)).unwrap();
        let b = sample_cover(&small, 4, Seed(1)).unwrap();
        for j in 0..4 {
            assert_eq!(a.perm(j), b.perm(j));
        }
    }

    #[test]
    fn enumeration_counts() {
        let k3 = complete(3).unwrap();
        assert_eq!(enumerate_covers(&k3, 2).unwrap().count(), 8);
        assert_eq!(enumerate_covers(&k3, 1).unwrap().count(), 1);
        let edge = complete(2).unwrap();
        assert_eq!(enumerate_covers(&edge, 3).unwrap().count(), 6);
        assert!(matches!(
            enumerate_covers(&complete(5).unwrap(), 3),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_is_mixed_radix_order() {
        let k3 = complete(3).unwrap();
        let ranks: Vec<Vec<u64>> = enumerate_covers(&k3, 2).unwrap().map(|c| c.ranks()).collect();
        for (idx, r) in ranks.iter().enumerate() {
            let value = r.iter().fold(0u64, |acc, &d| acc * 2 + d);
            assert_eq!(value, idx as u64);
        }
    }

    #[test]
    fn rank_unrank() {
        for k in 1..=5 {
            let f = factorial(k).unwrap();
            for r in 0..f {
                assert_eq!(perm_rank(&perm_unrank(k, r)), r);
            }
        }
        assert_eq!(perm_unrank(3, 0), vec![0, 1, 2]);
        assert_eq!(perm_unrank(3, 5), vec![2, 1, 0]);
    }

    #[test]
    fn validation() {
        let g = complete(3).unwrap();
        assert!(sample_cover(&g, 4, Seed(0)).unwrap().validate().is_ok());
        let bad = vec![vec![0, 1], vec![1, 1], vec![1, 0]];
        assert!(validate_cover(&g, 2, &bad).is_err());
        let short = vec![vec![0, 1], vec![1, 0]];
        assert!(validate_cover(&g, 2, &short).is_err());
        let wide = vec![vec![0, 1, 2], vec![1, 0], vec![1, 0]];
        assert!(validate_cover(&g, 2, &wide).is_err());
        assert!(Cover::from_perms(&g, 2, &bad).is_err());
    }

    #[test]
    fn text_format() {
        let g = complete(3).unwrap();
        let c = Cover::from_perms(&g, 3, &[vec![1, 2, 0], vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let text = c.to_text();
        assert_eq!(text, "3\n0 1 : 1 2 0\n0 2 : 0 1 2\n1 2 : 2 1 0\n");
        assert_eq!(Cover::parse(&g, &text).unwrap(), c);
        assert!(Cover::parse(&g, "3\n0 1 : 1 2 0\n").is_err());
        assert!(Cover::parse(&g, "3\n0 1 : 1 1 0\n0 2 : 0 1 2\n1 2 : 2 1 0\n").is_err());
        assert!(Cover::parse(&g, "3\n0 2 : 1 2 0\n0 1 : 0 1 2\n1 2 : 2 1 0\n").is_err());
    }

    #[test]
    fn subcover_identity_and_deletion() {
        let g = complete(4).unwrap();
        let c = sample_cover(&g, 3, Seed(5)).unwrap();
        let ident: Vec<Vertex> = (0..4).collect();
        assert_eq!(subcover(&c, &g, &ident).unwrap(), c);

        let sub = g.without_edges(&[2]).unwrap();
        let sc = subcover(&c, &sub, &ident).unwrap();
        let expected: Vec<&[u32]> = (0..6).filter(|&j| j != 2).map(|j| c.perm(j)).collect();
        let got: Vec<&[u32]> = (0..5).map(|j| sc.perm(j)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn subcover_reversed_orientation_inverts() {
        let g = complete(2).unwrap();
        let c = Cover::from_perms(&g, 3, &[vec![1, 2, 0]]).unwrap();
        // sub vertex 0 -> host 1, sub vertex 1 -> host 0
        let sc = subcover(&c, &g, &[1, 0]).unwrap();
        assert_eq!(sc.perm(0), &[2, 0, 1]);
        // Matching is preserved: host (0,i)~(1,σ(i)) is sub (1,i)~(0,σ(i)).
        for i in 0..3u32 {
            assert_eq!(sc.matched(0, 0, c.matched(0, 0, i)), i);
        }
    }

    #[test]
    fn subcover_rejects_non_embeddings() {
        let g = complete(3).unwrap();
        let c = sample_cover(&g, 2, Seed(1)).unwrap();
        let path = crate::graph::path(3).unwrap();
        assert!(subcover(&c, &path, &[0, 0, 1]).is_err());
        assert!(subcover(&c, &path, &[0, 1]).is_err());
        assert!(subcover(&c, &path, &[0, 1, 7]).is_err());
        let p = crate::graph::path(3).unwrap();
        let host = crate::graph::path(3).unwrap();
        let hc = sample_cover(&host, 2, Seed(1)).unwrap();
        assert!(subcover(&hc, &p, &[0, 2, 1]).is_err());
    }

    #[test]
    fn matched_is_an_involution_across_endpoints() {
        let g = complete(4).unwrap();
        let c = sample_cover(&g, 6, Seed(12)).unwrap();
        for (j, &(u, v)) in g.edges().iter().enumerate() {
            for i in 0..6 {
                assert_eq!(c.matched(j, v, c.matched(j, u, i)), i);
            }
        }
    }
}
