//! Smallest-last degeneracy orderings.

use std::collections::BTreeSet;

use crate::graph::{Graph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyOrdering {
    /// Vertices in processing order.
    pub order: Vec<Vertex>,
    /// `back_degrees[i]` = neighbors of `order[i]` that appear before position `i`.
    pub back_degrees: Vec<usize>,
    /// Maximum back degree; equals the degeneracy for smallest-last orderings.
    pub degeneracy: usize,
}

impl DegeneracyOrdering {
    /// Smallest-last ordering: repeatedly delete a vertex of minimum remaining
    /// degree (smallest id on ties) and reverse the deletion sequence.
    pub fn smallest_last(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut degree: Vec<usize> = (0..n as Vertex).map(|v| g.degree(v)).collect();
        let mut queue: BTreeSet<(usize, Vertex)> =
            (0..n as Vertex).map(|v| (degree[v as usize], v)).collect();
        let mut deleted = vec![false; n];
        let mut deletion = Vec::with_capacity(n);
        let mut back = Vec::with_capacity(n);
        while let Some((deg, v)) = queue.pop_first() {
            deleted[v as usize] = true;
            deletion.push(v);
            back.push(deg);
            for &(w, _) in g.neighbors(v) {
                let wi = w as usize;
                if !deleted[wi] {
                    queue.remove(&(degree[wi], w));
                    degree[wi] -= 1;
                    queue.insert((degree[wi], w));
                }
            }
        }
        deletion.reverse();
        back.reverse();
        let degeneracy = back.iter().copied().max().unwrap_or(0);
        DegeneracyOrdering {
            order: deletion,
            back_degrees: back,
            degeneracy,
        }
    }

    /// Ordering given explicitly; back degrees are computed from `g`.
    pub fn from_order(g: &Graph, order: Vec<Vertex>) -> crate::Result<Self> {
        let n = g.vertex_count();
        let mut position = vec![usize::MAX; n];
        if order.len() != n {
            return Err(crate::Error::invalid("ordering must list every vertex once"));
        }
        for (i, &v) in order.iter().enumerate() {
            if v as usize >= n || position[v as usize] != usize::MAX {
                return Err(crate::Error::invalid("ordering must list every vertex once"));
            }
            position[v as usize] = i;
        }
        let back_degrees = back_degrees(g, &order, &position);
        let degeneracy = back_degrees.iter().copied().max().unwrap_or(0);
        Ok(DegeneracyOrdering {
            order,
            back_degrees,
            degeneracy,
        })
    }

    /// `position[v]` = index of `v` in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v as usize] = i;
        }
        pos
    }
}

fn back_degrees(g: &Graph, order: &[Vertex], position: &[usize]) -> Vec<usize> {
    order
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            g.neighbors(v)
                .iter()
                .filter(|&&(w, _)| position[w as usize] < i)
                .count()
        })
        .collect()
}

/// Degeneracy of `g`.
pub fn degeneracy(g: &Graph) -> usize {
    DegeneracyOrdering::smallest_last(g).degeneracy
}
