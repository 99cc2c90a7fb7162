//! Compatibility graphs and maximal-clique enumeration.

use crate::error::{Error, Result};
use crate::geometry::{Movement, MovementConflictTable};
use crate::platoon::PlatoonId;

pub const DEFAULT_VERTEX_CAP: usize = 64;

/// Dense bitset over vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            words: vec![0; n.div_ceil(64).max(1)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        VertexSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        VertexSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn intersection_count(&self, other: &Self) -> u32 {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(k * 64 + b)
            })
        })
    }
}

/// Undirected graph whose edges join platoons with non-conflicting paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityGraph {
    pub vertices: Vec<PlatoonId>,
    adjacency: Vec<VertexSet>,
}

impl CompatibilityGraph {
    /// Graph on `n` vertices labelled `0..n` with the given undirected edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![VertexSet::empty(n); n];
        for &(a, b) in edges {
            if a != b {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        CompatibilityGraph {
            vertices: (0..n as PlatoonId).collect(),
            adjacency,
        }
    }

    /// Joins every pair of platoons whose movements do not conflict.
    pub fn from_movements(platoons: &[(PlatoonId, Movement)], table: &MovementConflictTable) -> Result<Self> {
        let n = platoons.len();
        for (_, m) in platoons {
            if !table.covers(*m) {
                return Err(Error::Configuration(format!("movement {m} is not in the conflict table")));
            }
        }
        let mut adjacency = vec![VertexSet::empty(n); n];
        for i in 0..n {
            for j in i + 1..n {
                if !table.conflict_by_index(platoons[i].1.index(), platoons[j].1.index()) {
                    adjacency[i].insert(j);
                    adjacency[j].insert(i);
                }
            }
        }
        Ok(CompatibilityGraph {
            vertices: platoons.iter().map(|(id, _)| *id).collect(),
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(k, &a)| members[k + 1..].iter().all(|&b| self.adjacent(a, b)))
    }
}

/// All maximal cliques, as sorted vertex-index lists in lexicographic order.
/// Bron–Kerbosch with Tomita pivoting.
pub fn enumerate_maximal_cliques(graph: &CompatibilityGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = graph.len();
    if n > cap {
        return Err(Error::Capacity { vertices: n, cap });
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut r = Vec::new();
    expand(graph, &mut r, VertexSet::full(n), VertexSet::empty(n), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    Ok(out)
}

fn expand(
    graph: &CompatibilityGraph,
    r: &mut Vec<usize>,
    mut p: VertexSet,
    mut x: VertexSet,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.intersection_count(&graph.adjacency[u]), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let candidates: Vec<usize> = p.difference(&graph.adjacency[pivot]).iter().collect();
    for v in candidates {
        let nv = &graph.adjacency[v];
        r.push(v);
        expand(graph, r, p.intersection(nv), x.intersection(nv), out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}
