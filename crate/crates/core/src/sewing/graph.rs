use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::super::metric::DistanceMatrix;

/// Undirected weighted graph in compressed sparse row form.
#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    d: f64,
    v: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed so that `BinaryHeap` pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Graph {
    /// Builds the graph from undirected edges `(a, b, w)`.
    pub fn from_edges(n: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(a, b, _) in edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(a, b, w) in edges {
            for (u, v) in [(a, b), (b, a)] {
                let slot = &mut fill[u as usize];
                targets[*slot] = v;
                weights[*slot] = w;
                *slot += 1;
            }
        }
        Graph {
            offsets,
            targets,
            weights,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    /// Connected components, each sorted, ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Single-source shortest path lengths (Dijkstra with a binary heap).
    pub fn shortest_paths(&self, source: usize) -> Vec<f64> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            d: 0.0,
            v: source as u32,
        });
        while let Some(Entry { d, v }) = heap.pop() {
            let u = v as usize;
            if d > dist[u] {
                continue;
            }
            for (t, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(Entry { d: nd, v: t as u32 });
                }
            }
        }
        dist
    }

    /// All-pairs shortest paths, one Dijkstra run per source in parallel.
    /// Entry `(i, j)`, `i < j`, comes from the run started at `i`.
    pub fn all_pairs(&self) -> DistanceMatrix {
        DistanceMatrix::from_rows(self.node_count(), |i| self.shortest_paths(i))
    }
}
