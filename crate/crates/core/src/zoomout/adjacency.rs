use std::collections::VecDeque;

use crate::image::SuperpixelMap;

/// Undirected superpixel adjacency under 4-connectivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Builds a graph from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(a, b) in edges {
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Self { neighbors }
    }

    pub fn num_superpixels(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, s: usize) -> &[usize] {
        &self.neighbors[s]
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }
}

pub fn build_adjacency(map: &SuperpixelMap) -> AdjacencyGraph {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = labels[y * w + x] as usize;
            if x + 1 < w {
                let q = labels[y * w + x + 1] as usize;
                if p != q {
                    edges.push((p, q));
                }
            }
            if y + 1 < h {
                let q = labels[(y + 1) * w + x] as usize;
                if p != q {
                    edges.push((p, q));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    AdjacencyGraph::from_edges(map.num_superpixels(), &edges)
}

/// Superpixels at most `radius` hops from `s`, including `s`, in ascending order.
pub fn neighbors_within_radius(g: &AdjacencyGraph, s: usize, radius: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.num_superpixels()];
    depth[s] = 0;
    let mut queue = VecDeque::from([s]);
    let mut ball = vec![s];
    while let Some(u) = queue.pop_front() {
        if depth[u] == radius {
            continue;
        }
        for &v in g.neighbors(u) {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                ball.push(v);
                queue.push_back(v);
            }
        }
    }
    ball.sort_unstable();
    ball
}
