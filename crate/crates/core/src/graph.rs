//! Simple undirected graphs used as inputs to the problem generators and as
//! QUBO interaction graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Undirected graph on vertices `0..num_vertices` with no self-loops and no
/// duplicate edges. Edges are stored normalized as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    pub num_vertices: usize,
    edges: BTreeSet<(u32, u32)>,
}

impl UndirectedGraph {
    pub fn new(num_vertices: usize) -> Self {
        Self {
            num_vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(num_vertices: usize) -> Self {
        let mut g = Self::new(num_vertices);
        for u in 0..num_vertices as u32 {
            for v in u + 1..num_vertices as u32 {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Adds an edge, normalizing the endpoint order. Self-loops are rejected.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        assert!(u != v, "self-loops are not allowed");
        assert!(
            (u as usize) < self.num_vertices && (v as usize) < self.num_vertices,
            "edge endpoint out of range"
        );
        let e = if u < v { (u, v) } else { (v, u) };
        self.edges.insert(e);
    }

    pub fn from_edges(num_vertices: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = Self::new(num_vertices);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let e = if u < v { (u, v) } else { (v, u) };
        self.edges.contains(&e)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort_unstable();
        out
    }

    /// Adjacency lists for all vertices.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: u32) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Edge-list text: one `u v` pair per line, preceded by a header comment.
    pub fn to_edge_list_text(&self) -> String {
        let mut s = format!("# vertices {}\n# edges {}\n", self.num_vertices, self.edges.len());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{} {}\n", u, v));
        }
        s
    }
}
