//! The (M, L)-Chimera hardware graph with broken-qubit masks, the
//! intersecting-cliques benchmark graphs, and the embedded Ising container.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// An (M, L)-Chimera graph: an M x M grid of complete-bipartite K_{L,L}
/// unit cells.
///
/// Cells are indexed row-major with 2L consecutive qubit indices per cell:
/// the first L are the left column (coupled vertically, index offset 2LM)
/// and the last L the right column (coupled horizontally, index offset 2L).
/// Broken qubits are removed together with their edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    pub m: usize,
    pub l: usize,
    pub broken: BTreeSet<u32>,
    adjacency: Vec<Vec<u32>>,
}

impl ChimeraGraph {
    pub fn new(m: usize, l: usize, broken: &[u32]) -> Result<Self> {
        if m < 1 || l < 1 {
            return Err(Error::InvalidInput("M and L must be at least 1".into()));
        }
        let total = 2 * l * m * m;
        let broken: BTreeSet<u32> = broken.iter().copied().collect();
        for &q in &broken {
            if q as usize >= total {
                return Err(Error::InvalidInput(format!(
                    "broken qubit {} out of range (total {})",
                    q, total
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); total];
        let ok = |q: u32| !broken.contains(&q);
        let mut connect = |a: u32, b: u32| {
            if ok(a) && ok(b) {
                adjacency[a as usize].push(b);
                adjacency[b as usize].push(a);
            }
        };
        let cell_base = |r: usize, c: usize| ((r * m + c) * 2 * l) as u32;
        for r in 0..m {
            for c in 0..m {
                let base = cell_base(r, c);
                // intra-cell complete bipartite
                for a in 0..l as u32 {
                    for b in 0..l as u32 {
                        connect(base + a, base + l as u32 + b);
                    }
                }
                // vertical couplers on the left column: offset 2LM
                if r + 1 < m {
                    let below = cell_base(r + 1, c);
                    for a in 0..l as u32 {
                        connect(base + a, below + a);
                    }
                }
                // horizontal couplers on the right column: offset 2L
                if c + 1 < m {
                    let right = cell_base(r, c + 1);
                    for a in 0..l as u32 {
                        connect(base + l as u32 + a, right + l as u32 + a);
                    }
                }
            }
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        Ok(Self {
            m,
            l,
            broken,
            adjacency,
        })
    }

    /// Total qubit slots, including broken ones.
    pub fn num_qubit_slots(&self) -> usize {
        2 * self.l * self.m * self.m
    }

    /// Qubits that can actually be used.
    pub fn num_usable_qubits(&self) -> usize {
        self.num_qubit_slots() - self.broken.len()
    }

    pub fn usable_qubits(&self) -> Vec<u32> {
        (0..self.num_qubit_slots() as u32)
            .filter(|q| !self.broken.contains(q))
            .collect()
    }

    pub fn is_usable(&self, q: u32) -> bool {
        (q as usize) < self.num_qubit_slots() && !self.broken.contains(&q)
    }

    pub fn neighbors(&self, q: u32) -> &[u32] {
        &self.adjacency[q as usize]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(|r| r.len()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (q, row) in self.adjacency.iter().enumerate() {
            for &r in row {
                if (q as u32) < r {
                    out.push((q as u32, r));
                }
            }
        }
        out
    }

    /// First qubit index of cell (row, col).
    pub fn cell_base(&self, row: usize, col: usize) -> u32 {
        ((row * self.m + col) * 2 * self.l) as u32
    }

    /// Left-column qubit `offset` of cell (row, col); couples vertically.
    pub fn left_qubit(&self, row: usize, col: usize, offset: usize) -> u32 {
        debug_assert!(offset < self.l);
        self.cell_base(row, col) + offset as u32
    }

    /// Right-column qubit `offset` of cell (row, col); couples horizontally.
    pub fn right_qubit(&self, row: usize, col: usize, offset: usize) -> u32 {
        debug_assert!(offset < self.l);
        self.cell_base(row, col) + (self.l + offset) as u32
    }

    pub fn to_edge_list_text(&self) -> String {
        let mut s = format!(
            "# chimera M={} L={} qubits={} usable={}\n",
            self.m,
            self.l,
            self.num_qubit_slots(),
            self.num_usable_qubits()
        );
        for (a, b) in self.edges() {
            s.push_str(&format!("{} {}\n", a, b));
        }
        s
    }
}

/// The intersecting-cliques graph IC_{n,n}: n^2 vertices indexed `(v, t)`
/// (flat id `v*n + t`) with all pairs sharing `v` and all pairs sharing `t`
/// joined. It equals the interaction graph of the direct Hamiltonian-path
/// QUBO on the complete graph K_n.
pub fn ic_graph(n: usize) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(n * n);
    let id = |v: usize, t: usize| (v * n + t) as u32;
    for v in 0..n {
        for t1 in 0..n {
            for t2 in t1 + 1..n {
                g.add_edge(id(v, t1), id(v, t2)); // same site
                g.add_edge(id(t1, v), id(t2, v)); // same time
            }
        }
    }
    g
}

/// An Ising model laid out on a Chimera graph: fields on usable qubits,
/// couplings only on existing hardware edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareIsing {
    pub graph: ChimeraGraph,
    /// Local field per qubit slot (zero entries for unused/broken qubits).
    pub fields: Vec<f64>,
    /// Couplings keyed by hardware edge `(a, b)`, `a < b`.
    pub couplings: BTreeMap<(u32, u32), f64>,
    pub offset: f64,
}

impl HardwareIsing {
    pub fn new(graph: ChimeraGraph) -> Self {
        let n = graph.num_qubit_slots();
        Self {
            graph,
            fields: vec![0.0; n],
            couplings: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn set_field(&mut self, q: u32, h: f64) -> Result<()> {
        if !self.graph.is_usable(q) {
            return Err(Error::InvalidInput(format!("qubit {} is broken or out of range", q)));
        }
        self.fields[q as usize] = h;
        Ok(())
    }

    pub fn set_coupling(&mut self, a: u32, b: u32, j: f64) -> Result<()> {
        if !self.graph.has_edge(a, b) {
            return Err(Error::InvalidInput(format!(
                "no hardware edge between qubits {} and {}",
                a, b
            )));
        }
        let key = (a.min(b), a.max(b));
        if j == 0.0 {
            self.couplings.remove(&key);
        } else {
            self.couplings.insert(key, j);
        }
        Ok(())
    }

    /// Energy `offset - sum h_q s_q + sum J_ab s_a s_b` of a full spin
    /// configuration (entries at broken qubits are ignored).
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.graph.num_qubit_slots() {
            return Err(Error::InvalidInput(format!(
                "spin vector covers {} of {} qubit slots",
                spins.len(),
                self.graph.num_qubit_slots()
            )));
        }
        let mut e = self.offset;
        for q in self.graph.usable_qubits() {
            e -= self.fields[q as usize] * spins[q as usize] as f64;
        }
        for (&(a, b), &j) in &self.couplings {
            e += j * spins[a as usize] as f64 * spins[b as usize] as f64;
        }
        Ok(e)
    }
}
