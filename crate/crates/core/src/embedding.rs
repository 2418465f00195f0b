//! Minor embedding of QUBO interaction graphs into Chimera hardware:
//! a randomized chain-growth heuristic, a deterministic complete-graph
//! embedder, a triangle packer, embedding metrics, parameter setting for the
//! embedded Ising model, and gauge transforms.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{ChimeraGraph, HardwareIsing};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::pubo::IsingModel;

/// A minor embedding: one disjoint connected set of hardware qubits per
/// logical variable, with every source edge realized by at least one
/// hardware edge between the corresponding sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embedding {
    /// components[i] = sorted qubits representing logical variable i.
    pub components: Vec<Vec<u32>>,
    pub source: UndirectedGraph,
    pub hardware: ChimeraGraph,
}

/// Why an embedding is invalid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingViolation {
    EmptyComponent { var: usize },
    UnusableQubit { var: usize, qubit: u32 },
    Overlap { first: usize, second: usize, qubit: u32 },
    Disconnected { var: usize },
    UnrealizedEdge { first: usize, second: usize },
}

/// Size statistics over the components of an embedding. Percentiles use the
/// nearest-rank convention; the median averages the two middle ranks for an
/// even count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMetrics {
    pub total_size: usize,
    pub average: f64,
    pub median: f64,
    pub p65: usize,
    pub p90: usize,
    pub max: usize,
}

/// Nearest-rank percentile of a sorted slice.
pub fn percentile_nearest_rank<T: Copy>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty());
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Median with the usual mean-of-middles rule for even counts.
pub fn median_of_sorted(sorted: &[f64]) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

impl Embedding {
    /// Checks the three embedding invariants, reporting the first violation.
    pub fn validate(&self) -> std::result::Result<(), EmbeddingViolation> {
        let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
        for (i, comp) in self.components.iter().enumerate() {
            if comp.is_empty() {
                return Err(EmbeddingViolation::EmptyComponent { var: i });
            }
            for &q in comp {
                if !self.hardware.is_usable(q) {
                    return Err(EmbeddingViolation::UnusableQubit { var: i, qubit: q });
                }
                if let Some(&other) = owner.get(&q) {
                    return Err(EmbeddingViolation::Overlap {
                        first: other,
                        second: i,
                        qubit: q,
                    });
                }
                owner.insert(q, i);
            }
            // connectivity within the hardware graph
            let set: BTreeSet<u32> = comp.iter().copied().collect();
            let mut seen = BTreeSet::new();
            let mut stack = vec![comp[0]];
            seen.insert(comp[0]);
            while let Some(q) = stack.pop() {
                for &r in self.hardware.neighbors(q) {
                    if set.contains(&r) && seen.insert(r) {
                        stack.push(r);
                    }
                }
            }
            if seen.len() != set.len() {
                return Err(EmbeddingViolation::Disconnected { var: i });
            }
        }
        for (u, v) in self.source.edges() {
            if self.connecting_edges(u as usize, v as usize).next().is_none() {
                return Err(EmbeddingViolation::UnrealizedEdge {
                    first: u as usize,
                    second: v as usize,
                });
            }
        }
        Ok(())
    }

    /// Hardware edges joining the components of two logical variables, in
    /// ascending `(min, max)` order.
    pub fn connecting_edges<'a>(
        &'a self,
        i: usize,
        j: usize,
    ) -> impl Iterator<Item = (u32, u32)> + 'a {
        let other: BTreeSet<u32> = self.components[j].iter().copied().collect();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for &q in &self.components[i] {
            for &r in self.hardware.neighbors(q) {
                if other.contains(&r) {
                    edges.push((q.min(r), q.max(r)));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges.into_iter()
    }

    pub fn total_size(&self) -> usize {
        self.components.iter().map(|c| c.len()).sum()
    }

    pub fn metrics(&self) -> EmbeddingMetrics {
        let mut sizes: Vec<usize> = self.components.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        let total: usize = sizes.iter().sum();
        let as_f64: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
        EmbeddingMetrics {
            total_size: total,
            average: total as f64 / sizes.len() as f64,
            median: median_of_sorted(&as_f64),
            p65: percentile_nearest_rank(&sizes, 65.0),
            p90: percentile_nearest_rank(&sizes, 90.0),
            max: *sizes.last().unwrap(),
        }
    }

    /// JSON object mapping each logical variable to its qubit list.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (i.to_string(), serde_json::json!(c)))
            .collect();
        serde_json::Value::Object(map)
    }

    /// Rebuilds an embedding from the JSON component map plus its graphs.
    pub fn from_json(
        value: &serde_json::Value,
        source: UndirectedGraph,
        hardware: ChimeraGraph,
    ) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("embedding JSON must be an object".into()))?;
        let mut components = vec![Vec::new(); source.num_vertices];
        for (key, qubits) in obj {
            let var: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("bad logical variable key '{}'", key)))?;
            if var >= components.len() {
                return Err(Error::Parse(format!("logical variable {} out of range", var)));
            }
            let list = qubits
                .as_array()
                .ok_or_else(|| Error::Parse("component must be an array".into()))?;
            let mut qs = Vec::with_capacity(list.len());
            for q in list {
                qs.push(q.as_u64().ok_or_else(|| Error::Parse("bad qubit id".into()))? as u32);
            }
            qs.sort_unstable();
            components[var] = qs;
        }
        Ok(Self {
            components,
            source,
            hardware,
        })
    }
}

/// Settings for the randomized chain-growth embedder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmbedderConfig {
    /// Independent restarts before giving up.
    pub tries: usize,
    /// Improvement sweeps per try.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            tries: 10,
            max_passes: 96,
            seed: 0,
        }
    }
}

struct Router<'a> {
    hw: &'a ChimeraGraph,
    usable: Vec<u32>,
    usage: Vec<u16>,
    /// Congestion history: repeatedly contended qubits get pricier, which
    /// breaks ping-pong stalemates between chains.
    hist: Vec<f64>,
    chains: Vec<Vec<u32>>,
    adj: Vec<Vec<usize>>, // source adjacency
}

impl<'a> Router<'a> {
    fn new(source: &UndirectedGraph, hw: &'a ChimeraGraph) -> Self {
        let adj = source
            .adjacency()
            .into_iter()
            .map(|row| row.into_iter().map(|v| v as usize).collect())
            .collect();
        Self {
            hw,
            usable: hw.usable_qubits(),
            usage: vec![0; hw.num_qubit_slots()],
            hist: vec![0.0; hw.num_qubit_slots()],
            chains: vec![Vec::new(); source.num_vertices],
            adj,
        }
    }

    /// Cost of routing through a qubit: exponential in the number of chains
    /// already there, scaled up by its congestion history.
    fn qubit_weight(&self, q: usize) -> f64 {
        const BASE: f64 = 8.0;
        BASE.powi(self.usage[q].min(12) as i32) * (1.0 + 0.5 * self.hist[q])
    }

    /// Called once per improvement pass.
    fn bump_history(&mut self) {
        for q in 0..self.usage.len() {
            if self.usage[q] > 1 {
                self.hist[q] += (self.usage[q] - 1) as f64;
            }
        }
    }

    fn clear_chain(&mut self, v: usize) {
        for &q in &self.chains[v] {
            self.usage[q as usize] -= 1;
        }
        self.chains[v].clear();
    }

    fn set_chain(&mut self, v: usize, chain: Vec<u32>) {
        for &q in &chain {
            self.usage[q as usize] += 1;
        }
        self.chains[v] = chain;
    }

    /// Node-weighted multi-source shortest paths from a placed chain.
    /// Returns per-qubit distance and the predecessor for path recovery.
    fn dijkstra_from(&self, sources: &[u32]) -> (Vec<f64>, Vec<u32>) {
        let n = self.hw.num_qubit_slots();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = 0.0;
            heap.push(HeapItem { cost: 0.0, qubit: s });
        }
        while let Some(HeapItem { cost, qubit }) = heap.pop() {
            if cost > dist[qubit as usize] {
                continue;
            }
            for &r in self.hw.neighbors(qubit) {
                let next = cost + self.qubit_weight(r as usize);
                if next < dist[r as usize] {
                    dist[r as usize] = next;
                    pred[r as usize] = qubit;
                    heap.push(HeapItem { cost: next, qubit: r });
                }
            }
        }
        (dist, pred)
    }

    /// Routes vertex `v` to all of its already-placed neighbors through a
    /// minimum-cost root qubit.
    fn route(&mut self, v: usize, rng: &mut ChaCha8Rng) -> bool {
        self.clear_chain(v);
        let placed: Vec<usize> = self.adj[v]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();

        if placed.is_empty() {
            // seed at a least-used qubit, breaking ties randomly
            let min_usage = self
                .usable
                .iter()
                .map(|&q| self.usage[q as usize])
                .min()
                .expect("hardware has usable qubits");
            let candidates: Vec<u32> = self
                .usable
                .iter()
                .copied()
                .filter(|&q| self.usage[q as usize] == min_usage)
                .collect();
            let q = *candidates.choose(rng).unwrap();
            self.set_chain(v, vec![q]);
            return true;
        }

        let searches: Vec<(Vec<f64>, Vec<u32>)> = placed
            .iter()
            .map(|&u| self.dijkstra_from(&self.chains[u]))
            .collect();

        // score each candidate root by the summed path costs
        let mut candidates: Vec<(f64, u32)> = Vec::new();
        for &q in &self.usable {
            let mut total = self.qubit_weight(q as usize);
            let mut reachable = true;
            for (dist, _) in &searches {
                if dist[q as usize].is_infinite() {
                    reachable = false;
                    break;
                }
                total += dist[q as usize];
            }
            if reachable {
                candidates.push((total, q));
            }
        }
        if candidates.is_empty() {
            return false;
        }
        // pick randomly among near-optimal roots so restarts explore
        let best_cost = candidates
            .iter()
            .map(|c| c.0)
            .fold(f64::INFINITY, f64::min);
        let near: Vec<u32> = candidates
            .iter()
            .filter(|(c, _)| *c <= best_cost * 1.25 + 1e-9)
            .map(|&(_, q)| q)
            .collect();
        let root = *near.choose(rng).unwrap();

        let mut chain: BTreeSet<u32> = BTreeSet::from([root]);
        for (idx, &u) in placed.iter().enumerate() {
            let (_, pred) = &searches[idx];
            let own: BTreeSet<u32> = self.chains[u].iter().copied().collect();
            let mut q = root;
            while !own.contains(&q) {
                chain.insert(q);
                q = pred[q as usize];
                if q == u32::MAX {
                    return false; // root unreachable (should not happen)
                }
            }
        }
        self.set_chain(v, chain.into_iter().collect());
        self.trim_chain(v);
        true
    }

    fn overused(&self) -> usize {
        self.usage.iter().map(|&u| u.saturating_sub(1) as usize).sum()
    }

    /// Drops qubits from one chain that are needed neither for connectivity
    /// nor for reaching a placed neighbor, preferring to shed shared qubits.
    fn trim_chain(&mut self, v: usize) {
        loop {
            let mut chain = self.chains[v].clone();
            if chain.len() <= 1 {
                return;
            }
            // shed the most contended qubits first
            chain.sort_by_key(|&q| std::cmp::Reverse(self.usage[q as usize]));
            let mut removed = false;
            for &q in &chain {
                let rest: Vec<u32> = self.chains[v].iter().copied().filter(|&x| x != q).collect();
                if !is_connected(self.hw, &rest) {
                    continue;
                }
                let mut covers = true;
                for &u in &self.adj[v] {
                    if self.chains[u].is_empty() {
                        continue;
                    }
                    if !touches(self.hw, &rest, &self.chains[u]) {
                        covers = false;
                        break;
                    }
                }
                if covers {
                    self.usage[q as usize] -= 1;
                    self.chains[v] = rest;
                    removed = true;
                    break;
                }
            }
            if !removed {
                return;
            }
        }
    }

    fn trim(&mut self) {
        for v in 0..self.chains.len() {
            self.trim_chain(v);
        }
    }

    /// Vertices whose chains sit on a qubit claimed by more than one chain.
    fn offenders(&self) -> Vec<usize> {
        (0..self.chains.len())
            .filter(|&v| {
                self.chains[v]
                    .iter()
                    .any(|&q| self.usage[q as usize] > 1)
            })
            .collect()
    }

    /// Vertices whose chains sit on or next to a contended qubit. Ripping
    /// up the whole neighborhood lets a blocked pair find a detour through
    /// space some third chain was holding.
    fn contention_neighborhood(&self) -> Vec<usize> {
        let mut hot = vec![false; self.usage.len()];
        for q in 0..self.usage.len() {
            if self.usage[q] > 1 {
                hot[q] = true;
                for &r in self.hw.neighbors(q as u32) {
                    hot[r as usize] = true;
                }
            }
        }
        (0..self.chains.len())
            .filter(|&v| self.chains[v].iter().any(|&q| hot[q as usize]))
            .collect()
    }
}

fn is_connected(hw: &ChimeraGraph, qubits: &[u32]) -> bool {
    if qubits.is_empty() {
        return false;
    }
    let set: BTreeSet<u32> = qubits.iter().copied().collect();
    let mut seen = BTreeSet::from([qubits[0]]);
    let mut stack = vec![qubits[0]];
    while let Some(q) = stack.pop() {
        for &r in hw.neighbors(q) {
            if set.contains(&r) && seen.insert(r) {
                stack.push(r);
            }
        }
    }
    seen.len() == set.len()
}

fn touches(hw: &ChimeraGraph, a: &[u32], b: &[u32]) -> bool {
    let bs: BTreeSet<u32> = b.iter().copied().collect();
    a.iter()
        .any(|&q| hw.neighbors(q).iter().any(|r| bs.contains(r)))
}

/// Randomized chain-growth minor embedding with weighted shortest-path
/// routing and rip-up-and-reroute improvement passes. Failure is a value,
/// not an error: `None` means no valid embedding was found within the
/// configured tries.
pub fn find_embedding(
    source: &UndirectedGraph,
    hardware: &ChimeraGraph,
    config: &EmbedderConfig,
) -> Option<Embedding> {
    if source.num_vertices == 0 {
        return None;
    }
    if source.num_vertices > hardware.num_usable_qubits() {
        return None;
    }
    for try_idx in 0..config.tries {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::gen::mix_seed(config.seed, try_idx as u64));
        let mut router = Router::new(source, hardware);

        let mut order: Vec<usize> = (0..source.num_vertices).collect();
        order.shuffle(&mut rng);
        let mut ok = true;
        for &v in &order {
            if !router.route(v, &mut rng) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }

        let mut stagnant = 0;
        let mut best_overuse = router.overused();
        for pass in 0..config.max_passes {
            if router.overused() == 0 {
                break;
            }
            // focus on chains touching contended qubits; widen to the
            // contention neighborhood when progress stalls, and shake
            // everything loose every eighth pass
            let mut targets = if pass % 8 == 7 {
                order.clone()
            } else if stagnant >= 4 {
                router.contention_neighborhood()
            } else {
                router.offenders()
            };
            targets.shuffle(&mut rng);
            for &v in &targets {
                if !router.route(v, &mut rng) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
            router.bump_history();
            let overuse = router.overused();
            if std::env::var_os("PLANQUBO_EMBED_TRACE").is_some() {
                eprintln!("try {} pass {}: overuse {}", try_idx, pass, overuse);
            }
            if overuse < best_overuse {
                best_overuse = overuse;
                stagnant = 0;
            } else {
                stagnant += 1;
                if stagnant >= 24 {
                    break;
                }
            }
        }
        if !ok || router.overused() != 0 {
            continue;
        }

        router.trim();
        let embedding = Embedding {
            components: router.chains.clone(),
            source: source.clone(),
            hardware: hardware.clone(),
        };
        debug_assert!(embedding.validate().is_ok());
        if embedding.validate().is_ok() {
            return Some(embedding);
        }
    }
    None
}

#[derive(PartialEq)]
struct HeapItem {
    cost: f64,
    qubit: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on cost, tie-broken by qubit id for determinism
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.qubit.cmp(&self.qubit))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Deterministic complete-graph layout: embeds any source graph with at most
/// M*L + 1 vertices into an unbroken (M, L)-Chimera graph.
///
/// Chain `b*L + a` runs up column `b` on left-column offset `a` and right
/// along row `b` on right-column offset `a`, meeting at diagonal cell
/// `(b, b)`; any two such chains share a cell with an intra-cell edge. The
/// final chain threads the unused cells just below the diagonal (for M = 1,
/// a bipartite splitting of one cell gives K_{L+1} directly).
pub fn clique_embed(source: &UndirectedGraph, hardware: &ChimeraGraph) -> Option<Embedding> {
    if !hardware.broken.is_empty() {
        return None; // layout assumes the full grid
    }
    let m = hardware.m;
    let l = hardware.l;
    let n = source.num_vertices;
    if n == 0 || n > m * l + 1 {
        return None;
    }

    let mut chains: Vec<Vec<u32>> = Vec::with_capacity(m * l + 1);
    if m == 1 {
        for a in 0..l {
            chains.push(vec![
                hardware.left_qubit(0, 0, a),
                hardware.right_qubit(0, 0, a),
            ]);
        }
        // split the last pair into two singleton chains
        let last = chains.pop().unwrap();
        chains.push(vec![last[0]]);
        chains.push(vec![last[1]]);
    } else {
        for b in 0..m {
            for a in 0..l {
                let mut chain = Vec::with_capacity(m + 1);
                for r in 0..=b {
                    chain.push(hardware.left_qubit(r, b, a));
                }
                for c in b..m {
                    chain.push(hardware.right_qubit(b, c, a));
                }
                chains.push(chain);
            }
        }
        // extra chain through the subdiagonal cells (b+1, b), linked by
        // connector cells (b+2, b)
        let mut extra = Vec::new();
        for b in 0..m - 1 {
            for a in 0..l {
                extra.push(hardware.left_qubit(b + 1, b, a));
                extra.push(hardware.right_qubit(b + 1, b, a));
            }
        }
        for b in 0..m.saturating_sub(2) {
            extra.push(hardware.left_qubit(b + 2, b, 0));
            extra.push(hardware.right_qubit(b + 2, b, 0));
        }
        extra.sort_unstable();
        extra.dedup();
        chains.push(extra);
    }

    let embedding = Embedding {
        components: chains.into_iter().take(n).collect(),
        source: source.clone(),
        hardware: hardware.clone(),
    };
    debug_assert!(embedding.validate().is_ok(), "{:?}", embedding.validate());
    Some(embedding)
}

/// Packs a disjoint union of triangles (the direct-map QUBO of an edgeless
/// coloring instance, variables `3v..3v+2` per triangle) into K_{2k,2k}
/// unit cells, two triangles of 4 qubits each per K_{4,4}-equivalent slot:
/// slot j of a cell uses left/right offsets 2j and 2j+1.
///
/// Requires even L; capacity is (L/2) * M^2 triangles on an unbroken grid
/// (cells containing broken qubits lose the affected slots).
pub fn pack_triangles(n_triangles: usize, hardware: &ChimeraGraph) -> Option<Embedding> {
    if hardware.l % 2 != 0 {
        return None;
    }
    let slots_per_cell = hardware.l / 2;
    let mut source = UndirectedGraph::new(3 * n_triangles);
    for v in 0..n_triangles as u32 {
        source.add_edge(3 * v, 3 * v + 1);
        source.add_edge(3 * v, 3 * v + 2);
        source.add_edge(3 * v + 1, 3 * v + 2);
    }

    let mut components: Vec<Vec<u32>> = Vec::with_capacity(3 * n_triangles);
    'outer: for row in 0..hardware.m {
        for col in 0..hardware.m {
            for slot in 0..slots_per_cell {
                if components.len() == 3 * n_triangles {
                    break 'outer;
                }
                let l0 = hardware.left_qubit(row, col, 2 * slot);
                let l1 = hardware.left_qubit(row, col, 2 * slot + 1);
                let r0 = hardware.right_qubit(row, col, 2 * slot);
                let r1 = hardware.right_qubit(row, col, 2 * slot + 1);
                if [l0, l1, r0, r1].iter().any(|&q| !hardware.is_usable(q)) {
                    continue;
                }
                components.push(vec![l0]);
                components.push(vec![r0]);
                components.push(vec![l1, r1]);
            }
        }
    }
    if components.len() != 3 * n_triangles {
        return None;
    }
    let embedding = Embedding {
        components,
        source,
        hardware: hardware.clone(),
    };
    debug_assert!(embedding.validate().is_ok());
    Some(embedding)
}

/// Sets the parameters of the embedded Ising model: each logical field is
/// spread evenly over its component (`h_i / |C_i|`), every intra-component
/// hardware edge carries the ferromagnetic coupling `-j_int`, and each
/// logical coupling rides on exactly one connecting hardware edge (the
/// lexicographically smallest), all other candidates staying at zero.
pub fn embed_ising(
    logical: &IsingModel,
    embedding: &Embedding,
    j_int: f64,
) -> Result<HardwareIsing> {
    if logical.num_spins != embedding.components.len() {
        return Err(Error::InvalidInput(format!(
            "logical model has {} spins but the embedding has {} components",
            logical.num_spins,
            embedding.components.len()
        )));
    }
    let mut hw = HardwareIsing::new(embedding.hardware.clone());
    hw.offset = logical.offset;
    for (i, comp) in embedding.components.iter().enumerate() {
        if comp.is_empty() {
            return Err(Error::InvariantViolation(format!("variable {} has no qubits", i)));
        }
        let h = logical.fields.get(&(i as u32)).copied().unwrap_or(0.0);
        let share = h / comp.len() as f64;
        for &q in comp {
            hw.set_field(q, share)?;
        }
        for (a, &q) in comp.iter().enumerate() {
            for &r in &comp[a + 1..] {
                if embedding.hardware.has_edge(q, r) {
                    hw.set_coupling(q, r, -j_int)?;
                }
            }
        }
    }
    for (&(i, j), &jij) in &logical.couplings {
        let edge = embedding
            .connecting_edges(i as usize, j as usize)
            .next()
            .ok_or_else(|| {
                Error::InvariantViolation(format!(
                    "logical edge ({}, {}) has no connecting hardware edge",
                    i, j
                ))
            })?;
        hw.set_coupling(edge.0, edge.1, jij)?;
    }
    Ok(hw)
}

/// Per-qubit spin-reversal signs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeVector(pub Vec<i8>);

impl GaugeVector {
    pub fn identity(num_qubits: usize) -> Self {
        Self(vec![1; num_qubits])
    }

    pub fn random(num_qubits: usize, rng: &mut impl Rng) -> Self {
        Self((0..num_qubits).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }
}

/// Applies a gauge: `h_q -> g_q h_q`, `J_qr -> g_q g_r J_qr`. The energy of
/// `s` under the gauged model equals the energy of `g∘s` under the original.
pub fn apply_gauge(hw: &HardwareIsing, gauge: &GaugeVector) -> Result<HardwareIsing> {
    if gauge.0.len() != hw.graph.num_qubit_slots() {
        return Err(Error::InvalidInput("gauge length mismatch".into()));
    }
    let mut out = hw.clone();
    for (q, h) in out.fields.iter_mut().enumerate() {
        *h *= gauge.0[q] as f64;
    }
    for ((a, b), j) in out.couplings.iter_mut() {
        *j *= (gauge.0[*a as usize] * gauge.0[*b as usize]) as f64;
    }
    Ok(out)
}

/// Undoes a gauge on a sampled spin configuration.
pub fn ungauge_sample(spins: &[i8], gauge: &GaugeVector) -> Vec<i8> {
    spins
        .iter()
        .zip(&gauge.0)
        .map(|(&s, &g)| s * g)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::ic_graph;
    use crate::pubo::{bits_to_spins, qubo_to_ising, Qubo};

    #[test]
    fn triangle_into_single_k22_cell_uses_four_qubits() {
        let hw = ChimeraGraph::new(1, 2, &[]).unwrap();
        let k3 = UndirectedGraph::complete(3);
        let cfg = EmbedderConfig::default();
        let emb = find_embedding(&k3, &hw, &cfg).expect("triangle embeds in K_{2,2}");
        emb.validate().unwrap();
        let metrics = emb.metrics();
        assert_eq!(metrics.total_size, 4);
        assert_eq!(metrics.max, 2);
        assert!((metrics.average - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_source_is_a_failure_value() {
        let hw = ChimeraGraph::new(1, 1, &[]).unwrap();
        let k4 = UndirectedGraph::complete(4);
        assert!(find_embedding(&k4, &hw, &EmbedderConfig::default()).is_none());
    }

    #[test]
    fn intersecting_cliques_embed_in_half_grid() {
        // IC_4 into (4,4): 16 logical vertices, well within reach
        let hw = ChimeraGraph::new(4, 4, &[]).unwrap();
        let src = ic_graph(4);
        let emb = find_embedding(&src, &hw, &EmbedderConfig::default())
            .expect("IC_4 embeds in (4,4)-Chimera");
        emb.validate().unwrap();
    }

    #[test]
    fn validate_rejects_overlap_and_disconnection() {
        let hw = ChimeraGraph::new(1, 2, &[]).unwrap();
        let mut src = UndirectedGraph::new(2);
        src.add_edge(0, 1);
        let overlap = Embedding {
            components: vec![vec![0], vec![0]],
            source: src.clone(),
            hardware: hw.clone(),
        };
        assert!(matches!(
            overlap.validate(),
            Err(EmbeddingViolation::Overlap { qubit: 0, .. })
        ));
        let disconnected = Embedding {
            components: vec![vec![0, 1], vec![2]],
            source: src.clone(),
            hardware: hw.clone(),
        };
        assert!(matches!(
            disconnected.validate(),
            Err(EmbeddingViolation::Disconnected { var: 0 })
        ));
        let fine = Embedding {
            components: vec![vec![0], vec![2]],
            source: src,
            hardware: hw,
        };
        fine.validate().unwrap();
        assert_eq!(fine.metrics().max, 1);
    }

    #[test]
    fn clique_embed_bounds() {
        let hw = ChimeraGraph::new(2, 2, &[]).unwrap();
        // M*L + 1 = 5
        let k5 = UndirectedGraph::complete(5);
        let emb = clique_embed(&k5, &hw).expect("K_5 embeds in (2,2)-Chimera");
        emb.validate().unwrap();
        assert!(clique_embed(&UndirectedGraph::complete(6), &hw).is_none());

        let k2 = UndirectedGraph::complete(2);
        let tiny = ChimeraGraph::new(1, 1, &[]).unwrap();
        let emb = clique_embed(&k2, &tiny).unwrap();
        emb.validate().unwrap();
        assert_eq!(emb.components, vec![vec![0], vec![1]]);
    }

    #[test]
    fn clique_embed_handles_larger_grids_and_sparse_sources() {
        let hw = ChimeraGraph::new(4, 4, &[]).unwrap();
        for n in [1usize, 2, 8, 17] {
            let emb = clique_embed(&UndirectedGraph::complete(n), &hw).unwrap();
            emb.validate().unwrap();
        }
        // sparse sources embed with the same chains
        let path = UndirectedGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        clique_embed(&path, &hw).unwrap().validate().unwrap();
        // broken hardware is refused
        let broken = ChimeraGraph::new(4, 4, &[3]).unwrap();
        assert!(clique_embed(&UndirectedGraph::complete(3), &broken).is_none());
    }

    #[test]
    fn triangle_packing_capacity() {
        let hw = ChimeraGraph::new(8, 4, &[]).unwrap();
        let emb = pack_triangles(128, &hw).expect("128 triangles fill (8,4)");
        emb.validate().unwrap();
        assert_eq!(emb.total_size(), 512); // 4 qubits per triangle
        assert!(pack_triangles(129, &hw).is_none());

        let big = ChimeraGraph::new(16, 4, &[]).unwrap();
        assert!(pack_triangles(512, &big).is_some());

        let odd = ChimeraGraph::new(2, 3, &[]).unwrap();
        assert!(pack_triangles(1, &odd).is_none());
    }

    #[test]
    fn embed_ising_splits_fields_and_picks_one_edge() {
        // logical: 2 spins, h_0 = 1.0, J_01 = -1, embedded with a 4-qubit
        // component for variable 0
        let hw = ChimeraGraph::new(2, 2, &[]).unwrap();
        let mut logical = IsingModel::new(2);
        logical.set_field(0, 1.0);
        logical.add_coupling(0, 1, -1.0);
        // component 0: cell (0,0) left 0 + right 2, plus left 8 of cell (1,0)
        // below (vertical neighbor of 0 is 0 + 2LM = 8), plus right 10
        let c0 = vec![0, 2, 8, 10];
        let c1 = vec![1, 3];
        let mut src = UndirectedGraph::new(2);
        src.add_edge(0, 1);
        let emb = Embedding {
            components: vec![c0, c1],
            source: src,
            hardware: hw,
        };
        emb.validate().unwrap();
        let hw_ising = embed_ising(&logical, &emb, 1.3).unwrap();
        for q in [0u32, 2, 8, 10] {
            assert!((hw_ising.fields[q as usize] - 0.25).abs() < 1e-12);
        }
        // intra-component edges carry -j_int
        assert_eq!(hw_ising.couplings[&(0, 2)], -1.3);
        // several candidate edges join the components; exactly one carries
        // the logical coupling
        let candidates: Vec<(u32, u32)> = emb.connecting_edges(0, 1).collect();
        assert!(candidates.len() > 1);
        let carrying: Vec<(u32, u32)> = candidates
            .iter()
            .copied()
            .filter(|e| hw_ising.couplings.get(e).copied().unwrap_or(0.0) == -1.0)
            .collect();
        assert_eq!(carrying, vec![candidates[0]]);
    }

    #[test]
    fn singleton_embedding_reproduces_logical_model() {
        let hw = ChimeraGraph::new(1, 2, &[]).unwrap();
        let mut logical = IsingModel::new(2);
        logical.set_field(0, 0.5);
        logical.set_field(1, -1.5);
        logical.add_coupling(0, 1, 0.75);
        let mut src = UndirectedGraph::new(2);
        src.add_edge(0, 1);
        let emb = Embedding {
            components: vec![vec![0], vec![2]],
            source: src,
            hardware: hw,
        };
        let hw_ising = embed_ising(&logical, &emb, 99.0).unwrap();
        assert_eq!(hw_ising.fields[0], 0.5);
        assert_eq!(hw_ising.fields[2], -1.5);
        assert_eq!(hw_ising.couplings.len(), 1);
        assert_eq!(hw_ising.couplings[&(0, 2)], 0.75);
    }

    #[test]
    fn gauge_identities() {
        let hw = ChimeraGraph::new(1, 2, &[]).unwrap();
        let mut model = HardwareIsing::new(hw.clone());
        model.set_field(0, 0.5).unwrap();
        model.set_field(2, -1.0).unwrap();
        model.set_coupling(0, 2, 0.7).unwrap();
        model.set_coupling(1, 3, -0.4).unwrap();

        let id = GaugeVector::identity(4);
        assert_eq!(apply_gauge(&model, &id).unwrap(), model);

        let flip = GaugeVector(vec![-1; 4]);
        let flipped = apply_gauge(&model, &flip).unwrap();
        assert_eq!(flipped.fields[0], -0.5);
        assert_eq!(flipped.couplings[&(0, 2)], 0.7); // couplings unchanged

        // spectrum invariance: energies of s under the gauged model equal
        // energies of g∘s under the original
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = GaugeVector::random(4, &mut rng);
        let gauged = apply_gauge(&model, &g).unwrap();
        for mask in 0u32..16 {
            let spins: Vec<i8> = (0..4).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let un = ungauge_sample(&spins, &g);
            let e1 = gauged.energy(&spins).unwrap();
            let e2 = model.energy(&un).unwrap();
            assert!((e1 - e2).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_energies_track_logical_differences() {
        // for component-uniform configurations, hardware energy differences
        // equal logical energy differences (the j_int contribution cancels)
        let hw = ChimeraGraph::new(2, 2, &[]).unwrap();
        let mut poly = crate::pubo::PseudoBooleanPolynomial::zero(3);
        poly.add_term(&[0], 1.0);
        poly.add_term(&[0, 1], -2.0);
        poly.add_term(&[1, 2], 1.0);
        let qubo = Qubo::new(poly).unwrap();
        let logical = qubo_to_ising(&qubo);
        let src = qubo.interaction_graph();
        let emb = find_embedding(&src, &hw, &EmbedderConfig::default()).unwrap();
        let hw_ising = embed_ising(&logical, &emb, 1.5).unwrap();

        let uniform_config = |bits: &[bool]| {
            let mut spins = vec![1i8; hw_ising.graph.num_qubit_slots()];
            for (i, comp) in emb.components.iter().enumerate() {
                for &q in comp {
                    spins[q as usize] = if bits[i] { -1 } else { 1 };
                }
            }
            spins
        };
        let bits_a = vec![false, false, false];
        let bits_b = vec![true, false, true];
        let logical_diff = qubo.evaluate(&bits_b).unwrap() - qubo.evaluate(&bits_a).unwrap();
        let hw_diff = hw_ising.energy(&uniform_config(&bits_b)).unwrap()
            - hw_ising.energy(&uniform_config(&bits_a)).unwrap();
        assert!((logical_diff - hw_diff).abs() < 1e-9);
        let spins_a = bits_to_spins(&bits_a);
        let _ = spins_a;
    }
}
