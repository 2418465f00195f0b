//! Benchmark-instance generation: Erdős–Rényi graphs at the hardness phase
//! transition, the two planning-problem constructions built from them, and
//! the exact solvability oracles used to keep only solvable instances.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::planning::{Action, PlanningProblem};

/// The two benchmark families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Hamiltonian-path style problems ("nav").
    Navigation,
    /// Vertex-coloring style problems ("sched").
    Scheduling,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nav" | "navigation" => Ok(Family::Navigation),
            "sched" | "scheduling" => Ok(Family::Scheduling),
            other => Err(Error::InvalidInput(format!("unknown family '{}'", other))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Navigation => "nav",
            Family::Scheduling => "sched",
        }
    }
}

/// SplitMix64 step, used to derive independent per-instance seeds from a
/// master seed. Constants from Steele, Lea & Flood's published generator.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E3779B97F4A7C15);
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Samples G(n, p): each of the n(n-1)/2 possible edges is included
/// independently with probability `p`.
pub fn er_graph(n: usize, p: f64, rng: &mut impl Rng) -> Result<UndirectedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("p = {} is not a probability", p)));
    }
    let mut g = UndirectedGraph::new(n);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen::<f64>() < p {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Hamiltonian-path phase-transition edge probability `(ln n + ln ln n)/n`,
/// clamped to [0, 1]. Natural logarithms throughout.
pub fn navigation_phase_p(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "n = {} too small: ln ln n must be defined and positive",
            n
        )));
    }
    let nf = n as f64;
    let p = (nf.ln() + nf.ln().ln()) / nf;
    Ok(p.clamp(0.0, 1.0))
}

/// 3-colorability phase-transition edge probability `4.5 / n` (edge-to-vertex
/// ratio c = 4.5).
pub fn scheduling_phase_p(n: usize) -> Result<f64> {
    if n < 5 {
        return Err(Error::InvalidInput(format!(
            "n = {} too small: 4.5/n would exceed 1",
            n
        )));
    }
    Ok(4.5 / n as f64)
}

pub fn phase_p(family: Family, n: usize) -> Result<f64> {
    match family {
        Family::Navigation => navigation_phase_p(n),
        Family::Scheduling => scheduling_phase_p(n),
    }
}

/// Builds the Hamiltonian-path planning problem for a graph.
///
/// Per vertex `v` there are three state variables: `g_v` (visited, the
/// goal), `i_v` (not yet visited), `e_v` (v is currently reachable), and one
/// action that visits `v`. Variable ids: `g_v = v`, `i_v = n + v`,
/// `e_v = 2n + v`.
pub fn uhp_planning(graph: &UndirectedGraph) -> PlanningProblem {
    let n = graph.num_vertices;
    let g_var = |v: u32| v as usize;
    let i_var = |v: u32| n + v as usize;
    let e_var = |v: u32| 2 * n + v as usize;

    let mut names = Vec::with_capacity(3 * n);
    for v in 0..n {
        names.push(format!("g_v{}", v));
    }
    for v in 0..n {
        names.push(format!("i_v{}", v));
    }
    for v in 0..n {
        names.push(format!("e_v{}", v));
    }

    let mut actions = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let mut a = Action::new(format!("visit_v{}", v));
        a.pre_pos.insert(i_var(v));
        a.pre_pos.insert(e_var(v));
        a.eff_pos.insert(g_var(v));
        a.eff_neg.insert(i_var(v));
        for w in 0..n as u32 {
            if w == v {
                continue;
            }
            if graph.has_edge(v, w) {
                a.eff_pos.insert(e_var(w));
            } else {
                a.eff_neg.insert(e_var(w));
            }
        }
        actions.push(a);
    }

    let mut initial = vec![false; 3 * n];
    for v in 0..n as u32 {
        initial[i_var(v)] = true;
        initial[e_var(v)] = true;
    }

    PlanningProblem {
        num_state_vars: 3 * n,
        names,
        actions,
        initial,
        goals_pos: (0..n).collect(),
        goals_neg: BTreeSet::new(),
        plan_length_hint: Some(n),
    }
}

/// Builds the vertex-coloring planning problem for a graph.
///
/// Per vertex `v` there is a goal variable `g_v` (colored at all), one state
/// variable per color `c_{v,c}`, and `k` coloring actions. An action
/// requires `g_v` false and every neighbor's same-color variable false.
/// Variable ids: `g_v = v`, `c_{v,c} = n + k*v + c`. Action ids: `k*v + c`.
pub fn coloring_planning(graph: &UndirectedGraph, k: usize) -> PlanningProblem {
    assert!(k >= 1, "at least one color required");
    let n = graph.num_vertices;
    let g_var = |v: u32| v as usize;
    let c_var = |v: u32, c: usize| n + k * v as usize + c;

    let mut names = Vec::with_capacity(n * (k + 1));
    for v in 0..n {
        names.push(format!("g_v{}", v));
    }
    for v in 0..n {
        for c in 0..k {
            names.push(format!("c_v{}_{}", v, c));
        }
    }

    let mut actions = Vec::with_capacity(n * k);
    for v in 0..n as u32 {
        let nbrs = graph.neighbors(v);
        for c in 0..k {
            let mut a = Action::new(format!("color_v{}_{}", v, c));
            a.pre_neg.insert(g_var(v));
            for &w in &nbrs {
                a.pre_neg.insert(c_var(w, c));
            }
            a.eff_pos.insert(g_var(v));
            a.eff_pos.insert(c_var(v, c));
            actions.push(a);
        }
    }

    PlanningProblem {
        num_state_vars: n * (k + 1),
        names,
        actions,
        initial: vec![false; n * (k + 1)],
        goals_pos: (0..n).collect(),
        goals_neg: BTreeSet::new(),
        plan_length_hint: Some(1),
    }
}

/// Exact Hamiltonian-path test by dynamic programming over vertex subsets.
/// Limited to n <= 20.
pub fn is_hamiltonian_path(graph: &UndirectedGraph) -> Result<bool> {
    let n = graph.num_vertices;
    if n > 20 {
        return Err(Error::CapabilityExceeded(format!(
            "hamiltonian-path oracle supports n <= 20, got {}",
            n
        )));
    }
    if n == 0 {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    let adj: Vec<u32> = {
        let lists = graph.adjacency();
        (0..n)
            .map(|v| lists[v].iter().fold(0u32, |m, &w| m | 1 << w))
            .collect()
    };
    let full = (1u32 << n) - 1;
    // ends[mask] = bitmask of vertices a path covering `mask` can end at
    let mut ends = vec![0u32; 1 << n];
    for v in 0..n {
        ends[1 << v] = 1 << v;
    }
    for mask in 1..=full {
        if ends[mask as usize] == 0 {
            continue;
        }
        let e = ends[mask as usize];
        for v in 0..n {
            if e >> v & 1 == 0 {
                continue;
            }
            let mut next = adj[v] & !mask;
            while next != 0 {
                let w = next.trailing_zeros();
                ends[(mask | 1 << w) as usize] |= 1 << w;
                next &= next - 1;
            }
        }
    }
    Ok(ends[full as usize] != 0)
}

/// Exact k-colorability test by backtracking.
pub fn is_k_colorable(graph: &UndirectedGraph, k: usize) -> Result<bool> {
    let n = graph.num_vertices;
    if n == 0 {
        return Ok(true);
    }
    if k == 0 {
        return Ok(false);
    }
    let adj = graph.adjacency();
    // color vertices in descending-degree order to fail fast
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    let mut colors = vec![usize::MAX; n];

    fn go(idx: usize, order: &[usize], adj: &[Vec<u32>], colors: &mut [usize], k: usize) -> bool {
        if idx == order.len() {
            return true;
        }
        let v = order[idx];
        // cap the color choice at one past the colors used so far to skip
        // symmetric assignments
        let used = colors.iter().filter(|&&c| c != usize::MAX).map(|&c| c + 1).max().unwrap_or(0);
        for c in 0..k.min(used + 1) {
            if adj[v].iter().all(|&w| colors[w as usize] != c) {
                colors[v] = c;
                if go(idx + 1, order, adj, colors, k) {
                    return true;
                }
                colors[v] = usize::MAX;
            }
        }
        false
    }

    Ok(go(0, &order, &adj, &mut colors, k))
}

/// Solvability oracle for a family instance.
pub fn is_solvable(family: Family, graph: &UndirectedGraph) -> Result<bool> {
    match family {
        Family::Navigation => is_hamiltonian_path(graph),
        Family::Scheduling => is_k_colorable(graph, 3),
    }
}

/// One generated benchmark instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkInstance {
    /// Position in the seed-ordered generation stream.
    pub index: u64,
    /// Derived per-instance seed.
    pub seed: u64,
    pub graph: UndirectedGraph,
    pub problem: PlanningProblem,
    pub solvable: bool,
}

/// A seed-reproducible set of solvable benchmark instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkSet {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub instances: Vec<BenchmarkInstance>,
}

/// Generates the first `count` solvable instances of the family at size `n`
/// in seed order. Instance `i` of the stream is drawn from a ChaCha8 stream
/// seeded with `mix_seed(seed, i)`, so generation is reproducible and
/// instances can be regenerated independently.
pub fn generate_benchmark(family: Family, n: usize, count: usize, seed: u64) -> Result<BenchmarkSet> {
    let p = phase_p(family, n)?;
    let mut instances = Vec::with_capacity(count);
    let max_stream = (count as u64).saturating_mul(10_000).max(10_000);
    let mut index = 0u64;
    while instances.len() < count {
        if index >= max_stream {
            return Err(Error::CapabilityExceeded(format!(
                "exhausted {} candidates before finding {} solvable instances",
                max_stream, count
            )));
        }
        let inst_seed = mix_seed(seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(inst_seed);
        let graph = er_graph(n, p, &mut rng)?;
        let solvable = is_solvable(family, &graph)?;
        if solvable {
            let problem = match family {
                Family::Navigation => uhp_planning(&graph),
                Family::Scheduling => coloring_planning(&graph, 3),
            };
            instances.push(BenchmarkInstance {
                index,
                seed: inst_seed,
                graph,
                problem,
                solvable,
            });
        }
        index += 1;
    }
    Ok(BenchmarkSet {
        family,
        n,
        seed,
        instances,
    })
}

/// Serializes an instance as its problem JSON extended with `family` and
/// `graph` keys, so graph-level tools can recover the source graph.
pub fn instance_to_json(inst: &BenchmarkInstance, family: Family) -> serde_json::Value {
    let mut value = serde_json::to_value(&inst.problem).expect("problem serializes");
    let obj = value.as_object_mut().expect("problem is an object");
    obj.insert("family".into(), serde_json::to_value(family).unwrap());
    obj.insert("graph".into(), serde_json::to_value(&inst.graph).unwrap());
    obj.insert("instance_index".into(), serde_json::json!(inst.index));
    obj.insert("instance_seed".into(), serde_json::json!(inst.seed));
    value
}

/// Recovers the family and source graph from an extended problem JSON.
pub fn instance_graph_from_json(value: &serde_json::Value) -> Result<(Family, UndirectedGraph)> {
    let family = value
        .get("family")
        .ok_or_else(|| Error::InvalidInput("problem file carries no 'family' key".into()))?;
    let graph = value
        .get("graph")
        .ok_or_else(|| Error::InvalidInput("problem file carries no 'graph' key".into()))?;
    Ok((
        serde_json::from_value(family.clone())?,
        serde_json::from_value(graph.clone())?,
    ))
}
