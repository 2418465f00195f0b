//! Problem-specific direct QUBO encodings: k-coloring with one variable per
//! vertex-color pair, and Hamiltonian path with one variable per
//! vertex-position pair.

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::planning::{Plan, PlanningProblem};
use crate::pubo::{PseudoBooleanPolynomial, Qubo};

/// Adds the expansion of `(1 - sum_i x_i)^2` over the given variables.
fn add_exactly_one(poly: &mut PseudoBooleanPolynomial, vars: &[u32]) {
    poly.add_term(&[], 1.0);
    for &v in vars {
        poly.add_term(&[v], -1.0); // -2x + x^2 = -x for binary x
    }
    for (a, &u) in vars.iter().enumerate() {
        for &v in &vars[a + 1..] {
            poly.add_term(&[u, v], 2.0);
        }
    }
}

/// Direct coloring QUBO on variables `x_{v,c} = v*k + c` (k*n in total):
/// an exactly-one-color constraint per vertex plus a penalty for each edge
/// whose endpoints share a color. Zero energy iff the assignment is a proper
/// k-coloring with exactly one color per vertex. For k = 3 and an edgeless
/// input the interaction graph is n disjoint triangles.
pub fn direct_coloring_qubo(graph: &UndirectedGraph, k: usize) -> Result<Qubo> {
    if k < 2 {
        return Err(Error::InvalidInput("direct coloring needs k >= 2".into()));
    }
    let n = graph.num_vertices;
    let var = |v: u32, c: usize| v * k as u32 + c as u32;
    let mut poly = PseudoBooleanPolynomial::zero(n * k);
    for v in 0..n as u32 {
        let vars: Vec<u32> = (0..k).map(|c| var(v, c)).collect();
        add_exactly_one(&mut poly, &vars);
    }
    for (u, v) in graph.edges() {
        for c in 0..k {
            poly.add_term(&[var(u, c), var(v, c)], 1.0);
        }
    }
    Qubo::new(poly)
}

/// Reads a coloring from a direct-map assignment; `None` when some vertex
/// does not have exactly one color set.
pub fn decode_coloring(n: usize, k: usize, assignment: &[bool]) -> Option<Vec<usize>> {
    let mut colors = Vec::with_capacity(n);
    for v in 0..n {
        let set: Vec<usize> = (0..k).filter(|&c| assignment[v * k + c]).collect();
        match set.as_slice() {
            [c] => colors.push(*c),
            _ => return None,
        }
    }
    Some(colors)
}

/// Converts a decoded coloring into a one-step parallel plan for the
/// coloring planning problem (action ids `v*k + c`).
pub fn coloring_plan(colors: &[usize], k: usize) -> Plan {
    Plan {
        steps: vec![colors.iter().enumerate().map(|(v, &c)| v * k + c).collect()],
    }
}

/// Direct Hamiltonian-path QUBO on variables `x_{v,t} = v*n + t` (n^2 in
/// total): each vertex visited exactly once, exactly one vertex per time
/// slot, and a penalty for consecutive slots assigned to non-adjacent
/// vertices. Zero energy iff the assignment encodes a Hamiltonian path.
/// For the complete graph the interaction graph is the intersecting-cliques
/// graph on n^2 vertices.
pub fn direct_hampath_qubo(graph: &UndirectedGraph) -> Result<Qubo> {
    let n = graph.num_vertices;
    if n < 1 {
        return Err(Error::InvalidInput("empty graph has no path encoding".into()));
    }
    let var = |v: usize, t: usize| (v * n + t) as u32;
    let mut poly = PseudoBooleanPolynomial::zero(n * n);
    for v in 0..n {
        let vars: Vec<u32> = (0..n).map(|t| var(v, t)).collect();
        add_exactly_one(&mut poly, &vars);
    }
    for t in 0..n {
        let vars: Vec<u32> = (0..n).map(|v| var(v, t)).collect();
        add_exactly_one(&mut poly, &vars);
    }
    // both orders of every non-adjacent ordered pair
    for t in 0..n.saturating_sub(1) {
        for u in 0..n {
            for v in 0..n {
                if u != v && !graph.has_edge(u as u32, v as u32) {
                    poly.add_term(&[var(u, t), var(v, t + 1)], 1.0);
                }
            }
        }
    }
    Qubo::new(poly)
}

/// Reads a vertex visiting order from a direct-map assignment; `None` when
/// the row/column constraints are not met.
pub fn decode_hampath(n: usize, assignment: &[bool]) -> Option<Vec<u32>> {
    let mut order = vec![u32::MAX; n];
    let mut seen = vec![false; n];
    for t in 0..n {
        let vs: Vec<usize> = (0..n).filter(|&v| assignment[v * n + t]).collect();
        match vs.as_slice() {
            [v] => {
                if seen[*v] {
                    return None;
                }
                seen[*v] = true;
                order[t] = *v as u32;
            }
            _ => return None,
        }
    }
    Some(order)
}

/// Converts a visiting order into a linear plan for the visiting planning
/// problem (action ids equal vertex ids).
pub fn hampath_plan(order: &[u32]) -> Plan {
    Plan::linear(&order.iter().map(|&v| v as usize).collect::<Vec<_>>())
}

/// Checks a decoded solution against the planning problem it came from.
pub fn coloring_solution_valid(problem: &PlanningProblem, colors: &[usize], k: usize) -> bool {
    crate::planning::validate_plan(problem, &coloring_plan(colors, k))
        .map(|r| r.is_valid())
        .unwrap_or(false)
}
