//! Shared oracles for the integration suites: exhaustive plan enumeration,
//! exhaustive coloring/path search, and random problem generators. These
//! stay independent of the compilation pipeline they are used to check.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use planqubo_core::anneal::{brute_force_ground, mask_to_bits};
use planqubo_core::graph::UndirectedGraph;
use planqubo_core::planning::{validate_plan, Action, Plan, PlanningProblem};
use planqubo_core::pubo::Qubo;

/// All zero-energy assignments of a QUBO, with its exact minimum.
pub fn zero_states(qubo: &Qubo) -> (f64, Vec<Vec<bool>>) {
    let (min, masks) = brute_force_ground(qubo.poly()).expect("within enumeration bounds");
    let states = if min.abs() <= 1e-9 {
        masks
            .into_iter()
            .map(|m| mask_to_bits(m, qubo.num_vars()))
            .collect()
    } else {
        Vec::new()
    };
    (min, states)
}

/// Every valid plan of exactly `length` steps, enumerating all sequences of
/// action subsets and keeping those the validator accepts.
pub fn enumerate_valid_plans(problem: &PlanningProblem, length: usize) -> BTreeSet<Plan> {
    let m = problem.actions.len();
    assert!(m <= 12 && length * m <= 24, "oracle enumeration too large");
    let mut out = BTreeSet::new();
    let subsets = 1u64 << m;
    let mut steps = vec![0u64; length];
    loop {
        let plan = Plan {
            steps: steps
                .iter()
                .map(|&mask| (0..m).filter(|&j| mask >> j & 1 == 1).collect())
                .collect(),
        };
        if validate_plan(problem, &plan).unwrap().is_valid() {
            out.insert(plan);
        }
        // odometer increment over subset choices
        let mut idx = 0;
        loop {
            if idx == length {
                return out;
            }
            steps[idx] += 1;
            if steps[idx] < subsets {
                break;
            }
            steps[idx] = 0;
            idx += 1;
        }
    }
}

/// All proper k-colorings of a graph.
pub fn proper_colorings(graph: &UndirectedGraph, k: usize) -> BTreeSet<Vec<usize>> {
    let n = graph.num_vertices;
    let mut out = BTreeSet::new();
    let total = (k as u64).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let colors: Vec<usize> = (0..n)
            .map(|_| {
                let v = (c % k as u64) as usize;
                c /= k as u64;
                v
            })
            .collect();
        if graph
            .edges()
            .all(|(u, v)| colors[u as usize] != colors[v as usize])
        {
            out.insert(colors);
        }
    }
    out
}

/// All Hamiltonian paths of a graph, as vertex orders.
pub fn hamiltonian_paths(graph: &UndirectedGraph) -> BTreeSet<Vec<u32>> {
    let n = graph.num_vertices;
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut out = BTreeSet::new();
    permute(&mut order, 0, &mut |perm: &[u32]| {
        if perm.windows(2).all(|w| graph.has_edge(w[0], w[1])) {
            out.insert(perm.to_vec());
        }
    });
    out
}

fn permute<T: Copy>(items: &mut Vec<T>, k: usize, visit: &mut impl FnMut(&[T])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(n);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen::<f64>() < p {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Random STRIPS problem whose every action contributes positively to some
/// goal and never clobbers one, so boundary simplification and relevance
/// pruning keep every valid plan representable.
pub fn random_goal_safe_problem(rng: &mut ChaCha8Rng) -> (PlanningProblem, usize) {
    let n = rng.gen_range(2..=3usize);
    let m = rng.gen_range(2..=3usize);
    let length = rng.gen_range(1..=2usize);
    let num_goals = rng.gen_range(1..=n.min(2));
    let goals: BTreeSet<usize> = (0..num_goals).collect();
    let non_goals: Vec<usize> = (num_goals..n).collect();

    let mut actions = Vec::with_capacity(m);
    for j in 0..m {
        let mut a = Action::new(format!("a{}", j));
        a.eff_pos.insert(rng.gen_range(0..num_goals));
        for &v in &non_goals {
            match rng.gen_range(0..3) {
                0 => {
                    a.eff_pos.insert(v);
                }
                1 => {
                    a.eff_neg.insert(v);
                }
                _ => {}
            }
        }
        for v in 0..n {
            if a.eff_pos.contains(&v) || a.eff_neg.contains(&v) {
                continue;
            }
            match rng.gen_range(0..4) {
                0 => {
                    a.pre_pos.insert(v);
                }
                1 => {
                    a.pre_neg.insert(v);
                }
                _ => {}
            }
        }
        // preconditions may also touch effect variables when consistent
        actions.push(a);
    }

    let problem = PlanningProblem {
        num_state_vars: n,
        names: (0..n).map(|i| format!("v{}", i)).collect(),
        actions,
        initial: (0..n).map(|_| rng.gen::<bool>()).collect(),
        goals_pos: goals,
        goals_neg: BTreeSet::new(),
        plan_length_hint: Some(length),
    };
    problem.validate().unwrap();
    (problem, length)
}
