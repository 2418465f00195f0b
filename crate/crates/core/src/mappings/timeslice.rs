//! Time-slice QUBO encoding: one binary variable per state variable per time
//! step plus one per action per step, with flip penalties tying consecutive
//! slices together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::Family;
use crate::planning::{actions_conflict, Plan, PlanningProblem};
use crate::pubo::{PseudoBooleanPolynomial, Qubo};

/// Per-family term weights. All default to 1; the flip-compensation between
/// the no-op and effect terms assumes `no_op == effects`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermWeights {
    pub initial: f64,
    pub goal: f64,
    pub no_op: f64,
    pub precond: f64,
    pub effects: f64,
    /// Weight of the single-action or conflict penalty, whichever is active.
    pub action_pair: f64,
}

impl Default for TermWeights {
    fn default() -> Self {
        Self {
            initial: 1.0,
            goal: 1.0,
            no_op: 1.0,
            precond: 1.0,
            effects: 1.0,
            action_pair: 1.0,
        }
    }
}

/// Options controlling which term families the encoder emits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSliceOptions {
    /// Penalize every step whose action count differs from one.
    pub use_single_action: bool,
    /// Penalize co-scheduled conflicting action pairs instead.
    pub use_conflicts: bool,
    /// Substitute constants for the initial slice, goal variables at the
    /// final slice, and any value forced by forward reachability; drop
    /// final-slice actions that conflict with or cannot contribute to goals.
    pub simplify_boundaries: bool,
    /// Encode only positive preconditions.
    pub use_primed_precond: bool,
    pub weights: TermWeights,
}

impl Default for TimeSliceOptions {
    fn default() -> Self {
        Self {
            use_single_action: false,
            use_conflicts: true,
            simplify_boundaries: true,
            use_primed_precond: false,
            weights: TermWeights::default(),
        }
    }
}

impl TimeSliceOptions {
    /// The action-term-free variant for visiting-style problems, whose
    /// preconditions leave no useful parallelism. Note: without conflict
    /// penalties, interfering parallel steps (one action deleting another's
    /// precondition, or two actions sharing an effect) are not charged, so
    /// zero energy certifies a valid plan only for sequential assignments.
    pub fn for_navigation() -> Self {
        Self {
            use_single_action: false,
            use_conflicts: false,
            simplify_boundaries: true,
            use_primed_precond: true,
            weights: TermWeights::default(),
        }
    }

    /// Variant for coloring-style problems, which need genuine parallel
    /// steps: conflict penalties between interfering actions, and the full
    /// precondition term because these problems use negative preconditions.
    pub fn for_scheduling() -> Self {
        Self::default()
    }

    /// Options the benchmark harness compiles each family with. Both keep
    /// conflict penalties so that zero energy coincides exactly with plan
    /// validity; the visiting family additionally uses the positive-only
    /// precondition term, which covers all of its preconditions.
    pub fn for_family(family: Family) -> Self {
        match family {
            Family::Navigation => Self {
                use_primed_precond: true,
                ..Self::default()
            },
            Family::Scheduling => Self::for_scheduling(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.use_single_action && self.use_conflicts {
            return Err(Error::InvalidInput(
                "single-action and conflict penalties are mutually exclusive".into(),
            ));
        }
        Ok(())
    }
}

/// Where each time-slice variable landed in the flat QUBO space, and which
/// were eliminated as constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSliceLayout {
    pub num_state_vars: usize,
    pub num_actions: usize,
    pub plan_length: usize,
    /// `(t * N + i)` -> dense QUBO index, `None` when fixed.
    state_index: Vec<Option<u32>>,
    /// `((t-1) * M + j)` -> dense QUBO index, `None` when fixed to 0.
    action_index: Vec<Option<u32>>,
    state_fixed: Vec<Option<bool>>,
    action_fixed: Vec<Option<bool>>,
    pub num_qubo_vars: usize,
}

impl TimeSliceLayout {
    /// QUBO index of state variable `i` at slice `t` (0..=L), if free.
    pub fn state_var_index(&self, i: usize, t: usize) -> Option<u32> {
        self.state_index[t * self.num_state_vars + i]
    }

    /// QUBO index of action `j` at step `t` (1..=L), if free.
    pub fn action_var_index(&self, j: usize, t: usize) -> Option<u32> {
        self.action_index[(t - 1) * self.num_actions + j]
    }

    pub fn state_fixed_value(&self, i: usize, t: usize) -> Option<bool> {
        self.state_fixed[t * self.num_state_vars + i]
    }

    pub fn action_fixed_value(&self, j: usize, t: usize) -> Option<bool> {
        self.action_fixed[(t - 1) * self.num_actions + j]
    }

    /// Variable count before boundary elimination: N(L+1) + LM.
    pub fn pre_simplification_count(&self) -> usize {
        self.num_state_vars * (self.plan_length + 1) + self.plan_length * self.num_actions
    }

    /// Variable count actually emitted.
    pub fn post_simplification_count(&self) -> usize {
        self.num_qubo_vars
    }

    /// State value of `(i, t)` under a QUBO assignment, resolving constants.
    pub fn state_value(&self, assignment: &[bool], i: usize, t: usize) -> bool {
        match self.state_fixed_value(i, t) {
            Some(v) => v,
            None => assignment[self.state_var_index(i, t).unwrap() as usize],
        }
    }

    pub fn action_value(&self, assignment: &[bool], j: usize, t: usize) -> bool {
        match self.action_fixed_value(j, t) {
            Some(v) => v,
            None => assignment[self.action_var_index(j, t).unwrap() as usize],
        }
    }

    /// Reads the plan off a QUBO assignment.
    pub fn decode_plan(&self, assignment: &[bool]) -> Plan {
        let mut steps = Vec::with_capacity(self.plan_length);
        for t in 1..=self.plan_length {
            let step = (0..self.num_actions)
                .filter(|&j| self.action_value(assignment, j, t))
                .collect();
            steps.push(step);
        }
        Plan { steps }
    }

    /// Encodes a plan's full trajectory as a QUBO assignment. Returns `None`
    /// when the plan cannot be represented (it disagrees with an eliminated
    /// constant, e.g. uses a dropped final-slice action).
    pub fn encode_plan(&self, problem: &PlanningProblem, plan: &Plan) -> Option<Vec<bool>> {
        if plan.len() != self.plan_length {
            return None;
        }
        let mut assignment = vec![false; self.num_qubo_vars];
        let mut state = problem.initial.clone();
        let set_state = |asn: &mut Vec<bool>, i: usize, t: usize, v: bool| -> bool {
            match self.state_fixed_value(i, t) {
                Some(fixed) => fixed == v,
                None => {
                    asn[self.state_var_index(i, t).unwrap() as usize] = v;
                    true
                }
            }
        };
        for i in 0..self.num_state_vars {
            if !set_state(&mut assignment, i, 0, state[i]) {
                return None;
            }
        }
        for (idx, step) in plan.steps.iter().enumerate() {
            let t = idx + 1;
            for j in 0..self.num_actions {
                let fires = step.contains(&j);
                match self.action_fixed_value(j, t) {
                    Some(fixed) => {
                        if fixed != fires {
                            return None;
                        }
                    }
                    None => {
                        assignment[self.action_var_index(j, t).unwrap() as usize] = fires;
                    }
                }
            }
            for &j in step {
                for &i in &problem.actions[j].eff_pos {
                    state[i] = true;
                }
                for &i in &problem.actions[j].eff_neg {
                    state[i] = false;
                }
            }
            for i in 0..self.num_state_vars {
                if !set_state(&mut assignment, i, t, state[i]) {
                    return None;
                }
            }
        }
        Some(assignment)
    }

    /// Legend mapping each QUBO variable id to its time-slice meaning.
    pub fn legend(&self) -> serde_json::Value {
        let mut entries = vec![serde_json::Value::Null; self.num_qubo_vars];
        for t in 0..=self.plan_length {
            for i in 0..self.num_state_vars {
                if let Some(ix) = self.state_var_index(i, t) {
                    entries[ix as usize] = serde_json::json!({"kind": "state", "i": i, "t": t});
                }
            }
        }
        for t in 1..=self.plan_length {
            for j in 0..self.num_actions {
                if let Some(ix) = self.action_var_index(j, t) {
                    entries[ix as usize] = serde_json::json!({"kind": "action", "j": j, "t": t});
                }
            }
        }
        serde_json::Value::Array(entries)
    }
}

/// Pre- and post-simplification variable counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableCount {
    pub before: usize,
    pub after: usize,
}

/// Forward-reachable value sets: `possible[t][i]` is a 2-bit mask, bit 0 for
/// false, bit 1 for true.
fn forward_possible(problem: &PlanningProblem, plan_length: usize) -> Vec<Vec<u8>> {
    let n = problem.num_state_vars;
    let mut possible = vec![vec![0u8; n]; plan_length + 1];
    for i in 0..n {
        possible[0][i] = if problem.initial[i] { 0b10 } else { 0b01 };
    }
    for t in 1..=plan_length {
        let prev = possible[t - 1].clone();
        let mut cur = prev.clone();
        for action in &problem.actions {
            let applicable = action.pre_pos.iter().all(|&i| prev[i] & 0b10 != 0)
                && action.pre_neg.iter().all(|&i| prev[i] & 0b01 != 0);
            if !applicable {
                continue;
            }
            for &i in &action.eff_pos {
                cur[i] |= 0b10;
            }
            for &i in &action.eff_neg {
                cur[i] |= 0b01;
            }
        }
        possible[t] = cur;
    }
    possible
}

fn build_layout(
    problem: &PlanningProblem,
    plan_length: usize,
    options: &TimeSliceOptions,
) -> TimeSliceLayout {
    let n = problem.num_state_vars;
    let m = problem.actions.len();
    let mut state_fixed = vec![None; n * (plan_length + 1)];
    let mut action_fixed = vec![None; m * plan_length];

    if options.simplify_boundaries {
        let possible = forward_possible(problem, plan_length);
        for t in 0..=plan_length {
            for i in 0..n {
                match possible[t][i] {
                    0b01 => state_fixed[t * n + i] = Some(false),
                    0b10 => state_fixed[t * n + i] = Some(true),
                    _ => {}
                }
            }
        }
        // goal variables are pinned at the final slice
        for &i in &problem.goals_pos {
            state_fixed[plan_length * n + i] = Some(true);
        }
        for &i in &problem.goals_neg {
            state_fixed[plan_length * n + i] = Some(false);
        }
        // final-slice actions that fight the goals or cannot touch them
        for (j, a) in problem.actions.iter().enumerate() {
            let conflicts = a.eff_pos.iter().any(|i| problem.goals_neg.contains(i))
                || a.eff_neg.iter().any(|i| problem.goals_pos.contains(i));
            let contributes = a.eff_pos.iter().any(|i| problem.goals_pos.contains(i))
                || a.eff_neg.iter().any(|i| problem.goals_neg.contains(i));
            if conflicts || !contributes {
                action_fixed[(plan_length - 1) * m + j] = Some(false);
            }
        }
    }

    // dense ids in alternating slice order: states at t, actions at t+1, ...
    let mut state_index = vec![None; n * (plan_length + 1)];
    let mut action_index = vec![None; m * plan_length];
    let mut next = 0u32;
    for i in 0..n {
        if state_fixed[i].is_none() {
            state_index[i] = Some(next);
            next += 1;
        }
    }
    for t in 1..=plan_length {
        for j in 0..m {
            let slot = (t - 1) * m + j;
            if action_fixed[slot].is_none() {
                action_index[slot] = Some(next);
                next += 1;
            }
        }
        for i in 0..n {
            let slot = t * n + i;
            if state_fixed[slot].is_none() {
                state_index[slot] = Some(next);
                next += 1;
            }
        }
    }

    TimeSliceLayout {
        num_state_vars: n,
        num_actions: m,
        plan_length,
        state_index,
        action_index,
        state_fixed,
        action_fixed,
        num_qubo_vars: next as usize,
    }
}

#[derive(Clone, Copy)]
enum TsVar {
    State(usize, usize),
    Action(usize, usize),
}

struct TermSink<'a> {
    layout: &'a TimeSliceLayout,
    poly: PseudoBooleanPolynomial,
}

impl<'a> TermSink<'a> {
    fn add(&mut self, vars: &[TsVar], coeff: f64) {
        let mut mono: Vec<u32> = Vec::with_capacity(vars.len());
        for &v in vars {
            let (index, fixed) = match v {
                TsVar::State(i, t) => (
                    self.layout.state_var_index(i, t),
                    self.layout.state_fixed_value(i, t),
                ),
                TsVar::Action(j, t) => (
                    self.layout.action_var_index(j, t),
                    self.layout.action_fixed_value(j, t),
                ),
            };
            match (index, fixed) {
                (Some(ix), None) => mono.push(ix),
                (None, Some(true)) => {}
                (None, Some(false)) => return,
                _ => unreachable!("layout maps every variable"),
            }
        }
        self.poly.add_term(&mono, coeff);
    }
}

/// Compiles a planning problem into a time-slice QUBO of the given plan
/// length, returning the polynomial together with the variable layout.
pub fn time_slice_qubo(
    problem: &PlanningProblem,
    plan_length: usize,
    options: &TimeSliceOptions,
) -> Result<(Qubo, TimeSliceLayout)> {
    if plan_length < 1 {
        return Err(Error::InvalidInput("plan length must be at least 1".into()));
    }
    options.validate()?;
    problem.validate()?;
    let layout = build_layout(problem, plan_length, options);
    let w = &options.weights;
    let mut sink = TermSink {
        layout: &layout,
        poly: PseudoBooleanPolynomial::zero(layout.num_qubo_vars),
    };

    // boundary terms
    for i in 0..problem.num_state_vars {
        if problem.initial[i] {
            sink.add(&[], w.initial);
            sink.add(&[TsVar::State(i, 0)], -w.initial);
        } else {
            sink.add(&[TsVar::State(i, 0)], w.initial);
        }
    }
    for &i in &problem.goals_pos {
        sink.add(&[], w.goal);
        sink.add(&[TsVar::State(i, plan_length)], -w.goal);
    }
    for &i in &problem.goals_neg {
        sink.add(&[TsVar::State(i, plan_length)], w.goal);
    }

    // flip penalty between consecutive slices
    for t in 1..=plan_length {
        for i in 0..problem.num_state_vars {
            let prev = TsVar::State(i, t - 1);
            let cur = TsVar::State(i, t);
            sink.add(&[prev], w.no_op);
            sink.add(&[cur], w.no_op);
            sink.add(&[prev, cur], -2.0 * w.no_op);
        }
    }

    // precondition and effect penalties
    for t in 1..=plan_length {
        for (j, a) in problem.actions.iter().enumerate() {
            let y = TsVar::Action(j, t);
            for &i in &a.pre_pos {
                let x = TsVar::State(i, t - 1);
                sink.add(&[y], w.precond);
                sink.add(&[x, y], -w.precond);
            }
            if !options.use_primed_precond {
                for &i in &a.pre_neg {
                    let x = TsVar::State(i, t - 1);
                    sink.add(&[x, y], w.precond);
                }
            }
            for &i in &a.eff_pos {
                let prev = TsVar::State(i, t - 1);
                let cur = TsVar::State(i, t);
                sink.add(&[y], w.effects);
                sink.add(&[y, prev], w.effects);
                sink.add(&[y, cur], -2.0 * w.effects);
            }
            for &i in &a.eff_neg {
                let prev = TsVar::State(i, t - 1);
                let cur = TsVar::State(i, t);
                sink.add(&[y, cur], 2.0 * w.effects);
                sink.add(&[y, prev], -w.effects);
            }
        }
    }

    // action-interaction terms
    if options.use_single_action {
        for t in 1..=plan_length {
            sink.add(&[], w.action_pair);
            for j in 0..problem.actions.len() {
                sink.add(&[TsVar::Action(j, t)], -w.action_pair);
            }
            for j in 0..problem.actions.len() {
                for j2 in j + 1..problem.actions.len() {
                    sink.add(&[TsVar::Action(j, t), TsVar::Action(j2, t)], 2.0 * w.action_pair);
                }
            }
        }
    } else if options.use_conflicts {
        for t in 1..=plan_length {
            for (j, a) in problem.actions.iter().enumerate() {
                for (j2, b) in problem.actions.iter().enumerate() {
                    if j == j2 {
                        continue;
                    }
                    // ordered pair contributions mirror the two double sums:
                    // (pos-precond or neg-effect of a) meeting a neg-effect
                    // of b, and (neg-precond or pos-effect of a) meeting a
                    // pos-effect of b.
                    let first = a
                        .pre_pos
                        .union(&a.eff_neg)
                        .filter(|i| b.eff_neg.contains(i))
                        .count();
                    let second = a
                        .pre_neg
                        .union(&a.eff_pos)
                        .filter(|i| b.eff_pos.contains(i))
                        .count();
                    let hits = (first + second) as f64;
                    if hits > 0.0 {
                        sink.add(
                            &[TsVar::Action(j, t), TsVar::Action(j2, t)],
                            w.action_pair * hits,
                        );
                    }
                }
            }
        }
    }

    let qubo = Qubo::new(sink.poly).expect("all time-slice terms are at most quadratic");
    Ok((qubo, layout))
}

/// Exact variable counts before and after boundary elimination.
pub fn time_slice_variable_count(
    problem: &PlanningProblem,
    plan_length: usize,
    options: &TimeSliceOptions,
) -> Result<VariableCount> {
    if plan_length < 1 {
        return Err(Error::InvalidInput("plan length must be at least 1".into()));
    }
    options.validate()?;
    let layout = build_layout(problem, plan_length, options);
    Ok(VariableCount {
        before: layout.pre_simplification_count(),
        after: layout.post_simplification_count(),
    })
}

/// True when two actions cannot share a step; mirrors the conflict penalty.
pub fn conflicting_pair(problem: &PlanningProblem, j: usize, j2: usize) -> bool {
    actions_conflict(&problem.actions[j], &problem.actions[j2])
}
