//! STRIPS-style planning model: binary state variables, actions given by
//! signed precondition/effect sets, plan validation with parallel steps.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a state variable; ids are contiguous from 0.
pub type StateVarId = usize;
/// Index of an action; ids are contiguous from 0.
pub type ActionId = usize;

/// A full truth assignment over the state variables.
pub type State = Vec<bool>;

/// An action with positive/negative preconditions and effects.
///
/// Invariants: `pre_pos ∩ pre_neg = ∅` and `eff_pos ∩ eff_neg = ∅`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    #[serde(default)]
    pub pre_pos: BTreeSet<StateVarId>,
    #[serde(default)]
    pub pre_neg: BTreeSet<StateVarId>,
    #[serde(default)]
    pub eff_pos: BTreeSet<StateVarId>,
    #[serde(default)]
    pub eff_neg: BTreeSet<StateVarId>,
}

impl Action {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pre_pos: BTreeSet::new(),
            pre_neg: BTreeSet::new(),
            eff_pos: BTreeSet::new(),
            eff_neg: BTreeSet::new(),
        }
    }

    /// True when the preconditions hold in `state`.
    pub fn applicable(&self, state: &State) -> bool {
        self.pre_pos.iter().all(|&i| state[i]) && self.pre_neg.iter().all(|&i| !state[i])
    }

    fn check_invariants(&self) -> Result<()> {
        if self.pre_pos.intersection(&self.pre_neg).next().is_some() {
            return Err(Error::InvalidInput(format!(
                "action {}: overlapping positive/negative preconditions",
                self.name
            )));
        }
        if self.eff_pos.intersection(&self.eff_neg).next().is_some() {
            return Err(Error::InvalidInput(format!(
                "action {}: overlapping positive/negative effects",
                self.name
            )));
        }
        Ok(())
    }
}

/// A STRIPS planning problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub num_state_vars: usize,
    /// Human-readable state-variable names, indexed by id.
    pub names: Vec<String>,
    pub actions: Vec<Action>,
    /// Full initial assignment, one entry per state variable.
    pub initial: Vec<bool>,
    #[serde(default)]
    pub goals_pos: BTreeSet<StateVarId>,
    #[serde(default)]
    pub goals_neg: BTreeSet<StateVarId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_length_hint: Option<usize>,
}

impl PlanningProblem {
    /// Checks the structural invariants: full initial assignment, ids in
    /// range, unique names, disjoint signed sets.
    pub fn validate(&self) -> Result<()> {
        if self.initial.len() != self.num_state_vars {
            return Err(Error::InvalidInput(format!(
                "initial state assigns {} of {} variables",
                self.initial.len(),
                self.num_state_vars
            )));
        }
        if self.names.len() != self.num_state_vars {
            return Err(Error::InvalidInput("names table length mismatch".into()));
        }
        let unique: BTreeSet<&String> = self.names.iter().collect();
        if unique.len() != self.names.len() {
            return Err(Error::InvalidInput("state variable names are not unique".into()));
        }
        let in_range = |set: &BTreeSet<StateVarId>| set.iter().all(|&i| i < self.num_state_vars);
        if !in_range(&self.goals_pos) || !in_range(&self.goals_neg) {
            return Err(Error::InvalidInput("goal references an unknown variable".into()));
        }
        for a in &self.actions {
            a.check_invariants()?;
            for set in [&a.pre_pos, &a.pre_neg, &a.eff_pos, &a.eff_neg] {
                if !in_range(set) {
                    return Err(Error::InvalidInput(format!(
                        "action {} references an unknown variable",
                        a.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn goal_satisfied(&self, state: &State) -> bool {
        self.goals_pos.iter().all(|&i| state[i]) && self.goals_neg.iter().all(|&i| !state[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PlanningProblem = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    /// Emits a PDDL domain/problem pair (STRIPS subset). The
    /// `:negative-preconditions` requirement flag is added only when needed.
    pub fn to_pddl(&self, domain_name: &str, problem_name: &str) -> (String, String) {
        let has_neg_pre = self.actions.iter().any(|a| !a.pre_neg.is_empty());
        let pred = |i: StateVarId| format!("({})", sanitize(&self.names[i]));

        let mut dom = String::new();
        dom.push_str(&format!("(define (domain {})\n", domain_name));
        dom.push_str(&format!(
            "  (:requirements :strips{})\n",
            if has_neg_pre { " :negative-preconditions" } else { "" }
        ));
        dom.push_str("  (:predicates");
        for i in 0..self.num_state_vars {
            dom.push_str(&format!(" {}", pred(i)));
        }
        dom.push_str(")\n");
        for a in &self.actions {
            dom.push_str(&format!("  (:action {}\n", sanitize(&a.name)));
            let mut pre: Vec<String> = a.pre_pos.iter().map(|&i| pred(i)).collect();
            pre.extend(a.pre_neg.iter().map(|&i| format!("(not {})", pred(i))));
            dom.push_str(&format!("    :precondition (and {})\n", pre.join(" ")));
            let mut eff: Vec<String> = a.eff_pos.iter().map(|&i| pred(i)).collect();
            eff.extend(a.eff_neg.iter().map(|&i| format!("(not {})", pred(i))));
            dom.push_str(&format!("    :effect (and {}))\n", eff.join(" ")));
        }
        dom.push_str(")\n");

        let mut prob = String::new();
        prob.push_str(&format!(
            "(define (problem {}) (:domain {})\n",
            problem_name, domain_name
        ));
        let init: Vec<String> = (0..self.num_state_vars)
            .filter(|&i| self.initial[i])
            .map(pred)
            .collect();
        prob.push_str(&format!("  (:init {})\n", init.join(" ")));
        let mut goals: Vec<String> = self.goals_pos.iter().map(|&i| pred(i)).collect();
        goals.extend(self.goals_neg.iter().map(|&i| format!("(not {})", pred(i))));
        prob.push_str(&format!("  (:goal (and {})))\n", goals.join(" ")));
        (dom, prob)
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// A plan: an ordered list of steps, each a set of action ids. Singleton
/// steps give a linear plan; larger steps are parallel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<BTreeSet<ActionId>>,
}

impl Plan {
    pub fn linear(actions: &[ActionId]) -> Self {
        Self {
            steps: actions.iter().map(|&a| BTreeSet::from([a])).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Why a plan failed validation, with the 1-based step it failed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanFailure {
    UnmetPrecondition { step: usize, action: ActionId, var: StateVarId },
    ConflictingActions { step: usize, first: ActionId, second: ActionId },
    GoalNotReached { var: StateVarId },
}

/// Outcome of [`validate_plan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationResult {
    Valid,
    Invalid(PlanFailure),
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationResult::Valid)
    }
}

/// Two actions placed in the same step conflict when an effect of one
/// contradicts a precondition or effect of the other, or when they share an
/// effect (shared effects would overcompensate the flip-penalty bookkeeping
/// used by the quadratic encoding, so they are ruled out as well).
pub fn actions_conflict(a: &Action, b: &Action) -> bool {
    let hits = |x: &BTreeSet<StateVarId>, y: &BTreeSet<StateVarId>| {
        x.intersection(y).next().is_some()
    };
    // positive precondition or negative effect vs. negative effect
    if a.pre_pos.union(&a.eff_neg).any(|i| b.eff_neg.contains(i))
        || b.pre_pos.union(&b.eff_neg).any(|i| a.eff_neg.contains(i))
    {
        return true;
    }
    // negative precondition or positive effect vs. positive effect
    if a.pre_neg.union(&a.eff_pos).any(|i| b.eff_pos.contains(i))
        || b.pre_neg.union(&b.eff_pos).any(|i| a.eff_pos.contains(i))
    {
        return true;
    }
    // contradictory effects
    hits(&a.eff_pos, &b.eff_neg) || hits(&a.eff_neg, &b.eff_pos)
}

/// Applies a single action to a state. The preconditions must hold;
/// otherwise the violated variable is reported.
pub fn apply_action(state: &State, action: &Action) -> Result<State> {
    for &i in &action.pre_pos {
        if !state[i] {
            return Err(Error::InvalidInput(format!(
                "precondition violated: variable {} must be true",
                i
            )));
        }
    }
    for &i in &action.pre_neg {
        if state[i] {
            return Err(Error::InvalidInput(format!(
                "precondition violated: variable {} must be false",
                i
            )));
        }
    }
    let mut next = state.clone();
    for &i in &action.eff_pos {
        next[i] = true;
    }
    for &i in &action.eff_neg {
        next[i] = false;
    }
    Ok(next)
}

/// Validates a (possibly parallel) plan against a problem.
///
/// A plan is valid when every step's actions are applicable in the prior
/// state and pairwise non-conflicting, effects are applied, untouched
/// variables persist, and the final state satisfies the goals.
pub fn validate_plan(problem: &PlanningProblem, plan: &Plan) -> Result<ValidationResult> {
    let mut state = problem.initial.clone();
    for (idx, step) in plan.steps.iter().enumerate() {
        let step_no = idx + 1;
        for &a in step {
            if a >= problem.actions.len() {
                return Err(Error::InvalidInput(format!("unknown action id {}", a)));
            }
        }
        let ids: Vec<ActionId> = step.iter().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            let act = &problem.actions[a];
            for &v in &act.pre_pos {
                if !state[v] {
                    return Ok(ValidationResult::Invalid(PlanFailure::UnmetPrecondition {
                        step: step_no,
                        action: a,
                        var: v,
                    }));
                }
            }
            for &v in &act.pre_neg {
                if state[v] {
                    return Ok(ValidationResult::Invalid(PlanFailure::UnmetPrecondition {
                        step: step_no,
                        action: a,
                        var: v,
                    }));
                }
            }
            for &b in &ids[i + 1..] {
                if actions_conflict(act, &problem.actions[b]) {
                    return Ok(ValidationResult::Invalid(PlanFailure::ConflictingActions {
                        step: step_no,
                        first: a,
                        second: b,
                    }));
                }
            }
        }
        for &a in &ids {
            let act = &problem.actions[a];
            for &v in &act.eff_pos {
                state[v] = true;
            }
            for &v in &act.eff_neg {
                state[v] = false;
            }
        }
    }
    for &v in &problem.goals_pos {
        if !state[v] {
            return Ok(ValidationResult::Invalid(PlanFailure::GoalNotReached { var: v }));
        }
    }
    for &v in &problem.goals_neg {
        if state[v] {
            return Ok(ValidationResult::Invalid(PlanFailure::GoalNotReached { var: v }));
        }
    }
    Ok(ValidationResult::Valid)
}
