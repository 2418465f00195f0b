//! Pseudo-Boolean polynomials over binary variables, with QUBO and Ising
//! specializations, CNF-clause penalty terms, and greedy pair-substitution
//! degree reduction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// A multilinear polynomial over `{0,1}` variables.
///
/// Monomials are sorted variable-id sets; the constant term is keyed by the
/// empty set. Zero-coefficient entries are dropped on normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoBooleanPolynomial {
    pub num_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PseudoBooleanPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(&[], c);
        p
    }

    /// Adds `coeff * prod(vars)`. The variable list is deduplicated and
    /// sorted; a resulting zero coefficient removes the entry.
    pub fn add_term(&mut self, vars: &[u32], coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let mut key: Vec<u32> = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        for &v in &key {
            debug_assert!((v as usize) < self.num_vars, "variable id out of range");
        }
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            let mut key: Vec<u32> = vars.to_vec();
            key.sort_unstable();
            key.dedup();
            self.terms.remove(&key);
        }
    }

    pub fn add_polynomial(&mut self, other: &Self, scale: f64) {
        for (m, &c) in &other.terms {
            self.add_term(m, c * scale);
        }
    }

    /// Multilinear product (`x*x = x`), expanding term by term.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.num_vars.max(other.num_vars));
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                let mut m: Vec<u32> = m1.iter().chain(m2.iter()).copied().collect();
                m.sort_unstable();
                m.dedup();
                out.add_term(&m, c1 * c2);
            }
        }
        out
    }

    /// Fixes one variable to a constant, folding it out of every monomial.
    pub fn substitute(&self, var: u32, value: bool) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, &c) in &self.terms {
            if m.contains(&var) {
                if value {
                    let rest: Vec<u32> = m.iter().copied().filter(|&v| v != var).collect();
                    out.add_term(&rest, c);
                }
                // value == false kills the term
            } else {
                out.add_term(m, c);
            }
        }
        out
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        if assignment.len() != self.num_vars {
            return Err(Error::InvalidInput(format!(
                "assignment covers {} of {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        Ok(self.evaluate_unchecked(assignment))
    }

    pub(crate) fn evaluate_unchecked(&self, assignment: &[bool]) -> f64 {
        let mut e = 0.0;
        for (m, &c) in &self.terms {
            if m.iter().all(|&v| assignment[v as usize]) {
                e += c;
            }
        }
        e
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, vars: &[u32]) -> f64 {
        let mut key: Vec<u32> = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    /// Grows the variable space without touching existing terms.
    pub fn extend_vars(&mut self, new_num_vars: usize) {
        assert!(new_num_vars >= self.num_vars);
        self.num_vars = new_num_vars;
    }
}

/// A pseudo-Boolean polynomial of degree at most two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    poly: PseudoBooleanPolynomial,
}

impl Qubo {
    pub fn new(poly: PseudoBooleanPolynomial) -> Result<Self> {
        if poly.degree() > 2 {
            return Err(Error::InvalidInput(format!(
                "polynomial has degree {}, expected at most 2",
                poly.degree()
            )));
        }
        Ok(Self { poly })
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            poly: PseudoBooleanPolynomial::zero(num_vars),
        }
    }

    pub fn poly(&self) -> &PseudoBooleanPolynomial {
        &self.poly
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        self.poly.evaluate(assignment)
    }

    /// Number of quadratic terms (couplings).
    pub fn num_couplings(&self) -> usize {
        self.poly.terms().filter(|(m, _)| m.len() == 2).count()
    }

    /// Graph on the QUBO variables with an edge per quadratic term.
    pub fn interaction_graph(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.num_vars());
        for (m, _) in self.poly.terms() {
            if m.len() == 2 {
                g.add_edge(m[0], m[1]);
            }
        }
        g
    }

    /// Text form: `p qubo <num_vars> <num_terms>` header, then `i j coeff`
    /// lines (`i == j` linear, `i < j` quadratic). The constant term, when
    /// nonzero, is carried in an `# offset` comment so energies round-trip.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        let offset = self.poly.constant_term();
        let mut body: Vec<String> = Vec::new();
        for (m, c) in self.poly.terms() {
            match m.len() {
                0 => {}
                1 => body.push(format!("{} {} {}", m[0], m[0], c)),
                2 => body.push(format!("{} {} {}", m[0], m[1], c)),
                _ => unreachable!("degree invariant"),
            }
        }
        lines.push(format!("p qubo {} {}", self.num_vars(), body.len()));
        if offset != 0.0 {
            lines.push(format!("# offset {}", offset));
        }
        lines.extend(body);
        lines.join("\n") + "\n"
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (num_vars, offset, entries) = parse_coeff_text(text, "qubo")?;
        let mut poly = PseudoBooleanPolynomial::zero(num_vars);
        poly.add_term(&[], offset);
        for (i, j, c) in entries {
            if i == j {
                poly.add_term(&[i], c);
            } else {
                poly.add_term(&[i, j], c);
            }
        }
        Qubo::new(poly)
    }
}

/// Ising model `E(s) = offset - sum_i h_i s_i + sum_{i<j} J_ij s_i s_j`
/// over spins `s_i ∈ {-1,+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub num_spins: usize,
    /// Local fields h_i, keyed by spin index.
    pub fields: BTreeMap<u32, f64>,
    /// Couplings J_ij on unordered pairs, keyed `(i, j)` with `i < j`.
    pub couplings: BTreeMap<(u32, u32), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn new(num_spins: usize) -> Self {
        Self {
            num_spins,
            fields: BTreeMap::new(),
            couplings: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn set_field(&mut self, i: u32, h: f64) {
        if h == 0.0 {
            self.fields.remove(&i);
        } else {
            self.fields.insert(i, h);
        }
    }

    pub fn add_coupling(&mut self, i: u32, j: u32, jij: f64) {
        assert!(i != j, "couplings join distinct spins");
        let key = if i < j { (i, j) } else { (j, i) };
        let e = self.couplings.entry(key).or_insert(0.0);
        *e += jij;
        if *e == 0.0 {
            self.couplings.remove(&key);
        }
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.num_spins {
            return Err(Error::InvalidInput(format!(
                "spin vector covers {} of {} spins",
                spins.len(),
                self.num_spins
            )));
        }
        let mut e = self.offset;
        for (&i, &h) in &self.fields {
            e -= h * spins[i as usize] as f64;
        }
        for (&(i, j), &jij) in &self.couplings {
            e += jij * spins[i as usize] as f64 * spins[j as usize] as f64;
        }
        Ok(e)
    }

    /// Text form mirroring the QUBO format with a `p ising` header; `i i h`
    /// lines carry fields, `i j J` lines carry couplings.
    pub fn to_text(&self) -> String {
        let mut body: Vec<String> = Vec::new();
        for (&i, &h) in &self.fields {
            body.push(format!("{} {} {}", i, i, h));
        }
        for (&(i, j), &jij) in &self.couplings {
            body.push(format!("{} {} {}", i, j, jij));
        }
        let mut lines = vec![format!("p ising {} {}", self.num_spins, body.len())];
        if self.offset != 0.0 {
            lines.push(format!("# offset {}", self.offset));
        }
        lines.extend(body);
        lines.join("\n") + "\n"
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (num_spins, offset, entries) = parse_coeff_text(text, "ising")?;
        let mut m = IsingModel::new(num_spins);
        m.offset = offset;
        for (i, j, c) in entries {
            if i == j {
                let h = m.fields.get(&i).copied().unwrap_or(0.0) + c;
                m.set_field(i, h);
            } else {
                m.add_coupling(i, j, c);
            }
        }
        Ok(m)
    }
}

fn parse_coeff_text(text: &str, kind: &str) -> Result<(usize, f64, Vec<(u32, u32, f64)>)> {
    let mut num_vars = None;
    let mut offset = 0.0;
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("offset") {
                if let Some(v) = it.next() {
                    offset = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad offset", lineno + 1)))?;
                }
            }
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != kind {
                return Err(Error::Parse(format!("line {}: expected 'p {} <n> <terms>'", lineno + 1, kind)));
            }
            num_vars = Some(
                parts[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad variable count", lineno + 1)))?,
            );
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 'i j coeff'", lineno + 1)));
        }
        let i: u32 = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
        let j: u32 = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
        let c: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad coefficient", lineno + 1)))?;
        entries.push((i.min(j), i.max(j), c));
    }
    let num_vars = num_vars.ok_or_else(|| Error::Parse("missing problem header".into()))?;
    Ok((num_vars, offset, entries))
}

/// Converts a QUBO to Ising form via `s_i = 1 - 2 z_i`, tracking the constant
/// offset so energies agree pointwise.
pub fn qubo_to_ising(qubo: &Qubo) -> IsingModel {
    let n = qubo.num_vars();
    let mut ising = IsingModel::new(n);
    let mut offset = 0.0;
    let mut h = vec![0.0f64; n];
    for (m, c) in qubo.poly().terms() {
        match m.len() {
            0 => offset += c,
            1 => {
                // z = (1 - s) / 2
                offset += c / 2.0;
                h[m[0] as usize] += c / 2.0;
            }
            2 => {
                // z_i z_j = (1 - s_i - s_j + s_i s_j) / 4
                offset += c / 4.0;
                h[m[0] as usize] += c / 4.0;
                h[m[1] as usize] += c / 4.0;
                ising.add_coupling(m[0], m[1], c / 4.0);
            }
            _ => unreachable!("degree invariant"),
        }
    }
    for (i, &hi) in h.iter().enumerate() {
        ising.set_field(i as u32, hi);
    }
    ising.offset = offset;
    ising
}

/// Converts an Ising model back to QUBO form via `s_i = 1 - 2 z_i`.
pub fn ising_to_qubo(ising: &IsingModel) -> Qubo {
    let mut poly = PseudoBooleanPolynomial::zero(ising.num_spins);
    poly.add_term(&[], ising.offset);
    for (&i, &h) in &ising.fields {
        // -h s = -h (1 - 2z) = -h + 2h z
        poly.add_term(&[], -h);
        poly.add_term(&[i], 2.0 * h);
    }
    for (&(i, j), &jij) in &ising.couplings {
        // J s_i s_j = J (1 - 2z_i)(1 - 2z_j)
        poly.add_term(&[], jij);
        poly.add_term(&[i], -2.0 * jij);
        poly.add_term(&[j], -2.0 * jij);
        poly.add_term(&[i, j], 4.0 * jij);
    }
    Qubo::new(poly).expect("substitution preserves degree 2")
}

/// Spin values for a bit assignment under `s = 1 - 2z`.
pub fn bits_to_spins(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { -1 } else { 1 }).collect()
}

/// Bit values for a spin configuration under `z = (1 - s) / 2`.
pub fn spins_to_bits(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s < 0).collect()
}

/// Penalty term for one CNF clause: the product over literals of `x` for a
/// negated literal and `(1 - x)` for a plain one. Literals use DIMACS signs
/// with 1-based magnitudes. The expansion evaluates to 1 exactly on
/// assignments that violate the clause; tautologies collapse to zero.
pub fn clause_term(clause: &[i32], num_vars: usize) -> Result<PseudoBooleanPolynomial> {
    if clause.is_empty() {
        return Err(Error::InvalidInput("empty clause has no penalty form".into()));
    }
    let mut product = PseudoBooleanPolynomial::constant(num_vars, 1.0);
    let mut seen: Vec<i32> = Vec::new();
    for &lit in clause {
        if lit == 0 {
            return Err(Error::InvalidInput("literal 0 is not valid".into()));
        }
        if seen.contains(&lit) {
            continue; // duplicate literal
        }
        seen.push(lit);
        let var = (lit.unsigned_abs() - 1) as u32;
        if var as usize >= num_vars {
            return Err(Error::InvalidInput(format!("literal {} out of range", lit)));
        }
        let mut factor = PseudoBooleanPolynomial::zero(num_vars);
        if lit > 0 {
            factor.add_term(&[], 1.0);
            factor.add_term(&[var], -1.0);
        } else {
            factor.add_term(&[var], 1.0);
        }
        product = product.multiply(&factor);
    }
    Ok(product)
}

/// One ancilla substitution performed during degree reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub ancilla: u32,
    pub pair: (u32, u32),
    pub penalty_weight: f64,
}

/// The output of [`reduce_to_quadratic`]: the quadratic polynomial plus the
/// ordered ancilla substitutions that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub substitutions: Vec<Substitution>,
    pub qubo: Qubo,
    pub original_num_vars: usize,
}

/// Reduces a pseudo-Boolean polynomial to quadratic form.
///
/// Each round counts, over monomials of degree at least three, how often
/// every variable pair occurs; the most frequent pair (ties broken by the
/// lexicographically smallest pair) is replaced by a fresh ancilla variable
/// standing for its conjunction. The conjunction is enforced by the penalty
/// `P * (uv - 2ua - 2va + 3a)` with `P` one plus the greater of the positive
/// and negative coefficient-magnitude sums of the rewritten terms, so states
/// violating the conjunction always sit strictly above the consistent ones.
pub fn reduce_to_quadratic(pubo: &PseudoBooleanPolynomial) -> ReductionCertificate {
    let original_num_vars = pubo.num_vars;
    let mut poly = pubo.clone();
    let mut substitutions = Vec::new();

    while poly.degree() > 2 {
        let mut pair_counts: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (m, _) in poly.terms() {
            if m.len() < 3 {
                continue;
            }
            for a in 0..m.len() {
                for b in a + 1..m.len() {
                    *pair_counts.entry((m[a], m[b])).or_insert(0) += 1;
                }
            }
        }
        // BTreeMap iterates pairs in ascending order, so strict '>' keeps the
        // lexicographically smallest pair among ties.
        let (&pair, _) = pair_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .expect("degree > 2 implies a countable pair");
        let (u, v) = pair;

        let ancilla = poly.num_vars as u32;
        let mut next = PseudoBooleanPolynomial::zero(poly.num_vars + 1);
        let mut pos_sum = 0.0;
        let mut neg_sum = 0.0;
        for (m, c) in poly.terms() {
            if m.len() >= 3 && m.contains(&u) && m.contains(&v) {
                if c > 0.0 {
                    pos_sum += c;
                } else {
                    neg_sum += -c;
                }
                let mut rewritten: Vec<u32> =
                    m.iter().copied().filter(|&x| x != u && x != v).collect();
                rewritten.push(ancilla);
                next.add_term(&rewritten, c);
            } else {
                next.add_term(m, c);
            }
        }
        let weight = 1.0 + pos_sum.max(neg_sum);
        next.add_term(&[u, v], weight);
        next.add_term(&[u, ancilla], -2.0 * weight);
        next.add_term(&[v, ancilla], -2.0 * weight);
        next.add_term(&[ancilla], 3.0 * weight);

        substitutions.push(Substitution {
            ancilla,
            pair,
            penalty_weight: weight,
        });
        poly = next;
    }

    ReductionCertificate {
        substitutions,
        qubo: Qubo::new(poly).expect("loop terminates at degree <= 2"),
        original_num_vars,
    }
}

/// Projects an assignment over the reduced variable range back onto the
/// original variables.
pub fn lift_assignment(cert: &ReductionCertificate, reduced: &[bool]) -> Vec<bool> {
    reduced[..cert.original_num_vars].to_vec()
}

/// True when every ancilla equals the conjunction of its pair.
pub fn check_ancilla_consistency(cert: &ReductionCertificate, assignment: &[bool]) -> bool {
    cert.substitutions.iter().all(|s| {
        assignment[s.ancilla as usize]
            == (assignment[s.pair.0 as usize] && assignment[s.pair.1 as usize])
    })
}
