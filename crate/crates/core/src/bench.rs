//! Experiment harness: compile whole benchmark sets, embed them, sweep the
//! internal coupling, solve with the simulated annealer, and summarize as
//! flat CSV tables.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{
    run_protocol_observed, AnnealProtocol, HitKind, RunStats, SimulatedAnnealer,
};
use crate::chimera::ChimeraGraph;
use crate::embedding::{
    embed_ising, find_embedding, median_of_sorted, percentile_nearest_rank, EmbedderConfig,
    Embedding,
};
use crate::error::{Error, Result};
use crate::gen::{generate_benchmark, mix_seed, BenchmarkInstance, Family};
use crate::mappings::direct::{
    coloring_plan, decode_coloring, decode_hampath, direct_coloring_qubo, direct_hampath_qubo,
    hampath_plan,
};
use crate::mappings::{cnf_qubo, plan_length_for, time_slice_qubo, Mapping, TimeSliceOptions};
use crate::planning::{validate_plan, Plan, PlanningProblem};
use crate::pubo::{lift_assignment, qubo_to_ising, Qubo};

/// A full sweep specification: which benchmark slices to run and how hard.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub mappings: Vec<Mapping>,
    pub j_int_grid: Vec<f64>,
    pub instances_per_size: usize,
    pub protocol: AnnealProtocol,
    pub m: usize,
    pub l: usize,
    #[serde(default)]
    pub broken: Vec<u32>,
    pub embed_runs: usize,
    pub embed_tries: usize,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            family: Family::Scheduling,
            sizes: (8..=10).collect(),
            mappings: vec![Mapping::Direct],
            j_int_grid: (0..=6).map(|i| 1.0 + 0.1 * i as f64).collect(),
            instances_per_size: 25,
            protocol: AnnealProtocol::desk_scale(),
            m: 8,
            l: 4,
            broken: Vec::new(),
            embed_runs: 11,
            embed_tries: 10,
            seed: 0,
        }
    }
}

/// One result line: an instance solved under one mapping at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    pub mapping: String,
    pub n: usize,
    pub instance: u64,
    pub j_int: f64,
    pub qubo_vars: usize,
    pub qubo_couplings: usize,
    pub embed_success_runs: usize,
    pub embed_total: usize,
    pub comp_avg: f64,
    pub comp_median: f64,
    pub comp_p65: usize,
    pub comp_p90: usize,
    pub comp_max: usize,
    pub r_raw: f64,
    pub r_corrected: f64,
    pub k_raw: Option<f64>,
    pub tts_raw_us: Option<f64>,
    pub tts_corr_us: Option<f64>,
    pub censored: bool,
    pub hits_checked: usize,
    pub hits_invalid: usize,
}

pub const RESULT_HEADER: &str = "family,mapping,n,instance,j_int,qubo_vars,qubo_couplings,embed_success_runs,embed_total,comp_avg,comp_median,comp_p65,comp_p90,comp_max,r_raw,r_corrected,k_raw,tts_raw_us,tts_corr_us,censored,hits_checked,hits_invalid";

fn opt_to_csv(v: Option<f64>) -> String {
    v.map_or_else(|| "censored".to_string(), |x| x.to_string())
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.mapping,
            self.n,
            self.instance,
            self.j_int,
            self.qubo_vars,
            self.qubo_couplings,
            self.embed_success_runs,
            self.embed_total,
            self.comp_avg,
            self.comp_median,
            self.comp_p65,
            self.comp_p90,
            self.comp_max,
            self.r_raw,
            self.r_corrected,
            opt_to_csv(self.k_raw),
            opt_to_csv(self.tts_raw_us),
            opt_to_csv(self.tts_corr_us),
            self.censored,
            self.hits_checked,
            self.hits_invalid
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 22 {
            return Err(Error::Parse(format!("expected 22 fields, got {}", f.len())));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s == "censored" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number '{}'", s)))
            }
        };
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse(format!("bad number '{}'", s)))
        };
        let int = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse(format!("bad integer '{}'", s)))
        };
        Ok(ResultRow {
            family: f[0].to_string(),
            mapping: f[1].to_string(),
            n: int(f[2])?,
            instance: f[3].parse().map_err(|_| Error::Parse("bad instance".into()))?,
            j_int: num(f[4])?,
            qubo_vars: int(f[5])?,
            qubo_couplings: int(f[6])?,
            embed_success_runs: int(f[7])?,
            embed_total: int(f[8])?,
            comp_avg: num(f[9])?,
            comp_median: num(f[10])?,
            comp_p65: int(f[11])?,
            comp_p90: int(f[12])?,
            comp_max: int(f[13])?,
            r_raw: num(f[14])?,
            r_corrected: num(f[15])?,
            k_raw: opt(f[16])?,
            tts_raw_us: opt(f[17])?,
            tts_corr_us: opt(f[18])?,
            censored: f[19]
                .parse()
                .map_err(|_| Error::Parse("bad censored flag".into()))?,
            hits_checked: int(f[20])?,
            hits_invalid: int(f[21])?,
        })
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Parses a results CSV, counting and skipping malformed rows.
pub fn parse_results_csv(text: &str) -> (Vec<ResultRow>, usize) {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for line in text.lines().skip_while(|l| l.trim() == RESULT_HEADER) {
        let line = line.trim();
        if line.is_empty() || line == RESULT_HEADER {
            continue;
        }
        match ResultRow::from_csv(line) {
            Ok(r) => rows.push(r),
            Err(_) => skipped += 1,
        }
    }
    (rows, skipped)
}

/// A compiled instance: the QUBO plus enough context to decode and check
/// solutions.
pub struct CompiledInstance {
    pub qubo: Qubo,
    pub problem: PlanningProblem,
    decoder: Decoder,
}

enum Decoder {
    Coloring { n: usize, k: usize },
    HamPath { n: usize },
    TimeSlice(crate::mappings::TimeSliceLayout),
    Cnf {
        cnf: crate::mappings::CnfFormula,
        certificate: crate::pubo::ReductionCertificate,
    },
}

impl CompiledInstance {
    /// Turns a logical QUBO assignment into a plan, when one is readable.
    pub fn decode_plan(&self, bits: &[bool]) -> Option<Plan> {
        match &self.decoder {
            Decoder::Coloring { n, k } => {
                decode_coloring(*n, *k, bits).map(|colors| coloring_plan(&colors, *k))
            }
            Decoder::HamPath { n } => decode_hampath(*n, bits).map(|order| hampath_plan(&order)),
            Decoder::TimeSlice(layout) => Some(layout.decode_plan(bits)),
            Decoder::Cnf { cnf, certificate } => {
                if !crate::pubo::check_ancilla_consistency(certificate, bits) {
                    return None;
                }
                Some(cnf.decode_plan(&lift_assignment(certificate, bits)))
            }
        }
    }

    /// True when the decoded logical assignment is an actual solution of the
    /// underlying planning problem.
    pub fn check_solution(&self, bits: &[bool]) -> bool {
        match self.decode_plan(bits) {
            Some(plan) => validate_plan(&self.problem, &plan)
                .map(|r| r.is_valid())
                .unwrap_or(false),
            None => false,
        }
    }
}

/// Compiles one benchmark instance under the chosen mapping.
pub fn compile_instance(
    family: Family,
    mapping: Mapping,
    inst: &BenchmarkInstance,
) -> Result<CompiledInstance> {
    let n = inst.graph.num_vertices;
    let plan_len = plan_length_for(family, n)?;
    let problem = inst.problem.clone();
    Ok(match mapping {
        Mapping::Direct => match family {
            Family::Scheduling => CompiledInstance {
                qubo: direct_coloring_qubo(&inst.graph, 3)?,
                problem,
                decoder: Decoder::Coloring { n, k: 3 },
            },
            Family::Navigation => CompiledInstance {
                qubo: direct_hampath_qubo(&inst.graph)?,
                problem,
                decoder: Decoder::HamPath { n },
            },
        },
        Mapping::TimeSlice => {
            let options = TimeSliceOptions::for_family(family);
            let (qubo, layout) = time_slice_qubo(&problem, plan_len, &options)?;
            CompiledInstance {
                qubo,
                problem,
                decoder: Decoder::TimeSlice(layout),
            }
        }
        Mapping::Cnf => {
            let out = cnf_qubo(&problem, plan_len)?;
            CompiledInstance {
                qubo: out.qubo,
                problem,
                decoder: Decoder::Cnf {
                    cnf: out.cnf,
                    certificate: out.certificate,
                },
            }
        }
    })
}

/// Runs the embedder `runs` times and keeps the smallest success.
pub fn best_of_embedding_runs(
    qubo: &Qubo,
    hardware: &ChimeraGraph,
    runs: usize,
    tries: usize,
    seed: u64,
) -> (usize, Option<Embedding>) {
    let source = qubo.interaction_graph();
    let results: Vec<Option<Embedding>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let cfg = EmbedderConfig {
                tries,
                seed: mix_seed(seed, run as u64),
                ..EmbedderConfig::default()
            };
            find_embedding(&source, hardware, &cfg)
        })
        .collect();
    let successes = results.iter().flatten().count();
    let best = results
        .into_iter()
        .flatten()
        .min_by_key(|e| e.total_size());
    (successes, best)
}

/// Solves every (size, mapping, instance, j_int) combination in the spec and
/// returns one row per combination, in deterministic order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    let hardware = ChimeraGraph::new(spec.m, spec.l, &spec.broken)?;
    let mut rows = Vec::new();
    for &n in &spec.sizes {
        let set = generate_benchmark(spec.family, n, spec.instances_per_size, spec.seed)?;
        for &mapping in &spec.mappings {
            let per_instance: Vec<Vec<ResultRow>> = set
                .instances
                .par_iter()
                .map(|inst| solve_instance(spec, &hardware, mapping, n, inst))
                .collect::<Result<Vec<_>>>()?;
            for batch in per_instance {
                rows.extend(batch);
            }
        }
    }
    Ok(rows)
}

fn solve_instance(
    spec: &SweepSpec,
    hardware: &ChimeraGraph,
    mapping: Mapping,
    n: usize,
    inst: &BenchmarkInstance,
) -> Result<Vec<ResultRow>> {
    let compiled = compile_instance(spec.family, mapping, inst)?;
    let qubo_vars = compiled.qubo.num_vars();
    let qubo_couplings = compiled.qubo.num_couplings();
    let embed_seed = mix_seed(spec.seed, inst.index ^ (mapping as u64) << 56);
    let (successes, best) = best_of_embedding_runs(
        &compiled.qubo,
        hardware,
        spec.embed_runs,
        spec.embed_tries,
        embed_seed,
    );

    let mut rows = Vec::new();
    match best {
        None => {
            // embedding failure: one censored row per coupling value
            for &j_int in &spec.j_int_grid {
                rows.push(ResultRow {
                    family: spec.family.name().to_string(),
                    mapping: mapping.name().to_string(),
                    n,
                    instance: inst.index,
                    j_int,
                    qubo_vars,
                    qubo_couplings,
                    embed_success_runs: 0,
                    embed_total: 0,
                    comp_avg: 0.0,
                    comp_median: 0.0,
                    comp_p65: 0,
                    comp_p90: 0,
                    comp_max: 0,
                    r_raw: 0.0,
                    r_corrected: 0.0,
                    k_raw: None,
                    tts_raw_us: None,
                    tts_corr_us: None,
                    censored: true,
                    hits_checked: 0,
                    hits_invalid: 0,
                });
            }
        }
        Some(embedding) => {
            let metrics = embedding.metrics();
            let logical = qubo_to_ising(&compiled.qubo);
            for &j_int in &spec.j_int_grid {
                let hw = embed_ising(&logical, &embedding, j_int)?;
                let protocol = AnnealProtocol {
                    seed: mix_seed(spec.seed, inst.index ^ j_int.to_bits()),
                    ..spec.protocol.clone()
                };
                let sampler = SimulatedAnnealer::from_protocol(&protocol);
                let mut hits_checked = 0usize;
                let mut hits_invalid = 0usize;
                let stats: RunStats = run_protocol_observed(
                    &logical,
                    &hw,
                    &embedding,
                    0.0,
                    &protocol,
                    &sampler,
                    &mut |kind, bits| {
                        if kind == HitKind::Corrected {
                            hits_checked += 1;
                            if !compiled.check_solution(bits) {
                                hits_invalid += 1;
                            }
                        }
                    },
                )?;
                rows.push(ResultRow {
                    family: spec.family.name().to_string(),
                    mapping: mapping.name().to_string(),
                    n,
                    instance: inst.index,
                    j_int,
                    qubo_vars,
                    qubo_couplings,
                    embed_success_runs: successes,
                    embed_total: metrics.total_size,
                    comp_avg: metrics.average,
                    comp_median: metrics.median,
                    comp_p65: metrics.p65,
                    comp_p90: metrics.p90,
                    comp_max: metrics.max,
                    r_raw: stats.raw.success_rate,
                    r_corrected: stats.corrected.success_rate,
                    k_raw: stats.raw.expected_runs,
                    tts_raw_us: stats.raw.expected_total_anneal_time_us,
                    tts_corr_us: stats.corrected.expected_total_anneal_time_us,
                    censored: stats.raw.censored,
                    hits_checked,
                    hits_invalid,
                });
            }
        }
    }
    Ok(rows)
}

/// Median over a group where censored entries count as +infinity; `None`
/// when the median itself is censored.
fn median_tts(values: &[Option<f64>]) -> Option<f64> {
    let mut sorted: Vec<f64> = values
        .iter()
        .map(|v| v.unwrap_or(f64::INFINITY))
        .collect();
    sorted.sort_by(f64::total_cmp);
    let med = median_of_sorted(&sorted);
    med.is_finite().then_some(med)
}

/// Summary of one group of result rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub keys: BTreeMap<String, String>,
    pub count: usize,
    pub solved: usize,
    pub fraction_solved: f64,
    pub median_tts_us: f64,
    pub p35_tts_us: f64,
    /// `None` when fewer than 65% of the group solved.
    pub p65_tts_us: Option<f64>,
    pub median_qubo_vars: f64,
    pub median_couplings: f64,
    pub median_embed_total: f64,
    pub median_comp_avg: f64,
    pub median_comp_p90: f64,
    pub median_comp_max: f64,
}

fn median_usize(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    median_of_sorted(values)
}

/// Groups result rows by the named keys (`family`, `mapping`, `n`, `j_int`)
/// and summarizes time-to-solution and structural metrics. Groups where at
/// least half the rows are censored are omitted; the 65th percentile is
/// indeterminate when fewer than 65% solved.
pub fn summarize(rows: &[ResultRow], group_keys: &[&str]) -> Result<Vec<SummaryRow>> {
    summarize_with_cutoff(rows, group_keys, None)
}

/// [`summarize`] with an optional effective cutoff: rows whose raw
/// time-to-solution exceeds `tts_cutoff_us` count as censored.
pub fn summarize_with_cutoff(
    rows: &[ResultRow],
    group_keys: &[&str],
    tts_cutoff_us: Option<f64>,
) -> Result<Vec<SummaryRow>> {
    for k in group_keys {
        if !["family", "mapping", "n", "j_int"].contains(k) {
            return Err(Error::InvalidInput(format!("unknown group key '{}'", k)));
        }
    }
    let censor = |tts: Option<f64>| -> Option<f64> {
        match (tts, tts_cutoff_us) {
            (Some(t), Some(cut)) if t > cut => None,
            _ => tts,
        }
    };
    let mut groups: BTreeMap<Vec<String>, Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        let key: Vec<String> = group_keys
            .iter()
            .map(|&k| match k {
                "family" => row.family.clone(),
                "mapping" => row.mapping.clone(),
                "n" => row.n.to_string(),
                _ => row.j_int.to_string(),
            })
            .collect();
        groups.entry(key).or_default().push(row);
    }

    let mut out = Vec::new();
    for (key, group) in groups {
        let count = group.len();
        let solved = group
            .iter()
            .filter(|r| censor(r.tts_raw_us).is_some())
            .count();
        // at least half unsolved: the point is not shown
        if 2 * (count - solved) >= count {
            continue;
        }
        let tts: Vec<Option<f64>> = group.iter().map(|r| censor(r.tts_raw_us)).collect();
        let mut sorted: Vec<f64> = tts.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
        sorted.sort_by(f64::total_cmp);
        let median = median_of_sorted(&sorted);
        let p35 = percentile_nearest_rank(&sorted, 35.0);
        let p65 = if (solved as f64) < 0.65 * count as f64 {
            None
        } else {
            Some(percentile_nearest_rank(&sorted, 65.0))
        };
        let keys: BTreeMap<String, String> = group_keys
            .iter()
            .map(|&k| k.to_string())
            .zip(key.iter().cloned())
            .collect();
        out.push(SummaryRow {
            keys,
            count,
            solved,
            fraction_solved: solved as f64 / count as f64,
            median_tts_us: median,
            p35_tts_us: p35,
            p65_tts_us: p65,
            median_qubo_vars: median_usize(
                &mut group.iter().map(|r| r.qubo_vars as f64).collect::<Vec<_>>(),
            ),
            median_couplings: median_usize(
                &mut group.iter().map(|r| r.qubo_couplings as f64).collect::<Vec<_>>(),
            ),
            median_embed_total: median_usize(
                &mut group.iter().map(|r| r.embed_total as f64).collect::<Vec<_>>(),
            ),
            median_comp_avg: median_usize(
                &mut group.iter().map(|r| r.comp_avg).collect::<Vec<_>>(),
            ),
            median_comp_p90: median_usize(
                &mut group.iter().map(|r| r.comp_p90 as f64).collect::<Vec<_>>(),
            ),
            median_comp_max: median_usize(
                &mut group.iter().map(|r| r.comp_max as f64).collect::<Vec<_>>(),
            ),
        });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str = "keys,count,solved,fraction_solved,median_tts_us,p35_tts_us,p65_tts_us,median_qubo_vars,median_couplings,median_embed_total,median_comp_avg,median_comp_p90,median_comp_max";

pub fn summaries_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let keys: Vec<String> = r.keys.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            keys.join(";"),
            r.count,
            r.solved,
            r.fraction_solved,
            r.median_tts_us,
            r.p35_tts_us,
            r.p65_tts_us.map_or("indeterminate".into(), |v: f64| v.to_string()),
            r.median_qubo_vars,
            r.median_couplings,
            r.median_embed_total,
            r.median_comp_avg,
            r.median_comp_p90,
            r.median_comp_max
        ));
    }
    out
}

/// Per (size, mapping) comparison at the best coupling value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingComparisonRow {
    pub mapping: String,
    pub n: usize,
    /// Coupling with the lowest median time-to-solution, when any group
    /// solved at all.
    pub best_j_int: Option<f64>,
    pub median_tts_us: Option<f64>,
    pub fraction_solved_at_best: f64,
    pub median_qubo_vars: f64,
    pub median_embed_total: f64,
    pub embed_failure_rate: f64,
}

/// Full mapping comparison: sweeps every mapping over the coupling grid and
/// reports each (mapping, size) at its best coupling.
pub fn run_mapping_comparison(spec: &SweepSpec) -> Result<(Vec<ResultRow>, Vec<MappingComparisonRow>)> {
    let rows = run_sweep(spec)?;
    let comparison = mapping_comparison_from_rows(&rows, spec);
    Ok((rows, comparison))
}

pub fn mapping_comparison_from_rows(rows: &[ResultRow], spec: &SweepSpec) -> Vec<MappingComparisonRow> {
    let mut out = Vec::new();
    for &mapping in &spec.mappings {
        for &n in &spec.sizes {
            let slice: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.mapping == mapping.name() && r.n == n)
                .collect();
            if slice.is_empty() {
                continue;
            }
            // best coupling by median raw time-to-solution
            let mut best: Option<(f64, f64)> = None; // (median_tts, j_int)
            for &j_int in &spec.j_int_grid {
                let tts: Vec<Option<f64>> = slice
                    .iter()
                    .filter(|r| r.j_int == j_int)
                    .map(|r| r.tts_raw_us)
                    .collect();
                if tts.is_empty() {
                    continue;
                }
                if let Some(med) = median_tts(&tts) {
                    if best.map_or(true, |(b, _)| med < b) {
                        best = Some((med, j_int));
                    }
                }
            }
            let (median_tts_us, best_j_int) = match best {
                Some((m, j)) => (Some(m), Some(j)),
                None => (None, None),
            };
            let at_best: Vec<&&ResultRow> = slice
                .iter()
                .filter(|r| best_j_int.map_or(false, |j| r.j_int == j))
                .collect();
            let fraction_solved_at_best = if at_best.is_empty() {
                0.0
            } else {
                at_best.iter().filter(|r| !r.censored).count() as f64 / at_best.len() as f64
            };
            let mut qubo_sizes: Vec<f64> = slice.iter().map(|r| r.qubo_vars as f64).collect();
            let mut embed_sizes: Vec<f64> = slice
                .iter()
                .filter(|r| r.embed_success_runs > 0)
                .map(|r| r.embed_total as f64)
                .collect();
            let instances: std::collections::BTreeSet<u64> =
                slice.iter().map(|r| r.instance).collect();
            let failures = instances
                .iter()
                .filter(|&&i| {
                    slice
                        .iter()
                        .any(|r| r.instance == i && r.embed_success_runs == 0)
                })
                .count();
            out.push(MappingComparisonRow {
                mapping: mapping.name().to_string(),
                n,
                best_j_int,
                median_tts_us,
                fraction_solved_at_best,
                median_qubo_vars: median_usize(&mut qubo_sizes),
                median_embed_total: if embed_sizes.is_empty() {
                    0.0
                } else {
                    median_usize(&mut embed_sizes)
                },
                embed_failure_rate: failures as f64 / instances.len().max(1) as f64,
            });
        }
    }
    out
}

/// Median time-to-solution grid over (size, coupling), with best-cell marks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JintTable {
    pub mapping: String,
    pub sizes: Vec<usize>,
    pub j_int_grid: Vec<f64>,
    /// cells[size_idx][j_idx]: median TTS, `None` when censored/omitted.
    pub cells: Vec<Vec<Option<f64>>>,
    /// Best coupling index per size, `None` when the whole row is censored.
    pub best_per_size: Vec<Option<usize>>,
}

impl JintTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for j in &self.j_int_grid {
            out.push_str(&format!(",jint_{}", j));
        }
        out.push_str(",best_j_int\n");
        for (si, &n) in self.sizes.iter().enumerate() {
            out.push_str(&n.to_string());
            for cell in &self.cells[si] {
                out.push_str(&format!(",{}", opt_to_csv(*cell)));
            }
            match self.best_per_size[si] {
                Some(bi) => out.push_str(&format!(",{}\n", self.j_int_grid[bi])),
                None => out.push_str(",censored\n"),
            }
        }
        out
    }
}

/// Sweeps the coupling grid for one mapping and pivots the results into a
/// size-by-coupling median table.
pub fn run_jint_sweep(spec: &SweepSpec, mapping: Mapping) -> Result<(Vec<ResultRow>, JintTable)> {
    let sub = SweepSpec {
        mappings: vec![mapping],
        ..spec.clone()
    };
    let rows = run_sweep(&sub)?;
    let table = jint_table_from_rows(&rows, &sub, mapping);
    Ok((rows, table))
}

pub fn jint_table_from_rows(rows: &[ResultRow], spec: &SweepSpec, mapping: Mapping) -> JintTable {
    let mut cells = Vec::new();
    let mut best_per_size = Vec::new();
    for &n in &spec.sizes {
        let mut row_cells = Vec::new();
        let mut best: Option<(f64, usize)> = None;
        for (ji, &j_int) in spec.j_int_grid.iter().enumerate() {
            let tts: Vec<Option<f64>> = rows
                .iter()
                .filter(|r| r.n == n && r.j_int == j_int && r.mapping == mapping.name())
                .map(|r| r.tts_raw_us)
                .collect();
            let med = if tts.is_empty() { None } else { median_tts(&tts) };
            if let Some(m) = med {
                if best.map_or(true, |(b, _)| m < b) {
                    best = Some((m, ji));
                }
            }
            row_cells.push(med);
        }
        cells.push(row_cells);
        best_per_size.push(best.map(|(_, ji)| ji));
    }
    JintTable {
        mapping: mapping.name().to_string(),
        sizes: spec.sizes.clone(),
        j_int_grid: spec.j_int_grid.clone(),
        cells,
        best_per_size,
    }
}

/// One cell of the architecture embeddability study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchCell {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub runs: usize,
    pub successes: usize,
    pub min_embedding_size: Option<usize>,
}

/// Embeds the intersecting-cliques graph IC_{k,k} for every k up to `max_k`
/// into every (M, L) architecture, `runs` independent embedder runs each,
/// recording success counts and the minimum embedding size.
pub fn run_architecture_study(
    max_k: usize,
    m_values: &[usize],
    l_values: &[usize],
    runs: usize,
    tries: usize,
    seed: u64,
) -> Result<Vec<ArchCell>> {
    let mut jobs = Vec::new();
    for &m in m_values {
        for &l in l_values {
            for k in 1..=max_k {
                jobs.push((k, m, l));
            }
        }
    }
    jobs.par_iter()
        .map(|&(k, m, l)| {
            let hardware = ChimeraGraph::new(m, l, &[])?;
            let source = crate::chimera::ic_graph(k);
            let sizes: Vec<Option<usize>> = (0..runs)
                .into_par_iter()
                .map(|run| {
                    let cfg = EmbedderConfig {
                        tries,
                        seed: mix_seed(seed, (k * 1_000_000 + m * 10_000 + l * 100) as u64 + run as u64),
                        ..EmbedderConfig::default()
                    };
                    find_embedding(&source, &hardware, &cfg).map(|e| e.total_size())
                })
                .collect();
            let successes = sizes.iter().flatten().count();
            Ok(ArchCell {
                k,
                m,
                l,
                runs,
                successes,
                min_embedding_size: sizes.into_iter().flatten().min(),
            })
        })
        .collect()
}

/// Largest k such that every size up to k embedded at least once on (m, l).
pub fn largest_reliable_k(cells: &[ArchCell], m: usize, l: usize) -> usize {
    let mut best = 0;
    loop {
        let next = best + 1;
        let ok = cells
            .iter()
            .any(|c| c.m == m && c.l == l && c.k == next && c.successes > 0);
        if ok {
            best = next;
        } else {
            return best;
        }
    }
}

pub fn arch_study_to_csv(cells: &[ArchCell]) -> String {
    let mut out = String::from("k,m,l,runs,successes,min_embedding_size\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.k,
            c.m,
            c.l,
            c.runs,
            c.successes,
            c.min_embedding_size
                .map_or("none".into(), |v: usize| v.to_string())
        ));
    }
    out
}

/// Paired raw-versus-corrected comparison per size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcComparisonRow {
    pub n: usize,
    pub instances: usize,
    pub corrected_not_worse: usize,
    pub median_tts_raw_us: Option<f64>,
    pub median_tts_corrected_us: Option<f64>,
}

/// Error-correction comparison: pairs each instance's raw and corrected
/// time-to-solution at the per-size best coupling.
pub fn run_error_correction_comparison(
    spec: &SweepSpec,
    mapping: Mapping,
) -> Result<(Vec<ResultRow>, Vec<EcComparisonRow>)> {
    let (rows, table) = run_jint_sweep(spec, mapping)?;
    let mut out = Vec::new();
    for (si, &n) in table.sizes.iter().enumerate() {
        let Some(best_ji) = table.best_per_size[si] else {
            out.push(EcComparisonRow {
                n,
                instances: 0,
                corrected_not_worse: 0,
                median_tts_raw_us: None,
                median_tts_corrected_us: None,
            });
            continue;
        };
        let j_int = table.j_int_grid[best_ji];
        let slice: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| r.n == n && r.j_int == j_int)
            .collect();
        let corrected_not_worse = slice
            .iter()
            .filter(|r| r.r_corrected >= r.r_raw)
            .count();
        let raw: Vec<Option<f64>> = slice.iter().map(|r| r.tts_raw_us).collect();
        let corr: Vec<Option<f64>> = slice.iter().map(|r| r.tts_corr_us).collect();
        out.push(EcComparisonRow {
            n,
            instances: slice.len(),
            corrected_not_worse,
            median_tts_raw_us: median_tts(&raw),
            median_tts_corrected_us: median_tts(&corr),
        });
    }
    Ok((rows, out))
}
