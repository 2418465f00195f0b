//! `planqubo`: generate hard planning instances, compile them to QUBO form,
//! embed into Chimera hardware, solve with a simulated annealer, and
//! summarize benchmark sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use planqubo_core::anneal::{
    brute_force_ground, run_protocol, AnnealProtocol, SimulatedAnnealer,
};
use planqubo_core::bench::{
    arch_study_to_csv, jint_table_from_rows, mapping_comparison_from_rows, parse_results_csv,
    rows_to_csv, run_architecture_study, run_sweep, summaries_to_csv, summarize,
    summarize_with_cutoff, SweepSpec,
};
use planqubo_core::chimera::ChimeraGraph;
use planqubo_core::embedding::{embed_ising, find_embedding, EmbedderConfig, Embedding};
use planqubo_core::gen::{
    generate_benchmark, instance_graph_from_json, instance_to_json, mix_seed, Family,
};
use planqubo_core::mappings::{
    cnf_qubo, direct_coloring_qubo, direct_hampath_qubo, time_slice_qubo, CnfFormula, Mapping,
    TimeSliceOptions,
};
use planqubo_core::planning::PlanningProblem;
use planqubo_core::pubo::{
    clause_term, qubo_to_ising, reduce_to_quadratic, PseudoBooleanPolynomial, Qubo,
};

#[derive(Parser)]
#[command(name = "planqubo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate solvable benchmark instances at the phase transition.
    Gen(GenArgs),
    /// Compile a problem file to a QUBO under one of the three mappings.
    Map(MapArgs),
    /// Reduce a DIMACS CNF file to a QUBO via clause penalties.
    Reduce(ReduceArgs),
    /// Emit a Chimera hardware graph as an edge list.
    Chimera(ChimeraArgs),
    /// Minor-embed a QUBO into a Chimera graph.
    Embed(EmbedArgs),
    /// Sample an embedded QUBO and report hit statistics.
    Solve(SolveArgs),
    /// Run a full generate-compile-embed-solve sweep.
    Sweep(SweepArgs),
    /// Embeddability study of intersecting-cliques graphs across
    /// architectures.
    ArchStudy(ArchStudyArgs),
    /// Summarize a results CSV by group keys.
    Summarize(SummarizeArgs),
}

/// Loads a JSON config file; explicit flags override its fields.
fn with_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

#[derive(Args, serde::Deserialize, Default)]
struct GenArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write PDDL domain/problem files.
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    pddl: bool,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let cfg: GenArgs = with_config(&args.config)?;
    let family = Family::parse(&args.family.or(cfg.family).context("--family required")?)?;
    let n = args.n.or(cfg.n).context("--n required")?;
    let count = args.count.or(cfg.count).unwrap_or(25);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let out = args.out.or(cfg.out).context("--out required")?;
    fs::create_dir_all(&out)?;

    let set = generate_benchmark(family, n, count, seed)?;
    let mut manifest = String::from("instance,seed,solvable,edge_count\n");
    for inst in &set.instances {
        let path = out.join(format!("instance_{:04}.json", inst.index));
        fs::write(&path, serde_json::to_string_pretty(&instance_to_json(inst, family))?)?;
        manifest.push_str(&format!(
            "{},{},{},{}\n",
            inst.index,
            inst.seed,
            inst.solvable,
            inst.graph.num_edges()
        ));
        if args.pddl || cfg.pddl {
            let name = format!("{}_{}_{}", family.name(), n, inst.index);
            let (dom, prob) = inst.problem.to_pddl(&format!("{}-domain", name), &name);
            fs::write(out.join(format!("instance_{:04}_domain.pddl", inst.index)), dom)?;
            fs::write(out.join(format!("instance_{:04}_problem.pddl", inst.index)), prob)?;
        }
    }
    fs::write(out.join("manifest.csv"), manifest)?;
    println!(
        "wrote {} {} instances of size {} to {}",
        set.instances.len(),
        family.name(),
        n,
        out.display()
    );
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct MapArgs {
    #[arg(long)]
    mapping: Option<String>,
    #[arg(long, name = "in")]
    r#in: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plan length; defaults to the problem's hint.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Skip boundary simplification in the time-slice mapping.
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    no_simplify: bool,
    /// Where to write the variable-legend sidecar JSON.
    #[arg(long)]
    legend: Option<PathBuf>,
    /// Where to export the intermediate CNF (cnf mapping only).
    #[arg(long)]
    cnf_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_map(args: MapArgs) -> Result<()> {
    let cfg: MapArgs = with_config(&args.config)?;
    let mapping = Mapping::parse(&args.mapping.or(cfg.mapping).context("--mapping required")?)?;
    let input = args.r#in.or(cfg.r#in).context("--in required")?;
    let out = args.out.or(cfg.out).context("--out required")?;
    let text = fs::read_to_string(&input)?;
    let problem = PlanningProblem::from_json(&text)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;

    let plan_length = args
        .l
        .or(cfg.l)
        .or(problem.plan_length_hint)
        .context("--L required: the problem has no plan length hint")?;

    let (qubo, legend): (Qubo, serde_json::Value) = match mapping {
        Mapping::Direct => {
            let (family, graph) = instance_graph_from_json(&value)
                .context("direct mapping needs a problem file with family/graph metadata")?;
            let qubo = match family {
                Family::Scheduling => direct_coloring_qubo(&graph, 3)?,
                Family::Navigation => direct_hampath_qubo(&graph)?,
            };
            let n = graph.num_vertices;
            let legend: Vec<serde_json::Value> = (0..qubo.num_vars())
                .map(|ix| match family {
                    Family::Scheduling => {
                        serde_json::json!({"kind": "vertex_color", "v": ix / 3, "c": ix % 3})
                    }
                    Family::Navigation => {
                        serde_json::json!({"kind": "vertex_time", "v": ix / n, "t": ix % n})
                    }
                })
                .collect();
            (qubo, serde_json::Value::Array(legend))
        }
        Mapping::TimeSlice => {
            let family = instance_graph_from_json(&value).map(|(f, _)| f).ok();
            let mut options = family
                .map(TimeSliceOptions::for_family)
                .unwrap_or_default();
            if args.no_simplify || cfg.no_simplify {
                options.simplify_boundaries = false;
            }
            let (qubo, layout) = time_slice_qubo(&problem, plan_length, &options)?;
            (qubo, layout.legend())
        }
        Mapping::Cnf => {
            let result = cnf_qubo(&problem, plan_length)?;
            if let Some(cnf_path) = args.cnf_out.clone().or(cfg.cnf_out) {
                fs::write(cnf_path, result.cnf.to_dimacs())?;
            }
            let legend = serde_json::json!({
                "cnf_vars": result.cnf.provenance,
                "substitutions": result.certificate.substitutions,
            });
            (result.qubo, legend)
        }
    };

    fs::write(&out, qubo.to_text())?;
    if let Some(legend_path) = args.legend.or(cfg.legend) {
        fs::write(legend_path, serde_json::to_string_pretty(&legend)?)?;
    }
    println!(
        "{} mapping: {} variables, {} couplings -> {}",
        mapping.name(),
        qubo.num_vars(),
        qubo.num_couplings(),
        out.display()
    );
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct ReduceArgs {
    #[arg(long)]
    cnf: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the ancilla-substitution certificate JSON.
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_reduce(args: ReduceArgs) -> Result<()> {
    let cfg: ReduceArgs = with_config(&args.config)?;
    let cnf_path = args.cnf.or(cfg.cnf).context("--cnf required")?;
    let out = args.out.or(cfg.out).context("--out required")?;
    let cnf = CnfFormula::from_dimacs(&fs::read_to_string(&cnf_path)?)?;
    let mut pubo = PseudoBooleanPolynomial::zero(cnf.num_vars);
    for clause in &cnf.clauses {
        if clause.is_empty() {
            bail!("input contains an empty clause: trivially unsatisfiable");
        }
        pubo.add_polynomial(&clause_term(clause, cnf.num_vars)?, 1.0);
    }
    let cert = reduce_to_quadratic(&pubo);
    fs::write(&out, cert.qubo.to_text())?;
    if let Some(cert_path) = args.cert.or(cfg.cert) {
        fs::write(cert_path, serde_json::to_string_pretty(&cert.substitutions)?)?;
    }
    println!(
        "reduced {} clauses over {} variables to a QUBO on {} variables ({} ancillas)",
        cnf.clauses.len(),
        cnf.num_vars,
        cert.qubo.num_vars(),
        cert.substitutions.len()
    );
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct ChimeraArgs {
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    /// Comma-separated broken qubit indices.
    #[arg(long)]
    broken: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("bad list entry '{}'", p))
        })
        .collect()
}

fn cmd_chimera(args: ChimeraArgs) -> Result<()> {
    let cfg: ChimeraArgs = with_config(&args.config)?;
    let m = args.m.or(cfg.m).context("--M required")?;
    let l = args.l.or(cfg.l).context("--L required")?;
    let broken: Vec<u32> = match args.broken.or(cfg.broken) {
        Some(s) => parse_list(&s)?,
        None => Vec::new(),
    };
    let graph = ChimeraGraph::new(m, l, &broken)?;
    let text = graph.to_edge_list_text();
    match args.out.or(cfg.out) {
        Some(path) => fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct EmbedArgs {
    #[arg(long)]
    qubo: Option<PathBuf>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    broken: Option<String>,
    #[arg(long)]
    tries: Option<usize>,
    /// Independent embedder runs; the best success is kept.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the best embedding JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn load_qubo(path: &Path) -> Result<Qubo> {
    Ok(Qubo::from_text(&fs::read_to_string(path)?)?)
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let cfg: EmbedArgs = with_config(&args.config)?;
    let qubo = load_qubo(&args.qubo.or(cfg.qubo).context("--qubo required")?)?;
    let m = args.m.or(cfg.m).context("--M required")?;
    let l = args.l.or(cfg.l).context("--L required")?;
    let broken: Vec<u32> = match args.broken.or(cfg.broken) {
        Some(s) => parse_list(&s)?,
        None => Vec::new(),
    };
    let hardware = ChimeraGraph::new(m, l, &broken)?;
    let tries = args.tries.or(cfg.tries).unwrap_or(10);
    let runs = args.runs.or(cfg.runs).unwrap_or(11);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);

    let source = qubo.interaction_graph();
    println!("run,success,total_size,avg,median,p65,p90,max");
    let mut best: Option<Embedding> = None;
    for run in 0..runs {
        let config = EmbedderConfig {
            tries,
            seed: mix_seed(seed, run as u64),
            ..EmbedderConfig::default()
        };
        match find_embedding(&source, &hardware, &config) {
            Some(embedding) => {
                let m = embedding.metrics();
                println!(
                    "{},true,{},{},{},{},{},{}",
                    run, m.total_size, m.average, m.median, m.p65, m.p90, m.max
                );
                if best
                    .as_ref()
                    .map_or(true, |b| embedding.total_size() < b.total_size())
                {
                    best = Some(embedding);
                }
            }
            None => println!("{},false,,,,,,", run),
        }
    }
    match best {
        Some(embedding) => {
            let metrics = embedding.metrics();
            eprintln!(
                "best embedding: {} qubits, max component {}",
                metrics.total_size, metrics.max
            );
            if let Some(path) = args.out.or(cfg.out) {
                fs::write(path, serde_json::to_string_pretty(&embedding.to_json())?)?;
            }
        }
        None => bail!("no embedding found in {} runs", runs),
    }
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct SolveArgs {
    #[arg(long)]
    qubo: Option<PathBuf>,
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    broken: Option<String>,
    #[arg(long)]
    jint: Option<f64>,
    #[arg(long)]
    anneals: Option<usize>,
    #[arg(long)]
    gauges: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Target ground energy of the logical QUBO (0 for solvable instances).
    #[arg(long)]
    ground_energy: Option<f64>,
    /// Compute the ground energy exactly instead (up to 26 variables).
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    exact_ground: bool,
    /// Where to write the run statistics JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Results CSV to append to.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    instance_label: Option<String>,
    #[arg(long)]
    mapping_label: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let cfg: SolveArgs = with_config(&args.config)?;
    let qubo_path = args.qubo.or(cfg.qubo).context("--qubo required")?;
    let qubo = load_qubo(&qubo_path)?;
    let m = args.m.or(cfg.m).context("--M required")?;
    let l = args.l.or(cfg.l).context("--L required")?;
    let broken: Vec<u32> = match args.broken.or(cfg.broken) {
        Some(s) => parse_list(&s)?,
        None => Vec::new(),
    };
    let hardware = ChimeraGraph::new(m, l, &broken)?;
    let embedding_path = args.embedding.or(cfg.embedding).context("--embedding required")?;
    let embedding_value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&embedding_path)?)?;
    let embedding =
        Embedding::from_json(&embedding_value, qubo.interaction_graph(), hardware)?;
    embedding
        .validate()
        .map_err(|v| anyhow::anyhow!("invalid embedding: {:?}", v))?;

    let j_int = args.jint.or(cfg.jint).unwrap_or(1.3);
    let protocol = AnnealProtocol {
        anneals_per_gauge: args.anneals.or(cfg.anneals).unwrap_or(45_000),
        num_gauges: args.gauges.or(cfg.gauges).unwrap_or(10),
        sa_sweeps: args.sweeps.or(cfg.sweeps).unwrap_or(100),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        ..AnnealProtocol::default()
    };
    let ground = if args.exact_ground || cfg.exact_ground {
        brute_force_ground(qubo.poly())?.0
    } else {
        args.ground_energy.or(cfg.ground_energy).unwrap_or(0.0)
    };

    let logical = qubo_to_ising(&qubo);
    let hw = embed_ising(&logical, &embedding, j_int)?;
    let sampler = SimulatedAnnealer::from_protocol(&protocol);
    let stats = run_protocol(&logical, &hw, &embedding, ground, &protocol, &sampler)?;

    println!("{}", serde_json::to_string_pretty(&stats)?);
    if let Some(path) = args.out.or(cfg.out) {
        fs::write(path, serde_json::to_string_pretty(&stats)?)?;
    }
    if let Some(csv_path) = args.csv.or(cfg.csv) {
        let instance = args
            .instance_label
            .or(cfg.instance_label)
            .unwrap_or_else(|| qubo_path.display().to_string());
        let mapping = args.mapping_label.or(cfg.mapping_label).unwrap_or_default();
        let header = "instance,mapping,j_int,r_raw,r_corrected,k,tts_us,censored\n";
        let needs_header = !csv_path.exists();
        let mut line = format!(
            "{},{},{},{},{},{},{},{}\n",
            instance,
            mapping,
            j_int,
            stats.raw.success_rate,
            stats.corrected.success_rate,
            stats
                .raw
                .expected_runs
                .map_or("censored".into(), |v: f64| v.to_string()),
            stats
                .raw
                .expected_total_anneal_time_us
                .map_or("censored".into(), |v: f64| v.to_string()),
            stats.raw.censored
        );
        if needs_header {
            line = format!("{}{}", header, line);
        }
        use std::io::Write;
        let mut file = fs::OpenOptions::new().create(true).append(true).open(csv_path)?;
        file.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[derive(Args, Default)]
struct SweepArgs {
    /// Sweep specification JSON (fields of the sweep spec).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated sizes, e.g. 8,9,10.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated mappings, e.g. direct,timeslice,cnf.
    #[arg(long)]
    mappings: Option<String>,
    /// Comma-separated coupling values.
    #[arg(long)]
    jint: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    anneals: Option<usize>,
    #[arg(long)]
    gauges: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec: SweepSpec = match &args.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => SweepSpec::default(),
    };
    if let Some(f) = &args.family {
        spec.family = Family::parse(f)?;
    }
    if let Some(s) = &args.sizes {
        spec.sizes = parse_list(s)?;
    }
    if let Some(m) = &args.mappings {
        spec.mappings = m
            .split(',')
            .map(|x| Mapping::parse(x.trim()))
            .collect::<planqubo_core::Result<_>>()?;
    }
    if let Some(j) = &args.jint {
        spec.j_int_grid = parse_list(j)?;
    }
    if let Some(i) = args.instances {
        spec.instances_per_size = i;
    }
    if let Some(a) = args.anneals {
        spec.protocol.anneals_per_gauge = a;
    }
    if let Some(g) = args.gauges {
        spec.protocol.num_gauges = g;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }

    let out = args.out.unwrap_or_else(|| PathBuf::from("sweep_out"));
    fs::create_dir_all(&out)?;
    fs::write(out.join("spec.json"), serde_json::to_string_pretty(&spec)?)?;

    let rows = run_sweep(&spec)?;
    fs::write(out.join("results.csv"), rows_to_csv(&rows))?;

    let comparison = mapping_comparison_from_rows(&rows, &spec);
    let mut comp_csv = String::from(
        "mapping,n,best_j_int,median_tts_us,fraction_solved_at_best,median_qubo_vars,median_embed_total,embed_failure_rate\n",
    );
    for c in &comparison {
        comp_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.mapping,
            c.n,
            c.best_j_int.map_or("censored".into(), |v: f64| v.to_string()),
            c.median_tts_us.map_or("censored".into(), |v: f64| v.to_string()),
            c.fraction_solved_at_best,
            c.median_qubo_vars,
            c.median_embed_total,
            c.embed_failure_rate
        ));
    }
    fs::write(out.join("comparison.csv"), comp_csv)?;

    for &mapping in &spec.mappings {
        let table = jint_table_from_rows(&rows, &spec, mapping);
        fs::write(out.join(format!("jint_{}.csv", mapping.name())), table.to_csv())?;
    }

    let summary = summarize(&rows, &["mapping", "n", "j_int"])?;
    fs::write(out.join("summary.csv"), summaries_to_csv(&summary))?;
    println!("wrote {} result rows to {}", rows.len(), out.display());
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct ArchStudyArgs {
    #[arg(long)]
    max_k: Option<usize>,
    /// Comma-separated grid sizes M.
    #[arg(long = "M")]
    m: Option<String>,
    /// Comma-separated cell sizes L.
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    tries: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_arch_study(args: ArchStudyArgs) -> Result<()> {
    let cfg: ArchStudyArgs = with_config(&args.config)?;
    let max_k = args.max_k.or(cfg.max_k).unwrap_or(7);
    let m_values: Vec<usize> = parse_list(&args.m.or(cfg.m).unwrap_or_else(|| "8,10,12".into()))?;
    let l_values: Vec<usize> = parse_list(&args.l.or(cfg.l).unwrap_or_else(|| "4,6,8".into()))?;
    let runs = args.runs.or(cfg.runs).unwrap_or(11);
    let tries = args.tries.or(cfg.tries).unwrap_or(10);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let cells = run_architecture_study(max_k, &m_values, &l_values, runs, tries, seed)?;
    let csv = arch_study_to_csv(&cells);
    match args.out.or(cfg.out) {
        Some(path) => fs::write(path, csv)?,
        None => print!("{}", csv),
    }
    Ok(())
}

#[derive(Args, serde::Deserialize, Default)]
struct SummarizeArgs {
    #[arg(long, name = "in")]
    r#in: Option<PathBuf>,
    /// Comma-separated group keys from family, mapping, n, j_int.
    #[arg(long)]
    group_by: Option<String>,
    /// Treat rows whose time-to-solution exceeds this as censored.
    #[arg(long)]
    tts_cutoff_us: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let cfg: SummarizeArgs = with_config(&args.config)?;
    let input = args.r#in.or(cfg.r#in).context("--in required")?;
    let group_by = args.group_by.or(cfg.group_by).unwrap_or_else(|| "mapping,n,j_int".into());
    let keys: Vec<&str> = group_by.split(',').map(str::trim).collect();
    let (rows, skipped) = parse_results_csv(&fs::read_to_string(&input)?);
    if skipped > 0 {
        eprintln!("skipped {} malformed rows", skipped);
    }
    let summary = summarize_with_cutoff(&rows, &keys, args.tts_cutoff_us.or(cfg.tts_cutoff_us))?;
    let csv = summaries_to_csv(&summary);
    match args.out.or(cfg.out) {
        Some(path) => fs::write(path, csv)?,
        None => print!("{}", csv),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Map(args) => cmd_map(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Chimera(args) => cmd_chimera(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ArchStudy(args) => cmd_arch_study(args),
        Command::Summarize(args) => cmd_summarize(args),
    }
}
