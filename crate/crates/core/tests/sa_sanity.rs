//! Sampler sanity: a tenfold sweep budget must not make the annealer worse.

use planqubo_core::anneal::{run_protocol, AnnealProtocol, SimulatedAnnealer};
use planqubo_core::embedding::{embed_ising, find_embedding, EmbedderConfig};
use planqubo_core::chimera::ChimeraGraph;
use planqubo_core::gen::{generate_benchmark, Family};
use planqubo_core::mappings::direct_coloring_qubo;
use planqubo_core::pubo::qubo_to_ising;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// P(X >= k) for X ~ Binomial(n, 1/2).
fn binom_tail(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    for i in k..=n {
        let mut log_c = 0.0;
        for j in 0..i {
            log_c += ((n - j) as f64).ln() - ((i - j) as f64).ln();
        }
        total += (log_c - n as f64 * 2f64.ln()).exp();
    }
    total
}

#[test]
fn ten_times_more_sweeps_does_not_hurt() {
    // one embedded scheduling instance with <= 20 logical variables
    let set = generate_benchmark(Family::Scheduling, 6, 1, 3).unwrap();
    let inst = &set.instances[0];
    let qubo = direct_coloring_qubo(&inst.graph, 3).unwrap();
    assert!(qubo.num_vars() <= 20);
    let logical = qubo_to_ising(&qubo);
    let hardware = ChimeraGraph::new(4, 4, &[]).unwrap();
    let embedding = find_embedding(
        &qubo.interaction_graph(),
        &hardware,
        &EmbedderConfig::default(),
    )
    .expect("18-variable graph embeds in (4,4)");
    let hw = embed_ising(&logical, &embedding, 1.2).unwrap();

    let mut short_rates = Vec::new();
    let mut long_rates = Vec::new();
    for seed in 0..30u64 {
        let base = AnnealProtocol {
            anneals_per_gauge: 60,
            num_gauges: 1,
            sa_sweeps: 20,
            seed,
            ..AnnealProtocol::default()
        };
        let short = run_protocol(
            &logical,
            &hw,
            &embedding,
            0.0,
            &base,
            &SimulatedAnnealer::from_protocol(&base),
        )
        .unwrap();
        let long_protocol = AnnealProtocol {
            sa_sweeps: 200,
            ..base
        };
        let long = run_protocol(
            &logical,
            &hw,
            &embedding,
            0.0,
            &long_protocol,
            &SimulatedAnnealer::from_protocol(&long_protocol),
        )
        .unwrap();
        short_rates.push(short.raw.success_rate);
        long_rates.push(long.raw.success_rate);
    }

    // paired sign test at 95%: the long schedule may not be significantly
    // worse, and its median success rate may not drop
    let worse = short_rates
        .iter()
        .zip(&long_rates)
        .filter(|(s, l)| l < s)
        .count();
    let ties = short_rates
        .iter()
        .zip(&long_rates)
        .filter(|(s, l)| l == s)
        .count();
    let trials = 30 - ties;
    let p = if trials == 0 { 1.0 } else { binom_tail(trials, worse) };
    assert!(
        p > 0.05,
        "longer anneals significantly worse: {} of {} pairs (p = {:.4})",
        worse,
        trials,
        p
    );
    assert!(
        median(long_rates.clone()) + 1e-12 >= median(short_rates.clone()),
        "median success rate dropped: {} -> {}",
        median(short_rates),
        median(long_rates)
    );
}
