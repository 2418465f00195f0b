//! Desk-scale exercises of the benchmark harness across mappings and
//! families.

use planqubo_core::anneal::AnnealProtocol;
use planqubo_core::bench::{
    best_of_embedding_runs, compile_instance, mapping_comparison_from_rows,
    run_error_correction_comparison, run_sweep, SweepSpec,
};
use planqubo_core::chimera::ChimeraGraph;
use planqubo_core::gen::{generate_benchmark, Family};
use planqubo_core::mappings::Mapping;

fn quick_protocol() -> AnnealProtocol {
    AnnealProtocol {
        anneals_per_gauge: 150,
        num_gauges: 2,
        ..AnnealProtocol::default()
    }
}

#[test]
fn three_mapping_comparison_at_size_eight() {
    let spec = SweepSpec {
        family: Family::Scheduling,
        sizes: vec![8],
        mappings: vec![Mapping::Direct, Mapping::TimeSlice, Mapping::Cnf],
        j_int_grid: vec![1.1, 1.4],
        instances_per_size: 2,
        protocol: quick_protocol(),
        m: 8,
        l: 4,
        broken: Vec::new(),
        embed_runs: 3,
        embed_tries: 10,
        seed: 5,
    };
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 2);

    // the specialized map yields the strictly smallest QUBO
    let vars_of = |mapping: &str| {
        rows.iter()
            .filter(|r| r.mapping == mapping)
            .map(|r| r.qubo_vars)
            .max()
            .unwrap()
    };
    let direct = vars_of("direct");
    assert_eq!(direct, 24); // 3n
    assert!(direct < vars_of("timeslice"));
    assert!(direct < vars_of("cnf"));

    // decoded hits passed validation everywhere
    for r in &rows {
        assert_eq!(r.hits_invalid, 0);
    }

    let comparison = mapping_comparison_from_rows(&rows, &spec);
    assert_eq!(comparison.len(), 3);

    // empty size list still yields a well-formed (empty) table
    let empty = SweepSpec {
        sizes: vec![],
        ..spec
    };
    assert!(run_sweep(&empty).unwrap().is_empty());
}

#[test]
fn navigation_embedding_expectations() {
    // size-4 visiting instances embed under the direct map
    let hardware = ChimeraGraph::new(8, 4, &[]).unwrap();
    let set4 = generate_benchmark(Family::Navigation, 4, 2, 31).unwrap();
    for inst in &set4.instances {
        let compiled = compile_instance(Family::Navigation, Mapping::Direct, inst).unwrap();
        assert_eq!(compiled.qubo.num_vars(), 16);
        let (successes, best) = best_of_embedding_runs(&compiled.qubo, &hardware, 3, 10, 17);
        assert!(successes > 0, "size-4 instance failed to embed");
        best.unwrap().validate().unwrap();
    }

    // size-7 instances have 49-variable interaction graphs that no longer
    // fit the (8,4) architecture
    let set7 = generate_benchmark(Family::Navigation, 7, 1, 32).unwrap();
    let compiled = compile_instance(Family::Navigation, Mapping::Direct, &set7.instances[0]).unwrap();
    assert_eq!(compiled.qubo.num_vars(), 49);
    let (successes, best) = best_of_embedding_runs(&compiled.qubo, &hardware, 3, 10, 18);
    assert_eq!(successes, 0, "unexpected embedding of a size-7 instance");
    assert!(best.is_none());
}

#[test]
fn error_correction_comparison_at_size_ten() {
    let spec = SweepSpec {
        family: Family::Scheduling,
        sizes: vec![10],
        mappings: vec![Mapping::Direct],
        j_int_grid: vec![1.1, 1.3],
        instances_per_size: 4,
        protocol: quick_protocol(),
        m: 8,
        l: 4,
        broken: Vec::new(),
        embed_runs: 3,
        embed_tries: 10,
        seed: 23,
    };
    let (rows, comparison) = run_error_correction_comparison(&spec, Mapping::Direct).unwrap();
    assert!(!rows.is_empty());
    assert_eq!(comparison.len(), 1);
    let row = &comparison[0];
    assert_eq!(row.n, 10);
    // correction can only add hits
    assert_eq!(row.corrected_not_worse, row.instances);
    if let (Some(raw), Some(corr)) = (row.median_tts_raw_us, row.median_tts_corrected_us) {
        assert!(corr <= raw + 1e-9);
    }
}
