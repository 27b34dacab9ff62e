#![no_main]
use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;

use plansim::io::{bind_plan, parse_plan_csv, write_plan_csv};
use plansim::plan::validate_plan;
use plansim::synth::{grid_state, GridSpec, PopulationPattern};
use plansim::DualGraph;

fn graph() -> &'static DualGraph {
    static GRAPH: OnceLock<DualGraph> = OnceLock::new();
    GRAPH.get_or_init(|| {
        grid_state(&GridSpec {
            rows: 3,
            cols: 3,
            population: PopulationPattern::Uniform { per_cell: 1 },
        })
        .expect("fixed grid builds")
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(labeled) = parse_plan_csv(data) else {
        return;
    };
    let Ok(bound) = bind_plan(graph(), &labeled) else {
        return;
    };
    if validate_plan(graph(), &bound.plan).is_empty() {
        // Valid plans must round-trip with every precinct keeping its
        // label. Dense indices may permute: binding assigns them by first
        // appearance in file order, and the writer emits graph order.
        let text = write_plan_csv(graph(), &bound.plan, Some(&bound.labels));
        let reparsed = parse_plan_csv(text.as_bytes()).expect("round trip");
        let rebound = bind_plan(graph(), &reparsed).expect("round trip binds");
        for idx in 0..graph().len() {
            let before = &bound.labels[bound.plan.assignment[idx] as usize];
            let after = &rebound.labels[rebound.plan.assignment[idx] as usize];
            assert_eq!(before, after);
        }
    }
});
