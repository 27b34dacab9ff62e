#![no_main]
use libfuzzer_sys::fuzz_target;

use plansim::io::{parse_graph_json, write_graph_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(graph) = parse_graph_json(data) {
        // Anything that parses must survive a write/parse round trip.
        let text = write_graph_json(&graph);
        let back = parse_graph_json(text.as_bytes()).expect("round trip");
        assert_eq!(back.precincts(), graph.precincts());
        assert_eq!(back.edges(), graph.edges());
    }
});
