#![no_main]
use libfuzzer_sys::fuzz_target;

use plansim::io::{parse_scores_csv, write_scores_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(groups) = parse_scores_csv(data) {
        // Scores are written at full precision, so each kind's rows must
        // round-trip exactly.
        for group in &groups {
            let text = write_scores_csv(std::slice::from_ref(group));
            let back = parse_scores_csv(text.as_bytes()).expect("round trip");
            assert_eq!(back.as_slice(), std::slice::from_ref(group));
        }
    }
});
