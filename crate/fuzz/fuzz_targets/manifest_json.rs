#![no_main]
use libfuzzer_sys::fuzz_target;

use plansim::io::{parse_manifest_json, write_manifest_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(manifest) = parse_manifest_json(data) {
        let text = write_manifest_json(&manifest);
        let back = parse_manifest_json(text.as_bytes()).expect("round trip");
        assert_eq!(back, manifest);
    }
});
