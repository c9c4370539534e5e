#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(axioms) = wlrw_core::rlor::parse_ontology(s) {
            let _ = wlrw_core::rlor::compile(&axioms);
        }
    }
});
