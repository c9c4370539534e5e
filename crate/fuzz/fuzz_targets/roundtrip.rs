#![no_main]

use libfuzzer_sys::fuzz_target;
use wlrw_core::text::{parse_dataset, parse_program, print_dataset, print_program, program_equiv};

// Whatever parses must print to text that parses back to the same thing.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_program(s) {
        let printed = print_program(&p);
        let q = parse_program(&printed).expect("printed program parses");
        assert!(program_equiv(&p, &q), "{printed}");
        assert_eq!(print_program(&q), printed);
    }
    if let Ok(d) = parse_dataset(s) {
        let printed = print_dataset(&d);
        assert_eq!(parse_dataset(&printed).expect("printed dataset parses"), d);
    }
});
