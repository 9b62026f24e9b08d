#![no_main]

use birkhoff_core::grid::GridFamily;
use birkhoff_core::model::builtin_problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(family) = text.parse::<GridFamily>() {
        assert_eq!(family.short_name().parse::<GridFamily>().unwrap(), family);
    }
    if let Ok(p) = builtin_problem(text) {
        assert_eq!(p.name(), text.trim().to_ascii_lowercase());
    }
});
