#![no_main]

use birkhoff_core::solver::SolveReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(report) = serde_json::from_slice::<SolveReport>(data) else {
        return;
    };
    let text = serde_json::to_string(&report).unwrap();
    let _: SolveReport = serde_json::from_str(&text).unwrap();
});
