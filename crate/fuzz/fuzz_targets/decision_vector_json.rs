#![no_main]

use birkhoff_core::kkt::DecisionVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(chi) = serde_json::from_slice::<DecisionVector>(data) else {
        return;
    };
    assert_eq!(chi.len(), 5 * chi.n_nodes() + 5);
    let text = serde_json::to_string(&chi).unwrap();
    let back: DecisionVector = serde_json::from_str(&text).unwrap();
    assert_eq!(back, chi);
});
