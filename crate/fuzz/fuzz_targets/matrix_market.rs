#![no_main]

use birkhoff_core::matrix_market::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(m) = parse(text) else {
        return;
    };
    // what we write must parse back to the same matrix
    let again = parse(&m.to_mtx_string()).expect("written Matrix Market reparses");
    assert_eq!(again, m);
    let _ = m.to_dense();
});
