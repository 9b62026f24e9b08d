#![no_main]

use birkhoff_cli::parse_args;
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; parsing and validation must never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("birkhoff").chain(text.split('\0'));
    if let Ok(cli) = parse_args(args) {
        let _ = cli.validate();
        let _ = cli.output_format();
    }
});
