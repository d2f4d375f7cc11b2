#![no_main]

use libfuzzer_sys::fuzz_target;
use discode::formats::parse_fixed_point_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_fixed_point_spec(s);
    }
});
