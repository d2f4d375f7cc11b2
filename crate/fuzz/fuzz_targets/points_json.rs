#![no_main]

use discode::formats::{parse_points_json, read_disc_points};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_points_json(s);
        let _ = read_disc_points(s);
    }
});
