#![no_main]

use libfuzzer_sys::fuzz_target;
use mvphase::cli::parse_range;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((lo, hi)) = parse_range(s) {
            assert!(lo.is_finite() && hi.is_finite() && lo < hi);
        }
    }
});
