#![no_main]

use libfuzzer_sys::fuzz_target;
use mvphase::cli::{config_tokens, parse_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(entries) = parse_config(text) {
        // Every accepted key becomes exactly one flag token.
        let tokens = config_tokens(&entries);
        let flags = tokens
            .iter()
            .filter(|t| t.to_string_lossy().starts_with("--"))
            .count();
        assert!(flags >= entries.len());
    }
});
