#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(tokens) = autohorn::syntax::tokenize(data) {
        assert!(
            !tokens.is_empty(),
            "the token stream ends with an end marker"
        );
    }
});
