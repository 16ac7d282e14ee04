#![no_main]

use autohorn::syntax::{parse, parse_program, pretty_print, tokenize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(tokens) = tokenize(data) else { return };
    let Ok(program) = parse_program(&tokens) else {
        return;
    };
    let printed = pretty_print(&program);
    let reparsed = parse(&printed).expect("printed programs parse");
    assert_eq!(reparsed, program);
});
