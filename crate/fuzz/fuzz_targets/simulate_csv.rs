#![no_main]

use autohorn::interp::{decode_inputs, encode_outputs};
use autohorn::syntax::ast::TypeDecl;
use autohorn::types::Type;
use autohorn::Pos;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let types = [TypeDecl {
        name: "mode".into(),
        ctors: vec!["Start".into(), "Stop".into()],
        pos: Pos::synthetic(),
    }];
    let inputs = [
        ("b".to_string(), Type::Bool),
        ("i".to_string(), Type::Int),
        ("m".to_string(), Type::Enum("mode".into())),
    ];
    let Ok(rows) = decode_inputs(data, &inputs, &types) else {
        return;
    };
    let names: Vec<String> = inputs.iter().map(|(n, _)| n.clone()).collect();
    let text = encode_outputs(&names, &rows);
    assert_eq!(
        decode_inputs(&text, &inputs, &types).expect("own output decodes"),
        rows
    );
});
