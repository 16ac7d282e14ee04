//! Programs at the parser's size limits go through every stage.

use autohorn::driver::{compile_str, Options};
use autohorn::interp::{Machine, Reference, Value};

fn run_all(src: &str) {
    for inline in [false, true] {
        let art = compile_str(
            src,
            &Options {
                inline,
                ..Options::default()
            },
        )
        .unwrap();
        let inputs = vec![vec![Value::Int(1)]; 3];
        let m = Machine::new(&art.normalized).unwrap();
        let out = m.run_trace("n", &inputs).unwrap().outputs;
        assert_eq!(Reference::new(&art.source).run("n", &inputs).unwrap(), out);
        assert!(!art.horn_text().is_empty());
    }
}

#[test]
fn long_operator_chain() {
    run_all(&format!(
        "node n (x:int) returns (y:int); let y = x{}; tel",
        " + x".repeat(127)
    ));
}

#[test]
fn long_pre_chain() {
    run_all(&format!(
        "node n (x:int) returns (y:int); let y = {}x; tel",
        "pre ".repeat(255)
    ));
}

#[test]
fn deep_parentheses() {
    run_all(&format!(
        "node n (x:int) returns (y:int); let y = {}x{}; tel",
        "(x + ".repeat(30),
        ")".repeat(30)
    ));
}

#[test]
fn oversized_expression_is_a_diagnostic() {
    let src = format!(
        "node n (x:int) returns (y:int); let y = x{}; tel",
        " + x".repeat(200)
    );
    let e = compile_str(&src, &Options::default()).unwrap_err();
    assert!(e.to_string().contains("256"), "{e}");
}
