#![no_main]

use autohorn::driver::{compile_str, Options};
use autohorn::interp::{check_step_relation, random_inputs, Checker, Machine, Reference};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(art) = compile_str(data, &Options::default()) else {
        return;
    };
    let again = compile_str(data, &Options::default()).expect("compilation is deterministic");
    assert_eq!(art.horn_text(), again.horn_text());
    let Ok(machine) = Machine::new(&art.normalized) else {
        return;
    };
    let checker = Checker {
        horn: &art.horn,
        program: &art.normalized,
        trees: &machine.trees,
    };
    for n in &art.normalized.nodes {
        let tys: Vec<_> = n.inputs.iter().map(|v| v.ty.clone()).collect();
        let inputs = random_inputs(&tys, &art.normalized.types, 4, 0);
        if let Ok(trace) = machine.run_trace(&n.name, &inputs) {
            check_step_relation(&checker, &trace.records)
                .expect("traces satisfy the step relation");
            if let Ok(outputs) = Reference::new(&art.source).run(&n.name, &inputs) {
                assert_eq!(outputs, trace.outputs, "source-level run differs");
            }
        }
    }
    let _ = compile_str(
        data,
        &Options {
            inline: true,
            ..Options::default()
        },
    );
});
