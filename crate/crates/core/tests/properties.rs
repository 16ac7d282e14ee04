//! Property tests over generated programs.

use autohorn::driver::{compile_str, Options};
use autohorn::interp::{
    check_step_relation, decode_inputs, encode_outputs, random_inputs, Checker, Machine, Reference,
    Value,
};
use autohorn::syntax::{parse, parse_expr, pretty_print};
use autohorn::types::Type;
use proptest::prelude::*;

fn int_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0..6i64).prop_map(|n| n.to_string()),
        Just("i".to_string()),
        Just("j".to_string()),
        Just("(0 -> pre o)".to_string()),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} -> {b})")),
            inner.clone().prop_map(|a| format!("pre ({a})")),
            (bool_leaf(), inner.clone(), inner)
                .prop_map(|(c, a, b)| format!("(if {c} then {a} else {b})")),
        ]
    })
}

fn bool_leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("b".to_string()),
        Just("true".to_string()),
        Just("(i < j)".to_string()),
        Just("(false -> pre p)".to_string()),
    ]
}

fn bool_expr() -> impl Strategy<Value = String> {
    bool_leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("(not {a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} and {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} -> {b})")),
            inner.prop_map(|a| format!("pre ({a})")),
            (int_expr(), int_expr()).prop_map(|(a, b)| format!("({a} = {b})")),
        ]
    })
}

fn program() -> impl Strategy<Value = String> {
    (int_expr(), bool_expr(), int_expr()).prop_map(|(o, p, k)| {
        format!(
            "node g (i:int; j:int; b:bool) returns (o:int; p:bool);
let o = {o}; p = {p}; tel
node h (i:int; b:bool) returns (o:int; p:bool);
var q:bool; j:int;
let j = i + 1; (o, q) = g(i, {k}, b) every b; p = q or (true -> pre p); tel"
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expressions_round_trip(e in int_expr()) {
        let parsed = parse_expr(&e).unwrap();
        let printed = autohorn::syntax::pretty::expr(&parsed);
        prop_assert_eq!(parse_expr(&printed).unwrap(), parsed);
    }

    #[test]
    fn programs_round_trip(src in program()) {
        let p = parse(&src).unwrap();
        let printed = pretty_print(&p);
        prop_assert_eq!(parse(&printed).unwrap(), p);
    }

    #[test]
    fn machine_reference_and_horn_agree(src in program(), seed in 0u64..1000) {
        let art = compile_str(&src, &Options::default()).unwrap();
        let m = Machine::new(&art.normalized).unwrap();
        let r = Reference::new(&art.source);
        let checker = Checker { horn: &art.horn, program: &art.normalized, trees: &m.trees };
        for (node, tys) in [
            ("g", vec![Type::Int, Type::Int, Type::Bool]),
            ("h", vec![Type::Int, Type::Bool]),
        ] {
            let inputs = random_inputs(&tys, &[], 12, seed);
            let compiled = m.run_trace(node, &inputs);
            let source = r.run(node, &inputs);
            match (compiled, source) {
                (Ok(t), Ok(s)) => {
                    prop_assert_eq!(&t.outputs, &s);
                    prop_assert!(check_step_relation(&checker, &t.records).is_ok());
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{node}: {:?} vs {:?}", a.map(|t| t.outputs), b),
            }
        }
    }

    #[test]
    fn inlining_preserves_behaviour(src in program(), seed in 0u64..1000) {
        let plain = compile_str(&src, &Options::default()).unwrap();
        let inl = compile_str(&src, &Options { inline: true, ..Options::default() }).unwrap();
        let (a, b) = (Machine::new(&plain.normalized).unwrap(), Machine::new(&inl.normalized).unwrap());
        let inputs = random_inputs(&[Type::Int, Type::Bool], &[], 12, seed);
        prop_assert_eq!(
            a.run_trace("h", &inputs).map(|t| t.outputs).ok(),
            b.run_trace("h", &inputs).map(|t| t.outputs).ok()
        );
    }

    #[test]
    fn flattened_state_matches_tree(src in program()) {
        let art = compile_str(&src, &Options::default()).unwrap();
        let m = Machine::new(&art.normalized).unwrap();
        for (name, tree) in &art.trees {
            prop_assert_eq!(tree.flatten().len(), tree.size());
            prop_assert_eq!(m.init_state(name).flatten().len(), tree.size());
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((any::<bool>(), -1000i64..1000), 0..20)) {
        let vals: Vec<Vec<Value>> = rows.iter().map(|(b, i)| vec![Value::Bool(*b), Value::Int(*i)]).collect();
        let names = vec!["b".to_string(), "i".to_string()];
        let text = encode_outputs(&names, &vals);
        let decoded = decode_inputs(&text, &[("i".into(), Type::Int), ("b".into(), Type::Bool)], &[]).unwrap();
        let swapped: Vec<Vec<Value>> = vals.into_iter().map(|r| vec![r[1].clone(), r[0].clone()]).collect();
        prop_assert_eq!(decoded, swapped);
    }
}

fn input_guard() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("b".to_string()),
        Just("(not b)".to_string()),
        Just("(i < j)".to_string()),
        Just("(i = 3)".to_string()),
        Just("(b and (i > 0))".to_string()),
    ]
}

fn transition(states: usize) -> impl Strategy<Value = String> {
    (input_guard(), any::<bool>(), 0..states)
        .prop_map(|(g, r, t)| format!("{g} {} S{t}", if r { "restart" } else { "resume" }))
}

fn automaton_program() -> impl Strategy<Value = String> {
    (2usize..4)
        .prop_flat_map(|n| {
            prop::collection::vec(
                (
                    prop::option::of(transition(n)),
                    int_expr(),
                    prop::option::of(transition(n)),
                    any::<bool>(),
                ),
                n,
            )
        })
        .prop_map(|states| {
            let mut body = String::new();
            for (k, (strong, e, weak, weak_on_o)) in states.iter().enumerate() {
                body += &format!("  state S{k} :\n");
                if let Some(t) = strong {
                    body += &format!("  unless {t}\n");
                }
                body += &format!("  let o = {e}; p = (o > {k}); tel\n");
                if let Some(t) = weak {
                    let t = if *weak_on_o {
                        t.replacen("b", "p", 1)
                    } else {
                        t.clone()
                    };
                    body += &format!("  until {t}\n");
                }
            }
            format!(
                "node a (i:int; j:int; b:bool) returns (o:int; p:bool);
let
  automaton m
{body}tel
node top (i:int; b:bool) returns (o:int; p:bool);
var j:int;
let j = 0 -> pre i; (o, p) = a(i, j, b) every (i = 0); tel"
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn automata_agree(src in automaton_program(), seed in 0u64..1000) {
        let art = match compile_str(&src, &Options::default()) {
            Ok(a) => a,
            Err(d) => return Err(TestCaseError::fail(format!("{d}\n{src}"))),
        };
        let m = Machine::new(&art.normalized).unwrap();
        let r = Reference::new(&art.source);
        let checker = Checker { horn: &art.horn, program: &art.normalized, trees: &m.trees };
        for (node, tys) in [
            ("a", vec![Type::Int, Type::Int, Type::Bool]),
            ("top", vec![Type::Int, Type::Bool]),
        ] {
            let inputs = random_inputs(&tys, &[], 16, seed);
            match (m.run_trace(node, &inputs), r.run(node, &inputs)) {
                (Ok(t), Ok(s)) => {
                    prop_assert_eq!(&t.outputs, &s, "{}\n{:?}", src, inputs);
                    prop_assert!(check_step_relation(&checker, &t.records).is_ok());
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{node}: {:?} vs {:?}\n{src}", a.map(|t| t.outputs), b),
            }
        }
    }
}
