//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use autohorn::driver::{compile_str, invoke_solver, Artifacts, Options, VerificationOutcome};
use autohorn::horn::Term;
use autohorn::interp::{
    check_step_relation, random_inputs, CheckError, Checker, Machine, Reference, Value,
};
use autohorn::syntax::{parse, pretty_print};
use autohorn::types::Type;
use autohorn::Code;

const ACCEPTED: &[(&str, &str)] = &[
    ("stopwatch", include_str!("corpus/stopwatch.lus")),
    ("memories", include_str!("corpus/memories.lus")),
    ("solution", include_str!("corpus/solution.lus")),
    ("greycounter", include_str!("corpus/greycounter.lus")),
    ("intloopcounter", include_str!("corpus/intloopcounter.lus")),
    ("auto", include_str!("corpus/auto.lus")),
    ("counters", include_str!("corpus/counters.lus")),
];
const FAILURE: &str = include_str!("corpus/failure.lus");
const TRIANGLE: &str = include_str!("corpus/triangle.lus");
const COUNTERS: &str = include_str!("corpus/counters.lus");
const STOPWATCH: &str = include_str!("corpus/stopwatch.lus");
const GOLDEN_COUNTERS: &str = include_str!("golden/counters.smt2");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn opts(main: Option<&str>, prove: Option<&str>) -> Options {
    Options {
        main: main.map(str::to_string),
        prove: prove.map(str::to_string),
        inline: false,
    }
}

fn compile(src: &str) -> Artifacts {
    compile_str(src, &Options::default()).expect("corpus program compiles")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn corpus_compiles() -> Outcome {
    let start = Instant::now();
    for (name, src) in ACCEPTED {
        let main = if *name == "counters" {
            Some("top")
        } else {
            None
        };
        let prove = main.map(|_| "ok");
        compile_str(src, &opts(main, prove)).map_err(|d| format!("{name}: {d}"))?;
    }
    let code = |src: &str| {
        compile_str(src, &Options::default())
            .err()
            .map(|d| d.0[0].code)
    };
    ensure(
        code(FAILURE) == Some(Code::Causality),
        "failure.lus is not a causality error",
    )?;
    ensure(
        code(TRIANGLE) == Some(Code::UnlessMemory),
        "triangle.lus is not an unless-memory error",
    )?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), format!("took {t:?}"))?;
    Ok(format!(
        "{} programs, 2 rejections, {t:.2?}",
        ACCEPTED.len()
    ))
}

/// Conjuncts of the body and the head of the rule for `rel`, with the
/// `rel.` variable prefix removed.
fn rule_shape(art: &Artifacts, rel: &str) -> Option<(BTreeSet<String>, String)> {
    let rule = art.horn.rules.iter().find(|r| r.head_name() == rel)?;
    let plain = |t: &Term| t.to_string().replace(&format!("{rel}."), "");
    let body = match &rule.body {
        Term::App("and", args) => args.iter().map(plain).collect(),
        t => [plain(t)].into_iter().collect(),
    };
    Some((body, plain(&rule.head)))
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn horn_structure() -> Outcome {
    let art = compile_str(COUNTERS, &opts(Some("top"), Some("ok"))).map_err(|d| d.to_string())?;
    let text = art.horn_text();
    let rels: BTreeSet<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("(declare-rel "))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    let mut expected: BTreeSet<&str> = [
        "greycounter_step",
        "intloopcounter_step",
        "auto_step",
        "top_step",
        "arrow_step",
        "greycounter_reset",
        "intloopcounter_reset",
        "auto_reset",
        "top_reset",
        "arrow_reset",
        "Reach",
        "ERR",
    ]
    .into_iter()
    .collect();
    let gen: Vec<String> = ["One", "Two", "Three", "Four"]
        .iter()
        .flat_map(|s| [format!("{s}_unless"), format!("{s}_handler_until")])
        .collect();
    expected.extend(gen.iter().map(String::as_str));
    ensure(rels == expected, format!("relations {rels:?}"))?;

    let unless = rule_shape(&art, "Four_unless").ok_or("no Four_unless rule")?;
    let want = set(&["(= state_act state_in)", "(= restart_act restart_in)"]);
    ensure(unless.0 == want, format!("Four_unless body {:?}", unless.0))?;
    ensure(
        unless.1 == "(Four_unless restart_in state_in restart_act state_act)",
        format!("Four_unless head {}", unless.1),
    )?;
    let handler = rule_shape(&art, "Four_handler_until").ok_or("no Four_handler_until rule")?;
    let want = set(&["(= out false)", "(= state_in One)", "(= restart_in true)"]);
    ensure(
        handler.0 == want,
        format!("Four_handler_until body {:?}", handler.0),
    )?;
    ensure(
        handler.1 == "(Four_handler_until restart_act state_act restart_in state_in out)",
        format!("Four_handler_until head {}", handler.1),
    )?;

    ensure(text == GOLDEN_COUNTERS, "differs from golden/counters.smt2")?;
    let again = compile_str(COUNTERS, &opts(Some("top"), Some("ok")))
        .unwrap()
        .horn_text();
    ensure(text == again, "two compilations differ")?;
    Ok(format!("{} relations, golden match", rels.len()))
}

fn counter_traces() -> Outcome {
    let start = Instant::now();
    let art = compile(COUNTERS);
    let m = Machine::new(&art.normalized).unwrap();
    let r = Reference::new(&art.source);
    let pattern: Vec<Value> = (0..32).map(|k| Value::Bool(k % 4 == 2)).collect();
    for seed in 0..4 {
        let inputs = random_inputs(&[Type::Bool], &[], 32, seed);
        for node in ["greycounter", "intloopcounter", "auto"] {
            let out: Vec<Value> = m
                .run_trace(node, &inputs)
                .map_err(|e| e.to_string())?
                .outputs
                .into_iter()
                .map(|row| row[0].clone())
                .collect();
            ensure(out == pattern, format!("{node} trace {out:?}"))?;
            let src: Vec<Value> = r
                .run(node, &inputs)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|row| row[0].clone())
                .collect();
            ensure(src == pattern, format!("{node} source-level trace {src:?}"))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), format!("traces took {t:?}"))?;
    let solver = match which("z3") {
        None => "solver check skipped (z3 not found)".to_string(),
        Some(z3) => {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let file = dir.path().join("counters.smt2");
            let text = compile_str(COUNTERS, &opts(Some("top"), Some("ok")))
                .unwrap()
                .horn_text();
            std::fs::write(&file, text).map_err(|e| e.to_string())?;
            let t = Instant::now();
            let out = invoke_solver(&[z3], &file, Duration::from_secs(60));
            ensure(
                out == VerificationOutcome::Valid,
                format!("solver said {out:?}"),
            )?;
            format!("z3 valid in {:.2?}", t.elapsed())
        }
    };
    Ok(format!("32-step traces agree in {t:.2?}; {solver}"))
}

fn which(prog: &str) -> Option<String> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join(prog))
        .find(|p| p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
}

fn check_program(art: &Artifacts, traces: u64, len: usize) -> Result<usize, (String, CheckError)> {
    let m = Machine::new(&art.normalized).unwrap();
    let checker = Checker {
        horn: &art.horn,
        program: &art.normalized,
        trees: &m.trees,
    };
    let mut instants = 0;
    for n in &art.normalized.nodes {
        let tys: Vec<_> = n.inputs.iter().map(|v| v.ty.clone()).collect();
        for seed in 0..traces {
            let inputs = random_inputs(&tys, &art.normalized.types, len, seed);
            let trace = m.run_trace(&n.name, &inputs).unwrap();
            check_step_relation(&checker, &trace.records).map_err(|e| (n.name.clone(), e))?;
            instants += trace.records.len();
        }
    }
    Ok(instants)
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut instants = 0;
    for (name, src) in ACCEPTED {
        let art = compile(src);
        instants += check_program(&art, 100, 20).map_err(|(n, e)| format!("{name}/{n}: {e}"))?;
    }
    let mut art = compile(include_str!("corpus/auto.lus"));
    let rule = art
        .horn
        .rules
        .iter_mut()
        .find(|r| r.head_name() == "Three_handler_until")
        .ok_or("mutation target not found")?;
    ensure(
        flip_true_output(&mut rule.body),
        "no `out = true` equality to flip",
    )?;
    ensure(check_program(&art, 1, 8).is_err(), "mutation not detected")?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), format!("took {t:?}"))?;
    Ok(format!(
        "{instants} instants checked, mutation detected, {t:.2?}"
    ))
}

/// Turn the first `(= <node>.out true)` into `(= <node>.out false)`.
fn flip_true_output(t: &mut Term) -> bool {
    match t {
        Term::App("=", args) if matches!(args[1], Term::Bool(true)) => {
            let hit = matches!(&args[0], Term::Var(v, _) if v.ends_with(".out"));
            if hit {
                args[1] = Term::Bool(false);
            }
            hit
        }
        Term::App(_, args) => args.iter_mut().any(flip_true_output),
        _ => false,
    }
}

fn stopwatch_run(start_stop: [bool; 4], reset: [bool; 4]) -> Vec<Value> {
    let art = compile(STOPWATCH);
    let m = Machine::new(&art.normalized).unwrap();
    let inputs: Vec<Vec<Value>> = (0..4)
        .map(|k| {
            vec![
                Value::Bool(true),
                Value::Bool(start_stop[k]),
                Value::Bool(reset[k]),
            ]
        })
        .collect();
    m.run_trace("stopwatch", &inputs)
        .unwrap()
        .outputs
        .into_iter()
        .map(|r| r[0].clone())
        .collect()
}

fn stopwatch_fixtures() -> Outcome {
    let ints = |xs: [i64; 4]| xs.map(Value::Int).to_vec();
    let f = [false; 4];
    let started = stopwatch_run([true, false, false, false], f);
    let reset = stopwatch_run([true, false, false, false], [false, false, true, false]);
    let mut problems = Vec::new();
    if started != ints([0, 1, 2, 3]) {
        problems.push(format!(
            "start at instant 0 gives {started:?}, fixture expects 0,1,2,3"
        ));
    }
    if reset != ints([0, 1, 0, 1]) {
        problems.push(format!(
            "reset at instant 2 gives {reset:?}, fixture expects 0,1,0,1"
        ));
    }
    ensure(problems.is_empty(), problems.join("; "))?;
    Ok("fixtures reproduced".into())
}

fn reset_property() -> Outcome {
    let art = compile(COUNTERS);
    let m = Machine::new(&art.normalized).unwrap();
    let checker = Checker {
        horn: &art.horn,
        program: &art.normalized,
        trees: &m.trees,
    };
    let flat = m.trees["auto"].flatten();
    let states = random_inputs(&flat.types(), &art.normalized.types, 50, 7);
    for c in &states {
        let x: Vec<Value> = c
            .iter()
            .zip(&flat.0)
            .map(|(v, s)| {
                if s.arrow_init {
                    Value::Bool(true)
                } else {
                    v.clone()
                }
            })
            .collect();
        ensure(
            checker
                .reset_holds("auto", c, &x)
                .map_err(|e| e.to_string())?,
            format!("reset of {c:?} rejected"),
        )?;
        let mut inst = m.init_state("auto");
        inst.set_flat(c);
        inst.reset();
        ensure(inst.flatten() == x, "machine reset disagrees")?;
        for k in 0..x.len() {
            let mut bad = x.clone();
            bad[k] = match &bad[k] {
                Value::Bool(b) => Value::Bool(!b),
                Value::Enum(e) => Value::Enum(if e == "One" {
                    "Two".into()
                } else {
                    "One".into()
                }),
                v => v.clone(),
            };
            ensure(
                !checker
                    .reset_holds("auto", c, &bad)
                    .map_err(|e| e.to_string())?,
                format!("reset accepts a changed `{}`", flat.0[k].name),
            )?;
        }
    }
    Ok(format!(
        "50 states over {}",
        flat.0
            .iter()
            .map(|v| v.name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

fn round_trip() -> Outcome {
    let all = ACCEPTED
        .iter()
        .copied()
        .chain([("failure", FAILURE), ("triangle", TRIANGLE)])
        .chain([("foo_recursive", include_str!("corpus/foo_recursive.lus"))]);
    for (name, src) in all {
        let p = parse(src).map_err(|d| format!("{name}: {d}"))?;
        let printed = pretty_print(&p);
        let q = parse(&printed).map_err(|d| format!("{name} reprinted: {d}"))?;
        ensure(
            p == q,
            format!("{name}: parse of the printed program differs"),
        )?;
        ensure(
            pretty_print(&q) == printed,
            format!("{name}: printing is not stable"),
        )?;
    }
    for (name, src) in ACCEPTED {
        let a = compile(src);
        let b = compile(src);
        ensure(
            a.horn_text() == b.horn_text()
                && a.clocked_text() == b.clocked_text()
                && a.normalized_text() == b.normalized_text()
                && a.state_tree_text() == b.state_tree_text(),
            format!("{name}: artifacts differ between runs"),
        )?;
    }
    Ok("corpus round-trips; artifacts byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("corpus compiles, failure and triangle rejected", corpus_compiles),
        ("counters Horn structure and golden file", horn_structure),
        ("counter traces agree", counter_traces),
        ("random traces satisfy step relations", oracle_agreement),
        ("stopwatch fixtures", stopwatch_fixtures),
        ("auto reset relation", reset_property),
        ("round-trip and determinism", round_trip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
