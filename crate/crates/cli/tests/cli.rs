use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/corpus")
        .join(name)
}

fn autohorn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autohorn"))
        .args(args)
        .env_remove("HORN_SOLVER")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn z3() -> Option<PathBuf> {
    let dirs = std::env::var_os("PATH")?;
    std::env::split_paths(&dirs)
        .map(|d| d.join("z3"))
        .find(|p| p.is_file())
}

#[test]
fn compile_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = |f: &str| dir.path().join(f);
    let o = autohorn(&[
        "compile",
        path(&corpus("counters.lus")),
        "--node",
        "top",
        "--horn",
        path(&out("c.smt2")),
        "--emit-clocked",
        path(&out("c.lus")),
        "--emit-normalized",
        path(&out("c.norm")),
        "--emit-state-tree",
        path(&out("c.tree")),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let horn = std::fs::read_to_string(out("c.smt2")).unwrap();
    assert!(horn.starts_with("(set-logic HORN)"));
    assert!(horn.contains("(declare-rel Four_unless"));
    let clocked = std::fs::read_to_string(out("c.lus")).unwrap();
    assert!(clocked.contains("function Four_handler_until"));
    assert!(!clocked.contains("automaton"));
    assert!(std::fs::read_to_string(out("c.tree"))
        .unwrap()
        .contains("node auto"));
    assert!(!std::fs::read_to_string(out("c.norm")).unwrap().is_empty());
}

#[test]
fn diagnostics_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let horn = dir.path().join("f.smt2");
    for (file, code_str) in [("failure.lus", "E0301"), ("triangle.lus", "E0302")] {
        let o = autohorn(&[
            "compile",
            path(&corpus(file)),
            "--node",
            file.trim_end_matches(".lus"),
            "--horn",
            path(&horn),
        ]);
        assert_eq!(code(&o), 2, "{file}");
        assert!(stderr(&o).contains(code_str), "{}", stderr(&o));
        assert!(stderr(&o).contains(file), "{}", stderr(&o));
    }
    assert!(!horn.exists());
}

#[test]
fn usage_and_io_errors_exit_one() {
    let o = autohorn(&[
        "compile",
        "/nonexistent/x.lus",
        "--node",
        "x",
        "--horn",
        "/tmp/x",
    ]);
    assert_eq!(code(&o), 1);
    let o = autohorn(&[
        "compile",
        path(&corpus("counters.lus")),
        "--node",
        "top",
        "--prove",
        "top:ok",
    ]);
    assert_eq!(code(&o), 1, "prove without --horn");
    let o = autohorn(&["compile", path(&corpus("counters.lus"))]);
    assert_eq!(code(&o), 2, "clap usage error");
}

#[test]
fn unknown_main_node() {
    let o = autohorn(&[
        "compile",
        path(&corpus("counters.lus")),
        "--node",
        "nope",
        "--horn",
        "/tmp/never.smt2",
    ]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("nope"));
}

#[test]
fn missing_solver_is_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let o = autohorn(&[
        "compile",
        path(&corpus("counters.lus")),
        "--node",
        "top",
        "--horn",
        path(&dir.path().join("c.smt2")),
        "--prove",
        "top:ok",
        "--solver",
        "/nonexistent/solver",
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

fn prove(src: &Path, extra: &[&str]) -> Option<Output> {
    let z3 = z3()?;
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "compile".to_string(),
        path(src).to_string(),
        "--node".into(),
        "top".into(),
        "--horn".into(),
        path(&dir.path().join("q.smt2")).to_string(),
        "--prove".into(),
        "top:ok".into(),
        "--solver".into(),
        path(&z3).to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    Some(autohorn(&refs))
}

#[test]
fn counters_are_equivalent() {
    let Some(o) = prove(&corpus("counters.lus"), &[]) else {
        eprintln!("z3 not found; skipped");
        return;
    };
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).trim(), "valid");
    let o = prove(&corpus("counters.lus"), &["--inline"]).unwrap();
    assert_eq!(stdout(&o).trim(), "valid");
}

#[test]
fn false_property_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.lus");
    let text = std::fs::read_to_string(corpus("counters.lus"))
        .unwrap()
        .replace(
            "ok = out_grey = out_int and out_int = out_auto;",
            "ok = out_auto;",
        );
    std::fs::write(&src, text).unwrap();
    let Some(o) = prove(&src, &[]) else {
        eprintln!("z3 not found; skipped");
        return;
    };
    assert_eq!(code(&o), 3, "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).trim(), "invalid");
}

#[test]
fn simulate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(
        &input,
        "reset,start_stop,tick\nfalse,false,true\nfalse,true,true\nfalse,false,true\ntrue,false,true\n",
    )
    .unwrap();
    let o = autohorn(&[
        "simulate",
        path(&corpus("stopwatch.lus")),
        "--node",
        "stopwatch",
        "--input",
        path(&input),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "seconds\n0\n0\n1\n0\n");

    let out = dir.path().join("out.csv");
    let o = autohorn(&[
        "simulate",
        path(&corpus("stopwatch.lus")),
        "--node",
        "stopwatch",
        "--input",
        path(&input),
        "--steps",
        "2",
        "--output",
        path(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "seconds\n0\n0\n");
}

#[test]
fn simulate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "x\nmaybe\n").unwrap();
    let o = autohorn(&[
        "simulate",
        path(&corpus("counters.lus")),
        "--node",
        "auto",
        "--input",
        path(&input),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("maybe"), "{}", stderr(&o));
    let o = autohorn(&[
        "simulate",
        path(&corpus("counters.lus")),
        "--node",
        "auto",
        "--input",
        path(&input),
        "--steps",
        "5",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_runtime_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("sq.lus");
    std::fs::write(&src, "node sq (i:int) returns (o:int); let o = i * i; tel").unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, format!("i\n3\n{}\n", i64::MAX)).unwrap();
    let o = autohorn(&[
        "simulate",
        path(&src),
        "--node",
        "sq",
        "--input",
        path(&input),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn simulate_counters_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "x\n".to_string() + &"false\n".repeat(8)).unwrap();
    for node in ["greycounter", "intloopcounter", "auto"] {
        let o = autohorn(&[
            "simulate",
            path(&corpus("counters.lus")),
            "--node",
            node,
            "--input",
            path(&input),
        ]);
        assert_eq!(
            stdout(&o),
            "out\nfalse\nfalse\ntrue\nfalse\nfalse\nfalse\ntrue\nfalse\n",
            "{node}"
        );
    }
}
