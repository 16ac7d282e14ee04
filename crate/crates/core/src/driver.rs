//! Pipeline orchestration, artifact writing and solver invocation.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use thiserror::Error;
use wait_timeout::ChildExt;

use crate::analysis::{check_all_unless, check_program};
use crate::automaton::{expand_all, ClockedProgram};
use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::horn::{encode_program, HornSystem, Target};
use crate::normalize::{finish, inline_nodes, normalize_unscheduled, NormalizedProgram};
use crate::state::{state_trees, StateTree};
use crate::syntax::ast::SourceProgram;
use crate::syntax::{parse, pretty_print};

/// In-memory compilation options.
#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Node whose reachable states are collected.
    pub main: Option<String>,
    /// Inline the nodes generated for automaton states.
    pub inline: bool,
    /// Boolean output of `main` to prove invariant.
    pub prove: Option<String>,
}

/// Everything produced by a successful compilation.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub source: SourceProgram,
    pub clocked: ClockedProgram,
    pub normalized: NormalizedProgram,
    pub trees: HashMap<String, StateTree>,
    pub horn: HornSystem,
}

impl Artifacts {
    pub fn clocked_text(&self) -> String {
        pretty_print(&self.clocked)
    }

    pub fn normalized_text(&self) -> String {
        self.normalized.to_string()
    }

    /// State trees of every node, in program order.
    pub fn state_tree_text(&self) -> String {
        self.normalized
            .nodes
            .iter()
            .map(|n| self.trees[&n.name].to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn horn_text(&self) -> String {
        self.horn.to_smtlib()
    }
}

/// Parse and check, expand automata, then check the result again.
pub fn front(text: &str) -> Result<(SourceProgram, ClockedProgram), Diagnostics> {
    let source = parse(text)?;
    check_program(&source)?;
    check_all_unless(&source)?;
    let clocked = expand_all(&source)?;
    check_program(&clocked)?;
    Ok((source, clocked))
}

/// Normalize an automaton-free program, inlining generated nodes on demand,
/// then schedule it; causality errors surface here.
pub fn lower(
    source: &SourceProgram,
    clocked: &ClockedProgram,
    inline: bool,
) -> Result<NormalizedProgram, Diagnostics> {
    let mut np = normalize_unscheduled(clocked);
    if inline {
        let original: HashSet<&str> = source.nodes.iter().map(|n| n.name.as_str()).collect();
        let generated: HashSet<String> = clocked
            .nodes
            .iter()
            .filter(|n| !original.contains(n.name.as_str()))
            .map(|n| n.name.clone())
            .collect();
        inline_nodes(&mut np, &generated);
    }
    finish(np)
}

/// Run every stage on `text`, stopping at the first stage with errors.
pub fn compile_str(text: &str, opts: &Options) -> Result<Artifacts, Diagnostics> {
    let (source, clocked) = front(text)?;
    if let Some(m) = &opts.main {
        if clocked.node(m).is_none() {
            return Err(Diagnostic::new(
                Code::Config,
                Pos::synthetic(),
                format!("main node `{m}` not found"),
            )
            .into());
        }
    }
    let normalized = lower(&source, &clocked, opts.inline)?;
    let trees = state_trees(&normalized)?;
    let horn = encode_program(
        &normalized,
        &Target {
            main: opts.main.as_deref(),
            prove: opts.prove.as_deref(),
        },
    )?;
    Ok(Artifacts {
        source,
        clocked,
        normalized,
        trees,
        horn,
    })
}

/// Result of running an external Horn solver on a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerificationOutcome {
    Valid,
    Invalid,
    Unknown(String),
    SolverUnavailable(String),
}

/// Run `cmd` with `file` appended (or substituted for a `{}` argument)
/// and read the first result line.
pub fn invoke_solver(cmd: &[String], file: &Path, timeout: Duration) -> VerificationOutcome {
    let Some((prog, rest)) = cmd.split_first() else {
        return VerificationOutcome::SolverUnavailable("empty solver command".into());
    };
    let path = file.display().to_string();
    let mut args: Vec<String> = rest.iter().map(|a| a.replace("{}", &path)).collect();
    if !rest.iter().any(|a| a.contains("{}")) {
        args.push(path);
    }
    let mut child = match Command::new(prog)
        .args(&args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return VerificationOutcome::SolverUnavailable(format!("{prog}: {e}")),
    };
    match child.wait_timeout(timeout) {
        Ok(Some(_)) => {}
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return VerificationOutcome::Unknown(format!("timeout after {}s", timeout.as_secs()));
        }
        Err(e) => return VerificationOutcome::Unknown(e.to_string()),
    }
    let mut out = String::new();
    if let Some(mut s) = child.stdout.take() {
        let _ = s.read_to_string(&mut out);
    }
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => VerificationOutcome::Valid,
        Some("sat") => VerificationOutcome::Invalid,
        Some(other) => VerificationOutcome::Unknown(other.to_string()),
        None => VerificationOutcome::Unknown("no output".into()),
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct CompilerConfig {
    pub input: PathBuf,
    pub main: String,
    pub horn: Option<PathBuf>,
    pub emit_clocked: Option<PathBuf>,
    pub emit_normalized: Option<PathBuf>,
    pub emit_state_tree: Option<PathBuf>,
    pub inline: bool,
    /// `(node, output)`
    pub prove: Option<(String, String)>,
    pub solver: Option<Vec<String>>,
    pub timeout: Duration,
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}", render(.diags, .file))]
    Diagnostics { file: String, diags: Diagnostics },
}

fn render(diags: &Diagnostics, file: &str) -> String {
    diags
        .iter()
        .map(|d| d.render(file))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Compile per `cfg`, write the requested artifacts, and run the solver
/// when a property and a solver are configured.
pub fn run_pipeline(cfg: &CompilerConfig) -> Result<Option<VerificationOutcome>, DriverError> {
    if let Some((node, _)) = &cfg.prove {
        if cfg.horn.is_none() {
            return Err(DriverError::Usage("--prove requires --horn".into()));
        }
        if node != &cfg.main {
            return Err(DriverError::Usage(format!(
                "property node `{node}` differs from main node `{}`",
                cfg.main
            )));
        }
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DriverError::Io { path, source }
    };
    let text = std::fs::read_to_string(&cfg.input).map_err(io(&cfg.input))?;
    let opts = Options {
        main: Some(cfg.main.clone()),
        inline: cfg.inline,
        prove: cfg.prove.as_ref().map(|(_, o)| o.clone()),
    };
    let art = compile_str(&text, &opts).map_err(|diags| DriverError::Diagnostics {
        file: cfg.input.display().to_string(),
        diags,
    })?;
    let outputs = [
        (&cfg.emit_clocked, art.clocked_text()),
        (&cfg.emit_normalized, art.normalized_text()),
        (&cfg.emit_state_tree, art.state_tree_text()),
        (&cfg.horn, art.horn_text()),
    ];
    for (path, text) in outputs {
        if let Some(p) = path {
            write_atomic(p, &text).map_err(io(p))?;
        }
    }
    match (&cfg.prove, &cfg.solver, &cfg.horn) {
        (Some(_), Some(cmd), Some(h)) => Ok(Some(invoke_solver(cmd, h, cfg.timeout))),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn causality_stops_pipeline() {
        let err = compile_str(
            include_str!("../tests/corpus/failure.lus"),
            &Options::default(),
        )
        .unwrap_err();
        assert!(err.has_code(Code::Causality));
    }

    #[test]
    fn unknown_main() {
        let err = compile_str(
            "node n(i:int) returns (o:int); let o = i; tel",
            &Options {
                main: Some("m".into()),
                ..Options::default()
            },
        )
        .unwrap_err();
        assert!(err.has_code(Code::Config));
    }

    #[test]
    fn missing_solver_is_unavailable() {
        let out = invoke_solver(
            &["/nonexistent/solver".to_string()],
            Path::new("x.smt2"),
            Duration::from_secs(1),
        );
        assert!(matches!(out, VerificationOutcome::SolverUnavailable(_)));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
    }
}
