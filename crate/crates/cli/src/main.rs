use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use autohorn::driver::{
    compile_str, run_pipeline, write_atomic, CompilerConfig, DriverError, Options,
    VerificationOutcome,
};
use autohorn::interp::{decode_inputs, encode_outputs, Machine};
use clap::{Args, Parser, Subcommand};

/// Compile Lustre programs with automata into modular Horn clauses.
#[derive(Parser)]
#[command(name = "autohorn", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a program and optionally check a property with a Horn solver.
    Compile(CompileArgs),
    /// Run a node on input valuations read from CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CompileArgs {
    file: PathBuf,
    /// Main node.
    #[arg(long)]
    node: String,
    /// Write the Horn clauses here.
    #[arg(long)]
    horn: Option<PathBuf>,
    /// Write the program after automaton expansion.
    #[arg(long)]
    emit_clocked: Option<PathBuf>,
    /// Write the normalized program.
    #[arg(long)]
    emit_normalized: Option<PathBuf>,
    /// Write the memory trees.
    #[arg(long)]
    emit_state_tree: Option<PathBuf>,
    /// Inline the nodes generated for automaton states.
    #[arg(long)]
    inline: bool,
    /// Boolean output to prove invariant, as `node:output`.
    #[arg(long, value_parser = parse_prove)]
    prove: Option<(String, String)>,
    /// Solver command line; the Horn file path is appended or replaces `{}`.
    #[arg(long, allow_hyphen_values = true)]
    solver: Option<String>,
    /// Solver timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    #[arg(long)]
    node: String,
    /// Number of instants; defaults to the number of input rows.
    #[arg(long)]
    steps: Option<usize>,
    /// CSV with one column per input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write outputs here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_prove(s: &str) -> Result<(String, String), String> {
    match s.split_once(':') {
        Some((n, o)) if !n.is_empty() && !o.is_empty() => Ok((n.to_string(), o.to_string())),
        _ => Err("expected node:output".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Compile(a) => compile(a),
        Cmd::Simulate(a) => simulate(a),
    };
    ExitCode::from(code)
}

fn driver_error(e: DriverError) -> u8 {
    eprintln!("{e}");
    match e {
        DriverError::Usage(_) | DriverError::Io { .. } => 1,
        DriverError::Diagnostics { .. } => 2,
    }
}

fn compile(a: CompileArgs) -> u8 {
    let solver = a
        .solver
        .or_else(|| std::env::var("HORN_SOLVER").ok())
        .map(|s| s.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|v| !v.is_empty());
    let cfg = CompilerConfig {
        input: a.file,
        main: a.node,
        horn: a.horn,
        emit_clocked: a.emit_clocked,
        emit_normalized: a.emit_normalized,
        emit_state_tree: a.emit_state_tree,
        inline: a.inline,
        prove: a.prove,
        solver,
        timeout: Duration::from_secs(a.timeout),
    };
    match run_pipeline(&cfg) {
        Err(e) => driver_error(e),
        Ok(None) => 0,
        Ok(Some(outcome)) => match outcome {
            VerificationOutcome::Valid => {
                println!("valid");
                0
            }
            VerificationOutcome::Invalid => {
                println!("invalid");
                3
            }
            VerificationOutcome::Unknown(why) => {
                println!("unknown: {why}");
                4
            }
            VerificationOutcome::SolverUnavailable(why) => {
                eprintln!("solver unavailable: {why}");
                4
            }
        },
    }
}

fn simulate(a: SimulateArgs) -> u8 {
    let file = a.file.display().to_string();
    let text = match std::fs::read_to_string(&a.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{file}: {e}");
            return 1;
        }
    };
    let opts = Options {
        main: Some(a.node.clone()),
        ..Options::default()
    };
    let art = match compile_str(&text, &opts) {
        Ok(art) => art,
        Err(diags) => {
            for d in diags.iter() {
                eprintln!("{}", d.render(&file));
            }
            return 2;
        }
    };
    let node = art.normalized.node(&a.node).expect("main node checked");
    let inputs: Vec<_> = node
        .inputs
        .iter()
        .map(|v| (v.name.clone(), v.ty.clone()))
        .collect();
    let mut rows = match &a.input {
        Some(p) => {
            let csv = match std::fs::read_to_string(p) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", p.display());
                    return 1;
                }
            };
            match decode_inputs(&csv, &inputs, &art.normalized.types) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: {e}", p.display());
                    return 1;
                }
            }
        }
        None if inputs.is_empty() => vec![Vec::new(); a.steps.unwrap_or(0)],
        None => {
            eprintln!("node `{}` has inputs; pass --input", a.node);
            return 1;
        }
    };
    if let Some(k) = a.steps {
        if k > rows.len() {
            eprintln!("{k} steps requested but only {} input rows", rows.len());
            return 1;
        }
        rows.truncate(k);
    }
    let machine = match Machine::new(&art.normalized) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let trace = match machine.run_trace(&a.node, &rows) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("runtime error: {e}");
            return 2;
        }
    };
    let names: Vec<String> = node.outputs.iter().map(|v| v.name.clone()).collect();
    let out = encode_outputs(&names, &trace.outputs);
    match a.output {
        Some(p) => {
            if let Err(e) = write_atomic(&p, &out) {
                eprintln!("{}: {e}", p.display());
                return 1;
            }
        }
        None => print!("{out}"),
    }
    0
}
