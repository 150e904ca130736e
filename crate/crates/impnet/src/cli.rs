//! Command-line front end. The subcommand handlers are plain functions
//! returning an exit code so they can be driven from tests; `main` only
//! forwards its arguments.
//!
//! Exit codes: 0 success, 1 syntax error, 2 evaluation error, 3 topology
//! error, 4 evaluator disagreement.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser as ClapParser, Subcommand, ValueEnum};

use crate::domain::{Binding, NetState, VarStore};
use crate::dynamic_sem::{render_step_log, run_dynamic};
use crate::fuzz::{diff_states, run_fuzz, FuzzConfig};
use crate::netsim::{parse_topology, MissAction, Network};
use crate::static_sem::{run_program, RunConfig, StepTrace};
use crate::syntax::{check_bound, desugar_program, parse_event_literal, parse_program, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_EVAL: i32 = 2;
pub const EXIT_TOPO: i32 = 3;
pub const EXIT_DISAGREE: i32 = 4;

#[derive(ClapParser, Debug)]
#[command(
    name = "impnet",
    about = "Parse, run and cross-check ImpNet controller programs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Semantics {
    /// Big-step interpreter.
    Static,
    /// Small-step rewriting engine.
    Dynamic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MissActionArg {
    Controller,
    Drop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Tsv,
}

#[derive(Debug, Clone, clap::Args)]
struct CaseArgs {
    /// Program file.
    program: PathBuf,
    /// Topology file; defaults to an empty network.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Initial bindings file (`bind <var> = <event>` lines).
    #[arg(long)]
    bind: Option<PathBuf>,
    /// Maximum number of execution steps.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// What switches do on a flow-table miss.
    #[arg(long, value_enum, default_value_t = MissActionArg::Controller)]
    miss_action: MissActionArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a program and print the final controller state.
    Run {
        #[command(flatten)]
        case: CaseArgs,
        /// Which evaluator to use.
        #[arg(long, value_enum, default_value_t = Semantics::Static)]
        semantics: Semantics,
        /// Also print the step-by-step execution log.
        #[arg(long)]
        trace: bool,
        /// Output format for the final state.
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Run a program under both evaluators and compare the final states.
    Compare {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Parse a program (and topology, if given) without executing it.
    Check {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Generate random programs and cross-check the two evaluators.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u32,
        /// Statement budget per generated program.
        #[arg(long, default_value_t = 20)]
        max_size: u32,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Directory to write reproducer files for disagreements.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse arguments (excluding the binary name is fine; clap handles both)
/// and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through this path too
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run {
            case,
            semantics,
            trace,
            format,
        } => cmd_run(&case, semantics, trace, format),
        Command::Compare { case } => cmd_compare(&case),
        Command::Check { case } => cmd_check(&case),
        Command::Fuzz {
            seed,
            count,
            max_size,
            budget,
            out,
        } => cmd_fuzz(seed, count, max_size, budget, out.as_deref()),
    }
}

struct LoadedCase {
    program: Program,
    net: Network,
    initial: VarStore,
}

fn load_case(case: &CaseArgs) -> Result<LoadedCase, i32> {
    let text = read(&case.program)?;
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: syntax error: {e}", case.program.display());
            return Err(EXIT_PARSE);
        }
    };
    let mut net = match &case.net {
        Some(path) => match parse_topology(&read(path)?) {
            Ok(n) => n,
            Err(e) => {
                eprintln!("{}: topology error: {e}", path.display());
                return Err(EXIT_TOPO);
            }
        },
        None => Network::default(),
    };
    net.miss_action = match case.miss_action {
        MissActionArg::Controller => MissAction::Controller,
        MissActionArg::Drop => MissAction::Drop,
    };
    let initial = match &case.bind {
        Some(path) => parse_bind_file(&read(path)?).map_err(|e| {
            eprintln!("{}: {e}", path.display());
            EXIT_PARSE
        })?,
        None => VarStore::new(),
    };
    Ok(LoadedCase {
        program,
        net,
        initial,
    })
}

fn read(path: &std::path::Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_PARSE
    })
}

/// Parse a bindings file: blank lines and `#` comments are skipped, every
/// other line is `bind <var> = <event literal>`.
pub fn parse_bind_file(text: &str) -> Result<VarStore, String> {
    let mut store = VarStore::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rest = content
            .strip_prefix("bind")
            .ok_or_else(|| format!("line {line}: expected `bind <var> = <event>`"))?;
        let (name, literal) = rest
            .split_once('=')
            .ok_or_else(|| format!("line {line}: expected `=`"))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("line {line}: bad variable name `{name}`"));
        }
        let ev = parse_event_literal(literal.trim())
            .map_err(|e| format!("line {line}: syntax error: {e}"))?;
        store.bind(name, Binding::Event(ev));
    }
    Ok(store)
}

fn check_front_end(case: &LoadedCase) -> Result<(), i32> {
    let names = case.initial.0.keys().cloned().collect();
    check_bound(&case.program, &names).map_err(|e| {
        eprintln!("evaluation error: {e}");
        EXIT_EVAL
    })
}

fn cmd_run(case_args: &CaseArgs, semantics: Semantics, trace: bool, format: Format) -> i32 {
    let case = match load_case(case_args) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(code) = check_front_end(&case) {
        return code;
    }
    let cfg = RunConfig {
        budget: case_args.budget,
    };
    let started = std::time::Instant::now();
    let (state, steps, log) = match semantics {
        Semantics::Static => match run_program(&case.program, &case.net, case.initial, cfg) {
            Ok((state, steps)) => {
                let log = render_static_trace(&steps);
                (state, steps.0.len(), log)
            }
            Err(e) => {
                eprintln!("evaluation error: {e}");
                return EXIT_EVAL;
            }
        },
        Semantics::Dynamic => {
            let chain = desugar_program(&case.program);
            match run_dynamic(chain, &case.net, case.initial, case_args.budget) {
                Ok((state, steps)) => {
                    let log = render_step_log(&steps);
                    (state, steps.len(), log)
                }
                Err(e) => {
                    eprintln!("evaluation error: {e}");
                    return EXIT_EVAL;
                }
            }
        }
    };
    let elapsed = started.elapsed();
    if trace {
        print!("{log}");
    }
    println!("steps: {steps}");
    println!("elapsed: {} us", elapsed.as_micros());
    print!("{}", render_state(&state, format));
    EXIT_OK
}

fn cmd_compare(case_args: &CaseArgs) -> i32 {
    let case = match load_case(case_args) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(code) = check_front_end(&case) {
        return code;
    }
    let cfg = RunConfig {
        budget: case_args.budget,
    };
    let st = run_program(&case.program, &case.net, case.initial.clone(), cfg);
    let chain = desugar_program(&case.program);
    let dy = run_dynamic(chain, &case.net, case.initial, case_args.budget);
    match (st, dy) {
        (Ok((a, _)), Ok((b, _))) => match diff_states(&a, &b) {
            Ok(()) => {
                println!("agree");
                EXIT_OK
            }
            Err(diff) => {
                eprintln!("evaluators disagree:\n{diff}");
                EXIT_DISAGREE
            }
        },
        (Err(ea), Err(eb)) if ea == eb => {
            eprintln!("evaluation error: {ea}");
            EXIT_EVAL
        }
        (Err(ea), Err(eb)) => {
            eprintln!("evaluators disagree: big-step error `{ea}` vs rewriting error `{eb}`");
            EXIT_DISAGREE
        }
        (Ok(_), Err(e)) => {
            eprintln!("evaluators disagree: rewriting failed with `{e}`");
            EXIT_DISAGREE
        }
        (Err(e), Ok(_)) => {
            eprintln!("evaluators disagree: big-step failed with `{e}`");
            EXIT_DISAGREE
        }
    }
}

fn cmd_check(case_args: &CaseArgs) -> i32 {
    let case = match load_case(case_args) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(code) = check_front_end(&case) {
        return code;
    }
    println!("ok");
    EXIT_OK
}

fn cmd_fuzz(seed: u64, count: u32, max_size: u32, budget: u64, out: Option<&std::path::Path>) -> i32 {
    if let Some(dir) = out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("{}: {e}", dir.display());
            return EXIT_EVAL;
        }
    }
    let report = run_fuzz(
        FuzzConfig {
            seed,
            count,
            max_size,
            budget,
        },
        out,
    );
    println!(
        "{} cases, {} disagreements",
        report.cases,
        report.disagreements.len()
    );
    for d in &report.disagreements {
        eprintln!("case {}:\n{}\n{}", d.case, d.program, d.detail);
    }
    if report.disagreements.is_empty() {
        EXIT_OK
    } else {
        EXIT_DISAGREE
    }
}

fn render_static_trace(trace: &StepTrace) -> String {
    let mut out = String::new();
    for (i, step) in trace.0.iter().enumerate() {
        writeln!(out, "{i} {} | {}", step.rule, step.stmt).unwrap();
    }
    out
}

/// Render the four cells of a final state.
fn render_state(state: &NetState, format: Format) -> String {
    match format {
        Format::Plain => {
            let mut out = String::new();
            writeln!(out, "swch:").unwrap();
            for (sw, rules) in &state.sigma.0 {
                for r in rules {
                    writeln!(out, "  {sw} {r}").unwrap();
                }
            }
            writeln!(out, "vars:").unwrap();
            for (x, b) in &state.gamma.0 {
                writeln!(out, "  {x} = {b}").unwrap();
            }
            writeln!(out, "rll: {}", state.ir).unwrap();
            writeln!(out, "hist:").unwrap();
            for (sw, entries) in &state.hist.0 {
                for (pk, a) in entries {
                    writeln!(out, "  {sw} {pk} {a}").unwrap();
                }
            }
            out
        }
        Format::Tsv => {
            let mut out = String::new();
            for (sw, rules) in &state.sigma.0 {
                for r in rules {
                    writeln!(out, "swch\t{sw}\t{r}").unwrap();
                }
            }
            for (x, b) in &state.gamma.0 {
                writeln!(out, "vars\t{x}\t{b}").unwrap();
            }
            for (sw, r) in state.ir.iter() {
                writeln!(out, "rll\t{sw}\t{r}").unwrap();
            }
            for (sw, entries) in &state.hist.0 {
                for (pk, a) in entries {
                    writeln!(out, "hist\t{sw}\t{pk}\t{a}").unwrap();
                }
            }
            out
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_tmp(name: &str, content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("impnet-cli-tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    const SIMPLE: &str = "z = Switches;\n>>\n\
                          y := Lift(z, \\t.(t, (srcport(80), sendall, _)));\n\
                          w := Lift(y, \\t.(fst(t), snd(t)));\n\
                          Register;\n";

    #[test]
    fn run_compare_check_succeed_on_a_valid_case() {
        let prog = write_tmp("ok.impnet", SIMPLE);
        let topo = write_tmp("ok.topo", "switch id1 ports 4\nswitch id2 ports 4\n");
        let p = prog.to_str().unwrap();
        let t = topo.to_str().unwrap();
        for sub in ["run", "compare", "check"] {
            assert_eq!(
                run(["impnet", sub, p, "--net", t]),
                EXIT_OK,
                "subcommand {sub}"
            );
        }
        assert_eq!(
            run(["impnet", "run", p, "--net", t, "--semantics", "dynamic", "--trace"]),
            EXIT_OK
        );
    }

    #[test]
    fn exit_codes_distinguish_failure_kinds() {
        let bad_prog = write_tmp("bad.impnet", ">>\nx := ;\n");
        let good_prog = write_tmp("good.impnet", ">>\nAddRules(nosuch);\nRegister;\n");
        let bad_topo = write_tmp("bad.topo", "frobnicate\n");
        assert_eq!(
            run(["impnet", "run", bad_prog.to_str().unwrap()]),
            EXIT_PARSE
        );
        assert_eq!(
            run(["impnet", "run", good_prog.to_str().unwrap()]),
            EXIT_EVAL
        );
        assert_eq!(
            run([
                "impnet",
                "run",
                good_prog.to_str().unwrap(),
                "--net",
                bad_topo.to_str().unwrap()
            ]),
            EXIT_TOPO
        );
    }

    #[test]
    fn bind_file_supplies_initial_variables() {
        let store = parse_bind_file(
            "# initial data\nbind z = (id1, id2)\nbind n = (5)\n",
        )
        .unwrap();
        assert!(store.get("z").is_ok());
        assert!(store.get("n").is_ok());
        assert!(parse_bind_file("z = (id1)\n").is_err());
    }
}
