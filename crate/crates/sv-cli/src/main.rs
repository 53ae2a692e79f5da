use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sv_cli::run::{run_cli, Format, Mode, RunConfig};

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verify,
    CheckOverflow,
    DumpConstraints,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    JsonlLike,
}

/// Verifies programs with integer overflow checking.
#[derive(Parser)]
#[command(name = "sentinel-verify", version)]
struct Args {
    /// Source files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "verify")]
    mode: ModeArg,
    /// Unfold/fold budget of the entailment prover.
    #[arg(long, alias = "max-unfold", default_value_t = 3)]
    fuel: u32,
    /// Integer width of the concrete oracle (3..=16).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(3..=16))]
    oracle_width: u32,
    /// Maximum list length enumerated by the oracle.
    #[arg(long, default_value_t = 3)]
    enum_bound: usize,
    /// Maximum number of disjuncts in normalized formulas.
    #[arg(long, default_value_t = sv_pure::DEFAULT_DISJUNCT_CAP)]
    disjunct_cap: usize,
    /// Print every normalization query (same as --mode dump-constraints).
    #[arg(long)]
    dump_constraints: bool,
    /// Print the entailment search.
    #[arg(long)]
    trace_entail: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Also check subtraction.
    #[arg(long)]
    check_sub: bool,
}

fn main() -> ExitCode {
    let a = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { sv_cli::run::EXIT_INPUT as u8 } else { 0 });
        }
    };
    let mut mode = match a.mode {
        ModeArg::Verify => Mode::Verify,
        ModeArg::CheckOverflow => Mode::CheckOverflow,
        ModeArg::DumpConstraints => Mode::DumpConstraints,
        ModeArg::Oracle => Mode::Oracle,
    };
    if a.dump_constraints {
        mode = Mode::DumpConstraints;
    }
    let cfg = RunConfig {
        inputs: a.inputs,
        mode,
        fuel: a.fuel,
        oracle_width: a.oracle_width,
        disjunct_cap: a.disjunct_cap,
        enum_bound: a.enum_bound,
        format: match a.format {
            FormatArg::Text => Format::Text,
            FormatArg::JsonlLike => Format::Jsonl,
        },
        trace_entail: a.trace_entail,
        check_sub: a.check_sub,
    };
    let code = run_cli(&cfg, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
