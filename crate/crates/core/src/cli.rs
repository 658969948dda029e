//! Command-line driver. Exit codes: 0 success or property holds, 1 property
//! violated, 2 input error, 3 capacity error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::expand::AtBound;
use crate::model::Action;
use crate::pipeline::Input;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spsmc", version, about = "Model checker for services with passive clients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AtBoundArg {
    Block,
    Freeze,
}

impl From<AtBoundArg> for AtBound {
    fn from(a: AtBoundArg) -> Self {
        match a {
            AtBoundArg::Block => AtBound::Block,
            AtBoundArg::Freeze => AtBound::Freeze,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// A .sps, .mfstl or .spsml file.
    file: PathBuf,
    /// Server system for a .mfstl file.
    #[arg(long, value_name = "FILE.sps")]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the per-type bound derived from the specification.
    Bound(Common),
    /// Print the grounded LTL formula.
    Ground(Common),
    /// Expand the system and check the grounded specification.
    Check {
        #[command(flatten)]
        common: Common,
        /// What a request does when its type's counter is at the bound.
        #[arg(long, value_enum, default_value = "block")]
        at_bound: AtBoundArg,
    },
    /// Print the bounded interpreted structure.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "block")]
        at_bound: AtBoundArg,
    },
    /// Write the SMV encoding of the system and specification.
    EmitSmv {
        #[command(flatten)]
        common: Common,
        /// Output path; standard output when omitted.
        #[arg(short, long, value_name = "OUT.smv")]
        output: Option<PathBuf>,
        /// Also write the variable manifest as JSON.
        #[arg(long, value_name = "FILE.json")]
        manifest: Option<PathBuf>,
    },
    /// Print every run of the system on a word such as `req(h),ans(h)`.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        word: Vec<String>,
    },
    /// Print the configurations reachable within a number of steps.
    Reach {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
    },
    /// Search for an accepted word up to a length.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Bound(c) | Command::Ground(c) => c,
            Command::Check { common, .. }
            | Command::Expand { common, .. }
            | Command::EmitSmv { common, .. }
            | Command::Simulate { common, .. }
            | Command::Reach { common, .. }
            | Command::Witness { common, .. } => common,
        }
    }
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("values serialize");
    writeln!(out, "{text}")
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let common = cmd.common();
    let input = Input::load(&common.file, common.model.as_deref())?;
    for w in input.warnings() {
        writeln!(err, "{}: {w}", common.file.display()).map_err(io)?;
    }
    let json = common.format == Format::Json;
    match cmd {
        Command::Bound(_) => {
            let bounds = input.bounds()?;
            if json {
                json_line(out, &json!({ "bound_profile": bounds })).map_err(io)?;
            } else {
                write!(out, "{bounds}").map_err(io)?;
            }
        }
        Command::Ground(_) => {
            let (bounds, ltl) = input.ground()?;
            if json {
                json_line(out, &json!({ "bound_profile": bounds, "ltl": ltl.render() })).map_err(io)?;
            } else {
                writeln!(out, "{}", ltl.render()).map_err(io)?;
            }
        }
        Command::Check { at_bound, .. } => {
            let report = input.check((*at_bound).into())?;
            let k = &report.kripke;
            let v = &report.verdict;
            if json {
                let cx = v.counterexample.as_ref();
                let value = json!({
                    "verdict": if v.holds { "holds" } else { "violated" },
                    "bound_profile": report.bounds,
                    "at_bound": k.at_bound(),
                    "states": k.len(),
                    "transitions": k.transition_count(),
                    "stem_length": cx.map(|c| c.stem.len()),
                    "cycle_length": cx.map(|c| c.cycle.len()),
                    "counterexample": cx.map(|c| c.steps(k)),
                    "warnings": v.warnings,
                    "deadlocks_completed": v.deadlocks_completed,
                });
                json_line(out, &value).map_err(io)?;
            } else {
                write!(out, "{}", report.bounds).map_err(io)?;
                let mode = match k.at_bound() {
                    AtBound::Block => "block",
                    AtBound::Freeze => "freeze",
                };
                writeln!(
                    out,
                    "expanded: {} states, {} transitions (at bound: {mode})",
                    k.len(),
                    k.transition_count()
                )
                .map_err(io)?;
                write!(out, "{}", v.render(k)).map_err(io)?;
            }
            return Ok(if v.holds { EXIT_OK } else { EXIT_VIOLATED });
        }
        Command::Expand { at_bound, .. } => {
            let k = input.expand((*at_bound).into())?;
            write!(out, "{}", k.dump()).map_err(io)?;
        }
        Command::EmitSmv { output, manifest, .. } => {
            let doc = input.emit_smv()?;
            match output {
                Some(path) => std::fs::write(path, &doc.text)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => out.write_all(doc.text.as_bytes()).map_err(io)?,
            }
            if let Some(path) = manifest {
                let text = serde_json::to_string_pretty(&doc.manifest).expect("manifest serializes");
                std::fs::write(path, text + "\n")
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Simulate { word, .. } => {
            let sps = input.sps()?;
            let actions = word
                .iter()
                .map(|w| Action::parse(w.trim(), sps.alphabet()))
                .collect::<Result<Vec<_>, _>>()?;
            let runs = sps.run_all(&actions)?;
            if json {
                let runs: Vec<Vec<String>> = runs
                    .iter()
                    .map(|r| r.configs.iter().map(|c| c.display(sps).to_string()).collect())
                    .collect();
                json_line(out, &json!({ "runs": runs })).map_err(io)?;
            } else if runs.is_empty() {
                writeln!(out, "no run: the word blocks").map_err(io)?;
            } else {
                for (i, run) in runs.iter().enumerate() {
                    writeln!(out, "run {}:", i + 1).map_err(io)?;
                    for (j, c) in run.configs.iter().enumerate() {
                        let via = match j {
                            0 => "(initial)".to_string(),
                            _ => actions[j - 1].display(sps.alphabet()),
                        };
                        writeln!(out, "  {j:>3}  {via:<10} {}", c.display(sps)).map_err(io)?;
                    }
                }
            }
        }
        Command::Reach { depth, .. } => {
            let sps = input.sps()?;
            let configs: Vec<String> = sps
                .reachable(*depth)
                .iter()
                .map(|c| c.display(sps).to_string())
                .collect();
            if json {
                json_line(out, &json!({ "depth": depth, "configurations": configs })).map_err(io)?;
            } else {
                writeln!(out, "{} configurations within {depth} steps", configs.len()).map_err(io)?;
                for c in configs {
                    writeln!(out, "{c}").map_err(io)?;
                }
            }
        }
        Command::Witness { depth, .. } => {
            let sps = input.sps()?;
            let word = sps.emptiness_witness_bounded(*depth)?;
            let rendered = word.as_ref().map(|w| {
                w.iter()
                    .map(|a| a.display(sps.alphabet()))
                    .collect::<Vec<_>>()
            });
            if json {
                json_line(out, &json!({ "depth": depth, "witness": rendered })).map_err(io)?;
            } else {
                match rendered {
                    Some(w) if w.is_empty() => writeln!(out, "accepted word: (empty)").map_err(io)?,
                    Some(w) => writeln!(out, "accepted word: {}", w.join(",")).map_err(io)?,
                    None => writeln!(out, "no accepted word of length at most {depth}").map_err(io)?,
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = match &e {
                Error::Parse(_) => writeln!(err, "{}:\n{e}", cli.command.common().file.display()),
                _ => writeln!(err, "error: {e}"),
            };
            if e.is_capacity() {
                EXIT_CAPACITY
            } else {
                EXIT_INPUT
            }
        }
    }
}
