//! The `grafcet` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use grafcet_core::analysis::DEFAULT_STATE_LIMIT;
use grafcet_core::codegen::{gen_c, gen_pld_equations, render_palasm};
use grafcet_core::engine::{Engine, EngineConfig, Model, SchedulingPolicy, ScriptSource, DEFAULT_DIVERGENCE_CAP};
use grafcet_core::frontend::{export_dot, parse_script};
use grafcet_core::ir::{GrafcetNet, Hierarchy};
use grafcet_core::transform::{fix_conflicts, flatten, FixMode};

use crate::interactive::InteractiveSource;
use crate::library::{catalog_add, catalog_instantiate, catalog_list};
use crate::loader::{load_hierarchy, load_net, render_net, write_net, Dialect, LoadError};
use crate::report::analyze;

#[derive(Debug, Parser)]
#[command(name = "grafcet", version, about = "Grafcet/SFC compiler and simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Policy {
    DeclarationOrder,
    LowestLevel,
    Priority,
}

impl From<Policy> for SchedulingPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::DeclarationOrder => SchedulingPolicy::DeclarationOrder,
            Policy::LowestLevel => SchedulingPolicy::LowestLevel,
            Policy::Priority => SchedulingPolicy::Priority,
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err(String::from("must be positive")),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Grafcet selection rule for the firing phase.
    #[arg(long, value_enum, default_value = "declaration-order")]
    policy: Policy,
    /// Tasks executed per step per slice (unlimited when absent).
    #[arg(long, value_parser = positive)]
    budget: Option<usize>,
    /// Firing rounds allowed between two external events.
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_DIVERGENCE_CAP)]
    divergence_cap: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig { policy: self.policy.into(), budget: self.budget, divergence_cap: self.divergence_cap }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite a net in canonical form.
    Fmt {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a net and report reachability, liveness and conflicts.
    Check {
        input: PathBuf,
        /// Treat conflicts as errors.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
    },
    /// Eliminate reachable conflicts by rewriting transition pairs.
    FixConflicts {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Only merge pairs with equivalent receptivities.
        #[arg(long, conflicts_with = "exclusive")]
        parallel: bool,
        /// Only split pairs with overlapping receptivities.
        #[arg(long)]
        exclusive: bool,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
        #[arg(long, value_parser = positive, default_value_t = 64)]
        max_passes: usize,
    },
    /// Inline every macrostep's sub-net.
    Flatten {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a net against a script or an interactive feed; prints the trace.
    Sim {
        input: PathBuf,
        #[arg(long, conflicts_with = "interactive", required_unless_present = "interactive")]
        script: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Generate a C controller.
    GenC {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Generate one-hot PLD equations.
    GenPld {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Chip name in the header (defaults to the net name).
        #[arg(long)]
        chip: Option<String>,
    },
    /// Render a net as Graphviz DOT.
    ExportDot {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Manage the library of certified nets.
    Lib {
        /// Catalog directory.
        #[arg(long, env = "GRAFCET_LIB")]
        lib: PathBuf,
        #[command(subcommand)]
        action: LibCommand,
    },
}

#[derive(Debug, Subcommand)]
enum LibCommand {
    /// Certify a net and store it.
    Add {
        input: PathBuf,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
    },
    /// List entries.
    List,
    /// Write a prefixed copy of an entry.
    Instantiate {
        name: String,
        prefix: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Net the copy will be embedded in; the prefix must be free there.
        #[arg(long)]
        into: Option<PathBuf>,
    },
}

/// Exit status with the text already written.
enum Failure {
    /// Exit 1.
    Errors,
    /// Exit 2.
    Usage,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail_load(&mut self, e: LoadError) -> Failure {
        let _ = writeln!(self.err, "{}", e.render());
        if e.is_io() {
            Failure::Usage
        } else {
            Failure::Errors
        }
    }

    fn error(&mut self, msg: impl std::fmt::Display) -> Failure {
        let _ = writeln!(self.err, "error: {msg}");
        Failure::Errors
    }

    /// Writes `text` to `path`, or to the output stream.
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, text).map_err(|e| self.error(format!("{}: {e}", p.display()))),
            None => self.out.write_all(text.as_bytes()).map_err(|e| self.error(e)),
        }
    }

    fn emit_net(&mut self, path: Option<&Path>, net: &GrafcetNet, default: Dialect) -> Result<(), Failure> {
        match path {
            Some(p) => write_net(p, net).map_err(|e| self.fail_load(e)),
            None => {
                let text = render_net(net, default).map_err(|v| {
                    let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    self.error(msgs.join("; "))
                })?;
                self.emit(None, &text)
            }
        }
    }
}

fn hierarchy(io: &mut Io, path: &Path) -> Result<Hierarchy, Failure> {
    load_hierarchy(path).map_err(|e| io.fail_load(e))
}

/// The net itself when flat, its flattening otherwise.
fn flat_net(io: &mut Io, path: &Path) -> Result<GrafcetNet, Failure> {
    let h = hierarchy(io, path)?;
    if h.is_flat() {
        return Ok(h.root_net().clone());
    }
    flatten(&h).map_err(|e| io.error(e))
}

fn dialect(path: &Path) -> Dialect {
    Dialect::of(path).unwrap_or(Dialect::Rules)
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let mut io = Io { out, err };
    let code = match dispatch(cli.command, stdin, &mut io) {
        Ok(()) => 0,
        Err(Failure::Errors) => 1,
        Err(Failure::Usage) => 2,
    };
    let _ = io.out.flush();
    code
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, io: &mut Io) -> Result<(), Failure> {
    match command {
        Command::Fmt { input, output } => {
            let net = load_net(&input).map_err(|e| io.fail_load(e))?;
            io.emit_net(output.as_deref(), &net, dialect(&input))
        }
        Command::Check { input, strict, json, state_limit } => {
            let net = flat_net(io, &input)?;
            let report = analyze(&net, state_limit).map_err(|e| io.error(e))?;
            let text = if json { report.to_json() } else { report.to_text() };
            io.emit(None, &text)?;
            let n = report.conflicts().count();
            if strict && n > 0 {
                return Err(io.error(format!("{n} conflict(s) under --strict")));
            }
            Ok(())
        }
        Command::FixConflicts { input, output, parallel, exclusive, state_limit, max_passes } => {
            let net = flat_net(io, &input)?;
            let mode = match (parallel, exclusive) {
                (true, _) => FixMode::Parallel,
                (_, true) => FixMode::Exclusive,
                _ => FixMode::Both,
            };
            let (fixed, applied) = fix_conflicts(&net, mode, state_limit, max_passes).map_err(|e| io.error(e))?;
            for a in &applied {
                let kind = match a.classification {
                    grafcet_core::analysis::Classification::ParallelRewrite => "parallel",
                    _ => "exclusive",
                };
                let _ = writeln!(io.err, "{kind} rewrite of {} and {}", a.first, a.second);
            }
            io.emit_net(output.as_deref(), &fixed, dialect(&input))
        }
        Command::Flatten { input, output } => {
            let net = flat_net(io, &input)?;
            io.emit_net(output.as_deref(), &net, dialect(&input))
        }
        Command::Sim { input, script, interactive, engine } => {
            let h = hierarchy(io, &input)?;
            let model = if h.is_flat() { Model::flat(h.root_net()) } else { Model::hierarchical(&h) }
                .map_err(|e| io.error(e))?;
            let mut sim = Engine::new(model, engine.config());
            let result = {
                let out = &mut *io.out;
                let mut sink = |e: &grafcet_core::engine::TraceEvent| {
                    let _ = writeln!(out, "{e}");
                    let _ = out.flush();
                };
                if interactive {
                    let names = sim.model().inputs.clone();
                    let mut src = InteractiveSource::new(&mut *stdin, &mut *io.err, names);
                    sim.run(&mut src, &mut sink)
                } else {
                    let path = script.expect("clap requires --script without --interactive");
                    let text = match fs::read_to_string(&path) {
                        Ok(t) => t,
                        Err(e) => {
                            let _ = writeln!(io.err, "error: {}: {e}", path.display());
                            return Err(Failure::Usage);
                        }
                    };
                    let events = parse_script(&text).map_err(|d| {
                        let _ = writeln!(io.err, "{}:{d}", path.display());
                        Failure::Errors
                    })?;
                    sim.run(&mut ScriptSource::new(events), &mut sink)
                }
            };
            result.map_err(|e| io.error(e))
        }
        Command::GenC { input, output, engine } => {
            let net = flat_net(io, &input)?;
            let src = gen_c(&net, &engine.config()).map_err(|e| io.error(e))?;
            io.emit(output.as_deref(), &src.text)
        }
        Command::GenPld { input, output, chip } => {
            let net = flat_net(io, &input)?;
            let eqs = gen_pld_equations(&net).map_err(|e| io.error(e))?;
            let chip = chip.unwrap_or_else(|| net.name.replace('.', "_"));
            io.emit(output.as_deref(), &render_palasm(&eqs, &chip).text)
        }
        Command::ExportDot { input, output } => {
            let net = load_net(&input).map_err(|e| io.fail_load(e))?;
            io.emit(output.as_deref(), &export_dot(&net))
        }
        Command::Lib { lib, action } => match action {
            LibCommand::Add { input, state_limit } => {
                let net = load_net(&input).map_err(|e| io.fail_load(e))?;
                let entry = catalog_add(&lib, &net, state_limit).map_err(|e| io.error(e))?;
                let c = entry.certification;
                let text = format!(
                    "{} {}\nstructure_ok={} conflict_free={} deadlock_free={} no_dead_transitions={} safe={}\n",
                    entry.name,
                    entry.digest,
                    c.structure_ok,
                    c.conflict_free,
                    c.deadlock_free,
                    c.no_dead_transitions,
                    c.safe
                );
                io.emit(None, &text)
            }
            LibCommand::List => {
                let entries = catalog_list(&lib).map_err(|e| io.error(e))?;
                let mut text = String::new();
                for s in &entries {
                    let c = s.entry.certification;
                    let flags: Vec<&str> = [
                        ("structure_ok", c.structure_ok),
                        ("conflict_free", c.conflict_free),
                        ("deadlock_free", c.deadlock_free),
                        ("no_dead_transitions", c.no_dead_transitions),
                        ("safe", c.safe),
                    ]
                    .iter()
                    .filter(|(_, v)| *v)
                    .map(|(n, _)| *n)
                    .collect();
                    text += &format!(
                        "{} {} verified_at={} [{}]",
                        s.entry.name,
                        s.entry.digest,
                        s.entry.verified_at,
                        flags.join(" ")
                    );
                    if let Some(w) = &s.warning {
                        text += &format!(" CORRUPT: {w}");
                        let _ = writeln!(io.err, "warning: {}: {w}", s.entry.name);
                    }
                    text.push('\n');
                }
                io.emit(None, &text)
            }
            LibCommand::Instantiate { name, prefix, output, into } => {
                let consumer = match into {
                    Some(p) => Some(load_net(&p).map_err(|e| io.fail_load(e))?),
                    None => None,
                };
                let net = catalog_instantiate(&lib, &name, &prefix, consumer.as_ref()).map_err(|e| io.error(e))?;
                io.emit_net(output.as_deref(), &net, Dialect::Rules)
            }
        },
    }
}
