use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fluidic_core::analog::{run_analog, timing_report, AnalogParams};
use fluidic_core::export::{analog_csv, analog_vcd, logic_vcd, to_json, write_dot};
use fluidic_core::hexapod::{run_demo, DemoConfig, DemoMode, Routing, LEGS};
use fluidic_core::logic::{simulate, Delays, SimOptions};
use fluidic_core::netlist::{flatten, validate, valve_count, Depth, EdgeMode, Netlist};
use fluidic_core::synth::{synthesize, FlipFlopStyle, MapOptions};
use fluidic_core::syntax::fnl::{parse_fnl_named, serialize_fnl};
use fluidic_core::syntax::fsm::parse_fsm_named;
use fluidic_core::syntax::params::parse_params_named;
use fluidic_core::syntax::stim::parse_stim_named;
use fluidic_core::syntax::ParseError;

#[derive(Parser)]
#[command(name = "fluidic", version, about = "Compiler and simulators for vacuum-driven fluidic logic")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a .fnl, .fsm, .stim or .params file.
    Check { file: PathBuf },
    /// Synthesize a state machine into a gate-level netlist.
    Synth {
        fsm: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FfArg::Structural)]
        flip_flops: FfArg,
        /// Clock edges for behavioral flip-flops.
        #[arg(long, value_enum, default_value_t = EdgeArg::Rising)]
        edge: EdgeArg,
        /// Merge output ORs with routing junctions instead of NAND logic.
        #[arg(long)]
        ideal_routing: bool,
        #[arg(long, default_value_t = 3)]
        max_fan_in: usize,
        /// Write covers and encoding as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Expand hierarchy down to gates or valves.
    Flatten {
        fnl: PathBuf,
        #[arg(long, value_enum, default_value_t = DepthArg::Valve)]
        depth: DepthArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the valve count instead of the netlist.
        #[arg(long)]
        count: bool,
    },
    /// Simulate a netlist against a stimulus file.
    Sim {
        #[arg(value_enum)]
        engine: Engine,
        fnl: PathBuf,
        #[arg(long)]
        stim: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        /// End time in stimulus units; defaults to the stimulus `end`.
        #[arg(long)]
        until: Option<u64>,
        /// Uniform gate delay for logic runs.
        #[arg(long, default_value_t = 1)]
        delay: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Analog samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Analog 10-90% transition report as JSON.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Run a bundled demonstration.
    Demo {
        #[arg(value_enum)]
        which: DemoName,
        #[arg(long, value_enum, default_value_t = ModeArg::Behavioral)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = RoutingArg::Ideal)]
        routing: RoutingArg,
        #[arg(long, default_value_t = 4)]
        cycles: u64,
        /// Clock period in demo units (gate delays, or ms for analog).
        #[arg(long)]
        period: Option<u64>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Gait report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export a netlist as a DOT graph or JSON.
    Export {
        #[arg(value_enum)]
        format: Format,
        fnl: PathBuf,
        /// Flatten before exporting.
        #[arg(long, value_enum)]
        depth: Option<DepthArg>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FfArg {
    Structural,
    Behavioral,
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgeArg {
    Rising,
    Falling,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthArg {
    Gate,
    Valve,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Logic,
    Analog,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Hexapod,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Behavioral,
    Structural,
    Analog,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoutingArg {
    Ideal,
    Valved,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

impl From<DepthArg> for Depth {
    fn from(d: DepthArg) -> Depth {
        match d {
            DepthArg::Gate => Depth::Gate,
            DepthArg::Valve => Depth::Valve,
        }
    }
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad invocation or unreadable input (exit 2).
    Usage(String),
    /// Problems found in the inputs or during simulation (exit 1).
    Diagnostics(Vec<String>),
}

fn diag(e: impl Display) -> Failure {
    Failure::Diagnostics(vec![e.to_string()])
}

fn parse_diag(e: ParseError) -> Failure {
    let mut lines = vec![e.to_string()];
    if let Some(r) = &e.related {
        lines.push(format!("{r}: note: related item here"));
    }
    Failure::Diagnostics(lines)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_netlist(path: &Path) -> Result<Netlist, Failure> {
    let text = read(path)?;
    let n = parse_fnl_named(&text, &path.display().to_string()).map_err(parse_diag)?;
    let problems = validate(&n);
    if !problems.is_empty() {
        return Err(Failure::Diagnostics(problems.iter().map(ToString::to_string).collect()));
    }
    Ok(n)
}

fn load_params(path: Option<&Path>) -> Result<AnalogParams, Failure> {
    match path {
        Some(p) => parse_params_named(&read(p)?, &p.display().to_string()).map_err(parse_diag),
        None => Ok(AnalogParams::default()),
    }
}

fn require_inputs(paths: &[&Path]) -> Result<(), Failure> {
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Usage(format!("no such file: {}", p.display())));
        }
    }
    Ok(())
}

fn top_name(n: &Netlist) -> Result<String, Failure> {
    n.top_cell()
        .map(|c| c.name.clone())
        .ok_or_else(|| diag("netlist has no top cell"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check { file } => {
            require_inputs(&[&file])?;
            let text = read(&file)?;
            let name = file.display().to_string();
            match file.extension().and_then(|e| e.to_str()) {
                Some("fnl") => {
                    load_netlist(&file)?;
                }
                Some("fsm") => {
                    parse_fsm_named(&text, &name).map_err(parse_diag)?;
                }
                Some("stim") => {
                    parse_stim_named(&text, &name).map_err(parse_diag)?;
                }
                Some("params") => {
                    parse_params_named(&text, &name).map_err(parse_diag)?;
                }
                _ => {
                    return Err(Failure::Usage(format!(
                        "{name}: unknown file type (expected .fnl, .fsm, .stim or .params)"
                    )))
                }
            }
            eprintln!("{name}: ok");
        }
        Command::Synth {
            fsm,
            output,
            flip_flops,
            edge,
            ideal_routing,
            max_fan_in,
            report,
        } => {
            require_inputs(&[&fsm])?;
            let spec = parse_fsm_named(&read(&fsm)?, &fsm.display().to_string()).map_err(parse_diag)?;
            let edge = match edge {
                EdgeArg::Rising => EdgeMode::Rising,
                EdgeArg::Falling => EdgeMode::Falling,
                EdgeArg::Both => EdgeMode::Both,
            };
            let opts = MapOptions {
                flip_flops: match flip_flops {
                    FfArg::Structural => FlipFlopStyle::Structural,
                    FfArg::Behavioral => FlipFlopStyle::Behavioral(edge),
                },
                ideal_routing,
                max_fan_in,
            };
            let s = synthesize(&spec, &opts).map_err(diag)?;
            emit(output.as_deref(), &serialize_fnl(&s.netlist))?;
            if let Some(r) = report {
                write(&r, &to_json(&s))?;
            }
        }
        Command::Flatten {
            fnl,
            depth,
            output,
            count,
        } => {
            require_inputs(&[&fnl])?;
            let n = load_netlist(&fnl)?;
            let flat = flatten(&n, &top_name(&n)?, depth.into()).map_err(diag)?;
            if count {
                let v = valve_count(&flat).map_err(diag)?;
                emit(output.as_deref(), &format!("{v}\n"))?;
            } else {
                emit(output.as_deref(), &serialize_fnl(&flat))?;
            }
        }
        Command::Sim {
            engine,
            fnl,
            stim,
            params,
            until,
            delay,
            output,
            csv,
            timing,
        } => {
            let mut inputs = vec![fnl.as_path(), stim.as_path()];
            inputs.extend(params.as_deref());
            require_inputs(&inputs)?;
            let n = load_netlist(&fnl)?;
            let s = parse_stim_named(&read(&stim)?, &stim.display().to_string()).map_err(parse_diag)?;
            let until = until
                .or(s.end_time)
                .ok_or_else(|| Failure::Usage("no end time: pass --until or add `end` to the stimulus".into()))?;
            match engine {
                Engine::Logic => {
                    let opts = SimOptions {
                        delays: Delays::uniform(delay),
                        ..SimOptions::default()
                    };
                    let trace = simulate(&n, &s, &opts, until).map_err(diag)?;
                    write(&output, &logic_vcd(&trace, &[]).map_err(diag)?)?;
                }
                Engine::Analog => {
                    let p = load_params(params.as_deref())?;
                    let run = run_analog(&n, &s, &p, until).map_err(diag)?;
                    write(&output, &analog_vcd(&run, &[]).map_err(diag)?)?;
                    if let Some(c) = csv {
                        write(&c, &analog_csv(&run.analog))?;
                    }
                    if let Some(t) = timing {
                        write(&t, &to_json(&timing_report(&run.analog, p.p_vac)))?;
                    }
                }
            }
        }
        Command::Demo {
            which: DemoName::Hexapod,
            mode,
            routing,
            cycles,
            period,
            params,
            output,
            report,
        } => {
            if let Some(p) = &params {
                require_inputs(&[p])?;
            }
            let mode = match mode {
                ModeArg::Behavioral => DemoMode::Behavioral,
                ModeArg::Structural => DemoMode::Structural,
                ModeArg::Analog => DemoMode::Analog,
            };
            let mut cfg = DemoConfig::walk_then_grasp(mode, cycles);
            if let Some(p) = period {
                let rise = p / 8;
                cfg.period = p;
                cfg.phase = p / 4;
                cfg.x = vec![(0, false), (rise, true), (rise + cycles * p, false)];
                cfg.until = rise + (cycles + 2) * p;
            }
            cfg.routing = match routing {
                RoutingArg::Ideal => Routing::Ideal,
                RoutingArg::Valved => Routing::Valved,
            };
            cfg.params = load_params(params.as_deref())?;
            let run = run_demo(&cfg).map_err(diag)?;
            let mut vars = vec!["CLK", "x", "Q", "Qbar"];
            vars.extend(LEGS);
            let vcd = match &run.analog {
                Some(analog) => {
                    let a = fluidic_core::analog::AnalogRun {
                        analog: analog.clone(),
                        logic: run.trace.clone(),
                        valve_events: Vec::new(),
                        timescale: cfg.timescale,
                    };
                    analog_vcd(&a, &vars)
                }
                None => logic_vcd(&run.trace, &vars),
            }
            .map_err(diag)?;
            write(&output, &vcd)?;
            if let Some(r) = report {
                write(&r, &to_json(&run.report))?;
            }
            let v = &run.report.violations;
            if !v.is_empty() {
                return Err(Failure::Diagnostics(
                    v.iter()
                        .map(|v| format!("gait violation {:?} over [{}, {})", v.kind, v.start, v.end))
                        .collect(),
                ));
            }
        }
        Command::Export {
            format,
            fnl,
            depth,
            output,
        } => {
            require_inputs(&[&fnl])?;
            let mut n = load_netlist(&fnl)?;
            if let Some(d) = depth {
                n = flatten(&n, &top_name(&n)?, d.into()).map_err(diag)?;
            }
            let text = match format {
                Format::Dot => write_dot(&n),
                Format::Json => to_json(&n),
            };
            emit(output.as_deref(), &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Diagnostics(lines)) => {
            for l in lines {
                eprintln!("{l}");
            }
            ExitCode::from(1)
        }
    }
}
