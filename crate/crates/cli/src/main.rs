//! `fjlab`: simulate FJ opinion dynamics on random graphs, evaluate the
//! concentration bounds and run the Monte-Carlo sweeps.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use commands::Command;
use config::{parse_assignment, read_config_file, Layer, Preset, RunConfig, Source};
use error::CliError;
use output::Run;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    #[value(name = "paper-fig1")]
    Fig1,
    #[value(name = "paper-fig2")]
    Fig2,
    #[value(name = "paper-fig3")]
    Fig3,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Fig1 => Preset::Fig1,
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig3 => Preset::Fig3,
        }
    }
}

/// Precedence, lowest first: built-in defaults, preset, config file,
/// environment, command-line flags.
#[derive(Debug, Parser)]
#[command(name = "fjlab", version, about)]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for tables, effective.conf and manifest.json.
    #[arg(long, global = true, default_value = "fjlab-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "FJLAB_THREADS")]
    threads: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    theta: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    /// Set any config key, e.g. `--set p_sr=0.4`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,
    /// Reduced preset sizes (the default).
    #[arg(long, global = true, conflicts_with = "paper_scale")]
    desk: bool,
    /// Full preset sizes and trial counts.
    #[arg(long, global = true)]
    paper_scale: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Sample one graph and compute the limiting opinions both ways.
    Simulate,
    /// Evaluate the distance bounds for one configuration.
    Bounds,
    /// Run a Monte-Carlo sweep.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCmd,
    },
    /// Compare empirical tail frequencies with their bounds.
    Validate,
    /// List the config keys.
    Keys,
}

#[derive(Debug, Subcommand)]
enum ExperimentCmd {
    /// Distance against network size.
    Scaling,
    /// Distance over a grid of link probabilities.
    DegreeSweep,
    /// Distance against the stubbornness level.
    StubbornnessSweep,
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::Simulate => Command::Simulate,
            Cmd::Bounds => Command::Bounds,
            Cmd::Experiment { kind } => match kind {
                ExperimentCmd::Scaling => Command::Scaling,
                ExperimentCmd::DegreeSweep => Command::DegreeSweep,
                ExperimentCmd::StubbornnessSweep => Command::StubbornnessSweep,
            },
            Cmd::Validate | Cmd::Keys => Command::Validate,
        }
    }
}

fn from_env(matches: &ArgMatches, id: &str) -> bool {
    let src = match matches.subcommand() {
        Some((_, sub)) if sub.value_source(id).is_some() => from_env_sub(sub, id),
        _ => matches.value_source(id),
    };
    src == Some(ValueSource::EnvVariable)
}

fn from_env_sub(m: &ArgMatches, id: &str) -> Option<ValueSource> {
    match m.subcommand() {
        Some((_, sub)) if sub.value_source(id).is_some() => from_env_sub(sub, id),
        _ => m.value_source(id),
    }
}

fn layers(cli: &Cli, matches: &ArgMatches) -> Result<Vec<Layer>, CliError> {
    let mut out = Vec::new();
    if let Some(p) = cli.preset {
        out.push(Preset::from(p).layer(cli.paper_scale));
    }
    if let Some(path) = &cli.config {
        out.push(read_config_file(path)?);
    }
    let threads_env = from_env(matches, "threads");
    if threads_env {
        if let Some(t) = &cli.threads {
            out.push(Layer::new(Source::Env).set("threads", t.clone()));
        }
    }
    let mut flags = Layer::new(Source::Flag);
    for (k, v) in [
        ("seed", &cli.seed),
        ("trials", &cli.trials),
        ("theta", &cli.theta),
        ("n", &cli.n),
    ] {
        if let Some(v) = v {
            flags = flags.set(k, v.clone());
        }
    }
    if !threads_env {
        if let Some(t) = &cli.threads {
            flags = flags.set("threads", t.clone());
        }
    }
    for (k, v) in &cli.set {
        flags = flags.set(k, v.clone());
    }
    out.push(flags);
    Ok(out)
}

fn run(cli: Cli, matches: &ArgMatches) -> Result<(), CliError> {
    if let Cmd::Keys = cli.command {
        for (k, help) in config::known_keys() {
            println!("{k:<16}{help}");
        }
        return Ok(());
    }
    let cmd = cli.command.command();
    if let Some(p) = cli.preset {
        let p = Preset::from(p);
        if !cmd.preset_compatible(p) {
            return Err(CliError::config(format!(
                "preset {} does not apply to `{}`",
                p.name(),
                cmd.name()
            )));
        }
    }
    let mut cfg = RunConfig::resolve(&layers(&cli, matches)?)?;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    cfg.materialize("threads", cores.to_string())?;
    commands::prepare(cmd, &mut cfg)?;
    let threads = cfg.usize("threads")?;
    // Fails only if a pool already exists, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    let mut extra = Map::new();
    extra.insert("out".into(), Value::String(cli.out.display().to_string()));
    extra.insert(
        "preset".into(),
        cli.preset.map_or(Value::Null, |p| {
            Value::String(Preset::from(p).name().into())
        }),
    );
    extra.insert(
        "scale".into(),
        Value::String(if cli.paper_scale { "paper" } else { "desk" }.into()),
    );
    let mut out = Run::begin(&cli.out, cmd.name(), &cfg, extra)?;
    match commands::execute(cmd, &cfg, &mut out) {
        Ok(results) => {
            println!("outputs in {}", out.dir().display());
            out.finish(results)
        }
        Err(e) => {
            out.fail(&e);
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fjlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
