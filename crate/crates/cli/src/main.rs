use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinmeter_cli::config::{preset, PRESETS};
use spinmeter_cli::{execute, init_thread_pool, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "spinmeter", version, about = "Spin-orbit measurement experiments")]
struct Cli {
    /// Print an embedded preset and exit.
    #[arg(long, value_name = "NAME")]
    dump_preset: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a key, e.g. `--set params.delta_x=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run an embedded preset, writing into `--out`.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a regime sweep configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the embedded presets.
    Presets,
}

fn load_file(path: &PathBuf, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read `{}`: {e}", path.display())))?;
    ExperimentConfig::load(&text, overrides).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(name) = cli.dump_preset {
        print!("{}", preset(&name)?);
        return Ok(());
    }
    let cfg = match cli.command {
        None => return Err(CliError::config("no command given; see --help")),
        Some(Command::Presets) => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            return Ok(());
        }
        Some(Command::Run { config, overrides }) => load_file(&config, &overrides)?,
        Some(Command::Sweep { config, overrides }) => {
            let cfg = load_file(&config, &overrides)?;
            if cfg.experiment != Experiment::RegimeSweep {
                return Err(CliError::config(format!(
                    "`sweep` needs experiment = \"regime-sweep\", got \"{}\"",
                    cfg.experiment
                )));
            }
            cfg
        }
        Some(Command::Preset { name, out, overrides }) => {
            let mut all = vec![format!("output.dir={}", toml_string(&out))];
            all.extend(overrides);
            ExperimentConfig::load(preset(&name)?, &all)?
        }
    };
    init_thread_pool()?;
    for path in execute(&cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn toml_string(path: &PathBuf) -> String {
    toml::Value::String(path.display().to_string()).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinmeter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
