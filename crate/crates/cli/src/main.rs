use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crossnav::config::{parse_config, parse_config_with, section_of, ConfigError, ParsedConfig, Scenario};
use crossnav::scenarios::{run, RunError};
use crossnav_core::numfmt::format_number;

#[derive(Parser)]
#[command(name = "crossnav", version, about = "Steer quantum systems through avoided crossings")]
struct Cli {
    /// Write outputs here instead of the configured `[output] dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Run a built-in scenario with optional overrides.
    Scenario {
        #[arg(value_parser = clap::value_parser!(Scenario))]
        name: Scenario,
        /// `key=value` or `section.key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Search for a protocol between two diabatic states.
    Search { config: PathBuf },
}

fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(ConfigError::Invalid(format!("cannot read {}: {e}", path.display()))))
}

/// Build config text for `scenario` from `--set` overrides.
fn overrides_to_text(scenario: Scenario, set: &[String]) -> Result<String, ConfigError> {
    let mut sections: Vec<(&str, Vec<String>)> = Vec::new();
    for item in set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects key=value, got `{item}`")))?;
        let key = key.trim();
        let (section, name) = match key.split_once('.') {
            Some((s, k)) => (s, k),
            None => (section_of(key).ok_or_else(|| ConfigError::Invalid(format!("unknown key `{key}`")))?, key),
        };
        let line = format!("{name} = {}", value.trim());
        match sections.iter_mut().find(|(s, _)| *s == section) {
            Some((_, lines)) => lines.push(line),
            None => sections.push((section, vec![line])),
        }
    }
    let mut text = format!("scenario = {scenario}\n");
    for (section, lines) in sections {
        text.push_str(&format!("[{section}]\n"));
        for line in lines {
            text.push_str(&line);
            text.push('\n');
        }
    }
    Ok(text)
}

fn load(command: &Command) -> Result<ParsedConfig, RunError> {
    Ok(match command {
        Command::Run { config } => parse_config(&read(config)?)?,
        Command::Scenario { name, set } => parse_config(&overrides_to_text(*name, set)?)?,
        Command::Search { config } => {
            let parsed = parse_config_with(&read(config)?, Some(Scenario::PathSearch))?;
            if parsed.spec.scenario != Scenario::PathSearch {
                return Err(ConfigError::Invalid(format!(
                    "`search` runs path-search configs, this one names {}",
                    parsed.spec.scenario
                ))
                .into());
            }
            parsed
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli.command).and_then(|parsed| run(&parsed, cli.out_dir.as_deref()));
    match result {
        Ok(summary) => {
            let o = &summary.outcome;
            let opt = |x: Option<f64>| x.map_or("n/a".into(), format_number);
            println!("output: {}", summary.dir.display());
            println!("final_fidelity: {}", opt(o.final_fidelity));
            println!("total_time: {}", opt(o.total_time));
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_group_by_section() {
        let text = overrides_to_text(Scenario::FourLevel, &["gamma0=1e-2".into(), "dt_max = 0.01".into(), "model.coupling=20".into()])
            .unwrap();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed.spec.gamma0, vec![1e-2]);
        assert_eq!(parsed.spec.dt_max, 0.01);
        assert_eq!(parsed.spec.coupling, 20.0);
    }

    #[test]
    fn unknown_override_is_a_config_error() {
        assert!(overrides_to_text(Scenario::Spectrum, &["nope=1".into()]).is_err());
        assert!(overrides_to_text(Scenario::Spectrum, &["nope".into()]).is_err());
    }
}
