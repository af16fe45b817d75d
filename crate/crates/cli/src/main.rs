//! `mse`: population size estimation from overlapping lists.

mod commands;
mod svg;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use mse_core::tables::{builtin, ListSystem};
use mse_core::MseError;

#[derive(Debug, Parser)]
#[command(name = "mse", version, about = "Multiple systems estimation with Poisson log-linear models")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Built-in dataset name or path to a CSV of list indicators plus `count`.
    #[arg(long, global = true)]
    pub data: Option<String>,
    /// CSV rows are individual cases; repeated patterns are summed.
    #[arg(long, global = true)]
    pub aggregate: bool,
    /// Merge lists, e.g. `PF+NCA=PFNCA`. Repeatable; applied in order with --omit.
    #[arg(long, global = true, action = ArgAction::Append, value_name = "A+B=C")]
    pub consolidate: Vec<String>,
    /// Drop a list. Repeatable.
    #[arg(long, global = true, action = ArgAction::Append, value_name = "LIST")]
    pub omit: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 20_190_101)]
    pub seed: u64,
    /// Worker threads for search and chains.
    #[arg(long, global = true, env = "MSE_THREADS")]
    pub threads: Option<usize>,
    /// Exit with status 4 when the run produced warnings.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and report profile-likelihood intervals.
    Fit(commands::FitArgs),
    /// Forward stepwise AIC selection.
    Stepwise(commands::StepwiseArgs),
    /// Fit every subset of pairwise interactions.
    Search(commands::SearchArgs),
    /// Bayesian fit with thresholding of interactions.
    Bayes(commands::BayesArgs),
    /// Identifiability and existence checks.
    Check(commands::CheckArgs),
    /// List built-in datasets or print/export the selected one.
    Data(commands::DataArgs),
}

/// A list transform, in command-line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    Consolidate { group: Vec<String>, name: String },
    Omit(String),
}

impl Transform {
    pub fn parse_consolidate(text: &str) -> Result<Self, MseError> {
        let (lhs, name) = text
            .split_once('=')
            .ok_or_else(|| MseError::InvalidArgument(format!("`{text}`: expected A+B=NAME")))?;
        let group: Vec<String> = lhs.split('+').map(|s| s.trim().to_string()).collect();
        if group.iter().any(String::is_empty) || name.trim().is_empty() {
            return Err(MseError::InvalidArgument(format!("`{text}`: expected A+B=NAME")));
        }
        Ok(Transform::Consolidate {
            group,
            name: name.trim().to_string(),
        })
    }

    pub fn apply(&self, system: &ListSystem) -> Result<ListSystem, MseError> {
        match self {
            Transform::Consolidate { group, name } => {
                let refs: Vec<&str> = group.iter().map(String::as_str).collect();
                system.consolidate(&refs, name)
            }
            Transform::Omit(list) => system.omit_list(list),
        }
    }
}

/// Everything a command needs besides its own options.
pub struct Context {
    pub global: Global,
    pub dataset: String,
    pub system: ListSystem,
    pub transforms: Vec<Transform>,
    pub warnings: Vec<String>,
}

impl Context {
    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn emit(&self, text: &str) -> Result<(), MseError> {
        emit(&self.global, text)
    }
}

pub fn emit(global: &Global, text: &str) -> Result<(), MseError> {
    match &global.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn load_system(data: &str, aggregate: bool) -> Result<ListSystem, MseError> {
    match builtin(data) {
        Ok(s) => Ok(s),
        Err(MseError::UnknownDataset(_)) if std::path::Path::new(data).exists() => ListSystem::load_csv(data, aggregate),
        Err(e) => Err(e),
    }
}

/// Transforms in the order they appeared, across both flags.
fn ordered_transforms(matches: &clap::ArgMatches, global: &Global) -> Result<Vec<Transform>, MseError> {
    let sub = matches.subcommand().map(|(_, m)| m);
    let indices = |id: &str| -> Vec<usize> {
        sub.and_then(|m| m.indices_of(id))
            .or_else(|| matches.indices_of(id))
            .map(|i| i.collect())
            .unwrap_or_default()
    };
    let mut keyed: Vec<(usize, Transform)> = Vec::new();
    for (i, text) in indices("consolidate").into_iter().zip(&global.consolidate) {
        keyed.push((i, Transform::parse_consolidate(text)?));
    }
    for (i, list) in indices("omit").into_iter().zip(&global.omit) {
        keyed.push((i, Transform::Omit(list.clone())));
    }
    keyed.sort_by_key(|(i, _)| *i);
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

fn exit_code(err: &MseError) -> u8 {
    match err {
        MseError::InvalidArgument(_) => 1,
        e if e.is_data_error() => 2,
        MseError::TooManyLists { .. } => 2,
        _ => 3,
    }
}

fn run(matches: clap::ArgMatches) -> Result<u8, MseError> {
    let cli = Cli::from_arg_matches(&matches).map_err(|e| MseError::InvalidArgument(e.to_string()))?;
    if let Some(n) = cli.global.threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let transforms = ordered_transforms(&matches, &cli.global)?;
    if let Command::Data(args) = &cli.command {
        if args.list {
            commands::list_builtins(&cli.global)?;
            return Ok(0);
        }
    }
    let dataset = cli
        .global
        .data
        .clone()
        .ok_or_else(|| MseError::InvalidArgument("--data is required".into()))?;
    let mut system = load_system(&dataset, cli.global.aggregate)?;
    for t in &transforms {
        system = t.apply(&system)?;
    }
    let mut ctx = Context {
        global: cli.global,
        dataset,
        system,
        transforms,
        warnings: Vec::new(),
    };
    match &cli.command {
        Command::Fit(a) => commands::fit(&mut ctx, a)?,
        Command::Stepwise(a) => commands::stepwise(&mut ctx, a)?,
        Command::Search(a) => commands::search(&mut ctx, a)?,
        Command::Bayes(a) => commands::bayes(&mut ctx, a)?,
        Command::Check(a) => commands::check(&mut ctx, a)?,
        Command::Data(a) => commands::data(&mut ctx, a)?,
    }
    Ok(if ctx.global.strict && !ctx.warnings.is_empty() { 4 } else { 0 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(matches) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consolidate_syntax() {
        assert_eq!(
            Transform::parse_consolidate("PF+NCA=PFNCA").unwrap(),
            Transform::Consolidate {
                group: vec!["PF".into(), "NCA".into()],
                name: "PFNCA".into()
            }
        );
        assert!(Transform::parse_consolidate("PF+NCA").is_err());
        assert!(Transform::parse_consolidate("PF+=X").is_err());
    }

    #[test]
    fn transforms_keep_command_line_order() {
        let argv = ["mse", "data", "--data", "uk6", "--omit", "GP", "--consolidate", "PF+NCA=PFNCA", "--omit", "GO"];
        let m = Cli::command().try_get_matches_from(argv).unwrap();
        let cli = Cli::from_arg_matches(&m).unwrap();
        let t = ordered_transforms(&m, &cli.global).unwrap();
        assert_eq!(t[0], Transform::Omit("GP".into()));
        assert!(matches!(t[1], Transform::Consolidate { .. }));
        assert_eq!(t[2], Transform::Omit("GO".into()));
    }
}
