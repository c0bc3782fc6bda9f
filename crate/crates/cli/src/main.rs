use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Arg, ArgMatches, Command};
use log::{error, info};

use warped_limit_lab::{
    exit_code, run, Experiment, ExperimentConfig, UsageError, EXIT_ASSERTION, EXIT_PASS, EXIT_USAGE,
};

const GLOBAL_FLAGS: [(&str, &str); 5] = [
    ("alpha", "decay exponent of the circle warping function"),
    ("p", "sphere dimension, or 'auto' for the curvature threshold"),
    ("jobs", "worker threads (0 = all cores)"),
    ("out-dir", "directory for CSV/JSON artifacts"),
    ("seed", "seed for sampled experiments"),
];

fn cli() -> Command {
    let mut cmd = Command::new("warped-limit-lab")
        .about("Numerical experiments on a doubly warped product with collapsing circle factor")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("flat key = value config file; flags override it"),
        );
    for (name, help) in GLOBAL_FLAGS {
        cmd = cmd.arg(Arg::new(name).long(name).global(true).value_name("VALUE").help(help));
    }
    cmd = cmd.subcommand(Command::new("run").about("run the experiment named in --config"));
    for exp in Experiment::ALL {
        let mut sub = Command::new(exp.name());
        for key in exp.keys() {
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE"));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(matches: &ArgMatches) -> anyhow::Result<ExperimentConfig> {
    let (name, sub) = matches.subcommand().context("missing subcommand")?;
    let experiment = match name {
        "run" => None,
        other => Some(other.parse::<Experiment>()?),
    };
    let mut overrides = Vec::new();
    let mut keys: Vec<&str> = GLOBAL_FLAGS.iter().map(|(k, _)| *k).collect();
    if let Some(exp) = experiment {
        keys.extend(exp.keys());
    }
    for key in keys {
        if let Some(v) = sub.get_one::<String>(key) {
            overrides.push((key.to_string(), v.clone()));
        }
    }
    let config = sub.get_one::<PathBuf>("config");
    ExperimentConfig::resolve(experiment, config.map(PathBuf::as_path), &overrides)
}

fn execute(matches: &ArgMatches) -> anyhow::Result<bool> {
    let cfg = resolve(matches)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build_global()
        .map_err(|e| UsageError(format!("cannot size worker pool: {e}")))?;
    info!("running {} with alpha = {}, p = {}", cfg.experiment, cfg.alpha, cfg.resolved_p());
    let outcome = run(&cfg)?;
    for file in &outcome.files {
        info!("wrote {}", file.display());
    }
    println!(
        "{}: {} ({})",
        outcome.summary.experiment,
        if outcome.summary.pass { "PASS" } else { "FAIL" },
        cfg.out_dir.join("summary.json").display()
    );
    Ok(outcome.summary.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    match execute(&matches) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
