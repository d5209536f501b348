mod config;
mod experiments;
mod report;
mod scan;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use config::ExperimentConfig;
use report::{csv_table, Report};

const EXIT_FAILED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;

#[derive(Parser)]
#[command(name = "weinstein", version, about = "Run Weinstein transform and Schrödinger–Weinstein experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Overrides the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: the configuration's `out`, else `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment a configuration names.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check a configuration against the schema without running it.
    Validate { config: PathBuf },
    /// Run one experiment per value of a swept setting.
    Scan {
        /// `key=start:step:end` or `key=v1,v2,...`; `alpha` and `d` address
        /// `params`, other keys are dotted paths such as `grid.radial_n`.
        #[arg(long)]
        param: String,
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    config::load(path).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(EXIT_SCHEMA)
    })
}

fn out_dir(cfg: &ExperimentConfig, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(format!("{:?}", cfg.experiment)))
}

fn summary(cfg: &ExperimentConfig, rep: &Report) -> serde_json::Value {
    json!({
        "experiment": cfg.experiment,
        "params": cfg.params,
        "config": cfg,
        "checks": rep.checks,
        "results": rep.results,
    })
}

fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, String> {
    let rep = experiments::run(cfg).map_err(|e| format!("{:?} failed: {e}", cfg.experiment))?;
    rep.write(dir, &summary(cfg, &rep))
        .map_err(|e| format!("cannot write report to {}: {e}", dir.display()))?;
    Ok(rep)
}

fn init_pool(workers: Option<usize>) {
    if let Some(n) = workers {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn cmd_run(path: &Path, common: &Common) -> ExitCode {
    let mut cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    init_pool(common.workers);
    let dir = out_dir(&cfg, &common.out);
    match execute(&cfg, &dir) {
        Ok(rep) => {
            for c in rep.failures() {
                eprintln!("check failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
            }
            if rep.passed() {
                println!("{:?}: {} checks passed; report in {}", cfg.experiment, rep.checks.len(), dir.display());
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn cmd_validate(path: &Path) -> ExitCode {
    match load(path) {
        Ok(cfg) => {
            println!("{}: valid {:?} configuration", path.display(), cfg.experiment);
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn cmd_scan(param: &str, path: &Path, common: &Common) -> ExitCode {
    let mut base = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(s) = common.seed {
        base.seed = s;
    }
    let sweep = match scan::parse_sweep(param) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    let mut runs = Vec::with_capacity(sweep.values.len());
    for (i, &v) in sweep.values.iter().enumerate() {
        match scan::with_param(&base, &sweep.key, v) {
            Ok(mut cfg) => {
                cfg.seed = scan::run_seed(base.seed, i);
                runs.push((i, v, cfg));
            }
            Err(msg) => {
                eprintln!("{}: {msg}", path.display());
                return ExitCode::from(EXIT_SCHEMA);
            }
        }
    }
    let root = out_dir(&base, &common.out);
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(EXIT_FAILED);
        }
    };
    let outcomes: Vec<_> = pool.install(|| {
        runs.par_iter()
            .map(|(i, v, cfg)| {
                let dir = root.join(format!("run_{i:03}"));
                (*i, *v, cfg.seed, execute(cfg, &dir))
            })
            .collect()
    });
    let mut all_pass = true;
    let mut rows = vec![];
    let mut entries = vec![];
    for (i, v, seed, out) in &outcomes {
        let (pass, failing, error) = match out {
            Ok(rep) => (rep.passed(), rep.failures().iter().map(|c| c.name.clone()).collect::<Vec<_>>(), None),
            Err(msg) => (false, vec![], Some(msg.clone())),
        };
        all_pass &= pass;
        if let Some(msg) = &error {
            eprintln!("run {i} ({}={v}): {msg}", sweep.key);
        }
        for name in &failing {
            eprintln!("run {i} ({}={v}): check failed: {name}", sweep.key);
        }
        rows.push(vec![i.to_string(), format!("{v}"), seed.to_string(), pass.to_string(), failing.join(";")]);
        entries.push(json!({"run": i, "value": v, "seed": seed, "pass": pass, "failing": failing, "error": error}));
    }
    let summary = json!({
        "experiment": base.experiment,
        "params": base.params,
        "config": base,
        "sweep": {"key": sweep.key, "values": sweep.values},
        "runs": entries,
    });
    let written = std::fs::create_dir_all(&root)
        .and_then(|_| std::fs::write(root.join("scan.json"), serde_json::to_string_pretty(&summary).unwrap_or_default() + "\n"))
        .and_then(|_| {
            std::fs::write(
                root.join("scan.csv"),
                csv_table(&["run", sweep.key.as_str(), "seed", "pass", "failing"], rows),
            )
        });
    if let Err(e) = written {
        eprintln!("cannot write scan summary: {e}");
        return ExitCode::from(EXIT_FAILED);
    }
    println!("{} runs, {} passed; summary in {}", outcomes.len(), outcomes.iter().filter(|o| o.3.as_ref().is_ok_and(|r| r.passed())).count(), root.display());
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, common } => cmd_run(config, common),
        Command::Validate { config } => cmd_validate(config),
        Command::Scan { param, config, common } => cmd_scan(param, config, common),
    }
}
