//! `bwk`: run experiments, sweep parameters, tabulate guarantee curves and
//! inspect traces from the command line.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bwk_core::benchmark::opt_fd;
use bwk_core::bounds::{curve_sweep, thm2_alpha, unit_grid, write_bounds_csv};
use bwk_core::env::{measure_stationarity, read_trace_csv, worst_case_variation, EnvironmentTrace, Realization};
use bwk_core::harness::{run_experiment, summarize, write_runs_csv, ConfigMap, ExperimentConfig, RunRecord};
use bwk_core::BwkError;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bwk", version, about = "Bandits with knapsacks simulation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its runs CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to the config's `out` key, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat an experiment over an evenly spaced range of one config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the guarantee curves over a sigma_r grid.
    Bounds {
        #[arg(long)]
        rho: f64,
        #[arg(long = "sigma-c")]
        sigma_c: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Number of sigma_r points in [0, 1].
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best fixed distribution in hindsight for a trace CSV.
    Opt {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        budget: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationarity report for a trace CSV.
    Check {
        #[arg(long)]
        trace: PathBuf,
    },
}

/// Keys whose values are integers; swept values are rounded for them.
const INTEGER_KEYS: &[&str] = &["T", "period", "window", "seeds", "master_seed", "t_res", "outcome"];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.downcast_ref::<UsageError>().is_some()) {
        return 1;
    }
    match err.downcast_ref::<BwkError>() {
        Some(e) if e.is_user_error() => 1,
        _ => 2,
    }
}

/// Bad command-line input detected outside the library.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out } => run(&config, out),
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            out,
        } => sweep(&config, &param, from, to, steps, out),
        Command::Bounds {
            rho,
            sigma_c,
            d,
            grid,
            out,
        } => {
            if grid == 0 {
                return Err(usage("--grid must be at least 1"));
            }
            let points = curve_sweep(rho, sigma_c, d, &unit_grid(grid))?;
            write_bounds_csv(&points, sink(out.as_deref())?)?;
            Ok(())
        }
        Command::Opt { trace, budget, out } => opt(&trace, budget, out),
        Command::Check { trace } => check(&trace),
    }
}

fn read_config(path: &Path) -> Result<ConfigMap> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config `{}`: {e}", path.display())))?;
    Ok(ConfigMap::parse(&text)?)
}

fn load_trace(path: &Path, budget: f64) -> Result<EnvironmentTrace> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open trace `{}`: {e}", path.display())))?;
    Ok(read_trace_csv(BufReader::new(file), budget, Realization::Deterministic)?)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create `{}`", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Ratio threshold for the summary line: `thm2_alpha` minus 0.05.
fn report(label: &str, records: &[RunRecord]) -> Result<()> {
    let first = &records[0];
    let threshold = thm2_alpha(first.rho, first.sigma_r_declared, first.sigma_c_declared) - 0.05;
    let s = summarize(records, threshold)?;
    let flagged = records.iter().filter(|r| !r.stationarity_ok || !r.ratio_ok).count();
    let over_budget = records.iter().filter(|r| !r.within_budget()).count();
    eprintln!(
        "{label}runs {} mean {:.4} sd {:.4} min {:.4} q05 {:.4} median {:.4} q95 {:.4} max {:.4} \
         | ratio >= {:.4}: {:.2} | flagged {flagged} | over budget {over_budget}",
        s.count, s.mean, s.stdev, s.min, s.q05, s.median, s.q95, s.max, s.threshold, s.fraction_meeting
    );
    Ok(())
}

fn run(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ExperimentConfig::from_map(&read_config(config)?)?;
    let records = run_experiment(&cfg)?;
    report("", &records)?;
    let target = out.or_else(|| cfg.out.clone());
    write_runs_csv(&records, sink(target.as_deref())?)?;
    Ok(())
}

fn sweep_values(param: &str, from: f64, to: f64, steps: usize) -> Result<Vec<String>> {
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(usage("--from and --to must be finite"));
    }
    Ok((0..steps)
        .map(|j| {
            let v = if steps == 1 {
                from
            } else {
                from + (to - from) * j as f64 / (steps - 1) as f64
            };
            if INTEGER_KEYS.contains(&param) {
                format!("{}", v.round() as i64)
            } else {
                format!("{}", (v * 1e12).round() / 1e12)
            }
        })
        .collect())
}

fn sweep(config: &Path, param: &str, from: f64, to: f64, steps: usize, out: Option<PathBuf>) -> Result<()> {
    let base = read_config(config)?;
    if matches!(param, "env" | "algorithm" | "feedback" | "realization" | "trace" | "out" | "seed_list") {
        bail!(usage(format!("`{param}` is not a numeric key")));
    }
    let mut all = Vec::new();
    for value in sweep_values(param, from, to, steps)? {
        let mut map = base.clone();
        map.set(param, value.clone());
        let cfg = ExperimentConfig::from_map(&map)?;
        let records = run_experiment(&cfg)?;
        report(&format!("{param} = {value}: "), &records)?;
        all.extend(records);
    }
    for (i, r) in all.iter_mut().enumerate() {
        r.run_id = i;
    }
    write_runs_csv(&all, sink(out.as_deref())?)?;
    Ok(())
}

fn opt(trace: &Path, budget: f64, out: Option<PathBuf>) -> Result<()> {
    let trace = load_trace(trace, budget)?;
    let sol = opt_fd(&trace, budget)?;
    let mut w = sink(out.as_deref())?;
    let probs: Vec<String> = (0..sol.dist.len()).map(|a| format!("p_{a}")).collect();
    writeln!(w, "T_star,value,x,{}", probs.join(","))?;
    let values: Vec<String> = sol.dist.iter().map(|p| p.to_string()).collect();
    writeln!(w, "{},{},{},{}", sol.t_star, sol.value, sol.x, values.join(","))?;
    w.flush()?;
    Ok(())
}

fn check(trace: &Path) -> Result<()> {
    let trace = load_trace(trace, 0.0)?;
    let dims = trace.dims();
    let sigma = measure_stationarity(&trace);
    let mut w = io::stdout().lock();
    writeln!(w, "T,K,d,sigma_r,sigma_c,E_max")?;
    writeln!(
        w,
        "{},{},{},{},{},{}",
        dims.horizon,
        dims.actions,
        dims.resources,
        sigma.sigma_r,
        sigma.sigma_c,
        worst_case_variation(&trace)
    )?;
    Ok(())
}
