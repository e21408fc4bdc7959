use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use bkp_core::bench::{run_bench, to_csv, BenchCase};
use bkp_core::oracle::DEFAULT_LIMIT;
use bkp_core::{
    brute_force, generate, read_instance, solve, write_instance, BilevelSolution, BkpError,
    GenSpec, Instance, SolverParams,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Bilevel knapsack with interdiction constraints.
#[derive(Parser)]
#[command(name = "bkp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one generated instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10))]
        ins: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file to optimality.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate all leader strategies (n ≤ 20).
    Oracle {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Solve a directory of instances, or freshly generated ones, and write
    /// the CSV report.
    Bench {
        /// Directory of instance files. Without it, instances are generated
        /// from --n, --ins, --seed and --count.
        dir: Option<PathBuf>,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', default_value = "35")]
        n: Vec<usize>,
        /// Classes as a list (`1,4`) or a range (`1-10`).
        #[arg(long, default_value = "1-10")]
        ins: String,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds per (n, class).
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[command(flatten)]
        params: ParamArgs,
        /// Output file; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, env = "BKP_JOBS", default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Small,
    Large,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_enum, default_value = "small")]
    preset: Preset,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    gamma: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Turn off reduced-cost fixing.
    #[arg(long)]
    no_fixing: bool,
}

impl ParamArgs {
    fn build(&self) -> anyhow::Result<SolverParams> {
        let mut p = match self.preset {
            Preset::Small => SolverParams::small(),
            Preset::Large => SolverParams::large(),
        };
        let t = &mut p.tuples;
        t.alpha = self.alpha.unwrap_or(t.alpha);
        t.beta = self.beta.unwrap_or(t.beta);
        t.delta = self.delta.unwrap_or(t.delta);
        t.mu = self.mu.unwrap_or(t.mu);
        p.gamma = self.gamma.unwrap_or(p.gamma);
        p.fix_by_reduced_costs = !self.no_fixing;
        if let Some(secs) = self.time_limit {
            p.time_limit = Some(Duration::try_from_secs_f64(secs).context("invalid --time-limit")?);
        }
        Ok(p)
    }
}

/// Errors caused by the caller's input; they exit with status 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: anyhow::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| InputError(e).into())
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()));
    let text = input(text)?;
    input(read_instance(&text).with_context(|| format!("{}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { n, ins, seed, out } => {
            let spec = input(GenSpec::new(n, ins, seed).map_err(Into::into))?;
            let g = generate(&spec)?;
            fs::write(&out, write_instance(&g.instance))
                .with_context(|| format!("cannot write {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { path, params, json } => {
            let params = input(params.build())?;
            let inst = load(&path)?;
            let s = input(solve(&inst, &params).map_err(Into::into))?;
            if json {
                emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&solution_json(&s))?
                ))?;
            } else {
                emit(&solution_table(&s))?;
            }
            Ok(if s.optimal {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Oracle { path, json } => {
            let inst = load(&path)?;
            let r = match brute_force(&inst, DEFAULT_LIMIT) {
                Ok(r) => r,
                Err(e @ (BkpError::TooLarge { .. } | BkpError::IllPosed(_))) => {
                    return Err(InputError(e.into()).into())
                }
                Err(e) => return Err(e.into()),
            };
            if json {
                let report = json!({
                    "value": r.value,
                    "x": bits(&r.x),
                    "y": bits(&r.y),
                    "enumerated": r.enumerated,
                });
                emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            } else {
                emit(&format!(
                    "value       {}\ninterdicted {}\npacked      {}\nenumerated  {} leader vectors\n",
                    r.value,
                    items(&r.x),
                    items(&r.y),
                    r.enumerated
                ))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            dir,
            n,
            ins,
            seed,
            count,
            params,
            csv,
            jobs,
        } => {
            let params = input(params.build())?;
            let cases = match dir {
                Some(dir) => input(cases_from_dir(&dir))?,
                None => input(generated_cases(&n, &ins, seed, count))?,
            };
            let rows = run_bench(cases, &params, jobs)?;
            let table = to_csv(&rows);
            match csv {
                Some(path) => fs::write(&path, table)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => emit(&table)?,
            }
            for r in &rows {
                if let Some(e) = &r.error {
                    eprintln!("n={} ins={} seed={}: {e}", r.n, r.ins, r.seed);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn solution_json(s: &BilevelSolution) -> serde_json::Value {
    json!({
        "value": s.value,
        "optimal": s.optimal,
        "x": bits(&s.x),
        "y": bits(&s.y),
        "stats": s.stats,
    })
}

fn solution_table(s: &BilevelSolution) -> String {
    let lines = [
        format!("value              {}", s.value),
        format!(
            "proven optimal     {}",
            if s.optimal { "yes" } else { "no (time limit)" }
        ),
        format!("interdicted        {}", items(&s.x)),
        format!("packed             {}", items(&s.y)),
        format!("time               {:.3} s", s.stats.wall_time_secs),
        format!("step-2 subproblems {}", s.stats.step2_subproblems),
        format!("CRIT_2 solves      {}", s.stats.crit2_solves),
    ];
    lines.join("\n") + "\n"
}

/// Writes to standard output; a reader that went away is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn bits(v: &[bool]) -> Vec<u8> {
    v.iter().map(|&b| b as u8).collect()
}

/// 1-based indices of the set entries.
fn items(v: &[bool]) -> String {
    let list: Vec<String> = (0..v.len())
        .filter(|&i| v[i])
        .map(|i| (i + 1).to_string())
        .collect();
    if list.is_empty() {
        "-".into()
    } else {
        list.join(" ")
    }
}

fn parse_classes(text: &str) -> anyhow::Result<Vec<u32>> {
    let classes: Vec<u32> = if let Some((lo, hi)) = text.split_once('-') {
        let (lo, hi): (u32, u32) = (lo.trim().parse()?, hi.trim().parse()?);
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()?
    };
    if classes.is_empty() || classes.iter().any(|c| !(1..=10).contains(c)) {
        bail!("instance classes must lie in 1..=10, got {text:?}");
    }
    Ok(classes)
}

fn generated_cases(
    sizes: &[usize],
    ins: &str,
    seed: u64,
    count: u64,
) -> anyhow::Result<Vec<BenchCase>> {
    let classes = parse_classes(ins)?;
    let mut cases = Vec::new();
    for &n in sizes {
        for &class in &classes {
            for s in seed..seed + count {
                let spec = GenSpec::new(n, class, s)?;
                cases.push(BenchCase {
                    n,
                    ins: class,
                    seed: s,
                    label: spec.file_name(),
                    instance: generate(&spec)
                        .map(|g| g.instance)
                        .map_err(|e| e.to_string()),
                });
            }
        }
    }
    Ok(cases)
}

/// Every regular file in `dir` becomes a case. Names from `bkp generate`
/// supply the class and seed; other files get 0 for both.
fn cases_from_dir(dir: &Path) -> anyhow::Result<Vec<BenchCase>> {
    let entries =
        fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    let mut cases = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let label = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let instance = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| read_instance(&t).map_err(|e| e.to_string()));
        let spec = GenSpec::from_file_name(&label);
        cases.push(BenchCase {
            n: spec
                .map(|s| s.n)
                .or(instance.as_ref().ok().map(Instance::len))
                .unwrap_or(0),
            ins: spec.map_or(0, |s| s.ins),
            seed: spec.map_or(0, |s| s.seed),
            label,
            instance,
        });
    }
    Ok(cases)
}
