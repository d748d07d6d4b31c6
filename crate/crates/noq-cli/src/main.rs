//! `noq`: codebook generation, encoding resource tables, and variational
//! optimization runs driven by flat config files.
//!
//! Exit codes: 0 when the requested work succeeded (for `optimize`, when the
//! soft-cost target was reached on at least one seed), 1 when an optimization
//! ran but no seed reached the target, 2 on usage or config errors.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{CodebookSource, ProblemSource, RunConfig, BENCH_POLY8};
use noq::codebook::{optimize_codebook, platonic_codebook};
use noq::cost::{benchmark_poly8, resource_estimate, resource_estimate_values, EncodingReport};
use noq::optimizer::optimize;
use noq::{Codebook, OptimizerConfig, PolynomialCost, Problem, ValueMap};
use report::{BestSummary, RunSummary, SeedSummary};

/// Keeps the dense statevector under ~1 GiB.
const MAX_QUBITS: usize = 26;

#[derive(Parser)]
#[command(name = "noq", version, about = "Non-orthogonal qubit encodings: codebooks, resource estimates, and variational optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a codebook JSON file with geometry metrics.
    Codebook {
        /// States per qubit.
        #[arg(long)]
        p: usize,
        /// Source: platonic, optimized, or file.
        #[arg(long, default_value = "platonic")]
        mode: String,
        /// Codebook JSON to load for --mode file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// RNG seed for --mode optimized.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Descent restarts for --mode optimized.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print a CSV table comparing binary and p-state qubit counts.
    Estimate {
        /// Bit-variable count (bits mode; pair with --p).
        #[arg(long)]
        bits: Option<u64>,
        /// Variable count (values mode; pair with --values).
        #[arg(long)]
        n_vars: Option<u64>,
        /// Values per variable (values mode).
        #[arg(long)]
        values: Option<usize>,
        /// States per qubit (bits mode).
        #[arg(long)]
        p: Option<usize>,
        /// Sweep p over {2, 4, 6, 12, 20} across a bit range.
        #[arg(long)]
        sweep: bool,
        /// First bit count of the sweep.
        #[arg(long, default_value_t = 1)]
        bits_from: u64,
        /// Last bit count of the sweep (inclusive).
        #[arg(long, default_value_t = 512)]
        bits_to: u64,
        /// Sweep stride.
        #[arg(long, default_value_t = 1)]
        bits_step: u64,
        /// Also write estimate.csv under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the variational optimizer as described by a config file.
    Optimize {
        /// Flat key = value config file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Codebook {
            p,
            mode,
            file,
            seed,
            restarts,
            out,
        } => cmd_codebook(p, &mode, file.as_deref(), seed, restarts, &out),
        Command::Estimate {
            bits,
            n_vars,
            values,
            p,
            sweep,
            bits_from,
            bits_to,
            bits_step,
            out,
        } => cmd_estimate(EstimateArgs {
            bits,
            n_vars,
            values,
            p,
            sweep,
            bits_from,
            bits_to,
            bits_step,
            out,
        }),
        Command::Optimize { config, out } => cmd_optimize(&config, out),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_codebook_file(path: &Path) -> Result<Codebook> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Codebook::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_codebook(
    p: usize,
    mode: &str,
    file: Option<&Path>,
    seed: u64,
    restarts: usize,
    out: &Path,
) -> Result<ExitCode> {
    let cb = match mode {
        "platonic" => platonic_codebook(p)?,
        "optimized" => {
            let outcome = optimize_codebook(p, restarts, seed)?;
            if !outcome.converged {
                eprintln!(
                    "warning: descent did not reach gradient tolerance; \
                     emitting the best point set found"
                );
            }
            outcome.codebook
        }
        "file" => {
            let Some(path) = file else {
                bail!("--mode file requires --file");
            };
            let cb = load_codebook_file(path)?;
            if cb.p() != p {
                bail!("{} holds a p = {} codebook, --p says {p}", path.display(), cb.p());
            }
            cb
        }
        other => bail!("unknown mode {other:?}; expected platonic, optimized, or file"),
    };

    let out_file = out.join(format!("codebook_p{p}_{mode}.json"));
    let file = report::codebook_file(&cb);
    report::write_json(&out_file, &file)?;
    println!("wrote {}", out_file.display());
    println!("min pairwise angle: {} rad", file.metrics.min_pairwise_angle);
    println!("riesz energy: {}", file.metrics.riesz_energy);
    println!("balance norm: {}", file.metrics.balance_norm);
    Ok(ExitCode::SUCCESS)
}

struct EstimateArgs {
    bits: Option<u64>,
    n_vars: Option<u64>,
    values: Option<usize>,
    p: Option<usize>,
    sweep: bool,
    bits_from: u64,
    bits_to: u64,
    bits_step: u64,
    out: Option<PathBuf>,
}

const SWEEP_PS: [usize; 5] = [2, 4, 6, 12, 20];

fn cmd_estimate(args: EstimateArgs) -> Result<ExitCode> {
    let modes = args.bits.is_some() as u8 + args.n_vars.is_some() as u8 + args.sweep as u8;
    if modes != 1 {
        bail!("choose exactly one of --bits, --n-vars, or --sweep");
    }

    let mut rows: Vec<EncodingReport> = Vec::new();
    if args.sweep {
        if args.p.is_some() || args.values.is_some() {
            bail!("--sweep uses the fixed p set {SWEEP_PS:?}; drop --p/--values");
        }
        if args.bits_step == 0 || args.bits_from == 0 || args.bits_from > args.bits_to {
            bail!("sweep needs 1 <= bits-from <= bits-to and a nonzero step");
        }
        for p in SWEEP_PS {
            let mut bits = args.bits_from;
            while bits <= args.bits_to {
                rows.push(resource_estimate(bits, p)?);
                bits += args.bits_step;
            }
        }
    } else if let Some(bits) = args.bits {
        let Some(p) = args.p else {
            bail!("--bits needs --p");
        };
        if args.values.is_some() {
            bail!("--values belongs to --n-vars mode");
        }
        rows.push(resource_estimate(bits, p)?);
    } else {
        let n_vars = args.n_vars.expect("mode count checked above");
        let Some(values) = args.values else {
            bail!("--n-vars needs --values");
        };
        if let Some(p) = args.p {
            if p != values {
                bail!("in values mode each variable takes one p-state qubit, so --p must equal --values (got {p} vs {values})");
            }
        }
        rows.push(resource_estimate_values(n_vars, values)?);
    }

    let csv = report::estimate_csv(&rows);
    print!("{csv}");
    if let Some(dir) = args.out {
        let path = dir.join("estimate.csv");
        report::write_text(&path, &csv)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn build_problem(run: &RunConfig) -> Result<(Problem, String)> {
    let (cost, vm, name) = match &run.problem {
        ProblemSource::Builtin => {
            let (cost, vm) = benchmark_poly8();
            (cost, vm, BENCH_POLY8.to_string())
        }
        ProblemSource::File(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cost = PolynomialCost::parse(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            if let Some(n_vars) = run.n_vars {
                cost = cost.widen(n_vars)?;
            }
            let values = run.values.clone().expect("config validation requires values");
            let vm = ValueMap::new(values)?;
            (cost, vm, path.display().to_string())
        }
    };

    if cost.n_vars() > MAX_QUBITS {
        bail!(
            "{} variables means a 2^{} statevector; the dense simulator is capped at {MAX_QUBITS} qubits",
            cost.n_vars(),
            cost.n_vars()
        );
    }

    let p = vm.len();
    let codebook = match &run.codebook {
        CodebookSource::Platonic => platonic_codebook(p)?,
        CodebookSource::Optimized { seed, restarts } => {
            let outcome = optimize_codebook(p, *restarts, *seed)?;
            if !outcome.converged {
                eprintln!("warning: codebook descent did not reach tolerance; using best found");
            }
            outcome.codebook
        }
        CodebookSource::File(path) => {
            let cb = load_codebook_file(path)?;
            if cb.p() != p {
                bail!(
                    "{} holds a p = {} codebook but the value map has {p} entries",
                    path.display(),
                    cb.p()
                );
            }
            cb
        }
    };

    let circuit = noq::CircuitSpec::standard(cost.n_vars(), run.layers);
    Ok((Problem::new(circuit, codebook, vm, cost)?, name))
}

fn better(a: &BestSummary, b: &BestSummary) -> bool {
    a.hard_cost
        .total_cmp(&b.hard_cost)
        .then(a.soft_cost.total_cmp(&b.soft_cost))
        .is_lt()
}

fn cmd_optimize(config_path: &Path, out_override: Option<PathBuf>) -> Result<ExitCode> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let base_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let mut run = RunConfig::parse(&text, base_dir)?;
    if let Some(out) = out_override {
        run.out = out;
    }

    let (problem, problem_name) = build_problem(&run)?;
    fs::create_dir_all(&run.out)
        .with_context(|| format!("creating output directory {}", run.out.display()))?;

    let mut seeds = Vec::with_capacity(run.seeds.len());
    let mut best: Option<BestSummary> = None;
    let mut any_reached = false;
    for &seed in &run.seeds {
        let opt_config = OptimizerConfig {
            learning_rate: run.learning_rate,
            beta1: run.beta1,
            beta2: run.beta2,
            epsilon: run.epsilon,
            max_epochs: run.max_epochs,
            target_cost: run.target_cost,
            gradient_mode: run.gradient_mode,
            fd_step: run.fd_step,
            seed,
            shots: run.shots,
        };
        let result = optimize(&problem, &opt_config)?;

        let trace_file = format!("trace_seed{seed}.csv");
        report::write_text(&run.out.join(&trace_file), &report::trace_csv(&result.trace))?;

        let flag = match (&result.aborted, result.target_reached) {
            (Some(err), _) => format!(", aborted: {err}"),
            (None, true) => ", target reached".to_string(),
            (None, false) => String::new(),
        };
        println!(
            "seed {seed}: {} epochs, best soft {}, best hard {}{flag}",
            result.epochs_run, result.best_soft_cost, result.best_hard_cost
        );

        any_reached |= result.target_reached;
        let candidate = BestSummary {
            seed,
            hard_cost: result.best_hard_cost,
            soft_cost: result.best_soft_cost,
            epochs_used: result.epochs_run,
            labels: result.best_configuration.labels().to_vec(),
            values: result
                .best_configuration
                .values()
                .map(<[f64]>::to_vec)
                .unwrap_or_default(),
        };
        if best.as_ref().map_or(true, |b| better(&candidate, b)) {
            best = Some(candidate);
        }
        seeds.push(SeedSummary {
            seed,
            best_hard_cost: result.best_hard_cost,
            best_soft_cost: result.best_soft_cost,
            epochs_run: result.epochs_run,
            target_reached: result.target_reached,
            aborted: result.aborted.map(|e| e.to_string()),
            trace_file,
        });
    }

    let summary = RunSummary {
        problem: problem_name,
        n_vars: problem.cost.n_vars(),
        p: problem.codebook.p(),
        layers: run.layers,
        gradient_mode: run.gradient_mode.to_string(),
        shots: run.shots,
        target_cost: run.target_cost,
        target_reached: any_reached,
        best: best.expect("the seed list is never empty"),
        seeds,
    };
    let summary_path = run.out.join("summary.json");
    report::write_json(&summary_path, &summary)?;
    println!(
        "wrote {} ({} seeds, target {})",
        summary_path.display(),
        summary.seeds.len(),
        if any_reached { "reached" } else { "not reached" }
    );
    Ok(if any_reached {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
