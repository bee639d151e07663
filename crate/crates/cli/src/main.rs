//! `rdepth`: regression depth queries and experiment drivers.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use regdepth::asymptotics::{self, ExperimentConfig, SGrid};
use regdepth::population::{self, rd_closed};
use regdepth::{dataset, depth, stats, DirectionBudget, FitResult, ObservationSet, ParamVector, PopulationModel, QuadConfig};

use report::{sig6, Report};

#[derive(Parser, Debug)]
#[command(name = "rdepth", version, about = "Regression depth, deepest fits and their asymptotics")]
struct Cli {
    /// Worker threads (falls back to RDEPTH_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DepthMethod {
    /// Directional form: min over unit v of #{r v'w >= 0} / n.
    Def21,
    /// Cut-count form over cut positions and orientations.
    Bh99,
    /// Sign-sum form n/2 + min sum sgn(r) sgn(v'w) / 2.
    Bh992,
    /// Dense angle-grid brute force.
    Oracle,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FitKind {
    Exact,
    Search,
}

#[derive(clap::Args, Debug, Clone)]
struct ExperimentArgs {
    /// normal, disk, cauchy or contaminated.
    #[arg(long, default_value = "normal")]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600,3200,6400")]
    n_grid: Vec<usize>,
    /// Direction grid size for population computations.
    #[arg(long, default_value_t = 256)]
    v_grid: usize,
    /// Output directory for the JSON report and CSV files.
    #[arg(long, default_value = "rdepth-out")]
    out: PathBuf,
}

impl ExperimentArgs {
    fn model(&self) -> Result<PopulationModel> {
        Ok(PopulationModel::from_name(&self.model)?)
    }

    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            n_grid: self.n_grid.clone(),
            reps: self.reps,
            master_seed: self.seed,
            quad: QuadConfig {
                v_grid: self.v_grid,
                seed: self.seed,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Depth of a candidate fit on a dataset.
    Depth {
        dataset: PathBuf,
        /// Comma-separated intercept and slopes.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta: Vec<f64>,
        #[arg(long, value_enum, default_value = "def21")]
        method: DepthMethod,
        /// Sampled directions when p >= 3.
        #[arg(long, default_value_t = depth::DEFAULT_DIRECTIONS)]
        dirs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a JSON report into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deepest fit of a dataset.
    Fit {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: FitKind,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Population depth of a fit under a model.
    Popdepth {
        #[arg(long, default_value = "normal")]
        model: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        v_grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a sample from a model and write it as CSV.
    Sample {
        #[arg(long, default_value = "normal")]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination CSV file.
        #[arg(long)]
        output: PathBuf,
    },
    /// Error of the deepest fit against sample size.
    Consistency(ExperimentArgs),
    /// Largest depth error over a grid of fits against sample size.
    Uniform(ExperimentArgs),
    /// Diagnostics for the assumptions behind the limit law.
    Assumptions(ExperimentArgs),
    /// Draws from the limiting distribution of the scaled deepest fit.
    Limit {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(long, default_value_t = 500)]
        draws: usize,
        /// Half-width of the argmax search box.
        #[arg(long, default_value_t = 8.0)]
        box_half_width: f64,
        #[arg(long, default_value_t = 81)]
        box_resolution: usize,
    },
    /// Scaled deepest fits sqrt(n) (beta_hat - beta_star) over replicates.
    Empirical {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(long, default_value_t = 2000)]
        n: usize,
    },
    /// Compare two sample clouds (CSV with header s1,s2,...).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_beta(values: &[f64]) -> Result<ParamVector> {
    Ok(ParamVector::new(values.to_vec())?)
}

fn load(path: &Path) -> Result<ObservationSet> {
    dataset::read_csv_file(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn print_fit(fit: &FitResult) {
    let beta: Vec<String> = fit.beta_hat.as_slice().iter().map(|&v| sig6(v)).collect();
    println!("beta_hat = ({})", beta.join(", "));
    println!("depth = {}", sig6(fit.depth.normalized));
    if fit.candidate_depth != fit.depth.normalized {
        println!("candidate_depth = {}", sig6(fit.candidate_depth));
    }
    println!("tie_set_size = {}", fit.tie_set_size);
    println!(
        "method = {}",
        match fit.method {
            regdepth::FitMethod::ExactP2 => "exact_p2",
            regdepth::FitMethod::Search => "search",
        }
    );
}

fn run(cli: Cli, invocation: Vec<String>) -> Result<()> {
    let threads = cli.threads.or_else(|| std::env::var("RDEPTH_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut report = Report::new(invocation);
    match cli.command {
        Command::Depth {
            dataset,
            beta,
            method,
            dirs,
            seed,
            out,
        } => {
            let set = load(&dataset)?;
            let beta = parse_beta(&beta)?;
            let budget = DirectionBudget { dirs, seed };
            let value = match method {
                DepthMethod::Def21 => regdepth::rd_normalized(&set, &beta, Some(budget))?,
                DepthMethod::Bh99 => {
                    if set.p() == 2 {
                        regdepth::rd_count_bh99(&set, &beta)?
                    } else {
                        report.warn("p >= 3: cut-count form evaluated on sampled directions");
                        depth::rd_count_bh99_sampled(&set, &beta, budget)?
                    }
                }
                DepthMethod::Bh992 => regdepth::rd_sign_bh992(&set, &beta, Some(budget))?,
                DepthMethod::Oracle => regdepth::rd_bruteforce_oracle(&set, &beta, 100_000)?,
            };
            let headline = match method {
                DepthMethod::Bh99 | DepthMethod::Bh992 => value.count.unwrap_or(value.normalized),
                _ => value.normalized,
            };
            println!("depth = {}", sig6(headline));
            println!("normalized = {}", sig6(value.normalized));
            if let Some(c) = value.count {
                println!("count = {}", sig6(c));
            }
            println!("exact = {}", value.exact);
            if let Some(w) = &value.witness_direction {
                if w.dim() == 2 {
                    println!("witness_angle = {}", sig6(w.angle()));
                }
            }
            if let Some(dir) = out {
                report.seed = Some(seed);
                report.config = json!({"dataset": dataset, "beta": beta, "method": format!("{method:?}").to_lowercase(), "dirs": dirs});
                report.results = serde_json::to_value(&value)?;
                write_file(&dir, "depth.json", &report.to_json("depth"))?;
            }
        }
        Command::Fit {
            dataset,
            method,
            restarts,
            seed,
            out,
        } => {
            let set = load(&dataset)?;
            let fit = match method {
                FitKind::Exact => regdepth::fit_exact_p2(&set)?,
                FitKind::Search => regdepth::fit_search(&set, restarts, seed)?,
            };
            print_fit(&fit);
            if let Some(dir) = out {
                report.seed = Some(seed);
                report.config = json!({"dataset": dataset, "method": format!("{method:?}").to_lowercase(), "restarts": restarts});
                report.results = serde_json::to_value(&fit)?;
                write_file(&dir, "fit.json", &report.to_json("fit"))?;
            }
        }
        Command::Popdepth {
            model,
            beta,
            seed,
            v_grid,
            out,
        } => {
            let model = PopulationModel::from_name(&model)?;
            let beta = parse_beta(&beta)?;
            let cfg = QuadConfig {
                v_grid,
                seed,
                ..Default::default()
            };
            let numeric = population::rd_population_numeric(&model, &beta, &cfg)?;
            let closed = rd_closed(&model, &beta).ok();
            println!("depth = {}", sig6(numeric));
            if let Some(c) = closed {
                println!("closed_form = {}", sig6(c));
            }
            if let Some(dir) = out {
                report.seed = Some(seed);
                report.config = json!({"model": model, "beta": beta, "quad": cfg});
                report.results = json!({"numeric": numeric, "closed_form": closed});
                write_file(&dir, "popdepth.json", &report.to_json("popdepth"))?;
            }
        }
        Command::Sample {
            model,
            n,
            seed,
            output,
        } => {
            let model = PopulationModel::from_name(&model)?;
            let set = population::sample(&model, n, seed)?;
            if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            dataset::write_csv_file(&set, &output)?;
            println!("wrote {} observations to {}", set.len(), output.display());
        }
        Command::Consistency(args) => {
            let model = args.model()?;
            let cfg = args.config();
            let rep = asymptotics::run_consistency(&model, &cfg)?;
            for row in &rep.rows {
                if row.fit_failures > 0 {
                    report.warn(&format!("n = {}: {} fits failed", row.n, row.fit_failures));
                }
            }
            report.seed = Some(args.seed);
            report.config = serde_json::to_value(&cfg)?;
            report.results = serde_json::to_value(&rep)?;
            write_file(&args.out, "consistency.json", &report.to_json("consistency"))?;
            write_file(&args.out, "consistency_loglog.csv", &rep.loglog_csv())?;
            write_file(&args.out, "consistency_replicates.csv", &rep.replicates_csv())?;
            println!(
                "loglog_slope = {} (stderr {})",
                sig6(rep.loglog_slope),
                sig6(rep.slope_stderr)
            );
        }
        Command::Uniform(args) => {
            let model = args.model()?;
            let cfg = args.config();
            let rep = asymptotics::run_uniform_convergence(&model, &cfg)?;
            report.seed = Some(args.seed);
            report.config = serde_json::to_value(&cfg)?;
            report.results = serde_json::to_value(&rep)?;
            write_file(&args.out, "uniform.json", &report.to_json("uniform"))?;
            write_file(&args.out, "uniform_replicates.csv", &rep.replicates_csv())?;
            let meds: Vec<String> = rep.rows.iter().map(|r| sig6(r.median_sup_error)).collect();
            println!("median_sup_error = [{}]", meds.join(", "));
        }
        Command::Assumptions(args) => {
            let model = args.model()?;
            let cfg = args.config();
            let ing = population::compute_limit_ingredients(&model, &cfg.quad, cfg.fd_step)?;
            let rep = asymptotics::check_assumptions(&model, &ing, &cfg)?;
            report.seed = Some(args.seed);
            report.config = serde_json::to_value(&cfg)?;
            report.results = serde_json::to_value(&rep)?;
            write_file(&args.out, "assumptions.json", &report.to_json("assumptions"))?;
            write_file(&args.out, "ingredients.json", &ing.to_json())?;
            println!(
                "a2_spread = {}, kappa_hat = {}, g_oddness_defect = {}",
                sig6(rep.a2_spread),
                sig6(rep.c2prime_kappa_hat),
                sig6(rep.g_oddness_defect)
            );
        }
        Command::Limit {
            args,
            draws,
            box_half_width,
            box_resolution,
        } => {
            let model = args.model()?;
            let mut cfg = args.config();
            cfg.s_grid = SGrid {
                half_width: box_half_width,
                resolution: box_resolution,
            };
            cfg.validate()?;
            let ing = population::compute_limit_ingredients(&model, &cfg.quad, cfg.fd_step)?;
            let samples = asymptotics::simulate_limit_law(&ing, &cfg, draws, args.seed)?;
            let flagged = samples.iter().filter(|s| s.on_boundary).count();
            if flagged > 0 {
                report.warn(&format!("{flagged} draws have their argmax near the box boundary"));
            }
            let cloud: Vec<Vec<f64>> = samples.iter().map(|s| s.s_hat.clone()).collect();
            report.seed = Some(args.seed);
            report.config = json!({"experiment": cfg, "draws": draws});
            report.results = json!({
                "concavity_ok": samples.iter().all(|s| s.concavity_ok),
                "boundary_decay_ok": samples.iter().all(|s| s.boundary_decay_ok),
                "unique_ok": samples.iter().filter(|s| s.unique_ok).count(),
                "samples": samples,
            });
            write_file(&args.out, "limit.json", &report.to_json("limit"))?;
            write_file(&args.out, "limit_samples.csv", &asymptotics::cloud_csv(&cloud))?;
            println!("draws = {draws}, boundary_flagged = {flagged}");
        }
        Command::Empirical { args, n } => {
            let model = args.model()?;
            if args.reps < 1 {
                bail!("--reps must be >= 1");
            }
            let cloud = asymptotics::empirical_limit_samples(&model, n, args.reps, args.seed)?;
            report.seed = Some(args.seed);
            report.config = json!({"model": model, "n": n, "reps": args.reps});
            report.results = json!({ "samples": cloud });
            write_file(&args.out, "empirical.json", &report.to_json("empirical"))?;
            write_file(&args.out, "empirical_samples.csv", &asymptotics::cloud_csv(&cloud))?;
            println!("reps = {}, n = {n}", args.reps);
        }
        Command::Compare { a, b, out } => {
            let read = |p: &Path| -> Result<Vec<Vec<f64>>> {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                asymptotics::parse_cloud_csv(&text).with_context(|| format!("parsing {}", p.display()))
            };
            let cmp = stats::compare_distributions(&read(&a)?, &read(&b)?)?;
            let ks: Vec<String> = cmp.ks.iter().map(|&v| sig6(v)).collect();
            println!(
                "ks = [{}] (95% critical {}), energy_distance = {}",
                ks.join(", "),
                sig6(cmp.ks_critical_95),
                sig6(cmp.energy_distance)
            );
            if let Some(dir) = out {
                report.config = json!({"a": a, "b": b});
                report.results = serde_json::to_value(&cmp)?;
                write_file(&dir, "compare.json", &report.to_json("compare"))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let invocation: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, invocation) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
