//! Command-line surface for J-Hermitian DPP computations.
//!
//! Every command is a pure function of its flags and input files; runs
//! echo their resolved configuration for reproducibility. Exit codes:
//! 0 success (kernel valid where applicable), 2 well-formed but invalid
//! kernel, 1 operational error.

mod expr;
mod output;
mod spec_file;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jdpp::dpp::{self, DEFAULT_ENUMERATION_CAP};
use jdpp::fredholm;
use jdpp::io;
use jdpp::kernels;
use jdpp::sampler;
use jdpp::space::IndexWindow;
use jdpp::{CorrelationQuery, JKernel, RandomKernelSpec};

use output::{complex_value, Format, Output};

#[derive(Parser, Debug)]
#[command(
    name = "jdpp",
    version,
    about = "Determinantal point processes with J-Hermitian kernels: validate, evaluate determinants, enumerate distributions, and sample"
)]
struct Cli {
    /// RNG seed for sampling and generation commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Spectral/structural tolerance for validity checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Worker threads (0 = library default); output is identical for any value
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum DetMethodArg {
    Series,
    Direct,
    Block,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hat-transform validity criterion 0 ≤ K̂ ≤ 1
    Validate { kernel: PathBuf },
    /// Extended Fredholm determinant Det(1+K), or Det(1+Kφ) with a multiplier
    Det {
        kernel: PathBuf,
        #[arg(long, value_enum, default_value_t = DetMethodArg::Direct)]
        method: DetMethodArg,
        /// JSON array (or {"phi": [...]}) switching to the multiplier determinant
        #[arg(long)]
        phi_file: Option<PathBuf>,
        /// Series truncation tolerance (series method)
        #[arg(long, default_value_t = 1e-12)]
        series_tol: f64,
        /// Series order cap (series method; defaults to the dimension)
        #[arg(long)]
        n_cap: Option<usize>,
    },
    /// Bogoliubov functional E[∏(1+φ)] (alias of `det --phi-file`)
    Bogoliubov {
        kernel: PathBuf,
        #[arg(long)]
        phi_file: PathBuf,
    },
    /// Exact probability of every configuration (small ground sets)
    Distribution {
        kernel: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Local densities on a window via L = K^Δ(1−K^Δ)⁻¹
    Densities {
        kernel: PathBuf,
        /// Comma-separated window indices (default: all)
        #[arg(long)]
        window: Option<String>,
    },
    /// Void probability Det(1−K^Δ)
    Void {
        kernel: PathBuf,
        #[arg(long)]
        window: Option<String>,
    },
    /// Draw configurations by particle-hole duality
    Sample {
        kernel: PathBuf,
        #[arg(long, short = 'n')]
        count: usize,
    },
    /// Compare empirical inclusion frequencies against det K\[q,q\]
    Estimate {
        kernel: PathBuf,
        /// Comma-separated point indices; repeatable
        #[arg(long, required = true)]
        query: Vec<String>,
        #[arg(long, short = 'n')]
        count: usize,
    },
    /// Chi-square goodness of fit of sampled configurations
    Gof {
        kernel: PathBuf,
        #[arg(long, short = 'n')]
        count: usize,
    },
    /// Independent ε-thinning: write the kernel εK
    Thin {
        kernel: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Discretize a continuous block kernel onto a quadrature grid
    Discretize { spec: PathBuf },
    /// Build the kernel whose hat projects onto the graph {h ⊕ Gh}
    FromG { g: PathBuf },
    /// Generate a random valid J-Hermitian kernel
    Random {
        /// Number of part-1 points
        #[arg(long)]
        n1: usize,
        /// Number of part-2 points
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        projection: bool,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        norm_cap: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap would exit 2; reserve 2 for "well-formed but invalid kernel"
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_kernel(path: &PathBuf) -> Result<JKernel> {
    let text = read_to_string(path)?;
    Ok(io::parse_kernel(&text)?)
}

fn load_phi(path: &PathBuf, n: usize) -> Result<Vec<f64>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum PhiFile {
        Bare(Vec<f64>),
        Wrapped { phi: Vec<f64> },
    }
    let text = read_to_string(path)?;
    let parsed: PhiFile = serde_json::from_str(&text).context("parsing multiplier file")?;
    let phi = match parsed {
        PhiFile::Bare(v) | PhiFile::Wrapped { phi: v } => v,
    };
    if phi.len() != n {
        bail!("multiplier has length {}, kernel needs {n}", phi.len());
    }
    Ok(phi)
}

fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("bad index `{part}`"))
        })
        .collect()
}

fn parse_window(window: &Option<String>, n: usize) -> Result<IndexWindow> {
    Ok(match window {
        None => IndexWindow::full(n),
        Some(text) => IndexWindow::new(parse_index_list(text)?)?,
    })
}

fn distribution_rows(table: &dpp::DistributionTable, index_map: Option<&[usize]>) -> Vec<Value> {
    table
        .iter()
        .map(|(gamma, mass)| {
            let members: Vec<usize> = match index_map {
                Some(map) => gamma.iter().map(|pos| map[pos]).collect(),
                None => gamma.members().to_vec(),
            };
            json!({"gamma": members, "p": mass})
        })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.threads > 0 {
        // ignore the error when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let out = Output {
        format: cli.format,
        dest: cli.out.clone(),
    };
    let config = |command: &str, args: Value| -> Value {
        json!({
            "command": command,
            "seed": cli.seed,
            "tol": cli.tol,
            "threads": cli.threads,
            "format": cli.format,
            "out": cli.out.as_ref().map(|p| p.display().to_string()),
            "args": args,
        })
    };

    match &cli.command {
        Command::Validate { kernel } => {
            let k = load_kernel(kernel)?;
            let verdict = k.check_validity(cli.tol);
            let valid = verdict.valid;
            out.emit_object(
                &config("validate", json!({"kernel": kernel.display().to_string()})),
                &serde_json::to_value(&verdict)?,
            )?;
            Ok(if valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Det {
            kernel,
            method,
            phi_file,
            series_tol,
            n_cap,
        } => {
            let k = load_kernel(kernel)?;
            let args = json!({
                "kernel": kernel.display().to_string(),
                "method": method,
                "phi_file": phi_file.as_ref().map(|p| p.display().to_string()),
                "series_tol": series_tol,
                "n_cap": n_cap,
            });
            let result = match phi_file {
                Some(path) => {
                    let phi = load_phi(path, k.n())?;
                    let value = fredholm::det_multiplier(&k, &phi)?;
                    json!({"value": complex_value(value), "method": "multiplier"})
                }
                None => {
                    let report = match method {
                        DetMethodArg::Direct => fredholm::det_direct(&k),
                        DetMethodArg::Series => {
                            fredholm::det_series(&k, *series_tol, n_cap.unwrap_or(k.n().max(1)))?
                        }
                        // the block factorization evaluates Det(1−·);
                        // feed −K so every method reports Det(1+K)
                        DetMethodArg::Block => fredholm::det_block(&k.scaled(-1.0))?,
                    };
                    let mut value = serde_json::to_value(&report)?;
                    value["value"] = complex_value(report.value);
                    value
                }
            };
            out.emit_object(&config("det", args), &result)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bogoliubov { kernel, phi_file } => {
            let k = load_kernel(kernel)?;
            let phi = load_phi(phi_file, k.n())?;
            let value = dpp::bogoliubov(&k, &phi)?;
            out.emit_object(
                &config(
                    "bogoliubov",
                    json!({
                        "kernel": kernel.display().to_string(),
                        "phi_file": phi_file.display().to_string(),
                    }),
                ),
                &json!({"value": value}),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Distribution { kernel, cap } => {
            let k = load_kernel(kernel)?;
            let table = dpp::exact_distribution(&k, *cap)?;
            let rows = distribution_rows(&table, None);
            out.emit_rows(
                &config(
                    "distribution",
                    json!({"kernel": kernel.display().to_string(), "cap": cap}),
                ),
                &["gamma", "p"],
                &rows,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Densities { kernel, window } => {
            let k = load_kernel(kernel)?;
            let delta = parse_window(window, k.n())?;
            let table = dpp::densities_via_l(&k, &delta)?;
            let rows = distribution_rows(&table, Some(delta.indices()));
            out.emit_rows(
                &config(
                    "densities",
                    json!({
                        "kernel": kernel.display().to_string(),
                        "window": delta.indices(),
                    }),
                ),
                &["gamma", "p"],
                &rows,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Void { kernel, window } => {
            let k = load_kernel(kernel)?;
            let delta = parse_window(window, k.n())?;
            let value = dpp::void_probability(&k, &delta)?;
            out.emit_object(
                &config(
                    "void",
                    json!({
                        "kernel": kernel.display().to_string(),
                        "window": delta.indices(),
                    }),
                ),
                &json!({"value": value, "window": delta.indices()}),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample { kernel, count } => {
            let k = load_kernel(kernel)?;
            let batch = sampler::sample_j(&k, *count, cli.seed)?;
            let rows: Vec<Value> = batch
                .configurations
                .iter()
                .enumerate()
                .map(|(i, gamma)| json!({"i": i, "gamma": gamma.members()}))
                .collect();
            out.emit_rows(
                &config(
                    "sample",
                    json!({"kernel": kernel.display().to_string(), "count": count}),
                ),
                &["i", "gamma"],
                &rows,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate {
            kernel,
            query,
            count,
        } => {
            let k = load_kernel(kernel)?;
            let queries = query
                .iter()
                .map(|text| Ok(CorrelationQuery::new(parse_index_list(text)?)?))
                .collect::<Result<Vec<_>>>()?;
            let report = sampler::estimate(&k, &queries, *count, cli.seed)?;
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|row| serde_json::to_value(row).unwrap())
                .collect();
            out.emit_rows(
                &config(
                    "estimate",
                    json!({
                        "kernel": kernel.display().to_string(),
                        "count": count,
                        "queries": query,
                    }),
                ),
                &["points", "exact", "empirical", "stderr", "z", "flagged"],
                &rows,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gof { kernel, count } => {
            let k = load_kernel(kernel)?;
            let report = sampler::goodness_of_fit(&k, *count, cli.seed)?;
            out.emit_object(
                &config(
                    "gof",
                    json!({"kernel": kernel.display().to_string(), "count": count}),
                ),
                &serde_json::to_value(&report)?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Thin { kernel, eps } => {
            let k = load_kernel(kernel)?;
            let thinned = dpp::thin(&k, *eps)?;
            out.emit_kernel(
                &config(
                    "thin",
                    json!({"kernel": kernel.display().to_string(), "eps": eps}),
                ),
                &thinned,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Discretize { spec } => {
            let text = read_to_string(spec)?;
            let file: spec_file::SpecFile =
                serde_json::from_str(&text).context("parsing continuous kernel spec")?;
            let disc = kernels::discretize(&file.to_spec()?)?;
            let mut cfg = config(
                "discretize",
                json!({"spec": spec.display().to_string(), "n": file.n}),
            );
            cfg["j_violation"] = json!(disc.j_violation);
            cfg["j_hermitian_on_grid"] = json!(disc.j_hermitian_on_grid);
            out.emit_kernel(&cfg, &disc.kernel)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FromG { g } => {
            let text = read_to_string(g)?;
            let (space, g_op) = io::parse_g(&text)?;
            let kernel = kernels::from_g(&space, &g_op)?;
            out.emit_kernel(
                &config("from-g", json!({"g": g.display().to_string()})),
                &kernel,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Random {
            n1,
            n2,
            projection,
            rank,
            norm_cap,
        } => {
            let space = jdpp::PartitionedSpace::two_blocks(*n1, *n2);
            let spec = RandomKernelSpec {
                rank: *rank,
                projection: *projection,
                norm_cap: *norm_cap,
            };
            let kernel = kernels::random_valid(&space, &spec, cli.seed)?;
            out.emit_kernel(
                &config(
                    "random",
                    json!({
                        "n1": n1, "n2": n2, "projection": projection,
                        "rank": rank, "norm_cap": norm_cap,
                    }),
                ),
                &kernel,
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
