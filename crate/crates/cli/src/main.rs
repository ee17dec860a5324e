//! `targetfact`: ingest evidence, train the factorization, evaluate it and
//! analyse predictions by clinical phase.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use targetfact::ingest::{
    parse_layer_selection, read_outcome_pairs, run_ingest, write_ingest, EvidenceLayer,
    IngestConfig, SigColumnPolicy, DEFAULT_L2G_THRESHOLD, OUTCOME_PAIRS_FILE,
};
use targetfact::metrics::{
    join_phases, phase_analysis, repeated_eval, write_phase_tsv, EvalConfig, FitConfig,
};
use targetfact::sampler::checkpoint::{read_predictions, save_checkpoint, write_predictions};
use targetfact::sampler::{SamplerSchedule, DEFAULT_ALPHA, DEFAULT_LATENT_DIM};
use targetfact::simulate::{generate, write_synth, SynthConfig};
use targetfact::tensor::io::load_tensor;
use targetfact::tensor::{Coord, TensorIndex};
use targetfact::{fsutil, ErrorClass, Tensor};

use config::FileConfig;

pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const PHASE_JSON_FILE: &str = "phase_analysis.json";
pub const PHASE_TSV_FILE: &str = "phase_analysis.tsv";
pub const SYNTH_CONFIG_FILE: &str = "synth_config.json";

#[derive(Debug)]
pub struct CliError {
    class: ErrorClass,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Usage,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Data,
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.class {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
        }
    }

    fn class_name(&self) -> &'static str {
        match self.class {
            ErrorClass::Usage => "usage",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
        }
    }
}

impl From<targetfact::Error> for CliError {
    fn from(e: targetfact::Error) -> Self {
        Self {
            class: e.class(),
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "targetfact",
    version,
    about = "Bayesian tensor factorization of target-indication evidence"
)]
struct Cli {
    /// TOML file of defaults (`latent_dim = 16`, `seed = 7`, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse curated sources and write the observation tensor.
    Ingest(IngestArgs),
    /// Fit the model and write a checkpoint plus outcome predictions.
    Train(TrainArgs),
    /// Repeated stratified hold-out evaluation per layer selection.
    Evaluate(EvaluateArgs),
    /// Compare outcome predictions across maximum clinical phases.
    PhaseAnalysis(PhaseArgs),
    /// Generate a synthetic low-rank tensor with ground truth.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    outcomes: PathBuf,
    #[arg(long)]
    xref: PathBuf,
    #[arg(long)]
    rare_disease: Option<PathBuf>,
    #[arg(long)]
    gene_burden: Option<PathBuf>,
    #[arg(long)]
    gwas: Option<PathBuf>,
    /// Evidence layers: comma separated `rare`, `burden`, `gwas`, or `all`.
    #[arg(long)]
    layers: Option<String>,
    /// Minimum L2G score kept [default: 0.5].
    #[arg(long)]
    l2g_threshold: Option<f64>,
    /// Accepted rare-disease confidence tiers.
    #[arg(long, value_delimiter = ',', default_value = "definitive,strong")]
    accepted_confidence: Vec<String>,
    /// Also read `true`/`false` and `yes`/`no` in the burden significance column.
    #[arg(long)]
    boolean_significance: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Latent dimension D [default: 32].
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Observation precision [default: 5.0].
    #[arg(long)]
    alpha: Option<f64>,
    /// Burn-in sweeps [default: 500].
    #[arg(long)]
    burnin: Option<usize>,
    /// Sweeps after burn-in [default: 3500].
    #[arg(long)]
    samples: Option<usize>,
    /// Keep every thin-th post-burn-in sweep [default: 350].
    #[arg(long)]
    thin: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: 1].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Directory holding `tensor.tsv` and `tensor.meta.json`.
    #[arg(long)]
    tensor: PathBuf,
    /// Outcome pairs to predict [default: `outcome_pairs.tsv` beside the tensor, else the whole outcome layer].
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Evidence layers to keep alongside the outcome layer [default: all].
    #[arg(long)]
    layers: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// Comma separated: `combined`, `single` (each evidence layer alone) or layer names.
    #[arg(long, default_value = "combined,single")]
    models: String,
    /// Repeats per model [default: 10].
    #[arg(long)]
    n_repeats: Option<usize>,
    /// Explicit repeat seeds; overrides `--seed`/`--n-repeats`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Held-out share of the outcome layer [default: 0.2].
    #[arg(long)]
    heldout_fraction: Option<f64>,
    /// F1 decision threshold [default: 0.5].
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Report JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    /// Prediction table written by `train`.
    #[arg(long)]
    predictions: PathBuf,
    /// Outcome pairs written by `ingest`.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Targets, indications, layers.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "50,40,4")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0.2)]
    observed_fraction: f64,
    #[arg(long, default_value_t = 0.9)]
    coupling: f64,
    /// Binarize observed outcome-layer values at this level.
    #[arg(long)]
    outcome_threshold: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn require_file(flag: &str, path: &Path) -> CliResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "--{flag}: no such file {}",
            path.display()
        )))
    }
}

fn resolve_fit(m: &ModelArgs, cfg: &FileConfig) -> CliResult<(FitConfig, u64, usize)> {
    let schedule = SamplerSchedule::new(
        m.burnin
            .or(cfg.burnin)
            .unwrap_or(SamplerSchedule::PUBLISHED.burnin),
        m.samples
            .or(cfg.samples)
            .unwrap_or(SamplerSchedule::PUBLISHED.samples),
        m.thin
            .or(cfg.thin)
            .unwrap_or(SamplerSchedule::PUBLISHED.thin),
    )?;
    let fit = FitConfig {
        latent_dim: m
            .latent_dim
            .or(cfg.latent_dim)
            .unwrap_or(DEFAULT_LATENT_DIM),
        alpha: m.alpha.or(cfg.alpha).unwrap_or(DEFAULT_ALPHA),
        schedule,
    };
    if fit.latent_dim == 0 {
        return Err(CliError::usage("--latent-dim must be at least 1"));
    }
    if !(fit.alpha > 0.0 && fit.alpha.is_finite()) {
        return Err(CliError::usage("--alpha must be positive"));
    }
    let threads = m.threads.or(cfg.threads).unwrap_or(1);
    if threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    Ok((fit, m.seed.or(cfg.seed).unwrap_or(0), threads))
}

/// Layer index for a user-supplied name: an exact tensor layer name or an
/// evidence alias such as `rare`.
fn resolve_layer(name: &str, index: &TensorIndex) -> CliResult<usize> {
    if let Some(k) = index.layers.get(name) {
        return Ok(k);
    }
    let canonical = name
        .parse::<EvidenceLayer>()
        .map(|l| l.name().to_string())
        .unwrap_or_else(|_| name.to_string());
    index.layers.get(&canonical).ok_or_else(|| {
        CliError::usage(format!(
            "tensor has no layer {name:?} (layers: {:?})",
            index.layers.ids()
        ))
    })
}

fn cmd_ingest(a: IngestArgs, cfg: &FileConfig) -> CliResult {
    require_file("outcomes", &a.outcomes)?;
    require_file("xref", &a.xref)?;
    for (flag, p) in [
        ("rare-disease", &a.rare_disease),
        ("gene-burden", &a.gene_burden),
        ("gwas", &a.gwas),
    ] {
        if let Some(p) = p {
            require_file(flag, p)?;
        }
    }
    let mut c = IngestConfig::new(&a.outcomes, &a.xref);
    c.rare_disease = a.rare_disease;
    c.gene_burden = a.gene_burden;
    c.gwas = a.gwas;
    c.layers = match a.layers.or(cfg.layers.clone()) {
        Some(s) => parse_layer_selection(&s)?,
        None => EvidenceLayer::ALL
            .into_iter()
            .filter(|&l| match l {
                EvidenceLayer::RareDisease => c.rare_disease.is_some(),
                EvidenceLayer::GeneBurden => c.gene_burden.is_some(),
                EvidenceLayer::Gwas => c.gwas.is_some(),
            })
            .collect(),
    };
    c.l2g_threshold = a
        .l2g_threshold
        .or(cfg.l2g_threshold)
        .unwrap_or(DEFAULT_L2G_THRESHOLD);
    c.accepted_confidence = a.accepted_confidence.into_iter().collect();
    if a.boolean_significance {
        c.sig_policy = SigColumnPolicy::Boolean;
    }
    let out = run_ingest(&c)?;
    write_ingest(&a.out, &out)?;
    log::info!(
        "tensor dims {:?}, {} cells",
        out.tensor.dims(),
        out.tensor.len()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs, cfg: &FileConfig) -> CliResult {
    let (fit, seed, threads) = resolve_fit(&a.model, cfg)?;
    let (tensor, index): (Tensor, TensorIndex) = load_tensor(&a.tensor)?;
    let (tensor, index) = match a.layers.or(cfg.layers.clone()) {
        Some(sel) => {
            let mut keep = vec![0];
            for name in sel.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if name == "all" || name == "combined" {
                    keep.extend(1..index.layers.len());
                } else {
                    keep.push(resolve_layer(name, &index)?);
                }
            }
            keep.sort_unstable();
            keep.dedup();
            (tensor.select_layers(&keep)?, index.select_layers(&keep)?)
        }
        None => (tensor, index),
    };

    let pairs_path = a.pairs.clone().or_else(|| {
        let p = a.tensor.join(OUTCOME_PAIRS_FILE);
        p.is_file().then_some(p)
    });
    let query: Vec<Coord> = match &pairs_path {
        Some(p) => {
            require_file("pairs", p)?;
            read_outcome_pairs(p)?
                .iter()
                .map(|pair| {
                    let i = index.targets.get(&pair.gene_id);
                    let j = index.indications.get(&pair.disease_id);
                    match (i, j) {
                        (Some(i), Some(j)) => Ok(Coord::new(i, j, 0)),
                        _ => Err(CliError::data(format!(
                            "pair {}/{} is not in the tensor index",
                            pair.gene_id, pair.disease_id
                        ))),
                    }
                })
                .collect::<CliResult<_>>()?
        }
        None => {
            let [n_t, n_i, _] = tensor.dims();
            (0..n_t)
                .flat_map(|i| (0..n_i).map(move |j| Coord::new(i, j, 0)))
                .collect()
        }
    };

    let (state, out) = targetfact::metrics::fit_predict(&tensor, &fit, seed, &query, threads)?;
    save_checkpoint(&a.out, &state, &fit.schedule, out.retained, Some(&index))?;
    write_predictions(&a.out.join(PREDICTIONS_FILE), &out.predictions, &index)?;
    log::info!(
        "kept {} samples, wrote {} predictions",
        out.retained,
        out.predictions.len()
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs, cfg: &FileConfig) -> CliResult {
    let (fit, seed, threads) = resolve_fit(&a.model, cfg)?;
    let (tensor, index): (Tensor, TensorIndex) = load_tensor(&a.tensor)?;
    let seeds: Vec<u64> = match a.seeds {
        Some(s) => s,
        None => {
            let n = a.n_repeats.or(cfg.n_repeats).unwrap_or(10);
            (0..n as u64).map(|r| seed.wrapping_add(r)).collect()
        }
    };
    let evidence: Vec<usize> = (1..index.layers.len()).collect();
    let mut models: Vec<(String, Vec<usize>)> = Vec::new();
    for name in a.models.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "combined" => models.push(("combined".into(), (0..index.layers.len()).collect())),
            "single" => {
                for &k in &evidence {
                    models.push((index.layers.ids()[k].clone(), vec![0, k]));
                }
            }
            other => {
                let k = resolve_layer(other, &index)?;
                models.push((index.layers.ids()[k].clone(), vec![0, k]));
            }
        }
    }
    if models.is_empty() {
        return Err(CliError::usage("--models selects nothing"));
    }
    let base = EvalConfig {
        model_name: String::new(),
        fit,
        heldout_fraction: a.heldout_fraction.or(cfg.heldout_fraction).unwrap_or(0.2),
        threshold: a.threshold.or(cfg.threshold).unwrap_or(0.5),
        threads,
    };
    let mut reports = Vec::new();
    for (name, layers) in models {
        let t = tensor.select_layers(&layers)?;
        let config = EvalConfig {
            model_name: name,
            ..base.clone()
        };
        let (report, _) = repeated_eval(&t, &config, &seeds)?;
        log::info!(
            "{}: auroc {:.4} ± {:.4}",
            report.model_name,
            report.auroc_mean,
            report.auroc_sd
        );
        reports.push(report);
    }
    fsutil::write_json_atomic(&a.out, &reports)?;
    Ok(())
}

fn cmd_phase(a: PhaseArgs) -> CliResult {
    require_file("predictions", &a.predictions)?;
    require_file("pairs", &a.pairs)?;
    let predictions = read_predictions(&a.predictions)?;
    let pairs = read_outcome_pairs(&a.pairs)?;
    let scored = join_phases(&predictions, &pairs)?;
    let analysis = phase_analysis(&scored)?;
    fsutil::write_json_atomic(&a.out.join(PHASE_JSON_FILE), &analysis)?;
    write_phase_tsv(&a.out.join(PHASE_TSV_FILE), &analysis)?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, cfg: &FileConfig) -> CliResult {
    let dims: [usize; 3] =
        a.dims.as_slice().try_into().map_err(|_| {
            CliError::usage(format!("--dims needs three values, got {}", a.dims.len()))
        })?;
    let config = SynthConfig {
        dims,
        rank: a.rank,
        noise_sd: a.noise_sd,
        observed_fraction: a.observed_fraction,
        seed: a.seed.or(cfg.seed).unwrap_or(0),
        coupling: a.coupling,
        outcome_threshold: a.outcome_threshold,
    };
    let data = generate::<f64>(&config)?;
    write_synth(&a.out, &data)?;
    fsutil::write_json_atomic(&a.out.join(SYNTH_CONFIG_FILE), &config)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, &cfg),
        Command::Train(a) => cmd_train(a, &cfg),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
        Command::PhaseAnalysis(a) => cmd_phase(a),
        Command::Simulate(a) => cmd_simulate(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("TARGETFACT_LOG")
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.class_name(), "message": e.message });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
