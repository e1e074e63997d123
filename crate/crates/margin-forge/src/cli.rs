//! Command-line driver: `encode`, `train`, `predict`, `evaluate`, `synth`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use margin_forge_core::encoding::{self, LabelRule};
use margin_forge_core::eval::{self, SyntheticCohortSpec};
use margin_forge_core::{train, FeatureVector, Kernel, Label, TrainConfig, TrainDiagnostics};

use crate::csv_input::read_csv_requiring;
use crate::error::{Error, Result};
use crate::model_file::{load_model, save_model};
use crate::real::format_real;
use crate::schema_file::read_schema;
use crate::sparse::{read_sparse, write_sparse, SparseDataset};

/// Environment variable holding the `env_logger` filter.
pub const LOG_ENV: &str = "MARGIN_FORGE_LOG";

#[derive(Debug, Parser)]
#[command(name = "margin-forge", version, about = "Soft-margin SVM toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a CSV table into a sparse labeled file.
    Encode(EncodeArgs),
    /// Train a classifier on a sparse file.
    Train(TrainArgs),
    /// Print `label decision` for every example.
    Predict(PredictArgs),
    /// Print the error report of a model on a sparse file.
    Evaluate(EvaluateArgs),
    /// Generate a cohort around a random planted hyperplane.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Label +1 when any of these columns holds a true token. Without it the
    /// schema's `@label` column is used.
    #[arg(long, value_delimiter = ',')]
    pub label_any: Vec<String>,
    /// Tokens counted as true by --label-any (default: yes, y, true, 1).
    #[arg(long, value_delimiter = ',', requires = "label_any")]
    pub true_token: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Linear,
    #[value(alias = "polynomial")]
    Poly,
    Rbf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub data: PathBuf,
    /// Soft-margin bound C.
    #[arg(short = 'c', long = "c-bound", default_value_t = 1.0)]
    pub c_bound: f64,
    #[arg(long, value_enum, default_value_t = KernelKind::Linear)]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    /// Kernel gamma; defaults to 1/dim.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub coef0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Hold out this fraction of the data (stratified) and report on both parts.
    #[arg(long)]
    pub holdout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    /// Emit CSV instead of the aligned table.
    #[arg(long)]
    pub csv: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bias of the planted hyperplane.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub bias: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Runs one subcommand, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Encode(args) => encode(args, out),
        Command::Train(args) => train_cmd(args, out),
        Command::Predict(args) => predict(args, out),
        Command::Evaluate(args) => evaluate(args, out),
        Command::Synth(args) => synth(args),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn encode(args: EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let schema = read_schema(&args.schema)?;
    let rule = match (args.label_any.is_empty(), args.true_token.is_empty()) {
        (true, _) => None,
        (false, true) => Some(LabelRule::any_of(&args.label_any)?),
        (false, false) => Some(LabelRule::with_true_tokens(
            &args.label_any,
            &args.true_token,
        )?),
    };
    if rule.is_none() && schema.label_field().is_none() {
        return Err(Error::Usage(
            "no label source: pass --label-any or declare `@label` in the schema".into(),
        ));
    }
    let extra = rule.as_ref().map_or(&[][..], LabelRule::fields);
    let records = read_csv_requiring(&args.csv, &schema, extra)?;
    if records.is_empty() {
        return Err(Error::parse(2, "CSV has a header but no rows"));
    }
    let state = encoding::fit_encoder(&schema, &records)?;
    let mut data = Vec::with_capacity(records.len());
    for (k, record) in records.iter().enumerate() {
        // Header is line 1.
        let at_row = |e: margin_forge_core::Error| Error::parse(k + 2, e.to_string());
        let x = encoding::encode_record(&schema, &state, record).map_err(at_row)?;
        let y = match (&rule, schema.label_field()) {
            (Some(rule), _) => encoding::label_record(record, rule),
            (None, Some(field)) => encoding::label_from_field(record, field),
            (None, None) => unreachable!("checked above"),
        }
        .map_err(at_row)?;
        data.push((x, y));
    }
    let mut dataset = SparseDataset::from_labeled(&data);
    dataset.dim = Some(schema.total_dim());
    write_sparse(&args.output, &dataset)?;
    let n_pos = data.iter().filter(|(_, y)| *y == Label::Positive).count();
    info!(
        "encoded {} records into {} dimensions",
        data.len(),
        schema.total_dim()
    );
    write_out(
        out,
        &format!("{} {} {}\n", data.len(), n_pos, data.len() - n_pos),
    )
}

fn kernel_for(args: &TrainArgs, dim: usize) -> Kernel {
    let gamma = args.gamma.unwrap_or(1.0 / dim.max(1) as f64);
    match args.kernel {
        KernelKind::Linear => Kernel::Linear,
        KernelKind::Poly => Kernel::Polynomial {
            degree: args.degree,
            gamma,
            coef0: args.coef0,
        },
        KernelKind::Rbf => Kernel::Rbf { gamma },
    }
}

fn diagnostics_text(d: &TrainDiagnostics) -> String {
    format!(
        "dual_objective {:?}\niterations {}\nsupport_vectors {}\nbounded_support_vectors {}\n\
         max_kkt_violation {:?}\nbalance_residual {:?}\ntotal_slack {:?}\nbias {:?}\n",
        d.dual_objective,
        d.iterations,
        d.n_support_vectors,
        d.n_bounded_svs,
        d.max_kkt_violation,
        d.balance_residual,
        d.total_slack,
        d.bias
    )
}

fn train_cmd(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    // Everything that does not depend on the data is checked first.
    let mut config = TrainConfig {
        c_bound: args.c_bound,
        kernel: kernel_for(&args, 1),
        kkt_tolerance: args.tol,
        max_passes: args.max_iter,
        seed: args.seed,
    };
    config.validate()?;
    if let Some(h) = args.holdout {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Usage(format!(
                "--holdout must be in (0, 1), got {h}"
            )));
        }
    }

    let data = read_sparse(&args.data)?.to_labeled()?;
    let dim = data.first().map_or(0, |(x, _)| x.dim());
    config.kernel = kernel_for(&args, dim);
    config.validate()?;

    let (fit_on, held_out) = match args.holdout {
        Some(h) => {
            let (a, b) = eval::split(&data, 1.0 - h, args.seed)?;
            (a, Some(b))
        }
        None => (data, None),
    };
    info!("training on {} examples of dimension {dim}", fit_on.len());
    let (model, diagnostics) = match train(&fit_on, &config) {
        Ok(result) => result,
        Err(margin_forge_core::Error::Convergence(d)) => {
            write_out(out, &diagnostics_text(&d))?;
            return Err(margin_forge_core::Error::Convergence(d).into());
        }
        Err(e) => return Err(e.into()),
    };
    save_model(&args.output, &model)?;
    write_out(out, &diagnostics_text(&diagnostics))?;
    if let Some(test) = held_out {
        let resub = eval::evaluate(&model, &fit_on, config.c_bound)?;
        let hold = eval::evaluate(&model, &test, config.c_bound)?;
        let text = format!(
            "# resubstitution\n{}# hold-out\n{}",
            eval::render_report(&[resub])?,
            eval::render_report(&[hold])?
        );
        write_out(out, &text)?;
    }
    Ok(())
}

/// Loads a sparse file and aligns it with a model's dimension. A declared
/// dimension must match exactly; an inferred one may fall short and is
/// padded with zeros.
fn load_for_model(path: &Path, model_dim: usize) -> Result<Vec<(FeatureVector, Label)>> {
    let dataset = read_sparse(path)?;
    let dim = dataset.effective_dim();
    let compatible = match dataset.dim {
        Some(declared) => declared == model_dim,
        None => dim <= model_dim,
    };
    if !compatible {
        return Err(Error::Core(margin_forge_core::Error::Dimension {
            expected: model_dim,
            found: dim,
        }));
    }
    dataset.to_labeled_with_dim(model_dim)
}

fn predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let data = load_for_model(&args.data, model.dim())?;
    let mut text = String::new();
    for (x, _) in &data {
        let value = model.decision_value(x)?;
        let label = model.predict(x)?;
        text.push_str(&format!("{label} {}\n", format_real(value)));
    }
    match args.output {
        Some(path) => write_file(&path, &text),
        None => write_out(out, &text),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(text.as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(path, e))
}

fn evaluate(args: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let data = load_for_model(&args.data, model.dim())?;
    let report = eval::evaluate(&model, &data, model.c_bound())?;
    let text = if args.csv {
        eval::render_report_csv(&[report])?
    } else {
        eval::render_report(&[report])?
    };
    match args.output {
        Some(path) => write_file(&path, &text),
        None => write_out(out, &text),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = SyntheticCohortSpec::with_random_plane(args.n, args.dim, args.noise, args.seed);
    spec.planted_bias = args.bias;
    let data = eval::generate_cohort(&spec)?;
    let mut dataset = SparseDataset::from_labeled(&data);
    dataset.dim = Some(args.dim);
    write_sparse(&args.output, &dataset)
}
