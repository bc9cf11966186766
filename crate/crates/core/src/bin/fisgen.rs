use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fisgen::dataset::{content_digest, generate_synthetic, parse_columns, parse_dataset, Dataset, DatasetError, SynthSpec};
use fisgen::experiment::{fit_model, run_experiment, run_single_sweep, ExperimentConfig, ExperimentError};
use fisgen::inference::FisModel;
use fisgen::report::{predictions_csv, records_csv, to_json, write_experiment, write_file, ReportError, RunManifest};

const BUNDLED: &[u8] = include_bytes!("../../data/synthetic.csv");
const BUNDLED_NAME: &str = "bundled:synthetic.csv";

/// Fuzzy inference systems from fuzzy c-means clustering, with rule-count and
/// sampling sensitivity experiments.
#[derive(Debug, Parser)]
#[command(name = "fisgen", version, about)]
struct Cli {
    /// JSON experiment config; missing fields take defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for all outputs.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DataArg {
    /// CSV dataset with a header row; defaults to the bundled synthetic data.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one FIS from every row and write model.json.
    Fit {
        #[command(flatten)]
        data: DataArg,
        /// Cluster count, an upper bound on the rule count.
        #[arg(long)]
        k: usize,
    },
    /// Apply model.json to a dataset and write predictions.csv.
    Predict {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[command(flatten)]
        data: DataArg,
    },
    /// Sweep rule counts 1..R on one build set and write records.csv.
    Sweep {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        rule_sweep_max: Option<usize>,
    },
    /// Run the Full, Sampled and Top-N comparison and write the report.
    Experiment {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        rule_sweep_max: Option<usize>,
        #[arg(long)]
        sample_count: Option<usize>,
        #[arg(long)]
        top_n: Option<usize>,
    },
    /// Write synthetic.csv.
    Synth {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}\nhint: run `fisgen --help` for the accepted flags"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(m) => CliError::Usage(m),
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidSpec(m) => CliError::Usage(m),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Raw bytes and a display name for the dataset source.
fn read_data(arg: &DataArg) -> Result<(Vec<u8>, String), CliError> {
    match &arg.data {
        Some(path) => fs::read(path)
            .map(|b| (b, path.display().to_string()))
            .map_err(|e| CliError::Data(format!("--data {}: {e}", path.display()))),
        None => Ok((BUNDLED.to_vec(), BUNDLED_NAME.to_string())),
    }
}

fn load(arg: &DataArg, config: &ExperimentConfig) -> Result<(Dataset, RunManifestSeed), CliError> {
    let (bytes, source) = read_data(arg)?;
    let dataset = parse_dataset(&bytes, &config.predictors, &config.target)?;
    Ok((
        dataset,
        RunManifestSeed {
            source,
            digest: content_digest(&bytes),
        },
    ))
}

struct RunManifestSeed {
    source: String,
    digest: String,
}

fn write_manifest(dir: &Path, command: &str, config: &ExperimentConfig, seed: &RunManifestSeed) -> Result<(), CliError> {
    let manifest = RunManifest::new(command, config, &seed.source, &seed.digest);
    write_file(dir, "manifest.json", &to_json(&manifest)?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = load_config(cli)?;
    let out = &cli.out_dir;
    match &cli.command {
        Command::Fit { data, k } => {
            let (dataset, seed) = load(data, &config)?;
            let model = fit_model(&dataset, &config, *k)?;
            write_file(out, "model.json", &to_json(&model)?)?;
            write_manifest(out, "fit", &config, &seed)?;
            let inputs: Vec<&str> = model.input_partitions().iter().map(|p| p.variable()).collect();
            for line in model.rules().render(model.input_partitions(), model.output_partition()) {
                println!("{line}");
            }
            eprintln!("{} rules over inputs {}", model.rules().len(), inputs.join(", "));
        }
        Command::Predict { model, data } => {
            let text = fs::read_to_string(model)
                .map_err(|e| CliError::Data(format!("--model {}: {e}", model.display())))?;
            let model: FisModel =
                serde_json::from_str(&text).map_err(|e| CliError::Data(format!("--model {}: {e}", model.display())))?;
            let (bytes, _) = read_data(data)?;
            let mut columns: Vec<String> = model.input_partitions().iter().map(|p| p.variable().to_string()).collect();
            columns.push(model.output_partition().variable().to_string());
            let (dataset, has_target) = match parse_columns(&bytes, &columns) {
                Ok(d) => (d, true),
                Err(DatasetError::MissingColumn(c)) if c == columns[columns.len() - 1] => {
                    columns.pop();
                    (parse_columns(&bytes, &columns)?, false)
                }
                Err(e) => return Err(e.into()),
            };
            let inputs = model.input_partitions().len();
            let mut predictions = Vec::with_capacity(dataset.nrows());
            for row in dataset.rows().rows() {
                let x = row.to_vec();
                let p = model
                    .predict(&x[..inputs])
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                predictions.push(p);
            }
            let actuals = has_target.then(|| dataset.column(inputs).to_vec());
            write_file(out, "predictions.csv", &predictions_csv(&predictions, actuals.as_deref()))?;
        }
        Command::Sweep { data, rule_sweep_max } => {
            if let Some(r) = rule_sweep_max {
                config.rule_sweep_max = *r;
            }
            let (dataset, seed) = load(data, &config)?;
            let sweep = run_single_sweep(&dataset, &config)?;
            write_file(out, "records.csv", &records_csv([&sweep]))?;
            write_manifest(out, "sweep", &config, &seed)?;
        }
        Command::Experiment {
            data,
            rule_sweep_max,
            sample_count,
            top_n,
        } => {
            if let Some(r) = rule_sweep_max {
                config.rule_sweep_max = *r;
            }
            if let Some(s) = sample_count {
                config.sample_count = *s;
            }
            if let Some(n) = top_n {
                config.top_n = *n;
            }
            let (dataset, seed) = load(data, &config)?;
            let report = run_experiment(&dataset, &config)?;
            let manifest = RunManifest::new("experiment", &config, &seed.source, &seed.digest);
            write_experiment(&report, &manifest, out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Synth { n, noise } => {
            let mut spec = SynthSpec::default();
            if let Some(n) = n {
                spec.n = *n;
            }
            if let Some(noise) = noise {
                spec.noise = *noise;
            }
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let dataset = generate_synthetic(&spec)?;
            write_file(out, "synthetic.csv", &dataset.to_csv())?;
        }
    }
    Ok(())
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
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
