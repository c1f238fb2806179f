//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dsfusion_core::boe::{build_boe, build_weight, BodyOfEvidence, WeightScheme, WeightVector};
use dsfusion_core::fuse_dataset;

use crate::config::{PipelineOverrides, RunConfig};
use crate::dataset::{two_blobs, BlobSpec};
use crate::error::{Error, Result};
use crate::formats;
use crate::harness::{run_statistical, HarnessConfig, PoolSource};
use crate::selftest;

/// Exit status for a selftest value outside its tolerance.
pub const EXIT_SELFTEST_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "dsfusion", version, about = "Credibility-weighted Dempster-Shafer classifier fusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse the outputs of several classifiers sample by sample
    Fuse(FuseArgs),
    /// Run the split / train / enumerate / fuse protocol on datasets
    Benchmark(BenchmarkArgs),
    /// Check the pipeline against a built-in worked example
    Selftest(SelftestArgs),
    /// Write a two-class Gaussian dataset
    GenSynthetic(SyntheticArgs),
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Score CSVs (`sample_id,score_<class>,...`), one per classifier
    #[arg(long, num_args = 1.., conflicts_with = "evidence", required_unless_present = "evidence")]
    pub scores: Vec<PathBuf>,
    /// Evidence CSVs (`sample_id,mass_<class>,...,mass_ignorance`), one per classifier
    #[arg(long, num_args = 1..)]
    pub evidence: Vec<PathBuf>,
    /// Confusion-matrix CSVs, one per score file, in the same order
    #[arg(long, num_args = 1..)]
    pub confusion: Vec<PathBuf>,
    /// Weighting scheme w0..w5 applied to the scores
    #[arg(long, default_value = "w0")]
    pub scheme: WeightScheme,
    /// Fused output CSV
    #[arg(long, short)]
    pub output: PathBuf,
    /// Per-classifier diagnostics CSV
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineOverrides,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// TOML file whose values override these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSVs (features, then a `label` column)
    #[arg(long, num_args = 1..)]
    pub dataset: Vec<PathBuf>,
    /// Built-in classifiers, e.g. `knn5,centroid,logistic:0.01`
    #[arg(long, value_delimiter = ',')]
    pub classifiers: Vec<String>,
    /// Precomputed score CSVs covering every dataset sample, in dataset order
    #[arg(long, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    /// Weighting schemes [default: w0..w5]
    #[arg(long, value_delimiter = ',')]
    pub schemes: Vec<String>,
    /// RMS noise fractions [default: 0]
    #[arg(long, value_delimiter = ',')]
    pub noise: Vec<f64>,
    /// Repetitions of split, training and evaluation [default: 1]
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Largest ensemble to enumerate [default: pool size]
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Root seed for splits and noise [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report directory; each dataset gets a subdirectory [default: dsfusion-out]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Train on clean features and only score noisy ones
    #[arg(long)]
    pub rescore_only: bool,
    /// Class whose precision is reported as specificity [default: minority class]
    #[arg(long)]
    pub defect_class: Option<String>,
    #[command(flatten)]
    pub pipeline: PipelineOverrides,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub pipeline: PipelineOverrides,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    /// Output CSV
    #[arg(long, short)]
    pub output: PathBuf,
    /// Samples of the majority class
    #[arg(long, default_value_t = 200)]
    pub majority: usize,
    /// Samples of the minority class
    #[arg(long, default_value_t = 100)]
    pub minority: usize,
    #[arg(long, default_value_t = 4)]
    pub features: usize,
    /// Distance between class means per feature, in standard deviations
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Parses the arguments and runs the command. Usage errors exit with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Fuse(a) => cmd_fuse(&a).map(|_| ExitCode::SUCCESS),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Selftest(a) => cmd_selftest(&a),
        Command::GenSynthetic(a) => cmd_gen_synthetic(&a).map(|_| ExitCode::SUCCESS),
    }
}

/// Loads the inputs, validates them against each other, then writes the
/// outputs; nothing is written when validation fails.
pub fn cmd_fuse(a: &FuseArgs) -> Result<()> {
    let cfg = a.pipeline.to_config()?;
    let (ids, boes) = if a.evidence.is_empty() {
        load_score_boes(&a.scores, &a.confusion, a.scheme)?
    } else {
        if !a.confusion.is_empty() {
            return Err(Error::Config("confusion matrices apply to score files, not evidence files".into()));
        }
        let mut ids: Option<Vec<String>> = None;
        let mut boes = Vec::new();
        for p in &a.evidence {
            let f = formats::read_evidence(p)?;
            same_ids(&mut ids, f.sample_ids, p)?;
            boes.push(f.boe);
        }
        (ids.unwrap_or_default(), boes)
    };
    let result = fuse_dataset(&boes, &cfg)?;
    formats::write_fused(&a.output, &ids, &result)?;
    if let Some(d) = &a.diagnostics {
        let names: Vec<String> = boes.iter().map(|b| b.classifier_id.clone()).collect();
        formats::write_diagnostics(d, &ids, &names, &result)?;
    }
    log::info!("fused {} samples from {} sources", ids.len(), boes.len());
    Ok(())
}

fn same_ids(seen: &mut Option<Vec<String>>, ids: Vec<String>, path: &Path) -> Result<()> {
    match seen {
        None => *seen = Some(ids),
        Some(first) if first.len() != ids.len() => {
            return Err(Error::Shape(format!(
                "{} has {} samples, expected {}",
                path.display(),
                ids.len(),
                first.len()
            )))
        }
        Some(first) if *first != ids => {
            return Err(Error::Shape(format!("{}: sample ids differ from the first input", path.display())))
        }
        Some(_) => {}
    }
    Ok(())
}

fn load_score_boes(
    scores: &[PathBuf],
    confusion: &[PathBuf],
    scheme: WeightScheme,
) -> Result<(Vec<String>, Vec<BodyOfEvidence>)> {
    if !confusion.is_empty() && confusion.len() != scores.len() {
        return Err(Error::Config(format!(
            "{} confusion matrices for {} score files",
            confusion.len(),
            scores.len()
        )));
    }
    if confusion.is_empty() && scheme != WeightScheme::W0 {
        return Err(Error::Config(format!("scheme {scheme} needs one confusion matrix per score file")));
    }
    let mut ids: Option<Vec<String>> = None;
    let mut classes: Option<Vec<String>> = None;
    let mut boes = Vec::new();
    for (i, p) in scores.iter().enumerate() {
        let f = formats::read_scores(p)?;
        same_ids(&mut ids, f.sample_ids, p)?;
        match &classes {
            None => classes = Some(f.scores.classes().to_vec()),
            Some(c) if c.as_slice() != f.scores.classes() => {
                return Err(Error::Shape(format!(
                    "{}: classes {:?} differ from {:?}",
                    p.display(),
                    f.scores.classes(),
                    c
                )))
            }
            Some(_) => {}
        }
        let w = match confusion.get(i) {
            None => WeightVector::ones(f.scores.n_classes()),
            Some(c) => {
                let cm = formats::read_confusion(c)?;
                if cm.n_classes() != f.scores.n_classes() {
                    return Err(Error::Shape(format!(
                        "{} is {}x{}, scores have {} classes",
                        c.display(),
                        cm.n_classes(),
                        cm.n_classes(),
                        f.scores.n_classes()
                    )));
                }
                build_weight(scheme, &cm)?
            }
        };
        boes.push(build_boe(&f.scores, &w)?);
    }
    Ok((ids.unwrap_or_default(), boes))
}

fn nonempty<T: Clone>(v: &[T]) -> Option<Vec<T>> {
    (!v.is_empty()).then(|| v.to_vec())
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<ExitCode> {
    let flags = RunConfig {
        datasets: nonempty(&a.dataset),
        seed: a.seed,
        classifiers: nonempty(&a.classifiers),
        scores: nonempty(&a.scores),
        schemes: nonempty(&a.schemes),
        noise_levels: nonempty(&a.noise),
        repetitions: a.repetitions,
        max_ensemble_size: a.max_size,
        output: a.output.clone(),
        retrain: a.rescore_only.then_some(false),
        defect_class: a.defect_class.clone(),
        ..Default::default()
    }
    .with_pipeline(&a.pipeline);
    let cfg = match &a.config {
        Some(p) => flags.overlay(&RunConfig::load(p)?),
        None => flags,
    };
    let datasets = cfg.datasets()?.to_vec();
    let harness = cfg.harness()?;
    let specs = cfg.classifier_specs()?;
    if specs.is_none() && datasets.len() > 1 {
        return Err(Error::Config("precomputed scores belong to exactly one dataset".into()));
    }
    let out = cfg.output();
    let mut failed = 0;
    for path in &datasets {
        match benchmark_one(path, &cfg, specs.as_deref(), &harness, &out) {
            Ok(dir) => println!("{}: report written to {}", path.display(), dir.display()),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e}", path.display());
            }
        }
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn benchmark_one(
    path: &Path,
    cfg: &RunConfig,
    specs: Option<&[crate::classifiers::ClassifierSpec]>,
    harness: &HarnessConfig,
    out: &Path,
) -> Result<PathBuf> {
    let ds = formats::read_dataset(path)?;
    let pool = match specs {
        Some(s) => PoolSource::Classifiers(s.to_vec()),
        None => {
            let mut matrices = Vec::new();
            for p in cfg.scores.as_deref().unwrap_or_default() {
                let f = formats::read_scores(p)?;
                if f.scores.classes() != ds.classes() {
                    return Err(Error::Shape(format!(
                        "{}: classes {:?} differ from the dataset's {:?}",
                        p.display(),
                        f.scores.classes(),
                        ds.classes()
                    )));
                }
                matrices.push(f.scores);
            }
            PoolSource::Scores(matrices)
        }
    };
    let mut harness = harness.clone();
    if let Some(name) = &cfg.defect_class {
        harness.defect_class = Some(
            ds.classes()
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Config(format!("defect class {name:?} is not in the dataset")))?,
        );
    }
    let report = run_statistical(&ds, &pool, &harness)?;
    let dir = out.join(&ds.name);
    formats::write_report(&dir, &report)?;
    for s in &report.noise_stats {
        println!(
            "{}: noise {} best fused accuracy {:.4} ± {:.4} over {} repetitions",
            ds.name, s.noise, s.mean_acc, s.std_acc, s.reps
        );
    }
    Ok(dir)
}

pub fn cmd_selftest(a: &SelftestArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let cfg = a.pipeline.to_config()?;
    let report = selftest::run(&cfg)?;
    print!("{}", report.render());
    let elapsed = start.elapsed();
    if report.passed() {
        println!("PASS ({} checks, {:.1} ms)", report.checks.len() + 1, elapsed.as_secs_f64() * 1e3);
        Ok(ExitCode::SUCCESS)
    } else {
        match report.first_failure() {
            Some(c) => println!(
                "FAIL at step {}: {} off by {:.5} (tolerance {})",
                c.step,
                c.quantity,
                c.max_error(),
                c.tolerance
            ),
            None => println!(
                "FAIL at step 8: predicted class {} instead of {}",
                report.predicted_class,
                selftest::EXPECTED_CLASS
            ),
        }
        Ok(ExitCode::from(EXIT_SELFTEST_FAILED))
    }
}

pub fn cmd_gen_synthetic(a: &SyntheticArgs) -> Result<()> {
    let ds = two_blobs(&BlobSpec {
        per_class: [a.majority, a.minority],
        n_features: a.features,
        separation: a.separation,
        seed: a.seed,
    })?;
    if let Some(dir) = a.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    formats::write_dataset(&a.output, &ds)
}
