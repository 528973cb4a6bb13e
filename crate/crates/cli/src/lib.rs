//! `eigengesture` command-line front end.
//!
//! Exit codes: 0 success (and Known for `recognize`), 1 Unknown, 2 usage,
//! 3 I/O or format errors, 4 training errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eigengesture::bench::{time_direct_path, time_trick_path, DIRECT_GUARD_PIXELS};
use eigengesture::format::format_f64;
use eigengesture::imageio::{load_image_vector, scan_dataset};
use eigengesture::modelstore::{self, read_header};
use eigengesture::trainer::{train_with, TrainError};
use eigengesture::{compute_metrics, evaluate, recognize, Decision, EigenspaceModel, Execution, KPolicy, Matrix, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_TRAIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "eigengesture", version, about = "Eigenspace gesture-image recognizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an eigenspace model from a labeled image directory
    Train(TrainArgs),
    /// Recognize a single image
    Recognize(RecognizeArgs),
    /// Evaluate a model on a labeled image directory
    Evaluate(EvaluateArgs),
    /// Time the reduced covariance route (and optionally the direct one) on random data
    Bench(BenchArgs),
    /// Print the header and summary of a model file
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset root laid out as <root>/<label>/<frame>.{pgm,ppm,pnm}
    #[arg(long)]
    data: PathBuf,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    /// Side length n; frames are resampled to n×n
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..=65535))]
    size: u32,
    /// Keep the fewest eigenimages reaching this fraction of the eigenvalue sum
    #[arg(long, conflicts_with = "k")]
    energy: Option<f64>,
    /// Keep exactly this many eigenimages (capped at the number available)
    #[arg(long)]
    k: Option<usize>,
    /// Threshold as a fraction of the largest pairwise training distance
    #[arg(long, default_value_t = 0.5)]
    threshold_factor: f64,
}

#[derive(Debug, Args)]
struct RecognizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Print the report as a JSON object
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Pixels per synthetic image (N²)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pixels: u64,
    /// Number of synthetic images (M)
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    images: u64,
    /// Also decompose the full N²×N² covariance
    #[arg(long)]
    direct: bool,
    /// Allow --direct above the size guard
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

enum Failure {
    Usage(String),
    Io(String),
    Train(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Train(_) => EXIT_TRAIN,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Train(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure::Io(e.to_string())
}

fn train_err(e: TrainError) -> Failure {
    match e {
        TrainError::InvalidConfig(_) => Failure::Usage(e.to_string()),
        // a vector-length mismatch means the inputs do not fit the model
        TrainError::Linalg(eigengesture::linalg::LinalgError::DimensionMismatch(_)) => Failure::Io(e.to_string()),
        _ => Failure::Train(e.to_string()),
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// regular output to `out` and diagnostics to `err`. Returns the exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => run_train(a, out),
        Command::Recognize(a) => run_recognize(a, out),
        Command::Evaluate(a) => run_evaluate(a, out),
        Command::Bench(a) => run_bench(a, out),
        Command::Inspect(a) => run_inspect(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<EigenspaceModel, Failure> {
    let mut file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    modelstore::load_model(&mut file).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn side_of(model: &EigenspaceModel) -> Result<usize, Failure> {
    model
        .side()
        .ok_or_else(|| Failure::Io(format!("model has {} pixels, which is not a square image", model.n2())))
}

fn run_train(a: TrainArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let k_policy = match (a.k, a.energy) {
        (Some(k), _) => KPolicy::ExplicitK(k),
        (None, Some(f)) => KPolicy::EnergyFraction(f),
        (None, None) => TrainConfig::default().k_policy,
    };
    let config = TrainConfig { k_policy, threshold_factor: a.threshold_factor, ..TrainConfig::default() };
    config.validate().map_err(train_err)?;

    let manifest = scan_dataset(&a.data, a.size as usize).map_err(io_err)?;
    let outcome = train_with(&manifest, &config, Execution::default()).map_err(train_err)?;
    let model = &outcome.model;

    let file = File::create(&a.out).map_err(|e| Failure::Io(format!("{}: {e}", a.out.display())))?;
    let mut sink = BufWriter::new(file);
    let bytes = modelstore::save_model(model, &mut sink).map_err(io_err)?;

    writeln!(out, "samples={}", model.m())?;
    writeln!(out, "labels={}", manifest.labels().len())?;
    writeln!(out, "k={}", model.k())?;
    writeln!(out, "energy={}", format_f64(outcome.energy_fraction()))?;
    writeln!(out, "threshold={}", format_f64(model.threshold()))?;
    writeln!(out, "model={} bytes={bytes}", a.out.display())?;
    Ok(EXIT_OK)
}

fn run_recognize(a: RecognizeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load(&a.model)?;
    let image = load_image_vector(&a.image, side_of(&model)?).map_err(io_err)?;
    match recognize(&model, &image).map_err(train_err)? {
        Decision::Known { label, distance, .. } => {
            writeln!(out, "KNOWN {label} distance={}", format_f64(distance))?;
            Ok(EXIT_OK)
        }
        Decision::Unknown { distance } => {
            writeln!(out, "UNKNOWN distance={}", format_f64(distance))?;
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn run_evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load(&a.model)?;
    let testset = scan_dataset(&a.data, side_of(&model)?).map_err(io_err)?;
    let (tally, _) = evaluate(&model, &testset).map_err(train_err)?;
    let report = compute_metrics(&tally);
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_text())?;
    }
    Ok(EXIT_OK)
}

fn seconds(d: std::time::Duration) -> String {
    format_f64(d.as_secs_f64())
}

fn run_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (pixels, images) = (a.pixels as usize, a.images as usize);
    if a.direct && pixels > DIRECT_GUARD_PIXELS && !a.force {
        return Err(Failure::Usage(format!(
            "--direct with {pixels} pixels would build a {pixels}x{pixels} covariance; \
             refusing above {DIRECT_GUARD_PIXELS} pixels without --force"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let data = (0..pixels * images).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a_mat = Matrix::new(pixels, images, data).map_err(|e| Failure::Usage(e.to_string()))?;

    let exec = Execution::default();
    writeln!(out, "pixels={pixels} images={images} parallel={}", exec.is_parallel())?;
    let t = time_trick_path(&a_mat, exec).map_err(train_err)?;
    writeln!(out, "trick.covariance_seconds={}", seconds(t.covariance))?;
    writeln!(out, "trick.eigen_seconds={}", seconds(t.eigen))?;
    writeln!(out, "trick.lift_seconds={}", seconds(t.lift))?;
    writeln!(out, "trick.total_seconds={}", seconds(t.total()))?;
    writeln!(out, "trick.components={}", t.components)?;
    if a.direct {
        let d = time_direct_path(&a_mat, exec).map_err(|e| Failure::Train(e.to_string()))?;
        writeln!(out, "direct.covariance_seconds={}", seconds(d.covariance))?;
        writeln!(out, "direct.eigen_seconds={}", seconds(d.eigen))?;
        writeln!(out, "direct.total_seconds={}", seconds(d.total()))?;
    }
    Ok(EXIT_OK)
}

fn run_inspect(a: InspectArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = std::fs::read(&a.model).map_err(|e| Failure::Io(format!("{}: {e}", a.model.display())))?;
    let header = read_header(&bytes).map_err(io_err)?;
    let model = modelstore::decode_model(&bytes).map_err(io_err)?;
    writeln!(out, "magic={}", String::from_utf8_lossy(&header.magic))?;
    writeln!(out, "version={}", header.version)?;
    writeln!(out, "n2={}", header.n2)?;
    writeln!(out, "m={}", header.m)?;
    writeln!(out, "k={}", header.k)?;
    writeln!(out, "threshold={}", format_f64(model.threshold()))?;
    let values: Vec<String> = model.eigenvalues().iter().map(|&x| format_f64(x)).collect();
    writeln!(out, "eigenvalues={}", values.join(","))?;
    let mut labels: Vec<&str> = model.labels().iter().map(String::as_str).collect();
    labels.dedup();
    writeln!(out, "labels={}", labels.join(","))?;
    Ok(EXIT_OK)
}
