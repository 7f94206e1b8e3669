use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Frame watermarking, detection and temporal tamper localization.
#[derive(Parser, Debug)]
#[command(name = "framemark", version, about, arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Key manifest written by `keygen`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Where to write the primary output; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Similarity threshold; defaults to the manifest's value.
    #[arg(long, global = true)]
    pub tau: Option<f64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate template keys and write a manifest.
    Keygen(KeygenArgs),
    /// Embed one LDPC-encoded payload word into each frame.
    Embed(EmbedArgs),
    /// Extract per-frame keys and decode their payload words.
    Extract(ExtractArgs),
    /// Score extracted bits against expected payloads. Exit 0 when the
    /// log10 p-value is below the threshold, 1 otherwise.
    Verify(VerifyArgs),
    /// Match frames to templates and explain tampering. Exit 0 when no
    /// tamper events are found, 1 otherwise.
    Localize(LocalizeArgs),
    /// Apply swap/drop/insert tampering to a key list.
    Tamper(TamperArgs),
    /// Apply one distortion to a frame directory.
    Distort(DistortArgs),
    /// Run channel simulations or localization sweeps from a config file.
    Simulate(SimulateArgs),
    /// Embed, distort and score a clip under a list of distortions.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct KeygenArgs {
    /// Number of templates M.
    #[arg(short = 'm', long, default_value_t = 16)]
    pub templates: usize,

    /// Key length d in bits. At the code length (48) keys are codewords.
    #[arg(short = 'd', long, default_value_t = 48)]
    pub length: usize,

    /// Minimum pairwise Hamming distance; defaults to d/3.
    #[arg(long)]
    pub min_distance: Option<usize>,

    /// Embedding strength.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Also write the payload word of every key, one per line.
    #[arg(long)]
    pub words_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Directory of frame_NNNN.png files.
    #[arg(long)]
    pub frames: PathBuf,

    /// Payload words, four hex digits per line, one per frame.
    #[arg(long)]
    pub payloads: PathBuf,

    /// Directory for the watermarked frames.
    #[arg(long)]
    pub frames_out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub frames: PathBuf,

    /// Also write the raw extracted keys, one hex key per line.
    #[arg(long)]
    pub keys_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "keys", required_unless_present = "keys")]
    pub frames: Option<PathBuf>,

    /// Extracted keys instead of frames.
    #[arg(long)]
    pub keys: Option<PathBuf>,

    /// Expected payload words, one per frame.
    #[arg(long)]
    pub payloads: PathBuf,

    /// Detection threshold on log10 p.
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    pub threshold: f64,

    /// Pass the extracted keys through a simulated channel preset first.
    #[arg(long)]
    pub channel: Option<String>,
}

#[derive(Args, Debug)]
pub struct LocalizeArgs {
    #[arg(long, conflicts_with = "keys")]
    pub frames: Option<PathBuf>,

    #[arg(long)]
    pub keys: Option<PathBuf>,

    /// Derive templates from these payload words instead of the manifest keys.
    #[arg(long)]
    pub payloads: Option<PathBuf>,

    /// Expected label per received frame (JSON array, -1 for inserted).
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Length of the untampered sequence; defaults to the template count.
    #[arg(long)]
    pub expected_frames: Option<usize>,

    /// Monte-Carlo threshold sweep `start:stop:step` instead of localizing input.
    #[arg(long, conflicts_with_all = ["frames", "keys", "truth"])]
    pub tau_sweep: Option<String>,

    /// Channel preset for the sweep.
    #[arg(long, default_value = "clean")]
    pub channel: String,

    /// Trials per sweep cell.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct TamperArgs {
    #[arg(long)]
    pub keys: PathBuf,

    /// Tamper specification JSON.
    #[arg(long)]
    pub spec: PathBuf,

    /// Tampered keys, one per line.
    #[arg(long)]
    pub keys_out: PathBuf,

    /// Ground truth of the tampered sequence.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistortArgs {
    #[arg(long)]
    pub frames: PathBuf,

    /// Distortion as `kind[:parameter]`, e.g. `jpeg:50` or `rotation:25`.
    #[arg(long)]
    pub spec: String,

    #[arg(long)]
    pub frames_out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,

    /// Include per-trial results in JSON output.
    #[arg(long)]
    pub per_trial: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub frames: PathBuf,

    /// Payload words; defaults to the manifest key words, cycled over frames.
    #[arg(long)]
    pub payloads: Option<PathBuf>,

    /// Comma-separated distortions; defaults to the full suite.
    #[arg(long, value_delimiter = ',')]
    pub distortions: Option<Vec<String>>,

    /// Score only the clean clip.
    #[arg(long, conflicts_with = "distortions")]
    pub clean_only: bool,
}
