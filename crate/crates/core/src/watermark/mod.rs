//! Per-frame invisible watermarking and the distortion benchmark.

mod bench;
pub mod dct;
mod distort;
mod embed;
mod frame;

pub use bench::{run_robustness_bench, BenchReport, BenchRow, BenchStatus};
pub use distort::{standard_suite, DistortOutcome, DistortionSpec, ENCODER_ENV};
pub use embed::{
    correlations, embed_frame, extract_frame, watermark_delta, EmbedParams, DEFAULT_ALPHA, DEFAULT_BITS_PER_FRAME,
    DEFAULT_MIDBAND, DEFAULT_PN_SEED,
};
pub use frame::{
    frame_file_name, list_frame_files, psnr, read_frames_dir, write_frames_dir, Frame, LUMA_WEIGHTS, MIN_DIMENSION,
};
