//! Embed a clip, distort it, and score recovery per distortion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distort::{DistortOutcome, DistortionSpec};
use super::embed::{embed_frame, extract_frame, EmbedParams};
use super::frame::{psnr, Frame};
use crate::bits::BitString;
use crate::codec::{Codeword, DataWord, LdpcCode};
use crate::detection::DetectionReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchStatus {
    Applied,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub distortion: String,
    pub status: BenchStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frames: usize,
    /// Mean PSNR of marked frames against the originals, in dB.
    pub mean_psnr: f64,
    pub clean: BenchRow,
    pub distortions: Vec<BenchRow>,
}

impl BenchReport {
    /// Clean row followed by one row per distortion.
    pub fn rows(&self) -> impl Iterator<Item = &BenchRow> {
        std::iter::once(&self.clean).chain(&self.distortions)
    }
}

fn score(
    label: String,
    frames: &[Frame],
    sent: &[(DataWord, Codeword)],
    code: &LdpcCode,
    params: &EmbedParams,
) -> Result<BenchRow> {
    let extracted: Vec<BitString> = frames.par_iter().map(|f| extract_frame(f, params)).collect::<Result<_>>()?;
    let mut total = 0;
    let mut correct = 0;
    let mut words = 0;
    for ((word, codeword), got) in sent.iter().zip(&extracted) {
        correct += codeword.bits().matching_bits(got)?;
        total += got.len();
        if code.decode(got)?.word == *word {
            words += 1;
        }
    }
    let detection = DetectionReport::new(total, correct as f64 / total as f64, Some(words as f64 / sent.len() as f64))?;
    Ok(BenchRow { distortion: label, status: BenchStatus::Applied, note: None, detection: Some(detection) })
}

/// Embeds `payloads[i]` (LDPC-encoded) into `frames[i]`, then scores
/// extraction on the clean marked clip and after each distortion.
pub fn run_robustness_bench(
    frames: &[Frame],
    payloads: &[DataWord],
    code: &LdpcCode,
    params: &EmbedParams,
    distortions: &[DistortionSpec],
) -> Result<BenchReport> {
    if frames.is_empty() {
        return Err(Error::Empty("frame list"));
    }
    if payloads.len() != frames.len() {
        return Err(Error::LengthMismatch { expected: frames.len(), actual: payloads.len() });
    }
    if params.bits_per_frame != code.n_code() {
        return Err(Error::InvalidParameter(format!(
            "bits_per_frame {} differs from code length {}",
            params.bits_per_frame,
            code.n_code()
        )));
    }
    let sent: Vec<(DataWord, Codeword)> =
        payloads.iter().map(|w| Ok((w.clone(), code.encode(w)?))).collect::<Result<_>>()?;
    let marked: Vec<Frame> =
        frames.par_iter().zip(&sent).map(|(f, (_, c))| embed_frame(f, c.bits(), params)).collect::<Result<_>>()?;
    let mean_psnr = frames.iter().zip(&marked).map(|(a, b)| psnr(a, b)).sum::<Result<f64>>()? / frames.len() as f64;

    let clean = score("clean".into(), &marked, &sent, code, params)?;
    let distortions = distortions
        .iter()
        .map(|spec| match spec.apply_clip(&marked)? {
            DistortOutcome::Applied(out) => score(spec.to_string(), &out, &sent, code, params),
            DistortOutcome::Skipped(reason) => Ok(BenchRow {
                distortion: spec.to_string(),
                status: BenchStatus::Skipped,
                note: Some(reason),
                detection: None,
            }),
        })
        .collect::<Result<_>>()?;
    Ok(BenchReport { frames: frames.len(), mean_psnr, clean, distortions })
}
