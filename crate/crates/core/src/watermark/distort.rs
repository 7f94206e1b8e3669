//! Frame distortions for robustness benchmarking.
//!
//! Photometric adjustments follow the usual blend convention on [0, 1]
//! floats: `out = f·img + (1 − f)·degenerate`, clamped, then re-quantized.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use image::imageops::{self, FilterType};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::frame::{from_rgb_f32, read_frames_dir, to_rgb_f32, write_frames_dir, Frame};
use crate::error::{Error, Result};
use crate::rng;

/// Environment variable naming the external video round-trip program.
///
/// It is invoked as `<program> <input_dir> <output_dir>` with input frames
/// named `frame_NNNN.png` and must write the same number of frames, under
/// the same names, to the output directory.
pub const ENCODER_ENV: &str = "FRAMEMARK_ENCODER";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum DistortionSpec {
    Resize(f64),
    Jpeg(u8),
    Crop(f64),
    Rotation(f64),
    Brightness(f64),
    Contrast(f64),
    Saturation(f64),
    Sharpness(f64),
    GaussianNoise { std: f64, seed: u64 },
    Mpeg4,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistortOutcome {
    Applied(Vec<Frame>),
    Skipped(String),
}

/// The eleven-entry robustness suite.
pub fn standard_suite(noise_seed: u64) -> Vec<DistortionSpec> {
    use DistortionSpec::*;
    vec![
        Resize(0.7),
        Jpeg(50),
        Crop(0.7),
        Rotation(25.0),
        Rotation(90.0),
        Brightness(2.0),
        Contrast(2.0),
        Saturation(2.0),
        Sharpness(2.0),
        GaussianNoise { std: 0.1, seed: noise_seed },
        Mpeg4,
    ]
}

impl DistortionSpec {
    pub fn validate(&self) -> Result<()> {
        use DistortionSpec::*;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Resize(f) | Crop(f) if !(f > 0.0 && f <= 1.0) => {
                bad(format!("{} fraction must lie in (0, 1], got {f}", self.kind()))
            }
            Jpeg(q) if !(1..=100).contains(&q) => bad(format!("jpeg quality must lie in 1..=100, got {q}")),
            Rotation(d) if !d.is_finite() => bad(format!("rotation must be finite, got {d}")),
            Brightness(f) | Contrast(f) | Saturation(f) | Sharpness(f) if !(f.is_finite() && f >= 0.0) => {
                bad(format!("{} factor must be finite and >= 0, got {f}", self.kind()))
            }
            GaussianNoise { std, .. } if !(std.is_finite() && std >= 0.0) => {
                bad(format!("noise std must be finite and >= 0, got {std}"))
            }
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        use DistortionSpec::*;
        match self {
            Resize(_) => "resize",
            Jpeg(_) => "jpeg",
            Crop(_) => "crop",
            Rotation(_) => "rotation",
            Brightness(_) => "brightness",
            Contrast(_) => "contrast",
            Saturation(_) => "saturation",
            Sharpness(_) => "sharpness",
            GaussianNoise { .. } => "gaussian_noise",
            Mpeg4 => "mpeg4",
        }
    }

    /// Resize, crop and rotation move pixels; everything else keeps geometry.
    pub fn is_geometric(&self) -> bool {
        matches!(self, Self::Resize(_) | Self::Crop(_) | Self::Rotation(_))
    }

    /// Distorts one frame. `index` selects the noise stream.
    pub fn apply_frame(&self, frame: &Frame, index: usize) -> Result<Frame> {
        self.validate()?;
        use DistortionSpec::*;
        match *self {
            Resize(f) => {
                let (w, h) = scaled(frame, f);
                if (w, h) == (frame.width(), frame.height()) {
                    return Ok(frame.clone());
                }
                Frame::from_image(imageops::resize(&frame.to_image(), w as u32, h as u32, FilterType::Triangle))
            }
            Jpeg(q) => jpeg_roundtrip(frame, q),
            Crop(f) => {
                let (w, h) = scaled(frame, f);
                let img = frame.to_image();
                let x0 = ((frame.width() - w) / 2) as u32;
                let y0 = ((frame.height() - h) / 2) as u32;
                Frame::from_image(imageops::crop_imm(&img, x0, y0, w as u32, h as u32).to_image())
            }
            Rotation(d) => rotate(frame, d),
            Brightness(f) => blend_with(frame, f, |_, _| [0.0; 3]),
            Contrast(f) => {
                let luma = frame.luma();
                let mean = (luma.iter().sum::<f64>() / luma.len() as f64 / 255.0) as f32;
                blend_with(frame, f, |_, _| [mean; 3])
            }
            Saturation(f) => {
                let luma = frame.luma();
                let w = frame.width();
                blend_with(frame, f, |x, y| [(luma[y * w + x] / 255.0) as f32; 3])
            }
            Sharpness(f) => {
                let blurred = smooth(frame);
                let w = frame.width();
                blend_with(frame, f, |x, y| {
                    let i = (y * w + x) * 3;
                    [blurred[i], blurred[i + 1], blurred[i + 2]]
                })
            }
            GaussianNoise { std, seed } => {
                let normal = Normal::new(0.0f32, std as f32).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut r = rng::stream("gaussian-noise", seed, &[index as u64]);
                let mut data = to_rgb_f32(frame);
                for v in &mut data {
                    *v += normal.sample(&mut r);
                }
                from_rgb_f32(frame.width(), frame.height(), &data)
            }
            Mpeg4 => Err(Error::UnsupportedDistortion("mpeg4 operates on whole clips; use apply_clip".into())),
        }
    }

    /// Distorts a clip. The external-encoder entry is skipped, not failed,
    /// when no encoder is configured.
    pub fn apply_clip(&self, frames: &[Frame]) -> Result<DistortOutcome> {
        if frames.is_empty() {
            return Err(Error::Empty("frame list"));
        }
        match self {
            Self::Mpeg4 => match std::env::var_os(ENCODER_ENV) {
                Some(program) if !program.is_empty() => {
                    external_roundtrip(Path::new(&program), frames).map(DistortOutcome::Applied)
                }
                _ => Ok(DistortOutcome::Skipped(format!("{ENCODER_ENV} is not set"))),
            },
            spec => frames
                .iter()
                .enumerate()
                .map(|(i, f)| spec.apply_frame(f, i))
                .collect::<Result<Vec<_>>>()
                .map(DistortOutcome::Applied),
        }
    }
}

impl fmt::Display for DistortionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistortionSpec::*;
        match self {
            Resize(v) | Crop(v) | Rotation(v) | Brightness(v) | Contrast(v) | Saturation(v) | Sharpness(v) => {
                write!(f, "{}:{v}", self.kind())
            }
            Jpeg(q) => write!(f, "jpeg:{q}"),
            GaussianNoise { std, seed } => write!(f, "gaussian_noise:{std}:{seed}"),
            Mpeg4 => write!(f, "mpeg4"),
        }
    }
}

/// Parses `kind[:parameter[:seed]]`, the form produced by `Display`.
impl FromStr for DistortionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let unsupported = || Error::UnsupportedDistortion(s.to_string());
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(unsupported)?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("{s}: {e}")))
        };
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(unsupported()) };
        use DistortionSpec::*;
        let spec = match kind {
            "resize" => arity(1).and_then(|_| num(0)).map(Resize)?,
            "crop" => arity(1).and_then(|_| num(0)).map(Crop)?,
            "rotation" => arity(1).and_then(|_| num(0)).map(Rotation)?,
            "brightness" => arity(1).and_then(|_| num(0)).map(Brightness)?,
            "contrast" => arity(1).and_then(|_| num(0)).map(Contrast)?,
            "saturation" => arity(1).and_then(|_| num(0)).map(Saturation)?,
            "sharpness" => arity(1).and_then(|_| num(0)).map(Sharpness)?,
            "jpeg" => {
                arity(1)?;
                Jpeg(args[0].parse().map_err(|e| Error::InvalidParameter(format!("{s}: {e}")))?)
            }
            "gaussian_noise" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(unsupported());
                }
                let seed = match args.get(1) {
                    Some(v) => v.parse().map_err(|e| Error::InvalidParameter(format!("{s}: {e}")))?,
                    None => 0,
                };
                GaussianNoise { std: num(0)?, seed }
            }
            "mpeg4" => arity(0).map(|_| Mpeg4)?,
            _ => return Err(unsupported()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn scaled(frame: &Frame, f: f64) -> (usize, usize) {
    let s = |d: usize| ((d as f64 * f).round() as usize).max(1);
    (s(frame.width()), s(frame.height()))
}

fn jpeg_roundtrip(frame: &Frame, quality: u8) -> Result<Frame> {
    let mut buf = Vec::new();
    image::codecs::jpeg::JpegEncoder::new_with_quality(&mut buf, quality).encode_image(&frame.to_image())?;
    Frame::decode(&buf)
}

/// Counter-clockwise rotation about the center on a same-size canvas with
/// black fill. Multiples of 90° are exact pixel permutations.
fn rotate(frame: &Frame, degrees: f64) -> Result<Frame> {
    let turns = degrees / 90.0;
    if turns == turns.round() {
        let img = frame.to_image();
        return Frame::from_image(match (turns as i64).rem_euclid(4) {
            0 => img,
            1 => imageops::rotate270(&img),
            2 => imageops::rotate180(&img),
            _ => imageops::rotate90(&img),
        });
    }
    let (w, h) = (frame.width(), frame.height());
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let src = frame.samples();
    let at = |x: i64, y: i64, c: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            src[(y as usize * w + x as usize) * 3 + c] as f64
        }
    };
    Frame::from_fn(w, h, |x, y| {
        // Inverse map: rotate the output coordinate clockwise into the source.
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = cos * dx - sin * dy + cx;
        let sy = sin * dx + cos * dy + cy;
        if sx < -0.5 || sy < -0.5 || sx > w as f64 - 0.5 || sy > h as f64 - 0.5 {
            return [0; 3];
        }
        let x0 = sx.floor() as i64;
        let y0 = sy.floor() as i64;
        let fx = sx - x0 as f64;
        let fy = sy - y0 as f64;
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let top = at(x0, y0, c) * (1.0 - fx) + at(x0 + 1, y0, c) * fx;
            let bottom = at(x0, y0 + 1, c) * (1.0 - fx) + at(x0 + 1, y0 + 1, c) * fx;
            *o = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
        }
        out
    })
}

fn blend_with(frame: &Frame, factor: f64, degenerate: impl Fn(usize, usize) -> [f32; 3]) -> Result<Frame> {
    let f = factor as f32;
    let w = frame.width();
    let mut data = to_rgb_f32(frame);
    for (i, px) in data.chunks_exact_mut(3).enumerate() {
        let d = degenerate(i % w, i / w);
        for (v, dv) in px.iter_mut().zip(d) {
            *v = (f * *v + (1.0 - f) * dv).clamp(0.0, 1.0);
        }
    }
    from_rgb_f32(w, frame.height(), &data)
}

/// 3×3 smoothing with center weight 5 over 13; border pixels are kept.
fn smooth(frame: &Frame) -> Vec<f32> {
    let (w, h) = (frame.width(), frame.height());
    let src = to_rgb_f32(frame);
    let mut out = src.clone();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            for c in 0..3 {
                let mut acc = 0.0;
                for dy in 0..3 {
                    for dx in 0..3 {
                        let weight = if dx == 1 && dy == 1 { 5.0 } else { 1.0 };
                        acc += weight * src[((y + dy - 1) * w + (x + dx - 1)) * 3 + c];
                    }
                }
                out[(y * w + x) * 3 + c] = acc / 13.0;
            }
        }
    }
    out
}

fn scratch_dir(tag: &str) -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("framemark-{tag}-{}-{n}", std::process::id()))
}

fn external_roundtrip(program: &Path, frames: &[Frame]) -> Result<Vec<Frame>> {
    let input = scratch_dir("enc-in");
    let output = scratch_dir("enc-out");
    let result = (|| {
        write_frames_dir(&input, frames)?;
        std::fs::create_dir_all(&output)?;
        let status = Command::new(program)
            .arg(&input)
            .arg(&output)
            .status()
            .map_err(|e| Error::Encoder(format!("{}: {e}", program.display())))?;
        if !status.success() {
            return Err(Error::Encoder(format!("{} exited with {status}", program.display())));
        }
        let back = read_frames_dir(&output)?;
        if back.len() != frames.len() {
            return Err(Error::Encoder(format!("expected {} frames back, got {}", frames.len(), back.len())));
        }
        Ok(back)
    })();
    let _ = std::fs::remove_dir_all(&input);
    let _ = std::fs::remove_dir_all(&output);
    result
}
