//! RGB frames and indexed PNG frame directories.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, RgbImage};

use crate::error::{Error, Result};

pub const MIN_DIMENSION: usize = 64;
/// Largest side accepted when decoding untrusted image bytes.
pub const MAX_DECODE_DIMENSION: u32 = 8192;
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// 8-bit RGB frame, row-major, at least 64×64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width < MIN_DIMENSION || height < MIN_DIMENSION {
            return Err(Error::FrameTooSmall { width, height, min_width: MIN_DIMENSION, min_height: MIN_DIMENSION });
        }
        if samples.len() != width * height * 3 {
            return Err(Error::LengthMismatch { expected: width * height * 3, actual: samples.len() });
        }
        Ok(Self { width, height, samples })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, rgb.iter().copied().cycle().take(width * height * 3).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.samples[i], self.samples[i + 1], self.samples[i + 2]]
    }

    pub fn luma(&self) -> Vec<f64> {
        self.samples.chunks_exact(3).map(|p| p.iter().zip(LUMA_WEIGHTS).map(|(&c, w)| c as f64 * w).sum()).collect()
    }

    pub fn to_image(&self) -> RgbImage {
        ImageBuffer::from_raw(self.width as u32, self.height as u32, self.samples.clone())
            .expect("sample count checked at construction")
    }

    pub fn from_image(img: RgbImage) -> Result<Self> {
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                samples.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_image(image::open(path)?.to_rgb8())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_image().save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// Decodes PNG (or any format the image crate sniffs) from memory,
    /// refusing images wider or taller than [`MAX_DECODE_DIMENSION`].
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut reader = image::ImageReader::new(std::io::Cursor::new(bytes)).with_guessed_format()?;
        let mut limits = image::Limits::default();
        limits.max_image_width = Some(MAX_DECODE_DIMENSION);
        limits.max_image_height = Some(MAX_DECODE_DIMENSION);
        reader.limits(limits);
        Self::from_image(reader.decode()?.to_rgb8())
    }

    /// Center-crops to a square and resamples to `size`×`size`.
    pub fn square_resized(&self, size: usize) -> Result<Self> {
        let side = self.width.min(self.height) as u32;
        let x0 = (self.width as u32 - side) / 2;
        let y0 = (self.height as u32 - side) / 2;
        let img = image::imageops::crop_imm(&self.to_image(), x0, y0, side, side).to_image();
        let resized = image::imageops::resize(&img, size as u32, size as u32, image::imageops::FilterType::Triangle);
        Self::from_image(resized)
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.png")
}

/// Paths of `frame_NNNN.png` files in `dir`, in index order.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut indexed: Vec<(usize, PathBuf)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let index = name.strip_prefix("frame_")?.strip_suffix(".png")?.parse().ok()?;
            Some((index, e.path()))
        })
        .collect();
    if indexed.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    indexed.sort_by_key(|(i, _)| *i);
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

pub fn read_frames_dir(dir: &Path) -> Result<Vec<Frame>> {
    list_frame_files(dir)?.iter().map(|p| Frame::load(p)).collect()
}

pub fn write_frames_dir(dir: &Path, frames: &[Frame]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, f) in frames.iter().enumerate() {
        f.save_png(&dir.join(frame_file_name(i)))?;
    }
    Ok(())
}

/// PSNR in dB between equally sized frames; infinite when identical.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::LengthMismatch { expected: a.samples.len(), actual: b.samples.len() });
    }
    let mse = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.samples.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (255.0f64 * 255.0 / mse).log10() })
}

pub(crate) fn to_rgb_f32(f: &Frame) -> Vec<f32> {
    f.samples.iter().map(|&v| v as f32 / 255.0).collect()
}

pub(crate) fn from_rgb_f32(width: usize, height: usize, data: &[f32]) -> Result<Frame> {
    Frame::new(width, height, data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undersized_frames_are_rejected() {
        assert!(matches!(Frame::filled(63, 64, [0; 3]), Err(Error::FrameTooSmall { .. })));
        assert!(Frame::new(64, 64, vec![0; 10]).is_err());
    }

    #[test]
    fn luma_weights() {
        let f = Frame::filled(64, 64, [100, 200, 50]).unwrap();
        let expected = 0.299 * 100.0 + 0.587 * 200.0 + 0.114 * 50.0;
        assert!(f.luma().iter().all(|&l| (l - expected).abs() < 1e-9));
    }

    #[test]
    fn png_dir_roundtrip() {
        let dir = std::env::temp_dir().join(format!("framemark-frames-{}", std::process::id()));
        let frames: Vec<Frame> =
            (0..3).map(|i| Frame::from_fn(64, 72, |x, y| [(x + i) as u8, y as u8, 7]).unwrap()).collect();
        write_frames_dir(&dir, &frames).unwrap();
        assert_eq!(read_frames_dir(&dir).unwrap(), frames);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let f = Frame::filled(64, 64, [1, 2, 3]).unwrap();
        assert_eq!(psnr(&f, &f).unwrap(), f64::INFINITY);
        let g = Frame::filled(64, 64, [2, 3, 4]).unwrap();
        assert!((psnr(&f, &g).unwrap() - 48.1308).abs() < 1e-3);
    }
}
