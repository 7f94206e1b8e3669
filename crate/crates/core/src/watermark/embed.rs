//! Block-DCT spread-spectrum embedding of one codeword per frame.
//!
//! The frame is tiled into 8×8 luma blocks. A seeded permutation spreads the
//! blocks over the payload bits, and each block carries its bit as ±alpha
//! times a seeded ±1 chip on a fixed set of mid-band coefficients. The pixel
//! delta is added equally to R, G and B, so it lands on luma unchanged.
//! Extraction correlates the received mid-band coefficients with the chips
//! and takes the sign per bit.
//!
//! The embedder also subtracts the host's own projection onto each bit's
//! chip pattern (capped at alpha), so the host image does not bias the
//! correlation of an undistorted frame.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dct::{self, N};
use super::frame::{Frame, MIN_DIMENSION};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_BITS_PER_FRAME: usize = 48;
pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_PN_SEED: u64 = 0x5eed;

/// Zig-zag positions 3 through 14 of an 8×8 block, as (row, column).
pub const DEFAULT_MIDBAND: [(usize, usize); 12] =
    [(2, 0), (1, 1), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    pub bits_per_frame: usize,
    pub block_size: usize,
    pub alpha: f64,
    pub pn_seed: u64,
    pub midband: Vec<(usize, usize)>,
    /// Fraction of the host projection removed per bit, in [0, 1].
    #[serde(default = "default_host_rejection")]
    pub host_rejection: f64,
}

fn default_host_rejection() -> f64 {
    1.0
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            bits_per_frame: DEFAULT_BITS_PER_FRAME,
            block_size: N,
            alpha: DEFAULT_ALPHA,
            pn_seed: DEFAULT_PN_SEED,
            midband: DEFAULT_MIDBAND.to_vec(),
            host_rejection: default_host_rejection(),
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size != N {
            return Err(Error::InvalidParameter(format!("block_size must be {N}, got {}", self.block_size)));
        }
        if self.bits_per_frame == 0 {
            return Err(Error::InvalidParameter("bits_per_frame must be >= 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.host_rejection) {
            return Err(Error::InvalidParameter(format!(
                "host_rejection must lie in [0, 1], got {}",
                self.host_rejection
            )));
        }
        if self.midband.is_empty() {
            return Err(Error::InvalidParameter("midband position list is empty".into()));
        }
        for (i, &(u, v)) in self.midband.iter().enumerate() {
            if u >= N || v >= N || (u, v) == (0, 0) {
                return Err(Error::InvalidParameter(format!("midband position ({u}, {v}) is not an AC coefficient")));
            }
            if self.midband[..i].contains(&(u, v)) {
                return Err(Error::InvalidParameter(format!("midband position ({u}, {v}) repeated")));
            }
        }
        Ok(())
    }

    /// Smallest square frame side that gives every bit at least one block.
    pub fn min_side(&self) -> usize {
        let blocks = (self.bits_per_frame as f64).sqrt().ceil() as usize;
        (blocks * N).max(MIN_DIMENSION)
    }
}

/// Seeded block-to-bit assignment and chips for one frame geometry.
struct Layout {
    blocks_x: usize,
    blocks_y: usize,
    bit_of_block: Vec<usize>,
    chips: Vec<f64>,
    /// Pixel-domain basis image of each mid-band coefficient.
    basis: Vec<[[f64; N]; N]>,
}

impl Layout {
    fn new(params: &EmbedParams, width: usize, height: usize) -> Result<Self> {
        params.validate()?;
        let blocks_x = width / N;
        let blocks_y = height / N;
        let count = blocks_x * blocks_y;
        if count < params.bits_per_frame {
            let side = params.min_side();
            return Err(Error::FrameTooSmall { width, height, min_width: side, min_height: side });
        }
        let geometry = [blocks_x as u64, blocks_y as u64];
        let mut order: Vec<usize> = (0..count).collect();
        order.shuffle(&mut rng::stream("block-groups", params.pn_seed, &geometry));
        let mut bit_of_block = vec![0; count];
        for (slot, &block) in order.iter().enumerate() {
            bit_of_block[block] = slot % params.bits_per_frame;
        }
        let mut chip_rng = rng::stream("pn", params.pn_seed, &geometry);
        let chips =
            (0..count * params.midband.len()).map(|_| if chip_rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let basis = params
            .midband
            .iter()
            .map(|&(u, v)| {
                let mut c = [[0.0; N]; N];
                c[u][v] = 1.0;
                dct::inverse(&c)
            })
            .collect();
        Ok(Self { blocks_x, blocks_y, bit_of_block, chips, basis })
    }

    fn block_delta(&self, block: usize, amplitude: f64) -> [[f64; N]; N] {
        let p = self.basis.len();
        let mut d = [[0.0; N]; N];
        for (k, b) in self.basis.iter().enumerate() {
            let w = amplitude * self.chips[block * p + k];
            for r in 0..N {
                for c in 0..N {
                    d[r][c] += w * b[r][c];
                }
            }
        }
        d
    }
}

fn check_payload(params: &EmbedParams, bits: &BitString) -> Result<()> {
    if bits.len() != params.bits_per_frame {
        return Err(Error::LengthMismatch { expected: params.bits_per_frame, actual: bits.len() });
    }
    Ok(())
}

/// Luma-domain spread-spectrum pattern for `bits` on a flat host, row-major.
pub fn watermark_delta(params: &EmbedParams, width: usize, height: usize, bits: &BitString) -> Result<Vec<f64>> {
    check_payload(params, bits)?;
    let layout = Layout::new(params, width, height)?;
    Ok(render(
        &layout,
        width,
        height,
        |block| {
            if bits.get(layout.bit_of_block[block]) {
                params.alpha
            } else {
                -params.alpha
            }
        },
    ))
}

fn render(layout: &Layout, width: usize, height: usize, amplitude: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut delta = vec![0.0; width * height];
    for by in 0..layout.blocks_y {
        for bx in 0..layout.blocks_x {
            let block = by * layout.blocks_x + bx;
            let d = layout.block_delta(block, amplitude(block));
            for (r, row) in d.iter().enumerate() {
                let base = (by * N + r) * width + bx * N;
                delta[base..base + N].copy_from_slice(row);
            }
        }
    }
    delta
}

pub fn embed_frame(frame: &Frame, bits: &BitString, params: &EmbedParams) -> Result<Frame> {
    check_payload(params, bits)?;
    let (width, height) = (frame.width(), frame.height());
    let layout = Layout::new(params, width, height)?;
    let scores = correlate(&layout, frame, params.bits_per_frame);
    let mut group_size = vec![0usize; params.bits_per_frame];
    for &g in &layout.bit_of_block {
        group_size[g] += 1;
    }
    let amplitudes: Vec<f64> = (0..params.bits_per_frame)
        .map(|g| {
            let target = if bits.get(g) { params.alpha } else { -params.alpha };
            // Mean host coefficient along the chip pattern of bit g.
            let host = scores[g] / (group_size[g] * layout.basis.len()) as f64;
            target - (params.host_rejection * host).clamp(-params.alpha, params.alpha)
        })
        .collect();
    let delta = render(&layout, width, height, |block| amplitudes[layout.bit_of_block[block]]);
    let samples = frame
        .samples()
        .chunks_exact(3)
        .zip(&delta)
        .flat_map(|(px, &d)| px.iter().map(move |&c| (c as f64 + d).round().clamp(0.0, 255.0) as u8))
        .collect();
    Frame::new(width, height, samples)
}

/// Per-bit correlation scores; positive means 1.
pub fn correlations(frame: &Frame, params: &EmbedParams) -> Result<Vec<f64>> {
    let layout = Layout::new(params, frame.width(), frame.height())?;
    Ok(correlate(&layout, frame, params.bits_per_frame))
}

fn correlate(layout: &Layout, frame: &Frame, bits: usize) -> Vec<f64> {
    let luma = frame.luma();
    let width = frame.width();
    let p = layout.basis.len();
    let mut score = vec![0.0; bits];
    for by in 0..layout.blocks_y {
        for bx in 0..layout.blocks_x {
            let block = by * layout.blocks_x + bx;
            let mut acc = 0.0;
            for (k, b) in layout.basis.iter().enumerate() {
                // Orthonormal basis: the coefficient is the inner product.
                let mut coeff = 0.0;
                for (r, brow) in b.iter().enumerate() {
                    let base = (by * N + r) * width + bx * N;
                    coeff += brow.iter().zip(&luma[base..base + N]).map(|(x, y)| x * y).sum::<f64>();
                }
                acc += coeff * layout.chips[block * p + k];
            }
            score[layout.bit_of_block[block]] += acc;
        }
    }
    score
}

/// Correlations this close to zero are rounding residue and count as ties.
const TIE_TOLERANCE: f64 = 1e-7;

/// Recovers the payload bits; a tied correlation reads as 0.
pub fn extract_frame(frame: &Frame, params: &EmbedParams) -> Result<BitString> {
    BitString::new(correlations(frame, params)?.into_iter().map(|s| s > TIE_TOLERANCE).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::watermark::frame::psnr;

    fn textured(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, |x, y| {
            let v = 120.0 + 40.0 * (x as f64 / 23.0).sin() * (y as f64 / 31.0).cos();
            let v = v.round() as u8;
            [v, v + 20, v - 30]
        })
        .unwrap()
    }

    #[test]
    fn roundtrip_on_flat_and_textured_frames() {
        let params = EmbedParams::default();
        let bits = BitString::from_hex("a5a5c3c30ff0", 48).unwrap();
        for frame in [Frame::filled(128, 96, [128, 128, 128]).unwrap(), textured(160, 128)] {
            let marked = embed_frame(&frame, &bits, &params).unwrap();
            assert_eq!(extract_frame(&marked, &params).unwrap(), bits);
            assert!(psnr(&frame, &marked).unwrap() >= 40.0);
        }
    }

    #[test]
    fn host_rejection_handles_strong_texture() {
        let sawtooth = Frame::from_fn(128, 128, |x, y| {
            let v = ((x * 7 + y * 13) % 61) as u8 + 90;
            [v, v + 20, v - 30]
        })
        .unwrap();
        let bits = BitString::from_hex("a5a5c3c30ff0", 48).unwrap();
        let params = EmbedParams::default();
        let marked = embed_frame(&sawtooth, &bits, &params).unwrap();
        assert_eq!(extract_frame(&marked, &params).unwrap(), bits);

        // Without rejection the added pattern is exactly the flat-host delta.
        let plain = EmbedParams { host_rejection: 0.0, ..params };
        let marked = embed_frame(&sawtooth, &bits, &plain).unwrap();
        let delta = watermark_delta(&plain, 128, 128, &bits).unwrap();
        for (i, (px, orig)) in marked.samples().chunks_exact(3).zip(sawtooth.samples().chunks_exact(3)).enumerate() {
            for c in 0..3 {
                let expected = (orig[c] as f64 + delta[i]).round().clamp(0.0, 255.0) as u8;
                assert_eq!(px[c], expected);
            }
        }
    }

    #[test]
    fn zero_alpha_is_identity() {
        let params = EmbedParams { alpha: 0.0, ..EmbedParams::default() };
        let frame = textured(64, 64);
        let bits = BitString::random(48, &mut rng::stream("t", 1, &[])).unwrap();
        assert_eq!(embed_frame(&frame, &bits, &params).unwrap(), frame);
    }

    #[test]
    fn flat_frame_extracts_zeros() {
        let params = EmbedParams::default();
        let frame = Frame::filled(64, 64, [10, 10, 10]).unwrap();
        let bits = extract_frame(&frame, &params).unwrap();
        assert!(bits.iter().all(|b| !b));
    }

    #[test]
    fn too_few_blocks_reports_minimum() {
        let params = EmbedParams { bits_per_frame: 100, ..EmbedParams::default() };
        let frame = Frame::filled(64, 64, [0; 3]).unwrap();
        let bits = BitString::zeros(100).unwrap();
        match embed_frame(&frame, &bits, &params) {
            Err(Error::FrameTooSmall { min_width: 80, min_height: 80, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn delta_stays_in_midband() {
        let params = EmbedParams::default();
        let bits = BitString::from_u64(0xffff_0000_ffff, 48).unwrap();
        let delta = watermark_delta(&params, 64, 64, &bits).unwrap();
        for by in 0..8 {
            for bx in 0..8 {
                let mut block = [[0.0; N]; N];
                for (r, row) in block.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = delta[(by * N + r) * 64 + bx * N + c];
                    }
                }
                let coeffs = dct::forward(&block);
                for (u, row) in coeffs.iter().enumerate() {
                    for (v, coeff) in row.iter().enumerate() {
                        let inside = params.midband.contains(&(u, v));
                        let mag = coeff.abs();
                        if inside {
                            assert!((mag - params.alpha).abs() < 1e-9);
                        } else {
                            assert!(mag < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_params() {
        let bad = [
            EmbedParams { block_size: 16, ..EmbedParams::default() },
            EmbedParams { alpha: -1.0, ..EmbedParams::default() },
            EmbedParams { midband: vec![(0, 0)], ..EmbedParams::default() },
            EmbedParams { midband: vec![(1, 1), (1, 1)], ..EmbedParams::default() },
            EmbedParams { bits_per_frame: 0, ..EmbedParams::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        let frame = Frame::filled(64, 64, [0; 3]).unwrap();
        assert!(embed_frame(&frame, &BitString::zeros(47).unwrap(), &EmbedParams::default()).is_err());
    }
}
