//! The template-index control channel.
//!
//! In dynamic mode each frame embeds one of M template keys; the sequence of
//! chosen indices is itself a message carrying log2(M) bits per frame.

use serde::{Deserialize, Serialize};

use crate::codec::TemplateSet;
use crate::error::{Error, Result};
use crate::tamper::{best_match, FrameKeyMatrix, FrameLabel};

/// Bits carried by the index sequence of `frames` frames over `templates`
/// templates: `frames · log2(templates)`.
pub fn control_capacity(templates: usize, frames: usize) -> Result<usize> {
    if templates < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 templates, got {templates}")));
    }
    if frames == 0 {
        return Err(Error::InvalidParameter("need at least one frame".into()));
    }
    if !templates.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(templates));
    }
    Ok(frames * templates.trailing_zeros() as usize)
}

/// Length bookkeeping for the template payload itself, `templates × frames`
/// message slots. Recorded for reporting only.
pub fn template_channel_length(templates: usize, frames: usize) -> usize {
    templates * frames
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSequence {
    indices: Vec<usize>,
    template_count: usize,
}

impl ControlSequence {
    pub fn new(indices: Vec<usize>, template_count: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("control sequence"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= template_count) {
            return Err(Error::InvalidParameter(format!("index {bad} out of range for {template_count} templates")));
        }
        Ok(Self { indices, template_count })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn template_count(&self) -> usize {
        self.template_count
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-frame decision: `label` is `Inserted` (−1) when the best similarity
/// fell below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMatch {
    pub label: FrameLabel,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDecode {
    /// Nearest template for every frame, matched or not.
    pub sequence: ControlSequence,
    pub frames: Vec<FrameMatch>,
}

impl ControlDecode {
    pub fn unmatched(&self) -> usize {
        self.frames.iter().filter(|f| f.label == FrameLabel::Inserted).count()
    }
}

pub fn decode_control(extracted: &FrameKeyMatrix, templates: &TemplateSet, tau: f64) -> Result<ControlDecode> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau must lie in [0, 1], got {tau}")));
    }
    let mut indices = Vec::with_capacity(extracted.len());
    let mut frames = Vec::with_capacity(extracted.len());
    for key in extracted.keys() {
        let (j, similarity) = best_match(templates, key)?;
        indices.push(j);
        let label = if similarity < tau { FrameLabel::Inserted } else { FrameLabel::Template(j) };
        frames.push(FrameMatch { label, similarity });
    }
    Ok(ControlDecode { sequence: ControlSequence::new(indices, templates.count())?, frames })
}
