//! Extraction modelled as a noisy binary channel, plus Monte-Carlo drivers
//! that run key assignment, tampering, noise, localization and decoding end
//! to end.
//!
//! Randomness is keyed by frame provenance, not position: an original frame
//! `i` of trial `t` always sees the same noise, whatever was swapped, dropped
//! or inserted around it. Sweeps over `tau` or attack intensity therefore use
//! common random numbers.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::codec::{LdpcCode, TemplateSet};
use crate::detection::{log_p_value, DetectionReport};
use crate::error::{Error, Result};
use crate::rng;
use crate::tamper::{
    apply_combined, localize, FrameKeyMatrix, FrameLabel, FrameOrigin, FrameSequence, LocalizationResult, TamperSpec,
};

/// Per-distortion extraction accuracies of the deployed (video-adapted)
/// extractor. Channel BER is one minus these, clamped to 0.5.
pub const PRESET_ACCURACIES: [(&str, f64); 12] = [
    ("clean", 0.983),
    ("resize", 0.679),
    ("jpeg", 0.723),
    ("crop", 0.970),
    ("rotation25", 0.630),
    ("rotation90", 0.483),
    ("brightness", 0.965),
    ("contrast", 0.757),
    ("saturation", 0.967),
    ("sharpness", 0.972),
    ("gaussian_noise", 0.882),
    ("mpeg4", 0.723),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESET_ACCURACIES.iter().map(|(n, _)| *n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Iid {
        ber: f64,
    },
    /// Two-state Gilbert–Elliott chain; the good state is error-free.
    Burst {
        p_good_to_bad: f64,
        p_bad_to_good: f64,
        ber_bad: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub name: String,
    #[serde(flatten)]
    pub kind: ChannelKind,
}

impl ChannelModel {
    pub fn iid(name: impl Into<String>, ber: f64) -> Result<Self> {
        let m = Self { name: name.into(), kind: ChannelKind::Iid { ber } };
        m.validate()?;
        Ok(m)
    }

    pub fn burst(name: impl Into<String>, p_good_to_bad: f64, p_bad_to_good: f64, ber_bad: f64) -> Result<Self> {
        let m = Self { name: name.into(), kind: ChannelKind::Burst { p_good_to_bad, p_bad_to_good, ber_bad } };
        m.validate()?;
        Ok(m)
    }

    /// Burst channel with the given long-run flip rate and mean bad-state
    /// duration; `ber_bad` is solved from the stationary distribution.
    pub fn burst_with_marginal(
        name: impl Into<String>,
        marginal_ber: f64,
        mean_burst_len: f64,
        p_good_to_bad: f64,
    ) -> Result<Self> {
        if mean_burst_len < 1.0 {
            return Err(Error::InvalidParameter(format!("mean burst length must be >= 1, got {mean_burst_len}")));
        }
        let p_bad_to_good = 1.0 / mean_burst_len;
        let bad_fraction = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
        Self::burst(name, p_good_to_bad, p_bad_to_good, marginal_ber / bad_fraction)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, what: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must lie in [0, 1], got {v}")))
            }
        };
        match self.kind {
            ChannelKind::Iid { ber } => {
                if !(0.0..=0.5).contains(&ber) {
                    return Err(Error::InvalidParameter(format!("ber must lie in [0, 0.5], got {ber}")));
                }
            }
            ChannelKind::Burst { p_good_to_bad, p_bad_to_good, ber_bad } => {
                unit(p_good_to_bad, "p_good_to_bad")?;
                unit(p_bad_to_good, "p_bad_to_good")?;
                unit(ber_bad, "ber_bad")?;
                if p_good_to_bad + p_bad_to_good == 0.0 {
                    return Err(Error::InvalidParameter("burst chain has no transitions".into()));
                }
                if self.marginal_ber() > 0.5 {
                    return Err(Error::InvalidParameter(format!("marginal ber {} exceeds 0.5", self.marginal_ber())));
                }
            }
        }
        Ok(())
    }

    /// Long-run flip probability.
    pub fn marginal_ber(&self) -> f64 {
        match self.kind {
            ChannelKind::Iid { ber } => ber,
            ChannelKind::Burst { p_good_to_bad, p_bad_to_good, ber_bad } => {
                ber_bad * p_good_to_bad / (p_good_to_bad + p_bad_to_good)
            }
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.marginal_ber() == 0.0
    }
}

/// Probability that `len` consecutive bits all pass unflipped, starting from
/// the stationary state.
pub fn error_free_probability(channel: &ChannelModel, len: usize) -> f64 {
    match channel.kind {
        ChannelKind::Iid { ber } => (1.0 - ber).powi(len as i32),
        ChannelKind::Burst { p_good_to_bad, p_bad_to_good, ber_bad } => {
            if len == 0 {
                return 1.0;
            }
            // Forward recursion over (good, bad) with each bit's pass weight applied.
            let bad0 = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
            let mut good = 1.0 - bad0;
            let mut bad = bad0 * (1.0 - ber_bad);
            for _ in 1..len {
                let next_good = good * (1.0 - p_good_to_bad) + bad * p_bad_to_good;
                let next_bad = (good * p_good_to_bad + bad * (1.0 - p_bad_to_good)) * (1.0 - ber_bad);
                good = next_good;
                bad = next_bad;
            }
            good + bad
        }
    }
}

/// Burst channel with long-run flip rate `marginal_ber` whose error-free
/// probability over `word_len` bits is closest to `target`, searched over
/// mean burst lengths 1 to 16 (step 0.25) and entry rates 0.01 to 1.
///
/// Positively correlated errors raise the error-free probability above the
/// i.i.d. value, so targets below it are only approached, not reached.
pub fn fit_burst_channel(name: &str, marginal_ber: f64, word_len: usize, target: f64) -> Result<ChannelModel> {
    let mut best: Option<(f64, ChannelModel)> = None;
    for l in 0..=60 {
        let burst_len = 1.0 + 0.25 * l as f64;
        for g in 1..=100 {
            let Ok(ch) = ChannelModel::burst_with_marginal(name, marginal_ber, burst_len, g as f64 / 100.0) else {
                continue;
            };
            let gap = (error_free_probability(&ch, word_len) - target).abs();
            if best.as_ref().is_none_or(|(b, _)| gap < *b) {
                best = Some((gap, ch));
            }
        }
    }
    best.map(|(_, ch)| ch)
        .ok_or_else(|| Error::InvalidParameter(format!("no burst channel has marginal ber {marginal_ber}")))
}

/// Table-calibrated i.i.d. channel for a named distortion.
pub fn preset(name: &str) -> Result<ChannelModel> {
    let Some(&(canonical, accuracy)) = PRESET_ACCURACIES.iter().find(|(n, _)| *n == name) else {
        return Err(Error::UnknownPreset { name: name.to_string(), valid: preset_names() });
    };
    // Round away float noise so presets read back as e.g. 0.017.
    let ber = (((1.0 - accuracy) * 1e6).round() / 1e6).min(0.5);
    ChannelModel::iid(canonical, ber)
}

/// Passes `input` through the channel. Burst chains start in their
/// stationary distribution.
pub fn flip_bits<R: Rng + ?Sized>(input: &BitString, channel: &ChannelModel, rng: &mut R) -> BitString {
    let bits: Vec<bool> = match channel.kind {
        ChannelKind::Iid { ber } => {
            if ber == 0.0 {
                return input.clone();
            }
            input.iter().map(|b| b ^ rng.gen_bool(ber)).collect()
        }
        ChannelKind::Burst { p_good_to_bad, p_bad_to_good, ber_bad } => {
            let stationary_bad = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
            let mut bad = rng.gen_bool(stationary_bad);
            input
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    if i > 0 {
                        bad = if bad { !rng.gen_bool(p_bad_to_good) } else { rng.gen_bool(p_good_to_bad) };
                    }
                    b ^ (bad && rng.gen_bool(ber_bad))
                })
                .collect()
        }
    };
    BitString::new(bits).expect("same length as input")
}

/// How tampering is chosen for each trial.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TamperPlan {
    #[default]
    None,
    /// The same specification in every trial.
    Fixed { spec: TamperSpec },
    /// A fresh random specification per trial with these counts.
    Random { swaps: usize, drops: usize, inserts: usize },
}

impl TamperPlan {
    pub fn counts(swaps: usize, drops: usize, inserts: usize) -> Self {
        if swaps == 0 && drops == 0 && inserts == 0 {
            Self::None
        } else {
            Self::Random { swaps, drops, inserts }
        }
    }

    fn spec_for_trial(&self, frames: usize, master_seed: u64, trial: u64) -> Result<TamperSpec> {
        match self {
            Self::None => Ok(TamperSpec::default()),
            Self::Fixed { spec } => Ok(spec.clone()),
            Self::Random { swaps, drops, inserts } => {
                let seed = rng::derive_seed("trial-tamper", master_seed, &[trial]);
                TamperSpec::random(frames, *swaps, *drops, *inserts, seed)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub frames: usize,
    pub templates: TemplateSet,
    pub code: LdpcCode,
    pub channel: ChannelModel,
    pub tamper: TamperPlan,
    pub trials: usize,
    pub master_seed: u64,
    pub tau: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.frames == 0 {
            return Err(Error::InvalidParameter("frames must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        self.channel.validate()
    }

    /// Word accuracy is only defined when every template is a codeword.
    fn templates_are_codewords(&self) -> bool {
        self.templates.keys().iter().all(|k| self.code.is_codeword(k))
    }
}

/// Received keys of one trial, before any thresholding.
#[derive(Debug, Clone)]
pub struct TrialKeys {
    pub tampered: FrameSequence,
    pub received: FrameKeyMatrix,
}

/// Passes one frame key through the channel. The noise stream depends only
/// on the seed, the trial and the frame's provenance, so the same frame sees
/// the same errors whatever else the trial does to the sequence.
pub fn transmit(
    key: &BitString,
    channel: &ChannelModel,
    master_seed: u64,
    trial: u64,
    origin: FrameOrigin,
) -> BitString {
    let (class, index) = match origin {
        FrameOrigin::Original(i) => (0, i),
        FrameOrigin::Inserted(j) => (1, j),
    };
    let mut r = rng::stream("channel", master_seed, &[trial, class, index as u64]);
    flip_bits(key, channel, &mut r)
}

/// Runs key assignment, tampering and the channel for one trial.
pub fn trial_keys(config: &SimConfig, trial: u64) -> Result<TrialKeys> {
    let base = FrameSequence::from_templates(&config.templates, config.frames)?;
    let spec = config.tamper.spec_for_trial(config.frames, config.master_seed, trial)?;
    let tampered = apply_combined(&base, &spec)?;
    let received = tampered
        .keys
        .keys()
        .iter()
        .zip(&tampered.origins)
        .map(|(key, origin)| transmit(key, &config.channel, config.master_seed, trial, *origin))
        .collect();
    Ok(TrialKeys { received: FrameKeyMatrix::new(received)?, tampered })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    /// Bits of genuine (non-inserted) frames against their embedded keys.
    pub detection: DetectionReport,
    pub localization: LocalizationResult,
    pub genuine_frames: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncoded_words_correct: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coded_words_correct: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub channel: String,
    pub trials: usize,
    pub master_seed: u64,
    pub tau: f64,
    pub mean_bit_accuracy: f64,
    pub mean_localization_accuracy: f64,
    /// Detection statistics pooled over every genuine bit of every trial.
    pub pooled: DetectionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncoded_word_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coded_word_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub summary: SimSummary,
    pub trials: Vec<TrialResult>,
}

fn run_trial(config: &SimConfig, trial: u64, with_words: bool) -> Result<TrialResult> {
    let TrialKeys { tampered, received } = trial_keys(config, trial)?;
    let localization = localize(&config.templates, &received, &tampered.truth, config.tau)?;

    let genuine: Vec<(&BitString, &BitString)> = tampered
        .keys
        .keys()
        .iter()
        .zip(received.keys())
        .zip(&tampered.origins)
        .filter(|(_, o)| matches!(o, FrameOrigin::Original(_)))
        .map(|(pair, _)| pair)
        .collect();
    let detection = DetectionReport::from_pairs(genuine.iter().copied())?;

    let (uncoded, coded) = if with_words {
        let k = config.code.k_data();
        let mut uncoded = 0;
        let mut coded = 0;
        for (sent, got) in &genuine {
            let data = &sent.as_slice()[..k];
            if &got.as_slice()[..k] == data {
                uncoded += 1;
            }
            if config.code.decode(got)?.word.bits().as_slice() == data {
                coded += 1;
            }
        }
        (Some(uncoded), Some(coded))
    } else {
        (None, None)
    };
    Ok(TrialResult {
        trial,
        detection,
        localization,
        genuine_frames: genuine.len(),
        uncoded_words_correct: uncoded,
        coded_words_correct: coded,
    })
}

/// Monte-Carlo run of the full verification pipeline.
pub fn simulate_pipeline(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let with_words = config.templates_are_codewords();
    let trials: Vec<TrialResult> =
        (0..config.trials as u64).into_par_iter().map(|t| run_trial(config, t, with_words)).collect::<Result<_>>()?;

    let n = trials.len() as f64;
    let total_bits: usize = trials.iter().map(|t| t.detection.total_bits).sum();
    let correct_bits: usize = trials.iter().map(|t| t.detection.correct_bits()).sum();
    let genuine: usize = trials.iter().map(|t| t.genuine_frames).sum();
    let ratio = |f: fn(&TrialResult) -> Option<usize>| -> Option<f64> {
        let mut sum = 0;
        for t in &trials {
            sum += f(t)?;
        }
        Some(sum as f64 / genuine as f64)
    };
    let uncoded = ratio(|t| t.uncoded_words_correct);
    let coded = ratio(|t| t.coded_words_correct);
    let pooled = DetectionReport::new(total_bits, correct_bits as f64 / total_bits as f64, coded)?;
    let summary = SimSummary {
        channel: config.channel.name.clone(),
        trials: trials.len(),
        master_seed: config.master_seed,
        tau: config.tau,
        mean_bit_accuracy: trials.iter().map(|t| t.detection.bit_accuracy).sum::<f64>() / n,
        mean_localization_accuracy: trials.iter().map(|t| t.localization.accuracy).sum::<f64>() / n,
        pooled,
        uncoded_word_accuracy: uncoded,
        coded_word_accuracy: coded,
    };
    Ok(SimReport { summary, trials })
}

/// Attack intensity for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attack {
    pub swaps: usize,
    pub drops: usize,
    pub inserts: usize,
}

impl Attack {
    pub const fn new(swaps: usize, drops: usize, inserts: usize) -> Self {
        Self { swaps, drops, inserts }
    }

    /// The seven single-instance attack mixes of the threshold study.
    pub fn threshold_study() -> Vec<Self> {
        vec![
            Self::new(1, 0, 0),
            Self::new(0, 0, 1),
            Self::new(0, 1, 0),
            Self::new(1, 0, 1),
            Self::new(1, 1, 0),
            Self::new(0, 1, 1),
            Self::new(1, 1, 1),
        ]
    }

    /// `total` manipulations dealt round-robin to swap, drop, insert.
    pub fn combined(total: usize) -> Self {
        Self::new(total.div_ceil(3), (total + 1) / 3, total / 3)
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = [("swap", self.swaps), ("drop", self.drops), ("insert", self.inserts)]
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(name, n)| if *n == 1 { name.to_string() } else { format!("{name}{n}") })
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub channel: String,
    pub attack: String,
    pub swaps: usize,
    pub drops: usize,
    pub inserts: usize,
    pub tau: f64,
    pub trials: usize,
    pub localization_accuracy: f64,
}

/// Localization accuracy per (attack, tau). Each trial's received keys are
/// computed once and thresholded at every tau.
pub fn sweep(config: &SimConfig, taus: &[f64], attacks: &[Attack]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if let Some(bad) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::InvalidParameter(format!("tau values must lie in (0, 1), got {bad}")));
    }
    let mut rows = Vec::with_capacity(taus.len() * attacks.len());
    for attack in attacks {
        let cfg =
            SimConfig { tamper: TamperPlan::counts(attack.swaps, attack.drops, attack.inserts), ..config.clone() };
        let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| trial_accuracy_per_tau(&cfg, t, taus))
            .collect::<Result<_>>()?;
        for (ti, &tau) in taus.iter().enumerate() {
            let mean = per_trial.iter().map(|v| v[ti]).sum::<f64>() / per_trial.len() as f64;
            rows.push(SweepRow {
                channel: cfg.channel.name.clone(),
                attack: attack.label(),
                swaps: attack.swaps,
                drops: attack.drops,
                inserts: attack.inserts,
                tau,
                trials: cfg.trials,
                localization_accuracy: mean,
            });
        }
    }
    Ok(rows)
}

/// Localization accuracy of one trial at each threshold.
pub fn trial_accuracy_per_tau(config: &SimConfig, trial: u64, taus: &[f64]) -> Result<Vec<f64>> {
    let TrialKeys { tampered, received } = trial_keys(config, trial)?;
    taus.iter().map(|&tau| Ok(localize(&config.templates, &received, &tampered.truth, tau)?.accuracy)).collect()
}

/// The threshold-study attacks at every tau.
pub fn threshold_sweep(config: &SimConfig, taus: &[f64]) -> Result<Vec<SweepRow>> {
    sweep(config, taus, &Attack::threshold_study())
}

/// Frames flagged as inserted at each threshold, for one trial.
pub fn flagged_per_tau(config: &SimConfig, trial: u64, taus: &[f64]) -> Result<Vec<Vec<usize>>> {
    let TrialKeys { tampered, received } = trial_keys(config, trial)?;
    taus.iter()
        .map(|&tau| {
            let r = localize(&config.templates, &received, &tampered.truth, tau)?;
            Ok(r.predicted.iter().enumerate().filter(|(_, p)| **p == FrameLabel::Inserted).map(|(i, _)| i).collect())
        })
        .collect()
}

/// One CSV row per sweep row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub channel: String,
    pub trials: usize,
    pub tau: f64,
    pub total_bits: usize,
    pub bit_accuracy: f64,
    pub log10_p: f64,
    pub localization_accuracy: f64,
    pub uncoded_word_accuracy: Option<f64>,
    pub coded_word_accuracy: Option<f64>,
}

impl From<&SimSummary> for SummaryRow {
    fn from(s: &SimSummary) -> Self {
        Self {
            channel: s.channel.clone(),
            trials: s.trials,
            tau: s.tau,
            total_bits: s.pooled.total_bits,
            bit_accuracy: s.pooled.bit_accuracy,
            log10_p: log_p_value(s.pooled.total_bits, s.pooled.bit_accuracy).unwrap_or(0.0),
            localization_accuracy: s.mean_localization_accuracy,
            uncoded_word_accuracy: s.uncoded_word_accuracy,
            coded_word_accuracy: s.coded_word_accuracy,
        }
    }
}

/// One CSV row per simulation summary (one trial group per channel).
pub fn write_summary_csv<W: Write>(summaries: &[SimSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in summaries {
        w.serialize(SummaryRow::from(s)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("csv serialization: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::generate_codeword_templates;
    use crate::rng::StreamRng;
    use rand::SeedableRng;

    fn config(channel: ChannelModel, tamper: TamperPlan, trials: usize) -> SimConfig {
        let code = LdpcCode::build(7, 16, 48).unwrap();
        let templates = generate_codeword_templates(&code, 16, 1, 16).unwrap();
        SimConfig { frames: 16, templates, code, channel, tamper, trials, master_seed: 42, tau: 0.8 }
    }

    fn flip_rate(channel: &ChannelModel, bits: usize, seed: u64) -> f64 {
        let mut rng = StreamRng::seed_from_u64(seed);
        let input = BitString::zeros(bits).unwrap();
        flip_bits(&input, channel, &mut rng).iter().filter(|b| *b).count() as f64 / bits as f64
    }

    #[test]
    fn zero_ber_is_identity() {
        let mut rng = StreamRng::seed_from_u64(0);
        let input = BitString::from_u64(0xABCDEF, 24).unwrap();
        assert_eq!(flip_bits(&input, &ChannelModel::iid("z", 0.0).unwrap(), &mut rng), input);
    }

    #[test]
    fn iid_flip_rates() {
        let half = flip_rate(&ChannelModel::iid("h", 0.5).unwrap(), 1_000_000, 1);
        assert!((half - 0.5).abs() < 0.002, "{half}");
        let five = flip_rate(&ChannelModel::iid("f", 0.05).unwrap(), 1_000_000, 1);
        assert!((five - 0.05).abs() < 0.001, "{five}");
    }

    #[test]
    fn burst_marginal_matches_configuration() {
        let ch = ChannelModel::burst_with_marginal("b", 0.05, 8.0, 0.6).unwrap();
        assert!((ch.marginal_ber() - 0.05).abs() < 1e-12);
        let rate = flip_rate(&ch, 2_000_000, 3);
        assert!((rate - 0.05).abs() < 0.05 * 0.02, "{rate}");
    }

    #[test]
    fn presets() {
        assert_eq!(preset("clean").unwrap().marginal_ber(), 0.017);
        assert_eq!(preset("crop").unwrap().marginal_ber(), 0.030);
        assert_eq!(preset("rotation90").unwrap().marginal_ber(), 0.5);
        let err = preset("blur").unwrap_err().to_string();
        assert!(err.contains("clean") && err.contains("mpeg4"), "{err}");
        assert_eq!(preset_names().len(), 12);
    }

    #[test]
    fn invalid_channels_are_rejected() {
        assert!(ChannelModel::iid("x", 0.6).is_err());
        assert!(ChannelModel::burst("x", 1.2, 0.1, 0.5).is_err());
        assert!(ChannelModel::burst("x", 0.0, 0.0, 0.5).is_err());
        assert!(ChannelModel::burst_with_marginal("x", 0.05, 0.5, 0.5).is_err());
    }

    #[test]
    fn channel_json_shape() {
        let v = serde_json::to_value(preset("clean").unwrap()).unwrap();
        assert_eq!(v, serde_json::json!({"name": "clean", "kind": "iid", "ber": 0.017}));
        let b = ChannelModel::burst("b", 0.1, 0.2, 0.3).unwrap();
        let back: ChannelModel = serde_json::from_value(serde_json::to_value(&b).unwrap()).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn noiseless_untampered_pipeline_is_perfect() {
        let cfg = config(ChannelModel::iid("zero", 0.0).unwrap(), TamperPlan::None, 20);
        let r = simulate_pipeline(&cfg).unwrap();
        assert_eq!(r.summary.mean_bit_accuracy, 1.0);
        assert_eq!(r.summary.mean_localization_accuracy, 1.0);
        assert_eq!(r.summary.coded_word_accuracy, Some(1.0));
        assert_eq!(r.summary.uncoded_word_accuracy, Some(1.0));
        assert_eq!(r.summary.pooled.total_bits, 20 * 768);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = config(preset("crop").unwrap(), TamperPlan::counts(1, 1, 1), 50);
        let a = simulate_pipeline(&cfg).unwrap();
        let b = simulate_pipeline(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn random_templates_skip_word_accuracy() {
        let mut cfg = config(preset("clean").unwrap(), TamperPlan::None, 5);
        cfg.templates = crate::codec::generate_templates(16, 48, 1, 16).unwrap();
        let r = simulate_pipeline(&cfg).unwrap();
        assert_eq!(r.summary.coded_word_accuracy, None);
    }

    #[test]
    fn noiseless_sweep_is_perfect_for_swap_and_drop() {
        let cfg = config(ChannelModel::iid("zero", 0.0).unwrap(), TamperPlan::None, 30);
        let rows = sweep(&cfg, &[0.7, 0.8, 0.9, 0.99], &[Attack::new(1, 0, 0), Attack::new(0, 1, 0)]).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.localization_accuracy == 1.0));
        assert!(sweep(&cfg, &[1.0], &[Attack::new(1, 0, 0)]).is_err());
    }

    #[test]
    fn flagged_sets_grow_with_tau_per_trial() {
        let cfg = config(preset("gaussian_noise").unwrap(), TamperPlan::counts(1, 1, 2), 40);
        let taus = [0.7, 0.75, 0.8, 0.85, 0.9];
        for t in 0..40 {
            let flagged = flagged_per_tau(&cfg, t, &taus).unwrap();
            for w in flagged.windows(2) {
                assert!(w[0].iter().all(|i| w[1].contains(i)), "trial {t}");
            }
        }
    }

    #[test]
    fn combined_attack_split() {
        assert_eq!(Attack::combined(1), Attack::new(1, 0, 0));
        assert_eq!(Attack::combined(3), Attack::new(1, 1, 1));
        assert_eq!(Attack::combined(10), Attack::new(4, 3, 3));
        assert_eq!(Attack::new(1, 0, 1).label(), "swap+insert");
        assert_eq!(Attack::new(0, 3, 0).label(), "drop3");
    }

    #[test]
    fn sweep_csv_has_header_and_rows() {
        let cfg = config(ChannelModel::iid("zero", 0.0).unwrap(), TamperPlan::None, 3);
        let rows = sweep(&cfg, &[0.8, 0.9], &[Attack::new(1, 0, 0)]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("channel,attack,swaps,drops,inserts,tau"));
    }
}
