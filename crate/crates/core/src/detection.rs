//! Bit accuracy, word accuracy and the chance-level log p-value.
//!
//! The p-value is the probability that `L` fair coin flips agree with the
//! payload in at least `⌈aL⌉` positions. At `L = 768` this is around
//! 10⁻¹⁶⁷, so the tail is summed entirely in the log domain.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::bits::BitString;
use crate::codec::{DataWord, DecodeResult};
use crate::error::{Error, Result};

/// Terms this many nats below the running log-sum are dropped.
const TRUNCATION_NATS: f64 = 40.0;
/// Absorbs floating error in `a · L` before taking the ceiling.
const CEIL_SLACK: f64 = 1e-9;

pub fn bit_accuracy(original: &BitString, extracted: &BitString) -> Result<f64> {
    Ok(original.matching_bits(extracted)? as f64 / original.len() as f64)
}

/// Fraction of pairs whose decoded word equals the sent word exactly.
pub fn word_accuracy(pairs: &[(DataWord, DecodeResult)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("word pair list"));
    }
    let hits = pairs.iter().filter(|(sent, got)| *sent == got.word).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Smallest success count that reaches accuracy `accuracy` over `total_bits`.
pub fn threshold_count(total_bits: usize, accuracy: f64) -> usize {
    let raw = (accuracy * total_bits as f64 - CEIL_SLACK).ceil();
    (raw.max(0.0) as usize).min(total_bits)
}

/// log10 P[Binomial(L, 1/2) ≥ ⌈aL⌉].
pub fn log_p_value(total_bits: usize, accuracy: f64) -> Result<f64> {
    if total_bits == 0 {
        return Err(Error::InvalidParameter("total_bits must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::InvalidParameter(format!("accuracy must lie in [0, 1], got {accuracy}")));
    }
    Ok(log10_tail(total_bits, threshold_count(total_bits, accuracy)))
}

/// log10 P[Binomial(L, 1/2) ≥ k].
pub fn log10_tail(total_bits: usize, start: usize) -> f64 {
    if start == 0 {
        return 0.0;
    }
    let n = total_bits as u64;
    let ln_half_pow = -(total_bits as f64) * std::f64::consts::LN_2;
    let term = |k: usize| ln_binomial(n, k as u64) + ln_half_pow;

    // Terms are unimodal with the peak at L/2, so the largest tail term sits
    // at max(start, ⌊L/2⌋); walk outward from it in both directions.
    let peak = start.max(total_bits / 2);
    let reference = term(peak);
    let mut sum = 1.0f64;
    for k in peak + 1..=total_bits {
        let t = term(k) - reference;
        if t < sum.ln() - TRUNCATION_NATS {
            break;
        }
        sum += t.exp();
    }
    for k in (start..peak).rev() {
        let t = term(k) - reference;
        if t < sum.ln() - TRUNCATION_NATS {
            break;
        }
        sum += t.exp();
    }
    ((reference + sum.ln()) / std::f64::consts::LN_10).min(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    #[serde(rename = "L")]
    pub total_bits: usize,
    pub bit_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_accuracy: Option<f64>,
    pub log10_p: f64,
}

impl DetectionReport {
    pub fn new(total_bits: usize, bit_accuracy: f64, word_accuracy: Option<f64>) -> Result<Self> {
        if let Some(w) = word_accuracy {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter(format!("word accuracy must lie in [0, 1], got {w}")));
            }
        }
        Ok(Self { total_bits, bit_accuracy, word_accuracy, log10_p: log_p_value(total_bits, bit_accuracy)? })
    }

    /// Report over a batch of (sent, extracted) bit strings, pooled.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a BitString, &'a BitString)>,
    {
        let mut total = 0;
        let mut correct = 0;
        for (sent, got) in pairs {
            correct += sent.matching_bits(got)?;
            total += sent.len();
        }
        if total == 0 {
            return Err(Error::Empty("bit string pairs"));
        }
        Self::new(total, correct as f64 / total as f64, None)
    }

    pub fn correct_bits(&self) -> usize {
        (self.bit_accuracy * self.total_bits as f64).round() as usize
    }
}

/// Pools per-frame reports into one and recomputes the p-value on the pooled
/// bit count. Word accuracy is bit-weighted over the reports that carry it.
pub fn aggregate(reports: &[DetectionReport]) -> Result<DetectionReport> {
    if reports.is_empty() {
        return Err(Error::Empty("report list"));
    }
    let total: usize = reports.iter().map(|r| r.total_bits).sum();
    let correct: usize = reports.iter().map(DetectionReport::correct_bits).sum();
    let (word_weight, word_sum) = reports
        .iter()
        .filter_map(|r| r.word_accuracy.map(|w| (r.total_bits as f64, w * r.total_bits as f64)))
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let word = (word_weight > 0.0).then(|| word_sum / word_weight);
    DetectionReport::new(total, correct as f64 / total as f64, word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_accuracy_examples() {
        let a = BitString::from_u64(0xDEAD_BEEF, 32).unwrap();
        assert_eq!(bit_accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(bit_accuracy(&a, &a.complement()).unwrap(), 0.0);
        let x = BitString::zeros(768).unwrap();
        let y = BitString::new((0..768).map(|i| i % 20 == 0 && i < 760).collect()).unwrap();
        assert_eq!(x.hamming_distance(&y).unwrap(), 38);
        assert_eq!(bit_accuracy(&x, &y).unwrap(), 730.0 / 768.0);
        assert!(bit_accuracy(&x, &BitString::zeros(767).unwrap()).is_err());
    }

    #[test]
    fn word_accuracy_examples() {
        let w = DataWord::from_u16(0xBEEF);
        let ok = DecodeResult { word: w.clone(), corrected_bit_count: 0, converged: true };
        let bad = DecodeResult { word: DataWord::from_u16(0xBEEE), corrected_bit_count: 0, converged: true };
        assert_eq!(word_accuracy(&[(w.clone(), ok.clone()), (w.clone(), ok.clone())]).unwrap(), 1.0);
        assert_eq!(word_accuracy(&[(w.clone(), ok), (w, bad)]).unwrap(), 0.5);
        assert!(word_accuracy(&[]).is_err());
    }

    #[test]
    fn published_values() {
        assert!((log_p_value(768, 0.950).unwrap() + 166.65).abs() < 0.5);
        assert!((log_p_value(624, 0.983).unwrap() + 166.48).abs() < 0.5);
        assert!((log_p_value(624, 0.933).unwrap() + 123.32).abs() < 0.5);
    }

    #[test]
    fn edge_values() {
        let full = log_p_value(768, 1.0).unwrap();
        assert!((full + 768.0 * 2f64.log10()).abs() < 1e-9, "{full}");
        assert_eq!(log_p_value(768, 0.0).unwrap(), 0.0);
        assert!(log_p_value(0, 0.5).is_err());
        assert!(log_p_value(10, 1.5).is_err());
        // Integral aL starts the sum at aL itself.
        assert_eq!(threshold_count(768, 730.0 / 768.0), 730);
        assert_eq!(threshold_count(768, 0.95), 730);
    }

    #[test]
    fn aggregate_examples() {
        let one = DetectionReport::new(48, 0.75, Some(1.0)).unwrap();
        assert_eq!(aggregate(std::slice::from_ref(&one)).unwrap(), one);
        let perfect: Vec<_> = (0..16).map(|_| DetectionReport::new(48, 1.0, None).unwrap()).collect();
        let pooled = aggregate(&perfect).unwrap();
        assert_eq!((pooled.total_bits, pooled.bit_accuracy), (768, 1.0));
        assert!(aggregate(&[]).is_err());

        // 730 correct bits spread over 16 frames.
        let per_frame: Vec<_> = (0..16)
            .map(|i| {
                let correct = if i < 14 { 46 } else { 43 };
                DetectionReport::new(48, correct as f64 / 48.0, None).unwrap()
            })
            .collect();
        let pooled = aggregate(&per_frame).unwrap();
        assert_eq!(pooled.correct_bits(), 730);
        assert_eq!(pooled.log10_p, log_p_value(768, 730.0 / 768.0).unwrap());
    }

    #[test]
    fn report_json_shape() {
        let r = DetectionReport::new(768, 1.0, None).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v.as_object().unwrap().keys().collect::<Vec<_>>(), vec!["L", "bit_accuracy", "log10_p"]);
    }
}
