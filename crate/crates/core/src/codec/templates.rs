//! Reference template keys for per-frame identification.

use crate::bits::BitString;
use crate::codec::ldpc::{DataWord, LdpcCode};
use crate::error::{Error, Result};
use crate::rng;

/// Candidate draws allowed per accepted key before giving up.
const DRAWS_PER_KEY: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    keys: Vec<BitString>,
    seed: u64,
    min_pairwise_distance: usize,
}

impl TemplateSet {
    /// Wraps existing keys after validating length uniformity and spacing.
    pub fn from_keys(keys: Vec<BitString>, seed: u64, min_pairwise_distance: usize) -> Result<Self> {
        let Some(first) = keys.first() else {
            return Err(Error::Empty("template set"));
        };
        let d = first.len();
        for k in &keys {
            if k.len() != d {
                return Err(Error::LengthMismatch { expected: d, actual: k.len() });
            }
        }
        for (i, a) in keys.iter().enumerate() {
            for (j, b) in keys.iter().enumerate().skip(i + 1) {
                let dist = a.distance_unchecked(b);
                if dist < min_pairwise_distance {
                    return Err(Error::InvalidParameter(format!(
                        "keys {i} and {j} are {dist} apart, below the minimum {min_pairwise_distance}"
                    )));
                }
            }
        }
        Ok(Self { keys, seed, min_pairwise_distance })
    }

    pub fn keys(&self) -> &[BitString] {
        &self.keys
    }

    pub fn key(&self, index: usize) -> &BitString {
        &self.keys[index]
    }

    /// Number of templates, M.
    pub fn count(&self) -> usize {
        self.keys.len()
    }

    /// Key length, d.
    pub fn key_len(&self) -> usize {
        self.keys[0].len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn min_pairwise_distance(&self) -> usize {
        self.min_pairwise_distance
    }

    /// Smallest realised pairwise distance (`None` for a single key).
    pub fn realized_min_distance(&self) -> Option<usize> {
        let mut best = None;
        for (i, a) in self.keys.iter().enumerate() {
            for b in &self.keys[i + 1..] {
                let d = a.distance_unchecked(b);
                best = Some(best.map_or(d, |x: usize| x.min(d)));
            }
        }
        best
    }
}

/// Default spacing for `d`-bit keys.
pub fn default_min_distance(d: usize) -> usize {
    d / 3
}

/// Draws `count` uniform `length`-bit keys, rejecting any candidate closer
/// than `min_distance` to a key already accepted.
pub fn generate_templates(count: usize, length: usize, seed: u64, min_distance: usize) -> Result<TemplateSet> {
    check_feasible(count, length, min_distance)?;
    let mut rng = rng::stream("templates", seed, &[count as u64, length as u64, min_distance as u64]);
    let keys = rejection_sample(count, length, min_distance, || BitString::random(length, &mut rng))?;
    Ok(TemplateSet { keys, seed, min_pairwise_distance: min_distance })
}

/// Like [`generate_templates`], but every key is the codeword of a random
/// data word, so keys double as LDPC-protected payloads.
pub fn generate_codeword_templates(
    code: &LdpcCode,
    count: usize,
    seed: u64,
    min_distance: usize,
) -> Result<TemplateSet> {
    let length = code.n_code();
    check_feasible(count, length, min_distance)?;
    if count > 1usize.checked_shl(code.k_data() as u32).unwrap_or(usize::MAX) {
        return Err(infeasible(count, length, min_distance, "more keys than data words".into()));
    }
    let mut rng = rng::stream("codeword-templates", seed, &[code.seed(), count as u64, min_distance as u64]);
    let k = code.k_data();
    let keys = rejection_sample(count, length, min_distance, || {
        let data = DataWord::new(BitString::random(k, &mut rng)?, code)?;
        Ok(code.encode(&data)?.into_bits())
    })?;
    Ok(TemplateSet { keys, seed, min_pairwise_distance: min_distance })
}

fn rejection_sample<F>(count: usize, length: usize, min_distance: usize, mut draw: F) -> Result<Vec<BitString>>
where
    F: FnMut() -> Result<BitString>,
{
    let mut keys: Vec<BitString> = Vec::with_capacity(count);
    while keys.len() < count {
        let mut accepted = false;
        for _ in 0..DRAWS_PER_KEY {
            let candidate = draw()?;
            if keys.iter().all(|k| k.distance_unchecked(&candidate) >= min_distance) {
                keys.push(candidate);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(infeasible(
                count,
                length,
                min_distance,
                format!("retry budget exhausted after placing {} keys", keys.len()),
            ));
        }
    }
    Ok(keys)
}

fn infeasible(count: usize, length: usize, min_distance: usize, reason: String) -> Error {
    Error::InfeasibleTemplates { count, length, min_distance, reason }
}

/// Necessary conditions: the sphere-packing bound and, when it applies, the
/// Plotkin bound.
fn check_feasible(count: usize, length: usize, min_distance: usize) -> Result<()> {
    if count == 0 {
        return Err(infeasible(count, length, min_distance, "need at least one key".into()));
    }
    if length == 0 {
        return Err(infeasible(count, length, min_distance, "key length must be positive".into()));
    }
    if min_distance > length {
        return Err(infeasible(count, length, min_distance, "min_distance exceeds key length".into()));
    }
    if count == 1 {
        return Ok(());
    }
    let radius = (min_distance.saturating_sub(1)) / 2;
    let log2_ball = log2_ball_volume(length, radius);
    if (count as f64).log2() + log2_ball > length as f64 + 1e-9 {
        return Err(infeasible(count, length, min_distance, "violates the sphere-packing bound".into()));
    }
    if 2 * min_distance > length {
        let bound = 2 * (min_distance / (2 * min_distance - length));
        if count > bound {
            return Err(infeasible(count, length, min_distance, format!("Plotkin bound allows at most {bound} keys")));
        }
    }
    Ok(())
}

fn log2_ball_volume(length: usize, radius: usize) -> f64 {
    // Σ_{i ≤ r} C(d, i), summed in log space.
    let terms: Vec<f64> =
        (0..=radius.min(length)).map(|i| statrs::function::factorial::ln_binomial(length as u64, i as u64)).collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()) / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_key_is_trivially_valid() {
        let t = generate_templates(1, 48, 1, 0).unwrap();
        assert_eq!(t.count(), 1);
        assert_eq!(t.key_len(), 48);
        assert_eq!(t.realized_min_distance(), None);
    }

    #[test]
    fn sixteen_keys_are_spaced() {
        let t = generate_templates(16, 48, 1, 16).unwrap();
        assert_eq!(t.count(), 16);
        // Exhaustive pairwise check.
        for i in 0..16 {
            for j in i + 1..16 {
                assert!(t.key(i).hamming_distance(t.key(j)).unwrap() >= 16);
            }
        }
    }

    #[test]
    fn pigeonhole_case_is_infeasible() {
        let err = generate_templates(3, 2, 1, 2).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTemplates { .. }), "{err}");
        assert!(generate_templates(2, 2, 1, 2).is_ok());
        assert!(generate_templates(2, 4, 1, 5).is_err());
        assert!(generate_templates(0, 4, 1, 0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_templates(8, 48, 3, 16).unwrap(), generate_templates(8, 48, 3, 16).unwrap());
        assert_ne!(generate_templates(8, 48, 3, 16).unwrap(), generate_templates(8, 48, 4, 16).unwrap());
    }

    #[test]
    fn codeword_templates_are_codewords() {
        let code = LdpcCode::build(7, 16, 48).unwrap();
        let t = generate_codeword_templates(&code, 16, 1, 16).unwrap();
        assert!(t.keys().iter().all(|k| code.is_codeword(k)));
        assert!(t.realized_min_distance().unwrap() >= 16);
    }

    #[test]
    fn from_keys_validates() {
        let a = BitString::zeros(4).unwrap();
        assert!(TemplateSet::from_keys(vec![a.clone(), a.complement()], 0, 4).is_ok());
        assert!(TemplateSet::from_keys(vec![a.clone(), a.clone()], 0, 1).is_err());
        assert!(TemplateSet::from_keys(vec![a, BitString::zeros(5).unwrap()], 0, 0).is_err());
        assert!(TemplateSet::from_keys(vec![], 0, 0).is_err());
    }
}
