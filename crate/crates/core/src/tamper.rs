//! Temporal tamper localization.
//!
//! Each extracted frame key is matched against the template keys by Hamming
//! similarity. The best match wins (ties go to the lowest template index);
//! a frame whose best similarity is below `tau` is labelled as inserted.
//! Accuracy is the elementwise agreement with the ground-truth sequence of
//! the tampered video.
//!
//! The attack operators here (swap, drop, insert and their fixed-order
//! combination) build the tampered key matrix and its ground truth together,
//! so a noiseless localization of their output is always exact.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::codec::TemplateSet;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_TAU: f64 = 0.8;

/// Fraction of positions where `a` and `b` agree.
pub fn hamming_similarity(a: &BitString, b: &BitString) -> Result<f64> {
    Ok(a.matching_bits(b)? as f64 / a.len() as f64)
}

/// Per-frame label: a template index, or the inserted-frame marker
/// (serialized as −1).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum FrameLabel {
    Inserted,
    Template(usize),
}

impl FrameLabel {
    pub fn template(self) -> Option<usize> {
        match self {
            Self::Inserted => None,
            Self::Template(i) => Some(i),
        }
    }
}

impl From<FrameLabel> for i64 {
    fn from(label: FrameLabel) -> i64 {
        match label {
            FrameLabel::Inserted => -1,
            FrameLabel::Template(i) => i as i64,
        }
    }
}

impl TryFrom<i64> for FrameLabel {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Self::Inserted),
            i if i >= 0 => Ok(Self::Template(i as usize)),
            other => Err(format!("frame label must be -1 or a template index, got {other}")),
        }
    }
}

impl fmt::Debug for FrameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i64::from(*self))
    }
}

/// N extracted keys of uniform length d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameKeyMatrix {
    keys: Vec<BitString>,
}

impl FrameKeyMatrix {
    pub fn new(keys: Vec<BitString>) -> Result<Self> {
        let Some(first) = keys.first() else {
            return Err(Error::Empty("frame key matrix"));
        };
        let d = first.len();
        if let Some(bad) = keys.iter().find(|k| k.len() != d) {
            return Err(Error::LengthMismatch { expected: d, actual: bad.len() });
        }
        Ok(Self { keys })
    }

    pub fn keys(&self) -> &[BitString] {
        &self.keys
    }

    pub fn into_keys(self) -> Vec<BitString> {
        self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key_len(&self) -> usize {
        self.keys[0].len()
    }
}

/// Expected label for every frame of the (possibly tampered) video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruthSequence {
    entries: Vec<FrameLabel>,
}

impl GroundTruthSequence {
    pub fn new(entries: Vec<FrameLabel>) -> Self {
        Self { entries }
    }

    /// `[0, 1, ..., n)`.
    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(FrameLabel::Template).collect())
    }

    pub fn entries(&self) -> &[FrameLabel] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self, template_count: usize) -> Result<()> {
        for (pos, e) in self.entries.iter().enumerate() {
            if let FrameLabel::Template(i) = e {
                if *i >= template_count {
                    return Err(Error::InvalidParameter(format!(
                        "truth entry {pos} references template {i}, but only {template_count} exist"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub predicted: Vec<FrameLabel>,
    #[serde(rename = "similarities")]
    pub per_frame_similarity: Vec<f64>,
    pub accuracy: f64,
}

/// Best-matching template and its similarity; ties resolve to the lowest index.
pub fn best_match(templates: &TemplateSet, key: &BitString) -> Result<(usize, f64)> {
    if key.len() != templates.key_len() {
        return Err(Error::LengthMismatch { expected: templates.key_len(), actual: key.len() });
    }
    let d = key.len() as f64;
    let mut best = (0, usize::MAX);
    for (j, t) in templates.keys().iter().enumerate() {
        let dist = key.distance_unchecked(t);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    Ok((best.0, (key.len() - best.1) as f64 / d))
}

/// Labels every frame without scoring against ground truth.
pub fn predict(templates: &TemplateSet, keys: &FrameKeyMatrix, tau: f64) -> Result<(Vec<FrameLabel>, Vec<f64>)> {
    check_tau(tau)?;
    let mut labels = Vec::with_capacity(keys.len());
    let mut sims = Vec::with_capacity(keys.len());
    for key in keys.keys() {
        let (j, sim) = best_match(templates, key)?;
        labels.push(if sim < tau { FrameLabel::Inserted } else { FrameLabel::Template(j) });
        sims.push(sim);
    }
    Ok((labels, sims))
}

pub fn localize(
    templates: &TemplateSet,
    keys: &FrameKeyMatrix,
    truth: &GroundTruthSequence,
    tau: f64,
) -> Result<LocalizationResult> {
    if truth.len() != keys.len() {
        return Err(Error::LengthMismatch { expected: keys.len(), actual: truth.len() });
    }
    let (predicted, per_frame_similarity) = predict(templates, keys, tau)?;
    let hits = predicted.iter().zip(truth.entries()).filter(|(p, t)| p == t).count();
    Ok(LocalizationResult { predicted, per_frame_similarity, accuracy: hits as f64 / keys.len() as f64 })
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau must lie in [0, 1], got {tau}")));
    }
    Ok(())
}

/// Where a frame of a tampered sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameOrigin {
    /// Position in the untampered sequence.
    Original(usize),
    /// Ordinal among inserted frames.
    Inserted(usize),
}

/// Keys, ground truth and provenance of a frame sequence, kept in lockstep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    pub keys: FrameKeyMatrix,
    pub truth: GroundTruthSequence,
    pub origins: Vec<FrameOrigin>,
}

impl FrameSequence {
    pub fn new(keys: FrameKeyMatrix, truth: GroundTruthSequence) -> Result<Self> {
        if keys.len() != truth.len() {
            return Err(Error::LengthMismatch { expected: keys.len(), actual: truth.len() });
        }
        let origins = (0..keys.len()).map(FrameOrigin::Original).collect();
        Ok(Self { keys, truth, origins })
    }

    /// Frame `i` carries template `i mod M`.
    pub fn from_templates(templates: &TemplateSet, frames: usize) -> Result<Self> {
        if frames == 0 {
            return Err(Error::Empty("frame sequence"));
        }
        let m = templates.count();
        let keys = FrameKeyMatrix::new((0..frames).map(|i| templates.key(i % m).clone()).collect())?;
        let truth = GroundTruthSequence::new((0..frames).map(|i| FrameLabel::Template(i % m)).collect());
        Self::new(keys, truth)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Exchanges keys and truth at each pair of positions.
pub fn apply_swap(seq: &FrameSequence, pairs: &[(usize, usize)]) -> Result<FrameSequence> {
    let n = seq.len();
    let mut seen = BTreeSet::new();
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::InvalidTamper(format!("swap pair ({a}, {b}) out of range for {n} frames")));
        }
        if a == b || !seen.insert(a) || !seen.insert(b) {
            return Err(Error::InvalidTamper(format!("swap pair ({a}, {b}) overlaps another pair")));
        }
    }
    let mut keys = seq.keys.keys.clone();
    let mut truth = seq.truth.entries.clone();
    let mut origins = seq.origins.clone();
    for &(a, b) in pairs {
        keys.swap(a, b);
        truth.swap(a, b);
        origins.swap(a, b);
    }
    Ok(FrameSequence { keys: FrameKeyMatrix { keys }, truth: GroundTruthSequence { entries: truth }, origins })
}

/// Removes the frames at `indices`; survivors keep their order.
pub fn apply_drop(seq: &FrameSequence, indices: &[usize]) -> Result<FrameSequence> {
    let n = seq.len();
    let drop: BTreeSet<usize> = indices.iter().copied().collect();
    if drop.len() != indices.len() {
        return Err(Error::InvalidTamper("drop indices must be distinct".into()));
    }
    if let Some(&bad) = drop.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidTamper(format!("drop index {bad} out of range for {n} frames")));
    }
    if drop.len() >= n {
        return Err(Error::InvalidTamper("cannot drop every frame".into()));
    }
    let keep = |i: &usize| !drop.contains(i);
    let pick = |v: &[BitString]| (0..n).filter(keep).map(|i| v[i].clone()).collect::<Vec<_>>();
    Ok(FrameSequence {
        keys: FrameKeyMatrix { keys: pick(&seq.keys.keys) },
        truth: GroundTruthSequence { entries: (0..n).filter(keep).map(|i| seq.truth.entries[i]).collect() },
        origins: (0..n).filter(keep).map(|i| seq.origins[i]).collect(),
    })
}

/// Inserts `count` uniform-random keys, each at a uniformly drawn position of
/// the sequence as it stands at that moment. Keys and positions are drawn in
/// interleaved order, so the first `j` insertions of a larger count match a
/// call with count `j` on the same stream.
pub fn apply_insert<R: Rng + ?Sized>(seq: &FrameSequence, count: usize, rng: &mut R) -> Result<FrameSequence> {
    let d = seq.keys.key_len();
    let mut keys = seq.keys.keys.clone();
    let mut truth = seq.truth.entries.clone();
    let mut origins = seq.origins.clone();
    let first_ordinal = origins.iter().filter(|o| matches!(o, FrameOrigin::Inserted(_))).count();
    for j in 0..count {
        let key = BitString::random(d, rng)?;
        let pos = rng.gen_range(0..=keys.len());
        keys.insert(pos, key);
        truth.insert(pos, FrameLabel::Inserted);
        origins.insert(pos, FrameOrigin::Inserted(first_ordinal + j));
    }
    Ok(FrameSequence { keys: FrameKeyMatrix { keys }, truth: GroundTruthSequence { entries: truth }, origins })
}

/// Inserts the given keys at explicit output positions (ascending, each
/// indexing the final sequence).
pub fn apply_insert_at(seq: &FrameSequence, positions: &[usize], new_keys: &[BitString]) -> Result<FrameSequence> {
    if positions.len() != new_keys.len() {
        return Err(Error::InvalidTamper(format!("{} insert positions for {} keys", positions.len(), new_keys.len())));
    }
    let final_len = seq.len() + positions.len();
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidTamper("insert positions must be strictly ascending".into()));
    }
    if let Some(&bad) = positions.iter().find(|&&p| p >= final_len) {
        return Err(Error::InvalidTamper(format!("insert position {bad} out of range for {final_len} frames")));
    }
    let d = seq.keys.key_len();
    if let Some(bad) = new_keys.iter().find(|k| k.len() != d) {
        return Err(Error::LengthMismatch { expected: d, actual: bad.len() });
    }
    let first_ordinal = seq.origins.iter().filter(|o| matches!(o, FrameOrigin::Inserted(_))).count();
    let mut keys = seq.keys.keys.clone();
    let mut truth = seq.truth.entries.clone();
    let mut origins = seq.origins.clone();
    for (j, (&pos, key)) in positions.iter().zip(new_keys).enumerate() {
        keys.insert(pos, key.clone());
        truth.insert(pos, FrameLabel::Inserted);
        origins.insert(pos, FrameOrigin::Inserted(first_ordinal + j));
    }
    Ok(FrameSequence { keys: FrameKeyMatrix { keys }, truth: GroundTruthSequence { entries: truth }, origins })
}

/// A reproducible combination of swap, drop and insert attacks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperSpec {
    #[serde(default)]
    pub swap_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub drop_indices: Vec<usize>,
    #[serde(default)]
    pub insert_count: usize,
    /// Explicit output positions for inserted frames; drawn from `rng_seed`
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insert_positions: Option<Vec<usize>>,
    #[serde(default, rename = "seed")]
    pub rng_seed: u64,
}

impl TamperSpec {
    pub fn is_empty(&self) -> bool {
        self.swap_pairs.is_empty() && self.drop_indices.is_empty() && self.insert_count == 0
    }

    /// Random disjoint swap pairs, then random drops on the swapped sequence,
    /// then `inserts` insertions; all drawn from `seed`.
    pub fn random(frames: usize, swaps: usize, drops: usize, inserts: usize, seed: u64) -> Result<Self> {
        if 2 * swaps > frames {
            return Err(Error::InvalidTamper(format!(
                "{swaps} disjoint swap pairs need at least {} frames",
                2 * swaps
            )));
        }
        if drops >= frames {
            return Err(Error::InvalidTamper(format!("cannot drop {drops} of {frames} frames")));
        }
        let mut rng = rng::stream("tamper-spec", seed, &[frames as u64, swaps as u64, drops as u64]);
        let chosen = sample(&mut rng, frames, 2 * swaps).into_vec();
        let swap_pairs = chosen.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
        let mut drop_indices = sample(&mut rng, frames, drops).into_vec();
        drop_indices.sort_unstable();
        Ok(Self { swap_pairs, drop_indices, insert_count: inserts, insert_positions: None, rng_seed: seed })
    }
}

/// Swap, then drop, then insert.
pub fn apply_combined(seq: &FrameSequence, spec: &TamperSpec) -> Result<FrameSequence> {
    let swapped = apply_swap(seq, &spec.swap_pairs)?;
    let dropped = apply_drop(&swapped, &spec.drop_indices)?;
    match &spec.insert_positions {
        Some(positions) => {
            if positions.len() != spec.insert_count {
                return Err(Error::InvalidTamper(format!(
                    "insert_count {} but {} insert positions",
                    spec.insert_count,
                    positions.len()
                )));
            }
            let mut rng = rng::stream("tamper-insert", spec.rng_seed, &[]);
            let d = dropped.keys.key_len();
            let keys = (0..positions.len()).map(|_| BitString::random(d, &mut rng)).collect::<Result<Vec<_>>>()?;
            apply_insert_at(&dropped, positions, &keys)
        }
        None => {
            let mut rng = rng::stream("tamper-insert", spec.rng_seed, &[]);
            apply_insert(&dropped, spec.insert_count, &mut rng)
        }
    }
}

/// A tamper event recovered from a predicted label sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TamperEvent {
    /// Frame at `position` matched no expected template (or repeated one).
    Insertion { position: usize },
    /// Expected template never observed.
    Drop { template: usize },
    /// Two templates observed in each other's places.
    Swap { first: usize, second: usize },
}

/// Explains `predicted` relative to the expected template order.
///
/// Unmatched frames, unknown templates and repeats become insertions;
/// missing templates become drops; the surviving frames' order is decomposed
/// into a minimal set of transpositions (one per element of each
/// permutation cycle beyond the first), each reported as a swap.
pub fn diagnose(predicted: &[FrameLabel], expected_order: &[usize]) -> Vec<TamperEvent> {
    let rank: HashMap<usize, usize> = expected_order.iter().enumerate().map(|(r, &t)| (t, r)).collect();
    let mut events = Vec::new();
    let mut seen = BTreeSet::new();
    let mut observed: Vec<usize> = Vec::new();
    for (pos, label) in predicted.iter().enumerate() {
        match label.template().filter(|t| rank.contains_key(t)) {
            Some(t) if seen.insert(t) => observed.push(rank[&t]),
            _ => events.push(TamperEvent::Insertion { position: pos }),
        }
    }

    // Permutation from observed slot to sorted slot.
    let mut sorted = observed.clone();
    sorted.sort_unstable();
    let target: HashMap<usize, usize> = sorted.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let perm: Vec<usize> = observed.iter().map(|r| target[r]).collect();
    let mut visited = vec![false; perm.len()];
    let mut swaps = Vec::new();
    for start in 0..perm.len() {
        if visited[start] || perm[start] == start {
            visited[start] = true;
            continue;
        }
        // Walk the cycle, emitting one transposition per extra element.
        let mut cur = start;
        visited[cur] = true;
        loop {
            let next = perm[cur];
            if next == start {
                break;
            }
            visited[next] = true;
            let a = expected_order[observed[start]];
            let b = expected_order[observed[next]];
            swaps.push(TamperEvent::Swap { first: a.min(b), second: a.max(b) });
            cur = next;
        }
    }
    events.extend(swaps);

    for (r, &t) in expected_order.iter().enumerate() {
        if !seen.contains(&t) && rank[&t] == r {
            events.push(TamperEvent::Drop { template: t });
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::generate_templates;
    use rand::SeedableRng;

    fn t(i: usize) -> FrameLabel {
        FrameLabel::Template(i)
    }

    fn identity_seq(templates: &TemplateSet) -> FrameSequence {
        FrameSequence::from_templates(templates, templates.count()).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let a = BitString::zeros(48).unwrap();
        assert_eq!(hamming_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(hamming_similarity(&a, &a.complement()).unwrap(), 0.0);
        let b = BitString::new((0..48).map(|i| i < 12).collect()).unwrap();
        assert_eq!(hamming_similarity(&a, &b).unwrap(), 0.75);
        assert!(hamming_similarity(&a, &BitString::zeros(47).unwrap()).is_err());
    }

    #[test]
    fn label_json_uses_minus_one() {
        let v = vec![FrameLabel::Inserted, t(3)];
        assert_eq!(serde_json::to_string(&v).unwrap(), "[-1,3]");
        assert_eq!(serde_json::from_str::<Vec<FrameLabel>>("[-1,3]").unwrap(), v);
        assert!(serde_json::from_str::<FrameLabel>("-2").is_err());
    }

    #[test]
    fn exact_keys_localize_perfectly() {
        let templates = generate_templates(8, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        for tau in [0.1, 0.5, 0.8, 1.0] {
            let r = localize(&templates, &seq.keys, &seq.truth, tau).unwrap();
            assert_eq!(r.predicted, (0..8).map(t).collect::<Vec<_>>());
            assert_eq!(r.accuracy, 1.0);
        }
    }

    #[test]
    fn complemented_key_is_flagged() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let mut keys = seq.keys.keys().to_vec();
        keys[5] = keys[5].complement();
        let max_sim = templates.keys().iter().map(|k| hamming_similarity(k, &keys[5]).unwrap()).fold(0.0, f64::max);
        let mut truth = seq.truth.entries().to_vec();
        truth[5] = FrameLabel::Inserted;
        let r =
            localize(&templates, &FrameKeyMatrix::new(keys).unwrap(), &GroundTruthSequence::new(truth), 0.8).unwrap();
        if max_sim < 0.8 {
            assert_eq!(r.predicted[5], FrameLabel::Inserted);
            assert_eq!(r.accuracy, 1.0);
        } else {
            assert_ne!(r.predicted[5], t(5));
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let a = BitString::from_binary(&[0, 0, 0, 0]).unwrap();
        let b = BitString::from_binary(&[1, 1, 0, 0]).unwrap();
        let templates = TemplateSet::from_keys(vec![a, b], 0, 2).unwrap();
        let key = BitString::from_binary(&[1, 0, 0, 0]).unwrap();
        assert_eq!(best_match(&templates, &key).unwrap(), (0, 0.75));
    }

    #[test]
    fn dimension_mismatches_error() {
        let templates = generate_templates(2, 48, 1, 16).unwrap();
        let keys = FrameKeyMatrix::new(vec![BitString::zeros(47).unwrap()]).unwrap();
        assert!(localize(&templates, &keys, &GroundTruthSequence::identity(1), 0.8).is_err());
        let keys = FrameKeyMatrix::new(vec![BitString::zeros(48).unwrap()]).unwrap();
        assert!(localize(&templates, &keys, &GroundTruthSequence::identity(2), 0.8).is_err());
        assert!(FrameKeyMatrix::new(vec![]).is_err());
    }

    #[test]
    fn swap_examples() {
        let templates = generate_templates(3, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let s = apply_swap(&seq, &[(0, 1)]).unwrap();
        assert_eq!(s.truth.entries(), &[t(1), t(0), t(2)]);
        assert_eq!(apply_swap(&seq, &[]).unwrap(), seq);
        assert!(apply_swap(&seq, &[(0, 1), (1, 2)]).is_err());
        assert!(apply_swap(&seq, &[(0, 3)]).is_err());
        assert!(apply_swap(&seq, &[(1, 1)]).is_err());
    }

    #[test]
    fn random_swaps_are_an_involution() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let spec = TamperSpec::random(16, 8, 0, 0, 7).unwrap();
        let once = apply_swap(&seq, &spec.swap_pairs).unwrap();
        assert_eq!(once, apply_swap(&seq, &spec.swap_pairs).unwrap());
        assert_ne!(once, seq);
        assert_eq!(apply_swap(&once, &spec.swap_pairs).unwrap(), seq);
    }

    #[test]
    fn drop_examples() {
        let templates = generate_templates(3, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        assert_eq!(apply_drop(&seq, &[]).unwrap(), seq);
        assert_eq!(apply_drop(&seq, &[0]).unwrap().truth.entries(), &[t(1), t(2)]);
        assert!(apply_drop(&seq, &[0, 1, 2]).is_err());
        assert!(apply_drop(&seq, &[0, 0]).is_err());
        assert!(apply_drop(&seq, &[3]).is_err());
    }

    #[test]
    fn drop_ten_of_sixteen_keeps_complement() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let spec = TamperSpec::random(16, 0, 10, 0, 7).unwrap();
        let out = apply_drop(&seq, &spec.drop_indices).unwrap();
        assert_eq!(out.len(), 6);
        let dropped: BTreeSet<usize> = spec.drop_indices.iter().copied().collect();
        let expected: Vec<FrameLabel> = (0..16).filter(|i| !dropped.contains(i)).map(t).collect();
        assert_eq!(out.truth.entries(), expected.as_slice());
    }

    #[test]
    fn insert_examples() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let mut rng = rng::StreamRng::seed_from_u64(1);
        assert_eq!(apply_insert(&seq, 0, &mut rng).unwrap(), seq);
        let out = apply_insert(&seq, 1, &mut rng).unwrap();
        assert_eq!(out.len(), 17);
        assert_eq!(out.truth.entries().iter().filter(|e| **e == FrameLabel::Inserted).count(), 1);
    }

    #[test]
    fn inserts_are_nested_across_counts() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let three = apply_insert(&seq, 3, &mut rng::StreamRng::seed_from_u64(9)).unwrap();
        let two = apply_insert(&seq, 2, &mut rng::StreamRng::seed_from_u64(9)).unwrap();
        let inserted = |s: &FrameSequence| -> Vec<BitString> {
            let mut v: Vec<(usize, BitString)> = s
                .origins
                .iter()
                .zip(s.keys.keys())
                .filter_map(|(o, k)| match o {
                    FrameOrigin::Inserted(j) => Some((*j, k.clone())),
                    _ => None,
                })
                .collect();
            v.sort_by_key(|(j, _)| *j);
            v.into_iter().map(|(_, k)| k).collect()
        };
        assert_eq!(inserted(&three)[..2], inserted(&two)[..]);
    }

    #[test]
    fn insert_at_validates_positions() {
        let templates = generate_templates(4, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        let k = BitString::zeros(48).unwrap();
        let out = apply_insert_at(&seq, &[0, 5], &[k.clone(), k.clone()]).unwrap();
        assert_eq!(out.truth.entries()[0], FrameLabel::Inserted);
        assert_eq!(out.truth.entries()[5], FrameLabel::Inserted);
        assert!(apply_insert_at(&seq, &[6], std::slice::from_ref(&k)).is_err());
        assert!(apply_insert_at(&seq, &[2, 2], &[k.clone(), k]).is_err());
    }

    #[test]
    fn combined_examples() {
        let templates = generate_templates(16, 48, 1, 16).unwrap();
        let seq = identity_seq(&templates);
        assert_eq!(apply_combined(&seq, &TamperSpec::default()).unwrap(), seq);
        let spec = TamperSpec::random(16, 1, 1, 1, 3).unwrap();
        let out = apply_combined(&seq, &spec).unwrap();
        assert_eq!(out.len(), 16);
        assert_eq!(out.truth.entries().iter().filter(|e| **e == FrameLabel::Inserted).count(), 1);
        assert_eq!(out, apply_combined(&seq, &spec).unwrap());
    }

    #[test]
    fn tamper_spec_json_shape() {
        let spec = TamperSpec {
            swap_pairs: vec![(0, 1)],
            drop_indices: vec![3],
            insert_count: 2,
            insert_positions: None,
            rng_seed: 5,
        };
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"swap_pairs": [[0, 1]], "drop_indices": [3], "insert_count": 2, "seed": 5})
        );
        assert_eq!(serde_json::from_value::<TamperSpec>(json).unwrap(), spec);
    }

    #[test]
    fn diagnose_examples() {
        assert_eq!(diagnose(&[t(1), t(0), t(2)], &[0, 1, 2]), vec![TamperEvent::Swap { first: 0, second: 1 }]);
        assert_eq!(
            diagnose(&[t(0), FrameLabel::Inserted, t(1), t(2)], &[0, 1, 2]),
            vec![TamperEvent::Insertion { position: 1 }]
        );
        assert_eq!(diagnose(&[t(0), t(2)], &[0, 1, 2]), vec![TamperEvent::Drop { template: 1 }]);
        assert!(diagnose(&[t(0), t(1), t(2)], &[0, 1, 2]).is_empty());
    }

    #[test]
    fn diagnose_recovers_distant_swap_as_one_event() {
        let predicted: Vec<FrameLabel> = [0, 5, 2, 3, 4, 1, 6].iter().map(|&i| t(i)).collect();
        assert_eq!(diagnose(&predicted, &[0, 1, 2, 3, 4, 5, 6]), vec![TamperEvent::Swap { first: 1, second: 5 }]);
    }

    #[test]
    fn diagnose_repeat_is_insertion() {
        assert_eq!(diagnose(&[t(0), t(1), t(1), t(2)], &[0, 1, 2]), vec![TamperEvent::Insertion { position: 2 }]);
    }
}
