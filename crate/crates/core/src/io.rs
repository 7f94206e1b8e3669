//! On-disk formats: the key manifest, payload word lists, key lists, ground
//! truth, tamper specifications and simulation configs.
//!
//! Every parser here takes untrusted text and returns an error rather than
//! panicking. Sizes are bounded before anything is allocated from them.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::channel::{preset, preset_names, Attack, ChannelModel, SimConfig, TamperPlan};
use crate::codec::{
    default_min_distance, generate_codeword_templates, generate_templates, DataWord, LdpcCode, TemplateSet,
};
use crate::error::{Error, Result};
use crate::tamper::{FrameKeyMatrix, GroundTruthSequence, TamperSpec, DEFAULT_TAU};
use crate::watermark::EmbedParams;

pub const MANIFEST_VERSION: &str = "framemark/1";

/// Upper bounds on sizes read from files.
pub const MAX_CODE_BITS: usize = 4096;
pub const MAX_TEMPLATES: usize = 4096;
pub const MAX_FRAMES: usize = 1 << 20;
pub const MAX_TRIALS: usize = 10_000_000;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Keys, code and embedding parameters shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub k_data: usize,
    pub n_code: usize,
    #[serde(rename = "M")]
    pub template_count: usize,
    #[serde(rename = "d")]
    pub key_length: usize,
    pub min_distance: usize,
    /// True when every key is a codeword of the manifest's code, so the
    /// first `k_data` bits of key `j` are the payload word that embeds it.
    pub keys_are_codewords: bool,
    pub keys: Vec<String>,
    pub embed: EmbedParams,
    pub tau: f64,
}

impl Manifest {
    /// Draws a fresh key set. Keys of length `n_code` are drawn from the
    /// code so that they can be embedded as payloads; other lengths are
    /// uniform random strings.
    pub fn generate(
        seed: u64,
        template_count: usize,
        key_length: usize,
        min_distance: Option<usize>,
        embed: EmbedParams,
        tau: f64,
    ) -> Result<Self> {
        let code = LdpcCode::build(seed, crate::codec::ldpc::DEFAULT_DATA_BITS, crate::codec::ldpc::DEFAULT_CODE_BITS)?;
        let min_distance = min_distance.unwrap_or_else(|| default_min_distance(key_length));
        let codewords = key_length == code.n_code();
        let set = if codewords {
            generate_codeword_templates(&code, template_count, seed, min_distance)?
        } else {
            generate_templates(template_count, key_length, seed, min_distance)?
        };
        let embed = EmbedParams { bits_per_frame: key_length, ..embed };
        let manifest = Self {
            version: MANIFEST_VERSION.into(),
            seed,
            k_data: code.k_data(),
            n_code: code.n_code(),
            template_count,
            key_length,
            min_distance,
            keys_are_codewords: codewords,
            keys: set.keys().iter().map(BitString::to_hex).collect(),
            embed,
            tau,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    /// Checks everything that can be checked without building the code.
    pub fn validate_shape(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::UnsupportedVersion(self.version.clone()));
        }
        if self.k_data == 0 || self.k_data >= self.n_code || self.n_code > MAX_CODE_BITS {
            return Err(Error::InvalidParameter(format!(
                "code shape ({}, {}) must satisfy 0 < k_data < n_code <= {MAX_CODE_BITS}",
                self.n_code, self.k_data
            )));
        }
        if self.template_count == 0 || self.template_count > MAX_TEMPLATES {
            return Err(Error::InvalidParameter(format!(
                "M must lie in 1..={MAX_TEMPLATES}, got {}",
                self.template_count
            )));
        }
        if self.key_length == 0 || self.key_length > MAX_CODE_BITS {
            return Err(Error::InvalidParameter(format!("d must lie in 1..={MAX_CODE_BITS}, got {}", self.key_length)));
        }
        if self.keys.len() != self.template_count {
            return Err(Error::LengthMismatch { expected: self.template_count, actual: self.keys.len() });
        }
        if self.keys_are_codewords && self.key_length != self.n_code {
            return Err(Error::InvalidParameter(format!(
                "codeword keys need d = n_code, got d = {} and n_code = {}",
                self.key_length, self.n_code
            )));
        }
        if self.embed.bits_per_frame != self.key_length {
            return Err(Error::InvalidParameter(format!(
                "embed.bits_per_frame {} differs from d = {}",
                self.embed.bits_per_frame, self.key_length
            )));
        }
        self.embed.validate()?;
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        for key in &self.keys {
            BitString::from_hex(key, self.key_length)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        let set = self.templates()?;
        if self.keys_are_codewords {
            let code = self.code()?;
            if let Some(j) = set.keys().iter().position(|k| !code.is_codeword(k)) {
                return Err(Error::InvalidParameter(format!("key {j} is not a codeword of the manifest code")));
            }
        }
        Ok(())
    }

    pub fn code(&self) -> Result<LdpcCode> {
        LdpcCode::build(self.seed, self.k_data, self.n_code)
    }

    pub fn templates(&self) -> Result<TemplateSet> {
        let keys = self.keys.iter().map(|k| BitString::from_hex(k, self.key_length)).collect::<Result<Vec<_>>>()?;
        TemplateSet::from_keys(keys, self.seed, self.min_distance)
    }

    /// Payload word of every key; only defined for codeword keys.
    pub fn key_words(&self) -> Result<Vec<DataWord>> {
        if !self.keys_are_codewords {
            return Err(Error::InvalidParameter("manifest keys are not codewords".into()));
        }
        let code = self.code()?;
        self.templates()?.keys().iter().map(|k| DataWord::new(k.slice(0, self.k_data)?, &code)).collect()
    }

    /// Pretty JSON with a trailing newline; the canonical file form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn at_line(line: usize, e: Error) -> Error {
    Error::InvalidParameter(format!("line {line}: {e}"))
}

/// One 16-bit word per line as four hex digits. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_payload_words(text: &str) -> Result<Vec<DataWord>> {
    let words = numbered_lines(text)
        .map(|(n, line)| {
            if line.len() != 4 {
                return Err(at_line(
                    n,
                    Error::InvalidHex { input: line.into(), reason: "expected 4 hex digits".into() },
                ));
            }
            let bits = BitString::from_hex(line, 16).map_err(|e| at_line(n, e))?;
            Ok(DataWord::from_u16(bits.to_u64().expect("16 bits fit") as u16))
        })
        .collect::<Result<Vec<_>>>()?;
    if words.is_empty() {
        return Err(Error::Empty("payload word list"));
    }
    if words.len() > MAX_FRAMES {
        return Err(Error::InvalidParameter(format!("more than {MAX_FRAMES} payload words")));
    }
    Ok(words)
}

pub fn format_payload_words(words: &[DataWord]) -> String {
    words.iter().map(|w| format!("{}\n", w.bits().to_hex())).collect()
}

/// One key per line in hex, each `key_length` bits.
pub fn parse_keys(text: &str, key_length: usize) -> Result<FrameKeyMatrix> {
    if key_length == 0 || key_length > MAX_CODE_BITS {
        return Err(Error::InvalidParameter(format!("key length must lie in 1..={MAX_CODE_BITS}")));
    }
    let keys = numbered_lines(text)
        .map(|(n, line)| BitString::from_hex(line, key_length).map_err(|e| at_line(n, e)))
        .collect::<Result<Vec<_>>>()?;
    if keys.len() > MAX_FRAMES {
        return Err(Error::InvalidParameter(format!("more than {MAX_FRAMES} keys")));
    }
    FrameKeyMatrix::new(keys)
}

pub fn format_keys(keys: &FrameKeyMatrix) -> String {
    keys.keys().iter().map(|k| format!("{}\n", k.to_hex())).collect()
}

/// JSON array of labels, `-1` marking an expected inserted frame.
pub fn parse_truth(text: &str, template_count: usize) -> Result<GroundTruthSequence> {
    let truth: GroundTruthSequence = serde_json::from_str(text)?;
    truth.validate(template_count)?;
    Ok(truth)
}

pub fn parse_tamper_spec(text: &str) -> Result<TamperSpec> {
    let spec: TamperSpec = serde_json::from_str(text)?;
    if spec.insert_count > MAX_FRAMES {
        return Err(Error::InvalidTamper(format!("insert_count above {MAX_FRAMES}")));
    }
    Ok(spec)
}

/// A named preset or an explicit channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelEntry {
    Preset(String),
    Model(ChannelModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeShape {
    /// Defaults to the config's seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_k")]
    pub k_data: usize,
    #[serde(default = "default_n")]
    pub n_code: usize,
}

impl Default for CodeShape {
    fn default() -> Self {
        Self { seed: None, k_data: default_k(), n_code: default_n() }
    }
}

fn default_k() -> usize {
    crate::codec::ldpc::DEFAULT_DATA_BITS
}
fn default_n() -> usize {
    crate::codec::ldpc::DEFAULT_CODE_BITS
}
fn default_frames() -> usize {
    16
}
fn default_trials() -> usize {
    1000
}
fn default_tau() -> f64 {
    DEFAULT_TAU
}

/// Simulation config file. Templates are codewords of the configured code.
///
/// When `taus` or `attacks` is present the run is a localization sweep over
/// every (channel, attack, tau); otherwise it is one pipeline simulation per
/// channel with the given `tamper` plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFile {
    pub seed: u64,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_frames")]
    pub templates: usize,
    #[serde(default)]
    pub min_distance: Option<usize>,
    #[serde(default)]
    pub code: CodeShape,
    /// Presets, explicit models, or `"all"` for every preset.
    pub channels: Vec<ChannelEntry>,
    #[serde(default)]
    pub tamper: TamperPlan,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
    #[serde(default)]
    pub attacks: Option<Vec<Attack>>,
}

impl SimFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::InvalidParameter(format!("{name}: {msg}")));
        if self.frames == 0 || self.frames > MAX_FRAMES {
            return field("frames", format!("must lie in 1..={MAX_FRAMES}, got {}", self.frames));
        }
        if self.templates == 0 || self.templates > MAX_TEMPLATES {
            return field("templates", format!("must lie in 1..={MAX_TEMPLATES}, got {}", self.templates));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return field("trials", format!("must lie in 1..={MAX_TRIALS}, got {}", self.trials));
        }
        if self.code.k_data == 0 || self.code.k_data >= self.code.n_code || self.code.n_code > MAX_CODE_BITS {
            return field("code", format!("need 0 < k_data < n_code <= {MAX_CODE_BITS}"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return field("tau", format!("must lie in [0, 1], got {}", self.tau));
        }
        if let Some(taus) = &self.taus {
            if taus.is_empty() {
                return field("taus", "must not be empty".into());
            }
            if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
                return field("taus", format!("values must lie in (0, 1), got {t}"));
            }
        }
        if matches!(&self.attacks, Some(a) if a.is_empty()) {
            return field("attacks", "must not be empty".into());
        }
        if self.channels.is_empty() {
            return field("channels", "must not be empty".into());
        }
        for c in &self.channels {
            match c {
                ChannelEntry::Preset(name) if name == "all" => {}
                ChannelEntry::Preset(name) => {
                    preset(name).map_err(|e| Error::InvalidParameter(format!("channels: {e}")))?;
                }
                ChannelEntry::Model(m) => {
                    m.validate().map_err(|e| Error::InvalidParameter(format!("channels: {e}")))?
                }
            }
        }
        Ok(())
    }

    pub fn is_sweep(&self) -> bool {
        self.taus.is_some() || self.attacks.is_some()
    }

    pub fn channel_models(&self) -> Result<Vec<ChannelModel>> {
        let mut out = Vec::new();
        for c in &self.channels {
            match c {
                ChannelEntry::Preset(name) if name == "all" => {
                    for p in preset_names() {
                        out.push(preset(p)?);
                    }
                }
                ChannelEntry::Preset(name) => out.push(preset(name)?),
                ChannelEntry::Model(m) => out.push(m.clone()),
            }
        }
        Ok(out)
    }

    /// One simulation config per channel, sharing code and templates.
    pub fn resolve(&self) -> Result<Vec<SimConfig>> {
        self.validate()?;
        let code = LdpcCode::build(self.code.seed.unwrap_or(self.seed), self.code.k_data, self.code.n_code)?;
        let min_distance = self.min_distance.unwrap_or_else(|| default_min_distance(code.n_code()));
        let templates = generate_codeword_templates(&code, self.templates, self.seed, min_distance)?;
        Ok(self
            .channel_models()?
            .into_iter()
            .map(|channel| SimConfig {
                frames: self.frames,
                templates: templates.clone(),
                code: code.clone(),
                channel,
                tamper: self.tamper.clone(),
                trials: self.trials,
                master_seed: self.seed,
                tau: self.tau,
            })
            .collect())
    }

    pub fn sweep_taus(&self) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| vec![self.tau])
    }

    pub fn sweep_attacks(&self) -> Vec<Attack> {
        self.attacks.clone().unwrap_or_else(Attack::threshold_study)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tamper::FrameLabel;

    fn manifest() -> Manifest {
        Manifest::generate(1, 4, 48, None, EmbedParams::default(), 0.8).unwrap()
    }

    #[test]
    fn manifest_roundtrip_and_digest() {
        let m = manifest();
        assert_eq!(m.keys.len(), 4);
        assert!(m.keys_are_codewords);
        let text = m.to_json();
        let back = Manifest::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.digest(), m.digest());
        assert_eq!(m.digest().len(), 64);
        let words = m.key_words().unwrap();
        let code = m.code().unwrap();
        for (w, k) in words.iter().zip(m.templates().unwrap().keys()) {
            assert_eq!(code.encode(w).unwrap().bits(), k);
        }
    }

    #[test]
    fn manifest_rejects_inconsistency() {
        let m = manifest();
        let bad_version = Manifest { version: "framemark/0".into(), ..m.clone() };
        assert!(matches!(Manifest::parse(&bad_version.to_json()), Err(Error::UnsupportedVersion(_))));
        let mut bad_key = m.clone();
        bad_key.keys[0] = "000000000001".into();
        assert!(Manifest::parse(&bad_key.to_json()).is_err());
        let short = Manifest { keys: m.keys[..3].to_vec(), ..m.clone() };
        assert!(Manifest::parse(&short.to_json()).is_err());
        let huge = Manifest { n_code: usize::MAX, ..m.clone() };
        assert!(huge.validate().is_err());
        let text = m.to_json().replacen('{', "{\n  \"extra\": 1,", 1);
        assert!(Manifest::parse(&text).is_err());
    }

    #[test]
    fn random_keys_for_other_lengths() {
        let m = Manifest::generate(2, 3, 20, None, EmbedParams::default(), 0.8).unwrap();
        assert!(!m.keys_are_codewords);
        assert_eq!(m.embed.bits_per_frame, 20);
        assert!(m.key_words().is_err());
        assert!(matches!(
            Manifest::generate(1, 3, 2, Some(2), EmbedParams::default(), 0.8),
            Err(Error::InfeasibleTemplates { .. })
        ));
    }

    #[test]
    fn payload_words() {
        let words = parse_payload_words("a5a5\n\n# comment\nFFFF\n0000\n").unwrap();
        assert_eq!(words.len(), 3);
        assert_eq!(format_payload_words(&words), "a5a5\nffff\n0000\n");
        assert!(matches!(parse_payload_words(""), Err(Error::Empty(_))));
        assert!(parse_payload_words("a5a\n").unwrap_err().to_string().contains("line 1"));
        assert!(parse_payload_words("0000\nzzzz\n").unwrap_err().to_string().contains("line 2"));
        assert!(parse_payload_words("+fff\n").is_err());
    }

    #[test]
    fn keys_and_truth() {
        let keys = parse_keys("0123456789ab\nffffffffffff\n", 48).unwrap();
        assert_eq!(keys.len(), 2);
        assert_eq!(format_keys(&keys), "0123456789ab\nffffffffffff\n");
        assert!(parse_keys("0123\n", 48).is_err());
        assert!(parse_keys("", 48).is_err());
        let truth = parse_truth("[0, -1, 1]", 2).unwrap();
        assert_eq!(truth.entries()[1], FrameLabel::Inserted);
        assert!(parse_truth("[0, 2]", 2).is_err());
        assert!(parse_truth("[-2]", 2).is_err());
    }

    #[test]
    fn sim_file_defaults_and_errors() {
        let f = SimFile::parse(r#"{"seed": 3, "channels": ["clean"]}"#).unwrap();
        assert_eq!((f.frames, f.templates, f.trials, f.tau), (16, 16, 1000, 0.8));
        assert!(!f.is_sweep());
        let all = SimFile::parse(r#"{"seed": 3, "channels": ["all"], "trials": 1}"#).unwrap();
        assert_eq!(all.channel_models().unwrap().len(), 12);
        let model = SimFile::parse(r#"{"seed": 3, "channels": [{"name": "x", "kind": "iid", "ber": 0.1}]}"#).unwrap();
        assert_eq!(model.channel_models().unwrap()[0].marginal_ber(), 0.1);

        let err = SimFile::parse(r#"{"seed": 3, "channels": ["clean"], "trials": 0}"#).unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
        let err = SimFile::parse(r#"{"seed": 3, "channels": ["nope"]}"#).unwrap_err();
        assert!(err.to_string().contains("channels"), "{err}");
        let err = SimFile::parse(r#"{"seed": 3, "channels": ["clean"], "tirals": 5}"#).unwrap_err();
        assert!(err.to_string().contains("tirals"), "{err}");
        assert!(SimFile::parse(r#"{"seed": 3, "channels": ["clean"], "taus": [1.0]}"#).is_err());
    }

    #[test]
    fn sim_file_resolves_codeword_templates() {
        let f = SimFile::parse(r#"{"seed": 3, "channels": ["clean", "jpeg"], "trials": 2, "templates": 4}"#).unwrap();
        let configs = f.resolve().unwrap();
        assert_eq!(configs.len(), 2);
        for c in &configs {
            assert!(c.templates.keys().iter().all(|k| c.code.is_codeword(k)));
        }
    }
}
