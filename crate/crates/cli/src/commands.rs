use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use framemark::bits::BitString;
use framemark::channel::{
    preset, simulate_pipeline, sweep, threshold_sweep, transmit, write_summary_csv, write_sweep_csv, SimConfig,
    SimReport, SimSummary, SweepRow, TamperPlan,
};
use framemark::codec::{DataWord, LdpcCode, TemplateSet};
use framemark::detection::DetectionReport;
use framemark::io::{
    format_keys, format_payload_words, parse_keys, parse_payload_words, parse_tamper_spec, parse_truth, sha256_hex,
    Manifest, SimFile,
};
use framemark::rng;
use framemark::tamper::{
    apply_combined, diagnose, localize, FrameKeyMatrix, FrameLabel, FrameOrigin, FrameSequence, GroundTruthSequence,
    LocalizationResult, TamperEvent, DEFAULT_TAU,
};
use framemark::watermark::{
    embed_frame, extract_frame, list_frame_files, psnr, read_frames_dir, run_robustness_bench, standard_suite,
    write_frames_dir, BenchReport, DistortOutcome, DistortionSpec, EmbedParams, Frame, DEFAULT_ALPHA,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::*;

/// Exit status of a command that ran to completion.
pub const POSITIVE: u8 = 0;
pub const NEGATIVE: u8 = 1;

#[derive(Serialize)]
struct RunReport<'a, T: Serialize> {
    command: &'static str,
    argv: &'a [String],
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest_digest: Option<String>,
    inputs: BTreeMap<String, String>,
    result: T,
}

pub struct Session {
    pub global: Global,
    pub argv: Vec<String>,
    manifest: Option<(Manifest, String)>,
    inputs: BTreeMap<String, String>,
}

impl Session {
    pub fn new(global: Global, argv: Vec<String>) -> Self {
        Self { global, argv, manifest: None, inputs: BTreeMap::new() }
    }

    fn manifest(&mut self) -> Result<Manifest> {
        if let Some((m, _)) = &self.manifest {
            return Ok(m.clone());
        }
        let path = self.global.manifest.clone().ok_or_else(|| anyhow!("--manifest is required"))?;
        let text = read_text(&path)?;
        let m = Manifest::parse(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
        self.manifest = Some((m.clone(), sha256_hex(text.as_bytes())));
        Ok(m)
    }

    fn tau(&mut self) -> Result<f64> {
        match self.global.tau {
            Some(t) => Ok(t),
            None if self.global.manifest.is_some() => Ok(self.manifest()?.tau),
            None => Ok(DEFAULT_TAU),
        }
    }

    fn read_input(&mut self, name: &str, path: &Path) -> Result<String> {
        let text = read_text(path)?;
        self.inputs.insert(name.into(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn read_frames(&mut self, name: &str, dir: &Path) -> Result<Vec<Frame>> {
        let files = list_frame_files(dir).with_context(|| format!("reading frames from {}", dir.display()))?;
        let mut listing = String::new();
        for f in &files {
            let bytes = fs::read(f).with_context(|| format!("reading {}", f.display()))?;
            let file_name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            listing.push_str(&format!("{file_name} {}\n", sha256_hex(&bytes)));
        }
        self.inputs.insert(name.into(), sha256_hex(listing.as_bytes()));
        read_frames_dir(dir).with_context(|| format!("decoding frames in {}", dir.display()))
    }

    fn emit_json<T: Serialize>(&self, command: &'static str, result: T) -> Result<()> {
        let report = RunReport {
            command,
            argv: &self.argv,
            seed: self.global.seed,
            manifest_digest: self.manifest.as_ref().map(|(_, d)| d.clone()),
            inputs: self.inputs.clone(),
            result,
        };
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        self.emit(text.as_bytes())
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.global.out {
            Some(path) => write_file(path, bytes),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(bytes)?;
                Ok(())
            }
        }
    }

    fn json_only(&self, command: &str) -> Result<()> {
        if self.global.format == Format::Csv {
            bail!("{command} has no CSV output");
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

/// PSNR with identical frames reported as null.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn expected_truth(frames: usize, templates: usize) -> GroundTruthSequence {
    GroundTruthSequence::new((0..frames).map(|i| FrameLabel::Template(i % templates)).collect())
}

fn extract_keys(frames: &[Frame], params: &EmbedParams) -> Result<FrameKeyMatrix> {
    let keys = frames.par_iter().map(|f| extract_frame(f, params)).collect::<framemark::error::Result<Vec<_>>>()?;
    Ok(FrameKeyMatrix::new(keys)?)
}

fn encode_all(code: &LdpcCode, words: &[DataWord]) -> Result<Vec<BitString>> {
    words.iter().map(|w| Ok(code.encode(w)?.bits().clone())).collect()
}

pub fn keygen(ctx: &mut Session, a: &KeygenArgs) -> Result<u8> {
    ctx.json_only("keygen")?;
    let seed = ctx.global.seed;
    let embed = EmbedParams {
        alpha: a.alpha.unwrap_or(DEFAULT_ALPHA),
        pn_seed: rng::derive_seed("pn", seed, &[]),
        ..EmbedParams::default()
    };
    let tau = ctx.global.tau.unwrap_or(DEFAULT_TAU);
    let manifest = Manifest::generate(seed, a.templates, a.length, a.min_distance, embed, tau)?;
    if let Some(path) = &a.words_out {
        write_file(path, format_payload_words(&manifest.key_words()?).as_bytes())?;
    }
    ctx.emit(manifest.to_json().as_bytes())?;
    Ok(POSITIVE)
}

#[derive(Serialize)]
struct EmbedResult {
    frames: usize,
    psnr: Vec<Option<f64>>,
    mean_psnr: Option<f64>,
}

pub fn embed(ctx: &mut Session, a: &EmbedArgs) -> Result<u8> {
    ctx.json_only("embed")?;
    let manifest = ctx.manifest()?;
    let code = manifest.code()?;
    let frames = ctx.read_frames("frames", &a.frames)?;
    let words = parse_payload_words(&ctx.read_input("payloads", &a.payloads)?)?;
    if words.len() != frames.len() {
        bail!("{} payload words for {} frames", words.len(), frames.len());
    }
    if manifest.embed.bits_per_frame != code.n_code() {
        bail!("manifest embeds {} bits per frame but codewords have {}", manifest.embed.bits_per_frame, code.n_code());
    }
    let codewords = encode_all(&code, &words)?;
    let marked = frames
        .par_iter()
        .zip(&codewords)
        .map(|(f, c)| embed_frame(f, c, &manifest.embed))
        .collect::<framemark::error::Result<Vec<_>>>()?;
    write_frames_dir(&a.frames_out, &marked).with_context(|| format!("writing {}", a.frames_out.display()))?;
    let values = frames.iter().zip(&marked).map(|(x, y)| psnr(x, y)).collect::<framemark::error::Result<Vec<_>>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    ctx.emit_json(
        "embed",
        EmbedResult { frames: frames.len(), psnr: values.into_iter().map(finite).collect(), mean_psnr: finite(mean) },
    )?;
    Ok(POSITIVE)
}

#[derive(Serialize)]
struct ExtractResult {
    frames: usize,
    keys: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    words: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<Vec<bool>>,
}

pub fn extract(ctx: &mut Session, a: &ExtractArgs) -> Result<u8> {
    ctx.json_only("extract")?;
    let manifest = ctx.manifest()?;
    let frames = ctx.read_frames("frames", &a.frames)?;
    let keys = extract_keys(&frames, &manifest.embed)?;
    if let Some(path) = &a.keys_out {
        write_file(path, format_keys(&keys).as_bytes())?;
    }
    let (words, converged) = if manifest.embed.bits_per_frame == manifest.n_code {
        let code = manifest.code()?;
        let decoded = keys.keys().iter().map(|k| code.decode(k)).collect::<framemark::error::Result<Vec<_>>>()?;
        (
            Some(decoded.iter().map(|d| d.word.bits().to_hex()).collect()),
            Some(decoded.iter().map(|d| d.converged).collect()),
        )
    } else {
        (None, None)
    };
    let result = ExtractResult {
        frames: keys.len(),
        keys: keys.keys().iter().map(BitString::to_hex).collect(),
        words,
        converged,
    };
    ctx.emit_json("extract", result)?;
    Ok(POSITIVE)
}

#[derive(Serialize)]
struct VerifyResult {
    #[serde(flatten)]
    detection: DetectionReport,
    threshold: f64,
    detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<String>,
}

/// Received keys from either a frame directory or a key list.
fn received_keys(
    ctx: &mut Session,
    frames: Option<&PathBuf>,
    keys: Option<&PathBuf>,
    d: usize,
) -> Result<FrameKeyMatrix> {
    match (frames, keys) {
        (Some(dir), _) => {
            let manifest = ctx.manifest()?;
            let frames = ctx.read_frames("frames", dir)?;
            extract_keys(&frames, &manifest.embed)
        }
        (None, Some(path)) => Ok(parse_keys(&ctx.read_input("keys", path)?, d)?),
        (None, None) => bail!("one of --frames or --keys is required"),
    }
}

pub fn verify(ctx: &mut Session, a: &VerifyArgs) -> Result<u8> {
    let manifest = ctx.manifest()?;
    let code = manifest.code()?;
    let mut received = received_keys(ctx, a.frames.as_ref(), a.keys.as_ref(), code.n_code())?.into_keys();
    let words = parse_payload_words(&ctx.read_input("payloads", &a.payloads)?)?;
    if words.len() != received.len() {
        bail!("{} payload words for {} frames", words.len(), received.len());
    }
    if let Some(name) = &a.channel {
        let channel = preset(name)?;
        received = received
            .iter()
            .enumerate()
            .map(|(i, k)| transmit(k, &channel, ctx.global.seed, 0, FrameOrigin::Original(i)))
            .collect();
    }
    let sent = encode_all(&code, &words)?;
    let mut total = 0;
    let mut correct = 0;
    let mut hits = 0;
    for ((word, s), r) in words.iter().zip(&sent).zip(&received) {
        if r.len() != s.len() {
            bail!("extracted key length {} differs from codeword length {}", r.len(), s.len());
        }
        correct += s.matching_bits(r)?;
        total += s.len();
        if code.decode(r)?.word == *word {
            hits += 1;
        }
    }
    let detection = DetectionReport::new(total, correct as f64 / total as f64, Some(hits as f64 / words.len() as f64))?;
    let detected = detection.log10_p < a.threshold;
    let result = VerifyResult { detection, threshold: a.threshold, detected, channel: a.channel.clone() };
    match ctx.global.format {
        Format::Json => ctx.emit_json("verify", result)?,
        Format::Csv => ctx.emit(&csv_bytes(&[result])?)?,
    }
    Ok(if detected { POSITIVE } else { NEGATIVE })
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_tau_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("tau sweep {spec:?} must be start:stop:step"))?;
    let [start, stop, step] = parts[..] else {
        bail!("tau sweep {spec:?} must be start:stop:step");
    };
    let valid = step > 0.0 && stop >= start && start.is_finite() && stop.is_finite();
    if !valid {
        bail!("tau sweep {spec:?} needs step > 0 and stop >= start");
    }
    let steps = ((stop - start) / step + 1e-9).floor() as usize;
    if steps > 10_000 {
        bail!("tau sweep {spec:?} has too many points");
    }
    Ok((0..=steps).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn localization_templates(ctx: &mut Session, manifest: &Manifest, payloads: Option<&PathBuf>) -> Result<TemplateSet> {
    let Some(path) = payloads else {
        return Ok(manifest.templates()?);
    };
    let words = parse_payload_words(&ctx.read_input("payloads", path)?)?;
    let mut keys: Vec<BitString> = Vec::new();
    for k in encode_all(&manifest.code()?, &words)? {
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    Ok(TemplateSet::from_keys(keys, manifest.seed, 0)?)
}

#[derive(Serialize)]
struct LocalizeResult {
    tau: f64,
    #[serde(flatten)]
    localization: LocalizationResult,
    events: Vec<TamperEvent>,
}

pub fn localize_cmd(ctx: &mut Session, a: &LocalizeArgs) -> Result<u8> {
    let manifest = ctx.manifest()?;
    let templates = localization_templates(ctx, &manifest, a.payloads.as_ref())?;
    let tau = ctx.tau()?;
    let expected_frames = a.expected_frames.unwrap_or(templates.count());

    if let Some(grid) = &a.tau_sweep {
        let taus = parse_tau_grid(grid)?;
        let config = SimConfig {
            frames: expected_frames,
            templates,
            code: manifest.code()?,
            channel: preset(&a.channel)?,
            tamper: TamperPlan::None,
            trials: a.trials,
            master_seed: ctx.global.seed,
            tau,
        };
        let rows = threshold_sweep(&config, &taus)?;
        emit_sweep(ctx, "localize", rows)?;
        return Ok(POSITIVE);
    }

    let keys = received_keys(ctx, a.frames.as_ref(), a.keys.as_ref(), templates.key_len())?;
    let truth = match &a.truth {
        Some(path) => parse_truth(&ctx.read_input("truth", path)?, templates.count())?,
        None => expected_truth(keys.len(), templates.count()),
    };
    let localization = localize(&templates, &keys, &truth, tau)?;
    let order: Vec<usize> = (0..expected_frames).map(|i| i % templates.count()).collect();
    let events = diagnose(&localization.predicted, &order);
    let tampered = !events.is_empty();
    ctx.json_only("localize without --tau-sweep")?;
    ctx.emit_json("localize", LocalizeResult { tau, localization, events })?;
    Ok(if tampered { NEGATIVE } else { POSITIVE })
}

fn emit_sweep(ctx: &Session, command: &'static str, rows: Vec<SweepRow>) -> Result<()> {
    match ctx.global.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            ctx.emit(&buf)
        }
        Format::Json => ctx.emit_json(command, rows),
    }
}

#[derive(Serialize)]
struct TamperResult {
    frames_in: usize,
    frames_out: usize,
    truth: GroundTruthSequence,
}

pub fn tamper(ctx: &mut Session, a: &TamperArgs) -> Result<u8> {
    ctx.json_only("tamper")?;
    let manifest = ctx.manifest()?;
    let keys = parse_keys(&ctx.read_input("keys", &a.keys)?, manifest.key_length)?;
    let spec = parse_tamper_spec(&ctx.read_input("spec", &a.spec)?)?;
    let frames_in = keys.len();
    let seq = FrameSequence::new(keys, expected_truth(frames_in, manifest.template_count))?;
    let out = apply_combined(&seq, &spec)?;
    write_file(&a.keys_out, format_keys(&out.keys).as_bytes())?;
    if let Some(path) = &a.truth_out {
        write_file(path, format!("{}\n", serde_json::to_string(&out.truth)?).as_bytes())?;
    }
    ctx.emit_json("tamper", TamperResult { frames_in, frames_out: out.keys.len(), truth: out.truth })?;
    Ok(POSITIVE)
}

#[derive(Serialize)]
struct DistortResult {
    distortion: DistortionSpec,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    frames: usize,
}

pub fn distort(ctx: &mut Session, a: &DistortArgs) -> Result<u8> {
    ctx.json_only("distort")?;
    let spec: DistortionSpec = a.spec.parse()?;
    let frames = ctx.read_frames("frames", &a.frames)?;
    let result = match spec.apply_clip(&frames)? {
        DistortOutcome::Applied(out) => {
            write_frames_dir(&a.frames_out, &out).with_context(|| format!("writing {}", a.frames_out.display()))?;
            DistortResult { distortion: spec, status: "applied", note: None, frames: out.len() }
        }
        DistortOutcome::Skipped(reason) => {
            eprintln!("skipped {spec}: {reason}");
            DistortResult { distortion: spec, status: "skipped", note: Some(reason), frames: 0 }
        }
    };
    ctx.emit_json("distort", result)?;
    Ok(POSITIVE)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SimOutput {
    Summaries { summaries: Vec<SimSummary> },
    Reports { reports: Vec<SimReport> },
}

pub fn simulate(ctx: &mut Session, a: &SimulateArgs) -> Result<u8> {
    let text = ctx.read_input("config", &a.config)?;
    let file = SimFile::parse(&text).with_context(|| format!("invalid config {}", a.config.display()))?;
    let configs = file.resolve()?;
    if file.is_sweep() {
        let taus = file.sweep_taus();
        let attacks = file.sweep_attacks();
        let mut rows = Vec::new();
        for c in &configs {
            eprintln!(
                "sweep {}: {} attacks x {} taus x {} trials",
                c.channel.name,
                attacks.len(),
                taus.len(),
                c.trials
            );
            rows.extend(sweep(c, &taus, &attacks)?);
        }
        emit_sweep(ctx, "simulate", rows)?;
        return Ok(POSITIVE);
    }
    let mut reports = Vec::with_capacity(configs.len());
    for c in &configs {
        eprintln!("simulate {}: {} trials", c.channel.name, c.trials);
        reports.push(simulate_pipeline(c)?);
    }
    match ctx.global.format {
        Format::Csv => {
            let summaries: Vec<SimSummary> = reports.into_iter().map(|r| r.summary).collect();
            let mut buf = Vec::new();
            write_summary_csv(&summaries, &mut buf)?;
            ctx.emit(&buf)?;
        }
        Format::Json if a.per_trial => ctx.emit_json("simulate", SimOutput::Reports { reports })?,
        Format::Json => {
            let summaries = reports.into_iter().map(|r| r.summary).collect();
            ctx.emit_json("simulate", SimOutput::Summaries { summaries })?;
        }
    }
    Ok(POSITIVE)
}

#[derive(Serialize)]
struct BenchCsvRow<'a> {
    distortion: &'a str,
    status: &'a str,
    #[serde(rename = "L")]
    total_bits: Option<usize>,
    bit_accuracy: Option<f64>,
    word_accuracy: Option<f64>,
    log10_p: Option<f64>,
}

pub fn bench(ctx: &mut Session, a: &BenchArgs) -> Result<u8> {
    let manifest = ctx.manifest()?;
    let code = manifest.code()?;
    let frames = ctx.read_frames("frames", &a.frames)?;
    let words = match &a.payloads {
        Some(path) => parse_payload_words(&ctx.read_input("payloads", path)?)?,
        None => {
            let keys = manifest.key_words()?;
            (0..frames.len()).map(|i| keys[i % keys.len()].clone()).collect()
        }
    };
    let distortions = if a.clean_only {
        Vec::new()
    } else {
        match &a.distortions {
            Some(list) => list.iter().map(|s| s.parse()).collect::<framemark::error::Result<Vec<DistortionSpec>>>()?,
            None => standard_suite(rng::derive_seed("gaussian-noise", ctx.global.seed, &[])),
        }
    };
    let report: BenchReport = run_robustness_bench(&frames, &words, &code, &manifest.embed, &distortions)?;
    match ctx.global.format {
        Format::Json => ctx.emit_json("bench", report)?,
        Format::Csv => {
            let rows: Vec<BenchCsvRow> = report
                .rows()
                .map(|r| BenchCsvRow {
                    distortion: &r.distortion,
                    status: match r.status {
                        framemark::watermark::BenchStatus::Applied => "applied",
                        framemark::watermark::BenchStatus::Skipped => "skipped",
                    },
                    total_bits: r.detection.as_ref().map(|d| d.total_bits),
                    bit_accuracy: r.detection.as_ref().map(|d| d.bit_accuracy),
                    word_accuracy: r.detection.as_ref().and_then(|d| d.word_accuracy),
                    log10_p: r.detection.as_ref().map(|d| d.log10_p),
                })
                .collect();
            ctx.emit(&csv_bytes(&rows)?)?;
        }
    }
    Ok(POSITIVE)
}
