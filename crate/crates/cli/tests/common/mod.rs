#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CORPUS: [&str; 4] = ["astronaut", "coffee", "chelsea", "rocket"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/corpus")
}

/// Copies the corpus into `dir` as a four-frame clip.
pub fn clip(dir: &Path) -> PathBuf {
    let frames = dir.join("frames");
    fs::create_dir_all(&frames).unwrap();
    for (i, name) in CORPUS.iter().enumerate() {
        fs::copy(corpus_dir().join(format!("{name}.png")), frames.join(format!("frame_{i:04}.png"))).unwrap();
    }
    frames
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framemark")).current_dir(dir).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

pub fn ok(out: Output) -> Output {
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// keygen with four templates, then embed the key words into the corpus clip.
pub fn marked_clip(dir: &Path, seed: &str) {
    clip(dir);
    ok(run(dir, &["--seed", seed, "--out", "m.json", "keygen", "-m", "4", "--words-out", "words.txt"]));
    ok(run(
        dir,
        &["--manifest", "m.json", "embed", "--frames", "frames", "--payloads", "words.txt", "--frames-out", "marked"],
    ));
}
