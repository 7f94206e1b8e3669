use std::path::PathBuf;

use framemark::bits::BitString;
use framemark::codec::{DataWord, LdpcCode};
use framemark::detection::bit_accuracy;
use framemark::rng;
use framemark::watermark::{
    embed_frame, extract_frame, psnr, run_robustness_bench, standard_suite, BenchStatus, DistortionSpec, EmbedParams,
    Frame, ENCODER_ENV,
};
use rand::Rng;

fn corpus() -> Vec<Frame> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/corpus");
    ["astronaut", "coffee", "chelsea", "rocket"]
        .iter()
        .map(|n| Frame::load(&dir.join(format!("{n}.png"))).unwrap())
        .collect()
}

fn payload(i: u64) -> BitString {
    BitString::random(48, &mut rng::stream("test-payload", 11, &[i])).unwrap()
}

#[test]
fn imperceptible_and_exact_on_clean_frames() {
    let params = EmbedParams::default();
    for (i, frame) in corpus().iter().enumerate() {
        let bits = payload(i as u64);
        let marked = embed_frame(frame, &bits, &params).unwrap();
        let db = psnr(frame, &marked).unwrap();
        assert!(db >= 40.0, "image {i}: {db:.2} dB");
        assert_eq!(extract_frame(&marked, &params).unwrap(), bits, "image {i}");
    }
}

#[test]
fn unmarked_frames_sit_at_chance() {
    let frames: Vec<Frame> = corpus().iter().map(|f| f.square_resized(128).unwrap()).collect();
    let mut r = rng::stream("chance", 0, &[]);
    let mut total = 0.0;
    let trials = 1000;
    for t in 0..trials {
        let params = EmbedParams { pn_seed: r.gen(), ..EmbedParams::default() };
        let got = extract_frame(&frames[t % frames.len()], &params).unwrap();
        total += bit_accuracy(&payload(1000 + t as u64), &got).unwrap();
    }
    let mean = total / trials as f64;
    assert!((0.48..=0.52).contains(&mean), "{mean}");
}

#[test]
fn survives_jpeg_50() {
    let params = EmbedParams::default();
    let mut acc = 0.0;
    let frames = corpus();
    for (i, frame) in frames.iter().enumerate() {
        let bits = payload(i as u64);
        let marked = embed_frame(frame, &bits, &params).unwrap();
        let jpeg = DistortionSpec::Jpeg(50).apply_frame(&marked, i).unwrap();
        acc += bit_accuracy(&bits, &extract_frame(&jpeg, &params).unwrap()).unwrap();
    }
    let mean = acc / frames.len() as f64;
    assert!(mean >= 0.70, "{mean}");
}

#[test]
fn bench_suite_shape_and_ordering() {
    let frames = corpus();
    let code = LdpcCode::build(7, 16, 48).unwrap();
    let payloads: Vec<DataWord> = (0..frames.len() as u16).map(|i| DataWord::from_u16(0x1234 + i * 977)).collect();
    let suite = standard_suite(3);
    let report = run_robustness_bench(&frames, &payloads, &code, &EmbedParams::default(), &suite).unwrap();
    assert_eq!(report.distortions.len(), 11);
    assert!(report.mean_psnr >= 40.0);
    let clean = report.clean.detection.as_ref().unwrap();
    assert_eq!((clean.bit_accuracy, clean.word_accuracy), (1.0, Some(1.0)));

    let mut geometric = Vec::new();
    let mut photometric = Vec::new();
    for (spec, row) in suite.iter().zip(&report.distortions) {
        println!("{:<22} {:?} {:?}", row.distortion, row.status, row.detection);
        if matches!(spec, DistortionSpec::Mpeg4) {
            if std::env::var_os(ENCODER_ENV).is_none() {
                assert_eq!(row.status, BenchStatus::Skipped);
            }
            continue;
        }
        let acc = row.detection.as_ref().unwrap().bit_accuracy;
        if spec.is_geometric() {
            geometric.push(acc);
        } else {
            photometric.push(acc);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&geometric) < mean(&photometric), "{geometric:?} vs {photometric:?}");

    let empty = run_robustness_bench(&frames, &payloads, &code, &EmbedParams::default(), &[]).unwrap();
    assert!(empty.distortions.is_empty());
    assert_eq!(empty.clean, report.clean);
}

#[test]
fn bench_rejects_mismatched_payloads() {
    let frames = corpus();
    let code = LdpcCode::build(7, 16, 48).unwrap();
    let payloads = vec![DataWord::from_u16(1)];
    assert!(run_robustness_bench(&frames, &payloads, &code, &EmbedParams::default(), &[]).is_err());
}
