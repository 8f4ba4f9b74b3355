use std::io::Cursor;

use hound::{SampleFormat, WavSpec, WavWriter};
use prosody_core::audio::decode_wav;
use proptest::prelude::*;

fn encode<F: FnMut(&mut WavWriter<&mut Cursor<Vec<u8>>>)>(spec: WavSpec, mut write: F) -> Vec<u8> {
    let mut cur = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cur, spec).unwrap();
        write(&mut w);
        w.finalize().unwrap();
    }
    cur.into_inner()
}

fn spec(channels: u16, rate: u32, bits: u16, format: SampleFormat) -> WavSpec {
    WavSpec {
        channels,
        sample_rate: rate,
        bits_per_sample: bits,
        sample_format: format,
    }
}

#[test]
fn pcm16_mono() {
    let samples: Vec<i16> = vec![0, 16384, -16384, 32767, -32768];
    let buf = encode(spec(1, 16000, 16, SampleFormat::Int), |w| {
        for &s in &samples {
            w.write_sample(s).unwrap();
        }
    });
    let wave = decode_wav(&buf).unwrap();
    assert_eq!(wave.rate(), 16000);
    let expected: Vec<f64> = samples.iter().map(|&s| s as f64 / 32768.0).collect();
    assert_eq!(wave.samples(), expected.as_slice());
}

#[test]
fn pcm8_unsigned_offset() {
    // hound takes signed i8 and stores it with the +128 offset
    let buf = encode(spec(1, 8000, 8, SampleFormat::Int), |w| {
        for s in [0i8, 64, -128, 127] {
            w.write_sample(s).unwrap();
        }
    });
    let wave = decode_wav(&buf).unwrap();
    assert_eq!(wave.samples(), &[0.0, 0.5, -1.0, 127.0 / 128.0]);
}

#[test]
fn float32_stereo_downmix() {
    let buf = encode(spec(2, 44100, 32, SampleFormat::Float), |w| {
        for (l, r) in [(0.5f32, 0.25f32), (-1.0, 1.0), (0.125, 0.125)] {
            w.write_sample(l).unwrap();
            w.write_sample(r).unwrap();
        }
    });
    let wave = decode_wav(&buf).unwrap();
    assert_eq!(wave.rate(), 44100);
    assert_eq!(wave.samples(), &[0.375, 0.0, 0.125]);
}

#[test]
fn unsupported_rate_rejected() {
    let buf = encode(spec(1, 96000, 16, SampleFormat::Int), |w| {
        w.write_sample(0i16).unwrap();
    });
    assert!(decode_wav(&buf).is_err());
}

proptest! {
    #[test]
    fn pcm16_round_trip(samples in prop::collection::vec(any::<i16>(), 1..2000), stereo in any::<bool>()) {
        let channels = if stereo { 2 } else { 1 };
        let buf = encode(spec(channels, 22050, 16, SampleFormat::Int), |w| {
            for &s in &samples {
                for _ in 0..channels {
                    w.write_sample(s).unwrap();
                }
            }
        });
        let wave = decode_wav(&buf).unwrap();
        prop_assert_eq!(wave.len(), samples.len());
        for (a, &b) in wave.samples().iter().zip(&samples) {
            prop_assert!((a - b as f64 / 32768.0).abs() < 1e-15);
        }
    }
}
