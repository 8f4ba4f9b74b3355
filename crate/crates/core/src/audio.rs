//! Waveform container, RIFF/WAVE reading and synthetic test signals.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A mono sampled signal with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    samples: Vec<f64>,
    rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, rate: u32) -> Result<Self> {
        if rate == 0 {
            return Err(param("sample rate must be positive"));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(param(format!(
                "sample {i} = {} lies outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

const WAVE_FORMAT_PCM: u16 = 0x0001;
const WAVE_FORMAT_IEEE_FLOAT: u16 = 0x0003;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: u16,
    channels: u16,
    rate: u32,
    bits: u16,
    block_align: u16,
}

fn read_u32(buf: &[u8], at: usize) -> Result<u32> {
    buf.get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| truncated(at, "expected 4 bytes"))
}

fn truncated(offset: usize, what: &str) -> Error {
    Error::Parse {
        offset,
        message: format!("truncated file: {what}"),
    }
}

fn format_err(chunk: &str, message: impl Into<String>) -> Error {
    Error::Format {
        chunk: chunk.to_string(),
        message: message.into(),
    }
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk> {
    if body.len() < 16 {
        return Err(format_err("fmt ", format!("chunk too short ({} bytes)", body.len())));
    }
    let mut format = u16::from_le_bytes([body[0], body[1]]);
    let channels = u16::from_le_bytes([body[2], body[3]]);
    let rate = u32::from_le_bytes([body[4], body[5], body[6], body[7]]);
    let block_align = u16::from_le_bytes([body[12], body[13]]);
    let bits = u16::from_le_bytes([body[14], body[15]]);

    if format == WAVE_FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) subformat GUID(16)
        if body.len() < 40 {
            return Err(format_err("fmt ", "extensible format without sub-format GUID"));
        }
        format = u16::from_le_bytes([body[24], body[25]]);
    }

    match (format, bits) {
        (WAVE_FORMAT_PCM, 8) | (WAVE_FORMAT_PCM, 16) | (WAVE_FORMAT_IEEE_FLOAT, 32) => {}
        (WAVE_FORMAT_PCM, b) => {
            return Err(format_err("fmt ", format!("unsupported PCM bit depth {b}")))
        }
        (WAVE_FORMAT_IEEE_FLOAT, b) => {
            return Err(format_err("fmt ", format!("unsupported float bit depth {b}")))
        }
        (f, _) => {
            return Err(format_err(
                "fmt ",
                format!("compressed or unknown codec 0x{f:04x}"),
            ))
        }
    }
    if !(1..=2).contains(&channels) {
        return Err(format_err("fmt ", format!("{channels} channels (expected 1 or 2)")));
    }
    if !(8000..=48000).contains(&rate) {
        return Err(format_err("fmt ", format!("sample rate {rate} Hz outside 8-48 kHz")));
    }
    let expected_align = channels * bits / 8;
    if block_align != expected_align {
        return Err(format_err(
            "fmt ",
            format!("block align {block_align} inconsistent with {channels}x{bits}-bit frames"),
        ));
    }
    Ok(FmtChunk {
        format,
        channels,
        rate,
        bits,
        block_align,
    })
}

fn decode_sample(fmt: &FmtChunk, b: &[u8]) -> f64 {
    match (fmt.format, fmt.bits) {
        (WAVE_FORMAT_PCM, 8) => (b[0] as f64 - 128.0) / 128.0,
        (WAVE_FORMAT_PCM, 16) => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        // float samples may overshoot full scale; they are clipped to keep the Waveform invariant
        _ => (f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64).clamp(-1.0, 1.0),
    }
}

/// Decode an in-memory RIFF/WAVE file into a mono [`Waveform`].
///
/// Only the `fmt ` and `data` chunks are interpreted; any other chunk is skipped.
/// Stereo input is downmixed by the per-frame arithmetic mean.
pub fn decode_wav(buf: &[u8]) -> Result<Waveform> {
    if buf.len() < 12 {
        return Err(truncated(buf.len(), "RIFF header needs 12 bytes"));
    }
    if &buf[0..4] != b"RIFF" {
        return Err(format_err("RIFF", "missing RIFF signature"));
    }
    if &buf[8..12] != b"WAVE" {
        return Err(format_err("RIFF", "form type is not WAVE"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut pos = 12;
    while pos < buf.len() {
        if buf.len() - pos < 8 {
            return Err(truncated(pos, "incomplete chunk header"));
        }
        let id = &buf[pos..pos + 4];
        let size = read_u32(buf, pos + 4)? as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= buf.len())
            .ok_or_else(|| {
                truncated(
                    body_start,
                    &format!(
                        "chunk `{}` declares {size} bytes, {} available",
                        String::from_utf8_lossy(id),
                        buf.len() - body_start
                    ),
                )
            })?;
        let body = &buf[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => {
                let fmt = fmt.ok_or_else(|| format_err("data", "data chunk precedes fmt chunk"))?;
                let align = fmt.block_align as usize;
                if !body.len().is_multiple_of(align) {
                    return Err(truncated(
                        body_start + body.len() - body.len() % align,
                        "partial sample frame at end of data",
                    ));
                }
                let width = (fmt.bits / 8) as usize;
                let channels = fmt.channels as usize;
                let samples = body
                    .chunks_exact(align)
                    .map(|frame| {
                        let sum: f64 = frame
                            .chunks_exact(width)
                            .map(|s| decode_sample(&fmt, s))
                            .sum();
                        sum / channels as f64
                    })
                    .collect();
                return Waveform::new(samples, fmt.rate);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
    Err(match fmt {
        None => format_err("fmt ", "no fmt chunk found"),
        Some(_) => format_err("data", "no data chunk found"),
    })
}

/// Read a RIFF/WAVE file from disk.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let buf = fs::read(path)?;
    decode_wav(&buf)
}

/// Sinusoidal carrier with raised-cosine amplitude modulation:
/// `x(t) = (1 + depth·cos(2π·mod_hz·t)) / (1 + depth) · sin(2π·carrier_hz·t)`.
pub fn synthesize_am(
    carrier_hz: f64,
    mod_hz: f64,
    depth: f64,
    dur_s: f64,
    rate: u32,
) -> Result<Waveform> {
    synthesize_multi_am(carrier_hz, &[(mod_hz, depth)], dur_s, rate)
}

/// Sine carrier under several cosine modulators:
/// `(1 + Σ d_i cos 2π f_i t) / (1 + Σ d_i) · sin 2π f_c t`.
///
/// The depths must sum to at most 1 so the envelope stays non-negative.
pub fn synthesize_multi_am(
    carrier_hz: f64,
    modulators: &[(f64, f64)],
    dur_s: f64,
    rate: u32,
) -> Result<Waveform> {
    if rate == 0 {
        return Err(param("sample rate must be positive"));
    }
    if !(carrier_hz > 0.0 && carrier_hz < rate as f64 / 2.0) {
        return Err(param(format!(
            "carrier {carrier_hz} Hz must lie below the Nyquist frequency {} Hz",
            rate as f64 / 2.0
        )));
    }
    for &(mod_hz, depth) in modulators {
        if !(mod_hz >= 0.0 && mod_hz < carrier_hz) {
            return Err(param(format!(
                "modulation {mod_hz} Hz must be below the carrier {carrier_hz} Hz"
            )));
        }
        if !(0.0..=1.0).contains(&depth) {
            return Err(param(format!("modulation depth {depth} outside [0, 1]")));
        }
    }
    let total: f64 = modulators.iter().map(|m| m.1).sum();
    if total > 1.0 + 1e-12 {
        return Err(param(format!("modulation depths sum to {total} > 1")));
    }
    if !(dur_s > 0.0 && dur_s.is_finite()) {
        return Err(param("duration must be positive"));
    }
    let n = (dur_s * rate as f64).round() as usize;
    let fs = rate as f64;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let m: f64 = modulators
                .iter()
                .map(|&(f, d)| d * (2.0 * PI * f * t).cos())
                .sum();
            let env = (1.0 + m) / (1.0 + total);
            (env * (2.0 * PI * carrier_hz * t).sin()).clamp(-1.0, 1.0)
        })
        .collect();
    Waveform::new(samples, rate)
}

/// Resample by linear interpolation between neighbouring source samples.
pub fn resample_linear(wave: &Waveform, new_rate: u32) -> Result<Waveform> {
    if new_rate == 0 {
        return Err(param("target sample rate must be positive"));
    }
    if new_rate == wave.rate || wave.is_empty() {
        return Waveform::new(wave.samples.clone(), new_rate);
    }
    let src = &wave.samples;
    let ratio = wave.rate as f64 / new_rate as f64;
    let n_out = ((src.len() as f64 / ratio).round() as usize).max(1);
    let last = src.len() - 1;
    let samples = (0..n_out)
        .map(|j| {
            let pos = j as f64 * ratio;
            let i = pos.floor() as usize;
            if i >= last {
                return src[last];
            }
            let frac = pos - i as f64;
            src[i] + (src[i + 1] - src[i]) * frac
        })
        .collect();
    Waveform::new(samples, new_rate)
}
