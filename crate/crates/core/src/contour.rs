//! F0 estimation, inter-pausal unit segmentation and polynomial contour fits.

use serde::{Deserialize, Serialize};

use crate::aems::poly::{fit_polynomial, PolyFit};
use crate::audio::Waveform;
use crate::error::{degenerate, param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Frame {
    pub time_s: f64,
    /// `None` marks an unvoiced frame.
    pub f0_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Track {
    frames: Vec<F0Frame>,
    hop_s: f64,
}

impl F0Track {
    /// Frame times must increase by `hop_s` (within 1% of a hop) and voiced
    /// values must be finite and positive.
    pub fn new(frames: Vec<F0Frame>, hop_s: f64) -> Result<Self> {
        if !(hop_s.is_finite() && hop_s > 0.0) {
            return Err(param(format!("frame hop must be positive, got {hop_s}")));
        }
        for (i, f) in frames.iter().enumerate() {
            if !f.time_s.is_finite() {
                return Err(param(format!("frame {i}: non-finite time")));
            }
            if let Some(v) = f.f0_hz {
                if !(v.is_finite() && v > 0.0) {
                    return Err(param(format!("frame {i}: invalid f0 {v}")));
                }
            }
        }
        for (i, w) in frames.windows(2).enumerate() {
            if ((w[1].time_s - w[0].time_s) - hop_s).abs() > 0.01 * hop_s {
                return Err(param(format!(
                    "frame {}: time step {} differs from hop {hop_s}",
                    i + 1,
                    w[1].time_s - w[0].time_s
                )));
            }
        }
        Ok(Self { frames, hop_s })
    }

    pub fn frames(&self) -> &[F0Frame] {
        &self.frames
    }

    pub fn hop_s(&self) -> f64 {
        self.hop_s
    }

    pub fn voiced(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frames.iter().filter_map(|f| f.f0_hz.map(|v| (f.time_s, v)))
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced().count()
    }

    /// Median of the voiced values.
    pub fn median_f0(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.voiced().map(|(_, f)| f).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    }

    /// `time_s,f0_hz` with an empty field for unvoiced frames.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,f0_hz\n");
        for f in &self.frames {
            match f.f0_hz {
                Some(v) => out.push_str(&format!("{},{}\n", f.time_s, v)),
                None => out.push_str(&format!("{},\n", f.time_s)),
            }
        }
        out
    }

    /// Parse the CSV form. The hop is taken from the first two frames
    /// (10 ms for a single-frame track).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.len() < 2 || &headers[0] != "time_s" || &headers[1] != "f0_hz" {
            return Err(Error::Syntax {
                line: 1,
                message: "expected header `time_s,f0_hz`".into(),
            });
        }
        let mut frames = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| rec.get(i).unwrap_or("");
            let time_s = field(0).parse::<f64>().map_err(|e| Error::Syntax {
                line,
                message: format!("bad time `{}`: {e}", field(0)),
            })?;
            let f0_hz = match field(1) {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| Error::Syntax {
                    line,
                    message: format!("bad f0 `{s}`: {e}"),
                })?),
            };
            frames.push(F0Frame { time_s, f0_hz });
        }
        let hop = match frames.as_slice() {
            [a, b, ..] => b.time_s - a.time_s,
            _ => 0.01,
        };
        Self::new(frames, hop)
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Syntax {
        line,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Params {
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub voicing_ratio: f64,
}

impl Default for F0Params {
    fn default() -> Self {
        Self {
            fmin_hz: 60.0,
            fmax_hz: 500.0,
            frame_ms: 40.0,
            hop_ms: 10.0,
            voicing_ratio: 0.3,
        }
    }
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

/// Normalized autocorrelation at `lag`.
fn nacf(x: &[f64], lag: usize) -> f64 {
    let (a, b) = (&x[..x.len() - lag], &x[lag..]);
    let mut xy = 0.0;
    let mut xx = 0.0;
    let mut yy = 0.0;
    for (p, q) in a.iter().zip(b) {
        xy += p * q;
        xx += p * p;
        yy += q * q;
    }
    let d = (xx * yy).sqrt();
    if d > 0.0 {
        xy / d
    } else {
        0.0
    }
}

/// Frame-wise autocorrelation pitch tracker.
///
/// Frame times are frame centres. Within the lag band the first local maximum
/// reaching 90% of the band maximum is taken, which keeps sub-harmonic lags of
/// a periodic signal from winning on rounding noise.
pub fn estimate_f0_autocorr(wave: &Waveform, params: &F0Params) -> Result<F0Track> {
    let F0Params {
        fmin_hz,
        fmax_hz,
        frame_ms,
        hop_ms,
        voicing_ratio,
    } = *params;
    if !(fmin_hz > 0.0 && fmax_hz > fmin_hz) {
        return Err(param(format!("need 0 < fmin < fmax, got {fmin_hz}..{fmax_hz}")));
    }
    let rate = wave.rate() as f64;
    if rate < 4.0 * fmax_hz {
        return Err(param(format!(
            "sample rate {rate} Hz is below 4 x fmax ({fmax_hz} Hz)"
        )));
    }
    if !(hop_ms > 0.0 && frame_ms > 0.0) {
        return Err(param("frame and hop lengths must be positive"));
    }
    let frame_len = (frame_ms / 1000.0 * rate).round() as usize;
    let hop = (hop_ms / 1000.0 * rate).round() as usize;
    let lag_min = (rate / fmax_hz).ceil() as usize;
    let lag_max = (rate / fmin_hz).floor() as usize;
    if hop == 0 || frame_len <= lag_max + 1 {
        return Err(param(format!(
            "frame of {frame_ms} ms is too short for fmin {fmin_hz} Hz"
        )));
    }
    let x = wave.samples();
    let track_rms = rms(x);
    let n_frames = if x.len() >= frame_len {
        1 + (x.len() - frame_len) / hop
    } else {
        0
    };
    let hop_s = hop as f64 / rate;
    let frames = (0..n_frames)
        .map(|i| {
            let start = i * hop;
            let frame = &x[start..start + frame_len];
            let time_s = (start as f64 + frame_len as f64 / 2.0) / rate;
            let mut f0_hz = None;
            if track_rms > 0.0 && rms(frame) >= 0.01 * track_rms {
                f0_hz = frame_pitch(frame, lag_min, lag_max, voicing_ratio)
                    .map(|lag| (rate / lag).clamp(fmin_hz, fmax_hz));
            }
            F0Frame { time_s, f0_hz }
        })
        .collect();
    F0Track::new(frames, hop_s)
}

fn frame_pitch(frame: &[f64], lag_min: usize, lag_max: usize, voicing_ratio: f64) -> Option<f64> {
    let lo = lag_min.saturating_sub(1).max(1);
    let hi = lag_max + 1;
    let r: Vec<f64> = (lo..=hi).map(|l| nacf(frame, l)).collect();
    let at = |lag: usize| r[lag - lo];
    let band = lag_min..=lag_max;
    let best = band.clone().map(at).fold(f64::NEG_INFINITY, f64::max);
    if best < voicing_ratio {
        return None;
    }
    let is_peak = |l: usize| {
        let left = if l > lo { at(l - 1) } else { f64::NEG_INFINITY };
        at(l) >= left && at(l) >= at(l + 1)
    };
    let lag = band
        .clone()
        .find(|&l| at(l) >= 0.9 * best && is_peak(l))
        .or_else(|| band.clone().find(|&l| at(l) == best))?;
    let mut refined = lag as f64;
    if lag > lo {
        let (a, b, c) = (at(lag - 1), at(lag), at(lag + 1));
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            refined += (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    Some(refined)
}

/// Inter-pausal unit, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ipu {
    pub start_s: f64,
    pub end_s: f64,
}

impl Ipu {
    pub fn new(start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite() && end_s > start_s) {
            return Err(param(format!("IPU needs end > start, got {start_s}..{end_s}")));
        }
        Ok(Self { start_s, end_s })
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t <= self.end_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpuParams {
    pub silence_db: f64,
    pub min_pause_ms: f64,
    pub min_ipu_ms: f64,
}

impl Default for IpuParams {
    fn default() -> Self {
        Self {
            silence_db: -40.0,
            min_pause_ms: 200.0,
            min_ipu_ms: 100.0,
        }
    }
}

const IPU_FRAME_S: f64 = 0.01;

/// Split a waveform into inter-pausal units.
///
/// Energy is measured on 10 ms frames relative to the loudest frame. Silent
/// runs shorter than the minimum pause are bridged. Units shorter than the
/// minimum length are dropped at the edges and otherwise merged with the
/// neighbour across the shorter gap.
pub fn segment_ipus(wave: &Waveform, params: &IpuParams) -> Vec<Ipu> {
    let rate = wave.rate() as f64;
    let flen = ((IPU_FRAME_S * rate).round() as usize).max(1);
    let energies: Vec<f64> = wave.samples().chunks(flen).map(rms).collect();
    let peak = energies.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let threshold = peak * 10f64.powf(params.silence_db / 20.0);
    let loud: Vec<bool> = energies.iter().map(|&e| e > 0.0 && e >= threshold).collect();

    // runs of loud frames as [first, last + 1)
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < loud.len() {
        if loud[i] {
            let s = i;
            while i < loud.len() && loud[i] {
                i += 1;
            }
            runs.push((s, i));
        } else {
            i += 1;
        }
    }
    let frame_s = flen as f64 / rate;
    let min_pause = (params.min_pause_ms / 1000.0 / frame_s).round() as usize;
    let mut bridged: Vec<(usize, usize)> = Vec::new();
    for r in runs {
        match bridged.last_mut() {
            Some(last) if r.0 - last.1 < min_pause => last.1 = r.1,
            _ => bridged.push(r),
        }
    }

    let min_len = params.min_ipu_ms / 1000.0;
    let len_s = |r: &(usize, usize)| (r.1 - r.0) as f64 * frame_s;
    loop {
        let Some(k) = bridged.iter().position(|r| len_s(r) < min_len) else {
            break;
        };
        if k == 0 || k == bridged.len() - 1 {
            bridged.remove(k);
            continue;
        }
        let gap_left = bridged[k].0 - bridged[k - 1].1;
        let gap_right = bridged[k + 1].0 - bridged[k].1;
        if gap_left <= gap_right {
            bridged[k - 1].1 = bridged[k].1;
        } else {
            bridged[k + 1].0 = bridged[k].0;
        }
        bridged.remove(k);
    }

    let dur = wave.duration_s();
    bridged
        .into_iter()
        .map(|(s, e)| Ipu {
            start_s: s as f64 * frame_s,
            end_s: (e as f64 * frame_s).min(dur),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourDomain {
    WholeTrack,
    Ipu { start_s: f64, end_s: f64 },
}

impl ContourDomain {
    fn origin(&self) -> f64 {
        match self {
            ContourDomain::WholeTrack => 0.0,
            ContourDomain::Ipu { start_s, .. } => *start_s,
        }
    }
}

/// Polynomial model of an F0 contour. The fit's time axis is seconds from
/// the domain start (track time 0 for the whole track).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyContourModel {
    pub fit: PolyFit,
    pub domain: ContourDomain,
    pub voiced_frame_count: usize,
}

impl PolyContourModel {
    /// Model value at absolute track time `t`.
    pub fn eval_at(&self, t: f64) -> f64 {
        self.fit.eval(t - self.domain.origin())
    }
}

/// Least-squares polynomial over the voiced frames of `track` inside `domain`.
pub fn fit_contour(track: &F0Track, degree: usize, domain: Option<Ipu>) -> Result<PolyContourModel> {
    let domain = match domain {
        Some(ipu) => ContourDomain::Ipu {
            start_s: ipu.start_s,
            end_s: ipu.end_s,
        },
        None => ContourDomain::WholeTrack,
    };
    let origin = domain.origin();
    let (xs, ys): (Vec<f64>, Vec<f64>) = track
        .voiced()
        .filter(|(t, _)| match domain {
            ContourDomain::WholeTrack => true,
            ContourDomain::Ipu { start_s, end_s } => *t >= start_s && *t <= end_s,
        })
        .map(|(t, f)| (t - origin, f))
        .unzip();
    if xs.len() < degree + 1 {
        return Err(degenerate(format!(
            "{} voiced frames cannot support a degree-{degree} contour",
            xs.len()
        )));
    }
    let fit = fit_polynomial(&xs, &ys, degree)?;
    Ok(PolyContourModel {
        fit,
        domain,
        voiced_frame_count: xs.len(),
    })
}
