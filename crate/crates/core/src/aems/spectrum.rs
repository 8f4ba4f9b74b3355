//! Low-frequency magnitude spectrum of an envelope.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::envelope::Envelope;
use crate::error::{degenerate, param, Result};

/// Parameters of the stages that produced a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub peak_window_ms: Option<f64>,
    pub envelope_rate_hz: f64,
    pub smoothing_ms: Option<f64>,
    pub zero_mean: bool,
    pub n_samples: usize,
}

/// Magnitudes `|X_k|` of bins `k = 0 ..= floor(cutoff_hz / resolution_hz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub resolution_hz: f64,
    pub cutoff_hz: f64,
    pub magnitudes: Vec<f64>,
    pub params: SpectrumParams,
}

impl Spectrum {
    pub fn freq(&self, bin: usize) -> f64 {
        bin as f64 * self.resolution_hz
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.magnitudes.len()).map(|k| self.freq(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Index of the largest magnitude (first one on ties).
    pub fn argmax(&self) -> Option<usize> {
        self.magnitudes
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((i, m)),
            })
            .map(|(i, _)| i)
    }

    /// CSV with header `freq_hz,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,magnitude\n");
        for (k, m) in self.magnitudes.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.freq(k), m));
        }
        out
    }
}

/// Full complex DFT of a real sequence, unwindowed and unpadded.
pub(crate) fn dft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Unwindowed DFT magnitudes of the envelope up to `cutoff_hz`.
///
/// Bins beyond the Nyquist bin `N/2` mirror lower bins and are never returned;
/// a cutoff above Nyquist is lowered to it.
pub fn dft_magnitude(env: &Envelope, cutoff_hz: f64, zero_mean: bool) -> Result<Spectrum> {
    let n = env.len();
    if n < 2 {
        return Err(degenerate(format!("spectrum needs at least 2 envelope samples, got {n}")));
    }
    if !(cutoff_hz >= 0.0) {
        return Err(param("cutoff must be non-negative"));
    }
    let resolution = env.rate() / n as f64;
    let mean = if zero_mean {
        env.values().iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let centered: Vec<f64> = env.values().iter().map(|v| v - mean).collect();
    let spectrum = dft(&centered);
    // tolerate rounding in cutoff / resolution when the cutoff sits exactly on a bin
    let last = ((cutoff_hz / resolution + 1e-9).floor() as usize).min(n / 2);
    let magnitudes = spectrum[..=last].iter().map(|c| c.norm()).collect();
    Ok(Spectrum {
        resolution_hz: resolution,
        cutoff_hz: cutoff_hz.min(env.rate() / 2.0),
        magnitudes,
        params: SpectrumParams {
            peak_window_ms: None,
            envelope_rate_hz: env.rate(),
            smoothing_ms: None,
            zero_mean,
            n_samples: n,
        },
    })
}
