//! Amplitude demodulation: rectification, peak-picking envelope and smoothing.

use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{degenerate, param, Result};

/// Uniformly sampled, non-negative amplitude envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    values: Vec<f64>,
    rate: f64,
}

impl Envelope {
    pub fn new(values: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(param("envelope rate must be positive"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(param(format!("envelope value {v} is negative or non-finite")));
        }
        Ok(Self { values, rate })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Absolute value of every sample.
pub fn rectify_full_wave(wave: &Waveform) -> Waveform {
    let samples = wave.samples().iter().map(|s| s.abs()).collect();
    Waveform::new(samples, wave.rate()).expect("absolute values stay within [-1, 1]")
}

/// Envelope by peak picking.
///
/// A window of `window_ms` slides over the rectified signal in quarter-window
/// steps; the maximum of each window (value and position) is an envelope peak,
/// counted once when several windows share it. Peaks are linearly
/// interpolated onto a uniform grid at `env_rate`, and the grid points before
/// the first or after the last peak take the nearest peak value. Trailing
/// windows shorter than half a window contribute no peak.
pub fn extract_envelope_peaks(rectified: &Waveform, window_ms: f64, env_rate: f64) -> Result<Envelope> {
    if !(window_ms > 0.0) || !(env_rate > 0.0) {
        return Err(param("window length and envelope rate must be positive"));
    }
    let fs = rectified.rate() as f64;
    let win = ((window_ms / 1000.0) * fs).round() as usize;
    let x = rectified.samples();
    if win == 0 || x.len() < win {
        return Err(degenerate(format!(
            "signal of {} samples is shorter than one {window_ms} ms window ({win} samples)",
            x.len()
        )));
    }

    let hop = (win / 4).max(1);
    let mut peaks: Vec<(f64, f64)> = Vec::with_capacity(x.len() / hop + 1);
    let mut last = None;
    let mut start = 0;
    while start < x.len() && (x.len() - start) * 2 >= win {
        let block = &x[start..(start + win).min(x.len())];
        let (i, v) = block
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        let at = start + i;
        if last.is_none_or(|l| at > l) {
            peaks.push((at as f64 / fs, v.max(0.0)));
            last = Some(at);
        }
        start += hop;
    }

    let n_env = ((x.len() as f64 / fs) * env_rate).floor().max(1.0) as usize;
    let mut values = Vec::with_capacity(n_env);
    let mut k = 0;
    for j in 0..n_env {
        let t = j as f64 / env_rate;
        while k + 1 < peaks.len() && peaks[k + 1].0 <= t {
            k += 1;
        }
        let v = if t <= peaks[0].0 {
            peaks[0].1
        } else if k + 1 >= peaks.len() {
            peaks[peaks.len() - 1].1
        } else {
            let (t0, v0) = peaks[k];
            let (t1, v1) = peaks[k + 1];
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        };
        values.push(v);
    }
    Envelope::new(values, env_rate)
}

/// Centered moving average of `window_ms`.
///
/// The window length is rounded to an odd number of samples. At the edges the
/// signal is extended by mirror reflection (`x[-1] = x[0]`, `x[-2] = x[1]`, …),
/// which keeps the averaging operator doubly stochastic: constants are
/// reproduced and the sum (hence the mean) of the envelope is preserved.
pub fn smooth_envelope(env: &Envelope, window_ms: f64) -> Result<Envelope> {
    let period_ms = 1000.0 / env.rate();
    if !(window_ms >= period_ms * (1.0 - 1e-9)) {
        return Err(param(format!(
            "smoothing window {window_ms} ms is shorter than one envelope sample ({period_ms} ms)"
        )));
    }
    let x = env.values();
    let n = x.len();
    if n == 0 {
        return Ok(env.clone());
    }
    let w = (window_ms / period_ms).round().max(1.0) as usize;
    let half = (w / 2).min(n - 1);
    let width = (2 * half + 1) as f64;
    let reflect = |p: isize| -> f64 {
        let n = n as isize;
        let idx = if p < 0 {
            -1 - p
        } else if p >= n {
            2 * n - 1 - p
        } else {
            p
        };
        x[idx as usize]
    };

    // running sum over the reflected sequence
    let h = half as isize;
    let mut sum: f64 = (-h..=h).map(reflect).sum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n as isize {
        out.push((sum / width).max(0.0));
        sum += reflect(i + h + 1) - reflect(i - h);
    }
    Envelope::new(out, env.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aems::stats::{mean, pearson};
    use crate::audio::synthesize_am;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rectify_examples() {
        let w = Waveform::new(vec![-0.5, 0.25], 8000).unwrap();
        assert_eq!(rectify_full_wave(&w).samples(), &[0.5, 0.25]);
        let z = Waveform::new(vec![0.0; 10], 8000).unwrap();
        assert_eq!(rectify_full_wave(&z).samples(), z.samples());
        let r = rectify_full_wave(&w);
        assert_eq!(rectify_full_wave(&r), r);
    }

    #[test]
    fn unit_sinusoid_envelope_is_flat() {
        let w = synthesize_am(200.0, 5.0, 0.0, 1.0, 16000).unwrap();
        let env = extract_envelope_peaks(&rectify_full_wave(&w), 20.0, 100.0).unwrap();
        assert_eq!(env.len(), 100);
        assert!(env.values().iter().all(|v| (v - 1.0).abs() < 0.02));
    }

    #[test]
    fn calibration_envelope_tracks_modulator() {
        let w = synthesize_am(200.0, 5.0, 1.0, 2.0, 16000).unwrap();
        let env = extract_envelope_peaks(&rectify_full_wave(&w), 20.0, 100.0).unwrap();
        let modulator: Vec<f64> = (0..env.len())
            .map(|j| (1.0 + (2.0 * PI * 5.0 * j as f64 / 100.0).cos()) / 2.0)
            .collect();
        let r = pearson(env.values(), &modulator).unwrap();
        assert!(r >= 0.99, "correlation {r}");
    }

    #[test]
    fn silence_gives_zero_envelope() {
        let w = Waveform::new(vec![0.0; 8000], 8000).unwrap();
        let env = extract_envelope_peaks(&w, 20.0, 100.0).unwrap();
        assert!(env.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_signal_is_degenerate() {
        let w = Waveform::new(vec![0.1; 100], 16000).unwrap();
        assert!(matches!(
            extract_envelope_peaks(&w, 20.0, 100.0),
            Err(crate::Error::Degenerate(_))
        ));
    }

    #[test]
    fn smoothing_constant_and_impulse() {
        let c = Envelope::new(vec![0.7; 40], 100.0).unwrap();
        let s = smooth_envelope(&c, 50.0).unwrap();
        assert!(s.values().iter().all(|v| (v - 0.7).abs() < 1e-12));

        let mut imp = vec![0.0; 21];
        imp[10] = 1.0;
        let s = smooth_envelope(&Envelope::new(imp, 100.0).unwrap(), 50.0).unwrap();
        // five-sample box centred on the impulse
        for (i, v) in s.values().iter().enumerate() {
            let expected = if (8..=12).contains(&i) { 0.2 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "index {i}: {v}");
        }
        assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_window_too_short() {
        let c = Envelope::new(vec![1.0; 4], 100.0).unwrap();
        assert!(smooth_envelope(&c, 5.0).is_err());
    }

    proptest! {
        #[test]
        fn smoothing_preserves_mean(
            xs in prop::collection::vec(0.0f64..10.0, 1..300),
            window in 10.0f64..400.0,
        ) {
            let env = Envelope::new(xs, 100.0).unwrap();
            let s = smooth_envelope(&env, window).unwrap();
            prop_assert_eq!(s.len(), env.len());
            prop_assert!((mean(s.values()) - mean(env.values())).abs() <= 1e-9);
        }

        #[test]
        fn envelope_fidelity_for_deep_modulation(
            depth in 0.5f64..=1.0,
            mod_hz in 1.0f64..8.0,
            carrier in 120.0f64..300.0,
        ) {
            let w = synthesize_am(carrier, mod_hz, depth, 2.0, 16000).unwrap();
            let env = extract_envelope_peaks(&rectify_full_wave(&w), 20.0, 100.0).unwrap();
            let modulator: Vec<f64> = (0..env.len())
                .map(|j| 1.0 + depth * (2.0 * PI * mod_hz * j as f64 / 100.0).cos())
                .collect();
            let r = pearson(env.values(), &modulator).unwrap();
            prop_assert!(r >= 0.99, "correlation {}", r);
        }
    }
}
