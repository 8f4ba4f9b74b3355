//! Amplitude Envelope Modulation Spectrum.
//!
//! The pipeline is: full-wave rectification, peak-picking envelope extraction,
//! moving-average smoothing, and an unwindowed DFT of the (mean-removed)
//! envelope restricted to low frequencies. Frequency zones are read off a
//! degree-9 polynomial fitted to that spectrum.

pub mod envelope;
pub mod poly;
pub mod spectrum;
pub mod stats;
pub mod zones;

use serde::{Deserialize, Serialize};

pub use envelope::{extract_envelope_peaks, rectify_full_wave, smooth_envelope, Envelope};
pub use poly::{fit_polynomial, PolyFit};
pub use spectrum::{dft_magnitude, Spectrum, SpectrumParams};
pub use stats::zscore;
pub use zones::{detect_zones, spectrum_shape, FrequencyZone, ZoneParams, SHAPE_DEGREE};

use crate::audio::{synthesize_am, Waveform};
use crate::error::{degenerate, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AemsParams {
    pub peak_window_ms: f64,
    pub envelope_rate_hz: f64,
    pub smoothing_ms: f64,
    pub cutoff_hz: f64,
    pub zero_mean: bool,
}

impl AemsParams {
    pub fn with_cutoff(cutoff_hz: f64) -> Self {
        Self {
            cutoff_hz,
            ..Self::default()
        }
    }
}

impl Default for AemsParams {
    fn default() -> Self {
        Self {
            peak_window_ms: 20.0,
            envelope_rate_hz: 100.0,
            smoothing_ms: 50.0,
            cutoff_hz: 50.0,
            zero_mean: true,
        }
    }
}

/// Smoothed amplitude envelope of a waveform (the first three pipeline stages).
pub fn demodulate(wave: &Waveform, params: &AemsParams) -> Result<Envelope> {
    if wave.is_empty() {
        return Err(degenerate("empty waveform"));
    }
    let rectified = rectify_full_wave(wave);
    let env = extract_envelope_peaks(&rectified, params.peak_window_ms, params.envelope_rate_hz)?;
    smooth_envelope(&env, params.smoothing_ms)
}

/// Run the whole pipeline and return the low-frequency envelope spectrum.
pub fn aems(wave: &Waveform, params: &AemsParams) -> Result<Spectrum> {
    let env = demodulate(wave, params)?;
    let mut spec = dft_magnitude(&env, params.cutoff_hz, params.zero_mean)?;
    spec.params.peak_window_ms = Some(params.peak_window_ms);
    spec.params.smoothing_ms = Some(params.smoothing_ms);
    Ok(spec)
}

/// Outcome of the calibration run on a synthetic amplitude-modulated tone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub carrier_hz: f64,
    pub modulation_hz: f64,
    pub duration_s: f64,
    pub resolution_hz: f64,
    pub peak_hz: f64,
    pub peak_magnitude: f64,
    pub harmonic_hz: Option<f64>,
    pub harmonic_magnitude: Option<f64>,
    pub zones: Vec<FrequencyZone>,
    pub pass: bool,
}

/// Synthesize a 200 Hz carrier modulated at 5 Hz for 2 s and check that the
/// AEMS shows the modulation as its dominant peak with a weaker second harmonic.
pub fn calibrate(params: &AemsParams) -> Result<CalibrationReport> {
    calibrate_with(200.0, 5.0, 2.0, 16000, params)
}

pub fn calibrate_with(
    carrier_hz: f64,
    modulation_hz: f64,
    duration_s: f64,
    rate: u32,
    params: &AemsParams,
) -> Result<CalibrationReport> {
    let wave = synthesize_am(carrier_hz, modulation_hz, 1.0, duration_s, rate)?;
    let spec = aems(&wave, params)?;
    let res = spec.resolution_hz;
    let peak = spec.argmax().ok_or_else(|| degenerate("empty spectrum"))?;
    let peak_magnitude = spec.magnitudes[peak];

    // strongest local maximum within one bin of twice the peak frequency
    let target = (2.0 * spec.freq(peak) / res).round() as isize;
    let harmonic = (target - 1..=target + 1)
        .filter(|&k| k >= 1 && (k as usize) + 1 < spec.len())
        .map(|k| k as usize)
        .filter(|&k| {
            let m = &spec.magnitudes;
            m[k] > m[k - 1] && m[k] > m[k + 1]
        })
        .max_by(|&a, &b| spec.magnitudes[a].partial_cmp(&spec.magnitudes[b]).unwrap());

    let zones = detect_zones(&spec, &ZoneParams::default())?;
    let peak_ok = (spec.freq(peak) - modulation_hz).abs() <= res;
    let harmonic_ok = harmonic
        .map(|k| {
            (spec.freq(k) - 2.0 * modulation_hz).abs() <= res
                && spec.magnitudes[k] < peak_magnitude
                && spec.magnitudes[k] > 0.0
        })
        .unwrap_or(false);
    Ok(CalibrationReport {
        carrier_hz,
        modulation_hz,
        duration_s,
        resolution_hz: res,
        peak_hz: spec.freq(peak),
        peak_magnitude,
        harmonic_hz: harmonic.map(|k| spec.freq(k)),
        harmonic_magnitude: harmonic.map(|k| spec.magnitudes[k]),
        zones,
        pass: peak_ok && harmonic_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_report() {
        let r = calibrate(&AemsParams::with_cutoff(50.0)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.resolution_hz, 0.5);
        assert!((r.peak_hz - 5.0).abs() <= 0.5);
        assert_eq!(r.harmonic_hz, Some(10.0));
        assert!(r.harmonic_magnitude.unwrap() < r.peak_magnitude);
        assert_eq!(r.zones.len(), 1);
    }

    #[test]
    fn silence_gives_zero_spectrum() {
        let w = Waveform::new(vec![0.0; 16000], 16000).unwrap();
        let s = aems(&w, &AemsParams::default()).unwrap();
        assert!(s.magnitudes.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn pipeline_is_deterministic_and_records_params() {
        let w = synthesize_am(150.0, 3.0, 0.8, 1.5, 11025).unwrap();
        let p = AemsParams::with_cutoff(20.0);
        let a = aems(&w, &p).unwrap();
        let b = aems(&w, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.peak_window_ms, Some(20.0));
        assert_eq!(a.params.smoothing_ms, Some(50.0));
        assert_eq!(a.params.envelope_rate_hz, 100.0);
        assert_eq!(a.params.n_samples, 150);
    }
}
