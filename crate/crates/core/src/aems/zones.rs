//! Frequency-zone detection on a polynomial-smoothed spectrum.

use serde::{Deserialize, Serialize};

use super::poly::{fit_polynomial, PolyFit};
use super::spectrum::Spectrum;
use crate::error::Result;

/// Degree of the polynomial that gives the spectrum its "shape".
pub const SHAPE_DEGREE: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyZone {
    pub center_hz: f64,
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub prominence: f64,
}

impl FrequencyZone {
    pub fn period_s(&self) -> f64 {
        1.0 / self.center_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    /// Minimum prominence as a fraction of the largest magnitude.
    pub min_prominence: f64,
    /// Zones whose centers are closer than this are merged into the more prominent one.
    pub min_separation_hz: f64,
    pub degree: usize,
}

impl Default for ZoneParams {
    fn default() -> Self {
        Self {
            min_prominence: 0.1,
            min_separation_hz: 0.0,
            degree: SHAPE_DEGREE,
        }
    }
}

/// Polynomial shape of the spectrum (degree capped by the number of bins).
pub fn spectrum_shape(spec: &Spectrum, degree: usize) -> Result<PolyFit> {
    let degree = degree.min(spec.len().saturating_sub(1));
    fit_polynomial(&spec.freqs(), &spec.magnitudes, degree)
}

/// Frequency zones of a spectrum, most prominent first.
///
/// The polynomial shape splits `[0, cutoff]` at its interior local minima, so
/// every segment holds exactly one maximum of the shape (band edges count as
/// bounds). Within a segment the zone center is the strongest raw bin, and the
/// prominence is that magnitude above the higher of the lowest raw magnitudes
/// on either side of it. Segments whose prominence is below
/// `min_prominence · max(magnitudes)` are discarded.
pub fn detect_zones(spec: &Spectrum, params: &ZoneParams) -> Result<Vec<FrequencyZone>> {
    let n = spec.len();
    let raw = &spec.magnitudes;
    let top = raw.iter().cloned().fold(0.0f64, f64::max);
    if n < 3 || !(top > 0.0) {
        return Ok(Vec::new());
    }
    let shape = spectrum_shape(spec, params.degree)?;
    let smooth: Vec<f64> = spec.freqs().iter().map(|&f| shape.eval(f)).collect();
    let threshold = params.min_prominence * top;

    let mut bounds = vec![0];
    bounds.extend((1..n - 1).filter(|&k| smooth[k] < smooth[k - 1] && smooth[k] <= smooth[k + 1]));
    bounds.push(n - 1);

    let mut zones = Vec::new();
    for (i, pair) in bounds.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        // segments own [lo, hi); the last one also owns the final bin
        let owned_end = if i + 2 == bounds.len() { hi } else { hi - 1 };
        if owned_end < lo {
            continue;
        }
        let center = (lo..=owned_end)
            .max_by(|&a, &b| raw[a].partial_cmp(&raw[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        let left_floor = if center > lo {
            raw[lo..center].iter().cloned().fold(f64::INFINITY, f64::min)
        } else if lo > 0 {
            raw[lo - 1]
        } else {
            raw[center]
        };
        let right_floor = if center < hi {
            raw[center + 1..=hi].iter().cloned().fold(f64::INFINITY, f64::min)
        } else {
            raw[center]
        };
        let prominence = raw[center] - left_floor.max(right_floor);
        if prominence > 0.0 && prominence >= threshold {
            zones.push(FrequencyZone {
                center_hz: spec.freq(center),
                lo_hz: spec.freq(lo),
                hi_hz: spec.freq(hi),
                prominence,
            });
        }
    }
    zones.sort_by(|a, b| {
        b.prominence
            .partial_cmp(&a.prominence)
            .unwrap()
            .then(a.center_hz.partial_cmp(&b.center_hz).unwrap())
    });
    let mut kept: Vec<FrequencyZone> = Vec::with_capacity(zones.len());
    for z in zones {
        if kept
            .iter()
            .all(|k| (k.center_hz - z.center_hz).abs() >= params.min_separation_hz)
        {
            kept.push(z);
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aems::{aems, AemsParams};
    use crate::audio::{synthesize_am, synthesize_multi_am};
    use crate::aems::spectrum::SpectrumParams;
    use proptest::prelude::*;

    fn spectrum(magnitudes: Vec<f64>) -> Spectrum {
        let n = magnitudes.len();
        Spectrum {
            resolution_hz: 0.5,
            cutoff_hz: 0.5 * (n - 1) as f64,
            magnitudes,
            params: SpectrumParams {
                peak_window_ms: None,
                envelope_rate_hz: 100.0,
                smoothing_ms: None,
                zero_mean: true,
                n_samples: 2 * n,
            },
        }
    }

    #[test]
    fn flat_spectrum_has_no_zones() {
        assert!(detect_zones(&spectrum(vec![1.0; 40]), &ZoneParams::default()).unwrap().is_empty());
        assert!(detect_zones(&spectrum(vec![0.0; 40]), &ZoneParams::default()).unwrap().is_empty());
    }

    #[test]
    fn single_bump() {
        let m: Vec<f64> = (0..60).map(|k| (-((k as f64 - 20.0) / 4.0).powi(2)).exp()).collect();
        let z = detect_zones(&spectrum(m), &ZoneParams::default()).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].center_hz, 10.0);
        assert!(z[0].lo_hz <= 10.0 && z[0].hi_hz >= 10.0);
        assert!(z[0].prominence > 0.9);
        assert!((z[0].period_s() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn calibration_zone() {
        let w = synthesize_am(200.0, 5.0, 1.0, 2.0, 16000).unwrap();
        for cutoff in [10.0, 20.0, 50.0] {
            let spec = aems(&w, &AemsParams::with_cutoff(cutoff)).unwrap();
            let z = detect_zones(&spec, &ZoneParams::default()).unwrap();
            assert_eq!(z.len(), 1, "cutoff {cutoff}: {z:?}");
            assert!((z[0].center_hz - 5.0).abs() <= spec.resolution_hz);
        }
    }

    #[test]
    fn dual_modulation_zones() {
        let w = synthesize_multi_am(200.0, &[(0.8, 0.5), (5.0, 0.5)], 20.0, 16000).unwrap();
        for cutoff in [10.0, 20.0] {
            let spec = aems(&w, &AemsParams::with_cutoff(cutoff)).unwrap();
            let z = detect_zones(&spec, &ZoneParams::default()).unwrap();
            let mut centers: Vec<f64> = z.iter().map(|z| z.center_hz).collect();
            centers.sort_by(f64::total_cmp);
            assert_eq!(centers.len(), 2, "cutoff {cutoff}: {z:?}");
            assert!((centers[0] - 0.8).abs() <= 0.5);
            assert!((centers[1] - 5.0).abs() <= 0.5);
        }
    }

    #[test]
    fn zones_ordered_and_bounded() {
        let m = vec![0.0, 2.0, 0.5, 0.2, 5.0, 0.3, 0.1, 0.2, 1.5, 0.2, 0.0, 0.0];
        let z = detect_zones(&spectrum(m), &ZoneParams { degree: 11, ..ZoneParams::default() }).unwrap();
        assert!(!z.is_empty());
        assert_eq!(z[0].center_hz, 2.0);
        for w in z.windows(2) {
            assert!(w[0].prominence >= w[1].prominence);
        }
        for zone in &z {
            assert!(zone.lo_hz <= zone.center_hz && zone.center_hz <= zone.hi_hz);
            assert!(zone.prominence > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn top_zone_recovers_modulation(f in 0.5f64..=10.0) {
            let dur = (10.0 / f).ceil().max(2.0);
            let w = synthesize_am(200.0, f, 1.0, dur, 8000).unwrap();
            let spec = aems(&w, &AemsParams::with_cutoff(20.0)).unwrap();
            let z = detect_zones(&spec, &ZoneParams::default()).unwrap();
            prop_assert!(!z.is_empty());
            prop_assert!((z[0].center_hz - f).abs() <= spec.resolution_hz, "f {} top {:?}", f, z[0]);
        }
    }
}
