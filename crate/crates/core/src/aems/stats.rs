//! Small descriptive statistics shared by the analysis modules.

use crate::error::{degenerate, Result};

/// Arithmetic mean, accumulated relative to the first element so that a
/// constant sequence returns that constant exactly.
pub fn mean(xs: &[f64]) -> f64 {
    match xs.first() {
        Some(&x0) => x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64,
        None => f64::NAN,
    }
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Standardize to zero mean and unit sample standard deviation.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(degenerate(format!(
            "z-score needs at least 2 values, got {}",
            values.len()
        )));
    }
    let m = mean(values);
    let sd = sample_sd(values);
    // spread relative to magnitude, so that a constant sequence with rounding noise still counts as constant
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(sd > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(degenerate("z-score of a zero-variance sequence"));
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

/// Pearson correlation coefficient; `None` if either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let (a, b) = (&a[..n], &b[..n]);
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_of_constant_is_exact() {
        for c in [0.05, 0.1, 1.0 / 3.0] {
            assert_eq!(mean(&[c; 7]), c);
        }
        assert!(mean(&[]).is_nan());
    }

    #[test]
    fn zscore_uses_sample_sd() {
        let z = zscore(&[2.0, 4.0, 2.0, 4.0]).unwrap();
        // sd = sqrt(4/3), deviations ±1
        let expected = 1.0 / (4.0f64 / 3.0).sqrt();
        for (zi, sign) in z.iter().zip([-1.0, 1.0, -1.0, 1.0]) {
            assert!((zi - sign * expected).abs() < 1e-12);
        }
        assert!((expected - 0.866).abs() < 1e-3);
    }

    #[test]
    fn zscore_degenerate() {
        assert!(zscore(&[3.0, 3.0, 3.0]).is_err());
        assert!(zscore(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn zscore_moments(xs in prop::collection::vec(-1e3f64..1e3, 2..60)) {
            prop_assume!(sample_sd(&xs) > 1e-6);
            let z = zscore(&xs).unwrap();
            prop_assert!(mean(&z).abs() < 1e-12);
            prop_assert!((sample_sd(&z) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn zscore_affine_invariant(
            xs in prop::collection::vec(-100f64..100.0, 2..40),
            a in 0.01f64..50.0,
            b in -100f64..100.0,
        ) {
            prop_assume!(sample_sd(&xs) > 1e-3);
            let z = zscore(&xs).unwrap();
            let shifted: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let z2 = zscore(&shifted).unwrap();
            for (p, q) in z.iter().zip(&z2) {
                prop_assert!((p - q).abs() < 1e-8);
            }
        }
    }
}
