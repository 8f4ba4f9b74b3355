//! Duration dispersion metrics and the z-score quadrant representation of
//! successive interval pairs.

use serde::{Deserialize, Serialize};

use crate::aems::stats::{mean, zscore};
use crate::error::{degenerate, Error, Result};

fn require_len(xs: &[f64], min: usize) -> Result<()> {
    if xs.len() < min {
        return Err(degenerate(format!(
            "need at least {min} durations, got {}",
            xs.len()
        )));
    }
    Ok(())
}

fn require_positive(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|&x| !(x > 0.0)) {
        Some(i) => Err(Error::Parameter(format!(
            "interval {i} has non-positive duration {}",
            xs[i]
        ))),
        None => Ok(()),
    }
}

/// Sample variance, `Σ(x − x̄)² / (n − 1)`.
pub fn variance(xs: &[f64]) -> Result<f64> {
    require_len(xs, 2)?;
    let m = mean(xs);
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Pairwise Irregularity Measure: `Σ_{i≠j} |ln(x_i / x_j)|` over ordered pairs.
pub fn pim(xs: &[f64]) -> Result<f64> {
    require_len(xs, 2)?;
    require_positive(xs)?;
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mut total = 0.0;
    for (i, a) in logs.iter().enumerate() {
        for b in &logs[i + 1..] {
            total += (a - b).abs();
        }
    }
    // each unordered pair appears twice among ordered pairs
    Ok(2.0 * total)
}

/// Pairwise Foot Deviation, `100 · Σ|x_i − x̄| / Σx`.
pub fn pfd(xs: &[f64]) -> Result<f64> {
    require_len(xs, 1)?;
    let total: f64 = xs.iter().sum();
    if !(total > 0.0) {
        return Err(degenerate("durations sum to zero"));
    }
    let m = mean(xs);
    Ok(100.0 * xs.iter().map(|x| (x - m).abs()).sum::<f64>() / total)
}

/// Raw Pairwise Variability Index: mean absolute difference of neighbours.
pub fn rpvi(xs: &[f64]) -> Result<f64> {
    require_len(xs, 2)?;
    let sum: f64 = xs.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    Ok(sum / (xs.len() - 1) as f64)
}

/// Normalised Pairwise Variability Index (percent).
pub fn npvi(xs: &[f64]) -> Result<f64> {
    require_len(xs, 2)?;
    require_positive(xs)?;
    let sum: f64 = xs
        .windows(2)
        .map(|w| (w[0] - w[1]).abs() / ((w[0] + w[1]) / 2.0))
        .sum();
    Ok(100.0 * sum / (xs.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Quadrant {
    /// long-long
    LL,
    /// short-short
    SS,
    /// long-short
    LS,
    /// short-long
    SL,
    /// either coordinate exactly zero
    #[serde(rename = "origin")]
    Origin,
}

impl Quadrant {
    pub fn classify(z: f64, z_next: f64) -> Self {
        if z == 0.0 || z_next == 0.0 {
            Quadrant::Origin
        } else {
            match (z > 0.0, z_next > 0.0) {
                (true, true) => Quadrant::LL,
                (false, false) => Quadrant::SS,
                (true, false) => Quadrant::LS,
                (false, true) => Quadrant::SL,
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::LL => "LL",
            Quadrant::SS => "SS",
            Quadrant::LS => "LS",
            Quadrant::SL => "SL",
            Quadrant::Origin => "origin",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantCounts {
    #[serde(rename = "LL")]
    pub ll: usize,
    #[serde(rename = "SS")]
    pub ss: usize,
    #[serde(rename = "LS")]
    pub ls: usize,
    #[serde(rename = "SL")]
    pub sl: usize,
    pub origin: usize,
}

impl QuadrantCounts {
    pub fn total(&self) -> usize {
        self.ll + self.ss + self.ls + self.sl + self.origin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantStats {
    pub counts: QuadrantCounts,
    /// LL / SS, absent when there are no SS pairs.
    pub index: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl QuadrantStats {
    /// Scatter CSV with header `z_i,z_next,quadrant`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_i,z_next,quadrant\n");
        for &(a, b) in &self.points {
            out.push_str(&format!("{a},{b},{}\n", Quadrant::classify(a, b).as_str()));
        }
        out
    }
}

/// Classify successive z-scored duration pairs into LL / SS / LS / SL quadrants.
pub fn quadrant_analysis(xs: &[f64]) -> Result<QuadrantStats> {
    require_len(xs, 3)?;
    let z = zscore(xs)?;
    let mut counts = QuadrantCounts::default();
    let points: Vec<(f64, f64)> = z.windows(2).map(|w| (w[0], w[1])).collect();
    for &(a, b) in &points {
        match Quadrant::classify(a, b) {
            Quadrant::LL => counts.ll += 1,
            Quadrant::SS => counts.ss += 1,
            Quadrant::LS => counts.ls += 1,
            Quadrant::SL => counts.sl += 1,
            Quadrant::Origin => counts.origin += 1,
        }
    }
    let index = (counts.ss > 0).then(|| counts.ll as f64 / counts.ss as f64);
    Ok(QuadrantStats {
        counts,
        index,
        points,
    })
}

/// All dispersion metrics of one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub variance: f64,
    pub pim: f64,
    pub pfd: f64,
    pub rpvi: f64,
    pub npvi: f64,
    /// Logarithm used by PIM.
    pub pim_log_base: String,
}

pub fn metric_report(xs: &[f64]) -> Result<MetricReport> {
    Ok(MetricReport {
        n: xs.len(),
        variance: variance(xs)?,
        pim: pim(xs)?,
        pfd: pfd(xs)?,
        rpvi: rpvi(xs)?,
        npvi: npvi(xs)?,
        pim_log_base: "e".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn direct_formula_values() {
        let x = [2.0, 4.0, 2.0, 4.0];
        assert!(close(variance(&x).unwrap(), 4.0 / 3.0, 1e-12));
        assert!(close(pfd(&x).unwrap(), 100.0 * 4.0 / 12.0, 1e-12));
        assert!(close(pim(&[1.0, 2.0]).unwrap(), 2.0 * 2f64.ln(), 1e-12));
        assert_eq!(pim(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn npvi_ambiguity_identity() {
        let a = npvi(&[2.0, 4.0, 2.0, 4.0, 2.0, 4.0]).unwrap();
        let b = npvi(&[2.0, 4.0, 8.0, 16.0, 32.0, 64.0]).unwrap();
        let c = npvi(&[4.0, 2.0, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(close(a, 200.0 / 3.0, 1e-9));
        assert!(close(a, b, 1e-9) && close(b, c, 1e-9));
        assert_eq!(a.round(), 67.0);
    }

    #[test]
    fn constant_sequences_are_zero() {
        let x = [0.3; 7];
        let r = metric_report(&x).unwrap();
        assert_eq!((r.variance, r.pim, r.pfd, r.rpvi, r.npvi), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(variance(&[1.0]).is_err());
        assert!(rpvi(&[]).is_err());
        assert!(pfd(&[]).is_err());
        assert!(pim(&[1.0, 0.0]).is_err());
        assert!(npvi(&[1.0, -1.0]).is_err());
        assert!(quadrant_analysis(&[1.0, 2.0]).is_err());
        assert!(quadrant_analysis(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn strict_alternation_quadrants() {
        let q = quadrant_analysis(&[2.0, 4.0, 2.0, 4.0, 2.0, 4.0]).unwrap();
        assert_eq!(q.counts.ll, 0);
        assert_eq!(q.counts.ss, 0);
        assert_eq!(q.counts.ls + q.counts.sl, 5);
        assert_eq!(q.index, None);
    }

    #[test]
    fn grouped_pattern_quadrants() {
        let q = quadrant_analysis(&[1.0, 1.0, 5.0, 5.0, 1.0, 1.0, 5.0, 5.0]).unwrap();
        let kinds: Vec<Quadrant> = q.points.iter().map(|&(a, b)| Quadrant::classify(a, b)).collect();
        use Quadrant::*;
        assert_eq!(kinds, vec![SS, SL, LL, LS, SS, SL, LL]);
        assert_eq!(
            q.counts,
            QuadrantCounts { ll: 2, ss: 2, ls: 1, sl: 2, origin: 0 }
        );
        assert_eq!(q.index, Some(1.0));
    }

    #[test]
    fn exact_zero_goes_to_origin() {
        // mean 2 → middle value has z exactly 0
        let q = quadrant_analysis(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(q.counts.origin, 2);
        assert!(q.to_csv().lines().nth(1).unwrap().ends_with(",origin"));
    }

    proptest! {
        #[test]
        fn reversal_invariance(xs in prop::collection::vec(0.05f64..2.0, 2..40)) {
            let mut r = xs.clone();
            r.reverse();
            let (a, b) = (metric_report(&xs).unwrap(), metric_report(&r).unwrap());
            prop_assert!(close(a.variance, b.variance, 1e-12));
            prop_assert!(close(a.pim, b.pim, 1e-9));
            prop_assert!(close(a.pfd, b.pfd, 1e-9));
            prop_assert!(close(a.rpvi, b.rpvi, 1e-12));
            prop_assert!(close(a.npvi, b.npvi, 1e-9));
        }

        #[test]
        fn scaling_laws(xs in prop::collection::vec(0.05f64..2.0, 2..40), k in 0.1f64..10.0) {
            let scaled: Vec<f64> = xs.iter().map(|x| k * x).collect();
            let (a, b) = (metric_report(&xs).unwrap(), metric_report(&scaled).unwrap());
            prop_assert!(close(b.pim, a.pim, 1e-8 * (1.0 + a.pim)));
            prop_assert!(close(b.pfd, a.pfd, 1e-8 * (1.0 + a.pfd)));
            prop_assert!(close(b.npvi, a.npvi, 1e-8 * (1.0 + a.npvi)));
            prop_assert!(close(b.variance, k * k * a.variance, 1e-9 * (1.0 + b.variance)));
            prop_assert!(close(b.rpvi, k * a.rpvi, 1e-9 * (1.0 + b.rpvi)));
        }

        #[test]
        fn translation_invariance_of_variance(xs in prop::collection::vec(0.05f64..2.0, 2..40), c in -5f64..5.0) {
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            prop_assert!(close(variance(&shifted).unwrap(), variance(&xs).unwrap(), 1e-9));
        }

        #[test]
        fn quadrants_partition_pairs(xs in prop::collection::vec(0.01f64..3.0, 3..60)) {
            prop_assume!(crate::aems::stats::sample_sd(&xs) > 1e-9);
            let q = quadrant_analysis(&xs).unwrap();
            prop_assert_eq!(q.counts.total(), xs.len() - 1);
            prop_assert_eq!(q.index.is_some(), q.counts.ss > 0);
        }
    }
}
