//! Least-squares polynomial fitting.
//!
//! Abscissae are mapped affinely onto `[-1, 1]` and the system is solved by
//! Householder QR on the rescaled Vandermonde matrix. Coefficients are reported
//! in the caller's coordinate (ascending powers of `x`), while evaluation uses
//! the better-conditioned rescaled form.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub degree: usize,
    /// Ascending powers of the original abscissa.
    pub coeffs: Vec<f64>,
    /// `[x_min, x_max]` of the fitted data.
    pub domain: [f64; 2],
    pub rmse: f64,
    /// Ascending powers of `t = (2x − x_min − x_max) / (x_max − x_min)`.
    pub normalized_coeffs: Vec<f64>,
}

impl PolyFit {
    fn to_unit(&self, x: f64) -> f64 {
        let [lo, hi] = self.domain;
        if hi > lo {
            (2.0 * x - lo - hi) / (hi - lo)
        } else {
            0.0
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        self.normalized_coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c)
    }

    /// Derivative with respect to the original abscissa.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let [lo, hi] = self.domain;
        if hi <= lo {
            return 0.0;
        }
        let t = self.to_unit(x);
        let dt = self
            .normalized_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c);
        dt * 2.0 / (hi - lo)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Least-squares polynomial of the given degree through `(xs, ys)`.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() {
        return Err(param(format!(
            "abscissa and ordinate lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    let m = degree + 1;
    if n < m {
        return Err(param(format!(
            "degree {degree} needs at least {m} points, got {n}"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(param("non-finite value in fit data"));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if degree > 0 && hi <= lo {
        return Err(Error::Singular(
            "all abscissae coincide; only degree 0 is identifiable".into(),
        ));
    }
    let unit = |x: f64| if hi > lo { (2.0 * x - lo - hi) / (hi - lo) } else { 0.0 };

    // column-major Vandermonde in t
    let mut a = vec![0.0; n * m];
    for (i, &x) in xs.iter().enumerate() {
        let t = unit(x);
        let mut p = 1.0;
        for j in 0..m {
            a[j * n + i] = p;
            p *= t;
        }
    }
    let mut b = ys.to_vec();

    // Householder QR, applying each reflector to b as we go
    let mut rdiag = vec![0.0; m];
    for j in 0..m {
        let col = &mut a[j * n..(j + 1) * n];
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let tol = 1e-10 * (n as f64).sqrt();
        if norm <= tol {
            return Err(Error::Singular(format!(
                "design matrix is rank deficient at column {j} (fewer than {m} distinct abscissae?)"
            )));
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        col[j] -= alpha;
        let vnorm2: f64 = col[j..].iter().map(|v| v * v).sum();
        rdiag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let v: Vec<f64> = col[j..].to_vec();
        for k in (j + 1)..m {
            let ck = &mut a[k * n + j..(k + 1) * n];
            let s: f64 = v.iter().zip(ck.iter()).map(|(p, q)| p * q).sum::<f64>() * 2.0 / vnorm2;
            for (q, p) in ck.iter_mut().zip(&v) {
                *q -= s * p;
            }
        }
        let s: f64 = v.iter().zip(&b[j..]).map(|(p, q)| p * q).sum::<f64>() * 2.0 / vnorm2;
        for (q, p) in b[j..].iter_mut().zip(&v) {
            *q -= s * p;
        }
    }
    // back substitution R c = Qᵀ b
    let mut c = vec![0.0; m];
    for j in (0..m).rev() {
        let mut s = b[j];
        for k in (j + 1)..m {
            s -= a[k * n + j] * c[k];
        }
        c[j] = s / rdiag[j];
    }

    let mut fit = PolyFit {
        degree,
        coeffs: Vec::new(),
        domain: [lo, hi],
        rmse: 0.0,
        normalized_coeffs: c,
    };
    fit.coeffs = expand_to_original(&fit.normalized_coeffs, lo, hi);
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = fit.eval(x) - y;
            r * r
        })
        .sum();
    fit.rmse = (sse / n as f64).sqrt();
    Ok(fit)
}

/// Rewrite `Σ c_j t^j` with `t = αx + β` as ascending powers of `x`.
fn expand_to_original(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        let mut out = vec![0.0; c.len()];
        out[0] = c[0];
        return out;
    }
    let alpha = 2.0 / (hi - lo);
    let beta = -(lo + hi) / (hi - lo);
    let mut out = vec![0.0; c.len()];
    for (j, &cj) in c.iter().enumerate() {
        for (k, slot) in out.iter_mut().enumerate().take(j + 1) {
            *slot += cj * binomial(j, k) * alpha.powi(k as i32) * beta.powi((j - k) as i32);
        }
    }
    out
}
