//! Error metrics.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Which quantity a [`MetricResult`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricName {
    /// Accuracy against a reference transform.
    NmseAcc,
    /// Cascade of two transforms against the transform of the product matrix.
    NmseAdd,
    /// Forward-then-inverse reconstruction against the input.
    NmseRev,
    Psnr,
}

impl MetricName {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::NmseAcc => "nmse_acc",
            MetricName::NmseAdd => "nmse_add",
            MetricName::NmseRev => "nmse_rev",
            MetricName::Psnr => "psnr_db",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricResult {
    pub name: MetricName,
    pub value: f64,
    pub context: String,
}

fn check_shapes(a: &Field, b: &Field) -> Result<()> {
    if a.spec().matches(&b.spec()) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch)
    }
}

fn squared_error(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// `Σ|a − b|² / Σ|b|²` with `b` as the reference.
pub fn nmse(a: &Field, b: &Field) -> Result<f64> {
    check_shapes(a, b)?;
    let den: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(squared_error(a, b) / den)
}

/// `10·log₁₀(peak²·N²/Σ|a − b|²)` in dB, `+∞` when the fields are equal.
pub fn psnr(a: &Field, b: &Field, peak: f64) -> Result<f64> {
    check_shapes(a, b)?;
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::InvalidParameter(format!("peak must be positive, got {peak}")));
    }
    let err = squared_error(a, b);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let count = a.values().len() as f64;
    Ok(10.0 * (peak * peak * count / err).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use num_complex::Complex64;

    fn field(values: Vec<Complex64>) -> Field {
        let n = (values.len() as f64).sqrt() as usize;
        Field::new(GridSpec::square(n, 1.0).unwrap(), values).unwrap()
    }

    #[test]
    fn nmse_cases() {
        let b = field((0..16).map(|k| Complex64::new(k as f64, 1.0)).collect());
        assert_eq!(nmse(&b, &b).unwrap(), 0.0);
        let zero = field(vec![Complex64::new(0.0, 0.0); 16]);
        assert_eq!(nmse(&zero, &b).unwrap(), 1.0);
        let scaled = field(b.values().iter().map(|v| v * 1.001).collect());
        assert!((nmse(&scaled, &b).unwrap() - 1e-6).abs() < 1e-15);
        assert!(matches!(nmse(&b, &zero), Err(Error::ZeroReference)));
        let other = field(vec![Complex64::new(1.0, 0.0); 9]);
        assert!(matches!(nmse(&other, &b), Err(Error::ShapeMismatch)));
    }

    #[test]
    fn nmse_phase_behaviour() {
        let b = field((0..9).map(|k| Complex64::new(k as f64, -(k as f64) / 2.0)).collect());
        let a = field(b.values().iter().map(|v| v + Complex64::new(0.1, 0.0)).collect());
        let ph = Complex64::from_polar(1.0, 0.7);
        let rotate = |f: &Field| field(f.values().iter().map(|v| v * ph).collect());
        let base = nmse(&a, &b).unwrap();
        assert!((nmse(&rotate(&a), &rotate(&b)).unwrap() - base).abs() < 1e-14);
        assert!(nmse(&rotate(&a), &b).unwrap() > 10.0 * base);
    }

    #[test]
    fn psnr_cases() {
        let b = field(vec![Complex64::new(0.5, 0.0); 128 * 128]);
        assert_eq!(psnr(&b, &b, 1.0).unwrap(), f64::INFINITY);
        // A uniform error of 1e-14 on a unit-peak image.
        let zero = field(vec![Complex64::new(0.0, 0.0); 128 * 128]);
        let a = field(vec![Complex64::new(1e-14, 0.0); 128 * 128]);
        assert!((psnr(&a, &zero, 1.0).unwrap() - 280.0).abs() < 1e-9);
        let c = field(b.values().iter().map(|v| v + 0.278).collect());
        assert!((psnr(&c, &b, 1.0).unwrap() - 11.1).abs() < 0.05);
    }
}
