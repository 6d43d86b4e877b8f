use std::f64::consts::PI;

use num_complex::Complex64;

use super::{spd_sqrt, AbcdMatrix, Mat2};
use crate::error::{Error, Result};

/// Threshold below which the half-angle sines/cosines count as zero.
const ANGLE_EPS: f64 = 1e-9;

/// Iwasawa factors `(I,0;G,I)·(S,0;0,S⁻¹)·(X,Y;−Y,X)` with the orthosymplectic
/// part further split as `(Rφ,0;0,Rφ)·(E,F;−F,E)·(Rθ,0;0,Rθ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IwasawaFactors {
    pub s: Mat2,
    pub g: Mat2,
    pub x: Mat2,
    pub y: Mat2,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
    /// True when `sin((α−β)/2)` vanished and `φ = 0` was imposed.
    pub degenerate: bool,
}

impl IwasawaFactors {
    /// `(I,0;G,I)·(SRφ,0;0,S⁻¹Rφ)·(E,F;−F,E)·(Rθ,0;0,Rθ)`.
    pub fn recompose(&self) -> AbcdMatrix {
        let r_phi = Mat2::rotation(self.phi);
        let r_theta = Mat2::rotation(self.theta);
        let scale = AbcdMatrix::new(self.s * r_phi, Mat2::ZERO, Mat2::ZERO, self.s.inv() * r_phi);
        let rot = AbcdMatrix::new(r_theta, Mat2::ZERO, Mat2::ZERO, r_theta);
        AbcdMatrix::chirp_mul(self.g)
            .mul_unchecked(&scale)
            .mul_unchecked(&AbcdMatrix::frft(self.alpha, self.beta))
            .mul_unchecked(&rot)
    }
}

/// Iwasawa decomposition with fractional angles and rotation angles.
///
/// Among the equivalent angle choices, one with `sin α > 0` and `sin β > 0`
/// is preferred whenever it exists.
pub fn iwasawa(m: &AbcdMatrix) -> Result<IwasawaFactors> {
    m.ensure_valid()?;
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let s = spd_sqrt((a * a.transpose() + b * b.transpose()).sym())?;
    let s_inv = s.inv();
    let g = ((c * a.transpose() + d * b.transpose()) * s_inv * s_inv).sym();
    let x = s_inv * a;
    let y = s_inv * b;

    let u11 = Complex64::new(x.m11, y.m11);
    let u12 = Complex64::new(x.m12, y.m12);
    let u21 = Complex64::new(x.m21, y.m21);
    let u22 = Complex64::new(x.m22, y.m22);
    let sum = (u11 * u22 - u12 * u21).arg();
    let diff = (x.det() + y.det()).clamp(-1.0, 1.0).acos();

    let candidates = [(sum, diff), (sum, -diff), (sum + 2.0 * PI, diff), (sum + 2.0 * PI, -diff)];
    let (sum, diff) = candidates
        .iter()
        .copied()
        .find(|&(s, t)| {
            let (al, be) = (0.5 * (s + t), 0.5 * (s - t));
            al.sin() > ANGLE_EPS && be.sin() > ANGLE_EPS
        })
        .unwrap_or(candidates[0]);
    let alpha = 0.5 * (sum + diff);
    let beta = 0.5 * (sum - diff);

    let half_sum = 0.5 * (alpha + beta);
    let (sin_h, cos_h) = (0.5 * (alpha - beta)).sin_cos();
    let first = Complex64::new(x.m11 + x.m22 - y.m12 + y.m21, x.m12 - x.m21 + y.m11 + y.m22);
    let second = Complex64::new(x.m12 + x.m21 + y.m11 - y.m22, -x.m11 + x.m22 + y.m12 + y.m21);

    let (theta, phi, degenerate) = if sin_h.abs() < ANGLE_EPS {
        let theta = (first / cos_h).arg() - half_sum;
        (theta, 0.0, true)
    } else if cos_h.abs() < ANGLE_EPS {
        return Err(Error::DegenerateAngles("cos((alpha - beta)/2) vanishes"));
    } else {
        let plus = (first / cos_h).arg() - half_sum;
        let minus = (second / sin_h).arg() - half_sum;
        (0.5 * (plus + minus), 0.5 * (plus - minus), false)
    };

    Ok(IwasawaFactors { s, g, x, y, alpha, beta, theta, phi, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{named_matrix, NamedMatrix};

    #[test]
    fn pure_fourier_transform() {
        let f = iwasawa(&AbcdMatrix::FOURIER).unwrap();
        assert!((f.s - Mat2::IDENTITY).max_abs() < 1e-15);
        assert!(f.g.max_abs() < 1e-15);
        assert!((f.alpha - PI / 2.0).abs() < 1e-12 && (f.beta - PI / 2.0).abs() < 1e-12);
        assert!(f.theta.abs() < 1e-12 && f.phi == 0.0);
        assert!(f.recompose().distance(&AbcdMatrix::FOURIER) < 1e-12);
    }

    #[test]
    fn identity_takes_degenerate_branch() {
        let f = iwasawa(&AbcdMatrix::IDENTITY).unwrap();
        assert!(f.degenerate);
        assert!(f.alpha.abs() < 1e-12 && f.beta.abs() < 1e-12);
        assert!(f.recompose().distance(&AbcdMatrix::IDENTITY) < 1e-12);
    }

    #[test]
    fn reference_matrices_recompose() {
        for id in [NamedMatrix::A1, NamedMatrix::A2, NamedMatrix::A3, NamedMatrix::A4] {
            let m = named_matrix(id).projected;
            let f = iwasawa(&m).unwrap();
            assert!(f.recompose().distance(&m) < 1e-9, "{id}: {}", f.recompose().distance(&m));
            // det(X + jY) = exp(j(α+β))
            let det = Complex64::new(f.x.m11, f.y.m11) * Complex64::new(f.x.m22, f.y.m22)
                - Complex64::new(f.x.m12, f.y.m12) * Complex64::new(f.x.m21, f.y.m21);
            assert!((det - Complex64::from_polar(1.0, f.alpha + f.beta)).norm() < 1e-9);
            assert!(f.s.det() > 0.0 && f.s.asymmetry() == 0.0);
        }
    }
}
