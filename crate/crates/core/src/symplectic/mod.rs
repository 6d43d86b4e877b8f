//! ABCD-matrix algebra for the two-dimensional linear canonical transform.
//!
//! A 2D nonseparable LCT is parametrized by a real 4×4 symplectic matrix
//! written in 2×2 blocks as `(A, B; C, D)`. It maps the space/spatial-frequency
//! vector `[x, y, ωx, ωy]` to `[u, v, ωu, ωv]`. This module holds the block
//! arithmetic, validation and inversion, and (in submodules) every
//! factorization that the discrete transforms are assembled from.

mod catalog;
mod factor;
mod iwasawa;
mod plan;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub use catalog::{named_matrix, CatalogEntry, NamedMatrix};
pub use factor::{
    dispatch, factor_cc_cm_cc_cm, factor_cm_cc_cm, factor_ding, factor_ha, factor_koc, factor_lc,
    gamma, ha_objective, Variant,
};
pub use iwasawa::{iwasawa, IwasawaFactors};
pub use plan::{Axis, DecompositionPlan, PlanKind, Stage};

/// Tolerance on the symplectic residuals.
pub const TAU_SYM: f64 = 1e-10;

/// Relative singularity guard: a block `M` counts as invertible when
/// `|det M| > TAU_DET_REL * max|m_ij|²`.
pub const TAU_DET_REL: f64 = 1e-8;

/// A real 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    pub fn symmetric(m11: f64, m12: f64, m22: f64) -> Self {
        Mat2::new(m11, m12, m12, m22)
    }

    /// Rotation `(cos t, sin t; -sin t, cos t)`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Mat2::new(c, s, -s, c)
    }

    pub fn transpose(self) -> Self {
        Mat2::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    /// Largest absolute entry.
    pub fn max_abs(self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    pub fn is_finite(self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// `|m12 - m21|`.
    pub fn asymmetry(self) -> f64 {
        (self.m12 - self.m21).abs()
    }

    /// The symmetric part `(M + Mᵀ)/2`.
    pub fn sym(self) -> Self {
        let off = 0.5 * (self.m12 + self.m21);
        Mat2::new(self.m11, off, off, self.m22)
    }

    /// True when the determinant is non-negligible relative to the entry scale.
    pub fn is_invertible(self) -> bool {
        let scale = self.max_abs();
        scale > 0.0 && self.det().abs() > TAU_DET_REL * scale * scale
    }

    /// Plain inverse; callers are expected to have checked invertibility.
    pub fn inv(self) -> Self {
        let d = self.det();
        Mat2::new(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)
    }

    pub fn try_inv(self) -> Option<Self> {
        self.is_invertible().then(|| self.inv())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}; {:.6}, {:.6})", self.m11, self.m12, self.m21, self.m22)
    }
}

/// Result of [`AbcdMatrix::validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Validation {
    /// All three `ABᵀ = BAᵀ`, `CDᵀ = DCᵀ`, `ADᵀ − BCᵀ = I` residuals are within [`TAU_SYM`].
    pub valid: bool,
    /// Max residual of the row-form relations.
    pub row_residual: f64,
    /// Max residual of the column-form relations `AᵀC = CᵀA`, `BᵀD = DᵀB`, `AᵀD − CᵀB = I`.
    pub column_residual: f64,
    /// Max over all six relations.
    pub residual: f64,
}

/// A 4×4 ABCD matrix in 2×2 block form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbcdMatrix {
    pub a: Mat2,
    pub b: Mat2,
    pub c: Mat2,
    pub d: Mat2,
}

impl AbcdMatrix {
    pub const IDENTITY: AbcdMatrix = AbcdMatrix {
        a: Mat2::IDENTITY,
        b: Mat2::ZERO,
        c: Mat2::ZERO,
        d: Mat2::IDENTITY,
    };

    /// `(0, I; −I, 0)`, the Fourier transform.
    pub const FOURIER: AbcdMatrix = AbcdMatrix {
        a: Mat2::ZERO,
        b: Mat2::IDENTITY,
        c: Mat2::new(-1.0, 0.0, 0.0, -1.0),
        d: Mat2::ZERO,
    };

    pub const fn new(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Self {
        AbcdMatrix { a, b, c, d }
    }

    pub fn from_rows(r: [[f64; 4]; 4]) -> Self {
        AbcdMatrix {
            a: Mat2::new(r[0][0], r[0][1], r[1][0], r[1][1]),
            b: Mat2::new(r[0][2], r[0][3], r[1][2], r[1][3]),
            c: Mat2::new(r[2][0], r[2][1], r[3][0], r[3][1]),
            d: Mat2::new(r[2][2], r[2][3], r[3][2], r[3][3]),
        }
    }

    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        [
            [a.m11, a.m12, b.m11, b.m12],
            [a.m21, a.m22, b.m21, b.m22],
            [c.m11, c.m12, d.m11, d.m12],
            [c.m21, c.m22, d.m21, d.m22],
        ]
    }

    /// Chirp multiplication `(I, 0; C, I)`.
    pub fn chirp_mul(c: Mat2) -> Self {
        AbcdMatrix::new(Mat2::IDENTITY, Mat2::ZERO, c, Mat2::IDENTITY)
    }

    /// Chirp convolution `(I, B; 0, I)`.
    pub fn chirp_conv(b: Mat2) -> Self {
        AbcdMatrix::new(Mat2::IDENTITY, b, Mat2::ZERO, Mat2::IDENTITY)
    }

    /// Coordinate map `((Dᵀ)⁻¹, 0; 0, D)`.
    pub fn affine(d: Mat2) -> Self {
        AbcdMatrix::new(d.transpose().inv(), Mat2::ZERO, Mat2::ZERO, d)
    }

    /// Separable fractional Fourier transform `(E, F; −F, E)`.
    pub fn frft(alpha: f64, beta: f64) -> Self {
        let e = Mat2::diag(alpha.cos(), beta.cos());
        let f = Mat2::diag(alpha.sin(), beta.sin());
        AbcdMatrix::new(e, f, -f, e)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs()).max(self.c.max_abs()).max(self.d.max_abs())
    }

    /// Largest absolute entry of `self − other`.
    pub fn distance(&self, other: &AbcdMatrix) -> f64 {
        (self.a - other.a)
            .max_abs()
            .max((self.b - other.b).max_abs())
            .max((self.c - other.c).max_abs())
            .max((self.d - other.d).max_abs())
    }

    /// Evaluates both forms of the symplectic constraints. Never fails.
    pub fn validate(&self) -> Validation {
        if !self.is_finite() {
            return Validation {
                valid: false,
                row_residual: f64::INFINITY,
                column_residual: f64::INFINITY,
                residual: f64::INFINITY,
            };
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let row = (a * b.transpose() - b * a.transpose())
            .max_abs()
            .max((c * d.transpose() - d * c.transpose()).max_abs())
            .max((a * d.transpose() - b * c.transpose() - Mat2::IDENTITY).max_abs());
        let col = (a.transpose() * c - c.transpose() * a)
            .max_abs()
            .max((b.transpose() * d - d.transpose() * b).max_abs())
            .max((a.transpose() * d - c.transpose() * b - Mat2::IDENTITY).max_abs());
        Validation {
            valid: row <= TAU_SYM,
            row_residual: row,
            column_residual: col,
            residual: row.max(col),
        }
    }

    pub fn is_symplectic(&self) -> bool {
        self.validate().valid
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.valid {
            Ok(())
        } else {
            Err(Error::InvalidSymplectic { residual: v.residual })
        }
    }

    /// Closed-form symplectic inverse `(Dᵀ, −Bᵀ; −Cᵀ, Aᵀ)`, without validation.
    pub fn inverse_unchecked(&self) -> AbcdMatrix {
        AbcdMatrix::new(
            self.d.transpose(),
            -self.b.transpose(),
            -self.c.transpose(),
            self.a.transpose(),
        )
    }

    /// Plain 4×4 product `self · rhs`, without validation.
    pub fn mul_unchecked(&self, rhs: &AbcdMatrix) -> AbcdMatrix {
        AbcdMatrix::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Nearest symplectic matrix in the sense of keeping `A` and symmetrizing
    /// the chirp parameters `P = A⁻¹B` and `Q = CA⁻¹`, then rebuilding
    /// `(A, AP; QA, A⁻ᵀ + QAP)`. Used to lift 4-decimal printed matrices
    /// to machine-precision symplecticity.
    pub fn symplectic_project(&self) -> Result<AbcdMatrix> {
        if !self.is_finite() {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let a = self.a;
        let a_inv = a.try_inv().ok_or(Error::InvalidParameter(
            "projection needs an invertible A block".into(),
        ))?;
        let p = (a_inv * self.b).sym();
        let q = (self.c * a_inv).sym();
        Ok(AbcdMatrix::new(a, a * p, q * a, a_inv.transpose() + q * a * p))
    }
}

/// Validates `m` against both forms of the symplectic constraints.
pub fn validate(m: &AbcdMatrix) -> Validation {
    m.validate()
}

/// Symplectic inverse of a valid matrix.
pub fn invert(m: &AbcdMatrix) -> Result<AbcdMatrix> {
    m.ensure_valid()?;
    Ok(m.inverse_unchecked())
}

/// The product `m2 · m1` (apply `m1` first).
pub fn compose(m2: &AbcdMatrix, m1: &AbcdMatrix) -> Result<AbcdMatrix> {
    m2.ensure_valid()?;
    m1.ensure_valid()?;
    Ok(m2.mul_unchecked(m1))
}

/// Symmetric positive-definite square root of a 2×2 SPD matrix,
/// `R = (P + √det P · I) / √(tr P + 2√det P)`.
pub fn spd_sqrt(p: Mat2) -> Result<Mat2> {
    if !p.is_finite() || p.asymmetry() > TAU_SYM * p.max_abs().max(1.0) {
        return Err(Error::NotSpd);
    }
    let p = p.sym();
    let det = p.det();
    let tr = p.trace();
    if det <= 0.0 || tr <= 0.0 {
        return Err(Error::NotSpd);
    }
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    Ok((p + Mat2::IDENTITY * s) * (1.0 / t))
}

impl fmt::Display for AbcdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{:>10.6} {:>10.6} {:>10.6} {:>10.6}]", row[0], row[1], row[2], row[3])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_entry_diff(x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((x[i][j] - y[i][j]).abs());
            }
        }
        m
    }

    // Independent 4×4 product on the row layout.
    fn mul4(x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn identity_validates_with_zero_residual() {
        let v = validate(&AbcdMatrix::IDENTITY);
        assert!(v.valid);
        assert_eq!(v.residual, 0.0);
    }

    #[test]
    fn perturbed_identity_is_rejected() {
        let mut m = AbcdMatrix::IDENTITY;
        m.a.m11 = 1.1;
        let v = validate(&m);
        assert!(!v.valid);
        assert!((v.row_residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn non_finite_entries_do_not_validate() {
        let mut m = AbcdMatrix::IDENTITY;
        m.c.m12 = f64::NAN;
        assert!(!validate(&m).valid);
    }

    #[test]
    fn printed_matrix_is_close_but_projection_is_exact() {
        let raw = named_matrix(NamedMatrix::A1).raw;
        let v = validate(&raw);
        assert!(!v.valid);
        assert!(v.residual <= 1e-3, "residual {}", v.residual);
        let projected = raw.symplectic_project().unwrap();
        let v = validate(&projected);
        assert!(v.valid && v.residual < 1e-14, "{v:?}");
        assert!(projected.distance(&raw) < 1e-3);
    }

    #[test]
    fn inverse_of_fourier_is_inverse_fourier() {
        let inv = invert(&AbcdMatrix::FOURIER).unwrap();
        let expected = AbcdMatrix::new(Mat2::ZERO, -Mat2::IDENTITY, Mat2::IDENTITY, Mat2::ZERO);
        assert_eq!(inv, expected);
        assert_eq!(invert(&AbcdMatrix::IDENTITY).unwrap(), AbcdMatrix::IDENTITY);
    }

    #[test]
    fn inverse_times_original_is_identity() {
        let raw = named_matrix(NamedMatrix::A1).raw;
        // The printed matrix is only symplectic to ~1e-4, so go through the unchecked path.
        let prod = mul4(&raw.to_rows(), &raw.inverse_unchecked().to_rows());
        assert!(max_entry_diff(&prod, &AbcdMatrix::IDENTITY.to_rows()) < 1e-3);

        let m = named_matrix(NamedMatrix::A1).projected;
        let prod = compose(&m, &invert(&m).unwrap()).unwrap();
        assert!(prod.distance(&AbcdMatrix::IDENTITY) < 1e-12);
    }

    #[test]
    fn double_inverse_is_bitwise_identity() {
        let m = named_matrix(NamedMatrix::A3).projected;
        assert_eq!(m.inverse_unchecked().inverse_unchecked(), m);
    }

    #[test]
    fn invert_rejects_invalid() {
        let mut m = AbcdMatrix::IDENTITY;
        m.b.m12 = 0.5;
        assert!(matches!(invert(&m), Err(Error::InvalidSymplectic { .. })));
    }

    #[test]
    fn fourier_squared_is_parity() {
        let p = compose(&AbcdMatrix::FOURIER, &AbcdMatrix::FOURIER).unwrap();
        let parity = AbcdMatrix::new(-Mat2::IDENTITY, Mat2::ZERO, Mat2::ZERO, -Mat2::IDENTITY);
        assert_eq!(p, parity);
        let m = named_matrix(NamedMatrix::A2).projected;
        assert_eq!(compose(&m, &AbcdMatrix::IDENTITY).unwrap(), m);
    }

    #[test]
    fn compose_matches_elementwise_product() {
        let m3 = named_matrix(NamedMatrix::A3).projected;
        let m1 = named_matrix(NamedMatrix::A1).projected;
        let c = compose(&m3, &m1).unwrap();
        let expected = mul4(&m3.to_rows(), &m1.to_rows());
        assert!(max_entry_diff(&c.to_rows(), &expected) < 1e-12);
        assert!(validate(&c).valid);
    }

    #[test]
    fn spd_sqrt_cases() {
        assert_eq!(spd_sqrt(Mat2::IDENTITY).unwrap(), Mat2::IDENTITY);
        let r = spd_sqrt(Mat2::diag(4.0, 9.0)).unwrap();
        assert!((r - Mat2::diag(2.0, 3.0)).max_abs() < 1e-15);
        let p = Mat2::symmetric(2.0, 1.0, 2.0);
        let r = spd_sqrt(p).unwrap();
        assert!((r * r - p).max_abs() < 1e-12);
        assert!(r.asymmetry() == 0.0 && r.det() > 0.0 && r.trace() > 0.0);
        assert!(matches!(spd_sqrt(Mat2::diag(1.0, -1.0)), Err(Error::NotSpd)));
        assert!(matches!(spd_sqrt(Mat2::new(1.0, 0.5, 0.0, 1.0)), Err(Error::NotSpd)));
    }
}
