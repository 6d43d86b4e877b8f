//! Optical systems: elliptic GRIN media, and dense operator analysis of
//! discrete transforms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::symplectic::{AbcdMatrix, Mat2};
use crate::transforms::{prepare, Method, TransformOptions};

/// Largest grid size for which a dense `N²×N²` operator is built.
pub const MAX_OPERATOR_N: usize = 64;

/// Elliptic GRIN medium with `n²(x,y) = n0²[1 − (n1/n0)(x + p y)² − (n2/n0)(q x + y)²]`.
/// Lengths are in millimetres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrinParams {
    pub n0: f64,
    /// mm⁻².
    pub n1: f64,
    /// mm⁻².
    pub n2: f64,
    pub p: f64,
    pub q: f64,
    pub length_mm: f64,
    pub wavelength_mm: f64,
}

impl GrinParams {
    /// The medium of the GRIN demonstration: 10 m long, 532 nm light.
    pub fn reference() -> Self {
        GrinParams {
            n0: 1.5,
            n1: 5e-8,
            n2: 2e-8,
            p: 0.6,
            q: 0.2,
            length_mm: 1e4,
            wavelength_mm: 532e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.n0 > 0.0
            && self.n1 > 0.0
            && self.n2 > 0.0
            && self.wavelength_mm > 0.0
            && self.length_mm >= 0.0
            && [self.p, self.q, self.length_mm].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid GRIN parameters {self:?}")))
        }
    }

    /// Propagation angles `(α, β) = (2L/π)·(√(n1/n0), √(n2/n0))`.
    pub fn angles(&self) -> (f64, f64) {
        let s = 2.0 * self.length_mm / PI;
        (s * (self.n1 / self.n0).sqrt(), s * (self.n2 / self.n0).sqrt())
    }

    /// Global phase `e^(−j2π n0 L/λ)` of the propagation, kept out of the ABCD matrix.
    pub fn global_phase(&self) -> Complex64 {
        let cycles = (self.n0 * self.length_mm / self.wavelength_mm).rem_euclid(1.0);
        Complex64::from_polar(1.0, -2.0 * PI * cycles)
    }
}

/// ABCD matrix of the medium, `(S⁻¹,0;0,Sᵀ)·(E,F;F⁻¹(E²−I),E)·(S,0;0,S⁻ᵀ)`
/// with `S = (1,p;q,1)`, `E = diag(cos α, cos β)` and
/// `F = diag(√(n0/n1) sin α, √(n0/n2) sin β)/k`.
pub fn grin_abcd(g: &GrinParams) -> Result<AbcdMatrix> {
    g.validate()?;
    let s = Mat2::new(1.0, g.p, g.q, 1.0);
    if (1.0 - g.p * g.q).abs() < 1e-12 {
        return Err(Error::SingularShear);
    }
    let k = 2.0 * PI / g.wavelength_mm;
    let (alpha, beta) = g.angles();
    let (kx, ky) = (k * (g.n1 / g.n0).sqrt(), k * (g.n2 / g.n0).sqrt());
    let e = Mat2::diag(alpha.cos(), beta.cos());
    let f = Mat2::diag(alpha.sin() / kx, beta.sin() / ky);
    // F⁻¹(E² − I) = −diag(kx sin α, ky sin β), well defined even when sin α = 0.
    let c = Mat2::diag(-kx * alpha.sin(), -ky * beta.sin());
    let medium = AbcdMatrix::new(e, f, c, e);
    let into = AbcdMatrix::affine(s.transpose().inv());
    let out = AbcdMatrix::affine(s.transpose());
    let m = out.mul_unchecked(&medium).mul_unchecked(&into);
    m.ensure_valid()?;
    Ok(m)
}

/// A Fourier transformer followed by the GRIN medium.
pub fn grin_ft_system(g: &GrinParams) -> Result<AbcdMatrix> {
    let m = grin_abcd(g)?.mul_unchecked(&AbcdMatrix::FOURIER);
    m.ensure_valid()?;
    Ok(m)
}

/// Synthetic binary letter "S" centered on the grid, strokes one tenth of
/// the grid wide. Rows run along the first index.
pub fn letter_mask(spec: GridSpec) -> Field {
    let n = spec.n as f64;
    let half = n / 2.0;
    let t = 0.05;
    let inside = |u: f64, v: f64| -> bool {
        let bar = |uc: f64| (u - uc).abs() <= t && v.abs() <= 0.25;
        let upper_left = v >= -0.25 && v <= -0.25 + 2.0 * t && (-0.3..=0.0).contains(&u);
        let lower_right = v <= 0.25 && v >= 0.25 - 2.0 * t && (0.0..=0.3).contains(&u);
        bar(-0.3) || bar(0.0) || bar(0.3) || upper_left || lower_right
    };
    let mut values = Vec::with_capacity(spec.n * spec.n);
    for i in 0..spec.n {
        let u = spec.index(i) as f64 / half;
        for j in 0..spec.n {
            let v = spec.index(j) as f64 / half;
            values.push(Complex64::new(if inside(u, v) { 1.0 } else { 0.0 }, 0.0));
        }
    }
    Field::new(spec, values).expect("size matches")
}

/// Dense matrix of a linear map on `N×N` fields, acting on row-major sample vectors.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub spec: GridSpec,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `L·g` for a field on the operator's grid.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.n() != self.spec.n {
            return Err(Error::ShapeMismatch);
        }
        let v = DMatrix::from_column_slice(self.dim(), 1, f.values());
        let out = &self.matrix * v;
        Field::new(self.spec, out.as_slice().to_vec())
    }
}

/// Builds the operator column by column from the images of the unit samples.
pub fn materialize_with<F>(spec: GridSpec, map: F) -> Result<OperatorMatrix>
where
    F: Fn(&Field) -> Result<Field> + Sync,
{
    if spec.n > MAX_OPERATOR_N {
        return Err(Error::TooLarge(spec.n));
    }
    let n = spec.n;
    let dim = n * n;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|k| {
            let out = map(&Field::impulse(spec, k / n, k % n))?;
            if out.n() != n {
                return Err(Error::ShapeMismatch);
            }
            Ok(out.into_values())
        })
        .collect::<Result<_>>()?;
    let flat: Vec<Complex64> = columns.into_iter().flatten().collect();
    Ok(OperatorMatrix { spec, matrix: DMatrix::from_vec(dim, dim, flat) })
}

/// Dense operator of the transform of `m` on `spec` (no padding).
pub fn materialize(m: &AbcdMatrix, spec: GridSpec, method: Method) -> Result<OperatorMatrix> {
    if spec.n > MAX_OPERATOR_N {
        return Err(Error::TooLarge(spec.n));
    }
    let plan = prepare(m, method, TransformOptions::default())?;
    materialize_with(spec, |f| Ok(plan.apply(f)?.output))
}

/// `‖L†L − I‖∞`, the largest absolute row sum.
pub fn unitarity_defect(l: &OperatorMatrix) -> f64 {
    let mut g = l.matrix.adjoint() * &l.matrix;
    for i in 0..g.nrows() {
        g[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    g.row_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// An eigenvalue and its unit eigenvector.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

/// `count` eigenpairs of a unitary operator from its complex Schur form,
/// ordered by eigenvalue argument. For a normal matrix the Schur vectors are
/// orthonormal eigenvectors.
pub fn eigenpairs(l: &OperatorMatrix, count: usize) -> Result<Vec<Eigenpair>> {
    let defect = unitarity_defect(l);
    if defect > 1e-8 {
        return Err(Error::NotUnitary(defect));
    }
    let dim = l.dim();
    if count == 0 || count > dim {
        return Err(Error::InvalidParameter(format!("cannot take {count} eigenpairs of a {dim}-dimensional operator")));
    }
    let schur = l
        .matrix
        .clone()
        .try_schur(1e-15, 10_000 * dim)
        .ok_or_else(|| Error::InvalidParameter("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| t[(a, a)].arg().total_cmp(&t[(b, b)].arg()).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(count)
        .map(|k| Eigenpair { value: t[(k, k)], vector: q.column(k).iter().copied().collect() })
        .collect())
}
