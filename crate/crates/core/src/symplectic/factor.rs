//! Factorizations of ABCD matrices into elementary discrete stages.

use super::{iwasawa, AbcdMatrix, Axis, DecompositionPlan, Mat2, PlanKind, Stage, TAU_SYM};
use crate::error::{Error, Result};

/// How the free symmetric matrix `H` of the four-stage factorization is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Full 2×2 `H` minimizing the bandwidth-growth objective.
    HighAccuracy,
    /// Rank-one `H = diag(h, 0)` or `diag(0, h)`, giving a one-axis chirp convolution.
    LowComplexity,
}

/// Grid points per axis in the first search phase for a two-parameter family.
const GRID_POINTS_2D: usize = 101;
/// Grid points per axis when the family has three free parameters.
const GRID_POINTS_3D: usize = 21;
/// Coordinate-descent step at which refinement stops.
const MIN_STEP: f64 = 1e-6;
const MAX_DESCENT_ITERS: usize = 200_000;

/// Space-spatial-bandwidth growth factor of a chirp stage,
/// `(|c11| + |c12| + 1)(|c12| + |c22| + 1)`.
pub fn gamma(c: Mat2) -> f64 {
    let off = (0.5 * (c.m12 + c.m21)).abs();
    (c.m11.abs() + off + 1.0) * (off + c.m22.abs() + 1.0)
}

/// Chirp matrices of `(A,B;C,D) = CM(X1)·CC(B')·CM(X3)·CC(H)` for a given `H`.
#[derive(Clone, Copy, Debug)]
struct FourStage {
    x1: Mat2,
    b_prime: Mat2,
    x3: Mat2,
    h: Mat2,
    objective: f64,
}

fn four_stage(m: &AbcdMatrix, h: Mat2) -> Option<FourStage> {
    let h = h.sym();
    let b_raw = m.b - m.a * h;
    let scale = m.b.max_abs().max((m.a * h).max_abs()).max(1.0);
    if b_raw.asymmetry() > 1e-9 * scale {
        return None;
    }
    let b_prime = b_raw.sym();
    let bi = b_prime.try_inv()?;
    let d_prime = m.d - m.c * h;
    let x1 = ((d_prime - Mat2::IDENTITY) * bi).sym();
    let x3 = (bi * (m.a - Mat2::IDENTITY)).sym();
    let objective = gamma(x1) * gamma(b_prime) * gamma(x3) * gamma(h);
    objective.is_finite().then_some(FourStage { x1, b_prime, x3, h, objective })
}

/// The bandwidth-growth objective `γ((D'−I)B'⁻¹)·γ(B')·γ(B'⁻¹(A−I))·γ(H)`,
/// or `None` when `H` is not feasible (asymmetric or singular `B' = B − AH`).
pub fn ha_objective(m: &AbcdMatrix, h: Mat2) -> Option<f64> {
    four_stage(m, h).map(|f| f.objective)
}

fn four_stage_plan(fs: FourStage, last: Stage) -> DecompositionPlan {
    DecompositionPlan::new(
        PlanKind::CmCcCmCc,
        vec![Stage::ChirpMul(fs.x1), Stage::ChirpConv(fs.b_prime), Stage::ChirpMul(fs.x3), last],
    )
}

/// `(A,B;C,D) = CM((D−I)B⁻¹)·CC(B)·CM(B⁻¹(A−I))`, valid when `B` is symmetric and invertible.
pub fn factor_cm_cc_cm(m: &AbcdMatrix) -> Result<DecompositionPlan> {
    m.ensure_valid()?;
    let b = m.b;
    if b.asymmetry() > TAU_SYM {
        return Err(Error::BNotSymmetric(b.asymmetry()));
    }
    let b = b.sym();
    let bi = b.try_inv().ok_or(Error::BSingular(b.det()))?;
    let x1 = ((m.d - Mat2::IDENTITY) * bi).sym();
    let x3 = (bi * (m.a - Mat2::IDENTITY)).sym();
    Ok(DecompositionPlan::new(
        PlanKind::CmCcCm,
        vec![Stage::ChirpMul(x1), Stage::ChirpConv(b), Stage::ChirpMul(x3)],
    ))
}

/// Affine family of feasible `H`: `H = origin + Σ tᵢ·basisᵢ`, or, when
/// `through_b_prime` is set, `B' = Σ tᵢ·basisᵢ` with `H = A⁻¹(B − B')`.
struct Family {
    a_inv: Option<Mat2>,
    origin: [f64; 3],
    basis: Vec<[f64; 3]>,
}

fn to_sym(v: [f64; 3]) -> Mat2 {
    Mat2::symmetric(v[0], v[1], v[2])
}

// Symmetric matrices as (s11, s12, s22) with the Frobenius inner product.
fn frob(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + 2.0 * u[1] * v[1] + u[2] * v[2]
}

fn scaled(u: [f64; 3], s: f64) -> [f64; 3] {
    [u[0] * s, u[1] * s, u[2] * s]
}

fn sub3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

/// Orthonormal (Frobenius) basis of `{s : frob(n, s) = 0}`, or of all
/// symmetric matrices when `n` vanishes.
fn complement_basis(n: Option<[f64; 3]>) -> Vec<[f64; 3]> {
    let canon = [[1.0, 0.0, 0.0], [0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0], [0.0, 0.0, 1.0]];
    let mut basis: Vec<[f64; 3]> = Vec::new();
    let mut reference: Vec<[f64; 3]> = Vec::new();
    if let Some(n) = n {
        reference.push(scaled(n, 1.0 / frob(n, n).sqrt()));
    }
    for e in canon {
        let mut v = e;
        for r in reference.iter().chain(basis.iter()) {
            v = sub3(v, scaled(*r, frob(v, *r)));
        }
        let norm = frob(v, v).sqrt();
        if norm > 1e-6 {
            basis.push(scaled(v, 1.0 / norm));
        }
    }
    let dim = if n.is_some() { 2 } else { 3 };
    basis.truncate(dim);
    basis
}

impl Family {
    fn new(m: &AbcdMatrix) -> Result<Family> {
        let a = m.a;
        let b = m.b;
        // B − AH is symmetric iff frob(n, H) = b12 − b21 with n below, i.e.
        // −a21·h11 + (a11 − a22)·h12 + a12·h22 = b12 − b21.
        let n = [-a.m21, 0.5 * (a.m11 - a.m22), a.m12];
        let n_norm2 = frob(n, n);
        let scale = a.max_abs().max(1.0);
        let degenerate = n_norm2.sqrt() <= 1e-12 * scale;
        let rhs = b.m12 - b.m21;

        if let Some(a_inv) = a.try_inv() {
            // B' ranges over symmetric matrices with AB' symmetric: frob(n, B') = 0.
            let basis = complement_basis((!degenerate).then_some(n));
            return Ok(Family { a_inv: Some(a_inv), origin: [0.0; 3], basis });
        }
        if degenerate {
            if rhs.abs() > TAU_SYM * b.max_abs().max(1.0) {
                return Err(Error::NoFeasiblePoint);
            }
            return Ok(Family { a_inv: None, origin: [0.0; 3], basis: complement_basis(None) });
        }
        let origin = scaled(n, rhs / n_norm2);
        Ok(Family { a_inv: None, origin, basis: complement_basis(Some(n)) })
    }

    fn point(&self, t: &[f64]) -> [f64; 3] {
        let mut p = self.origin;
        for (ti, e) in t.iter().zip(&self.basis) {
            for k in 0..3 {
                p[k] += ti * e[k];
            }
        }
        p
    }

    fn h_at(&self, m: &AbcdMatrix, t: &[f64]) -> Mat2 {
        let p = to_sym(self.point(t));
        match self.a_inv {
            Some(a_inv) => (a_inv * (m.b - p)).sym(),
            None => p,
        }
    }

    /// Coordinates of the family point closest to `h`.
    fn coords_of(&self, m: &AbcdMatrix, h: Mat2) -> Vec<f64> {
        let p = match self.a_inv {
            Some(_) => (m.b - m.a * h).sym(),
            None => h.sym(),
        };
        let v = sub3([p.m11, p.m12, p.m22], self.origin);
        self.basis.iter().map(|e| frob(v, *e)).collect()
    }
}

fn objective_at(m: &AbcdMatrix, fam: &Family, t: &[f64]) -> f64 {
    ha_objective(m, fam.h_at(m, t)).unwrap_or(f64::INFINITY)
}

/// Grid scan followed by coordinate descent with step halving.
fn search_h(m: &AbcdMatrix) -> Result<Mat2> {
    let fam = Family::new(m)?;
    let dim = fam.basis.len();
    let radius = 4.0 * (1.0 + m.max_abs());
    let points = if dim == 2 { GRID_POINTS_2D } else { GRID_POINTS_3D };
    let spacing = 2.0 * radius / (points - 1) as f64;
    let coord = |i: usize| -radius + spacing * i as f64;

    let mut best_t = vec![0.0; dim];
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; dim];
    let total = points.pow(dim as u32);
    let mut t = vec![0.0; dim];
    for _ in 0..total {
        for k in 0..dim {
            t[k] = coord(idx[k]);
        }
        let f = objective_at(m, &fam, &t);
        if f < best {
            best = f;
            best_t.clone_from(&t);
        }
        // Lexicographic increment, last coordinate fastest.
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
        }
    }

    // H = 0 competes as a seed whenever it is feasible.
    let zero = fam.coords_of(m, Mat2::ZERO);
    let f_zero = ha_objective(m, Mat2::ZERO);
    if let Some(fz) = f_zero {
        let snapped = objective_at(m, &fam, &zero);
        if fz < best && snapped.is_finite() {
            best = snapped.min(fz);
            best_t = zero;
        }
    }
    if !best.is_finite() {
        return Err(Error::NoFeasiblePoint);
    }

    let mut current = objective_at(m, &fam, &best_t);
    let mut step = spacing;
    let mut iters = 0;
    while step >= MIN_STEP && iters < MAX_DESCENT_ITERS {
        iters += 1;
        let mut improved = false;
        for k in 0..dim {
            for sign in [-1.0, 1.0] {
                let mut trial = best_t.clone();
                trial[k] += sign * step;
                let f = objective_at(m, &fam, &trial);
                if f < current {
                    current = f;
                    best_t = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let h = fam.h_at(m, &best_t);
    // Snapping back to exactly zero keeps the plan free of round-off chirps.
    if let Some(fz) = f_zero {
        if fz <= current {
            return Ok(Mat2::ZERO);
        }
    }
    Ok(h)
}

/// `(A,B;C,D) = CM((D'−I)B'⁻¹)·CC(B')·CM(B'⁻¹(A−I))·CC(H)` with `H` chosen to
/// minimize the bandwidth-growth objective.
pub fn factor_ha(m: &AbcdMatrix) -> Result<DecompositionPlan> {
    m.ensure_valid()?;
    let h = search_h(m)?;
    let fs = four_stage(m, h).ok_or(Error::NoFeasiblePoint)?;
    Ok(four_stage_plan(fs, Stage::ChirpConv(fs.h)))
}

/// Four-stage factorization with a rank-one `H`, so the last chirp
/// convolution acts along a single axis. Falls back to the swap-Fourier
/// factorization when `a12 = a21 = 0`, and to [`factor_ha`] when no
/// rank-one `H` yields an invertible `B'`.
pub fn factor_lc(m: &AbcdMatrix) -> Result<DecompositionPlan> {
    m.ensure_valid()?;
    let (a, b) = (m.a, m.b);
    let eps = 1e-12 * a.max_abs().max(1.0);

    let mut candidates: Vec<(Axis, f64)> = Vec::new();
    if a.m21.abs() > eps {
        candidates.push((Axis::X, (b.m21 - b.m12) / a.m21));
    }
    if a.m12.abs() > eps {
        candidates.push((Axis::Y, (b.m12 - b.m21) / a.m12));
    }

    let best = candidates
        .iter()
        .filter_map(|&(axis, h)| {
            let hm = match axis {
                Axis::X => Mat2::diag(h, 0.0),
                Axis::Y => Mat2::diag(0.0, h),
            };
            four_stage(m, hm).map(|fs| (axis, h, fs))
        })
        .fold(None::<(Axis, f64, FourStage)>, |acc, c| match acc {
            Some(prev) if prev.2.objective <= c.2.objective => Some(prev),
            _ => Some(c),
        });

    if let Some((axis, h, fs)) = best {
        return Ok(four_stage_plan(fs, Stage::ChirpConv1D(axis, h)));
    }

    if candidates.is_empty() && a.is_invertible() {
        // (A,B;C,D) = (−B,A;−D,C)·(0,−I;I,0), where A is diagonal here.
        let swapped = AbcdMatrix::new(-m.b, m.a, -m.d, m.c);
        if let Ok(mut plan) = factor_cm_cc_cm(&swapped) {
            plan.stages.push(Stage::Idft2);
            plan.flags.push("lc: a12 = a21 = 0, swap-Fourier CM-CC-CM used".into());
            return Ok(plan);
        }
    }

    let mut plan = factor_ha(m)?;
    plan.flags.push("lc: no rank-one H gives an invertible B', high-accuracy H used".into());
    Ok(plan)
}

fn factor_variant(m: &AbcdMatrix, variant: Variant) -> Result<DecompositionPlan> {
    match variant {
        Variant::HighAccuracy => factor_ha(m),
        Variant::LowComplexity => factor_lc(m),
    }
}

/// `CC(H₁)·CM((D₁−I)B₁'⁻¹)·CC(B₁')·CM(B₁'⁻¹(A₁'−I))` with `H₁ = −H` taken from
/// the four-stage factorization of the inverse. Built as the stage-by-stage
/// inverse of that plan, so the pair telescopes exactly.
pub fn factor_cc_cm_cc_cm(m: &AbcdMatrix, variant: Variant) -> Result<DecompositionPlan> {
    m.ensure_valid()?;
    let forward = factor_variant(&m.inverse_unchecked(), variant)?;
    Ok(forward.inverse(PlanKind::CcCmCcCm))
}

/// Picks the four-stage form by the sign of `tr(B)`: CM-CC-CM-CC for
/// `tr(B) ≥ 0`, CC-CM-CC-CM otherwise. A matrix and its inverse get opposite
/// forms whenever `tr(B) ≠ 0`.
pub fn dispatch(m: &AbcdMatrix, variant: Variant) -> Result<DecompositionPlan> {
    if m.b.trace() < 0.0 {
        factor_cc_cm_cc_cm(m, variant)
    } else {
        m.ensure_valid()?;
        factor_variant(m, variant)
    }
}

/// `CM(DB⁻¹)·Affine((Bᵀ)⁻¹)·DFT·CM(B⁻¹A)`.
pub fn factor_ding(m: &AbcdMatrix) -> Result<DecompositionPlan> {
    m.ensure_valid()?;
    let bi = m.b.try_inv().ok_or(Error::BSingular(m.b.det()))?;
    Ok(DecompositionPlan::new(
        PlanKind::Ding,
        vec![
            Stage::ChirpMul((m.d * bi).sym()),
            Stage::Affine(bi.transpose()),
            Stage::Dft2,
            Stage::ChirpMul((bi * m.a).sym()),
        ],
    ))
}

/// `CM(G)·Affine(S⁻¹Rφ)·DFRFT(α,β)·Affine(Rθ)` from the Iwasawa decomposition.
pub fn factor_koc(m: &AbcdMatrix) -> Result<DecompositionPlan> {
    let f = iwasawa(m)?;
    let (sa, sb) = (f.alpha.sin(), f.beta.sin());
    if sa.abs() < crate::kernels::FRFT_SIN_MIN || sb.abs() < crate::kernels::FRFT_SIN_MIN {
        return Err(Error::FrftSingular { sin_alpha: sa, sin_beta: sb });
    }
    let mut plan = DecompositionPlan::new(
        PlanKind::Iwasawa,
        vec![
            Stage::ChirpMul(f.g),
            Stage::Affine(f.s.inv() * Mat2::rotation(f.phi)),
            Stage::Dfrft { alpha: f.alpha, beta: f.beta },
            Stage::Affine(Mat2::rotation(f.theta)),
        ],
    );
    if f.degenerate {
        plan.flags.push("iwasawa: sin((alpha-beta)/2) = 0, phi fixed to 0".into());
    }
    Ok(plan)
}
