//! Complete transforms assembled from factorization plans, and the
//! direct-summation oracle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{hermite_gaussian, hermite_gaussian_support, zero_pad, Field, GridSpec};
use crate::kernels::{
    affine_bilinear, affine_prefactor, chirp_convolve, chirp_convolve_1d, chirp_multiply, dfrft2,
    dfrft2_padded, dft1, dft2, idft1, idft2, OpCounter,
};
use crate::metrics::nmse;
use crate::symplectic::{
    dispatch, factor_ding, factor_ha, factor_koc, factor_lc, invert, AbcdMatrix, DecompositionPlan, PlanKind, Stage, Variant,
};

/// Transform algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// CM-CC-CM-CC with the bandwidth-minimizing `H`.
    Ha,
    /// CM-CC-CM-CC with a rank-one `H` and a one-axis chirp convolution.
    Lc,
    /// Iwasawa decomposition: chirp, two affine maps, fractional Fourier transform.
    Koc,
    /// Chirp, DFT, one affine map, chirp.
    Ding,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ha, Method::Lc, Method::Koc, Method::Ding];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ha => "ha",
            Method::Lc => "lc",
            Method::Koc => "koc",
            Method::Ding => "ding",
        }
    }

    /// True for the affine-free methods whose plans telescope exactly.
    pub fn is_chirp_only(self) -> bool {
        matches!(self, Method::Ha | Method::Lc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Which four-stage chirp form the HA and LC methods use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PlanForm {
    /// CM-CC-CM-CC for `tr(B) ≥ 0`, CC-CM-CC-CM otherwise, so that a
    /// transform and its inverse telescope exactly.
    #[default]
    Reversible,
    /// CM-CC-CM-CC for every matrix. Usually more accurate for `tr(B) < 0`,
    /// since the CC-first form inherits the chirps chosen for the inverse.
    CmFirst,
}

impl PlanForm {
    pub fn name(self) -> &'static str {
        match self {
            PlanForm::Reversible => "reversible",
            PlanForm::CmFirst => "cm-first",
        }
    }
}

impl FromStr for PlanForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PlanForm::Reversible, PlanForm::CmFirst]
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown plan form {s:?}")))
    }
}

/// Run options.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransformOptions {
    /// Zero-padding `ΔN` applied to the input before the run.
    pub pad: usize,
    /// Internal upsampling factor `N'/N` before the affine stages of the
    /// Iwasawa and Ding methods.
    pub upsample: usize,
    pub form: PlanForm,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { pad: 0, upsample: 2, form: PlanForm::Reversible }
    }
}

impl TransformOptions {
    pub fn with_pad(pad: usize) -> Self {
        TransformOptions { pad, ..TransformOptions::default() }
    }

    pub fn with_form(self, form: PlanForm) -> Self {
        TransformOptions { form, ..self }
    }
}

/// One executed stage and the grids around it.
#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace {
    pub stage: String,
    pub input: GridSpec,
    pub output: GridSpec,
}

/// Output and bookkeeping of one transform run.
#[derive(Clone, Debug)]
pub struct TransformReport {
    pub output: Field,
    pub complex_muls: u64,
    pub plan_kind: PlanKind,
    pub stage_trace: Vec<StageTrace>,
    pub fallback_flags: Vec<String>,
}

/// A planned transform that can be applied to many fields.
#[derive(Clone, Debug)]
pub struct PreparedTransform {
    method: Method,
    options: TransformOptions,
    plan: DecompositionPlan,
    /// High-accuracy plan used when the low-complexity plan changes domain
    /// and the grid is not its own Fourier dual.
    grid_fallback: Option<DecompositionPlan>,
}

fn changes_domain(plan: &DecompositionPlan) -> bool {
    plan.stages
        .iter()
        .any(|s| matches!(s, Stage::Dft2 | Stage::Idft2 | Stage::Dft1(_) | Stage::Idft1(_)))
}

/// Plans `m` for `method`.
pub fn prepare(m: &AbcdMatrix, method: Method, options: TransformOptions) -> Result<PreparedTransform> {
    if options.upsample == 0 {
        return Err(Error::InvalidParameter("upsampling factor must be at least 1".into()));
    }
    let four_stage = |variant| match options.form {
        PlanForm::Reversible => dispatch(m, variant),
        PlanForm::CmFirst => match variant {
            Variant::HighAccuracy => factor_ha(m),
            Variant::LowComplexity => factor_lc(m),
        },
    };
    let (plan, grid_fallback) = match method {
        Method::Ha => (four_stage(Variant::HighAccuracy)?, None),
        Method::Lc => {
            let plan = four_stage(Variant::LowComplexity)?;
            let fallback = if changes_domain(&plan) {
                Some(four_stage(Variant::HighAccuracy)?)
            } else {
                None
            };
            (plan, fallback)
        }
        Method::Koc => (factor_koc(m)?, None),
        Method::Ding => (factor_ding(m)?, None),
    };
    Ok(PreparedTransform { method, options, plan, grid_fallback })
}

impl PreparedTransform {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn plan(&self) -> &DecompositionPlan {
        &self.plan
    }

    pub fn apply(&self, f: &Field) -> Result<TransformReport> {
        let input = zero_pad(f, self.options.pad);
        let mut run = Run::default();
        let (kind, output) = match self.method {
            Method::Ha | Method::Lc => {
                let plan = match &self.grid_fallback {
                    Some(ha) if !input.spec().is_self_dual() => {
                        run.flags.extend(self.plan.flags.iter().cloned());
                        run.flags.push("lc: grid is not self-dual, high-accuracy plan used".into());
                        ha
                    }
                    _ => &self.plan,
                };
                run.flags.extend(plan.flags.iter().cloned());
                (plan.kind, run.chirp_plan(plan, input)?)
            }
            Method::Koc => {
                run.flags.extend(self.plan.flags.iter().cloned());
                (self.plan.kind, run.iwasawa_plan(&self.plan, input, self.options.upsample)?)
            }
            Method::Ding => {
                run.flags.extend(self.plan.flags.iter().cloned());
                (self.plan.kind, run.ding_plan(&self.plan, input, self.options.upsample)?)
            }
        };
        Ok(TransformReport {
            output,
            complex_muls: run.counter.complex_muls,
            plan_kind: kind,
            stage_trace: run.trace,
            fallback_flags: run.flags,
        })
    }
}

#[derive(Default)]
struct Run {
    counter: OpCounter,
    trace: Vec<StageTrace>,
    flags: Vec<String>,
}

impl Run {
    fn record(&mut self, stage: impl ToString, input: GridSpec, output: &Field) {
        self.trace.push(StageTrace { stage: stage.to_string(), input, output: output.spec() });
    }

    fn affine(&mut self, f: &Field, d: crate::symplectic::Mat2, out: GridSpec) -> Result<Field> {
        if affine_prefactor(d).1 {
            self.flags.push("affine: det D < 0, principal square root used".into());
        }
        affine_bilinear(f, d, out, &mut self.counter)
    }

    fn stage(&mut self, f: Field, stage: &Stage) -> Result<Field> {
        let c = &mut self.counter;
        let input = f.spec();
        let out = match *stage {
            Stage::ChirpMul(m) => chirp_multiply(&f, m, c)?,
            Stage::ChirpConv(b) => chirp_convolve(&f, b, c)?,
            Stage::ChirpConv1D(axis, h) => chirp_convolve_1d(&f, axis, h, c)?,
            Stage::Dft2 => dft2(&f, c),
            Stage::Idft2 => idft2(&f, c),
            Stage::Dft1(axis) => dft1(&f, axis, c),
            Stage::Idft1(axis) => idft1(&f, axis, c),
            Stage::Affine(d) => self.affine(&f, d, input)?,
            Stage::Dfrft { alpha, beta } => dfrft2(&f, alpha, beta, &mut self.counter)?,
        };
        self.record(stage, input, &out);
        Ok(out)
    }

    fn chirp_plan(&mut self, plan: &DecompositionPlan, input: Field) -> Result<Field> {
        let spec = input.spec();
        let mut g = input;
        for stage in plan.application_order() {
            g = self.stage(g, stage)?;
        }
        // Grids telescope; drop the rounding left in the spacings.
        if g.spec().matches(&spec) {
            g = g.with_spec(spec)?;
        }
        Ok(g)
    }

    /// `CM(G)·Affine(S⁻¹Rφ)·DFRFT(α,β)·Affine(Rθ)` with the DFT zero-padded to
    /// `upsample·N` and the second affine map resampling onto the input grid.
    fn iwasawa_plan(&mut self, plan: &DecompositionPlan, input: Field, upsample: usize) -> Result<Field> {
        let [Stage::ChirpMul(g), Stage::Affine(outer), Stage::Dfrft { alpha, beta }, Stage::Affine(inner)] =
            plan.stages[..]
        else {
            return Err(Error::InvalidParameter("not an Iwasawa plan".into()));
        };
        let spec = input.spec();
        let rotated = self.affine(&input, inner, spec)?;
        self.record(Stage::Affine(inner), spec, &rotated);
        let n_fft = upsample * spec.n;
        let frft = dfrft2_padded(&rotated, alpha, beta, n_fft, &mut self.counter)?;
        self.record(Stage::Dfrft { alpha, beta }, spec, &frft);
        let scaled = self.affine(&frft, outer, spec)?;
        self.record(Stage::Affine(outer), frft.spec(), &scaled);
        let out = chirp_multiply(&scaled, g, &mut self.counter)?;
        self.record(Stage::ChirpMul(g), spec, &out);
        Ok(out)
    }

    /// `CM(DB⁻¹)·Affine((Bᵀ)⁻¹)·DFT·CM(B⁻¹A)` with the DFT zero-padded to
    /// `upsample·N` and the affine map resampling onto the input grid.
    fn ding_plan(&mut self, plan: &DecompositionPlan, input: Field, upsample: usize) -> Result<Field> {
        let [Stage::ChirpMul(outer), Stage::Affine(d), Stage::Dft2, Stage::ChirpMul(inner)] = plan.stages[..]
        else {
            return Err(Error::InvalidParameter("not a Ding plan".into()));
        };
        let spec = input.spec();
        let chirped = chirp_multiply(&input, inner, &mut self.counter)?;
        self.record(Stage::ChirpMul(inner), spec, &chirped);
        let padded = zero_pad(&chirped, (upsample - 1) * spec.n);
        let spectrum = dft2(&padded, &mut self.counter);
        self.record(Stage::Dft2, padded.spec(), &spectrum);
        let mapped = self.affine(&spectrum, d, spec)?;
        self.record(Stage::Affine(d), spectrum.spec(), &mapped);
        let out = chirp_multiply(&mapped, outer, &mut self.counter)?;
        self.record(Stage::ChirpMul(outer), spec, &out);
        Ok(out)
    }
}

/// Plans and runs `m` on `f`.
pub fn nsdlct(f: &Field, m: &AbcdMatrix, method: Method, options: TransformOptions) -> Result<TransformReport> {
    prepare(m, method, options)?.apply(f)
}

/// The transform of `invert(m)`. For the chirp-only methods its plan is the
/// stage-by-stage inverse of the forward plan whenever `tr(B) ≠ 0`, so the
/// round trip is exact up to rounding.
pub fn nsdlct_inverse(
    f: &Field,
    m: &AbcdMatrix,
    method: Method,
    options: TransformOptions,
) -> Result<TransformReport> {
    nsdlct(f, &invert(m)?, method, options)
}

/// NMSE of the single transform of `m3·m1` against the cascade `m3 ∘ m1`.
/// Padding applies once, before the first stage.
pub fn additivity_error(
    f: &Field,
    m1: &AbcdMatrix,
    m3: &AbcdMatrix,
    method: Method,
    options: TransformOptions,
) -> Result<f64> {
    let combined = crate::symplectic::compose(m3, m1)?;
    let first = nsdlct(f, m1, method, options)?;
    let inner = TransformOptions { pad: 0, ..options };
    let cascade = nsdlct(&first.output, m3, method, inner)?;
    let single = nsdlct(f, &combined, method, options)?;
    nmse(&single.output, &cascade.output)
}

/// Forward transform followed by the inverse transform, both on the padded grid.
pub fn round_trip(f: &Field, m: &AbcdMatrix, method: Method, options: TransformOptions) -> Result<Field> {
    let forward = nsdlct(f, m, method, options)?;
    let inner = TransformOptions { pad: 0, ..options };
    Ok(nsdlct_inverse(&forward.output, m, method, inner)?.output)
}

/// Sampling-and-summation evaluation of the continuous transform
/// `G(r') = Δx Δy/(2π√(−det B)) ΣΣ exp(j/2 (r'ᵀDB⁻¹r' − 2rᵀB⁻¹r' + rᵀB⁻¹Ar)) g[m,n]`
/// on `out_spec`, with the principal square root.
pub fn direct_nslct(f: &Field, m: &AbcdMatrix, out_spec: GridSpec) -> Result<Field> {
    let bi = m.b.try_inv().ok_or(Error::BSingular(m.b.det()))?;
    let q_in = bi * m.a;
    let q_out = m.d * bi;
    let spec = f.spec();
    let n = spec.n;
    let pre = spec.dx * spec.dy / (2.0 * PI * Complex64::new(-m.b.det(), 0.0).sqrt());

    // Fold the input chirp into the samples and keep the nonzero span of each row.
    struct Row {
        x: f64,
        first: usize,
        values: Vec<Complex64>,
    }
    let mut rows = Vec::new();
    for i in 0..n {
        let x = spec.x(i);
        let src = &f.values()[i * n..(i + 1) * n];
        let Some(first) = src.iter().position(|v| *v != Complex64::new(0.0, 0.0)) else {
            continue;
        };
        let last = src.iter().rposition(|v| *v != Complex64::new(0.0, 0.0)).unwrap();
        let values = (first..=last)
            .map(|j| {
                let y = spec.y(j);
                let quad = q_in.m11 * x * x + (q_in.m12 + q_in.m21) * x * y + q_in.m22 * y * y;
                src[j] * Complex64::from_polar(1.0, 0.5 * quad)
            })
            .collect();
        rows.push(Row { x, first, values });
    }

    let on = out_spec.n;
    let values: Vec<Complex64> = (0..on * on)
        .into_par_iter()
        .map(|k| {
            let (u, v) = (out_spec.x(k / on), out_spec.y(k % on));
            let w1 = bi.m11 * u + bi.m12 * v;
            let w2 = bi.m21 * u + bi.m22 * v;
            let step = Complex64::from_polar(1.0, -spec.dy * w2);
            let mut sum = Complex64::new(0.0, 0.0);
            for row in &rows {
                let mut phasor = Complex64::from_polar(1.0, -(row.x * w1 + spec.y(row.first) * w2));
                let mut acc = Complex64::new(0.0, 0.0);
                for g in &row.values {
                    acc += g * phasor;
                    phasor *= step;
                }
                sum += acc;
            }
            let quad = q_out.m11 * u * u + (q_out.m12 + q_out.m21) * u * v + q_out.m22 * v * v;
            pre * Complex64::from_polar(1.0, 0.5 * quad) * sum
        })
        .collect();
    Field::new(out_spec, values)
}

/// Refinement of the reference grid relative to the test grid.
pub const REFERENCE_REFINE: usize = 4;
/// Width of the reference grid relative to the test grid.
pub const REFERENCE_WIDEN: usize = 4;
/// Reference samples below this fraction of the peak are dropped.
pub const REFERENCE_TRIM: f64 = 1e-16;

/// Ground truth for a Hermite-Gaussian input: [`direct_nslct`] from a grid
/// [`REFERENCE_REFINE`] times finer and [`REFERENCE_WIDEN`] times wider than
/// `test_spec`, evaluated at the points of `out_spec`. Samples that are
/// negligible relative to the peak are trimmed before summation.
pub fn hg_reference(
    orders: &[(usize, usize)],
    m: &AbcdMatrix,
    test_spec: GridSpec,
    out_spec: GridSpec,
) -> Result<Field> {
    let fine_d = (test_spec.dx / REFERENCE_REFINE as f64, test_spec.dy / REFERENCE_REFINE as f64);
    let fine_n = test_spec.n * REFERENCE_REFINE * REFERENCE_WIDEN;
    let fine = GridSpec::new(fine_n, fine_d.0, fine_d.1)?;
    let half = hermite_gaussian_support(fine, orders, REFERENCE_TRIM)?.min(fine_n / 2);
    let trimmed = GridSpec::new(2 * half + 1, fine_d.0, fine_d.1)?;
    direct_nslct(&hermite_gaussian(trimmed, orders)?, m, out_spec)
}
