use std::fmt;

use super::{AbcdMatrix, Mat2};

/// Spatial axis: `X` is the first (row) index of a field, `Y` the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Which factorization produced a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlanKind {
    CmCcCm,
    CmCcCmCc,
    CcCmCcCm,
    Iwasawa,
    Ding,
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::CmCcCm => "CM-CC-CM",
            PlanKind::CmCcCmCc => "CM-CC-CM-CC",
            PlanKind::CcCmCcCm => "CC-CM-CC-CM",
            PlanKind::Iwasawa => "Iwasawa",
            PlanKind::Ding => "Ding",
        })
    }
}

/// One elementary discrete operator. Chirp matrices are in continuous units;
/// the kernels apply them at whatever grid spacing the field carries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stage {
    /// Chirp multiplication `(I, 0; C, I)`.
    ChirpMul(Mat2),
    /// Chirp convolution `(I, B; 0, I)`.
    ChirpConv(Mat2),
    /// Chirp convolution along one axis with rate `h`.
    ChirpConv1D(Axis, f64),
    Dft2,
    Idft2,
    Dft1(Axis),
    Idft1(Axis),
    /// Coordinate map `g(Dᵀ z)` with ABCD matrix `((Dᵀ)⁻¹, 0; 0, D)`.
    Affine(Mat2),
    /// Separable fractional Fourier transform with angles `(alpha, beta)`.
    Dfrft { alpha: f64, beta: f64 },
}

impl Stage {
    /// The ABCD matrix this stage realizes.
    pub fn matrix(&self) -> AbcdMatrix {
        match *self {
            Stage::ChirpMul(c) => AbcdMatrix::chirp_mul(c),
            Stage::ChirpConv(b) => AbcdMatrix::chirp_conv(b),
            Stage::ChirpConv1D(axis, h) => AbcdMatrix::chirp_conv(axis_diag(axis, h, 0.0)),
            Stage::Dft2 => AbcdMatrix::FOURIER,
            Stage::Idft2 => AbcdMatrix::FOURIER.inverse_unchecked(),
            Stage::Dft1(axis) => partial_fourier(axis, 1.0),
            Stage::Idft1(axis) => partial_fourier(axis, -1.0),
            Stage::Affine(d) => AbcdMatrix::affine(d),
            Stage::Dfrft { alpha, beta } => AbcdMatrix::frft(alpha, beta),
        }
    }

    /// The exact discrete inverse of this stage.
    pub fn inverse(&self) -> Stage {
        match *self {
            Stage::ChirpMul(c) => Stage::ChirpMul(-c),
            Stage::ChirpConv(b) => Stage::ChirpConv(-b),
            Stage::ChirpConv1D(axis, h) => Stage::ChirpConv1D(axis, -h),
            Stage::Dft2 => Stage::Idft2,
            Stage::Idft2 => Stage::Dft2,
            Stage::Dft1(axis) => Stage::Idft1(axis),
            Stage::Idft1(axis) => Stage::Dft1(axis),
            Stage::Affine(d) => Stage::Affine(d.inv()),
            Stage::Dfrft { alpha, beta } => Stage::Dfrft { alpha: -alpha, beta: -beta },
        }
    }

    /// The symmetric chirp matrix carried by chirp stages.
    pub fn chirp(&self) -> Option<Mat2> {
        match *self {
            Stage::ChirpMul(c) | Stage::ChirpConv(c) => Some(c),
            Stage::ChirpConv1D(axis, h) => Some(axis_diag(axis, h, 0.0)),
            _ => None,
        }
    }

    pub fn is_chirp_mul(&self) -> bool {
        matches!(self, Stage::ChirpMul(_))
    }

    pub fn is_chirp_conv(&self) -> bool {
        matches!(self, Stage::ChirpConv(_) | Stage::ChirpConv1D(..))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::ChirpMul(c) => write!(f, "CM{c}"),
            Stage::ChirpConv(b) => write!(f, "CC{b}"),
            Stage::ChirpConv1D(axis, h) => write!(f, "CC1D[{axis:?}]({h:.6})"),
            Stage::Dft2 => f.write_str("DFT2"),
            Stage::Idft2 => f.write_str("IDFT2"),
            Stage::Dft1(axis) => write!(f, "DFT1[{axis:?}]"),
            Stage::Idft1(axis) => write!(f, "IDFT1[{axis:?}]"),
            Stage::Affine(d) => write!(f, "AFFINE{d}"),
            Stage::Dfrft { alpha, beta } => write!(f, "DFRFT({alpha:.6}, {beta:.6})"),
        }
    }
}

fn axis_diag(axis: Axis, on: f64, off: f64) -> Mat2 {
    match axis {
        Axis::X => Mat2::diag(on, off),
        Axis::Y => Mat2::diag(off, on),
    }
}

fn partial_fourier(axis: Axis, sign: f64) -> AbcdMatrix {
    AbcdMatrix::new(
        axis_diag(axis, 0.0, 1.0),
        axis_diag(axis, sign, 0.0),
        axis_diag(axis, -sign, 0.0),
        axis_diag(axis, 0.0, 1.0),
    )
}

/// An ordered factorization of an ABCD matrix into elementary stages.
///
/// `stages` is stored in matrix-product order: the plan realizes
/// `stages[0] · stages[1] · … · stages[k-1]`, so the last stage is the first
/// one applied to a signal.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionPlan {
    pub kind: PlanKind,
    pub stages: Vec<Stage>,
    /// Branches taken while planning (fallbacks, degenerate cases).
    pub flags: Vec<String>,
}

impl DecompositionPlan {
    pub fn new(kind: PlanKind, stages: Vec<Stage>) -> Self {
        DecompositionPlan { kind, stages, flags: Vec::new() }
    }

    /// Ordered product of the stage matrices.
    pub fn recompose(&self) -> AbcdMatrix {
        self.stages
            .iter()
            .fold(AbcdMatrix::IDENTITY, |acc, s| acc.mul_unchecked(&s.matrix()))
    }

    /// Stages in the order they act on a signal.
    pub fn application_order(&self) -> impl Iterator<Item = &Stage> {
        self.stages.iter().rev()
    }

    /// The plan of the exact discrete inverse: reversed, each stage inverted.
    pub fn inverse(&self, kind: PlanKind) -> DecompositionPlan {
        DecompositionPlan {
            kind,
            stages: self.stages.iter().rev().map(Stage::inverse).collect(),
            flags: self.flags.clone(),
        }
    }

    /// Largest asymmetry over all chirp matrices in the plan.
    pub fn max_chirp_asymmetry(&self) -> f64 {
        self.stages
            .iter()
            .filter_map(Stage::chirp)
            .map(Mat2::asymmetry)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for DecompositionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.kind)?;
        for (i, s) in self.stages.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}
