//! Primitive discrete operators with multiplication accounting.
//!
//! Chirp matrices are given in continuous units and evaluated at the
//! spacings of the grid they act on. All DFT phases use centered indices,
//! `e^(−j2π(pm+qn)/N)` with `p, m ∈ {−⌊N/2⌋, …, ⌈N/2⌉−1}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{zero_pad, Field, GridSpec};
use crate::symplectic::{Axis, Mat2, TAU_SYM};

/// Running count of complex multiplications in the accounting categories of
/// the complexity comparison: FFTs at `(N²/2)·log₂N²`, pointwise products at
/// `N²`, bilinear affine maps at `2N²`. Prefactor scalings are not counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub complex_muls: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        OpCounter::default()
    }

    pub fn add(&mut self, n: u64) {
        self.complex_muls += n;
    }

    /// `(N²/2)·log₂(N²)`, rounded for sizes that are not powers of two.
    pub fn fft2_cost(n: usize) -> u64 {
        let n2 = (n * n) as f64;
        (0.5 * n2 * n2.log2()).round() as u64
    }

    /// Half of [`OpCounter::fft2_cost`]: one 1D transform per row or column.
    pub fn fft1_cost(n: usize) -> u64 {
        let n2 = (n * n) as f64;
        (0.25 * n2 * n2.log2()).round() as u64
    }

    pub fn pointwise_cost(n: usize) -> u64 {
        (n * n) as u64
    }
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

fn check_symmetric(c: Mat2) -> Result<Mat2> {
    let asym = c.asymmetry();
    if !c.is_finite() || asym > TAU_SYM * c.max_abs().max(1.0) {
        return Err(Error::ChirpNotSymmetric(asym));
    }
    Ok(c.sym())
}

/// Multiplies in place by `exp(j/2·(c11 x² + 2 c12 x y + c22 y²))·scale` at
/// the sample coordinates of `spec`.
fn apply_chirp(values: &mut [Complex64], spec: &GridSpec, c: Mat2, scale: Complex64) {
    let n = spec.n;
    let ys: Vec<f64> = (0..n).map(|j| spec.y(j)).collect();
    for (i, row) in values.chunks_exact_mut(n).enumerate() {
        let x = spec.x(i);
        let a = 0.5 * c.m11 * x * x;
        let b = c.m12 * x;
        for (v, &y) in row.iter_mut().zip(&ys) {
            *v *= cis(a + y * (b + 0.5 * c.m22 * y)) * scale;
        }
    }
}

/// Discrete chirp multiplication with the field's own spacings.
pub fn chirp_multiply(f: &Field, c: Mat2, counter: &mut OpCounter) -> Result<Field> {
    let c = check_symmetric(c)?;
    let spec = f.spec();
    let mut values = f.values().to_vec();
    if c != Mat2::ZERO {
        apply_chirp(&mut values, &spec, c, Complex64::new(1.0, 0.0));
    }
    counter.add(OpCounter::pointwise_cost(spec.n));
    Field::new(spec, values)
}

fn transpose(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = values[i * n + j];
        }
    }
    out
}

/// Unnormalized FFT along the contiguous (second) index with centered index
/// conventions on both sides.
fn fft_rows(values: &mut [Complex64], n: usize, fft: &dyn Fft<f64>) {
    let c = n / 2;
    for row in values.chunks_exact_mut(n) {
        row.rotate_left(c);
    }
    fft.process(values);
    for row in values.chunks_exact_mut(n) {
        row.rotate_right(c);
    }
}

fn fft_axis(values: &mut Vec<Complex64>, n: usize, axis: Axis, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    match axis {
        Axis::Y => fft_rows(values, n, fft.as_ref()),
        Axis::X => {
            let mut t = transpose(values, n);
            fft_rows(&mut t, n, fft.as_ref());
            *values = transpose(&t, n);
        }
    }
}

fn fft_2d(values: &mut Vec<Complex64>, n: usize, inverse: bool) {
    fft_axis(values, n, Axis::Y, inverse);
    fft_axis(values, n, Axis::X, inverse);
}

fn scale_all(values: &mut [Complex64], s: Complex64) {
    for v in values {
        *v *= s;
    }
}

fn dft2_prefactor(spec: &GridSpec) -> Complex64 {
    Complex64::new(0.0, -spec.dx * spec.dy / (2.0 * PI))
}

/// `G[p,q] = (dx·dy/(j2π))·ΣΣ e^(−j2π(pm+qn)/N) g[m,n]` on the frequency grid.
pub fn dft2(f: &Field, counter: &mut OpCounter) -> Field {
    let spec = f.spec();
    let mut values = f.values().to_vec();
    fft_2d(&mut values, spec.n, false);
    scale_all(&mut values, dft2_prefactor(&spec));
    counter.add(OpCounter::fft2_cost(spec.n));
    Field::new(spec.frequency(), values).expect("size preserved")
}

/// The exact inverse of [`dft2`]: the output grid is the space grid whose
/// frequency grid is the input grid.
pub fn idft2(f: &Field, counter: &mut OpCounter) -> Field {
    let spec = f.spec();
    let out_spec = spec.frequency();
    let mut values = f.values().to_vec();
    fft_2d(&mut values, spec.n, true);
    let nn = (spec.n * spec.n) as f64;
    scale_all(&mut values, 1.0 / (dft2_prefactor(&out_spec) * nn));
    counter.add(OpCounter::fft2_cost(spec.n));
    Field::new(out_spec, values).expect("size preserved")
}

fn axis_spacing(spec: &GridSpec, axis: Axis) -> f64 {
    match axis {
        Axis::X => spec.dx,
        Axis::Y => spec.dy,
    }
}

fn axis_dual(spec: &GridSpec, axis: Axis) -> GridSpec {
    let f = spec.frequency();
    match axis {
        Axis::X => GridSpec { dx: f.dx, ..*spec },
        Axis::Y => GridSpec { dy: f.dy, ..*spec },
    }
}

/// `d/√(j2π)` with the principal root `√j = e^(jπ/4)`.
fn dft1_prefactor(d: f64) -> Complex64 {
    d / (Complex64::new(0.0, 2.0 * PI)).sqrt()
}

/// One-dimensional DFT along `axis`; the two axis prefactors multiply to the
/// [`dft2`] prefactor, so `dft1(X)∘dft1(Y) = dft2`.
pub fn dft1(f: &Field, axis: Axis, counter: &mut OpCounter) -> Field {
    let spec = f.spec();
    let mut values = f.values().to_vec();
    fft_axis(&mut values, spec.n, axis, false);
    scale_all(&mut values, dft1_prefactor(axis_spacing(&spec, axis)));
    counter.add(OpCounter::fft1_cost(spec.n));
    Field::new(axis_dual(&spec, axis), values).expect("size preserved")
}

/// The exact inverse of [`dft1`].
pub fn idft1(f: &Field, axis: Axis, counter: &mut OpCounter) -> Field {
    let spec = f.spec();
    let out_spec = axis_dual(&spec, axis);
    let mut values = f.values().to_vec();
    fft_axis(&mut values, spec.n, axis, true);
    let scale = 1.0 / (dft1_prefactor(axis_spacing(&out_spec, axis)) * spec.n as f64);
    scale_all(&mut values, scale);
    counter.add(OpCounter::fft1_cost(spec.n));
    Field::new(out_spec, values).expect("size preserved")
}

/// Chirp convolution `idft2 ∘ CM(−b) ∘ dft2`, with the middle chirp evaluated
/// on the frequency grid. The two DFT prefactors multiply to `1/N²`.
pub fn chirp_convolve(f: &Field, b: Mat2, counter: &mut OpCounter) -> Result<Field> {
    let b = check_symmetric(b)?;
    let spec = f.spec();
    let n = spec.n;
    let mut values = f.values().to_vec();
    fft_2d(&mut values, n, false);
    let scale = Complex64::new(1.0 / (n * n) as f64, 0.0);
    apply_chirp(&mut values, &spec.frequency(), -b, scale);
    fft_2d(&mut values, n, true);
    counter.add(2 * OpCounter::fft2_cost(n) + OpCounter::pointwise_cost(n));
    Field::new(spec, values)
}

/// One-axis chirp convolution `idft1 ∘ e^(−j h (p·dω)²/2) ∘ dft1`.
pub fn chirp_convolve_1d(f: &Field, axis: Axis, h: f64, counter: &mut OpCounter) -> Result<Field> {
    if !h.is_finite() {
        return Err(Error::InvalidParameter("non-finite chirp rate".into()));
    }
    let spec = f.spec();
    let n = spec.n;
    let dw = axis_spacing(&spec.frequency(), axis);
    let kernel: Vec<Complex64> = (0..n)
        .map(|i| {
            let w = spec.index(i) as f64 * dw;
            cis(-0.5 * h * w * w) / n as f64
        })
        .collect();
    let mut values = f.values().to_vec();
    fft_axis(&mut values, n, axis, false);
    for (i, row) in values.chunks_exact_mut(n).enumerate() {
        match axis {
            Axis::X => row.iter_mut().for_each(|v| *v *= kernel[i]),
            Axis::Y => row.iter_mut().zip(&kernel).for_each(|(v, k)| *v *= k),
        }
    }
    fft_axis(&mut values, n, axis, true);
    counter.add(2 * OpCounter::fft1_cost(n) + OpCounter::pointwise_cost(n));
    Field::new(spec, values)
}

/// `√det D` on the principal branch, and whether `det D < 0` forced the imaginary branch.
pub fn affine_prefactor(d: Mat2) -> (Complex64, bool) {
    let det = d.det();
    if det >= 0.0 {
        (Complex64::new(det.sqrt(), 0.0), false)
    } else {
        (Complex64::new(0.0, (-det).sqrt()), true)
    }
}

/// Bilinear-interpolated coordinate map `G(u,v) = √det D · g(d11 u + d21 v, d12 u + d22 v)`
/// sampled onto `out_spec`. Samples outside the input grid read as zero.
pub fn affine_bilinear(f: &Field, d: Mat2, out_spec: GridSpec, counter: &mut OpCounter) -> Result<Field> {
    if !d.is_finite() || !d.is_invertible() {
        return Err(Error::SingularAffine);
    }
    let (pre, _) = affine_prefactor(d);
    let inp = f.spec();
    let n_in = inp.n as i64;
    let c_in = inp.center() as i64;
    // Ratios first, so that d = I on matched grids lands exactly on samples.
    let (rxu, rxv) = (out_spec.dx / inp.dx, out_spec.dy / inp.dx);
    let (ryu, ryv) = (out_spec.dx / inp.dy, out_spec.dy / inp.dy);
    let sample = |m: i64, n: i64| -> Complex64 {
        let (i, j) = (m + c_in, n + c_in);
        if (0..n_in).contains(&i) && (0..n_in).contains(&j) {
            f.values()[(i * n_in + j) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let n = out_spec.n;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        let p = out_spec.index(i) as f64;
        for j in 0..n {
            let q = out_spec.index(j) as f64;
            let p1 = d.m11 * p * rxu + d.m21 * q * rxv;
            let q1 = d.m12 * p * ryu + d.m22 * q * ryv;
            let (p2, q2) = (p1.floor(), q1.floor());
            let (k, l) = (p1 - p2, q1 - q2);
            let (m, nn) = (p2 as i64, q2 as i64);
            let v = sample(m, nn) * ((1.0 - k) * (1.0 - l))
                + sample(m, nn + 1) * ((1.0 - k) * l)
                + sample(m + 1, nn) * (k * (1.0 - l))
                + sample(m + 1, nn + 1) * (k * l);
            values.push(pre * v);
        }
    }
    counter.add(2 * OpCounter::pointwise_cost(n));
    Field::new(out_spec, values)
}

/// Separable fractional Fourier transform `j/√(−sin α sin β)·CM(H)·DFT·CM(H)`
/// with `H = diag(cot α, cot β)`. The output spacing is `2π·sin α/(N·dx)`
/// along x and likewise along y.
pub fn dfrft2(f: &Field, alpha: f64, beta: f64, counter: &mut OpCounter) -> Result<Field> {
    dfrft2_padded(f, alpha, beta, f.n(), counter)
}

/// Smallest `|sin|` of a fractional angle accepted by the DFRFT kernels.
pub const FRFT_SIN_MIN: f64 = 1e-9;

/// [`dfrft2`] with the DFT input zero-padded to `n_fft` samples per axis,
/// which refines the output spacing by `N/n_fft`.
pub fn dfrft2_padded(
    f: &Field,
    alpha: f64,
    beta: f64,
    n_fft: usize,
    counter: &mut OpCounter,
) -> Result<Field> {
    let (sa, sb) = (alpha.sin(), beta.sin());
    if sa.abs() < FRFT_SIN_MIN || sb.abs() < FRFT_SIN_MIN {
        return Err(Error::FrftSingular { sin_alpha: sa, sin_beta: sb });
    }
    if n_fft < f.n() {
        return Err(Error::BadSize(format!("DFT size {n_fft} below field size {}", f.n())));
    }
    let h = Mat2::diag(alpha.cos() / sa, beta.cos() / sb);
    let inner = chirp_multiply(f, h, counter)?;
    let padded = zero_pad(&inner, n_fft - f.n());
    let ps = padded.spec();
    // The kernel e^(−j·x·u/sin) keeps an integer DFT phase on the output
    // grid |sin|·2π/(N·d); a negative sine flips that axis to the +j sum.
    let mut values = padded.into_values();
    fft_axis(&mut values, n_fft, Axis::Y, sb < 0.0);
    fft_axis(&mut values, n_fft, Axis::X, sa < 0.0);
    counter.add(OpCounter::fft2_cost(n_fft));
    let fs = ps.frequency();
    let out_spec = GridSpec::new(n_fft, fs.dx * sa.abs(), fs.dy * sb.abs())?;
    let pre = ps.dx * ps.dy / (2.0 * PI * Complex64::new(-sa * sb, 0.0).sqrt());
    apply_chirp(&mut values, &out_spec, h, pre);
    counter.add(OpCounter::pointwise_cost(n_fft));
    Field::new(out_spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::hermite_gaussian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(spec: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..spec.n * spec.n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(spec, values).unwrap()
    }

    fn rel_diff(a: &Field, b: &Field) -> f64 {
        let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    // Direct O(N⁴) evaluation of the centered DFT sum.
    fn naive_dft2(f: &Field) -> Vec<Complex64> {
        let spec = f.spec();
        let n = spec.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    for k in 0..n {
                        let ph = -2.0 * PI * (spec.index(p) * spec.index(m) + spec.index(q) * spec.index(k)) as f64
                            / n as f64;
                        s += cis(ph) * f.get(m, k);
                    }
                }
                out[p * n + q] = s * dft2_prefactor(&spec);
            }
        }
        out
    }

    #[test]
    fn chirp_multiply_cases() {
        let spec = GridSpec::square(4, 1.0).unwrap();
        let ones = Field::from_fn(spec, |_, _| Complex64::new(1.0, 0.0));
        let mut counter = OpCounter::new();
        let out = chirp_multiply(&ones, Mat2::IDENTITY, &mut counter).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (p, q) = (spec.index(i) as f64, spec.index(j) as f64);
                assert!((out.get(i, j) - cis(0.5 * (p * p + q * q))).norm() < 1e-15);
            }
        }
        assert_eq!(counter.complex_muls, 16);
        let f = random_field(spec, 1);
        assert_eq!(chirp_multiply(&f, Mat2::ZERO, &mut counter).unwrap(), f);
        let g = chirp_multiply(&f, Mat2::symmetric(0.3, -1.2, 2.5), &mut counter).unwrap();
        for (a, b) in g.values().iter().zip(f.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        assert!(matches!(
            chirp_multiply(&f, Mat2::new(0.0, 1.0, 0.0, 0.0), &mut counter),
            Err(Error::ChirpNotSymmetric(_))
        ));
    }

    #[test]
    fn dft2_of_impulse_is_constant() {
        let spec = GridSpec::square(8, 1.0).unwrap();
        let out = dft2(&Field::impulse(spec, 4, 4), &mut OpCounter::new());
        let expected = Complex64::new(0.0, -1.0 / (2.0 * PI));
        assert!(out.values().iter().all(|v| (v - expected).norm() < 1e-16));
        assert!((out.spec().dx - 2.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn dft2_matches_naive_sum() {
        for n in [5, 6] {
            let f = random_field(GridSpec::new(n, 0.4, 0.7).unwrap(), n as u64);
            let fast = dft2(&f, &mut OpCounter::new());
            let slow = Field::new(fast.spec(), naive_dft2(&f)).unwrap();
            assert!(rel_diff(&fast, &slow) < 1e-13);
        }
    }

    #[test]
    fn dft_pair_is_exact_and_unitary() {
        for n in [4, 7, 16, 33] {
            let f = random_field(GridSpec::new(n, 0.3, 0.9).unwrap(), 7 + n as u64);
            let mut counter = OpCounter::new();
            let g = dft2(&f, &mut counter);
            assert!(((g.energy() - f.energy()) / f.energy()).abs() < 1e-12);
            let back = idft2(&g, &mut counter);
            assert!(back.spec().matches(&f.spec()));
            assert!(rel_diff(&back, &f) < 1e-13);
            assert_eq!(counter.complex_muls, 2 * OpCounter::fft2_cost(n));
        }
    }

    #[test]
    fn one_axis_transforms_compose_to_dft2() {
        let f = random_field(GridSpec::new(12, 0.5, 0.25).unwrap(), 3);
        let mut counter = OpCounter::new();
        let xy = dft1(&dft1(&f, Axis::Y, &mut counter), Axis::X, &mut counter);
        let full = dft2(&f, &mut OpCounter::new());
        assert!(xy.spec().matches(&full.spec()));
        assert!(rel_diff(&xy, &full) < 1e-13);
        assert_eq!(counter.complex_muls, OpCounter::fft2_cost(12));
        for axis in [Axis::X, Axis::Y] {
            let back = idft1(&dft1(&f, axis, &mut counter), axis, &mut counter);
            assert!(back.spec().matches(&f.spec()));
            assert!(rel_diff(&back, &f) < 1e-13);
        }
    }

    #[test]
    fn one_axis_transform_leaves_other_axis_alone() {
        // g(x, y) = h(y): the x-transform is an impulse in p at every y.
        let spec = GridSpec::square(8, 1.0).unwrap();
        let f = Field::from_fn(spec, |_, y| Complex64::new((-y * y).exp(), 0.0));
        let g = dft1(&f, Axis::X, &mut OpCounter::new());
        for i in 0..8 {
            for j in 0..8 {
                if i != spec.center() {
                    assert!(g.get(i, j).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn chirp_convolution_laws() {
        let spec = GridSpec::new(16, 0.3, 0.4).unwrap();
        let f = random_field(spec, 11);
        let mut counter = OpCounter::new();
        let zero = chirp_convolve(&f, Mat2::ZERO, &mut counter).unwrap();
        assert!(rel_diff(&zero, &f) < 1e-14);
        assert_eq!(counter.complex_muls, 2 * OpCounter::fft2_cost(16) + 256);

        let (b1, b2) = (Mat2::symmetric(0.2, 0.5, -0.3), Mat2::symmetric(-0.7, 0.1, 0.9));
        let g = chirp_convolve(&f, b1, &mut counter).unwrap();
        assert!(((g.energy() - f.energy()) / f.energy()).abs() < 1e-12);
        let two = chirp_convolve(&chirp_convolve(&f, b2, &mut counter).unwrap(), b1, &mut counter).unwrap();
        let one = chirp_convolve(&f, b1 + b2, &mut counter).unwrap();
        assert!(rel_diff(&two, &one) < 1e-12);

        let h = 0.8;
        let x1 = chirp_convolve_1d(&f, Axis::X, h, &mut counter).unwrap();
        let x2 = chirp_convolve(&f, Mat2::diag(h, 0.0), &mut counter).unwrap();
        assert!(rel_diff(&x1, &x2) < 1e-12);
        let y1 = chirp_convolve_1d(&f, Axis::Y, h, &mut counter).unwrap();
        let y2 = chirp_convolve(&f, Mat2::diag(0.0, h), &mut counter).unwrap();
        assert!(rel_diff(&y1, &y2) < 1e-12);
        assert!(((y1.energy() - f.energy()) / f.energy()).abs() < 1e-12);
        assert!(rel_diff(&chirp_convolve_1d(&f, Axis::X, 0.0, &mut counter).unwrap(), &f) < 1e-14);
    }

    #[test]
    fn chirp_convolution_matches_direct_integral() {
        // CC(b) is the LCT with (I, b; 0, I):
        // G(u) = 1/(2π√(−det b)) ∫ exp(j/2 (u−x)ᵀ b⁻¹ (u−x)) g(x) dx.
        let spec = GridSpec::square(16, 0.5).unwrap();
        let f = Field::from_fn(spec, |x, y| Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0));
        let b = Mat2::symmetric(0.25, 0.1, 0.2);
        let bi = b.inv();
        let pre = spec.dx * spec.dy / (2.0 * PI * Complex64::new(-b.det(), 0.0).sqrt());
        let fine = GridSpec::square(128, 0.0625).unwrap();
        let g = Field::from_fn(fine, |x, y| Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0));
        let direct = Field::from_fn(spec, |u, v| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..fine.n {
                for j in 0..fine.n {
                    let (dx, dy) = (u - fine.x(i), v - fine.y(j));
                    let q = bi.m11 * dx * dx + 2.0 * bi.m12 * dx * dy + bi.m22 * dy * dy;
                    s += cis(0.5 * q) * g.get(i, j);
                }
            }
            s * pre / 64.0
        });
        let fast = chirp_convolve(&f, b, &mut OpCounter::new()).unwrap();
        let nmse = rel_diff(&fast, &direct).powi(2);
        assert!(nmse <= 1e-2, "nmse {nmse}");
    }

    #[test]
    fn affine_identity_is_bit_exact() {
        let f = random_field(GridSpec::new(9, 0.3, 0.7).unwrap(), 5);
        let mut counter = OpCounter::new();
        let g = affine_bilinear(&f, Mat2::IDENTITY, f.spec(), &mut counter).unwrap();
        assert_eq!(g, f);
        assert_eq!(counter.complex_muls, 2 * 81);
        assert!(matches!(
            affine_bilinear(&f, Mat2::new(1.0, 2.0, 2.0, 4.0), f.spec(), &mut counter),
            Err(Error::SingularAffine)
        ));
    }

    #[test]
    fn affine_scaling_on_lattice() {
        let spec = GridSpec::square(9, 1.0).unwrap();
        let f = Field::from_fn(spec, |x, y| Complex64::new(x + 10.0 * y, 1.0));
        let g = affine_bilinear(&f, Mat2::diag(2.0, 2.0), spec, &mut OpCounter::new()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let (p, q) = (spec.index(i), spec.index(j));
                let expected = if (2 * p).abs() <= 4 && (2 * q).abs() <= 4 && 2 * p < 5 && 2 * q < 5 {
                    2.0 * Complex64::new(2.0 * p as f64 + 20.0 * q as f64, 1.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((g.get(i, j) - expected).norm() < 1e-12, "({p},{q})");
            }
        }
    }

    #[test]
    fn affine_shear_splits_impulse_weights() {
        // d = (0.5, 0.5; 0, 1): output (p, q) samples (0.5 p, 0.5 p + q), so the
        // odd rows p = ±1 fall between input samples along both axes.
        let spec = GridSpec::square(7, 1.0).unwrap();
        let f = Field::impulse(spec, 3, 3);
        let g = affine_bilinear(&f, Mat2::new(0.5, 0.5, 0.0, 1.0), spec, &mut OpCounter::new()).unwrap();
        let w = 0.5f64.sqrt();
        assert!((g.get(3, 3).re - w).abs() < 1e-15);
        for (i, j) in [(4, 2), (4, 3), (2, 3), (2, 4)] {
            assert!((g.get(i, j).re - 0.25 * w).abs() < 1e-15, "({i}, {j})");
        }
        assert_eq!(g.get(4, 4).re, 0.0);
        assert_eq!(g.get(5, 2).re, 0.0);
        let total: f64 = g.values().iter().map(|v| v.re).sum();
        assert!((total - 2.0 * w).abs() < 1e-12);
    }

    #[test]
    fn affine_negative_determinant_branch() {
        let (pre, flagged) = affine_prefactor(Mat2::diag(1.0, -4.0));
        assert!(flagged);
        assert!((pre - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(!affine_prefactor(Mat2::diag(2.0, 2.0)).1);
    }

    #[test]
    fn dfrft_at_quarter_period_is_dft() {
        let f = random_field(GridSpec::square(10, 0.6).unwrap(), 9);
        let mut counter = OpCounter::new();
        let a = dfrft2(&f, PI / 2.0, PI / 2.0, &mut counter).unwrap();
        assert_eq!(counter.complex_muls, OpCounter::fft2_cost(10) + 200);
        let b = dft2(&f, &mut OpCounter::new());
        assert!(a.spec().matches(&b.spec()));
        assert!(rel_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn dfrft_is_unitary_and_fixes_gaussian() {
        let alpha = PI / 4.0;
        let n = 128;
        // Δu = Δx requires Δx² = 2π sin α / N.
        let dx = (2.0 * PI * alpha.sin() / n as f64).sqrt();
        let spec = GridSpec::square(n, dx).unwrap();
        let f = hermite_gaussian(spec, &[(0, 0)]).unwrap();
        let g = dfrft2(&f, alpha, alpha, &mut OpCounter::new()).unwrap();
        assert!(((g.energy() - f.energy()) / f.energy()).abs() < 1e-12);
        assert!(g.spec().matches(&spec));
        let mag_err: f64 = g.values().iter().zip(f.values()).map(|(a, b)| (a.norm() - b.norm()).powi(2)).sum();
        let den: f64 = f.values().iter().map(|b| b.norm_sqr()).sum();
        assert!(mag_err / den <= 1e-3);

        let r = random_field(spec, 2);
        let rg = dfrft2(&r, 0.9, 2.0, &mut OpCounter::new()).unwrap();
        assert!(((rg.energy() - r.energy()) / r.energy()).abs() < 1e-12);
        assert!(matches!(dfrft2(&r, 0.0, 1.0, &mut OpCounter::new()), Err(Error::FrftSingular { .. })));
    }

    // Direct sum of the separable fractional kernel on the output grid.
    fn naive_dfrft2(f: &Field, alpha: f64, beta: f64, out: &GridSpec) -> Vec<Complex64> {
        let spec = f.spec();
        let (sa, sb) = (alpha.sin(), beta.sin());
        let (ca, cb) = (alpha.cos() / sa, beta.cos() / sb);
        let pre = spec.dx * spec.dy / (2.0 * PI * Complex64::new(-sa * sb, 0.0).sqrt());
        let mut g = vec![Complex64::new(0.0, 0.0); out.n * out.n];
        for p in 0..out.n {
            for q in 0..out.n {
                let (u, v) = (out.x(p), out.y(q));
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..spec.n {
                    for k in 0..spec.n {
                        let (x, y) = (spec.x(m), spec.y(k));
                        let ph = 0.5 * (ca * (x * x + u * u) - 2.0 * x * u / sa)
                            + 0.5 * (cb * (y * y + v * v) - 2.0 * y * v / sb);
                        s += cis(ph) * f.get(m, k);
                    }
                }
                g[p * out.n + q] = s * pre;
            }
        }
        g
    }

    #[test]
    fn dfrft_negative_sines_match_direct_sum() {
        let spec = GridSpec::new(9, 0.7, 0.5).unwrap();
        let f = random_field(spec, 5);
        for (alpha, beta) in [(0.9, -2.0), (-0.6, 1.1), (-2.5, -0.4), (1.2, 0.8)] {
            let g = dfrft2_padded(&f, alpha, beta, 12, &mut OpCounter::new()).unwrap();
            let want = naive_dfrft2(&f, alpha, beta, &g.spec());
            let diff = rel_diff(&g, &Field::new(g.spec(), want).unwrap());
            assert!(diff < 1e-12, "({alpha}, {beta}): {diff}");
        }
    }

    #[test]
    fn dfrft_opposite_angles_invert_up_to_sign() {
        let spec = GridSpec::square(16, 0.4).unwrap();
        let f = random_field(spec, 6);
        let mut c = OpCounter::new();
        let g = dfrft2(&f, 0.8, 2.1, &mut c).unwrap();
        let back = dfrft2(&g, -0.8, -2.1, &mut c).unwrap();
        assert!(back.spec().matches(&spec));
        // The principal root of −det B does not track the metaplectic sign.
        let neg = Field::new(spec, back.values().iter().map(|v| -v).collect()).unwrap();
        assert!(rel_diff(&neg, &f) < 1e-12);
    }

    #[test]
    fn counter_costs() {
        assert_eq!(OpCounter::fft2_cost(256), 256 * 256 * 8);
        assert_eq!(OpCounter::fft1_cost(256), 256 * 256 * 4);
        assert_eq!(OpCounter::fft2_cost(100), (5000.0f64 * 10000f64.log2()).round() as u64);
    }
}
