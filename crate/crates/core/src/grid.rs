//! Sampled complex fields on centered square grids.
//!
//! Sample `(i, j)` of an `N×N` field sits at `(m·dx, n·dy)` with
//! `m = i − ⌊N/2⌋` and `n = j − ⌊N/2⌋`. Values are stored row-major with the
//! first index along x.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported Hermite-Gaussian order per axis.
pub const MAX_HG_ORDER: usize = 60;

const FIELD_MAGIC: &[u8; 4] = b"NSLF";
const FIELD_VERSION: u16 = 1;
const FIELD_HEADER_LEN: usize = 4 + 2 + 4 + 8 + 8;

/// Size and spacings of a square sampling grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(n: usize, dx: f64, dy: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadSize("grid needs at least one sample".into()));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::BadSize(format!("spacings must be positive, got ({dx}, {dy})")));
        }
        Ok(GridSpec { n, dx, dy })
    }

    pub fn square(n: usize, d: f64) -> Result<Self> {
        GridSpec::new(n, d, d)
    }

    /// Grid whose spacing makes it its own Fourier dual: `d² = 2π/N`.
    pub fn self_dual(n: usize) -> Result<Self> {
        GridSpec::square(n, (2.0 * PI / n as f64).sqrt())
    }

    /// Storage index of centered index zero.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Centered index of storage position `i`.
    pub fn index(&self, i: usize) -> i64 {
        i as i64 - self.center() as i64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.index(i) as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.index(j) as f64 * self.dy
    }

    /// Companion frequency grid, `dω = 2π/(N·d)`.
    pub fn frequency(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            dx: 2.0 * PI / (self.n as f64 * self.dx),
            dy: 2.0 * PI / (self.n as f64 * self.dy),
        }
    }

    /// True when `dx² = dy² = 2π/N` up to rounding.
    pub fn is_self_dual(&self) -> bool {
        let f = self.frequency();
        same_spacing(f.dx, self.dx) && same_spacing(f.dy, self.dy)
    }

    pub fn with_n(&self, n: usize) -> GridSpec {
        GridSpec { n, ..*self }
    }

    /// Same size and spacings up to relative rounding.
    pub fn matches(&self, other: &GridSpec) -> bool {
        self.n == other.n && same_spacing(self.dx, other.dx) && same_spacing(self.dy, other.dy)
    }
}

fn same_spacing(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// An `N×N` complex field with its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.n * spec.n {
            return Err(Error::BadSize(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.n,
                spec.n
            )));
        }
        Ok(Field { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Field { spec, values: vec![Complex64::new(0.0, 0.0); spec.n * spec.n] }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = spec.n;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = spec.x(i);
            for j in 0..n {
                values.push(f(x, spec.y(j)));
            }
        }
        Field { spec, values }
    }

    /// A single unit sample at storage position `(i, j)`.
    pub fn impulse(spec: GridSpec, i: usize, j: usize) -> Self {
        let mut f = Field::zeros(spec);
        f.values[i * spec.n + j] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.spec.n + j]
    }

    /// Same samples reinterpreted on another grid of the same size.
    pub fn with_spec(mut self, spec: GridSpec) -> Result<Self> {
        if spec.n != self.spec.n {
            return Err(Error::ShapeMismatch);
        }
        self.spec = spec;
        Ok(self)
    }

    /// `ΣΣ|g|²·dx·dy`.
    pub fn energy(&self) -> f64 {
        energy(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `ΣΣ|g|²·dx·dy`.
pub fn energy(f: &Field) -> f64 {
    f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * f.spec.dx * f.spec.dy
}

/// Normalized Hermite function `ψ_k(x) = (2^k k! √π)^(−1/2) H_k(x) e^(−x²/2)`,
/// evaluated by the three-term recurrence for `k = 0..=max_order`.
pub fn hermite_functions(max_order: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(max_order + 1);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if max_order >= 1 {
        psi.push(std::f64::consts::SQRT_2 * x * psi[0]);
    }
    for k in 1..max_order {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * psi[k] - (kf / (kf + 1.0)).sqrt() * psi[k - 1];
        psi.push(next);
    }
    psi
}

/// Per-order 1D profiles sampled along one axis.
type Profiles = Vec<Vec<f64>>;

fn hg_profiles(
    orders: &[(usize, usize)],
    spec: &GridSpec,
) -> Result<(Profiles, Profiles)> {
    if orders.is_empty() {
        return Err(Error::InvalidParameter("at least one Hermite-Gaussian order is needed".into()));
    }
    let max_order = orders.iter().map(|&(k, l)| k.max(l)).max().unwrap_or(0);
    if max_order > MAX_HG_ORDER {
        return Err(Error::OrderTooLarge(max_order));
    }
    let n = spec.n;
    let table_x: Vec<Vec<f64>> = (0..n).map(|i| hermite_functions(max_order, spec.x(i))).collect();
    let table_y: Vec<Vec<f64>> = (0..n).map(|j| hermite_functions(max_order, spec.y(j))).collect();
    let px = orders.iter().map(|&(k, _)| table_x.iter().map(|t| t[k]).collect()).collect();
    let py = orders.iter().map(|&(_, l)| table_y.iter().map(|t| t[l]).collect()).collect();
    Ok((px, py))
}

/// Sum of separable Hermite-Gaussian modes `HG_k(x)·HG_l(y)` sampled on the grid.
pub fn hermite_gaussian(spec: GridSpec, orders: &[(usize, usize)]) -> Result<Field> {
    let (px, py) = hg_profiles(orders, &spec)?;
    let n = spec.n;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for (fx, fy) in px.iter().zip(&py) {
        for i in 0..n {
            let row = &mut values[i * n..(i + 1) * n];
            for (v, y) in row.iter_mut().zip(fy) {
                v.re += fx[i] * y;
            }
        }
    }
    Field::new(spec, values)
}

/// Smallest centered half-width `w` such that every Hermite-Gaussian sample
/// with `|m| > w` or `|n| > w` is below `rel_threshold` times the peak magnitude.
pub fn hermite_gaussian_support(spec: GridSpec, orders: &[(usize, usize)], rel_threshold: f64) -> Result<usize> {
    let (px, py) = hg_profiles(orders, &spec)?;
    // Bound each sample by Σ max|HG_k|·|HG_l| over the modes.
    let bound = |profiles: &Vec<Vec<f64>>, other: &Vec<Vec<f64>>, i: usize| -> f64 {
        profiles
            .iter()
            .zip(other)
            .map(|(p, o)| p[i].abs() * o.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum()
    };
    let n = spec.n;
    let peak = (0..n).map(|i| bound(&px, &py, i)).fold(0.0, f64::max);
    let cut = rel_threshold * peak;
    let mut w = 0usize;
    for i in 0..n {
        if bound(&px, &py, i) > cut || bound(&py, &px, i) > cut {
            w = w.max(spec.index(i).unsigned_abs() as usize);
        }
    }
    Ok(w)
}

/// Centered embedding into an `(N+delta_n)×(N+delta_n)` grid with the same spacings.
pub fn zero_pad(f: &Field, delta_n: usize) -> Field {
    if delta_n == 0 {
        return f.clone();
    }
    let n = f.n();
    let out_spec = f.spec.with_n(n + delta_n);
    let shift = out_spec.center() - f.spec.center();
    let mut out = Field::zeros(out_spec);
    let m = out_spec.n;
    for i in 0..n {
        let dst = (i + shift) * m + shift;
        out.values[dst..dst + n].copy_from_slice(&f.values[i * n..(i + 1) * n]);
    }
    out
}

/// Central `n_out×n_out` window, the inverse of [`zero_pad`].
pub fn crop_center(f: &Field, n_out: usize) -> Result<Field> {
    let n = f.n();
    if n_out == 0 || n_out > n {
        return Err(Error::BadSize(format!("cannot crop {n}x{n} to {n_out}x{n_out}")));
    }
    let out_spec = f.spec.with_n(n_out);
    let shift = f.spec.center() - out_spec.center();
    let mut values = Vec::with_capacity(n_out * n_out);
    for i in 0..n_out {
        let src = (i + shift) * n + shift;
        values.extend_from_slice(&f.values[src..src + n_out]);
    }
    Field::new(out_spec, values)
}

/// Decodes a binary (P5) PGM with maxval 255 into a real field in `[0, 1]`.
pub fn parse_pgm(bytes: &[u8], dx: f64, dy: f64) -> Result<Field> {
    let malformed = |msg: &str| Error::MalformedFile(msg.to_string());
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Option<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    if next_token(&mut pos).as_deref() != Some("P5") {
        return Err(malformed("not a binary PGM (P5)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        next_token(&mut pos)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MalformedFile(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(malformed("only maxval 255 is supported"));
    }
    if width == 0 || height == 0 {
        return Err(malformed("empty image"));
    }
    if width != height {
        return Err(Error::NonSquare { width, height });
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let raster = bytes.get(pos..pos + width * height).ok_or_else(|| malformed("truncated raster"))?;
    let spec = GridSpec::new(width, dx, dy)?;
    let values = raster.iter().map(|&b| Complex64::new(b as f64 / 255.0, 0.0)).collect();
    Field::new(spec, values)
}

pub fn load_pgm(path: impl AsRef<Path>, dx: f64, dy: f64) -> Result<Field> {
    parse_pgm(&fs::read(path)?, dx, dy)
}

/// Encodes the real part, clamped to `[0, 1]`, as an 8-bit P5 PGM.
pub fn encode_pgm(f: &Field) -> Vec<u8> {
    let n = f.n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(f.values.iter().map(|v| (v.re.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn store_pgm(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    fs::write(path, encode_pgm(f))?;
    Ok(())
}

/// Little-endian binary encoding: magic, version, N, dx, dy, then `(re, im)` pairs.
pub fn encode_field(f: &Field) -> Vec<u8> {
    let mut out = Vec::with_capacity(FIELD_HEADER_LEN + 16 * f.values.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    out.extend_from_slice(&(f.n() as u32).to_le_bytes());
    out.extend_from_slice(&f.spec.dx.to_le_bytes());
    out.extend_from_slice(&f.spec.dy.to_le_bytes());
    for v in &f.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let malformed = |msg: &str| Error::MalformedFile(msg.to_string());
    if bytes.len() < FIELD_HEADER_LEN {
        return Err(malformed("truncated header"));
    }
    if &bytes[0..4] != FIELD_MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FIELD_VERSION {
        return Err(Error::MalformedFile(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (dx, dy) = (f64_at(10), f64_at(18));
    let count = n.checked_mul(n).ok_or_else(|| malformed("size overflow"))?;
    if bytes.len() != FIELD_HEADER_LEN + 16 * count {
        return Err(malformed("payload length does not match N"));
    }
    let spec = GridSpec::new(n, dx, dy).map_err(|e| Error::MalformedFile(e.to_string()))?;
    let values = (0..count)
        .map(|k| {
            let o = FIELD_HEADER_LEN + 16 * k;
            Complex64::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    Field::new(spec, values)
}

pub fn store_field(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_field(f))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    decode_field(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn centered_indices() {
        let even = GridSpec::square(4, 1.0).unwrap();
        assert_eq!((0..4).map(|i| even.index(i)).collect::<Vec<_>>(), vec![-2, -1, 0, 1]);
        let odd = GridSpec::square(5, 1.0).unwrap();
        assert_eq!((0..5).map(|i| odd.index(i)).collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert!(GridSpec::square(0, 1.0).is_err());
        assert!(GridSpec::square(4, 0.0).is_err());
        assert!(GridSpec::self_dual(64).unwrap().is_self_dual());
    }

    #[test]
    fn hg00_at_origin() {
        let spec = GridSpec::square(5, 0.5).unwrap();
        let f = hermite_gaussian(spec, &[(0, 0)]).unwrap();
        assert!((f.get(2, 2).re - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert_eq!(f.get(2, 2).im, 0.0);
    }

    #[test]
    fn hermite_recurrence_matches_polynomials() {
        // H_3(x) = 8x³ − 12x, normalization (2³·3!·√π)^(−1/2).
        let x = 0.7f64;
        let psi = hermite_functions(3, x);
        let norm = (8.0 * 6.0 * PI.sqrt()).powf(-0.5);
        let expected = norm * (8.0 * x.powi(3) - 12.0 * x) * (-0.5 * x * x).exp();
        assert!((psi[3] - expected).abs() < 1e-14);
        // Deep orders stay finite where raw polynomials would not.
        assert!(hermite_functions(60, 9.0).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn order_limit() {
        let spec = GridSpec::square(8, 0.5).unwrap();
        assert!(matches!(hermite_gaussian(spec, &[(61, 0)]), Err(Error::OrderTooLarge(61))));
        assert!(hermite_gaussian(spec, &[]).is_err());
    }

    #[test]
    fn hg_modes_are_normalized_and_orthogonal() {
        let spec = GridSpec::square(256, 0.125).unwrap();
        let orders: Vec<(usize, usize)> = (0..=5).flat_map(|k| (0..=5).map(move |l| (k, l))).collect();
        let fields: Vec<Field> = orders.iter().map(|&o| hermite_gaussian(spec, &[o]).unwrap()).collect();
        for (a, fa) in fields.iter().enumerate() {
            assert!((fa.energy() - 1.0).abs() < 1e-6);
            for fb in &fields[a + 1..] {
                let dot: Complex64 =
                    fa.values().iter().zip(fb.values()).map(|(x, y)| x.conj() * y).sum::<Complex64>()
                        * spec.dx
                        * spec.dy;
                assert!(dot.norm() <= 1e-6);
            }
        }
    }

    #[test]
    fn energy_of_simple_fields() {
        let spec = GridSpec::square(7, 1.0).unwrap();
        assert_eq!(Field::zeros(spec).energy(), 0.0);
        assert_eq!(Field::impulse(spec, 3, 3).energy(), 1.0);
    }

    #[test]
    fn pad_and_crop() {
        let spec = GridSpec::square(5, 0.3).unwrap();
        let f = Field::from_fn(spec, |x, y| c(x + 1.0, y * y));
        assert_eq!(zero_pad(&f, 0), f);
        let p = zero_pad(&f, 4);
        assert_eq!(p.n(), 9);
        assert_eq!(p.energy(), f.energy());
        // Centered index zero stays at the origin.
        assert_eq!(p.get(4, 4), f.get(2, 2));
        assert_eq!(p.get(0, 0), c(0.0, 0.0));
        assert_eq!(crop_center(&p, 5).unwrap(), f);
        assert_eq!(crop_center(&f, 1).unwrap().values(), &[f.get(2, 2)]);
        assert!(crop_center(&f, 6).is_err());
    }

    #[test]
    fn pad_odd_amounts() {
        let spec = GridSpec::square(4, 1.0).unwrap();
        let f = Field::from_fn(spec, c);
        for k in 0..5 {
            let p = zero_pad(&f, k);
            for i in 0..p.n() {
                for j in 0..p.n() {
                    let v = p.get(i, j);
                    if v != c(0.0, 0.0) {
                        assert_eq!(v, c(p.spec().x(i), p.spec().y(j)));
                    }
                }
            }
            assert_eq!(crop_center(&p, 4).unwrap(), f);
        }
    }

    #[test]
    fn pgm_decoding() {
        let mut bytes = b"P5\n# comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 0, 255]);
        let f = parse_pgm(&bytes, 1.0, 1.0).unwrap();
        let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(parse_pgm(&encode_pgm(&f), 1.0, 1.0).unwrap(), f);

        let mut wide = b"P5 3 2 255\n".to_vec();
        wide.extend_from_slice(&[0; 6]);
        assert!(matches!(parse_pgm(&wide, 1.0, 1.0), Err(Error::NonSquare { width: 3, height: 2 })));
        assert!(matches!(parse_pgm(b"P2 2 2 255\n", 1.0, 1.0), Err(Error::MalformedFile(_))));
        assert!(matches!(parse_pgm(b"P5 2 2 255\n\x00", 1.0, 1.0), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn field_binary_round_trip() {
        let spec = GridSpec::new(3, 0.25, 0.5).unwrap();
        let f = Field::from_fn(spec, |x, y| c(1e300 * x, -1e-300 * y - 1e300));
        let bytes = encode_field(&f);
        assert_eq!(&bytes[..4], b"NSLF");
        assert_eq!(bytes.len(), 26 + 9 * 16);
        let g = decode_field(&bytes).unwrap();
        assert_eq!(g, f);
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode_field(&bad).is_err());
    }
}
