//! The seven experiment runners. Sweep points run in parallel; rows are
//! emitted in padding order, then method order, so output is deterministic.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use nsdlct::grid::{crop_center, store_field, store_pgm, zero_pad};
use nsdlct::kernels::OpCounter;
use nsdlct::metrics::{nmse, psnr};
use nsdlct::optics::{eigenpairs, grin_ft_system, letter_mask, materialize, unitarity_defect, GrinParams};
use nsdlct::transforms::{additivity_error, direct_nslct, hg_reference, nsdlct, round_trip};
use nsdlct::{Field, GridSpec, Method, PlanForm, TransformOptions};

use crate::config::{
    ensure_dir, parse_matrix, parse_methods, parse_pad, parse_signal, CliError, CliResult, MatrixSource, SignalSource,
};
use crate::output::{slug, write_csv, Row};
use crate::{Common, Grin, Operator};

const DEFAULT_SIGNAL: &str = "hg:1,2+3,1";
const DEFAULT_N: usize = 100;
const DEFAULT_DX: f64 = 0.25;

/// Everything a sweep needs, resolved from the command line.
struct Setup {
    experiment: &'static str,
    matrix: MatrixSource,
    source: SignalSource,
    input: Field,
    pads: Vec<usize>,
    methods: Vec<Method>,
    options: TransformOptions,
    out: PathBuf,
}

impl Setup {
    fn new(experiment: &'static str, c: &Common, default_matrix: &str, default_form: PlanForm) -> CliResult<Self> {
        let matrix = parse_matrix(c.matrix.as_deref().unwrap_or(default_matrix), c.raw)?;
        let (source, n, dx) = match &c.signal {
            Some(s) => (parse_signal(s)?, c.n, c.dx),
            None => (
                parse_signal(DEFAULT_SIGNAL)?,
                Some(c.n.unwrap_or(DEFAULT_N)),
                Some(c.dx.unwrap_or(DEFAULT_DX)),
            ),
        };
        let input = source.load(n, dx)?;
        let form = match &c.form {
            Some(f) => f.parse().map_err(|_| CliError::Config(format!("unknown form {f:?}")))?,
            None => default_form,
        };
        let options = TransformOptions { pad: 0, upsample: c.upsample, form };
        if c.upsample == 0 {
            return Err(CliError::Config("--upsample must be at least 1".into()));
        }
        ensure_dir(&c.run.out)?;
        Ok(Setup {
            experiment,
            matrix,
            source,
            input,
            pads: parse_pad(&c.pad)?,
            methods: parse_methods(&c.methods)?,
            options,
            out: c.run.out.clone(),
        })
    }

    fn row(&self, method: &str, pad: usize, metric: &str, value: f64) -> Row {
        Row {
            experiment: self.experiment,
            matrix: self.matrix.label.clone(),
            method: method.to_string(),
            n: self.input.n(),
            pad,
            metric: metric.to_string(),
            value,
        }
    }

    fn at(&self, pad: usize) -> TransformOptions {
        TransformOptions { pad, ..self.options }
    }

    fn artifact(&self, tag: &str, pad: usize, ext: &str) -> PathBuf {
        self.out
            .join(format!("{}_{}_{tag}_pad{pad}.{ext}", self.experiment, slug(&self.matrix.label)))
    }

    /// Runs `point` for every padding in parallel and flattens the rows in order.
    fn sweep<F>(&self, point: F) -> CliResult<Vec<Row>>
    where
        F: Fn(usize) -> CliResult<Vec<Row>> + Sync,
    {
        let per_pad: Vec<Vec<Row>> = self.pads.par_iter().map(|&p| point(p)).collect::<CliResult<_>>()?;
        Ok(per_pad.into_iter().flatten().collect())
    }

    fn last_pad(&self) -> usize {
        *self.pads.last().expect("padding range is never empty")
    }

    fn finish(&self, rows: &[Row]) -> CliResult<PathBuf> {
        write_csv(&self.out, self.experiment, rows)
    }
}

fn check_finite(what: &str, value: f64) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Numerical(format!("{what} is not finite")))
    }
}

pub fn accuracy(c: &Common) -> CliResult<PathBuf> {
    let s = Setup::new("accuracy-sweep", c, "paper:A1", PlanForm::Reversible)?;
    let m = s.matrix.matrix;
    let reference = |pad: usize| -> CliResult<Field> {
        let out_spec = s.input.spec().with_n(s.input.n() + pad);
        Ok(match s.source.orders() {
            Some(orders) => hg_reference(orders, &m, s.input.spec(), out_spec)?,
            None => direct_nslct(&zero_pad(&s.input, pad), &m, out_spec)?,
        })
    };
    let rows = s.sweep(|pad| {
        let truth = reference(pad)?;
        if pad == s.last_pad() {
            store_field(s.artifact("reference", pad, "field"), &truth)?;
        }
        let mut rows = Vec::new();
        for &method in &s.methods {
            let out = nsdlct(&s.input, &m, method, s.at(pad))?.output;
            let e = check_finite("nmse_acc", nmse(&out, &truth)?)?;
            rows.push(s.row(method.name(), pad, "nmse_acc", e));
            if pad == s.last_pad() {
                store_field(s.artifact(method.name(), pad, "field"), &out)?;
            }
        }
        Ok(rows)
    })?;
    s.finish(&rows)
}

pub fn additivity(c: &Common) -> CliResult<PathBuf> {
    let mut s = Setup::new("additivity-sweep", c, "paper:A1", PlanForm::CmFirst)?;
    let second = parse_matrix(c.matrix2.as_deref().unwrap_or("paper:A3"), c.raw)?;
    s.matrix.label = format!("{}->{}", s.matrix.label, second.label);
    let (m1, m3) = (s.matrix.matrix, second.matrix);
    let rows = s.sweep(|pad| {
        s.methods
            .iter()
            .map(|&method| {
                let e = check_finite("nmse_add", additivity_error(&s.input, &m1, &m3, method, s.at(pad))?)?;
                Ok(s.row(method.name(), pad, "nmse_add", e))
            })
            .collect()
    })?;
    s.finish(&rows)
}

pub fn reversibility(c: &Common) -> CliResult<PathBuf> {
    let s = Setup::new("reversibility-sweep", c, "paper:A1", PlanForm::Reversible)?;
    let rows = s.sweep(|pad| {
        let target = zero_pad(&s.input, pad);
        let mut rows = Vec::new();
        for &method in &s.methods {
            let back = round_trip(&s.input, &s.matrix.matrix, method, s.at(pad))?;
            let e = check_finite("nmse_rev", nmse(&back, &target)?)?;
            rows.push(s.row(method.name(), pad, "nmse_rev", e));
            if pad == s.last_pad() {
                store_field(s.artifact(method.name(), pad, "field"), &back)?;
            }
        }
        Ok(rows)
    })?;
    s.finish(&rows)
}

pub fn image_roundtrip(c: &Common) -> CliResult<PathBuf> {
    if c.signal.is_none() {
        return Err(CliError::Config("image-roundtrip needs --signal pgm:PATH or field:PATH".into()));
    }
    let s = Setup::new("image-roundtrip", c, "paper:A2", PlanForm::Reversible)?;
    // Images decode to [0, 1]; other inputs use their own peak.
    let peak = match s.source {
        SignalSource::Pgm(_) => 1.0,
        _ => s.input.max_abs(),
    };
    let n = s.input.n();
    let rows = s.sweep(|pad| {
        let target = zero_pad(&s.input, pad);
        let mut rows = Vec::new();
        for &method in &s.methods {
            let back = round_trip(&s.input, &s.matrix.matrix, method, s.at(pad))?;
            let e = check_finite("nmse_rev", nmse(&back, &target)?)?;
            let image = crop_center(&back, n)?;
            let p = psnr(&image, &s.input, peak)?;
            rows.push(s.row(method.name(), pad, "psnr_db", p));
            rows.push(s.row(method.name(), pad, "nmse_rev", e));
            if pad == s.last_pad() {
                store_pgm(s.artifact(method.name(), pad, "pgm"), &image)?;
                store_field(s.artifact(method.name(), pad, "field"), &back)?;
            }
        }
        Ok(rows)
    })?;
    s.finish(&rows)
}

/// `(FFT count, pointwise multiplications per sample)` of each method.
fn cost_model(method: Method) -> (u64, u64) {
    match method {
        Method::Ha => (4, 4),
        Method::Lc => (3, 4),
        Method::Koc => (4, 14),
        Method::Ding => (4, 8),
    }
}

pub fn complexity(c: &Common) -> CliResult<PathBuf> {
    if c.signal.is_some() {
        return Err(CliError::Config("complexity-table runs on a zero field; drop --signal".into()));
    }
    let n = c.n.unwrap_or(256);
    let dx = c.dx.unwrap_or(DEFAULT_DX);
    let zeros = Field::zeros(GridSpec::square(n, dx)?);
    let mut bound = c.clone();
    bound.n = Some(n);
    bound.dx = Some(dx);
    let mut s = Setup::new("complexity-table", &bound, "paper:A1", PlanForm::Reversible)?;
    s.input = zeros;
    let rows = s.sweep(|pad| {
        let size = n + pad;
        let mut rows = Vec::new();
        for &method in &s.methods {
            let report = nsdlct(&s.input, &s.matrix.matrix, method, s.at(pad))?;
            let (ffts, pointwise) = cost_model(method);
            let closed = ffts * OpCounter::fft2_cost(size) + pointwise * (size * size) as u64;
            rows.push(s.row(method.name(), pad, "complex_muls", report.complex_muls as f64));
            rows.push(s.row(method.name(), pad, "closed_form", closed as f64));
        }
        Ok(rows)
    })?;
    s.finish(&rows)
}

pub fn optics_grin(g: &Grin) -> CliResult<PathBuf> {
    const EXPERIMENT: &str = "optics-grin";
    let params = GrinParams {
        n0: g.n0,
        n1: g.n1,
        n2: g.n2,
        p: g.p,
        q: g.q,
        length_mm: g.length_mm,
        wavelength_mm: g.wavelength_mm,
    };
    let m = grin_ft_system(&params)?;
    let methods = parse_methods(&g.methods)?;
    let input = match &g.signal {
        Some(sig) => parse_signal(sig)?.load(Some(g.n), g.dx)?,
        None => {
            let spec = match g.dx {
                Some(d) => GridSpec::square(g.n, d)?,
                None => GridSpec::self_dual(g.n)?,
            };
            letter_mask(spec)
        }
    };
    ensure_dir(&g.run.out)?;
    let label = "paper:GRIN-FT";
    let n = input.n();
    let row = |method: &str, metric: &str, value: f64| Row {
        experiment: EXPERIMENT,
        matrix: label.to_string(),
        method: method.to_string(),
        n,
        pad: 0,
        metric: metric.to_string(),
        value,
    };
    let mut rows = vec![row("none", "symplectic_residual", m.validate().residual)];
    let phase = params.global_phase();
    let e_in = input.energy();
    let outputs: Vec<(Method, Field, u64)> = methods
        .par_iter()
        .map(|&method| {
            let report = nsdlct(&input, &m, method, TransformOptions::default())?;
            let mut out = report.output;
            out.values_mut().iter_mut().for_each(|v| *v *= phase);
            Ok((method, out, report.complex_muls))
        })
        .collect::<CliResult<_>>()?;
    for (method, out, muls) in &outputs {
        let change = check_finite("energy", (out.energy() - e_in).abs() / e_in)?;
        rows.push(row(method.name(), "energy_rel_change", change));
        rows.push(row(method.name(), "complex_muls", *muls as f64));
        let stem = g.run.out.join(format!("{EXPERIMENT}_{}", method.name()));
        store_field(stem.with_extension("field"), out)?;
        store_pgm(stem.with_extension("pgm"), &intensity(out))?;
    }
    store_pgm(g.run.out.join(format!("{EXPERIMENT}_input.pgm")), &intensity(&input))?;
    write_csv(&g.run.out, EXPERIMENT, &rows)
}

/// `|g|²` scaled to a unit peak.
fn intensity(f: &Field) -> Field {
    let peak = f.max_abs().powi(2);
    let mut out = f.clone();
    for v in out.values_mut() {
        let i = v.norm_sqr();
        *v = if peak > 0.0 { (i / peak).into() } else { 0.0.into() };
    }
    out
}

pub fn operator_unitarity(o: &Operator) -> CliResult<PathBuf> {
    const EXPERIMENT: &str = "operator-unitarity";
    let matrix = parse_matrix(&o.matrix, o.raw)?;
    let methods = parse_methods(&o.methods)?;
    let spec = GridSpec::square(o.n, o.dx)?;
    ensure_dir(&o.run.out)?;
    let row = |method: &str, metric: String, value: f64| Row {
        experiment: EXPERIMENT,
        matrix: matrix.label.clone(),
        method: method.to_string(),
        n: o.n,
        pad: 0,
        metric,
        value,
    };
    let mut rows = Vec::new();
    for &method in &methods {
        let op = materialize(&matrix.matrix, spec, method)?;
        let defect = check_finite("unitarity defect", unitarity_defect(&op))?;
        rows.push(row(method.name(), "unitarity_defect".into(), defect));
        // Only the chirp-only methods are unitary to rounding, so only they
        // get an eigendecomposition.
        if !method.is_chirp_only() || o.eigen == 0 {
            continue;
        }
        for (k, pair) in eigenpairs(&op, o.eigen)?.iter().enumerate() {
            let v = Field::new(spec, pair.vector.clone())?;
            let lv = op.apply(&v)?;
            let residual = lv
                .values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| (a - pair.value * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            rows.push(row(method.name(), format!("eigen_arg_{k}"), pair.value.arg()));
            rows.push(row(method.name(), format!("eigen_abs_{k}"), pair.value.norm()));
            rows.push(row(method.name(), format!("eigen_residual_{k}"), residual));
            store_field(eigen_path(&o.run.out, &matrix.label, method, k), &v)?;
        }
    }
    write_csv(&o.run.out, EXPERIMENT, &rows)
}

fn eigen_path(dir: &Path, label: &str, method: Method, k: usize) -> PathBuf {
    dir.join(format!("operator-unitarity_{}_{}_eig{k}.field", slug(label), method.name()))
}
