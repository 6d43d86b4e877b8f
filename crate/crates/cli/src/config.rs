//! Parsing of matrix, signal, padding and method arguments.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nsdlct::grid::{hermite_gaussian, load_field, load_pgm};
use nsdlct::symplectic::{named_matrix, NamedMatrix};
use nsdlct::{AbcdMatrix, Field, GridSpec, Method};

/// Errors split by exit code: bad configuration (2) or a numerical guard
/// tripping during the run (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<nsdlct::Error> for CliError {
    fn from(e: nsdlct::Error) -> Self {
        use nsdlct::Error as E;
        match e {
            E::Io(_)
            | E::MalformedFile(_)
            | E::NonSquare { .. }
            | E::BadSize(_)
            | E::InvalidParameter(_)
            | E::OrderTooLarge(_)
            | E::TooLarge(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A parsed `--matrix` value and the label used in CSV rows.
#[derive(Clone, Debug)]
pub struct MatrixSource {
    pub label: String,
    pub matrix: AbcdMatrix,
}

/// `paper:ID` loads a shipped matrix (projected unless `raw`); `file:PATH`
/// reads sixteen numbers, row by row, of `(A B; C D)`.
pub fn parse_matrix(arg: &str, raw: bool) -> CliResult<MatrixSource> {
    if let Some(path) = arg.strip_prefix("file:") {
        let text = fs::read_to_string(path).map_err(|e| config(format!("cannot read {path}: {e}")))?;
        let numbers: Vec<f64> = text
            .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| config(format!("bad number {t:?} in {path}"))))
            .collect::<CliResult<_>>()?;
        if numbers.len() != 16 {
            return Err(config(format!("{path} holds {} numbers, expected 16", numbers.len())));
        }
        let mut rows = [[0.0; 4]; 4];
        for (k, v) in numbers.into_iter().enumerate() {
            rows[k / 4][k % 4] = v;
        }
        return Ok(MatrixSource { label: arg.to_string(), matrix: AbcdMatrix::from_rows(rows) });
    }
    let id: NamedMatrix = arg.parse().map_err(|_| config(format!("unknown matrix {arg:?}")))?;
    let entry = named_matrix(id);
    let (label, matrix) = if raw { (format!("{id}:raw"), entry.raw) } else { (id.to_string(), entry.projected) };
    Ok(MatrixSource { label, matrix })
}

/// Where the input field comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SignalSource {
    /// Sum of Hermite-Gaussian modes with the given `(m, n)` orders.
    HermiteGaussian(Vec<(usize, usize)>),
    Pgm(PathBuf),
    Field(PathBuf),
}

/// `hg:1,2+3,1`, `pgm:PATH` or `field:PATH`.
pub fn parse_signal(arg: &str) -> CliResult<SignalSource> {
    if let Some(orders) = arg.strip_prefix("hg:") {
        let parsed = orders
            .split('+')
            .map(|term| {
                let (m, n) = term.split_once(',').ok_or_else(|| config(format!("bad mode {term:?}, expected m,n")))?;
                let order = |s: &str| s.trim().parse::<usize>().map_err(|_| config(format!("bad order {s:?}")));
                Ok((order(m)?, order(n)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok(SignalSource::HermiteGaussian(parsed));
    }
    let existing = |p: &str| {
        let path = PathBuf::from(p);
        if path.is_file() {
            Ok(path)
        } else {
            Err(config(format!("no such file {p}")))
        }
    };
    if let Some(p) = arg.strip_prefix("pgm:") {
        return Ok(SignalSource::Pgm(existing(p)?));
    }
    if let Some(p) = arg.strip_prefix("field:") {
        return Ok(SignalSource::Field(existing(p)?));
    }
    Err(config(format!("unknown signal {arg:?}, expected hg:, pgm: or field:")))
}

impl SignalSource {
    /// Loads or synthesizes the input. `n` and `dx` are required for
    /// Hermite-Gaussian signals and set the spacing of PGM images.
    pub fn load(&self, n: Option<usize>, dx: Option<f64>) -> CliResult<Field> {
        match self {
            SignalSource::HermiteGaussian(orders) => {
                let n = n.ok_or_else(|| config("--n is required for hg: signals"))?;
                let dx = dx.ok_or_else(|| config("--dx is required for hg: signals"))?;
                Ok(hermite_gaussian(GridSpec::square(n, dx)?, orders)?)
            }
            SignalSource::Pgm(path) => {
                let d = dx.unwrap_or(1.0);
                Ok(load_pgm(path, d, d)?)
            }
            SignalSource::Field(path) => Ok(load_field(path)?),
        }
    }

    pub fn orders(&self) -> Option<&[(usize, usize)]> {
        match self {
            SignalSource::HermiteGaussian(o) => Some(o),
            _ => None,
        }
    }
}

/// `a..b` or `a..b:step`, inclusive; a single number is a one-point range.
pub fn parse_pad(arg: &str) -> CliResult<Vec<usize>> {
    let bad = || config(format!("bad padding range {arg:?}, expected a..b or a..b:step"));
    let (range, step) = match arg.split_once(':') {
        Some((r, s)) => (r, s.parse::<usize>().map_err(|_| bad())?),
        None => (arg, 1),
    };
    if step == 0 {
        return Err(bad());
    }
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => (a.parse::<usize>().map_err(|_| bad())?, b.parse::<usize>().map_err(|_| bad())?),
        None => {
            let v = range.parse::<usize>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step).collect())
}

/// Comma-separated method names, or `all`.
pub fn parse_methods(arg: &str) -> CliResult<Vec<Method>> {
    if arg.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in arg.split(',') {
        let m: Method = name.parse().map_err(|_| config(format!("unknown method {name:?}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(config("no methods given"));
    }
    Ok(out)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| config(format!("cannot create {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_ranges() {
        assert_eq!(parse_pad("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_pad("0..50:25").unwrap(), vec![0, 25, 50]);
        assert_eq!(parse_pad("7").unwrap(), vec![7]);
        for bad in ["3..1", "a..b", "0..4:0", "-1..2"] {
            assert!(parse_pad(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn signals() {
        assert_eq!(parse_signal("hg:1,2+3,1").unwrap(), SignalSource::HermiteGaussian(vec![(1, 2), (3, 1)]));
        assert!(parse_signal("hg:1").is_err());
        assert!(parse_signal("pgm:/definitely/missing.pgm").is_err());
        assert!(parse_signal("noise:3").is_err());
    }

    #[test]
    fn methods_and_matrices() {
        assert_eq!(parse_methods("all").unwrap(), Method::ALL.to_vec());
        assert_eq!(parse_methods("lc,ha,lc").unwrap(), vec![Method::Lc, Method::Ha]);
        assert!(parse_methods("ha,fast").is_err());
        let m = parse_matrix("paper:A1", false).unwrap();
        assert_eq!(m.label, "paper:A1");
        assert!(m.matrix.validate().valid);
        assert_eq!(parse_matrix("paper:A1", true).unwrap().label, "paper:A1:raw");
        assert!(parse_matrix("paper:A9", false).is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(nsdlct::Error::BSingular(0.0)).exit_code(), 3);
        assert_eq!(CliError::from(nsdlct::Error::BadSize("x".into())).exit_code(), 2);
    }
}
