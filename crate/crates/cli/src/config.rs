//! Sweep configuration files: flat `key = value` lines, `#` comments,
//! comma-separated lists.

use std::fmt;
use std::path::PathBuf;

use nucleation::exit::FieldFamily;

use crate::table::format_float;
use crate::CliError;

/// Default bound on the number of sweep cells.
pub const DEFAULT_MAX_CELLS: usize = 1_000_000;

const KEYS: [&str; 10] = [
    "eps", "alpha", "lambda", "beta", "h_ex", "trials", "grid", "outputs", "seed", "jobs",
];

/// Applied field: a number, or a family evaluated at each `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSpec {
    Value(f64),
    Family(FieldFamily),
}

impl FieldSpec {
    pub fn at(&self, eps: f64) -> f64 {
        match self {
            FieldSpec::Value(h) => *h,
            FieldSpec::Family(f) => f.h_ex(eps),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Value(h) => f.write_str(&format_float(*h)),
            FieldSpec::Family(FieldFamily::LogLinear { c }) => write!(f, "log:{}", format_float(*c)),
            FieldSpec::Family(FieldFamily::ExpSqrtLog { c }) => write!(f, "expsqrt:{}", format_float(*c)),
            FieldSpec::Family(FieldFamily::PowerLaw { c, s }) => {
                write!(f, "power:{}:{}", format_float(*c), format_float(*s))
            }
        }
    }
}

/// Parses `C`, `log:C`, `expsqrt:C` or `power:C:S`.
pub fn parse_field(s: &str) -> Result<FieldSpec, String> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number '{t}' in field '{s}'"))
    };
    match parts.as_slice() {
        [v] => Ok(FieldSpec::Value(num(v)?)),
        ["log", c] => Ok(FieldSpec::Family(FieldFamily::LogLinear { c: num(c)? })),
        ["expsqrt", c] => Ok(FieldSpec::Family(FieldFamily::ExpSqrtLog { c: num(c)? })),
        ["power", c, e] => Ok(FieldSpec::Family(FieldFamily::PowerLaw { c: num(c)?, s: num(e)? })),
        _ => Err(format!(
            "invalid field '{s}': expected C, log:C, expsqrt:C or power:C:S"
        )),
    }
}

/// Noise strength: a number, or `kappa:K` for `β = K / ln h_ex`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Value(f64),
    Kappa(f64),
}

impl BetaSpec {
    pub fn at(&self, h_ex: f64) -> f64 {
        match self {
            BetaSpec::Value(b) => *b,
            BetaSpec::Kappa(k) => k / h_ex.ln(),
        }
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Value(b) => f.write_str(&format_float(*b)),
            BetaSpec::Kappa(k) => write!(f, "kappa:{}", format_float(*k)),
        }
    }
}

pub fn parse_beta(s: &str) -> Result<BetaSpec, String> {
    let t = s.trim();
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("invalid beta '{s}'"));
    match t.strip_prefix("kappa:") {
        Some(k) => Ok(BetaSpec::Kappa(num(k)?)),
        None => Ok(BetaSpec::Value(num(t)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Empty when the sweep computes no exit statistics.
    pub beta: Vec<BetaSpec>,
    pub h_ex: Vec<FieldSpec>,
    pub trials: Vec<u64>,
    pub grid: Vec<usize>,
    pub outputs: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

/// Parameters of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub eps: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub h_ex: FieldSpec,
    pub beta: Option<BetaSpec>,
    pub trials: u64,
    pub grid: usize,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<SweepConfig, CliError> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(lineno + 1, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config_error(lineno + 1, format!("unknown key '{key}'")));
            }
            if entries.iter().any(|(k, _, _)| k == key) {
                return Err(config_error(lineno + 1, format!("duplicate key '{key}'")));
            }
            entries.push((key.to_string(), value.trim().to_string(), lineno + 1));
        }
        let lookup = |key: &str| entries.iter().find(|(k, _, _)| k == key);
        fn list<T>(
            entry: Option<&(String, String, usize)>,
            parse: impl Fn(&str) -> Result<T, String>,
        ) -> Result<Option<Vec<T>>, CliError> {
            let Some((key, value, line)) = entry else {
                return Ok(None);
            };
            let items: Vec<&str> = value.split(',').map(str::trim).collect();
            if items.iter().all(|s| s.is_empty()) {
                return Err(config_error(*line, format!("axis '{key}' is empty")));
            }
            items
                .into_iter()
                .map(|s| parse(s).map_err(|m| config_error(*line, format!("{key}: {m}"))))
                .collect::<Result<Vec<T>, CliError>>()
                .map(Some)
        }
        fn scalar<T: std::str::FromStr>(entry: Option<&(String, String, usize)>) -> Result<Option<T>, CliError> {
            match entry {
                None => Ok(None),
                Some((key, value, line)) => value
                    .parse()
                    .map(Some)
                    .map_err(|_| config_error(*line, format!("{key}: invalid value '{value}'"))),
            }
        }
        let float = |s: &str| s.parse::<f64>().map_err(|_| format!("invalid number '{s}'"));
        let unsigned = |s: &str| s.parse::<u64>().map_err(|_| format!("invalid count '{s}'"));
        let size = |s: &str| s.parse::<usize>().map_err(|_| format!("invalid grid size '{s}'"));

        let eps = list(lookup("eps"), float)?.ok_or_else(|| missing("eps"))?;
        let alpha = list(lookup("alpha"), float)?.ok_or_else(|| missing("alpha"))?;
        let outputs = lookup("outputs").ok_or_else(|| missing("outputs"))?;
        if outputs.1.is_empty() {
            return Err(config_error(outputs.2, "outputs: empty path".into()));
        }
        Ok(SweepConfig {
            eps,
            alpha,
            lambda: list(lookup("lambda"), float)?.unwrap_or_else(|| vec![1.0]),
            beta: list(lookup("beta"), parse_beta)?.unwrap_or_default(),
            h_ex: list(lookup("h_ex"), parse_field)?
                .unwrap_or_else(|| vec![FieldSpec::Family(FieldFamily::LogLinear { c: 1.0 })]),
            trials: list(lookup("trials"), unsigned)?.unwrap_or_else(|| vec![0]),
            grid: list(lookup("grid"), size)?.unwrap_or_else(|| vec![0]),
            outputs: PathBuf::from(&outputs.1),
            seed: scalar(lookup("seed"))?.unwrap_or(0),
            jobs: scalar(lookup("jobs"))?.unwrap_or(1),
        })
    }

    /// Number of cells, or `None` on overflow.
    pub fn cell_count(&self) -> Option<usize> {
        [
            self.eps.len(),
            self.alpha.len(),
            self.lambda.len(),
            self.beta.len().max(1),
            self.h_ex.len(),
            self.trials.len(),
            self.grid.len(),
        ]
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
    }

    pub fn check_size(&self, max_cells: usize) -> Result<usize, CliError> {
        match self.cell_count() {
            Some(n) if n <= max_cells => Ok(n),
            _ => Err(CliError::Usage(format!(
                "sweep has more than {max_cells} cells; raise --max-cells or shrink the axes"
            ))),
        }
    }

    /// Cell `index` in row-major order, `eps` slowest and `grid` fastest.
    pub fn cell(&self, index: usize) -> CellParams {
        let mut rest = index;
        let mut pick = |len: usize| {
            let len = len.max(1);
            let i = rest % len;
            rest /= len;
            i
        };
        let g = pick(self.grid.len());
        let t = pick(self.trials.len());
        let h = pick(self.h_ex.len());
        let b = pick(self.beta.len());
        let l = pick(self.lambda.len());
        let a = pick(self.alpha.len());
        let e = pick(self.eps.len());
        CellParams {
            eps: self.eps[e],
            alpha: self.alpha[a],
            lambda: self.lambda[l],
            h_ex: self.h_ex[h],
            beta: self.beta.get(b).copied(),
            trials: self.trials[t],
            grid: self.grid[g],
        }
    }

    /// Canonical text form; parses back to the same configuration.
    pub fn render(&self) -> String {
        fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
            xs.iter().map(f).collect::<Vec<_>>().join(", ")
        }
        let mut out = String::new();
        out += &format!("eps = {}\n", join(&self.eps, |x| format_float(*x)));
        out += &format!("alpha = {}\n", join(&self.alpha, |x| format_float(*x)));
        out += &format!("lambda = {}\n", join(&self.lambda, |x| format_float(*x)));
        if !self.beta.is_empty() {
            out += &format!("beta = {}\n", join(&self.beta, |b| b.to_string()));
        }
        out += &format!("h_ex = {}\n", join(&self.h_ex, |h| h.to_string()));
        out += &format!("trials = {}\n", join(&self.trials, |t| t.to_string()));
        out += &format!("grid = {}\n", join(&self.grid, |g| g.to_string()));
        out += &format!("outputs = {}\n", self.outputs.display());
        out += &format!("seed = {}\n", self.seed);
        out += &format!("jobs = {}\n", self.jobs);
        out
    }
}

fn config_error(line: usize, message: String) -> CliError {
    CliError::Usage(format!("config line {line}: {message}"))
}

fn missing(key: &str) -> CliError {
    CliError::Usage(format!("config: missing required key '{key}'"))
}
