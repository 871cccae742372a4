//! Library surface behind the `spa` binary: CSV input, the synthetic
//! location-model generators, the convergence experiment runner, and the
//! fixed JSON/CSV output schemas.
//!
//! All randomness derives from SplitMix64 streams keyed by
//! `(seed, family, n, replicate)`, so every output is a pure function of
//! its inputs regardless of thread count.

use std::fmt::Write as _;

use spa_core::oracle::{compare, exact_enumeration, mc_pvalue, ComparisonRow, OracleValue};
use spa_core::rng::SplitMix64;
use spa_core::saddle::SaddleConfig;
use spa_core::signflip::{spa_pvalue, SignFlipReport};
use spa_core::{Sample, SpaError};

#[derive(Debug, Clone, PartialEq)]
pub enum ErrorFamily {
    Gaussian,
    /// Standard Laplace (scale 1, variance 2).
    Laplace,
    /// Student-t with integer df >= 5 (the smallest df with finite 4+delta
    /// moments for delta < 1). Variance df/(df-2).
    StudentT(u32),
    /// +-scale with equal probability.
    ScaledRademacher(f64),
}

impl ErrorFamily {
    pub fn variance(&self) -> f64 {
        match self {
            ErrorFamily::Gaussian => 1.0,
            ErrorFamily::Laplace => 2.0,
            ErrorFamily::StudentT(df) => *df as f64 / (*df as f64 - 2.0),
            ErrorFamily::ScaledRademacher(s) => s * s,
        }
    }

    fn tag(&self) -> u64 {
        match self {
            ErrorFamily::Gaussian => 1,
            ErrorFamily::Laplace => 2,
            ErrorFamily::StudentT(_) => 3,
            ErrorFamily::ScaledRademacher(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// mu = 0
    Null,
    /// mu_n = h / sqrt(n)
    Clt { h: f64 },
    /// mu_n = c * n^(-alpha), alpha in (0, 1/2)
    Moderate { c: f64, alpha: f64 },
}

impl Regime {
    pub fn mu(&self, n: usize) -> f64 {
        match self {
            Regime::Null => 0.0,
            Regime::Clt { h } => h / (n as f64).sqrt(),
            Regime::Moderate { c, alpha } => c * (n as f64).powf(-alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Exact,
    Mc { b: u64 },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub error_family: ErrorFamily,
    pub regime: Regime,
    pub seed: u64,
    pub oracle: Oracle,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Spa(SpaError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Spa(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SpaError> for CliError {
    fn from(e: SpaError) -> Self {
        CliError::Spa(e)
    }
}

impl ExperimentConfig {
    /// Parses the flat `key=value` config format. Unknown keys are rejected;
    /// `h`, `c`, `alpha`, `b` are read only when the regime/oracle needs them.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut n_grid = None;
        let mut replicates = None;
        let mut family = None;
        let mut regime = None;
        let mut h = None;
        let mut c = None;
        let mut alpha = None;
        let mut seed = None;
        let mut oracle = None;
        let mut b = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |m: String| CliError::Config(format!("line {}: {m}", lineno + 1));
            match key {
                "n_grid" => {
                    let grid: Result<Vec<usize>, _> =
                        value.split(',').map(|t| t.trim().parse::<usize>()).collect();
                    n_grid = Some(grid.map_err(|e| bad(format!("n_grid: {e}")))?);
                }
                "replicates" => {
                    replicates =
                        Some(value.parse::<usize>().map_err(|e| bad(format!("replicates: {e}")))?)
                }
                "error_family" => family = Some(parse_family(value).map_err(bad)?),
                "regime" => regime = Some(value.to_string()),
                "h" => h = Some(value.parse::<f64>().map_err(|e| bad(format!("h: {e}")))?),
                "c" => c = Some(value.parse::<f64>().map_err(|e| bad(format!("c: {e}")))?),
                "alpha" => {
                    alpha = Some(value.parse::<f64>().map_err(|e| bad(format!("alpha: {e}")))?)
                }
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
                "oracle" => oracle = Some(value.to_string()),
                "b" => b = Some(value.parse::<u64>().map_err(|e| bad(format!("b: {e}")))?),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        let n_grid = n_grid.ok_or_else(|| CliError::Config("missing n_grid".into()))?;
        if n_grid.is_empty() || n_grid.iter().any(|&n| n == 0) {
            return Err(CliError::Config("n_grid entries must be >= 1".into()));
        }
        let replicates = replicates.ok_or_else(|| CliError::Config("missing replicates".into()))?;
        if replicates == 0 {
            return Err(CliError::Config("replicates must be >= 1".into()));
        }
        let error_family =
            family.ok_or_else(|| CliError::Config("missing error_family".into()))?;
        let regime = match regime.as_deref() {
            Some("null") | None => Regime::Null,
            Some("clt") => Regime::Clt {
                h: h.ok_or_else(|| CliError::Config("clt regime needs h".into()))?,
            },
            Some("moderate") => {
                let alpha =
                    alpha.ok_or_else(|| CliError::Config("moderate regime needs alpha".into()))?;
                if !(alpha > 0.0 && alpha < 0.5) {
                    return Err(CliError::Config("alpha must lie in (0, 0.5)".into()));
                }
                Regime::Moderate {
                    c: c.ok_or_else(|| CliError::Config("moderate regime needs c".into()))?,
                    alpha,
                }
            }
            Some(other) => return Err(CliError::Config(format!("unknown regime '{other}'"))),
        };
        let oracle = match oracle.as_deref() {
            Some("exact") | None => Oracle::Exact,
            Some("mc") => Oracle::Mc {
                b: b.ok_or_else(|| CliError::Config("mc oracle needs b".into()))?,
            },
            Some(other) => return Err(CliError::Config(format!("unknown oracle '{other}'"))),
        };
        if let Oracle::Exact = oracle {
            if let Some(&n) = n_grid.iter().find(|&&n| n > spa_core::oracle::MAX_EXACT_N) {
                return Err(CliError::Config(format!(
                    "exact oracle caps n at {}, got {n}",
                    spa_core::oracle::MAX_EXACT_N
                )));
            }
        }
        Ok(ExperimentConfig {
            n_grid,
            replicates,
            error_family,
            regime,
            seed: seed.unwrap_or(0),
            oracle,
        })
    }
}

fn parse_family(value: &str) -> Result<ErrorFamily, String> {
    match value {
        "gaussian" => Ok(ErrorFamily::Gaussian),
        "laplace" => Ok(ErrorFamily::Laplace),
        "scaled_rademacher" => Ok(ErrorFamily::ScaledRademacher(1.0)),
        other => {
            if let Some(inner) = other.strip_prefix("student_t(").and_then(|s| s.strip_suffix(')')) {
                let df: u32 = inner.trim().parse().map_err(|e| format!("df: {e}"))?;
                if df < 5 {
                    return Err("student_t df must be >= 5 (finite 4+delta moments)".into());
                }
                Ok(ErrorFamily::StudentT(df))
            } else {
                Err(format!("unknown error_family '{other}'"))
            }
        }
    }
}

fn draw(family: &ErrorFamily, rng: &mut SplitMix64) -> f64 {
    match family {
        ErrorFamily::Gaussian => rng.next_normal(),
        ErrorFamily::Laplace => {
            // symmetric by construction: magnitude Exp(1), independent sign
            let mag = -rng.next_f64_open().ln();
            rng.next_sign() * mag
        }
        ErrorFamily::StudentT(df) => {
            let z = rng.next_normal();
            let chi2: f64 = (0..*df).map(|_| rng.next_normal().powi(2)).sum();
            z / (chi2 / *df as f64).sqrt()
        }
        ErrorFamily::ScaledRademacher(scale) => rng.next_sign() * scale,
    }
}

/// `n` draws of `mu_n + eps`, deterministically derived from
/// `(seed, family, n, replicate_index)`.
pub fn generate_location_model(
    cfg: &ExperimentConfig,
    n: usize,
    replicate_index: usize,
) -> Sample {
    let mut rng = SplitMix64::derive(
        cfg.seed,
        &[cfg.error_family.tag(), n as u64, replicate_index as u64],
    );
    let mu = cfg.regime.mu(n);
    let xs = (0..n).map(|_| mu + draw(&cfg.error_family, &mut rng)).collect();
    Sample::new(xs).expect("generated samples are finite and nonempty")
}

/// f64 -> JSON number with 17 significant digits (lossless round trip).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no Inf/NaN literals; encode as strings
        format!("\"{v}\"")
    }
}

/// Fixed JSON schema for a sign-flip report.
pub fn report_json(r: &SignFlipReport) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"n\": {}, \"w\": {}, \"s_hat\": {}, \"saddle_status\": \"{}\", \"lambda\": {}, \"r\": {}, \"p_lr\": {}, \"p_rob\": {}, \"p_clt\": {}, \"diagnostics\": {{\"m2\": {}, \"m4\": {}, \"nu_max\": {}, \"degenerate\": {}}}, \"clamped\": {}}}",
        r.n,
        fmt_f64(r.w),
        fmt_f64(r.s_hat),
        r.saddle_status.as_str(),
        fmt_f64(r.lambda),
        fmt_f64(r.r),
        fmt_f64(r.p_lr.value()),
        fmt_f64(r.p_rob.value()),
        fmt_f64(r.p_clt.value()),
        fmt_f64(r.diag.m2),
        fmt_f64(r.diag.m4),
        fmt_f64(r.diag.nu_max),
        r.diag.degenerate,
        r.clamped,
    );
    out
}

fn opt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "null".into(),
    }
}

pub fn comparison_json(row: &ComparisonRow) -> String {
    format!(
        "{{\"n\": {}, \"w\": {}, \"p_lr\": {}, \"p_rob\": {}, \"p_oracle\": {}, \"rel_err_lr\": {}, \"rel_err_rob\": {}, \"noisy_oracle\": {}}}",
        row.n,
        fmt_f64(row.w),
        fmt_f64(row.p_lr),
        fmt_f64(row.p_rob),
        fmt_f64(row.p_oracle),
        opt_f64(row.rel_err_lr),
        opt_f64(row.rel_err_rob),
        row.noisy_oracle,
    )
}

pub const CSV_HEADER: &str = "n,replicate,w,p_lr,p_rob,p_oracle,rel_err_lr,rel_err_rob,noisy_oracle";

fn csv_row(replicate: usize, row: &ComparisonRow) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.n,
        replicate,
        fmt_f64(row.w),
        fmt_f64(row.p_lr),
        fmt_f64(row.p_rob),
        fmt_f64(row.p_oracle),
        opt(row.rel_err_lr),
        opt(row.rel_err_rob),
        row.noisy_oracle,
    )
}

/// Parses the single-column CSV input: one value per line, optional single
/// header line `x`; comma rows are rejected.
pub fn parse_csv(text: &str) -> Result<Sample, CliError> {
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line == "x" {
            continue;
        }
        if line.contains(',') {
            return Err(CliError::Config(format!(
                "line {}: expected a single column, found a comma",
                lineno + 1
            )));
        }
        let v: f64 = line
            .parse()
            .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        values.push(v);
    }
    Sample::new(values).map_err(CliError::Spa)
}

/// Per-n summary over replicates.
#[derive(Debug, Clone)]
pub struct NSummary {
    pub n: usize,
    pub median_abs_rel_err_lr: f64,
    pub p90_abs_rel_err_lr: f64,
    pub median_abs_rel_err_rob: f64,
    pub p90_abs_rel_err_rob: f64,
    /// Fraction of replicates with p_lr <= 0.05; recorded as a by-product,
    /// no acceptance threshold attached.
    pub reject_rate_05: f64,
}

#[derive(Debug)]
pub struct RunReport {
    /// (replicate index, row), ordered by (n, replicate).
    pub rows: Vec<(usize, ComparisonRow)>,
    pub summaries: Vec<NSummary>,
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (rep, row) in &self.rows {
            out.push_str(&csv_row(*rep, row));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let entries: Vec<String> = self
            .summaries
            .iter()
            .map(|s| {
                format!(
                    "{{\"n\": {}, \"median_abs_rel_err_lr\": {}, \"p90_abs_rel_err_lr\": {}, \"median_abs_rel_err_rob\": {}, \"p90_abs_rel_err_rob\": {}, \"reject_rate_05\": {}}}",
                    s.n,
                    fmt_f64(s.median_abs_rel_err_lr),
                    fmt_f64(s.p90_abs_rel_err_lr),
                    fmt_f64(s.median_abs_rel_err_rob),
                    fmt_f64(s.p90_abs_rel_err_rob),
                    fmt_f64(s.reject_rate_05),
                )
            })
            .collect();
        format!("{{\"per_n\": [{}]}}", entries.join(", "))
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn run_one(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<(usize, ComparisonRow), CliError> {
    let sample = generate_location_model(cfg, n, rep);
    let report = spa_pvalue(&sample, &SaddleConfig::default())?;
    let oracle = match cfg.oracle {
        Oracle::Exact => OracleValue::Exact(exact_enumeration(&sample)?),
        Oracle::Mc { b } => OracleValue::Mc(mc_pvalue(&sample, b, cfg.seed ^ (n as u64) << 20 ^ rep as u64)?),
    };
    Ok((rep, compare(&report, &oracle)))
}

/// Runs the full convergence experiment: every (n, replicate) cell, SPA
/// versus oracle, with per-n quantile summaries. Deterministic given the
/// config; cells run concurrently into pre-indexed slots.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let cells: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |rep| (n, rep)))
        .collect();

    #[cfg(feature = "parallel")]
    let rows: Result<Vec<_>, CliError> = {
        use rayon::prelude::*;
        cells.par_iter().map(|&(n, rep)| run_one(cfg, n, rep)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<_>, CliError> =
        cells.iter().map(|&(n, rep)| run_one(cfg, n, rep)).collect();
    let rows = rows?;

    let mut summaries = Vec::new();
    for &n in &cfg.n_grid {
        let group: Vec<&ComparisonRow> = rows
            .iter()
            .filter(|(_, r)| r.n == n)
            .map(|(_, r)| r)
            .collect();
        let collect_sorted = |f: &dyn Fn(&ComparisonRow) -> Option<f64>| {
            let mut v: Vec<f64> = group.iter().filter_map(|r| f(r)).map(f64::abs).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let lr = collect_sorted(&|r| r.rel_err_lr);
        let rob = collect_sorted(&|r| r.rel_err_rob);
        let rejects = group.iter().filter(|r| r.p_lr <= 0.05).count();
        summaries.push(NSummary {
            n,
            median_abs_rel_err_lr: quantile(&lr, 0.5),
            p90_abs_rel_err_lr: quantile(&lr, 0.9),
            median_abs_rel_err_rob: quantile(&rob, 0.5),
            p90_abs_rel_err_rob: quantile(&rob, 0.9),
            reject_rate_05: rejects as f64 / group.len() as f64,
        });
    }
    Ok(RunReport { rows, summaries })
}
