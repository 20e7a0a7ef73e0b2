//! Accuracy over a grid of one configuration parameter.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{build_training_index, run_set, test_set, with_pool, EvalError, EvalOptions, Split};
use crate::index::{corpus_files, CorpusIndex};
use crate::recovery::RecoveryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Phi,
    Beam,
    AssocJ,
    /// `alpha`, with `beta = 1 - alpha`.
    AlphaBeta,
    /// `gamma`, with `theta = 1 - gamma`.
    GammaTheta,
    /// Number of training folds, recovering the first held-out fold.
    DataSize,
}

impl SweepParam {
    pub const NAMES: [&'static str; 6] = ["phi", "beam", "assoc-j", "alpha", "gamma", "data-size"];

    fn integral(self) -> bool {
        matches!(self, SweepParam::Beam | SweepParam::AssocJ | SweepParam::DataSize)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self {
            SweepParam::Phi => 0,
            SweepParam::Beam => 1,
            SweepParam::AssocJ => 2,
            SweepParam::AlphaBeta => 3,
            SweepParam::GammaTheta => 4,
            SweepParam::DataSize => 5,
        };
        f.write_str(Self::NAMES[i])
    }
}

impl FromStr for SweepParam {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "phi" => SweepParam::Phi,
            "beam" | "beam-k" | "beamk" => SweepParam::Beam,
            "assoc-j" | "j" => SweepParam::AssocJ,
            "alpha" | "alpha-beta" => SweepParam::AlphaBeta,
            "gamma" | "gamma-theta" => SweepParam::GammaTheta,
            "data-size" | "datasize" => SweepParam::DataSize,
            _ => return Err(GridError::UnknownParameter(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("unknown sweep parameter `{0}` (expected one of: phi, beam, assoc-j, alpha, gamma, data-size)")]
    UnknownParameter(String),
    #[error("bad grid `{0}`: expected `start:end:step` or a comma-separated list")]
    Syntax(String),
    #[error("{param} takes whole numbers, got {value}")]
    NotInteger { param: SweepParam, value: f64 },
    #[error("data-size {value} is outside 1..={max}")]
    DataSize { value: usize, max: usize },
}

fn round(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// Parses `start:end:step` (inclusive, rounded to 10 decimals) or `a,b,c`.
///
/// ```
/// use name_loom::evaluation::parse_grid;
/// assert_eq!(parse_grid("0.5:1.0:0.1").unwrap(), [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
/// assert_eq!(parse_grid("1,5,30").unwrap(), [1.0, 5.0, 30.0]);
/// ```
pub fn parse_grid(s: &str) -> Result<Vec<f64>, GridError> {
    let bad = || GridError::Syntax(s.to_string());
    let number = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (number(start)?, number(end)?, number(step)?);
            if step <= 0.0 || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| round(start + i as f64 * step)).collect()
        }
        [list] => list.split(',').map(number).collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub accuracy: f64,
    pub per_var_ms: f64,
}

/// CSV with header `parameter,value,accuracy,per_var_ms`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,value,accuracy,per_var_ms\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.6},{:.4}\n", r.parameter, r.value, r.accuracy, r.per_var_ms));
    }
    out
}

fn apply(param: SweepParam, value: f64, base: &RecoveryConfig) -> RecoveryConfig {
    let mut c = base.clone();
    match param {
        SweepParam::Phi => c.phi = value,
        SweepParam::Beam => c.beam_k = value as usize,
        SweepParam::AssocJ => c.assoc_j = value as usize,
        SweepParam::AlphaBeta => {
            c.alpha = value;
            c.beta = round(1.0 - value);
        }
        SweepParam::GammaTheta => {
            c.gamma = value;
            c.theta = round(1.0 - value);
        }
        SweepParam::DataSize => {}
    }
    c
}

/// Evaluates once per grid value of `param`.
///
/// Without an `index`, one is built from the training files of
/// `opts.split` (all files for self-recovery). A `DataSize` sweep always
/// builds its own indexes: value `k` trains on the `k` folds following the
/// test fold (10 folds unless the split says otherwise).
pub fn sweep(
    corpus_dir: &Path,
    index: Option<&CorpusIndex>,
    opts: &EvalOptions,
    param: SweepParam,
    grid: &[f64],
) -> Result<Vec<SweepRow>, EvalError> {
    let (folds, test_fold) = match opts.split {
        Split::HoldOut { folds, test_fold } => (folds, test_fold),
        Split::SelfRecovery => (10, 0),
    };
    for &value in grid {
        if param.integral() && (value.fract() != 0.0 || value < 0.0) {
            return Err(GridError::NotInteger { param, value }.into());
        }
        if param == SweepParam::DataSize && !(1.0..folds as f64).contains(&value) {
            return Err(GridError::DataSize { value: value as usize, max: folds - 1 }.into());
        }
        apply(param, value, &opts.config).validate()?;
    }
    let files = corpus_files(corpus_dir)?;
    let split = if param == SweepParam::DataSize { Split::HoldOut { folds, test_fold } } else { opts.split };
    let opts = EvalOptions { split, ..opts.clone() };
    let set = with_pool(opts.jobs, || test_set(&files, &opts))?;
    if set.cases.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let built;
    let shared = match (param, index) {
        (SweepParam::DataSize, _) => None,
        (_, Some(index)) => Some(index),
        (_, None) => {
            built = build_training_index(&files, |i| !split.is_test(i) || split == Split::SelfRecovery, opts.jobs)?;
            Some(&built)
        }
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let config = apply(param, value, &opts.config);
        let report = match shared {
            Some(index) => with_pool(opts.jobs, || run_set(&set, index, &config, true))?,
            None => {
                let k = value as usize;
                let index = build_training_index(&files, |i| (i % folds + folds - test_fold - 1) % folds < k, opts.jobs)?;
                with_pool(opts.jobs, || run_set(&set, &index, &config, true))?
            }
        };
        rows.push(SweepRow {
            parameter: param.to_string(),
            value,
            accuracy: report.accuracy,
            per_var_ms: report.mean_variable_ms.unwrap_or(0.0),
        });
    }
    Ok(rows)
}
