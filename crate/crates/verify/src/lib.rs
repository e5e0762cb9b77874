//! Verification suites for `hypgeom` and the report format of the
//! `hypverify` command.
//!
//! A suite draws `trials` random instances, one seed per trial, and scores
//! each with a margin that is positive when every check on it holds.
//!
//! ```
//! use hypverify::{run, Params};
//!
//! let report = run("hexagon", &Params::new(), 3, 20).unwrap();
//! assert_eq!(report.summary.pass_count, 20);
//! assert_eq!(report.to_json(), run("hexagon", &Params::new(), 3, 20).unwrap().to_json());
//! ```

use std::collections::BTreeMap;

use hypgeom::GeomError;
use rayon::prelude::*;
use serde::Serialize;

pub mod suites;

pub const SCHEMA: u32 = 1;

/// The left-invariant frame quasi-metric used throughout.
pub const METRIC: &str = "frobenius: d(u, v) = min |u^-1 v -+ I|_F";

/// Suite parameters by name. Sorted, so reports serialize the same way every time.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown suite {0:?}; expected one of {names}", names = suites::NAMES.join(", "))]
    UnknownSuite(String),
    #[error("bad parameter {0:?}: {1}")]
    BadParams(String, String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("i/o: {0}")]
    Io(String),
}

impl VerifyError {
    /// 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyError::UnknownSuite(_) | VerifyError::BadParams(..) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: String,
    pub margin: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseResult {
    pub fn new(case: impl Into<String>, margin: f64) -> Self {
        CaseResult { case: case.into(), margin, pass: margin > 0.0, note: None }
    }

    /// A trial that could not be evaluated.
    pub fn error(case: impl Into<String>, e: &GeomError) -> Self {
        CaseResult { case: case.into(), margin: -1.0, pass: false, note: Some(e.to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass_count: usize,
    pub fail_count: usize,
    /// largest −margin over failed cases, 0 when all pass
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub metric: &'static str,
    pub params: Params,
    pub results: Vec<CaseResult>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.fail_count == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Per-trial margins as CSV with header `case,margin,pass`.
    pub fn to_csv(&self) -> Result<String, VerifyError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| VerifyError::Io(e.to_string());
        w.write_record(["case", "margin", "pass"]).map_err(io)?;
        for r in &self.results {
            w.write_record([r.case.clone(), r.margin.to_string(), r.pass.to_string()]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| VerifyError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Seed of trial `i`: splitmix64 of the run seed offset by i.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `suite` with `overrides` on top of its defaults.
///
/// Trials run in parallel, each on its own seed; results keep trial order.
pub fn run(suite: &str, overrides: &Params, seed: u64, trials: usize) -> Result<Report, VerifyError> {
    let s = suites::lookup(suite).ok_or_else(|| VerifyError::UnknownSuite(suite.into()))?;
    let mut params = s.defaults();
    for (k, v) in overrides {
        let slot = params
            .get_mut(k)
            .ok_or_else(|| VerifyError::BadParams(k.clone(), format!("not a parameter of {suite}")))?;
        if !v.is_finite() {
            return Err(VerifyError::BadParams(k.clone(), "must be finite".into()));
        }
        *slot = *v;
    }
    s.check(&params)?;
    let results: Vec<CaseResult> = (0..trials)
        .into_par_iter()
        .map(|i| (s.trial)(&params, i, trial_seed(seed, i)))
        .collect();
    let pass_count = results.iter().filter(|r| r.pass).count();
    let max_violation = results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| if r.margin.is_nan() { f64::MAX } else { -r.margin })
        .fold(0.0, f64::max);
    Ok(Report {
        schema: SCHEMA,
        suite: suite.into(),
        seed,
        trials,
        metric: METRIC,
        params,
        summary: Summary { pass_count, fail_count: trials - pass_count, max_violation },
        results,
    })
}

/// Parses `key=value`.
pub fn parse_param(s: &str) -> Result<(String, f64), VerifyError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| VerifyError::BadParams(s.into(), "expected key=value".into()))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| VerifyError::BadParams(k.into(), format!("{v:?} is not a number")))?;
    Ok((k.trim().to_string(), v))
}


#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification_chapter {}
