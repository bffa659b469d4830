//! Empirical-versus-theoretical comparison tables.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::bounds::{BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::experiment::RunStatistics;

/// Standard errors of slack granted to every empirical comparison.
pub const SE_SLACK: f64 = 3.0;

/// Relative tolerance when checking an exact value against a bound.
const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Shown for reference, never fails the report.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Info => "INFO",
        })
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub quantity: String,
    pub empirical: Option<f64>,
    pub std_error: Option<f64>,
    pub theoretical: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub failed: bool,
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        if self.failed {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

/// Checks an experiment against runtime bounds, an optional exact expected
/// runtime and optional proven lower bounds on the visit probabilities
/// (one per level of the statistics).
///
/// A visit row fails when the observed frequency is more than three
/// standard errors below the bound.
///
/// A runtime row fails when the empirical mean is more than three standard
/// errors below a lower bound or above an upper bound. Bounds with violated
/// preconditions or without a proof are shown as INFO. When some runs timed
/// out the mean is censored from below, so lower-bound rows become INFO.
pub fn compare_report(
    stats: &RunStatistics,
    bounds: &[BoundResult],
    exact: Option<f64>,
    visit_lower: Option<&[f64]>,
) -> Result<Report> {
    let mut rows = Vec::new();
    let (mean, se) = (stats.mean, stats.std_error);

    for bound in bounds {
        let usable = bound.is_usable() && bound.proven;
        let verdict = match bound.kind {
            _ if !usable => Verdict::Info,
            BoundKind::Lower if stats.timeouts > 0 => Verdict::Info,
            BoundKind::Lower if mean + SE_SLACK * se < bound.value => Verdict::Fail,
            BoundKind::Upper if mean - SE_SLACK * se > bound.value => Verdict::Fail,
            BoundKind::Exact if stats.timeouts == 0 && (mean - bound.value).abs() > SE_SLACK * se => Verdict::Fail,
            _ => Verdict::Pass,
        };
        rows.push(ReportRow {
            quantity: format!("E[T] vs {} ({})", bound.theorem, kind_name(bound.kind)),
            empirical: Some(mean),
            std_error: Some(se),
            theoretical: bound.value,
            verdict,
        });
    }

    if let Some(exact) = exact {
        rows.push(ReportRow {
            quantity: "E[T] vs exact".into(),
            empirical: Some(mean),
            std_error: Some(se),
            theoretical: exact,
            verdict: Verdict::Info,
        });
        for bound in bounds.iter().filter(|b| b.is_usable() && b.proven) {
            let tol = EXACT_TOL * exact.abs().max(1.0);
            let ok = match bound.kind {
                BoundKind::Lower => exact >= bound.value - tol,
                BoundKind::Upper => exact <= bound.value + tol,
                BoundKind::Exact => (exact - bound.value).abs() <= tol,
            };
            rows.push(ReportRow {
                quantity: format!("exact vs {} ({})", bound.theorem, kind_name(bound.kind)),
                empirical: None,
                std_error: None,
                theoretical: bound.value,
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            });
        }
    }

    if let Some(v_lower) = visit_lower {
        if v_lower.len() != stats.levels.len() {
            return Err(Error::DimensionMismatch {
                expected: stats.levels.len(),
                actual: v_lower.len(),
            });
        }
        let reps = stats.replicates.max(1) as f64;
        for (level, &v) in stats.levels.iter().zip(v_lower) {
            // A level seen in no run (or in all) has a sample SE of 0; the SE
            // a frequency equal to the bound would have is used as a floor.
            let se = level.visit_se.max((v * (1.0 - v) / reps).max(0.0).sqrt());
            let fail = level.visit_freq + SE_SLACK * se < v;
            rows.push(ReportRow {
                quantity: format!("v[{}] vs lower bound", level.level),
                empirical: Some(level.visit_freq),
                std_error: Some(se),
                theoretical: v,
                verdict: if fail { Verdict::Fail } else { Verdict::Pass },
            });
        }
    }

    let failed = rows.iter().any(|r| r.verdict == Verdict::Fail);
    Ok(Report { rows, failed })
}

fn kind_name(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Upper => "upper",
        BoundKind::Lower => "lower",
        BoundKind::Exact => "exact",
    }
}
