//! Fitness-level bound calculators.
//!
//! Levels are indexed `0..=top`; `p[i]` is the leave probability (or a bound
//! on it) of non-top level `i`, so `p.len() == top`. Every calculator is a
//! pure function of its inputs and checks its preconditions first.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::level_chain::LevelChain;
use crate::numeric::compensated_sum;

/// Tolerance for equality preconditions such as viscosity row sums.
pub const PRECONDITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
    Exact,
}

/// Identifies the result a bound value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    FlmUpperClassic,
    FlmLowerClassic,
    FlmLowerViscosity,
    FlmUpperViscosity,
    FlmLowerVisit,
    FlmUpperVisit,
    LeadingOnesExact,
    OneMaxFitnessLevelUpper,
    OneMaxHarmonicUpper,
    OneMaxHarmonicLower,
    OneMaxSkipCorrectedLower,
    OneMaxSandwichLower,
    JumpLowerArbitrary,
    JumpLowerRandom,
    LongPathLower,
    LongPathReference,
}

impl Theorem {
    pub fn id(self) -> &'static str {
        match self {
            Self::FlmUpperClassic => "flm-upper-classic",
            Self::FlmLowerClassic => "flm-lower-classic",
            Self::FlmLowerViscosity => "flm-lower-viscosity",
            Self::FlmUpperViscosity => "flm-upper-viscosity",
            Self::FlmLowerVisit => "flm-lower-visit",
            Self::FlmUpperVisit => "flm-upper-visit",
            Self::LeadingOnesExact => "leadingones-exact",
            Self::OneMaxFitnessLevelUpper => "onemax-tilde-T",
            Self::OneMaxHarmonicUpper => "onemax-tilde-T-plus",
            Self::OneMaxHarmonicLower => "onemax-tilde-T-minus",
            Self::OneMaxSkipCorrectedLower => "onemax-skip-corrected-lower",
            Self::OneMaxSandwichLower => "onemax-explicit-lower",
            Self::JumpLowerArbitrary => "jump-lower-arbitrary-init",
            Self::JumpLowerRandom => "jump-lower-random-init",
            Self::LongPathLower => "longpath-lower",
            Self::LongPathReference => "longpath-reference-unproven",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Theorem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// A computed runtime bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub theorem: Theorem,
    pub kind: BoundKind,
    pub value: f64,
    /// The raw formula went negative and was clamped to 0.
    pub clamped: bool,
    /// `false` for reference values that have no proof.
    pub proven: bool,
    pub violated_preconditions: Vec<String>,
}

impl BoundResult {
    pub fn new(theorem: Theorem, kind: BoundKind, value: f64) -> Self {
        Self {
            theorem,
            kind,
            value,
            clamped: false,
            proven: true,
            violated_preconditions: Vec::new(),
        }
    }

    /// Clamps a negative value to 0 and flags it.
    pub fn clamped_at_zero(theorem: Theorem, kind: BoundKind, raw: f64) -> Self {
        let mut b = Self::new(theorem, kind, raw.max(0.0));
        b.clamped = raw < 0.0;
        b
    }

    pub fn unproven(mut self) -> Self {
        self.proven = false;
        self
    }

    /// A bound whose preconditions failed; its value is meaningless.
    pub fn rejected(theorem: Theorem, kind: BoundKind, violations: Vec<String>) -> Self {
        Self {
            theorem,
            kind,
            value: f64::NAN,
            clamped: false,
            proven: true,
            violated_preconditions: violations,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.violated_preconditions.is_empty() && self.value.is_finite()
    }
}

/// Inputs of the fitness-level bounds for a chain with levels `0..=m`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlmInput {
    pub p: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub start: Option<Vec<f64>>,
    /// Upper-triangular viscosities `gamma[i][j]`, meaningful for `j > i`.
    pub gamma: Option<Vec<Vec<f64>>>,
    pub chi: Option<f64>,
}

impl FlmInput {
    /// Exact inputs read off a level chain: leave probabilities, exact
    /// visit probabilities, the start distribution, and the conditional
    /// jump distribution as viscosities (no `chi`).
    pub fn from_chain(chain: &LevelChain) -> Result<Self> {
        let p = chain.leave_probs();
        let gamma = viscosities_from_chain(chain);
        Ok(Self {
            v: Some(crate::level_chain::visit_probabilities(chain)?),
            start: Some(chain.start().to_vec()),
            gamma: Some(gamma),
            chi: None,
            p,
        })
    }
}

fn preconditions(theorem: Theorem, violations: Vec<String>) -> Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Preconditions {
            theorem: theorem.id(),
            violations,
        })
    }
}

fn leave_probability_violations(p: &[f64]) -> Vec<String> {
    p.iter()
        .enumerate()
        .filter(|(_, &pi)| !(pi > 0.0 && pi <= 1.0))
        .map(|(i, pi)| format!("p[{i}] = {pi} is not in (0, 1]"))
        .collect()
}

fn start_violations(start: &[f64], levels: usize) -> Vec<String> {
    let mut out = Vec::new();
    if start.len() != levels {
        out.push(format!("start has {} entries, expected {levels}", start.len()));
        return out;
    }
    for (i, &s) in start.iter().enumerate() {
        if !(0.0..=1.0).contains(&s) {
            out.push(format!("start[{i}] = {s} is not in [0, 1]"));
        }
    }
    let sum = compensated_sum(start.iter().copied());
    if (sum - 1.0).abs() > 1e-12 {
        out.push(format!("start sums to {sum}"));
    }
    out
}

/// Classic upper bound `sum_i 1/p_i`.
pub fn flm_upper_classic(p: &[f64]) -> Result<BoundResult> {
    preconditions(Theorem::FlmUpperClassic, leave_probability_violations(p))?;
    let value = compensated_sum(p.iter().map(|pi| 1.0 / pi));
    Ok(BoundResult::new(Theorem::FlmUpperClassic, BoundKind::Upper, value))
}

/// Classic lower bound `sum_i Pr[X_0 = i] / p_i`: the start level must be left.
pub fn flm_lower_classic(p: &[f64], start: &[f64]) -> Result<BoundResult> {
    let mut violations = leave_probability_violations(p);
    violations.extend(start_violations(start, p.len() + 1));
    preconditions(Theorem::FlmLowerClassic, violations)?;
    let value = compensated_sum(p.iter().zip(start).map(|(pi, s)| s / pi));
    Ok(BoundResult::new(Theorem::FlmLowerClassic, BoundKind::Lower, value))
}

/// Index-level checks of a viscosity matrix; `upper` selects the direction
/// of the `chi` tail inequality.
pub fn viscosity_violations(gamma: &[Vec<f64>], chi: f64, upper: bool) -> Vec<String> {
    let levels = gamma.len();
    let mut out = Vec::new();
    if !(0.0..=1.0).contains(&chi) {
        out.push(format!("chi = {chi} is not in [0, 1]"));
    }
    for (i, row) in gamma.iter().enumerate().take(levels.saturating_sub(1)) {
        if row.len() != levels {
            out.push(format!("gamma row {i} has {} entries, expected {levels}", row.len()));
            continue;
        }
        if let Some(j) = (i + 1..levels).find(|&j| !(0.0..=1.0).contains(&row[j])) {
            out.push(format!("gamma[{i}][{j}] = {} is not in [0, 1]", row[j]));
        }
        let sum = compensated_sum(row[i + 1..].iter().copied());
        if (sum - 1.0).abs() > PRECONDITION_TOL {
            out.push(format!("gamma row {i} sums to {sum}, expected 1"));
        }
        let mut tail = 0.0;
        for j in (i + 1..levels).rev() {
            tail += row[j];
            let bound = chi * tail;
            let bad = if upper {
                row[j] > bound + PRECONDITION_TOL
            } else {
                row[j] < bound - PRECONDITION_TOL
            };
            if bad {
                let rel = if upper { "<=" } else { ">=" };
                out.push(format!(
                    "gamma[{i}][{j}] = {} violates gamma {rel} chi * tail = {bound}",
                    row[j]
                ));
            }
        }
    }
    out
}

fn viscosity_shape_violations(p: &[f64], gamma: &[Vec<f64>], start: &[f64]) -> Vec<String> {
    let mut out = leave_probability_violations(p);
    if gamma.len() != p.len() + 1 {
        out.push(format!("gamma has {} rows, expected {}", gamma.len(), p.len() + 1));
    }
    out.extend(start_violations(start, p.len() + 1));
    out
}

/// Viscosity lower bound `sum_i Pr[X_0 = i] * chi * sum_{j >= i} 1/p_j`.
pub fn flm_lower_viscosity(p: &[f64], gamma: &[Vec<f64>], chi: f64, start: &[f64]) -> Result<BoundResult> {
    let mut violations = viscosity_shape_violations(p, gamma, start);
    if violations.is_empty() {
        violations = viscosity_violations(gamma, chi, false);
    }
    preconditions(Theorem::FlmLowerViscosity, violations)?;
    let tails = suffix_reciprocal_sums(p);
    let value = compensated_sum((0..p.len()).map(|i| start[i] * chi * tails[i]));
    Ok(BoundResult::new(Theorem::FlmLowerViscosity, BoundKind::Lower, value))
}

/// Viscosity upper bound `sum_i Pr[X_0 = i] * (1/p_i + chi * sum_{j > i} 1/p_j)`.
pub fn flm_upper_viscosity(p: &[f64], gamma: &[Vec<f64>], chi: f64, start: &[f64]) -> Result<BoundResult> {
    let mut violations = viscosity_shape_violations(p, gamma, start);
    if violations.is_empty() {
        violations = viscosity_violations(gamma, chi, true);
        for j in 0..p.len().saturating_sub(1) {
            if (1.0 - chi) * p[j] > p[j + 1] + PRECONDITION_TOL {
                violations.push(format!(
                    "(1 - chi) * p[{j}] = {} exceeds p[{}] = {}",
                    (1.0 - chi) * p[j],
                    j + 1,
                    p[j + 1]
                ));
            }
        }
    }
    preconditions(Theorem::FlmUpperViscosity, violations)?;
    let tails = suffix_reciprocal_sums(p);
    let value = compensated_sum((0..p.len()).map(|i| start[i] * (1.0 / p[i] + chi * tails[i + 1])));
    Ok(BoundResult::new(Theorem::FlmUpperViscosity, BoundKind::Upper, value))
}

/// `tails[i] = sum_{j >= i} 1/p_j`, with `tails[p.len()] = 0`.
fn suffix_reciprocal_sums(p: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; p.len() + 1];
    for i in (0..p.len()).rev() {
        tails[i] = tails[i + 1] + 1.0 / p[i];
    }
    tails
}

fn visit_violations(p: &[f64], v: &[f64]) -> Vec<String> {
    let mut out = leave_probability_violations(p);
    if v.len() < p.len() {
        out.push(format!("v has {} entries, expected at least {}", v.len(), p.len()));
    }
    for (i, &vi) in v.iter().enumerate() {
        if !(0.0..=1.0).contains(&vi) {
            out.push(format!("v[{i}] = {vi} is not in [0, 1]"));
        }
    }
    out
}

fn visit_sum(p: &[f64], v: &[f64]) -> f64 {
    compensated_sum(p.iter().zip(v).map(|(pi, vi)| vi / pi))
}

/// Visit-probability lower bound `sum_i v_i / p_i` from upper bounds on the
/// leave probabilities and lower bounds on the visit probabilities.
///
/// `v` may include the top level; its entry is ignored.
pub fn flm_lower_visit(p_upper: &[f64], v_lower: &[f64]) -> Result<BoundResult> {
    preconditions(Theorem::FlmLowerVisit, visit_violations(p_upper, v_lower))?;
    Ok(BoundResult::new(Theorem::FlmLowerVisit, BoundKind::Lower, visit_sum(p_upper, v_lower)))
}

/// Visit-probability upper bound `sum_i v_i / p_i` from lower bounds on the
/// leave probabilities and upper bounds on the visit probabilities.
pub fn flm_upper_visit(p_lower: &[f64], v_upper: &[f64]) -> Result<BoundResult> {
    preconditions(Theorem::FlmUpperVisit, visit_violations(p_lower, v_upper))?;
    Ok(BoundResult::new(Theorem::FlmUpperVisit, BoundKind::Upper, visit_sum(p_lower, v_upper)))
}

/// Worst-case lower bound on the probability of visiting level `i`: the
/// smallest chance, over lower levels `j` that can reach `i` or above, that
/// the first such move lands exactly on `i`, combined with the same ratio
/// for the start distribution.
pub fn visit_lower_from_chain(chain: &LevelChain, i: usize) -> Result<f64> {
    if i > chain.top() {
        return Err(Error::InvalidParameter(format!(
            "level {i} outside [0..{}]",
            chain.top()
        )));
    }
    let t = chain.transition();
    let mut bound = 1.0f64;
    for j in 0..i {
        let reach = chain.mass_at_least(j, i);
        if reach > 0.0 {
            bound = bound.min(t[j][i] / reach);
        }
    }
    let start_reach = compensated_sum(chain.start()[i..].iter().copied());
    if start_reach > 0.0 {
        bound = bound.min(chain.start()[i] / start_reach);
    }
    Ok(bound.clamp(0.0, 1.0))
}

/// Exact viscosities `gamma[i][j] = T[i][j] / p_i` of a chain.
pub fn viscosities_from_chain(chain: &LevelChain) -> Vec<Vec<f64>> {
    let levels = chain.levels();
    (0..levels)
        .map(|i| {
            let mut row = vec![0.0; levels];
            if i < chain.top() {
                let p = chain.leave_probability(i);
                if p > 0.0 {
                    for j in i + 1..levels {
                        row[j] = chain.transition()[i][j] / p;
                    }
                }
            }
            row
        })
        .collect()
}

/// Largest `chi` with `gamma[i][j] >= chi * sum_{k >= j} gamma[i][k]` everywhere.
pub fn lower_viscosity_chi(gamma: &[Vec<f64>]) -> f64 {
    tail_ratios(gamma).fold(1.0, f64::min)
}

/// Smallest `chi` with `gamma[i][j] <= chi * sum_{k >= j} gamma[i][k]` everywhere.
pub fn upper_viscosity_chi(gamma: &[Vec<f64>]) -> f64 {
    tail_ratios(gamma).fold(0.0, f64::max)
}

fn tail_ratios(gamma: &[Vec<f64>]) -> impl Iterator<Item = f64> + '_ {
    let levels = gamma.len();
    gamma.iter().enumerate().take(levels.saturating_sub(1)).flat_map(move |(i, row)| {
        let mut tail = 0.0;
        let mut ratios = Vec::new();
        for j in (i + 1..levels).rev() {
            tail += row[j];
            if tail > 0.0 {
                ratios.push(row[j] / tail);
            }
        }
        ratios
    })
}
