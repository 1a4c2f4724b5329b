//! Reliability of a layer from its minimal clause form and per-component
//! operational probabilities.
//!
//! The exact figure comes from an exhaustive truth table over the clause
//! variables; components absent from the clauses are marginalized out
//! (they contribute probability 1). When the clauses are pairwise
//! disjoint the same figure is available in closed form as a product of
//! k-out-of-r group terms. Limited-coverage variants count only the
//! operational rows with at most k failed components, modelling a test
//! campaign that never injects more than k simultaneous faults; the
//! deviation says how much reliability that restriction leaves unproven.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::analysis::{extract_recovery_groups, QuorumError, QuorumOverrides, RecoveryGroup};
use crate::formula::{Assignment, MinimalCnf, OpState};
use crate::model::ComponentId;

/// Exhaustive enumeration is refused above this many clause variables.
pub const TRUTH_TABLE_VAR_CAP: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum ReliabilityError {
    #[error(
        "truth table over {variables} variables exceeds the cap of {cap}; use the closed-form or limited-coverage modes"
    )]
    TooManyVariables { variables: usize, cap: usize },
    #[error("limited coverage is defined for k = 1 or 2, got {k}")]
    CoverageOrderOutOfRange { k: u8 },
    #[error("exact reliability {r} is outside (0, 1]")]
    ExactOutOfRange { r: f64 },
    #[error("limited coverage {r_lk} exceeds exact reliability {r}; upstream computation is inconsistent")]
    CoverageExceedsExact { r: f64, r_lk: f64 },
    #[error("deviation curve needs at least one group, got l = {l}")]
    CurveTooFewGroups { l: u32 },
    #[error("deviation curve needs groups of at least two components, got r = {r}")]
    CurveGroupTooSmall { r: u32 },
    #[error("deviation curve probabilities must satisfy 0 < from <= to < 1, got {from} ..= {to}")]
    CurveProbabilityRange { from: f64, to: f64 },
    #[error("deviation curve step must be positive, got {step}")]
    CurveStepNotPositive { step: f64 },
    #[error(transparent)]
    Quorum(#[from] QuorumError),
}

/// Compensated (Neumaier) summation. Row probabilities span many orders
/// of magnitude; naive accumulation loses the 1e-12 normalization
/// guarantee.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// One state combination: bit j of `mask` (counting from the most
/// significant used bit) gives the state of the j-th variable, 1 =
/// operational.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthTableRow {
    pub mask: u32,
    pub operational: bool,
    pub probability: f64,
}

/// All 2^m state combinations of the clause variables, in
/// operational-first order: the all-operational row comes first and the
/// all-failed row last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthTable {
    pub layer: u8,
    /// Lexicographic; the first variable owns the most significant bit.
    pub variables: Vec<ComponentId>,
    pub rows: Vec<TruthTableRow>,
}

impl TruthTable {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    /// State of the j-th variable in the given row.
    pub fn state_of(&self, row: &TruthTableRow, j: usize) -> OpState {
        let bit = self.variables.len() - 1 - j;
        if row.mask >> bit & 1 == 1 {
            OpState::Operational
        } else {
            OpState::Failed
        }
    }

    pub fn row_states(&self, row: &TruthTableRow) -> Vec<OpState> {
        (0..self.variables.len()).map(|j| self.state_of(row, j)).collect()
    }

    pub fn row_assignment(&self, row: &TruthTableRow) -> Assignment {
        let mut assignment = Assignment::new();
        for (j, v) in self.variables.iter().enumerate() {
            assignment.set(v.clone(), self.state_of(row, j));
        }
        assignment
    }

    pub fn failed_count(&self, row: &TruthTableRow) -> u32 {
        self.variables.len() as u32 - row.mask.count_ones()
    }

    /// Compensated sum over all rows; 1 up to accumulated rounding.
    pub fn total_probability(&self) -> f64 {
        let mut total = KahanSum::default();
        for row in &self.rows {
            total.add(row.probability);
        }
        total.value()
    }
}

/// Enumerates every state combination of the clause variables with its
/// probability and the layer verdict. Components missing from `probs`
/// count as always operational.
pub fn truth_table(
    cnf: &MinimalCnf,
    probs: &BTreeMap<ComponentId, f64>,
) -> Result<TruthTable, ReliabilityError> {
    let variables: Vec<ComponentId> = cnf.variables().into_iter().collect();
    let m = variables.len();
    if m > TRUTH_TABLE_VAR_CAP {
        return Err(ReliabilityError::TooManyVariables {
            variables: m,
            cap: TRUTH_TABLE_VAR_CAP,
        });
    }

    let bit_of: BTreeMap<&ComponentId, u32> = variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v, (m - 1 - j) as u32))
        .collect();
    let clause_masks: Vec<u32> = cnf
        .clauses
        .iter()
        .map(|c| c.members().iter().map(|v| 1u32 << bit_of[v]).sum())
        .collect();
    let p: Vec<f64> = variables
        .iter()
        .map(|v| probs.get(v).copied().unwrap_or(1.0))
        .collect();

    let mut rows = Vec::with_capacity(1usize << m);
    for mask in (0..1u32 << m).rev() {
        let mut probability = 1.0;
        for (j, pj) in p.iter().enumerate() {
            let bit = (m - 1 - j) as u32;
            probability *= if mask >> bit & 1 == 1 { *pj } else { 1.0 - *pj };
        }
        let operational = clause_masks.iter().all(|cm| cm & mask != 0);
        rows.push(TruthTableRow {
            mask,
            operational,
            probability,
        });
    }
    Ok(TruthTable {
        layer: cnf.layer,
        variables,
        rows,
    })
}

/// Probability that the layer formula holds: the sum over operational
/// rows.
pub fn exact_reliability(table: &TruthTable) -> f64 {
    let mut r = KahanSum::default();
    for row in table.rows.iter().filter(|row| row.operational) {
        r.add(row.probability);
    }
    r.value()
}

/// Reliability proven by a campaign limited to at most `k` simultaneous
/// failures: the sum over operational rows with `k` or fewer failed
/// components.
pub fn limited_coverage(table: &TruthTable, k: u8) -> Result<f64, ReliabilityError> {
    if !(1..=2).contains(&k) {
        return Err(ReliabilityError::CoverageOrderOutOfRange { k });
    }
    let mut r = KahanSum::default();
    for row in &table.rows {
        if row.operational && table.failed_count(row) <= u32::from(k) {
            r.add(row.probability);
        }
    }
    Ok(r.value())
}

/// Closed-form layer reliability, or the reason it does not apply.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Value(f64),
    Inapplicable { reason: String },
}

impl ClosedForm {
    pub fn value(&self) -> Option<f64> {
        match self {
            ClosedForm::Value(v) => Some(*v),
            ClosedForm::Inapplicable { .. } => None,
        }
    }
}

impl Serialize for ClosedForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ClosedForm::Value(v) => serializer.serialize_f64(*v),
            ClosedForm::Inapplicable { reason } => {
                use serde::ser::SerializeMap;
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("inapplicable", reason)?;
                map.end()
            }
        }
    }
}

/// Product over groups of the probability that at least `quorum` members
/// stay operational. Exact only when no component sits in two groups, so
/// overlap reports [`ClosedForm::Inapplicable`].
pub fn closed_form_reliability(
    groups: &[RecoveryGroup],
    probs: &BTreeMap<ComponentId, f64>,
) -> ClosedForm {
    let mut seen: BTreeMap<&ComponentId, usize> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        for v in &g.members {
            if let Some(first) = seen.insert(v, i) {
                return ClosedForm::Inapplicable {
                    reason: format!(
                        "{v} belongs to two recovery groups (groups {first} and {i}); the product form needs disjoint groups"
                    ),
                };
            }
        }
    }

    let mut product = 1.0;
    for g in groups {
        product *= group_survival(g, probs);
    }
    ClosedForm::Value(product)
}

/// Probability that at most `size - quorum` members of one group fail.
/// Distribution over failure counts is built incrementally, one member at
/// a time.
fn group_survival(group: &RecoveryGroup, probs: &BTreeMap<ComponentId, f64>) -> f64 {
    let r = group.members.len();
    let mut by_failures = vec![0.0f64; r + 1];
    by_failures[0] = 1.0;
    for (i, v) in group.members.iter().enumerate() {
        let p = probs.get(v).copied().unwrap_or(1.0);
        for j in (0..=i + 1).rev() {
            let failed_here = if j > 0 { by_failures[j - 1] * (1.0 - p) } else { 0.0 };
            by_failures[j] = by_failures[j] * p + failed_here;
        }
    }
    let tolerable = r - group.quorum as usize;
    let mut total = KahanSum::default();
    for f in by_failures.iter().take(tolerable + 1) {
        total.add(*f);
    }
    total.value()
}

/// How many state combinations a test campaign must cover, by strategy.
/// `m` is the total member count across the groups; fields fall to `None`
/// below their defining floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CombinationCounts {
    pub m: u32,
    /// 2^m: every state combination of the group members.
    pub universal: u128,
    /// Combinations that fail at least one member of every group, minus
    /// the initial all-operational state; `None` without groups.
    pub per_group: Option<u128>,
    /// One single-fault injection per member; needs m >= 2.
    pub single: Option<u64>,
    /// Single- plus double-fault injections, m(m+1)/2; needs m >= 3.
    pub double: Option<u64>,
}

pub fn combination_counts(groups: &[RecoveryGroup]) -> CombinationCounts {
    let m: u32 = groups.iter().map(|g| g.members.len() as u32).sum();
    let universal = 1u128.checked_shl(m).unwrap_or(u128::MAX);
    let per_group = if groups.is_empty() {
        None
    } else {
        let product: u128 = groups
            .iter()
            .map(|g| (1u128 << g.members.len()) - 1)
            .product();
        Some(product - 1)
    };
    let m64 = u64::from(m);
    CombinationCounts {
        m,
        universal,
        per_group,
        single: (m >= 2).then_some(m64),
        double: (m >= 3).then_some(m64 * (m64 + 1) / 2),
    }
}

/// Percentage of the exact reliability left unproven by a k-limited
/// campaign: (R - R_Lk) / R x 100.
pub fn deviation(r: f64, r_lk: f64) -> Result<f64, ReliabilityError> {
    if !(r > 0.0 && r <= 1.0 + 1e-12) {
        return Err(ReliabilityError::ExactOutOfRange { r });
    }
    if r_lk > r + 1e-9 || r_lk < -1e-12 {
        return Err(ReliabilityError::CoverageExceedsExact { r, r_lk });
    }
    Ok((r - r_lk) / r * 100.0)
}

/// One point of a deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub deviation_percent: f64,
}

/// Deviation D(p) for `l` disjoint groups of `r` identical components
/// with per-component probability p, quorum 1, swept from `p_from` to
/// `p_to` inclusive. Here the exact reliability is (1 - (1-p)^r)^l and
/// the 1-limited figure is p^m + m(1-p)p^(m-1) with m = l*r.
pub fn deviation_curve(
    l: u32,
    r: u32,
    p_from: f64,
    p_to: f64,
    step: f64,
) -> Result<Vec<CurvePoint>, ReliabilityError> {
    if l < 1 {
        return Err(ReliabilityError::CurveTooFewGroups { l });
    }
    if r < 2 {
        return Err(ReliabilityError::CurveGroupTooSmall { r });
    }
    if !(p_from > 0.0 && p_from <= p_to && p_to < 1.0) {
        return Err(ReliabilityError::CurveProbabilityRange {
            from: p_from,
            to: p_to,
        });
    }
    if step <= 0.0 {
        return Err(ReliabilityError::CurveStepNotPositive { step });
    }

    let count = ((p_to - p_from) / step + 1e-9).floor() as u64;
    let mut points = Vec::with_capacity(count as usize + 1);
    for i in 0..=count {
        let p = p_from + i as f64 * step;
        points.push(CurvePoint {
            p,
            deviation_percent: identical_p_deviation(l, r, p),
        });
    }
    Ok(points)
}

fn identical_p_deviation(l: u32, r: u32, p: f64) -> f64 {
    let m = (l * r) as f64;
    let exact = (1.0 - (1.0 - p).powi(r as i32)).powi(l as i32);
    let limited = p.powf(m) + m * (1.0 - p) * p.powf(m - 1.0);
    (exact - limited) / exact * 100.0
}

/// Everything the reliability analysis says about one layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub layer: u8,
    pub exact: f64,
    pub closed_form: ClosedForm,
    /// k -> reliability proven by a k-limited campaign.
    pub limited: BTreeMap<u8, f64>,
    /// k -> percentage left unproven.
    pub deviation_percent: BTreeMap<u8, f64>,
    pub counts: CombinationCounts,
    pub table: TruthTable,
}

impl ReliabilityReport {
    pub fn compute(
        cnf: &MinimalCnf,
        probs: &BTreeMap<ComponentId, f64>,
        overrides: &QuorumOverrides,
    ) -> Result<Self, ReliabilityError> {
        let table = truth_table(cnf, probs)?;
        let exact = exact_reliability(&table);
        let groups = extract_recovery_groups(cnf, overrides)?;
        let closed_form = closed_form_reliability(&groups, probs);
        let mut limited = BTreeMap::new();
        let mut deviation_percent = BTreeMap::new();
        for k in [1u8, 2] {
            let r_lk = limited_coverage(&table, k)?;
            deviation_percent.insert(k, deviation(exact, r_lk)?);
            limited.insert(k, r_lk);
        }
        Ok(ReliabilityReport {
            layer: cnf.layer,
            exact,
            closed_form,
            limited,
            deviation_percent,
            counts: combination_counts(&groups),
            table,
        })
    }
}
