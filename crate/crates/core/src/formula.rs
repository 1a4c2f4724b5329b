//! Monotone success formulas.
//!
//! A layer is operational when every delivery obligation on it holds: each
//! (requirement, source) group must reach at least one of its destinations
//! over at least one surviving flow. That is a conjunction over groups of
//! disjunctions over paths of conjunctions over path components. Because no
//! component ever helps by failing, the formula is monotone, and its
//! minimal clause form is unique: each clause is a minimal prevention set,
//! a smallest component group whose joint failure takes the layer down.
//!
//! Clause minimization works by distributing the disjunction of path terms
//! into clause form and absorbing supersets at every step. For monotone
//! input this yields exactly the prime implicates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::coverage::CoverageMap;
use crate::model::ComponentId;

/// Operational status of a component or of the modeled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum OpState {
    /// OS: delivering its function.
    #[serde(rename = "OS")]
    Operational,
    /// FS: failed.
    #[serde(rename = "FS")]
    Failed,
}

impl OpState {
    pub fn is_operational(self) -> bool {
        self == OpState::Operational
    }
}

impl fmt::Display for OpState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpState::Operational => "OS",
            OpState::Failed => "FS",
        })
    }
}

/// A conjunction of components: one data flow survives iff all of them do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Term(pub BTreeSet<ComponentId>);

/// A disjunction of components: the layer survives the clause iff at
/// least one member does. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Clause(pub BTreeSet<ComponentId>);

impl Clause {
    pub fn members(&self) -> &BTreeSet<ComponentId> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// Clauses order by size first so unit clauses (single points of failure)
// always list ahead of redundancy groups.
impl Ord for Clause {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.len(), &self.0).cmp(&(other.0.len(), &other.0))
    }
}

impl PartialOrd for Clause {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One delivery obligation: the disjunction of the flows that can serve
/// `source` under `requirement` on this layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subsystem {
    pub requirement: String,
    pub source: ComponentId,
    /// At least one term; terms are never empty.
    pub terms: Vec<Term>,
}

/// Success formula of one layer in path-disjunction form: the conjunction
/// of its subsystems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuccessDnf {
    pub layer: u8,
    pub subsystems: Vec<Subsystem>,
}

/// Success formula of one layer in minimal clause form. No clause is
/// empty and no clause contains another. An empty clause *list* is the
/// constant-true formula (a layer with no obligations).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalCnf {
    pub layer: u8,
    pub clauses: Vec<Clause>,
}

/// Component states, one entry per formula variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<ComponentId, OpState>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Everything in `vars` operational.
    pub fn all_operational<I: IntoIterator<Item = ComponentId>>(vars: I) -> Self {
        Assignment(
            vars.into_iter()
                .map(|v| (v, OpState::Operational))
                .collect(),
        )
    }

    /// Everything operational except the listed components.
    pub fn with_failures<I: IntoIterator<Item = ComponentId>>(
        vars: I,
        failed: &BTreeSet<ComponentId>,
    ) -> Self {
        Assignment(
            vars.into_iter()
                .map(|v| {
                    let state = if failed.contains(&v) {
                        OpState::Failed
                    } else {
                        OpState::Operational
                    };
                    (v, state)
                })
                .collect(),
        )
    }

    pub fn set(&mut self, component: ComponentId, state: OpState) {
        self.0.insert(component, state);
    }

    pub fn get(&self, component: &ComponentId) -> Option<OpState> {
        self.0.get(component).copied()
    }

    pub fn failed_count(&self) -> usize {
        self.0.values().filter(|s| !s.is_operational()).count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormulaError {
    #[error("requirement {requirement} is unsatisfiable on layer {layer}: a pair has no flows")]
    UnsatisfiableOnLayer { requirement: String, layer: u8 },
    #[error("assignment is missing a state for {component}")]
    MissingAssignment { component: ComponentId },
}

/// Outcome of the exhaustive DNF/CNF agreement check run after clause
/// minimization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceCheck {
    Verified,
    /// Exhaustive comparison over 2^m assignments was skipped; the clause
    /// form is still produced and correct by construction.
    SkippedTooManyVariables { variables: usize },
}

/// Variable bound for the exhaustive equivalence self-check.
pub const EQUIVALENCE_CHECK_VAR_CAP: usize = 24;

impl SuccessDnf {
    pub fn variables(&self) -> BTreeSet<ComponentId> {
        self.subsystems
            .iter()
            .flat_map(|s| s.terms.iter())
            .flat_map(|t| t.0.iter().cloned())
            .collect()
    }

    /// Evaluates under a total assignment over [`Self::variables`].
    pub fn evaluate(&self, assignment: &Assignment) -> Result<OpState, FormulaError> {
        for v in self.variables() {
            if assignment.get(&v).is_none() {
                return Err(FormulaError::MissingAssignment { component: v });
            }
        }
        let up = |t: &Term| {
            t.0.iter()
                .all(|c| assignment.get(c) == Some(OpState::Operational))
        };
        let ok = self
            .subsystems
            .iter()
            .all(|s| s.terms.iter().any(up));
        Ok(if ok {
            OpState::Operational
        } else {
            OpState::Failed
        })
    }
}

impl MinimalCnf {
    pub fn variables(&self) -> BTreeSet<ComponentId> {
        self.clauses
            .iter()
            .flat_map(|c| c.0.iter().cloned())
            .collect()
    }

    /// True when the formula imposes no constraint at all.
    pub fn is_constant_true(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Evaluates under a total assignment over [`Self::variables`].
    pub fn evaluate(&self, assignment: &Assignment) -> Result<OpState, FormulaError> {
        for v in self.variables() {
            if assignment.get(&v).is_none() {
                return Err(FormulaError::MissingAssignment { component: v });
            }
        }
        let ok = self.clauses.iter().all(|clause| {
            clause
                .0
                .iter()
                .any(|c| assignment.get(c) == Some(OpState::Operational))
        });
        Ok(if ok {
            OpState::Operational
        } else {
            OpState::Failed
        })
    }

    /// Human-readable expression, e.g. `(a | b) & c` in ASCII mode or
    /// `(a ∨ b) ∧ c` otherwise. The constant-true formula renders as "-".
    pub fn to_expression(&self, ascii: bool) -> String {
        if self.clauses.is_empty() {
            return "-".to_owned();
        }
        let (and, or) = if ascii { (" & ", " | ") } else { (" ∧ ", " ∨ ") };
        self.clauses
            .iter()
            .map(|clause| {
                let body = clause
                    .0
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(or);
                if clause.len() == 1 {
                    body
                } else {
                    format!("({body})")
                }
            })
            .collect::<Vec<_>>()
            .join(and)
    }
}

/// Builds the success formula of layer `n` from enumerated flows.
///
/// Paths are grouped into subsystems by (requirement, flow source); each
/// subsystem is the disjunction of its path terms and the layer formula
/// conjoins all subsystems. A cell with no paths means the requirement
/// cannot be met on this layer at all.
pub fn build_success_dnf(flows: &CoverageMap, n: u8) -> Result<SuccessDnf, FormulaError> {
    let mut groups: BTreeMap<(String, ComponentId), BTreeSet<Term>> = BTreeMap::new();
    for cell in flows.iter().filter(|c| c.layer == n) {
        if cell.paths.is_empty() {
            return Err(FormulaError::UnsatisfiableOnLayer {
                requirement: cell.requirement.clone(),
                layer: n,
            });
        }
        for path in &cell.paths {
            groups
                .entry((cell.requirement.clone(), path.first().clone()))
                .or_default()
                .insert(Term(path.components().iter().cloned().collect()));
        }
    }
    Ok(SuccessDnf {
        layer: n,
        subsystems: groups
            .into_iter()
            .map(|((requirement, source), terms)| Subsystem {
                requirement,
                source,
                terms: terms.into_iter().collect(),
            })
            .collect(),
    })
}

/// Drops duplicates and supersets; the survivors are mutually
/// incomparable sets.
fn absorb(mut sets: Vec<BTreeSet<ComponentId>>) -> Vec<BTreeSet<ComponentId>> {
    sets.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let mut kept: Vec<BTreeSet<ComponentId>> = Vec::new();
    for set in sets {
        if !kept.iter().any(|k| k.is_subset(&set)) {
            kept.push(set);
        }
    }
    kept
}

/// Clause form of one subsystem's term disjunction: distribute term by
/// term, absorbing after every product so intermediate clause sets stay
/// minimal.
fn distribute(terms: &[Term]) -> Vec<BTreeSet<ComponentId>> {
    let minimal_terms = absorb(terms.iter().map(|t| t.0.clone()).collect());
    if minimal_terms.iter().any(|t| t.is_empty()) {
        // an empty term is the constant-true flow; the disjunction holds
        return Vec::new();
    }
    let mut acc: Vec<BTreeSet<ComponentId>> = minimal_terms[0]
        .iter()
        .map(|lit| BTreeSet::from([lit.clone()]))
        .collect();
    for term in &minimal_terms[1..] {
        let mut crossed = Vec::with_capacity(acc.len() * term.len());
        for clause in &acc {
            for lit in term {
                let mut joined = clause.clone();
                joined.insert(lit.clone());
                crossed.push(joined);
            }
        }
        acc = absorb(crossed);
    }
    acc
}

/// Reduces a success formula to its minimal clause form.
pub fn to_minimal_cnf(dnf: &SuccessDnf) -> MinimalCnf {
    let mut all_clauses = Vec::new();
    for subsystem in &dnf.subsystems {
        assert!(
            !subsystem.terms.is_empty(),
            "subsystem {}/{} has no terms",
            subsystem.requirement,
            subsystem.source
        );
        all_clauses.extend(distribute(&subsystem.terms));
    }
    let mut clauses: Vec<Clause> = absorb(all_clauses).into_iter().map(Clause).collect();
    clauses.sort();
    MinimalCnf {
        layer: dnf.layer,
        clauses,
    }
}

/// [`to_minimal_cnf`] plus an exhaustive agreement check between the two
/// forms. The check compares all 2^m assignments and is skipped (with the
/// clause form still returned) above [`EQUIVALENCE_CHECK_VAR_CAP`]
/// variables.
pub fn to_minimal_cnf_checked(dnf: &SuccessDnf) -> (MinimalCnf, EquivalenceCheck) {
    let cnf = to_minimal_cnf(dnf);
    let variables: Vec<ComponentId> = dnf.variables().into_iter().collect();
    let m = variables.len();
    if m > EQUIVALENCE_CHECK_VAR_CAP {
        return (cnf, EquivalenceCheck::SkippedTooManyVariables { variables: m });
    }
    for mask in 0u64..(1u64 << m) {
        let failed: BTreeSet<ComponentId> = variables
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| v.clone())
            .collect();
        let assignment = Assignment::with_failures(variables.iter().cloned(), &failed);
        let a = dnf.evaluate(&assignment).expect("total assignment");
        let b = cnf.evaluate(&assignment).expect("total assignment");
        assert_eq!(
            a, b,
            "clause minimization changed the formula on layer {}",
            dnf.layer
        );
    }
    (cnf, EquivalenceCheck::Verified)
}

/// Removes every clause that contains an access point.
///
/// Access points are the components the service consumer brings; a
/// prevention set they participate in is not the system's to fix, so
/// those clauses are struck from the formula before any dependability or
/// reliability figure is derived.
pub fn eliminate_access_points(
    cnf: &MinimalCnf,
    access_points: &BTreeSet<ComponentId>,
) -> MinimalCnf {
    let kept: Vec<BTreeSet<ComponentId>> = cnf
        .clauses
        .iter()
        .filter(|c| c.0.is_disjoint(access_points))
        .map(|c| c.0.clone())
        .collect();
    let mut clauses: Vec<Clause> = absorb(kept).into_iter().map(Clause).collect();
    clauses.sort();
    MinimalCnf {
        layer: cnf.layer,
        clauses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(ids: &[&str]) -> Term {
        Term(ids.iter().map(|s| ComponentId::from(*s)).collect())
    }

    fn clause(ids: &[&str]) -> Clause {
        Clause(ids.iter().map(|s| ComponentId::from(*s)).collect())
    }

    fn dnf(subsystems: Vec<(&str, &str, Vec<Term>)>) -> SuccessDnf {
        SuccessDnf {
            layer: 1,
            subsystems: subsystems
                .into_iter()
                .map(|(requirement, source, terms)| Subsystem {
                    requirement: requirement.to_owned(),
                    source: source.into(),
                    terms,
                })
                .collect(),
        }
    }

    #[test]
    fn parallel_paths_reduce_to_series_of_shared_ends() {
        // (s a t) | (s b t)  ==  s & t & (a | b)
        let f = dnf(vec![("r", "s", vec![term(&["s", "a", "t"]), term(&["s", "b", "t"])])]);
        let (cnf, check) = to_minimal_cnf_checked(&f);
        assert_eq!(check, EquivalenceCheck::Verified);
        assert_eq!(
            cnf.clauses,
            vec![clause(&["s"]), clause(&["t"]), clause(&["a", "b"])]
        );
    }

    #[test]
    fn two_disjoint_terms_distribute_into_four_clauses() {
        let f = dnf(vec![("r", "a", vec![term(&["a", "b"]), term(&["c", "d"])])]);
        let cnf = to_minimal_cnf(&f);
        assert_eq!(
            cnf.clauses,
            vec![
                clause(&["a", "c"]),
                clause(&["a", "d"]),
                clause(&["b", "c"]),
                clause(&["b", "d"]),
            ]
        );
    }

    #[test]
    fn superset_terms_are_absorbed() {
        let f = dnf(vec![("r", "a", vec![term(&["a"]), term(&["a", "b"])])]);
        assert_eq!(to_minimal_cnf(&f).clauses, vec![clause(&["a"])]);
    }

    #[test]
    fn subsystems_conjoin_and_shared_clauses_deduplicate() {
        let f = dnf(vec![
            ("r", "s", vec![term(&["s", "m"])]),
            ("r", "t", vec![term(&["t", "m"])]),
        ]);
        let cnf = to_minimal_cnf(&f);
        assert_eq!(
            cnf.clauses,
            vec![clause(&["m"]), clause(&["s"]), clause(&["t"])]
        );
    }

    #[test]
    fn elimination_strikes_clauses_containing_access_points() {
        let f = dnf(vec![("r", "s", vec![term(&["s", "a", "t"]), term(&["s", "b", "t"])])]);
        let cnf = to_minimal_cnf(&f);
        let aps = BTreeSet::from(["s".into(), "t".into()]);
        let reduced = eliminate_access_points(&cnf, &aps);
        assert_eq!(reduced.clauses, vec![clause(&["a", "b"])]);
        // empty access point set leaves the formula untouched
        assert_eq!(eliminate_access_points(&cnf, &BTreeSet::new()), cnf);
    }

    #[test]
    fn eliminating_every_clause_yields_constant_true() {
        let f = dnf(vec![("r", "s", vec![term(&["s", "t"])])]);
        let cnf = to_minimal_cnf(&f);
        let reduced = eliminate_access_points(&cnf, &BTreeSet::from(["s".into(), "t".into()]));
        assert!(reduced.is_constant_true());
        assert_eq!(reduced.to_expression(false), "-");
        assert_eq!(
            reduced.evaluate(&Assignment::new()).unwrap(),
            OpState::Operational
        );
    }

    #[test]
    fn evaluate_requires_a_total_assignment() {
        let f = dnf(vec![("r", "s", vec![term(&["s", "t"])])]);
        let cnf = to_minimal_cnf(&f);
        let partial = Assignment::all_operational(["s".into()]);
        assert!(matches!(
            cnf.evaluate(&partial),
            Err(FormulaError::MissingAssignment { component }) if component.as_str() == "t"
        ));
    }

    #[test]
    fn all_failed_evaluates_to_failed() {
        let f = dnf(vec![("r", "s", vec![term(&["s", "a"]), term(&["s", "b"])])]);
        let vars = f.variables();
        let assignment = Assignment::with_failures(vars.iter().cloned(), &vars);
        assert_eq!(f.evaluate(&assignment).unwrap(), OpState::Failed);
        assert_eq!(
            to_minimal_cnf(&f).evaluate(&assignment).unwrap(),
            OpState::Failed
        );
    }

    #[test]
    fn expression_rendering_parenthesizes_only_groups() {
        let f = dnf(vec![("r", "s", vec![term(&["s", "a", "t"]), term(&["s", "b", "t"])])]);
        let cnf = to_minimal_cnf(&f);
        assert_eq!(cnf.to_expression(false), "s ∧ t ∧ (a ∨ b)");
        assert_eq!(cnf.to_expression(true), "s & t & (a | b)");
    }

    // Test-local evaluator used as an independent oracle against the
    // library's evaluate/minimize pair.
    fn oracle_dnf_holds(f: &SuccessDnf, failed: &BTreeSet<ComponentId>) -> bool {
        f.subsystems.iter().all(|s| {
            s.terms
                .iter()
                .any(|t| t.0.iter().all(|c| !failed.contains(c)))
        })
    }

    fn oracle_cnf_holds(cnf: &MinimalCnf, failed: &BTreeSet<ComponentId>) -> bool {
        cnf.clauses
            .iter()
            .all(|c| c.0.iter().any(|m| !failed.contains(m)))
    }

    fn random_dnf(rng: &mut impl rand::Rng, max_vars: usize) -> SuccessDnf {
        let pool: Vec<ComponentId> = (0..max_vars).map(|i| format!("v{i:02}").into()).collect();
        let subsystems = (0..rng.random_range(1..=3))
            .map(|i| {
                let terms: BTreeSet<Term> = (0..rng.random_range(1..=4))
                    .map(|_| {
                        let len = rng.random_range(1..=4).min(pool.len());
                        let mut vars = BTreeSet::new();
                        while vars.len() < len {
                            vars.insert(pool[rng.random_range(0..pool.len())].clone());
                        }
                        Term(vars)
                    })
                    .collect();
                Subsystem {
                    requirement: format!("r{i}"),
                    source: format!("src{i}").into(),
                    terms: terms.into_iter().collect(),
                }
            })
            .collect();
        SuccessDnf {
            layer: 1,
            subsystems,
        }
    }

    #[test]
    fn minimization_agrees_with_oracle_exhaustively() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let f = random_dnf(&mut rng, 10);
            let cnf = to_minimal_cnf(&f);
            let vars: Vec<ComponentId> = f.variables().into_iter().collect();
            for mask in 0u32..(1 << vars.len()) {
                let failed: BTreeSet<ComponentId> = vars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                assert_eq!(
                    oracle_dnf_holds(&f, &failed),
                    oracle_cnf_holds(&cnf, &failed),
                    "disagreement on {failed:?}"
                );
            }
        }
    }

    #[test]
    fn minimal_clauses_are_minimal_cuts_and_irredundant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let f = random_dnf(&mut rng, 9);
            let cnf = to_minimal_cnf(&f);
            for clause in &cnf.clauses {
                // failing exactly the clause takes the system down
                assert!(!oracle_cnf_holds(&cnf, &clause.0));
                assert!(!oracle_dnf_holds(&f, &clause.0));
                // restoring any single member brings it back
                for member in &clause.0 {
                    let mut failed = clause.0.clone();
                    failed.remove(member);
                    assert!(oracle_cnf_holds(&cnf, &failed));
                    assert!(oracle_dnf_holds(&f, &failed));
                }
            }
        }
    }

    proptest::proptest! {
        // Repairing components never turns an operational formula failed.
        #[test]
        fn evaluation_is_monotone(seed in 0u64..512) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = random_dnf(&mut rng, 8);
            let cnf = to_minimal_cnf(&f);
            let vars: Vec<ComponentId> = f.variables().into_iter().collect();
            let mut failed: BTreeSet<ComponentId> = vars
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .cloned()
                .collect();
            let before = oracle_cnf_holds(&cnf, &failed);
            if let Some(v) = failed.iter().next().cloned() {
                failed.remove(&v);
            }
            let after = oracle_cnf_holds(&cnf, &failed);
            proptest::prop_assert!(!before || after);
        }
    }
}
