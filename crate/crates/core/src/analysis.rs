//! Dependability characteristics of a layer, read off its minimal clause
//! form and double-checked against the layer graph.
//!
//! A unit clause is a single point of failure. A larger clause is a
//! recovery group: its members back each other up, and the layer survives
//! as long as the group keeps a quorum (by default one member) running.
//! The graph-wise verifier replays both claims with plain reachability so
//! the clause analysis and the topology can never silently drift apart.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::coverage::{layer_hosts, subsystem_endpoints, CoverageError};
use crate::formula::MinimalCnf;
use crate::model::{ComponentId, LayerGraph, LayeredModel};

/// A clause of two or more components that protect one another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoveryGroup {
    pub layer: u8,
    pub members: BTreeSet<ComponentId>,
    /// Members that must stay operational for the group to hold. 1 unless
    /// overridden, and always below the member count.
    pub quorum: u32,
}

impl RecoveryGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// E.g. "1-out-of-2".
    pub fn kind_label(&self) -> String {
        format!("{}-out-of-{}", self.quorum, self.members.len())
    }
}

/// How many simultaneous component failures a layer is guaranteed to
/// absorb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tolerance {
    Level(u32),
    /// The layer formula is constant-true; no failure count matters.
    Unconstrained,
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Level(k) => write!(f, "{k}"),
            Tolerance::Unconstrained => write!(f, "unconstrained"),
        }
    }
}

impl Serialize for Tolerance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Tolerance::Level(k) => serializer.serialize_u32(*k),
            Tolerance::Unconstrained => serializer.serialize_str("unconstrained"),
        }
    }
}

/// Everything the clause analysis says about one layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependabilityProfile {
    pub layer: u8,
    pub spof: BTreeSet<ComponentId>,
    pub groups: Vec<RecoveryGroup>,
    pub tolerance: Tolerance,
    /// Number of prevention sets (clauses).
    pub clause_count: usize,
    /// Size of the smallest prevention set; `None` for constant-true.
    pub min_group_size: Option<usize>,
}

/// Per-group quorum overrides, keyed by the group's member set.
#[derive(Debug, Clone, Default)]
pub struct QuorumOverrides(BTreeMap<BTreeSet<ComponentId>, u32>);

impl QuorumOverrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set<I: IntoIterator<Item = ComponentId>>(&mut self, members: I, quorum: u32) {
        self.0.insert(members.into_iter().collect(), quorum);
    }

    fn get(&self, members: &BTreeSet<ComponentId>) -> Option<u32> {
        self.0.get(members).copied()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QuorumError {
    #[error("quorum {quorum} is invalid for a group of {size} ({members:?}): must satisfy 1 <= quorum < size")]
    OutOfRange {
        members: BTreeSet<ComponentId>,
        size: usize,
        quorum: u32,
    },
}

/// Union of all unit clauses: components whose lone failure takes the
/// layer down.
pub fn extract_spof(cnf: &MinimalCnf) -> BTreeSet<ComponentId> {
    cnf.clauses
        .iter()
        .filter(|c| c.len() == 1)
        .flat_map(|c| c.members().iter().cloned())
        .collect()
}

/// All clauses of two or more members, with default quorum 1 unless
/// overridden.
pub fn extract_recovery_groups(
    cnf: &MinimalCnf,
    overrides: &QuorumOverrides,
) -> Result<Vec<RecoveryGroup>, QuorumError> {
    let mut groups = Vec::new();
    for clause in cnf.clauses.iter().filter(|c| c.len() >= 2) {
        let members = clause.members().clone();
        let quorum = overrides.get(&members).unwrap_or(1);
        if quorum < 1 || quorum as usize >= members.len() {
            return Err(QuorumError::OutOfRange {
                size: members.len(),
                members,
                quorum,
            });
        }
        groups.push(RecoveryGroup {
            layer: cnf.layer,
            members,
            quorum,
        });
    }
    Ok(groups)
}

/// Guaranteed failure tolerance: one less than the smallest clause. Any
/// unit clause pins it at zero; a constant-true formula has no bound.
pub fn tolerance_level(cnf: &MinimalCnf) -> Tolerance {
    match cnf.clauses.iter().map(|c| c.len()).min() {
        None => Tolerance::Unconstrained,
        Some(smallest) => Tolerance::Level(smallest as u32 - 1),
    }
}

impl DependabilityProfile {
    pub fn from_cnf(cnf: &MinimalCnf, overrides: &QuorumOverrides) -> Result<Self, QuorumError> {
        Ok(DependabilityProfile {
            layer: cnf.layer,
            spof: extract_spof(cnf),
            groups: extract_recovery_groups(cnf, overrides)?,
            tolerance: tolerance_level(cnf),
            clause_count: cnf.clauses.len(),
            min_group_size: cnf.clauses.iter().map(|c| c.len()).min(),
        })
    }

    /// Every component that appears in some prevention set.
    pub fn constrained_components(&self) -> BTreeSet<ComponentId> {
        let mut all = self.spof.clone();
        for g in &self.groups {
            all.extend(g.members.iter().cloned());
        }
        all
    }
}

/// A disagreement between the clause analysis and direct graph
/// reachability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub enum Discrepancy {
    #[error(
        "layer {layer}: {component} is listed as a single point of failure, but every delivery obligation survives its loss"
    )]
    SpofNotCritical { layer: u8, component: ComponentId },
    #[error(
        "layer {layer}: recovery-group member {component} is critical: some delivery obligation does not survive its loss"
    )]
    GroupMemberCritical { layer: u8, component: ComponentId },
}

/// Replays a profile's claims against the layer graph.
///
/// For each listed single point of failure, deleting the component must
/// strand at least one (requirement, source) obligation away from all of
/// its destinations. For each recovery-group member, deleting it must
/// strand none. Reachability honors the same transit rule as flow
/// enumeration: paths never route through other hosts.
pub fn verify_profile_graphwise(
    model: &LayeredModel,
    n: u8,
    profile: &DependabilityProfile,
) -> Result<Vec<Discrepancy>, CoverageError> {
    let graph = model
        .layer_graph(n)
        .map_err(|_| CoverageError::NoSuchLayer { layer: n })?;
    let subsystems = subsystem_endpoints(model, n)?;
    let hosts = layer_hosts(model, n)?;

    let survives = |deleted: &ComponentId| -> bool {
        subsystems.iter().all(|((_, source), destinations)| {
            source != deleted && reaches_any(&graph, source, destinations, deleted, &hosts)
        })
    };

    let mut discrepancies = Vec::new();
    for s in &profile.spof {
        if survives(s) {
            discrepancies.push(Discrepancy::SpofNotCritical {
                layer: n,
                component: s.clone(),
            });
        }
    }
    let members: BTreeSet<&ComponentId> =
        profile.groups.iter().flat_map(|g| &g.members).collect();
    for v in members {
        if !survives(v) {
            discrepancies.push(Discrepancy::GroupMemberCritical {
                layer: n,
                component: v.clone(),
            });
        }
    }
    Ok(discrepancies)
}

/// Breadth-first reachability from `source` to any of `destinations`,
/// skipping `deleted` entirely and never expanding through a host vertex.
fn reaches_any(
    graph: &LayerGraph,
    source: &ComponentId,
    destinations: &BTreeSet<ComponentId>,
    deleted: &ComponentId,
    hosts: &BTreeSet<ComponentId>,
) -> bool {
    let mut visited = BTreeSet::from([source.clone()]);
    let mut queue = VecDeque::from([source.clone()]);
    while let Some(u) = queue.pop_front() {
        for v in graph.neighbors(&u) {
            if v == deleted || visited.contains(v) {
                continue;
            }
            if destinations.contains(v) {
                return true;
            }
            visited.insert(v.clone());
            if !hosts.contains(v) {
                queue.push_back(v.clone());
            }
        }
    }
    false
}
