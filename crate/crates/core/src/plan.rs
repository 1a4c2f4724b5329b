//! Fault-injection test plans sized by recovery groups.
//!
//! Only recovery-group members are worth injecting: single points of
//! failure need disaster-recovery plans, not switchover tests, and
//! access points are end-user equipment outside the protection scope.
//! Every injection is paired with a repair, so a plan holds twice as
//! many templates as it has target sets. Double-fault plans add the
//! member pairs the layer provably survives; pairs whose joint failure
//! already takes the layer down are listed as excluded instead.
//!
//! The top (functional) layer never contributes templates or bounds.
//! Its components are roles, not equipment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::analysis::{DependabilityProfile, Tolerance};
use crate::formula::{Assignment, MinimalCnf, OpState};
use crate::model::{ComponentId, LayeredModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Inject,
    Repair,
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateKind::Inject => f.write_str("inject"),
            TemplateKind::Repair => f.write_str("repair"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerificationPhase {
    Sensing,
    Switching,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationStep {
    pub phase: VerificationPhase,
    pub description: String,
}

/// One executable test: fail (or restore) the targets, then verify the
/// sensing and switching mechanisms while the layer is expected to keep
/// delivering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestTemplate {
    pub id: String,
    pub layer: u8,
    pub kind: TemplateKind,
    pub targets: BTreeSet<ComponentId>,
    pub steps: Vec<VerificationStep>,
    pub expected_state: OpState,
}

/// A candidate target set dropped from the plan, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedTargets {
    pub layer: u8,
    pub targets: BTreeSet<ComponentId>,
    pub reason: String,
}

/// Template count for one layer, computed two ways: from the recovery
/// group membership, and from component counts as
/// 2(|components| - |SPOFs| - |access points|). The two agree whenever
/// every non-SPOF, non-access-point component sits in some clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerBound {
    pub layer: u8,
    pub from_group_members: u64,
    pub from_component_counts: u64,
}

impl LayerBound {
    pub fn agree(&self) -> bool {
        self.from_group_members == self.from_component_counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanBounds {
    pub per_layer: Vec<LayerBound>,
    /// Sum over layers of 2(|components| - 1): the worst case for
    /// single-fault campaigns that ignore the group structure.
    pub single_fault_upper: u64,
    /// Sum over layers of 2(|components| - 1)^2, the double-fault
    /// analogue.
    pub double_fault_upper: u64,
}

impl PlanBounds {
    pub fn total_from_groups(&self) -> u64 {
        self.per_layer.iter().map(|b| b.from_group_members).sum()
    }

    /// Layers where the two bound computations disagree.
    pub fn mismatched_layers(&self) -> Vec<u8> {
        self.per_layer
            .iter()
            .filter(|b| !b.agree())
            .map(|b| b.layer)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestPlan {
    pub model: String,
    /// Maximum number of simultaneous injected faults: 1 or 2.
    pub tolerance: u8,
    pub templates: Vec<TestTemplate>,
    pub per_layer_counts: BTreeMap<u8, usize>,
    pub total: usize,
    pub bounds: PlanBounds,
    pub excluded: Vec<ExcludedTargets>,
    pub notes: Vec<String>,
}

impl TestPlan {
    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Layers eligible for fault injection: everything below the functional
/// layer, capped at the model depth.
fn plannable_layers(model: &LayeredModel) -> u8 {
    model.depth().min(3)
}

fn joined(targets: &BTreeSet<ComponentId>, separator: &str) -> String {
    targets
        .iter()
        .map(ComponentId::to_string)
        .collect::<Vec<_>>()
        .join(separator)
}

fn template_pair(layer: u8, targets: &BTreeSet<ComponentId>) -> [TestTemplate; 2] {
    let spoken = joined(targets, " and ");
    let suffix = joined(targets, "+");
    let inject = TestTemplate {
        id: format!("L{layer}-inject-{suffix}"),
        layer,
        kind: TemplateKind::Inject,
        targets: targets.clone(),
        steps: vec![
            VerificationStep {
                phase: VerificationPhase::Sensing,
                description: format!(
                    "confirm monitoring detects and reports the failure of {spoken}"
                ),
            },
            VerificationStep {
                phase: VerificationPhase::Switching,
                description: format!(
                    "confirm redundant capacity takes over and layer {layer} service delivery stays operational"
                ),
            },
        ],
        expected_state: OpState::Operational,
    };
    let repair = TestTemplate {
        id: format!("L{layer}-repair-{suffix}"),
        layer,
        kind: TemplateKind::Repair,
        targets: targets.clone(),
        steps: vec![
            VerificationStep {
                phase: VerificationPhase::Sensing,
                description: format!(
                    "confirm monitoring detects and reports the recovery of {spoken}"
                ),
            },
            VerificationStep {
                phase: VerificationPhase::Switching,
                description: "confirm the initial topology is restored (if necessary)".to_owned(),
            },
        ],
        expected_state: OpState::Operational,
    };
    [inject, repair]
}

/// True when the layer formula still holds with exactly `targets`
/// failed.
fn survives(cnf: &MinimalCnf, targets: &BTreeSet<ComponentId>) -> bool {
    let assignment = Assignment::with_failures(cnf.variables(), targets);
    cnf.evaluate(&assignment)
        .map(|s| s.is_operational())
        .unwrap_or(false)
}

fn group_members(profile: &DependabilityProfile) -> BTreeSet<ComponentId> {
    profile
        .groups
        .iter()
        .flat_map(|g| g.members.iter().cloned())
        .collect()
}

fn build_plan(
    model: &LayeredModel,
    cnfs: &BTreeMap<u8, MinimalCnf>,
    profiles: &BTreeMap<u8, DependabilityProfile>,
    tolerance: u8,
) -> TestPlan {
    let top = plannable_layers(model);
    let mut templates = Vec::new();
    let mut excluded = Vec::new();
    let mut per_layer_counts: BTreeMap<u8, usize> = BTreeMap::new();
    let mut notes = Vec::new();

    for (&layer, profile) in profiles.range(1..=top) {
        let Some(cnf) = cnfs.get(&layer) else { continue };
        per_layer_counts.insert(layer, 0);

        let members = group_members(profile);
        let mut target_sets: BTreeSet<BTreeSet<ComponentId>> = BTreeSet::new();
        for v in &members {
            let singleton = BTreeSet::from([v.clone()]);
            if survives(cnf, &singleton) {
                target_sets.insert(singleton);
            } else {
                excluded.push(ExcludedTargets {
                    layer,
                    targets: singleton,
                    reason: "single failure is not survivable".to_owned(),
                });
            }
        }
        if tolerance >= 2 {
            for u in &members {
                for v in members.range::<ComponentId, _>((
                    std::ops::Bound::Excluded(u),
                    std::ops::Bound::Unbounded,
                )) {
                    let pair = BTreeSet::from([u.clone(), v.clone()]);
                    if survives(cnf, &pair) {
                        target_sets.insert(pair);
                    } else {
                        excluded.push(ExcludedTargets {
                            layer,
                            targets: pair,
                            reason: "not survivable".to_owned(),
                        });
                    }
                }
            }
        }

        for targets in &target_sets {
            templates.extend(template_pair(layer, targets));
        }
        per_layer_counts.insert(layer, target_sets.len() * 2);

        if !profile.spof.is_empty() {
            notes.push(format!(
                "layer {layer} single points of failure ({}) are not injection targets; plan disaster recovery for them",
                joined(&profile.spof, ", ")
            ));
        }
        if let Tolerance::Level(level) = profile.tolerance {
            if u32::from(tolerance) > level {
                notes.push(format!(
                    "layer {layer} tolerates {level} arbitrary simultaneous failure(s), \
                     below the requested {tolerance}; non-survivable combinations are excluded"
                ));
            }
        }
    }

    if templates.is_empty() {
        notes.insert(
            0,
            "no recovery groups; see the single-point-of-failure notes for disaster-recovery scope"
                .to_owned(),
        );
    }

    let total = templates.len();
    TestPlan {
        model: model.name.clone(),
        tolerance,
        templates,
        per_layer_counts,
        total,
        bounds: plan_size_bounds(model, profiles),
        excluded,
        notes,
    }
}

/// One inject/repair pair per recovery-group member, on every layer
/// below the functional one.
pub fn generate_single_fault_plan(
    model: &LayeredModel,
    cnfs: &BTreeMap<u8, MinimalCnf>,
    profiles: &BTreeMap<u8, DependabilityProfile>,
) -> TestPlan {
    build_plan(model, cnfs, profiles, 1)
}

/// The single-fault plan plus an inject/repair pair for every unordered
/// member pair whose joint failure the layer survives.
pub fn generate_double_fault_plan(
    model: &LayeredModel,
    cnfs: &BTreeMap<u8, MinimalCnf>,
    profiles: &BTreeMap<u8, DependabilityProfile>,
) -> TestPlan {
    build_plan(model, cnfs, profiles, 2)
}

/// Expected single-fault template counts per layer, each computed two
/// ways, plus the structure-blind upper bounds.
pub fn plan_size_bounds(
    model: &LayeredModel,
    profiles: &BTreeMap<u8, DependabilityProfile>,
) -> PlanBounds {
    let top = plannable_layers(model);
    let mut per_layer = Vec::new();
    let mut single_upper = 0u64;
    let mut double_upper = 0u64;
    for layer in model.layers.iter().filter(|l| l.index <= top) {
        let vertex_count = layer.components.len() as u64;
        let slack = vertex_count.saturating_sub(1);
        single_upper += 2 * slack;
        double_upper += 2 * slack * slack;

        let Some(profile) = profiles.get(&layer.index) else { continue };
        let from_group_members = 2 * group_members(profile).len() as u64;
        let protected = vertex_count
            .saturating_sub(profile.spof.len() as u64)
            .saturating_sub(layer.access_points.len() as u64);
        per_layer.push(LayerBound {
            layer: layer.index,
            from_group_members,
            from_component_counts: 2 * protected,
        });
    }
    PlanBounds {
        per_layer,
        single_fault_upper: single_upper,
        double_fault_upper: double_upper,
    }
}
