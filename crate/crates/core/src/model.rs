//! The layered system model: stacked layers of components joined by
//! intra-layer links, with each upper-layer component projected onto the
//! lower-layer components that realize it.
//!
//! Layer 1 is always the physical layer; indices ascend toward the
//! functional layer (at most 4 layers). Requirements name the data flows
//! the system must provide; every analysis in this crate starts from a
//! validated [`LayeredModel`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a component, unique across the whole model.
///
/// Ordering is plain byte-wise string ordering; every deterministic
/// ordering in this crate derives from it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(String);

impl ComponentId {
    pub fn new(id: impl Into<String>) -> Self {
        ComponentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for ComponentId {
    fn from(s: &str) -> Self {
        ComponentId(s.to_owned())
    }
}

impl From<String> for ComponentId {
    fn from(s: String) -> Self {
        ComponentId(s)
    }
}

/// A component placed on one layer. `kind` is a free-form tag carried
/// through to reports; the analysis never interprets it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: ComponentId,
    pub kind: String,
}

/// An undirected intra-layer link, stored with endpoints in sorted order
/// so that `(a, b)` and `(b, a)` compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link(ComponentId, ComponentId);

impl Link {
    pub fn new(a: ComponentId, b: ComponentId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }

    pub fn endpoints(&self) -> (&ComponentId, &ComponentId) {
        (&self.0, &self.1)
    }
}

/// One layer of the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    /// 1-based position in the stack; 1 is the physical layer.
    pub index: u8,
    pub name: String,
    pub components: Vec<Component>,
    pub links: BTreeSet<Link>,
    /// End-user attachment points. They are assumed dependable by
    /// definition and are excluded from prevention sets and test plans.
    pub access_points: BTreeSet<ComponentId>,
}

impl Layer {
    pub fn component_ids(&self) -> BTreeSet<ComponentId> {
        self.components.iter().map(|c| c.id.clone()).collect()
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.components.iter().any(|c| &c.id == id)
    }
}

/// Maps every component of layer `upper` onto the set of layer `lower`
/// components that realize it. `upper` must equal `lower + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub upper: u8,
    pub lower: u8,
    pub map: BTreeMap<ComponentId, BTreeSet<ComponentId>>,
}

/// A data-flow requirement: `source` must be able to reach `destination`
/// on the layer where both are named (`anchor_layer`). End-user
/// requirements anchor at the top layer; technical requirements derived
/// from them anchor lower. Several entries may share a name; they are
/// analyzed as one named requirement with multiple endpoint pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub name: String,
    pub anchor_layer: u8,
    pub source: ComponentId,
    pub destination: ComponentId,
    /// Opaque metadata (bandwidth, protocol, ...). Carried through to
    /// reports unchanged.
    pub characteristics: BTreeMap<String, serde_json::Value>,
}

/// The complete multi-layer model.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredModel {
    pub name: String,
    /// Sorted by `index` ascending; indices are contiguous starting at 1.
    pub layers: Vec<Layer>,
    pub projections: Vec<Projection>,
    /// Operational probabilities for components that have one. Components
    /// absent from this map are treated as perfectly dependable (p = 1).
    pub probabilities: BTreeMap<ComponentId, f64>,
    pub requirements: Vec<Requirement>,
}

/// Errors raised while reading a model document. Structural problems that
/// do not prevent building the in-memory model are reported by
/// [`validate_model`] instead.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate component id {id}")]
    DuplicateComponent { id: ComponentId },
    #[error("probability out of range for {id}: {value} (must be in (0, 1])")]
    ProbabilityOutOfRange { id: ComponentId, value: f64 },
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("layer {requested} does not exist (model has layers 1..={max})")]
    LayerOutOfRange { requested: u8, max: u8 },
}

// === document schema ===
//
// The on-disk JSON form. Kept separate from the in-memory types so the
// wire format can stay stable while the internal representation moves.
// Unknown keys are rejected everywhere.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    name: String,
    layers: Vec<LayerDocument>,
    projections: Vec<ProjectionDocument>,
    #[serde(default)]
    probabilities: BTreeMap<ComponentId, f64>,
    #[serde(default)]
    requirements: Vec<RequirementDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDocument {
    index: u8,
    name: String,
    components: Vec<Component>,
    #[serde(default)]
    links: Vec<(ComponentId, ComponentId)>,
    #[serde(default)]
    access_points: Vec<ComponentId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionDocument {
    upper: u8,
    lower: u8,
    map: BTreeMap<ComponentId, Vec<ComponentId>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequirementDocument {
    name: String,
    /// Layer on which `source` and `destination` are named.
    layer: u8,
    source: ComponentId,
    destination: ComponentId,
    #[serde(default)]
    characteristics: BTreeMap<String, serde_json::Value>,
}

/// Parses a UTF-8 JSON model document.
///
/// Rejects malformed JSON and unknown keys with positions, duplicate
/// component ids, and probabilities outside `(0, 1]`. Everything else is
/// left to [`validate_model`] so a caller gets the full violation list in
/// one pass rather than one error at a time.
pub fn parse_model(input: &str) -> Result<LayeredModel, ParseError> {
    let doc: ModelDocument = serde_json::from_str(input).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut seen = BTreeSet::new();
    for layer in &doc.layers {
        for component in &layer.components {
            if !seen.insert(component.id.clone()) {
                return Err(ParseError::DuplicateComponent {
                    id: component.id.clone(),
                });
            }
        }
    }
    for (id, &value) in &doc.probabilities {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(ParseError::ProbabilityOutOfRange {
                id: id.clone(),
                value,
            });
        }
    }

    let mut layers: Vec<Layer> = doc
        .layers
        .into_iter()
        .map(|l| Layer {
            index: l.index,
            name: l.name,
            components: {
                let mut cs = l.components;
                cs.sort_by(|a, b| a.id.cmp(&b.id));
                cs
            },
            links: l.links.into_iter().map(|(a, b)| Link::new(a, b)).collect(),
            access_points: l.access_points.into_iter().collect(),
        })
        .collect();
    layers.sort_by_key(|l| l.index);

    let mut projections: Vec<Projection> = doc
        .projections
        .into_iter()
        .map(|p| Projection {
            upper: p.upper,
            lower: p.lower,
            map: p
                .map
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
        })
        .collect();
    projections.sort_by_key(|p| (p.upper, p.lower));

    Ok(LayeredModel {
        name: doc.name,
        layers,
        projections,
        probabilities: doc.probabilities,
        requirements: doc
            .requirements
            .into_iter()
            .map(|r| Requirement {
                name: r.name,
                anchor_layer: r.layer,
                source: r.source,
                destination: r.destination,
                characteristics: r.characteristics,
            })
            .collect(),
    })
}

impl LayeredModel {
    /// Number of layers.
    pub fn depth(&self) -> u8 {
        self.layers.len() as u8
    }

    pub fn layer(&self, index: u8) -> Result<&Layer, ModelError> {
        self.layers
            .iter()
            .find(|l| l.index == index)
            .ok_or(ModelError::LayerOutOfRange {
                requested: index,
                max: self.depth(),
            })
    }

    pub fn projection(&self, upper: u8) -> Option<&Projection> {
        self.projections
            .iter()
            .find(|p| p.upper == upper && p.lower + 1 == upper)
    }

    /// Operational probability of a component; 1.0 when none was declared.
    pub fn probability_of(&self, id: &ComponentId) -> f64 {
        self.probabilities.get(id).copied().unwrap_or(1.0)
    }

    /// Finds the layer a component lives on.
    pub fn layer_of(&self, id: &ComponentId) -> Option<u8> {
        self.layers
            .iter()
            .find(|l| l.contains(id))
            .map(|l| l.index)
    }

    /// Canonical JSON rendering: sorted layers, components, links and map
    /// keys, requirements ordered by (name, layer, source, destination).
    /// Parsing the output reproduces the same model, and re-serializing a
    /// parsed canonical document is byte-identical.
    pub fn to_canonical_json(&self) -> String {
        let mut requirements: Vec<&Requirement> = self.requirements.iter().collect();
        requirements.sort_by_key(|r| {
            (
                r.name.clone(),
                r.anchor_layer,
                r.source.clone(),
                r.destination.clone(),
            )
        });
        let doc = ModelDocument {
            name: self.name.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    index: l.index,
                    name: l.name.clone(),
                    components: l.components.clone(),
                    links: l
                        .links
                        .iter()
                        .map(|link| (link.0.clone(), link.1.clone()))
                        .collect(),
                    access_points: l.access_points.iter().cloned().collect(),
                })
                .collect(),
            projections: self
                .projections
                .iter()
                .map(|p| ProjectionDocument {
                    upper: p.upper,
                    lower: p.lower,
                    map: p
                        .map
                        .iter()
                        .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                        .collect(),
                })
                .collect(),
            probabilities: self.probabilities.clone(),
            requirements: requirements
                .into_iter()
                .map(|r| RequirementDocument {
                    name: r.name.clone(),
                    layer: r.anchor_layer,
                    source: r.source.clone(),
                    destination: r.destination.clone(),
                    characteristics: r.characteristics.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("model serializes");
        out.push('\n');
        out
    }
}

// === validation ===

/// One structural violation found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("model must have 2 to 4 layers, found {count}")]
    LayerCountOutOfRange { count: usize },
    #[error("layer indices must be contiguous starting at 1, found {found:?}")]
    NonContiguousLayers { found: Vec<u8> },
    #[error("component {id} appears in more than one layer")]
    DuplicateComponent { id: ComponentId },
    #[error("layer {layer}: link endpoint {component} is not a component of the layer")]
    LinkEndpointMissing { layer: u8, component: ComponentId },
    #[error("layer {layer}: link from {component} to itself")]
    SelfLoop { layer: u8, component: ComponentId },
    #[error("layer {layer}: access point {component} is not a component of the layer")]
    AccessPointMissing { layer: u8, component: ComponentId },
    #[error("projection {upper}->{lower} does not connect adjacent layers")]
    NonAdjacentProjection { upper: u8, lower: u8 },
    #[error("no projection from layer {upper} onto layer {lower}")]
    MissingProjection { upper: u8, lower: u8 },
    #[error("more than one projection from layer {upper} onto layer {lower}")]
    DuplicateProjection { upper: u8, lower: u8 },
    #[error("projection {upper}->{lower}: {component} is not a component of layer {upper}")]
    ProjectionSourceMissing {
        upper: u8,
        lower: u8,
        component: ComponentId,
    },
    #[error("projection {upper}->{lower}: image {component} is not a component of layer {lower}")]
    ProjectionImageMissing {
        upper: u8,
        lower: u8,
        component: ComponentId,
    },
    #[error("component {component} on layer {layer} has no projection onto layer {lower}")]
    UnmappedComponent {
        layer: u8,
        lower: u8,
        component: ComponentId,
    },
    #[error("probability given for unknown component {id}")]
    ProbabilityForUnknownComponent { id: ComponentId },
    #[error("probability out of range for {id}: {value} (must be in (0, 1])")]
    ProbabilityOutOfRange { id: ComponentId, value: f64 },
    #[error("requirement {requirement}: anchor layer {layer} does not exist")]
    RequirementLayerMissing { requirement: String, layer: u8 },
    #[error("requirement {requirement}: {component} is not a component of layer {layer}")]
    RequirementEndpointMissing {
        requirement: String,
        layer: u8,
        component: ComponentId,
    },
    #[error("requirement {requirement}: source and destination are both {component}")]
    RequirementEndpointsEqual {
        requirement: String,
        component: ComponentId,
    },
}

/// Outcome of structural validation. An empty report means the model
/// satisfies every invariant the analyses rely on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "model valid")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

/// Checks every structural invariant and reports all violations at once.
pub fn validate_model(model: &LayeredModel) -> ValidationReport {
    let mut violations = Vec::new();

    let count = model.layers.len();
    if !(2..=4).contains(&count) {
        violations.push(Violation::LayerCountOutOfRange { count });
    }
    let indices: Vec<u8> = model.layers.iter().map(|l| l.index).collect();
    let contiguous = indices
        .iter()
        .enumerate()
        .all(|(i, &idx)| idx as usize == i + 1);
    if !contiguous {
        violations.push(Violation::NonContiguousLayers { found: indices });
    }

    // Component placement: globally unique ids, links and access points
    // confined to their own layer.
    let mut owner: BTreeMap<ComponentId, u8> = BTreeMap::new();
    for layer in &model.layers {
        for component in &layer.components {
            if owner.insert(component.id.clone(), layer.index).is_some() {
                violations.push(Violation::DuplicateComponent {
                    id: component.id.clone(),
                });
            }
        }
    }
    for layer in &model.layers {
        let ids = layer.component_ids();
        for link in &layer.links {
            let (a, b) = link.endpoints();
            if a == b {
                violations.push(Violation::SelfLoop {
                    layer: layer.index,
                    component: a.clone(),
                });
            }
            for end in [a, b] {
                if !ids.contains(end) {
                    violations.push(Violation::LinkEndpointMissing {
                        layer: layer.index,
                        component: end.clone(),
                    });
                }
            }
        }
        for ap in &layer.access_points {
            if !ids.contains(ap) {
                violations.push(Violation::AccessPointMissing {
                    layer: layer.index,
                    component: ap.clone(),
                });
            }
        }
    }

    // Projections: exactly one per adjacent pair, domains and images on
    // the right layers, and no upper component left without a realization.
    for p in &model.projections {
        if p.upper != p.lower + 1 || model.layer(p.upper).is_err() || model.layer(p.lower).is_err()
        {
            violations.push(Violation::NonAdjacentProjection {
                upper: p.upper,
                lower: p.lower,
            });
        }
    }
    for upper in 2..=model.depth() {
        let lower = upper - 1;
        let matching: Vec<&Projection> = model
            .projections
            .iter()
            .filter(|p| p.upper == upper && p.lower == lower)
            .collect();
        match matching.len() {
            0 => {
                violations.push(Violation::MissingProjection { upper, lower });
                continue;
            }
            1 => {}
            _ => violations.push(Violation::DuplicateProjection { upper, lower }),
        }
        let projection = matching[0];
        let upper_ids = match model.layer(upper) {
            Ok(l) => l.component_ids(),
            Err(_) => continue,
        };
        let lower_ids = match model.layer(lower) {
            Ok(l) => l.component_ids(),
            Err(_) => continue,
        };
        for (source, image) in &projection.map {
            if !upper_ids.contains(source) {
                violations.push(Violation::ProjectionSourceMissing {
                    upper,
                    lower,
                    component: source.clone(),
                });
            }
            for target in image {
                if !lower_ids.contains(target) {
                    violations.push(Violation::ProjectionImageMissing {
                        upper,
                        lower,
                        component: target.clone(),
                    });
                }
            }
        }
        for id in &upper_ids {
            let image_empty = projection.map.get(id).is_none_or(|im| im.is_empty());
            if image_empty {
                violations.push(Violation::UnmappedComponent {
                    layer: upper,
                    lower,
                    component: id.clone(),
                });
            }
        }
    }

    for (id, &value) in &model.probabilities {
        if !owner.contains_key(id) {
            violations.push(Violation::ProbabilityForUnknownComponent { id: id.clone() });
        }
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            violations.push(Violation::ProbabilityOutOfRange {
                id: id.clone(),
                value,
            });
        }
    }

    for r in &model.requirements {
        let Ok(layer) = model.layer(r.anchor_layer) else {
            violations.push(Violation::RequirementLayerMissing {
                requirement: r.name.clone(),
                layer: r.anchor_layer,
            });
            continue;
        };
        for end in [&r.source, &r.destination] {
            if !layer.contains(end) {
                violations.push(Violation::RequirementEndpointMissing {
                    requirement: r.name.clone(),
                    layer: r.anchor_layer,
                    component: end.clone(),
                });
            }
        }
        if r.source == r.destination {
            violations.push(Violation::RequirementEndpointsEqual {
                requirement: r.name.clone(),
                component: r.source.clone(),
            });
        }
    }

    ValidationReport { violations }
}

// === layer graphs ===

/// Immutable adjacency view over one layer. Vertices without links are
/// present with empty neighbor sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerGraph {
    layer: u8,
    adjacency: BTreeMap<ComponentId, BTreeSet<ComponentId>>,
}

impl LayerGraph {
    pub fn layer(&self) -> u8 {
        self.layer
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.adjacency.contains_key(id)
    }

    /// Neighbors in sorted order; empty for isolated or unknown vertices.
    pub fn neighbors(&self, id: &ComponentId) -> impl Iterator<Item = &ComponentId> {
        self.adjacency.get(id).into_iter().flatten()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &ComponentId> {
        self.adjacency.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        let degree_sum: usize = self.adjacency.values().map(|n| n.len()).sum();
        degree_sum / 2
    }
}

impl LayeredModel {
    /// Adjacency view over layer `n`. Calls with the same argument return
    /// equal graphs; the view cannot mutate the model.
    pub fn layer_graph(&self, n: u8) -> Result<LayerGraph, ModelError> {
        let layer = self.layer(n)?;
        let mut adjacency: BTreeMap<ComponentId, BTreeSet<ComponentId>> = layer
            .components
            .iter()
            .map(|c| (c.id.clone(), BTreeSet::new()))
            .collect();
        for link in &layer.links {
            let (a, b) = link.endpoints();
            if a == b || !adjacency.contains_key(a) || !adjacency.contains_key(b) {
                continue;
            }
            adjacency.get_mut(a).unwrap().insert(b.clone());
            adjacency.get_mut(b).unwrap().insert(a.clone());
        }
        Ok(LayerGraph {
            layer: n,
            adjacency,
        })
    }
}
