//! Requirement coverage: which data flows realize each requirement on
//! each layer.
//!
//! A requirement names its endpoints on one layer. For every layer below,
//! the endpoints are projected down (an endpoint may be realized by
//! several lower components, so projection fans out) and every data flow
//! between a projected source and a projected destination is enumerated.
//!
//! A data flow is a simple path that transits only through infrastructure:
//! components that are themselves flow endpoints on that layer (hosts)
//! never appear in the interior of a path. Without that rule a path could
//! route one workstation's traffic through another workstation, which no
//! real network does.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{ComponentId, LayerGraph, LayeredModel, Requirement};

/// Paths per endpoint pair before enumeration gives up.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// A source/destination pair a requirement induces on one layer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EndpointPair {
    pub requirement: String,
    pub layer: u8,
    pub source: ComponentId,
    pub destination: ComponentId,
}

/// An ordered vertex sequence; equality and ordering are element-wise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Path(pub Vec<ComponentId>);

impl Path {
    pub fn first(&self) -> &ComponentId {
        self.0.first().expect("paths are never empty")
    }

    pub fn last(&self) -> &ComponentId {
        self.0.last().expect("paths are never empty")
    }

    pub fn components(&self) -> &[ComponentId] {
        &self.0
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// All data flows of one named requirement on one layer, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSet {
    pub requirement: String,
    pub layer: u8,
    pub paths: Vec<Path>,
}

/// Flows for every (requirement, layer) cell, keyed by requirement name.
/// Requirement entries sharing a name are merged into one cell per layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageMap {
    cells: BTreeMap<(String, u8), PathSet>,
}

impl CoverageMap {
    pub fn get(&self, requirement: &str, layer: u8) -> Option<&PathSet> {
        self.cells.get(&(requirement.to_owned(), layer))
    }

    /// Cells sorted by requirement name, then layer ascending.
    pub fn iter(&self) -> impl Iterator<Item = &PathSet> {
        self.cells.values()
    }

    pub fn requirement_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.cells.keys().map(|(n, _)| n.as_str()).collect();
        names.dedup();
        names
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CoverageError {
    #[error("layer {layer} is above the anchor layer {anchor} of requirement {requirement}")]
    LayerAboveAnchor {
        requirement: String,
        layer: u8,
        anchor: u8,
    },
    #[error("layer {layer} does not exist")]
    NoSuchLayer { layer: u8 },
    #[error("no projection from layer {upper} onto layer {lower}")]
    MissingProjection { upper: u8, lower: u8 },
    #[error("{component} on layer {layer} has an empty projection image; endpoint cannot be projected")]
    UnmappedEndpoint { component: ComponentId, layer: u8 },
    #[error("vertex {component} is not in the graph")]
    UnknownVertex { component: ComponentId },
    #[error("source and destination are both {component}")]
    SameEndpoints { component: ComponentId },
    #[error("path explosion between {from} and {to}: more than {cap} simple paths")]
    PathExplosion {
        from: ComponentId,
        to: ComponentId,
        cap: usize,
    },
    #[error(
        "requirement {requirement} is unsatisfiable on layer {layer}: no path from {from} to {to}"
    )]
    Unsatisfiable {
        requirement: String,
        layer: u8,
        from: ComponentId,
        to: ComponentId,
    },
}

/// Projects a requirement's endpoints down to layer `n`.
///
/// At the anchor layer this is the declared pair itself. Below it, the
/// source image and destination image are composed through each
/// intermediate projection and combined as a Cartesian product; pairs
/// whose two sides coincide are dropped (a component trivially reaches
/// itself). Result is sorted by (source, destination).
pub fn project_endpoints(
    model: &LayeredModel,
    requirement: &Requirement,
    n: u8,
) -> Result<Vec<EndpointPair>, CoverageError> {
    if n > requirement.anchor_layer {
        return Err(CoverageError::LayerAboveAnchor {
            requirement: requirement.name.clone(),
            layer: n,
            anchor: requirement.anchor_layer,
        });
    }
    if n == 0 || model.layer(n).is_err() {
        return Err(CoverageError::NoSuchLayer { layer: n });
    }

    let mut sources = BTreeSet::from([requirement.source.clone()]);
    let mut destinations = BTreeSet::from([requirement.destination.clone()]);
    let mut upper = requirement.anchor_layer;
    while upper > n {
        let projection = model
            .projection(upper)
            .ok_or(CoverageError::MissingProjection {
                upper,
                lower: upper - 1,
            })?;
        for set in [&mut sources, &mut destinations] {
            let mut image = BTreeSet::new();
            for component in set.iter() {
                let targets = projection.map.get(component).filter(|t| !t.is_empty());
                match targets {
                    Some(targets) => image.extend(targets.iter().cloned()),
                    None => {
                        return Err(CoverageError::UnmappedEndpoint {
                            component: component.clone(),
                            layer: upper,
                        })
                    }
                }
            }
            *set = image;
        }
        upper -= 1;
    }

    let mut pairs = Vec::new();
    for s in &sources {
        for d in &destinations {
            if s != d {
                pairs.push(EndpointPair {
                    requirement: requirement.name.clone(),
                    layer: n,
                    source: s.clone(),
                    destination: d.clone(),
                });
            }
        }
    }
    Ok(pairs)
}

/// Every simple path from `src` to `dst`, in lexicographic order.
///
/// Depth-first search expanding neighbors in sorted id order; emission
/// order is therefore the lexicographic order of the paths themselves.
/// Returns an empty list when the endpoints are disconnected, and a
/// path-explosion error once more than `cap` paths exist.
pub fn enumerate_simple_paths(
    graph: &LayerGraph,
    src: &ComponentId,
    dst: &ComponentId,
    cap: usize,
) -> Result<Vec<Path>, CoverageError> {
    enumerate_flow_paths(graph, src, dst, &BTreeSet::new(), cap)
}

/// Like [`enumerate_simple_paths`], but vertices in `no_transit` may not
/// appear in the interior of a path. `src` and `dst` are exempt: the rule
/// restricts what a flow may pass *through*, not where it may end.
pub fn enumerate_flow_paths(
    graph: &LayerGraph,
    src: &ComponentId,
    dst: &ComponentId,
    no_transit: &BTreeSet<ComponentId>,
    cap: usize,
) -> Result<Vec<Path>, CoverageError> {
    for v in [src, dst] {
        if !graph.contains(v) {
            return Err(CoverageError::UnknownVertex {
                component: v.clone(),
            });
        }
    }
    if src == dst {
        return Err(CoverageError::SameEndpoints {
            component: src.clone(),
        });
    }

    let mut paths = Vec::new();
    let mut trail = vec![src.clone()];
    let mut on_trail = BTreeSet::from([src.clone()]);
    let mut stack = vec![graph.neighbors(src)];

    while let Some(frontier) = stack.last_mut() {
        let Some(next) = frontier.next() else {
            stack.pop();
            if let Some(v) = trail.pop() {
                on_trail.remove(&v);
            }
            continue;
        };
        if on_trail.contains(next) {
            continue;
        }
        if next == dst {
            if paths.len() == cap {
                return Err(CoverageError::PathExplosion {
                    from: src.clone(),
                    to: dst.clone(),
                    cap,
                });
            }
            let mut found = trail.clone();
            found.push(dst.clone());
            paths.push(Path(found));
            continue;
        }
        if no_transit.contains(next) {
            continue;
        }
        trail.push(next.clone());
        on_trail.insert(next.clone());
        stack.push(graph.neighbors(next));
    }
    Ok(paths)
}

/// Union of all projected endpoint components on layer `n`, across every
/// requirement that reaches that layer. These are the layer's hosts: the
/// vertices a data flow may start or end at but never transit.
pub(crate) fn layer_hosts(
    model: &LayeredModel,
    n: u8,
) -> Result<BTreeSet<ComponentId>, CoverageError> {
    let mut hosts = BTreeSet::new();
    for r in &model.requirements {
        if r.anchor_layer < n {
            continue;
        }
        for pair in project_endpoints(model, r, n)? {
            hosts.insert(pair.source);
            hosts.insert(pair.destination);
        }
    }
    Ok(hosts)
}

/// Enumerates the data flows of every requirement on every layer from its
/// anchor down to the physical layer, with the default path cap.
pub fn coverage_flows(model: &LayeredModel) -> Result<CoverageMap, CoverageError> {
    coverage_flows_with_cap(model, DEFAULT_PATH_CAP)
}

/// [`coverage_flows`] with an explicit per-pair path cap.
///
/// An endpoint pair with no connecting flow makes the requirement
/// unsatisfiable on that layer and is reported as an error rather than
/// silently producing an empty cell.
pub fn coverage_flows_with_cap(
    model: &LayeredModel,
    cap: usize,
) -> Result<CoverageMap, CoverageError> {
    let mut merged: BTreeMap<(String, u8), BTreeSet<Path>> = BTreeMap::new();
    let mut hosts_by_layer: BTreeMap<u8, BTreeSet<ComponentId>> = BTreeMap::new();
    let mut graphs: BTreeMap<u8, LayerGraph> = BTreeMap::new();

    for r in &model.requirements {
        for n in (1..=r.anchor_layer).rev() {
            if let Entry::Vacant(slot) = hosts_by_layer.entry(n) {
                slot.insert(layer_hosts(model, n)?);
                graphs.insert(
                    n,
                    model
                        .layer_graph(n)
                        .map_err(|_| CoverageError::NoSuchLayer { layer: n })?,
                );
            }
            let hosts = &hosts_by_layer[&n];
            let graph = &graphs[&n];
            for pair in project_endpoints(model, r, n)? {
                let paths = enumerate_flow_paths(graph, &pair.source, &pair.destination, hosts, cap)?;
                if paths.is_empty() {
                    return Err(CoverageError::Unsatisfiable {
                        requirement: r.name.clone(),
                        layer: n,
                        from: pair.source,
                        to: pair.destination,
                    });
                }
                merged
                    .entry((r.name.clone(), n))
                    .or_default()
                    .extend(paths);
            }
        }
    }

    let cells = merged
        .into_iter()
        .map(|((name, layer), paths)| {
            let set = PathSet {
                requirement: name.clone(),
                layer,
                paths: paths.into_iter().collect(),
            };
            ((name, layer), set)
        })
        .collect();
    Ok(CoverageMap { cells })
}

/// Groups a layer's endpoint pairs by (requirement name, source) and
/// unions the destinations. Each group is one delivery obligation: the
/// source must reach at least one of the destinations, and all groups
/// must hold at once.
pub(crate) fn subsystem_endpoints(
    model: &LayeredModel,
    n: u8,
) -> Result<BTreeMap<(String, ComponentId), BTreeSet<ComponentId>>, CoverageError> {
    let mut groups: BTreeMap<(String, ComponentId), BTreeSet<ComponentId>> = BTreeMap::new();
    for r in &model.requirements {
        if r.anchor_layer < n {
            continue;
        }
        for pair in project_endpoints(model, r, n)? {
            groups
                .entry((pair.requirement, pair.source))
                .or_default()
                .insert(pair.destination);
        }
    }
    Ok(groups)
}
