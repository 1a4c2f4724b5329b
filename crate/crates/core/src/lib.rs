//! Dependability analysis for layered system models.
//!
//! A model stacks up to four layers (physical, logical, service,
//! functional) of components with intra-layer links, projects upper-layer
//! components onto the lower-layer components that realize them, and names
//! the data-flow requirements the system must provide. From that, this
//! crate:
//!
//! * enumerates the data flows covering each requirement on each layer,
//! * folds the flows into a monotone success formula and reduces it to a
//!   minimal clause form (the prevention sets),
//! * reads off single points of failure and recovery groups, and
//!   cross-checks them against direct graph reachability,
//! * computes exact, closed-form, and limited-coverage reliability from
//!   per-component operational probabilities,
//! * derives fault-injection test plans sized by the recovery groups
//!   instead of the full component set.
//!
//! [`report::run_pipeline`] drives the whole chain; the `lamina` binary is
//! a thin CLI over it.

pub mod analysis;
pub mod coverage;
pub mod fixtures;
pub mod formula;
pub mod model;
pub mod plan;
pub mod reliability;
pub mod report;

pub use analysis::{
    extract_recovery_groups, extract_spof, tolerance_level, verify_profile_graphwise,
    DependabilityProfile, Discrepancy, QuorumError, QuorumOverrides, RecoveryGroup, Tolerance,
};
pub use coverage::{
    coverage_flows, enumerate_simple_paths, project_endpoints, CoverageError, CoverageMap,
    EndpointPair, Path, PathSet, DEFAULT_PATH_CAP,
};
pub use fixtures::{case_study, CASE_STUDY_JSON, CASE_STUDY_PATH};
pub use formula::{
    build_success_dnf, eliminate_access_points, to_minimal_cnf, Assignment, Clause, FormulaError,
    MinimalCnf, OpState, SuccessDnf, Term,
};
pub use model::{
    parse_model, validate_model, Component, ComponentId, Layer, LayerGraph, LayeredModel, Link,
    ModelError, ParseError, Projection, Requirement, ValidationReport, Violation,
};
pub use plan::{
    generate_double_fault_plan, generate_single_fault_plan, plan_size_bounds, ExcludedTargets,
    LayerBound, PlanBounds, TemplateKind, TestPlan, TestTemplate, VerificationPhase,
    VerificationStep,
};
pub use reliability::{
    closed_form_reliability, combination_counts, deviation, deviation_curve, exact_reliability,
    limited_coverage, truth_table, ClosedForm, CombinationCounts, CurvePoint, ReliabilityError,
    ReliabilityReport, TruthTable, TruthTableRow, TRUTH_TABLE_VAR_CAP,
};
pub use report::{
    render, run_pipeline, AnalysisBundle, Format, LayerFormulas, PipelineError, PipelineOptions,
    RenderError, RenderOptions, Section,
};
