//! End-to-end analysis pipeline and report rendering.
//!
//! [`run_pipeline`] takes a model document through parsing, validation,
//! flow coverage, formula reduction, dependability profiling with the
//! graph-wise cross-check, reliability assessment, and test-plan
//! generation. The resulting [`AnalysisBundle`] is rendered per section
//! in text, JSON, or CSV. Rendering is pure: two invocations on the same
//! bundle produce byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::json;

use crate::analysis::{verify_profile_graphwise, DependabilityProfile, Discrepancy, QuorumError};
use crate::coverage::{coverage_flows_with_cap, CoverageError, CoverageMap, DEFAULT_PATH_CAP};
use crate::formula::{
    build_success_dnf, eliminate_access_points, to_minimal_cnf, FormulaError, MinimalCnf,
    SuccessDnf,
};
use crate::model::{parse_model, validate_model, LayeredModel, ParseError, ValidationReport};
use crate::plan::{
    generate_double_fault_plan, generate_single_fault_plan, TemplateKind, TestPlan,
};
use crate::reliability::{ClosedForm, ReliabilityError, ReliabilityReport};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("model validation failed\n{0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Quorum(#[from] QuorumError),
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
    #[error("clause analysis disagrees with graph reachability:\n{}", format_discrepancies(.0))]
    InvariantBreach(Vec<Discrepancy>),
}

fn format_discrepancies(found: &[Discrepancy]) -> String {
    found
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl PipelineError {
    /// Process exit code: 1 rejected input, 2 analysis infeasible,
    /// 3 internal cross-check failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) | PipelineError::Validation(_) => 1,
            PipelineError::Coverage(_)
            | PipelineError::Formula(_)
            | PipelineError::Quorum(_)
            | PipelineError::Reliability(_) => 2,
            PipelineError::InvariantBreach(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Per endpoint pair; exceeding it aborts the analysis.
    pub path_cap: usize,
    pub quorums: crate::analysis::QuorumOverrides,
    /// Plan depth: 1 for single-fault, 2 to add survivable pairs.
    pub tolerance: u8,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            path_cap: DEFAULT_PATH_CAP,
            quorums: crate::analysis::QuorumOverrides::new(),
            tolerance: 1,
        }
    }
}

/// Success formulas of one layer, before and after access-point
/// elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerFormulas {
    pub layer: u8,
    pub dnf: SuccessDnf,
    pub full_cnf: MinimalCnf,
    pub reduced_cnf: MinimalCnf,
}

/// Every analysis artifact for one model, all derived from the same
/// parse.
#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    pub model: LayeredModel,
    pub flows: CoverageMap,
    pub formulas: BTreeMap<u8, LayerFormulas>,
    pub profiles: BTreeMap<u8, DependabilityProfile>,
    pub reliability: BTreeMap<u8, ReliabilityReport>,
    pub plan: TestPlan,
}

/// Runs the full analysis chain on a model document.
///
/// Stops at the first infeasible stage; validation is all-or-nothing and
/// reports every violation at once. Profiles are cross-checked against
/// graph reachability before anything downstream is computed, so a
/// bundle never carries claims the topology contradicts.
pub fn run_pipeline(source: &str, options: &PipelineOptions) -> Result<AnalysisBundle, PipelineError> {
    let model = parse_model(source)?;
    let report = validate_model(&model);
    if !report.is_valid() {
        return Err(PipelineError::Validation(report));
    }

    let flows = coverage_flows_with_cap(&model, options.path_cap)?;
    let mut layers: Vec<u8> = flows.iter().map(|cell| cell.layer).collect();
    layers.sort_unstable();
    layers.dedup();

    let mut formulas = BTreeMap::new();
    let mut profiles = BTreeMap::new();
    for &n in &layers {
        let dnf = build_success_dnf(&flows, n)?;
        let full_cnf = to_minimal_cnf(&dnf);
        let reduced_cnf = eliminate_access_points(&full_cnf, &model.layer(n).expect("layer exists").access_points);
        let profile = DependabilityProfile::from_cnf(&reduced_cnf, &options.quorums)?;
        formulas.insert(
            n,
            LayerFormulas {
                layer: n,
                dnf,
                full_cnf,
                reduced_cnf,
            },
        );
        profiles.insert(n, profile);
    }

    let mut discrepancies = Vec::new();
    for (&n, profile) in &profiles {
        discrepancies.extend(verify_profile_graphwise(&model, n, profile)?);
    }
    if !discrepancies.is_empty() {
        return Err(PipelineError::InvariantBreach(discrepancies));
    }

    let mut reliability = BTreeMap::new();
    for (&n, formula) in &formulas {
        reliability.insert(
            n,
            ReliabilityReport::compute(&formula.reduced_cnf, &model.probabilities, &options.quorums)?,
        );
    }

    let cnfs: BTreeMap<u8, MinimalCnf> = formulas
        .iter()
        .map(|(&n, f)| (n, f.reduced_cnf.clone()))
        .collect();
    let plan = if options.tolerance >= 2 {
        generate_double_fault_plan(&model, &cnfs, &profiles)
    } else {
        generate_single_fault_plan(&model, &cnfs, &profiles)
    };

    Ok(AnalysisBundle {
        model,
        flows,
        formulas,
        profiles,
        reliability,
        plan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Flows,
    Expressions,
    Sets,
    Reliability,
    TruthTable,
    Plan,
    All,
}

impl Section {
    pub fn name(&self) -> &'static str {
        match self {
            Section::Flows => "flows",
            Section::Expressions => "expressions",
            Section::Sets => "sets",
            Section::Reliability => "reliability",
            Section::TruthTable => "truth-table",
            Section::Plan => "plan",
            Section::All => "all",
        }
    }
}

impl FromStr for Section {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flows" => Ok(Section::Flows),
            "expressions" => Ok(Section::Expressions),
            "sets" => Ok(Section::Sets),
            "reliability" => Ok(Section::Reliability),
            "truth-table" => Ok(Section::TruthTable),
            "plan" => Ok(Section::Plan),
            "all" => Ok(Section::All),
            other => Err(RenderError::UnknownSection {
                section: other.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(RenderError::UnknownFormat {
                format: other.to_owned(),
            }),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("unknown section {section:?}; expected flows, expressions, sets, reliability, truth-table, plan, or all")]
    UnknownSection { section: String },
    #[error("unknown format {format:?}; expected text, json, or csv")]
    UnknownFormat { format: String },
    #[error("section {section} has no {format} rendering")]
    UnsupportedFormat { section: &'static str, format: &'static str },
}

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub format: Format,
    /// Render logical operators as `&`/`|` instead of the Unicode glyphs.
    pub ascii: bool,
    /// Omit the model header line in text mode.
    pub quiet: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            format: Format::Text,
            ascii: false,
            quiet: false,
        }
    }
}

/// Renders one section of the bundle. Text mode is layout for humans;
/// JSON carries every figure at full precision; CSV is provided for the
/// tabular sections.
pub fn render(
    bundle: &AnalysisBundle,
    section: Section,
    options: &RenderOptions,
) -> Result<String, RenderError> {
    match options.format {
        Format::Text => Ok(render_text(bundle, section, options)),
        Format::Json => Ok(render_json(bundle, section, options)),
        Format::Csv => render_csv(bundle, section),
    }
}

// === text ===

fn render_text(bundle: &AnalysisBundle, section: Section, options: &RenderOptions) -> String {
    let mut out = String::new();
    if !options.quiet {
        let _ = writeln!(
            out,
            "model: {} ({} layers)",
            bundle.model.name,
            bundle.model.depth()
        );
    }
    match section {
        Section::Flows => text_flows(&mut out, bundle),
        Section::Expressions => text_expressions(&mut out, bundle, options.ascii),
        Section::Sets => text_sets(&mut out, bundle),
        Section::Reliability => text_reliability(&mut out, bundle),
        Section::TruthTable => text_truth_table(&mut out, bundle),
        Section::Plan => text_plan(&mut out, bundle),
        Section::All => {
            text_flows(&mut out, bundle);
            text_expressions(&mut out, bundle, options.ascii);
            text_sets(&mut out, bundle);
            text_reliability(&mut out, bundle);
            text_truth_table(&mut out, bundle);
            text_plan(&mut out, bundle);
        }
    }
    out
}

fn layer_label(bundle: &AnalysisBundle, n: u8) -> String {
    match bundle.model.layer(n) {
        Ok(layer) => format!("layer {n} ({})", layer.name),
        Err(_) => format!("layer {n}"),
    }
}

fn text_flows(out: &mut String, bundle: &AnalysisBundle) {
    let _ = writeln!(out, "== data flows ==");
    for cell in bundle.flows.iter() {
        let _ = writeln!(
            out,
            "{}, {}: {} flow{}",
            cell.requirement,
            layer_label(bundle, cell.layer),
            cell.paths.len(),
            if cell.paths.len() == 1 { "" } else { "s" }
        );
        for path in &cell.paths {
            let _ = writeln!(out, "  {path}");
        }
    }
}

fn text_expressions(out: &mut String, bundle: &AnalysisBundle, ascii: bool) {
    let _ = writeln!(out, "== success expressions (access points eliminated) ==");
    for formulas in bundle.formulas.values().rev() {
        let _ = writeln!(
            out,
            "{}: {}",
            layer_label(bundle, formulas.layer),
            formulas.reduced_cnf.to_expression(ascii)
        );
    }
}

fn join_ids<I: IntoIterator<Item = S>, S: ToString>(items: I, separator: &str) -> String {
    items
        .into_iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(separator)
}

fn text_sets(out: &mut String, bundle: &AnalysisBundle) {
    let _ = writeln!(out, "== characteristic sets ==");
    for profile in bundle.profiles.values().rev() {
        let _ = writeln!(out, "{}", layer_label(bundle, profile.layer));
        let spof = if profile.spof.is_empty() {
            "none".to_owned()
        } else {
            join_ids(&profile.spof, ", ")
        };
        let _ = writeln!(out, "  single points of failure: {spof}");
        if profile.groups.is_empty() {
            let _ = writeln!(out, "  recovery groups: none");
        } else {
            let groups = profile
                .groups
                .iter()
                .map(|g| format!("{{{}}} ({})", join_ids(&g.members, ", "), g.kind_label()))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "  recovery groups: {groups}");
        }
        let _ = match profile.min_group_size {
            Some(smallest) => writeln!(
                out,
                "  failure tolerance: {} ({} prevention set{}, smallest {smallest})",
                profile.tolerance,
                profile.clause_count,
                if profile.clause_count == 1 { "" } else { "s" },
            ),
            None => writeln!(
                out,
                "  failure tolerance: {} (no prevention sets)",
                profile.tolerance
            ),
        };
    }
}

fn closed_form_text(c: &ClosedForm) -> String {
    match c {
        ClosedForm::Value(v) => format!("{v:.10}"),
        ClosedForm::Inapplicable { reason } => format!("inapplicable ({reason})"),
    }
}

fn count_text(c: Option<u64>) -> String {
    c.map_or_else(|| "n/a".to_owned(), |v| v.to_string())
}

fn text_reliability(out: &mut String, bundle: &AnalysisBundle) {
    let _ = writeln!(out, "== reliability ==");
    for report in bundle.reliability.values() {
        let _ = writeln!(
            out,
            "{} ({} variable{})",
            layer_label(bundle, report.layer),
            report.table.variable_count(),
            if report.table.variable_count() == 1 { "" } else { "s" }
        );
        let _ = writeln!(out, "  exact reliability      {:.10}", report.exact);
        let _ = writeln!(
            out,
            "  closed form            {}",
            closed_form_text(&report.closed_form)
        );
        for (k, r_lk) in &report.limited {
            let _ = writeln!(
                out,
                "  limited coverage k={k}  {:.10}  (deviation {:.3}%)",
                r_lk, report.deviation_percent[k]
            );
        }
        let c = &report.counts;
        let _ = writeln!(
            out,
            "  combinations: universal {}, per-group {}, single {}, double {}",
            c.universal,
            c.per_group.map_or_else(|| "n/a".to_owned(), |v| v.to_string()),
            count_text(c.single),
            count_text(c.double)
        );
    }
}

fn text_truth_table(out: &mut String, bundle: &AnalysisBundle) {
    for report in bundle.reliability.values() {
        let table = &report.table;
        if table.variable_count() == 0 {
            continue;
        }
        let _ = writeln!(out, "== truth table: {} ==", layer_label(bundle, report.layer));
        let width = table
            .variables
            .iter()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(2)
            .max(2);
        let header = table
            .variables
            .iter()
            .map(|v| format!("{:>width$}", v.to_string()))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{:>4} {header} {:>6} {:>12}", "row", "status", "probability");
        for (i, row) in table.rows.iter().enumerate() {
            let states = table
                .row_states(row)
                .iter()
                .map(|s| format!("{:>width$}", s.to_string()))
                .collect::<Vec<_>>()
                .join(" ");
            let status = if row.operational { "OS" } else { "FS" };
            let _ = writeln!(
                out,
                "{:>4} {states} {:>6} {:>12.10}",
                i + 1,
                status,
                row.probability
            );
        }
        let blank = " ".repeat(header.len() + 8);
        let _ = writeln!(out, "{blank}total {:>12.10}", table.total_probability());
    }
}

fn text_plan(out: &mut String, bundle: &AnalysisBundle) {
    let plan = &bundle.plan;
    let _ = writeln!(
        out,
        "== fault-injection test plan (up to {} simultaneous fault{}) ==",
        plan.tolerance,
        if plan.tolerance == 1 { "" } else { "s" }
    );
    if plan.is_empty() {
        let _ = writeln!(
            out,
            "no recovery groups; see the single-point-of-failure notes for disaster-recovery scope"
        );
    } else {
        let per_layer = plan
            .per_layer_counts
            .iter()
            .map(|(layer, count)| format!("layer {layer}: {count}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "templates: {} ({per_layer})", plan.total);
    }
    for bound in &plan.bounds.per_layer {
        let agreement = if bound.agree() {
            "agree".to_owned()
        } else {
            "DISAGREE".to_owned()
        };
        let _ = writeln!(
            out,
            "expected on layer {}: {} from group membership, {} from component counts ({agreement})",
            bound.layer, bound.from_group_members, bound.from_component_counts
        );
    }
    let _ = writeln!(
        out,
        "structure-blind upper bounds: single-fault {}, double-fault {}",
        plan.bounds.single_fault_upper, plan.bounds.double_fault_upper
    );
    for template in &plan.templates {
        let _ = writeln!(
            out,
            "{} ({}, {} {{{}}})",
            template.id,
            layer_label(bundle, template.layer),
            template.kind,
            join_ids(&template.targets, ", ")
        );
        for step in &template.steps {
            let phase = match step.phase {
                crate::plan::VerificationPhase::Sensing => "sensing",
                crate::plan::VerificationPhase::Switching => "switching",
            };
            let _ = writeln!(out, "  {phase}: {}", step.description);
        }
    }
    for excluded in &plan.excluded {
        let _ = writeln!(
            out,
            "excluded {{{}}} on layer {}: {}",
            join_ids(&excluded.targets, ", "),
            excluded.layer,
            excluded.reason
        );
    }
    for note in &plan.notes {
        let _ = writeln!(out, "note: {note}");
    }
}

// === json ===

fn render_json(bundle: &AnalysisBundle, section: Section, options: &RenderOptions) -> String {
    let value = match section {
        Section::Flows => json_flows(bundle),
        Section::Expressions => json_expressions(bundle, options.ascii),
        Section::Sets => json_sets(bundle),
        Section::Reliability => json_reliability(bundle),
        Section::TruthTable => json_truth_table(bundle),
        Section::Plan => json_plan(bundle),
        Section::All => json!({
            "model": serde_json::from_str::<serde_json::Value>(&bundle.model.to_canonical_json())
                .expect("canonical model is valid JSON"),
            "flows": json_flows(bundle),
            "expressions": json_expressions(bundle, options.ascii),
            "sets": json_sets(bundle),
            "reliability": json_reliability(bundle),
            "truth_tables": json_truth_table(bundle),
            "plan": serde_json::to_value(&bundle.plan).expect("plan serializes"),
        }),
    };
    let mut out = serde_json::to_string_pretty(&value).expect("report serializes");
    out.push('\n');
    out
}

fn json_flows(bundle: &AnalysisBundle) -> serde_json::Value {
    serde_json::to_value(bundle.flows.iter().collect::<Vec<_>>()).expect("flows serialize")
}

fn json_expressions(bundle: &AnalysisBundle, ascii: bool) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = bundle
        .formulas
        .values()
        .map(|f| {
            json!({
                "layer": f.layer,
                "full": {
                    "clauses": f.full_cnf.clauses,
                    "expression": f.full_cnf.to_expression(ascii),
                },
                "reduced": {
                    "clauses": f.reduced_cnf.clauses,
                    "expression": f.reduced_cnf.to_expression(ascii),
                },
            })
        })
        .collect();
    json!(rows)
}

fn json_sets(bundle: &AnalysisBundle) -> serde_json::Value {
    serde_json::to_value(bundle.profiles.values().collect::<Vec<_>>()).expect("profiles serialize")
}

fn json_reliability(bundle: &AnalysisBundle) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = bundle
        .reliability
        .values()
        .map(|r| {
            json!({
                "layer": r.layer,
                "exact": r.exact,
                "closed_form": r.closed_form,
                "limited": r.limited,
                "deviation_percent": r.deviation_percent,
                "counts": r.counts,
            })
        })
        .collect();
    json!(rows)
}

fn json_truth_table(bundle: &AnalysisBundle) -> serde_json::Value {
    let tables: Vec<serde_json::Value> = bundle
        .reliability
        .values()
        .map(|r| {
            let table = &r.table;
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let states: BTreeMap<String, String> = table
                        .variables
                        .iter()
                        .enumerate()
                        .map(|(j, v)| (v.to_string(), table.state_of(row, j).to_string()))
                        .collect();
                    json!({
                        "states": states,
                        "status": if row.operational { "OS" } else { "FS" },
                        "probability": row.probability,
                    })
                })
                .collect();
            json!({
                "layer": table.layer,
                "variables": table.variables,
                "rows": rows,
                "total_probability": table.total_probability(),
            })
        })
        .collect();
    json!(tables)
}

/// The plan document is an array of template records, ready for a
/// downstream executor.
fn json_plan(bundle: &AnalysisBundle) -> serde_json::Value {
    serde_json::to_value(&bundle.plan.templates).expect("templates serialize")
}

// === csv ===

fn render_csv(bundle: &AnalysisBundle, section: Section) -> Result<String, RenderError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match section {
        Section::Flows => {
            w.write_record(["requirement", "layer", "path"]).expect("csv");
            for cell in bundle.flows.iter() {
                for path in &cell.paths {
                    w.write_record([
                        cell.requirement.clone(),
                        cell.layer.to_string(),
                        join_ids(&path.0, ";"),
                    ])
                    .expect("csv");
                }
            }
        }
        Section::Expressions => {
            w.write_record(["layer", "expression"]).expect("csv");
            for f in bundle.formulas.values() {
                w.write_record([f.layer.to_string(), f.reduced_cnf.to_expression(true)])
                    .expect("csv");
            }
        }
        Section::Sets => {
            w.write_record([
                "layer",
                "spof",
                "recovery_groups",
                "tolerance",
                "prevention_sets",
                "smallest_set",
            ])
            .expect("csv");
            for p in bundle.profiles.values() {
                let groups = p
                    .groups
                    .iter()
                    .map(|g| join_ids(&g.members, "+"))
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([
                    p.layer.to_string(),
                    join_ids(&p.spof, ";"),
                    groups,
                    p.tolerance.to_string(),
                    p.clause_count.to_string(),
                    p.min_group_size.map(|s| s.to_string()).unwrap_or_default(),
                ])
                .expect("csv");
            }
        }
        Section::Reliability => {
            w.write_record([
                "layer",
                "exact",
                "closed_form",
                "limited_k1",
                "limited_k2",
                "deviation_k1_percent",
                "deviation_k2_percent",
            ])
            .expect("csv");
            for r in bundle.reliability.values() {
                let closed = match &r.closed_form {
                    ClosedForm::Value(v) => format!("{v:.12}"),
                    ClosedForm::Inapplicable { .. } => "inapplicable".to_owned(),
                };
                w.write_record([
                    r.layer.to_string(),
                    format!("{:.12}", r.exact),
                    closed,
                    format!("{:.12}", r.limited[&1]),
                    format!("{:.12}", r.limited[&2]),
                    format!("{:.6}", r.deviation_percent[&1]),
                    format!("{:.6}", r.deviation_percent[&2]),
                ])
                .expect("csv");
            }
        }
        Section::TruthTable => {
            w.write_record(["layer", "row", "states", "status", "probability"]).expect("csv");
            for r in bundle.reliability.values() {
                let table = &r.table;
                for (i, row) in table.rows.iter().enumerate() {
                    let states = table
                        .variables
                        .iter()
                        .enumerate()
                        .map(|(j, v)| format!("{v}={}", table.state_of(row, j)))
                        .collect::<Vec<_>>()
                        .join(";");
                    w.write_record([
                        table.layer.to_string(),
                        (i + 1).to_string(),
                        states,
                        if row.operational { "OS" } else { "FS" }.to_owned(),
                        format!("{:.12}", row.probability),
                    ])
                    .expect("csv");
                }
            }
        }
        Section::Plan => {
            w.write_record(["id", "layer", "kind", "targets", "expected_state"]).expect("csv");
            for t in &bundle.plan.templates {
                let kind = match t.kind {
                    TemplateKind::Inject => "inject",
                    TemplateKind::Repair => "repair",
                };
                w.write_record([
                    t.id.clone(),
                    t.layer.to_string(),
                    kind.to_owned(),
                    join_ids(&t.targets, ";"),
                    "OS".to_owned(),
                ])
                .expect("csv");
            }
        }
        Section::All => {
            return Err(RenderError::UnsupportedFormat {
                section: "all",
                format: "csv",
            })
        }
    }
    let bytes = w.into_inner().expect("csv buffer");
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
