//! `lamina`: dependability reports for layered system models.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lamina_core::{
    deviation_curve, parse_model, render, run_pipeline, validate_model, AnalysisBundle, ClosedForm,
    Format, PipelineError, PipelineOptions, RenderError, RenderOptions, Section,
};

#[derive(Parser)]
#[command(
    name = "lamina",
    version,
    about = "Analyzes a layered system model: data-flow coverage, single points of failure,\n\
             recovery groups, reliability, and fault-injection test plans."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Model document to analyze (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Use `&`/`|` instead of Unicode operators in expressions.
    #[arg(long, global = true)]
    ascii: bool,

    /// Suppress the model header line in text output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the model and report every structural violation.
    Validate,
    /// List the data flows covering each requirement on each layer.
    Flows,
    /// Per-layer success expressions, single points of failure and
    /// recovery groups.
    Analyze,
    /// Reliability figures per layer; optionally a single figure.
    Reliability {
        /// Restrict output to one layer.
        #[arg(long)]
        layer: Option<u8>,
        /// Print one figure instead of the full report.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Maximum simultaneous failures for the limited mode.
        #[arg(long, default_value_t = 1)]
        k: u8,
        /// Also emit the truth table rows.
        #[arg(long)]
        table: bool,
    },
    /// Generate the fault-injection test plan.
    Plan {
        /// Maximum simultaneous injected faults: 1 or 2.
        #[arg(long, default_value_t = 1)]
        tolerance: u8,
    },
    /// Deviation of 1-limited coverage for l identical groups of r
    /// components, swept over a shared probability p.
    Curve {
        #[arg(long = "l")]
        l: u32,
        #[arg(long = "r")]
        r: u32,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Closed,
    Limited,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::infeasible(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read_model(path: &Option<PathBuf>) -> Result<String, CliError> {
    let Some(path) = path else {
        return Err(CliError::infeasible("no model given; pass --model <PATH>"));
    };
    std::fs::read_to_string(path)
        .map_err(|e| CliError::infeasible(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<String, CliError> {
    let render_options = RenderOptions {
        format: cli.format.into(),
        ascii: cli.ascii,
        quiet: cli.quiet,
    };

    match cli.command {
        Command::Curve { l, r, from, to, step } => curve_output(l, r, from, to, step, cli.format),
        Command::Validate => {
            let source = read_model(&cli.model)?;
            let model = parse_model(&source).map_err(|e| CliError {
                code: 1,
                message: e.to_string(),
            })?;
            let report = validate_model(&model);
            if report.is_valid() {
                Ok(format!("{report}\n"))
            } else {
                Err(CliError {
                    code: 1,
                    message: report.to_string(),
                })
            }
        }
        command => {
            let source = read_model(&cli.model)?;
            let mut options = PipelineOptions::default();
            if let Command::Plan { tolerance } = &command {
                options.tolerance = *tolerance;
            }
            let bundle = run_pipeline(&source, &options)?;
            match command {
                Command::Flows => Ok(render(&bundle, Section::Flows, &render_options)?),
                Command::Analyze => analyze_output(&bundle, &render_options),
                Command::Plan { .. } => Ok(render(&bundle, Section::Plan, &render_options)?),
                Command::Reliability {
                    layer,
                    mode,
                    k,
                    table,
                } => reliability_output(&bundle, &render_options, layer, mode, k, table),
                Command::Validate | Command::Curve { .. } => unreachable!("handled above"),
            }
        }
    }
}

/// One row per layer in the style of the characteristic-set table:
/// expression, single points of failure, recovery groups.
fn analyze_output(bundle: &AnalysisBundle, options: &RenderOptions) -> Result<String, CliError> {
    struct Row {
        layer: u8,
        name: String,
        expression: String,
        spof: Vec<String>,
        groups: Vec<String>,
        tolerance: String,
        prevention_sets: usize,
        smallest_set: Option<usize>,
    }
    let rows: Vec<Row> = bundle
        .formulas
        .values()
        .rev()
        .map(|f| {
            let profile = &bundle.profiles[&f.layer];
            Row {
                layer: f.layer,
                name: bundle
                    .model
                    .layer(f.layer)
                    .map(|l| l.name.clone())
                    .unwrap_or_default(),
                expression: f.reduced_cnf.to_expression(options.ascii),
                spof: profile.spof.iter().map(ToString::to_string).collect(),
                groups: profile
                    .groups
                    .iter()
                    .map(|g| {
                        let members = g
                            .members
                            .iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join(", ");
                        format!("{{{members}}} ({})", g.kind_label())
                    })
                    .collect(),
                tolerance: profile.tolerance.to_string(),
                prevention_sets: profile.clause_count,
                smallest_set: profile.min_group_size,
            }
        })
        .collect();

    match options.format {
        Format::Text => {
            let mut out = String::new();
            if !options.quiet {
                let _ = writeln!(
                    out,
                    "model: {} ({} layers)",
                    bundle.model.name,
                    bundle.model.depth()
                );
            }
            let _ = writeln!(out, "== characteristic sets ==");
            for row in &rows {
                let _ = writeln!(out, "layer {} ({}): {}", row.layer, row.name, row.expression);
                let spof = if row.spof.is_empty() {
                    "none".to_owned()
                } else {
                    row.spof.join(", ")
                };
                let groups = if row.groups.is_empty() {
                    "none".to_owned()
                } else {
                    row.groups.join(", ")
                };
                let _ = writeln!(out, "  single points of failure: {spof}");
                let _ = writeln!(out, "  recovery groups: {groups}");
                let _ = match row.smallest_set {
                    Some(smallest) => writeln!(
                        out,
                        "  failure tolerance: {} ({} prevention set{}, smallest {smallest})",
                        row.tolerance,
                        row.prevention_sets,
                        if row.prevention_sets == 1 { "" } else { "s" },
                    ),
                    None => writeln!(
                        out,
                        "  failure tolerance: {} (no prevention sets)",
                        row.tolerance
                    ),
                };
            }
            Ok(out)
        }
        Format::Json => {
            let value: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "layer": r.layer,
                        "name": r.name,
                        "expression": r.expression,
                        "spof": r.spof,
                        "recovery_groups": r.groups,
                        "tolerance": r.tolerance,
                        "prevention_sets": r.prevention_sets,
                        "smallest_set": r.smallest_set,
                    })
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&value).expect("rows serialize");
            out.push('\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record([
                "layer",
                "name",
                "expression",
                "spof",
                "recovery_groups",
                "tolerance",
                "prevention_sets",
                "smallest_set",
            ])
            .expect("csv");
            for r in &rows {
                w.write_record([
                    r.layer.to_string(),
                    r.name.clone(),
                    r.expression.clone(),
                    r.spof.join(";"),
                    r.groups.join(";"),
                    r.tolerance.clone(),
                    r.prevention_sets.to_string(),
                    r.smallest_set.map(|s| s.to_string()).unwrap_or_default(),
                ])
                .expect("csv");
            }
            Ok(String::from_utf8(w.into_inner().expect("csv buffer")).expect("csv utf-8"))
        }
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn reliability_output(
    bundle: &AnalysisBundle,
    options: &RenderOptions,
    layer: Option<u8>,
    mode: Option<ModeArg>,
    k: u8,
    table: bool,
) -> Result<String, CliError> {
    if let Some(n) = layer {
        if !bundle.reliability.contains_key(&n) {
            return Err(CliError::infeasible(format!(
                "layer {n} has no reliability report"
            )));
        }
    }
    let selected: Vec<u8> = match layer {
        Some(n) => vec![n],
        None => bundle.reliability.keys().copied().collect(),
    };

    let Some(mode) = mode else {
        // Full report; restricting to one layer reuses the renderer on a
        // filtered bundle.
        let filtered = filter_layers(bundle, &selected);
        let mut out = render(&filtered, Section::Reliability, options)?;
        if table {
            let quiet = RenderOptions {
                quiet: true,
                ..*options
            };
            out.push_str(&render(&filtered, Section::TruthTable, &quiet)?);
        }
        return Ok(out);
    };

    let figure = |n: u8| -> serde_json::Value {
        let report = &bundle.reliability[&n];
        match mode {
            ModeArg::Exact => json!(report.exact),
            ModeArg::Closed => serde_json::to_value(&report.closed_form).expect("closed form"),
            ModeArg::Limited => json!(report.limited[&k]),
        }
    };
    let mode_name = match mode {
        ModeArg::Exact => "exact",
        ModeArg::Closed => "closed",
        ModeArg::Limited => "limited",
    };
    if mode == ModeArg::Limited && !(1..=2).contains(&k) {
        return Err(CliError::infeasible(format!(
            "limited coverage is defined for k = 1 or 2, got {k}"
        )));
    }

    match options.format {
        Format::Text => {
            let mut out = String::new();
            for n in &selected {
                let value = figure(*n);
                let rendered = match &bundle.reliability[n].closed_form {
                    ClosedForm::Inapplicable { reason } if mode == ModeArg::Closed => {
                        format!("inapplicable ({reason})")
                    }
                    _ => format!("{:.10}", value.as_f64().unwrap_or(f64::NAN)),
                };
                if layer.is_some() {
                    let _ = writeln!(out, "{rendered}");
                } else {
                    let _ = writeln!(out, "layer {n}: {rendered}");
                }
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = selected
                .iter()
                .map(|n| {
                    let mut row = json!({
                        "layer": n,
                        "mode": mode_name,
                        "value": figure(*n),
                    });
                    if mode == ModeArg::Limited {
                        row["k"] = json!(k);
                    }
                    row
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&rows).expect("rows serialize");
            out.push('\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["layer", "mode", "value"]).expect("csv");
            for n in &selected {
                let value = figure(*n);
                let rendered = value
                    .as_f64()
                    .map_or_else(|| "inapplicable".to_owned(), |v| format!("{v:.12}"));
                w.write_record([n.to_string(), mode_name.to_owned(), rendered])
                    .expect("csv");
            }
            Ok(String::from_utf8(w.into_inner().expect("csv buffer")).expect("csv utf-8"))
        }
    }
}

/// Bundle view holding only the chosen layers' reliability reports.
fn filter_layers(bundle: &AnalysisBundle, layers: &[u8]) -> AnalysisBundle {
    let mut filtered = bundle.clone();
    filtered.reliability.retain(|n, _| layers.contains(n));
    filtered
}

fn curve_output(
    l: u32,
    r: u32,
    from: f64,
    to: f64,
    step: f64,
    format: FormatArg,
) -> Result<String, CliError> {
    let points = deviation_curve(l, r, from, to, step).map_err(|e| CliError::infeasible(e.to_string()))?;
    match format {
        FormatArg::Json => {
            let mut out = serde_json::to_string_pretty(&points).expect("points serialize");
            out.push('\n');
            Ok(out)
        }
        FormatArg::Text | FormatArg::Csv => {
            let mut out = String::from("p,deviation_percent\n");
            for point in &points {
                let _ = writeln!(out, "{},{}", point.p, point.deviation_percent);
            }
            Ok(out)
        }
    }
}
