//! Stage implementations behind the CLI verbs.

use crate::config::{NamedExpression, RunConfig, Stage};
use anyhow::{bail, Context, Result};
use contextsim::analysis::{analyze_experiment, counts_at, ExperimentAnalysis};
use contextsim::apparatus::{
    read_scans_json, run_experiment_set, write_scans_csv, write_scans_json, ScanData,
};
use contextsim::contexts::{inequality3_quantum, inequality4_quantum, peres_mermin_contexts};
use contextsim::hilbert::{entangled_state, PmLabel};
use contextsim::nchv::{
    classical_bound, inequality3_expression, inequality4_expression, ks_contradiction,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

pub const SCANS_JSON: &str = "scans.json";
pub const SCANS_CSV: &str = "scans.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const THEORY_JSON: &str = "theory.json";
pub const THEORY_TXT: &str = "theory.txt";
pub const PLOT_POINTS_CSV: &str = "plot_points.csv";
pub const PLOT_CURVES_CSV: &str = "plot_curves.csv";

#[derive(Debug, Serialize, Deserialize)]
pub struct ContextRow {
    pub name: String,
    pub observables: Vec<PmLabel>,
    pub predicted_product: i8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InequalityTheory {
    pub quantum_value: f64,
    pub classical_bound: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentSearch {
    pub total_assignments: usize,
    pub max_satisfiable: usize,
    pub witness: BTreeMap<String, i8>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExpressionRow {
    pub name: String,
    pub classical_bound: f64,
}

/// Ideal predictions, classical bounds, and the assignment search summary.
#[derive(Debug, Serialize, Deserialize)]
pub struct TheoryReport {
    pub contexts: Vec<ContextRow>,
    pub five_term_inequality: InequalityTheory,
    pub three_term_inequality: InequalityTheory,
    pub assignment_search: AssignmentSearch,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expressions: Vec<ExpressionRow>,
}

pub fn build_theory_report(expressions: &[NamedExpression]) -> TheoryReport {
    let psi = entangled_state();
    let contexts = peres_mermin_contexts();
    let ks = ks_contradiction();
    let witness: BTreeMap<String, i8> = PmLabel::ALL
        .iter()
        .map(|l| (l.as_str().to_string(), ks.witness.get(*l)))
        .collect();
    TheoryReport {
        contexts: contexts
            .iter()
            .map(|c| ContextRow {
                name: c.name(),
                observables: c.observables().to_vec(),
                predicted_product: c.predicted_product(),
            })
            .collect(),
        five_term_inequality: InequalityTheory {
            quantum_value: inequality3_quantum(&psi),
            classical_bound: classical_bound(&inequality3_expression()),
        },
        three_term_inequality: InequalityTheory {
            quantum_value: inequality4_quantum(&psi),
            classical_bound: classical_bound(&inequality4_expression()),
        },
        assignment_search: AssignmentSearch {
            total_assignments: 64,
            max_satisfiable: ks.max_satisfiable,
            witness,
        },
        expressions: expressions
            .iter()
            .map(|e| ExpressionRow {
                name: e.name.clone(),
                classical_bound: classical_bound(&e.to_expression()),
            })
            .collect(),
    }
}

pub fn theory_text(report: &TheoryReport) -> String {
    let mut out = String::new();
    out.push_str("predictions for the entangled state, one line per context:\n");
    for ctx in &report.contexts {
        out.push_str(&format!("  <{}> = {:+}\n", ctx.name, ctx.predicted_product));
    }
    out.push_str(&format!(
        "five-term inequality:  quantum value {:.4} vs noncontextual bound {}\n",
        report.five_term_inequality.quantum_value, report.five_term_inequality.classical_bound
    ));
    out.push_str(&format!(
        "three-term inequality: quantum value {:.4} vs noncontextual bound {}\n",
        report.three_term_inequality.quantum_value, report.three_term_inequality.classical_bound
    ));
    out.push_str(&format!(
        "value assignments: max_satisfiable = {} of {} contexts (over {} assignments)\n",
        report.assignment_search.max_satisfiable,
        report.contexts.len(),
        report.assignment_search.total_assignments
    ));
    let witness: Vec<String> = report
        .assignment_search
        .witness
        .iter()
        .map(|(k, v)| format!("{k}={v:+}"))
        .collect();
    out.push_str(&format!("  witness: {}\n", witness.join(" ")));
    for row in &report.expressions {
        out.push_str(&format!(
            "expression `{}`: classical bound {}\n",
            row.name, row.classical_bound
        ));
    }
    out
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating `{}`", path.display()))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// The `theory` stage: compute, print, and optionally persist.
pub fn cmd_theory(expressions: &[NamedExpression], out: Option<&Path>) -> Result<TheoryReport> {
    let report = build_theory_report(expressions);
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory `{}`", dir.display()))?;
        write_json(&report, &dir.join(THEORY_JSON))?;
        fs::write(dir.join(THEORY_TXT), theory_text(&report))?;
    }
    Ok(report)
}

/// The `simulate` stage: run the scan set and persist CSV + JSON.
pub fn cmd_simulate(
    config: &RunConfig,
    out: &Path,
    seed: u64,
    repetitions: u32,
) -> Result<Vec<ScanData>> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory `{}`", out.display()))?;
    let apparatus = config.apparatus_with_seed(seed);
    let scans = run_experiment_set(&apparatus, repetitions, config.run.chi_points)?;
    let csv_file = File::create(out.join(SCANS_CSV))?;
    write_scans_csv(&scans, BufWriter::new(csv_file))?;
    let json_file = File::create(out.join(SCANS_JSON))?;
    write_scans_json(&scans, BufWriter::new(json_file))?;
    Ok(scans)
}

/// Fitted-curve samples for plotting, one row per sample.
pub fn write_plot_curves<W: Write>(analysis: &ExperimentAnalysis, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["mode", "run", "alpha_or_spin", "chi_radians", "model_counts"])?;
    for record in &analysis.fits {
        for k in 0..=180 {
            let chi = k as f64 * 2.0 * PI / 180.0;
            let (value, _) = counts_at(&record.fit, chi);
            w.write_record([
                record.kind.mode_name().to_string(),
                record.run.to_string(),
                record.kind.setting_string(),
                format!("{chi}"),
                format!("{value}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of the plot-curve CSV.
#[derive(Debug)]
pub struct PlotCurveRow {
    pub mode: String,
    pub run: u32,
    pub alpha_or_spin: String,
    pub chi_radians: f64,
    pub model_counts: f64,
}

/// Schema validation for the plot-curve CSV.
pub fn read_plot_curves<R: std::io::Read>(reader: R) -> Result<Vec<PlotCurveRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = ["mode", "run", "alpha_or_spin", "chi_radians", "model_counts"];
    if r.headers()? != &csv::StringRecord::from(expected.to_vec()) {
        bail!("unexpected plot-curve header {:?}", r.headers()?);
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        rows.push(PlotCurveRow {
            mode: record.get(0).unwrap_or_default().to_string(),
            run: record.get(1).unwrap_or_default().parse()?,
            alpha_or_spin: record.get(2).unwrap_or_default().to_string(),
            chi_radians: record.get(3).unwrap_or_default().parse()?,
            model_counts: record.get(4).unwrap_or_default().parse()?,
        });
    }
    Ok(rows)
}

/// The `analyze` stage: read stored scans, reduce them, persist the report
/// and plot data. Per-scan fit problems are printed as warnings; the stage
/// fails only when no complete repetition is left.
pub fn cmd_analyze(scan_dir: &Path, out: &Path) -> Result<ExperimentAnalysis> {
    let scans_path = scan_dir.join(SCANS_JSON);
    let file = File::open(&scans_path)
        .with_context(|| format!("opening scan record `{}`", scans_path.display()))?;
    let scans = read_scans_json(file)
        .with_context(|| format!("reading scan record `{}`", scans_path.display()))?;
    let analysis = analyze_experiment(&scans)?;
    for issue in &analysis.issues {
        eprintln!("warning: {issue}");
    }

    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory `{}`", out.display()))?;
    write_json(&analysis.report, &out.join(REPORT_JSON))?;

    let mut text = analysis.report.text_summary();
    text.push('\n');
    for (rep, estimates) in analysis.per_run.iter().enumerate() {
        let line: Vec<String> = estimates
            .iter()
            .map(|e| format!("{} = {:+.4} ± {:.4}", e.label, e.value, e.sigma))
            .collect();
        text.push_str(&format!("repetition {rep}: {}\n", line.join(", ")));
    }
    for issue in &analysis.issues {
        text.push_str(&format!("warning: {issue}\n"));
    }
    fs::write(out.join(REPORT_TXT), &text)?;

    let points_file = File::create(out.join(PLOT_POINTS_CSV))?;
    write_scans_csv(&scans, BufWriter::new(points_file))?;
    let curves_file = File::create(out.join(PLOT_CURVES_CSV))?;
    write_plot_curves(&analysis, BufWriter::new(curves_file))?;

    Ok(analysis)
}

/// The `full` verb: execute the configured stages in order against one
/// output directory.
pub fn cmd_full(
    config: &RunConfig,
    out: &Path,
    seed: u64,
    repetitions: u32,
) -> Result<Option<ExperimentAnalysis>> {
    if config.run.stages.contains(&Stage::Theory) {
        let report = cmd_theory(&config.expressions, Some(out))?;
        print!("{}", theory_text(&report));
    }
    if config.run.stages.contains(&Stage::Simulate) {
        let scans = cmd_simulate(config, out, seed, repetitions)?;
        println!(
            "simulated {} scans ({} repetitions, seed {seed}) into `{}`",
            scans.len(),
            repetitions,
            out.display()
        );
    }
    if config.run.stages.contains(&Stage::Analyze) {
        let analysis = cmd_analyze(out, out)?;
        print!("{}", analysis.report.text_summary());
        return Ok(Some(analysis));
    }
    Ok(None)
}
