//! Subcommand implementations, independent of argument parsing.
//!
//! Each command returns the [`RunReport`] it produced and writes its
//! human-facing output to the supplied writer.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use can_coord::conflict::{conflict_summary, detect_conflicts, ConflictRecord};
use can_coord::game::{analyze, derive_payoffs, PayoffMatrix};
use can_coord::nbs::{
    brute_force_nbs_with_cap, candidate_set, coordinate_ascent, nash_product, sequential_nbs, BargainOutcome,
    DisagreementPoint, DEFAULT_GRID_CAP,
};
use can_coord::reference::{paper_scenario, P1, P2};
use can_coord::schema::{load_scenario, scenario_to_json};
use can_coord::{ConflictCategory, Configuration, Scenario};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{to_canonical_json, to_value, write_file, RunReport};
use crate::svg::{heat_map, line_plot, Series};
use crate::table::{csv_line, SweepTable};

/// Environment variable overriding the brute-force grid cap.
pub const GRID_CAP_ENV: &str = "CAN_COORD_GRID_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sequential,
    Ascent,
    Brute,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Sequential => "sequential",
            Method::Ascent => "ascent",
            Method::Brute => "brute",
        }
    }
}

fn emit(w: &mut dyn Write, text: &str) -> Result<(), CliError> {
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn require_scenario(path: Option<&Path>) -> Result<(&Path, Scenario), CliError> {
    let path = path.ok_or_else(|| CliError::input("--scenario is required"))?;
    Ok((path, load_scenario(path)?))
}

/// Parses `name=value`.
pub fn parse_assignment(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("expected name=value, got `{text}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("`{value}` is not a number")))?;
    if !value.is_finite() {
        return Err(CliError::input(format!("`{text}`: value must be finite")));
    }
    Ok((name.trim().to_string(), value))
}

pub fn parse_payoffs(text: &str) -> Result<PayoffMatrix, CliError> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::input(format!("--payoffs expects r1,r2,r3,r4, got `{text}`")))?;
    match values[..] {
        [r1, r2, r3, r4] => Ok(PayoffMatrix::new(r1, r2, r3, r4)?),
        _ => Err(CliError::input(format!("--payoffs expects four values, got {}", values.len()))),
    }
}

fn summary_table(summary: &std::collections::BTreeMap<ConflictCategory, usize>) -> String {
    let mut s = String::from("category  count\n");
    for (c, n) in summary {
        s.push_str(&format!("{:<8}  {n}\n", c.to_string()));
    }
    s
}

fn records_csv(records: &[ConflictRecord]) -> String {
    let mut out = csv_line(&["category", "function_a", "function_b", "subject", "path", "explanation"]);
    for r in records {
        out.push_str(&csv_line(&[
            r.category.to_string(),
            r.functions.0.clone(),
            r.functions.1.clone(),
            r.subject.clone(),
            r.path.join(">"),
            r.explanation.clone(),
        ]));
    }
    out
}

fn detect_results(records: &[ConflictRecord]) -> Value {
    json!({
        "records": records,
        "summary": conflict_summary(records),
    })
}

pub fn cmd_detect(
    scenario_path: Option<&Path>,
    format: Format,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let (path, scenario) = require_scenario(scenario_path)?;
    let records = detect_conflicts(&scenario);
    match format {
        Format::Json => {
            for r in &records {
                emit(w, &format!("{}\n", serde_json::to_string(r).expect("record serializes")))?;
            }
        }
        Format::Csv => emit(w, &records_csv(&records))?,
    }
    emit(w, &summary_table(&conflict_summary(&records)))?;
    let report = RunReport::new("detect", Some(path), detect_results(&records));
    if let Some(out) = out {
        write_file(out, &report.to_json())?;
    }
    Ok(report)
}

pub fn cmd_game(
    scenario_path: Option<&Path>,
    payoffs: Option<&str>,
    conflict_index: Option<usize>,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let (results, path) = match (payoffs, scenario_path) {
        (Some(text), _) => {
            let m = parse_payoffs(text)?;
            (json!({ "source": "payoffs", "matrix": m, "analysis": analyze(&m) }), None)
        }
        (None, Some(_)) => {
            let (path, scenario) = require_scenario(scenario_path)?;
            let records = detect_conflicts(&scenario);
            let k = conflict_index.ok_or_else(|| CliError::input("--conflict-index is required with --scenario"))?;
            let conflict = records
                .get(k)
                .ok_or_else(|| CliError::input(format!("conflict index {k} out of range (0..{})", records.len())))?;
            let derived = derive_payoffs(&scenario, conflict, &scenario.default_configuration())?;
            let analysis = analyze(&derived.matrix);
            (
                json!({
                    "source": "scenario",
                    "conflict": conflict,
                    "matrix": derived.matrix,
                    "derived": derived,
                    "analysis": analysis,
                }),
                Some(path),
            )
        }
        (None, None) => return Err(CliError::input("provide --payoffs or --scenario with --conflict-index")),
    };
    let report = RunReport::new("game", path, results);
    emit(w, &report.to_json())?;
    if let Some(out) = out {
        write_file(out, &report.to_json())?;
    }
    Ok(report)
}

pub struct BargainOptions<'a> {
    pub method: Method,
    pub order: Option<Vec<String>>,
    pub disagreement: &'a [String],
    pub max_iters: usize,
    pub tol: f64,
}

pub fn grid_cap_from_env() -> Result<u64, CliError> {
    match std::env::var(GRID_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("{GRID_CAP_ENV}=`{v}` is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_GRID_CAP),
    }
}

fn disagreement_point(items: &[String]) -> Result<DisagreementPoint, CliError> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.trim().is_empty())
        .try_fold(DisagreementPoint::zero(), |d, item| {
            let (name, value) = parse_assignment(item)?;
            Ok(d.with(name, value))
        })
}

fn outcome_results(method: Method, outcome: &BargainOutcome, extra: Value) -> Value {
    let mut v = json!({
        "method": method.name(),
        "config": outcome.config,
        "nash_product": outcome.nash_product,
        "per_objective": outcome.per_objective,
        "trace_length": outcome.trace.len(),
        "converged": outcome.converged,
    });
    if let (Value::Object(map), Value::Object(extra)) = (&mut v, extra) {
        map.extend(extra);
    }
    v
}

fn run_bargain(
    scenario: &Scenario,
    opts: &BargainOptions<'_>,
    d: &DisagreementPoint,
    cap: u64,
) -> Result<(BargainOutcome, Value), CliError> {
    Ok(match opts.method {
        Method::Sequential => {
            let order: Vec<String> = opts
                .order
                .clone()
                .unwrap_or_else(|| scenario.parameters().iter().map(|p| p.name.clone()).collect());
            let refs: Vec<&str> = order.iter().map(String::as_str).collect();
            (sequential_nbs(scenario, &refs, d)?, json!({ "order": order }))
        }
        Method::Ascent => (
            coordinate_ascent(scenario, &scenario.default_configuration(), d, opts.max_iters, opts.tol)?,
            json!({ "start": scenario.default_configuration(), "max_iters": opts.max_iters, "tol": opts.tol }),
        ),
        Method::Brute => (brute_force_nbs_with_cap(scenario, d, cap)?, json!({ "grid_cap": cap })),
    })
}

pub fn cmd_bargain(
    scenario_path: Option<&Path>,
    opts: &BargainOptions<'_>,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let (path, scenario) = require_scenario(scenario_path)?;
    let d = disagreement_point(opts.disagreement)?;
    let cap = grid_cap_from_env()?;
    let (outcome, extra) = run_bargain(&scenario, opts, &d, cap)?;
    let mut results = outcome_results(opts.method, &outcome, extra);
    results["disagreement"] = to_value(&d);
    let report = RunReport::new("bargain", Some(path), results);
    emit(w, &report.to_json())?;
    if let Some(out) = out {
        write_file(out, &report.to_json())?;
    }
    Ok(report)
}

/// Sweeps `param` over its grid with the other parameters at `base`.
pub fn sweep_table(scenario: &Scenario, param: &str, base: &Configuration) -> Result<SweepTable, CliError> {
    let spec = scenario
        .parameter(param)
        .ok_or_else(|| CliError::input(format!("unknown parameter `{param}`")))?;
    let grid = candidate_set(spec).values;
    let rows = scenario.sweep(param, &grid, base)?;
    let d = DisagreementPoint::zero();
    let products = grid
        .iter()
        .map(|&v| nash_product(scenario, &base.with(param, v), &d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable::new(scenario, param, &rows, &products))
}

fn sweep_svg(table: &SweepTable, title: &str) -> String {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.0).collect();
    let mut columns: Vec<(String, Vec<f64>)> = table
        .objectives
        .iter()
        .enumerate()
        .map(|(i, o)| (o.clone(), table.rows.iter().map(|r| r.1[i]).collect()))
        .collect();
    columns.push(("product".into(), table.rows.iter().map(|r| r.2).collect()));
    let series: Vec<Series<'_>> = columns
        .iter()
        .map(|(name, values)| Series { name, values })
        .collect();
    line_plot(title, &table.param, &xs, &series)
}

fn base_configuration(scenario: &Scenario, overrides: &[String]) -> Result<Configuration, CliError> {
    let mut base = scenario.default_configuration();
    for item in overrides {
        let (name, value) = parse_assignment(item)?;
        if scenario.parameter(&name).is_none() {
            return Err(CliError::input(format!("unknown parameter `{name}` in --set")));
        }
        base.set(name, value);
    }
    scenario.validate_configuration(&base)?;
    Ok(base)
}

pub fn cmd_sweep(
    scenario_path: Option<&Path>,
    param: &str,
    overrides: &[String],
    out_csv: Option<&Path>,
    svg: Option<&Path>,
    format: Format,
    w: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let (path, scenario) = require_scenario(scenario_path)?;
    let base = base_configuration(&scenario, overrides)?;
    let table = sweep_table(&scenario, param, &base)?;
    let csv = table.to_csv();
    let mut artifacts = Vec::new();
    if let Some(out) = out_csv {
        write_file(out, &csv)?;
        artifacts.push(out.display().to_string());
    }
    if let Some(svg_path) = svg {
        write_file(svg_path, &sweep_svg(&table, &format!("sweep of {param}")))?;
        artifacts.push(svg_path.display().to_string());
    }
    let mut report = RunReport::new(
        "sweep",
        Some(path),
        json!({
            "param": param,
            "base": base,
            "rows": table.rows.len(),
            "argmax_product": table.argmax(),
        }),
    );
    report.artifacts = artifacts;
    match format {
        Format::Csv => emit(w, &csv)?,
        Format::Json => emit(w, &report.to_json())?,
    }
    Ok(report)
}

/// Tolerance for cross-method agreement of Nash products.
pub const AGREEMENT_TOL: f64 = 1e-9;

pub struct Reproduction {
    pub report: RunReport,
    pub summary: Value,
    pub mismatches: Vec<String>,
}

/// Runs the full reference pipeline and writes every artifact into `out_dir`.
/// Artifact paths in the report are relative to `out_dir`.
pub fn reproduce_paper(out_dir: &Path) -> Result<Reproduction, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let internal = |e: &dyn std::fmt::Display| CliError::Golden(e.to_string());
    let scenario = paper_scenario();
    let d = DisagreementPoint::zero();
    let mut artifacts: Vec<String> = Vec::new();
    let mut write = |name: &str, contents: &str| -> Result<(), CliError> {
        write_file(&out_dir.join(name), contents)?;
        artifacts.push(name.to_string());
        Ok(())
    };

    write("scenario.json", &format!("{}\n", scenario_to_json(&scenario)))?;

    let records = detect_conflicts(&scenario);
    write("conflicts.json", &to_canonical_json(&detect_results(&records)))?;
    write("conflicts.csv", &records_csv(&records))?;

    let a1 = records
        .iter()
        .find(|r| r.category == ConflictCategory::A1)
        .ok_or_else(|| CliError::Golden("no A1 conflict detected".into()))?;
    let derived = derive_payoffs(&scenario, a1, &scenario.default_configuration()).map_err(|e| internal(&e))?;
    let analysis = analyze(&derived.matrix);
    write(
        "game.json",
        &to_canonical_json(&json!({ "conflict": a1, "derived": derived, "analysis": analysis })),
    )?;

    let p1_table = sweep_table(&scenario, P1, &scenario.default_configuration())?;
    let p2_base = scenario.default_configuration().with(P1, 6.0);
    let p2_table = sweep_table(&scenario, P2, &p2_base)?;
    write("sweep_p1.csv", &p1_table.to_csv())?;
    write("sweep_p1.svg", &sweep_svg(&p1_table, "o1, o2 and o1*o2 against p1 (p2 = 100)"))?;
    write("sweep_p2.csv", &p2_table.to_csv())?;
    write("sweep_p2.svg", &sweep_svg(&p2_table, "o1, o2 and o1*o2 against p2 (p1 = 6)"))?;

    let p1_grid = candidate_set(scenario.parameter(P1).expect("p1")).values;
    let p2_grid = candidate_set(scenario.parameter(P2).expect("p2")).values;
    let mut grid_csv = csv_line(&["p1", "p2", "o1", "o2", "product"]);
    let mut o1_grid = Vec::new();
    let mut o2_grid = Vec::new();
    for &a in &p1_grid {
        let (mut c1, mut c2) = (Vec::new(), Vec::new());
        for &b in &p2_grid {
            let cfg = scenario.default_configuration().with(P1, a).with(P2, b);
            let ev = scenario.evaluate(&cfg).map_err(|e| internal(&e))?;
            let product = nash_product(&scenario, &cfg, &d).map_err(|e| internal(&e))?;
            grid_csv.push_str(&csv_line(&[a, b, ev["o1"], ev["o2"], product].map(|v| v.to_string())));
            c1.push(ev["o1"]);
            c2.push(ev["o2"]);
        }
        o1_grid.push(c1);
        o2_grid.push(c2);
    }
    write("grid.csv", &grid_csv)?;
    write("grid_o1.svg", &heat_map("o1 over (p1, p2)", "p1", "p2", &p1_grid, &p2_grid, &o1_grid))?;
    write("grid_o2.svg", &heat_map("o2 over (p1, p2)", "p1", "p2", &p1_grid, &p2_grid, &o2_grid))?;

    let sequential = sequential_nbs(&scenario, &[P1, P2], &d).map_err(|e| internal(&e))?;
    let reversed = sequential_nbs(&scenario, &[P2, P1], &d).map_err(|e| internal(&e))?;
    let ascent =
        coordinate_ascent(&scenario, &scenario.default_configuration(), &d, 100, 1e-12).map_err(|e| internal(&e))?;
    let brute = brute_force_nbs_with_cap(&scenario, &d, DEFAULT_GRID_CAP).map_err(|e| internal(&e))?;
    write(
        "bargain_sequential.json",
        &to_canonical_json(&outcome_results(Method::Sequential, &sequential, json!({ "order": [P1, P2] }))),
    )?;
    write(
        "bargain_sequential_reversed.json",
        &to_canonical_json(&outcome_results(Method::Sequential, &reversed, json!({ "order": [P2, P1] }))),
    )?;
    write(
        "bargain_ascent.json",
        &to_canonical_json(&outcome_results(Method::Ascent, &ascent, json!({ "max_iters": 100, "tol": 1e-12 }))),
    )?;
    write(
        "bargain_brute.json",
        &to_canonical_json(&outcome_results(Method::Brute, &brute, json!({ "grid_cap": DEFAULT_GRID_CAP }))),
    )?;

    let p1 = sequential.config.get(P1).expect("p1");
    let p2 = sequential.config.get(P2).expect("p2");
    let outcomes = [&sequential, &ascent, &brute];
    let methods_agree = outcomes.iter().all(|o| o.config == sequential.config)
        && outcomes
            .iter()
            .all(|o| (o.nash_product - sequential.nash_product).abs() <= AGREEMENT_TOL);

    let mut mismatches = Vec::new();
    if p1 != 6.0 {
        mismatches.push(format!("p1* = {p1}, expected 6"));
    }
    if p2 != 300.0 {
        mismatches.push(format!("p2* = {p2}, expected 300"));
    }
    if !methods_agree {
        mismatches.push("sequential, ascent and brute force disagree".into());
    }
    if p1_table.argmax() != Some(6.0) {
        mismatches.push(format!("p1 sweep peaks at {:?}, expected 6", p1_table.argmax()));
    }
    if !p2_table.rows.windows(2).all(|w| w[1].2 >= w[0].2) {
        mismatches.push("p2 sweep product is not non-decreasing".into());
    }

    let summary = json!({
        "p1": p1,
        "p2": p2,
        "nash_product": sequential.nash_product,
        "methods_agree": methods_agree,
        "methods": {
            "sequential": { "config": sequential.config, "nash_product": sequential.nash_product },
            "ascent": { "config": ascent.config, "nash_product": ascent.nash_product, "converged": ascent.converged },
            "brute": { "config": brute.config, "nash_product": brute.nash_product },
        },
        "reversed_order": { "config": reversed.config, "nash_product": reversed.nash_product },
        "conflicts": conflict_summary(&records),
        "game": { "is_pd": analysis.is_pd, "coordination_gain": analysis.coordination_gain },
        "golden_mismatches": mismatches,
    });
    write("summary.json", &to_canonical_json(&summary))?;

    let mut report = RunReport::new("reproduce-paper", None, summary.clone());
    report.artifacts = artifacts;
    write_file(&out_dir.join("report.json"), &report.to_json())?;
    report.artifacts.push("report.json".into());
    Ok(Reproduction {
        report,
        summary,
        mismatches,
    })
}

pub fn cmd_reproduce_paper(out_dir: &Path, w: &mut dyn Write) -> Result<RunReport, CliError> {
    let repro = reproduce_paper(out_dir)?;
    emit(w, &to_canonical_json(&repro.summary))?;
    if repro.mismatches.is_empty() {
        Ok(repro.report)
    } else {
        Err(CliError::Golden(repro.mismatches.join("; ")))
    }
}

pub fn default_reproduction_dir() -> PathBuf {
    PathBuf::from("reproduction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("o1=0.5").unwrap(), ("o1".into(), 0.5));
        assert_eq!(parse_assignment("x").unwrap_err().exit_code(), 2);
        assert_eq!(parse_assignment("x=abc").unwrap_err().exit_code(), 2);
        assert_eq!(parse_assignment("x=inf").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn payoff_parsing() {
        assert_eq!(parse_payoffs("3,2,4,1").unwrap(), PayoffMatrix::new(3.0, 2.0, 4.0, 1.0).unwrap());
        assert!(parse_payoffs("3,2,4").is_err());
        assert!(parse_payoffs("3,2,4,x").is_err());
        assert!(parse_payoffs("3,2,4,NaN").is_err());
    }

    #[test]
    fn disagreement_accepts_lists() {
        let d = disagreement_point(&["o1=0.1,o2=0.2".into(), "o3=1".into()]).unwrap();
        assert_eq!(d.get("o2"), 0.2);
        assert_eq!(d.get("o3"), 1.0);
        assert_eq!(d.get("missing"), 0.0);
    }
}
