//! Task execution and output.

use std::io::Write;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Format, Prepared, Task};
use crate::error::{Error, Result};
use crate::estimators::{
    check_area_law, check_decay, check_domination, check_griffiths, estimate_potential, estimate_wilson,
    oracle_potential, Mode,
};
use crate::forms::CouplingParams;
use crate::oracle::{
    verify_coupling, verify_current_expansion, verify_stationarity, verify_switching, wilson_expectation, Report,
};
use crate::samplers::RNG_ALGORITHM;

/// Exit statuses of the runner.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const REFUSAL: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
}

/// One output record: a JSON object for jsonl and a row for csv.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub json: Value,
    pub csv: Vec<String>,
    /// `Some(false)` when the record is a failed check.
    pub pass: Option<bool>,
}

/// A task-level problem recorded in place of the affected records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refusal {
    pub item: String,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub task: Task,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub refusals: Vec<Refusal>,
}

impl Outcome {
    pub fn failed_checks(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn exit_code(&self) -> i32 {
        if !self.refusals.is_empty() {
            exit::REFUSAL
        } else if self.failed_checks() > 0 {
            exit::CHECK_FAILED
        } else {
            exit::OK
        }
    }
}

/// Exit status for an error raised before any record was produced.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::IO,
        Error::TooLarge(_)
        | Error::HypothesisViolated(_)
        | Error::Infeasible(_)
        | Error::NoBoundingSubsurface
        | Error::InsufficientStatistics(_) => exit::REFUSAL,
        _ => exit::CONFIG,
    }
}

fn refusal_kind(e: &Error) -> &'static str {
    match exit_code_for(e) {
        exit::REFUSAL => "refusal",
        exit::IO => "io",
        _ => "invalid",
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn beta_label(p: &CouplingParams) -> String {
    match p.beta() {
        Some(b) => f(b),
        None => "per-plaquette".into(),
    }
}

fn report_row(r: &Report) -> Row {
    Row {
        json: serde_json::to_value(r).unwrap(),
        csv: vec![
            r.check.clone(),
            serde_json::to_string(&r.gamma).unwrap(),
            r.params.to_string(),
            r.lhs.clone(),
            r.rhs.clone(),
            f(r.metric),
            r.pass.to_string(),
        ],
        pass: Some(r.pass),
    }
}

const REPORT_COLUMNS: [&str; 7] = ["check", "gamma", "params", "lhs", "rhs", "metric", "pass"];

struct Sink {
    rows: Vec<Row>,
    refusals: Vec<Refusal>,
}

impl Sink {
    /// Record a result, or a refusal for everything except invalid input,
    /// which was meant to be caught by validation and aborts the run.
    fn push(&mut self, item: impl Into<String>, r: Result<Vec<Row>>) -> Result<()> {
        match r {
            Ok(rows) => self.rows.extend(rows),
            Err(e) if exit_code_for(&e) == exit::REFUSAL => self.refusals.push(Refusal {
                item: item.into(),
                kind: refusal_kind(&e),
                message: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

/// Run a prepared experiment. Records come out in a fixed order that does
/// not depend on the thread count.
pub fn run(p: &Prepared) -> Result<Outcome> {
    let cfg = &p.resolved;
    let cx = &p.complex;
    let o = &cfg.options;
    let mut sink = Sink { rows: Vec::new(), refusals: Vec::new() };
    let mode = o.mode.unwrap_or(Mode::Oracle);
    let mc = p.mc.as_ref();
    let columns: Vec<&'static str> = match cfg.task {
        Task::VerifyCurrentExpansion => {
            for (li, g) in p.loops.iter().enumerate() {
                for params in &p.params {
                    let item = format!("loop {li}, {}", params.label());
                    sink.push(item, verify_current_expansion(cx, g, params).map(|r| vec![report_row(&r)]))?;
                }
            }
            REPORT_COLUMNS.to_vec()
        }
        Task::VerifySwitching => {
            let k = o.max_total_mass.unwrap();
            for params in &p.params {
                let beta = BigRational::from_float(params.beta().unwrap()).unwrap();
                for (i, g1) in p.loops.iter().enumerate() {
                    for (j, g2) in p.loops.iter().enumerate() {
                        for func in &o.functionals {
                            let item = format!("loops ({i}, {j}), {func:?}, {}", params.label());
                            let r = verify_switching(cx, g1, g2, *func, k, &beta);
                            sink.push(item, r.map(|r| vec![report_row(&r)]))?;
                        }
                    }
                }
            }
            REPORT_COLUMNS.to_vec()
        }
        Task::VerifyCoupling => {
            for params in &p.params {
                for step in &o.steps {
                    for (li, g) in p.loops.iter().enumerate() {
                        if step.sourceless_only() && !g.is_empty() {
                            continue;
                        }
                        let item = format!("{step:?}, loop {li}, {}", params.label());
                        sink.push(item, verify_coupling(cx, *step, g, params).map(|r| vec![report_row(&r)]))?;
                    }
                }
                for d in &o.dynamics {
                    let item = format!("{d:?}, {}", params.label());
                    sink.push(item, verify_stationarity(cx, *d, params).map(|r| vec![report_row(&r)]))?;
                }
            }
            REPORT_COLUMNS.to_vec()
        }
        Task::OracleWilson => {
            for (li, g) in p.loops.iter().enumerate() {
                for params in &p.params {
                    let r = wilson_expectation(cx, g, params).map(|w| {
                        vec![Row {
                            json: json!({"loop": li, "params": params_value(params), "value": w.to_f64(), "exact": format!("{w:.30}")}),
                            csv: vec![li.to_string(), beta_label(params), f(w.to_f64())],
                            pass: None,
                        }]
                    });
                    sink.push(format!("loop {li}, {}", params.label()), r)?;
                }
            }
            vec!["loop", "beta", "value"]
        }
        Task::Estimate => {
            let mc = mc.unwrap();
            let mut block = 0;
            for (li, g) in p.loops.iter().enumerate() {
                for params in &p.params {
                    for route in &o.routes {
                        let r = estimate_wilson(cx, g, *route, params, &mc.offset(block)).map(|e| {
                            vec![Row {
                                json: json!({"loop": li, "params": params_value(params), "estimate": e}),
                                csv: vec![
                                    li.to_string(),
                                    e.route.clone(),
                                    beta_label(params),
                                    f(e.value),
                                    f(e.se),
                                    e.batches.to_string(),
                                    e.samples.to_string(),
                                ],
                                pass: None,
                            }]
                        });
                        block += 1;
                        sink.push(format!("loop {li}, {route:?}, {}", params.label()), r)?;
                    }
                }
            }
            vec!["loop", "route", "beta", "value", "se", "batches", "samples"]
        }
        Task::Potential => {
            let r = o.r.unwrap();
            for (i, params) in p.params.iter().enumerate() {
                let fit = match mode {
                    Mode::Oracle => oracle_potential(cx, r, &o.ts, params),
                    Mode::Mc => estimate_potential(cx, r, &o.ts, params, &mc.unwrap().offset(i as u64)),
                };
                let rows = fit.map(|fit| {
                    let pass = fit.subadditivity.iter().all(|s| s.pass);
                    fit.points
                        .iter()
                        .map(|pt| Row {
                            json: json!({"params": params_value(params), "r": fit.r, "point": pt, "v": fit.v, "residual": fit.residual, "subadditivity": fit.subadditivity, "flags": fit.flags}),
                            csv: vec![
                                fit.r.to_string(),
                                pt.t.to_string(),
                                beta_label(params),
                                f(pt.estimate.value),
                                f(pt.estimate.se),
                                opt(pt.v),
                            ],
                            pass: Some(pass),
                        })
                        .collect()
                });
                sink.push(params.label(), rows)?;
            }
            vec!["R", "T", "beta", "estimate", "se", "v"]
        }
        Task::AreaLaw => {
            for (li, spec) in cfg.loops.iter().enumerate() {
                for (i, params) in p.params.iter().enumerate() {
                    let beta = params.beta().unwrap();
                    let block = (li * p.params.len() + i) as u64;
                    let mc_i = mc.map(|m| m.offset(block));
                    let r = check_area_law(cx, spec, beta, mode, mc_i.as_ref()).map(|a| {
                        vec![Row {
                            json: json!({"loop": li, "report": a}),
                            csv: vec![
                                li.to_string(),
                                f(beta),
                                a.area.to_string(),
                                f(a.lhs),
                                opt(a.se),
                                f(a.bound),
                                a.pass.to_string(),
                            ],
                            pass: Some(a.pass),
                        }]
                    });
                    sink.push(format!("loop {li}, {}", params.label()), r)?;
                }
            }
            vec!["loop", "beta", "area", "lhs", "se", "bound", "pass"]
        }
        Task::Griffiths => {
            let betas: Vec<f64> = p.params.iter().map(|q| q.beta().unwrap()).collect();
            let mut block = 0;
            for i in 0..p.loops.len() {
                for j in i..p.loops.len() {
                    let mc_i = mc.map(|m| m.offset(block * betas.len() as u64));
                    block += 1;
                    let r = check_griffiths(cx, &p.loops[i], &p.loops[j], &betas, mode, mc_i.as_ref()).map(|g| {
                        g.entries
                            .iter()
                            .map(|e| Row {
                                json: json!({"loops": [i, j], "mode": g.mode, "coefficientwise": g.coefficientwise, "entry": e}),
                                csv: vec![
                                    i.to_string(),
                                    j.to_string(),
                                    f(e.beta),
                                    f(e.product),
                                    f(e.factorized),
                                    opt(e.se),
                                    e.first_pass.to_string(),
                                    e.second_pass.to_string(),
                                ],
                                pass: Some(e.first_pass && e.second_pass),
                            })
                            .collect()
                    });
                    sink.push(format!("loops ({i}, {j})"), r)?;
                }
            }
            vec!["loop1", "loop2", "beta", "product", "factorized", "se", "first_pass", "second_pass"]
        }
        Task::Domination => {
            for (i, params) in p.params.iter().enumerate() {
                let beta = params.beta().unwrap();
                let mc_i = mc.map(|m| m.offset(i as u64));
                let r = check_domination(cx, beta, mode, mc_i.as_ref()).map(|d| {
                    let mut rows: Vec<Row> = d
                        .events
                        .iter()
                        .map(|e| Row {
                            json: json!({"beta": beta, "mode": d.mode, "event": e}),
                            csv: vec![
                                f(beta),
                                e.measure.clone(),
                                serde_json::to_string(&e.plaquettes).unwrap(),
                                f(e.lower),
                                f(e.value),
                                f(e.upper),
                                opt(e.se),
                                e.pass.to_string(),
                            ],
                            pass: Some(e.pass),
                        })
                        .collect();
                    if let Some(c) = &d.conditional {
                        rows.push(Row {
                            json: json!({"beta": beta, "mode": d.mode, "conditional": c}),
                            csv: vec![
                                f(beta),
                                "conditional-inclusion".into(),
                                format!("all ({} pairs)", c.checked),
                                f(c.lower),
                                format!("{}..{}", c.min, c.max),
                                f(c.upper),
                                String::new(),
                                c.pass.to_string(),
                            ],
                            pass: Some(c.pass),
                        });
                    }
                    rows
                });
                sink.push(params.label(), r)?;
            }
            vec!["beta", "measure", "plaquettes", "lower", "value", "upper", "se", "pass"]
        }
        Task::Covariance => {
            for (i, params) in p.params.iter().enumerate() {
                let r = check_decay(cx, &p.loops[0], &p.loops[1..], params, &mc.unwrap().offset(i as u64)).map(|d| {
                    d.points
                        .iter()
                        .map(|pt| Row {
                            json: json!({"params": params_value(params), "point": pt, "monotone": d.monotone, "fit": d.fit, "metric": d.metric}),
                            csv: vec![beta_label(params), pt.distance.to_string(), f(pt.estimate.value), f(pt.estimate.se)],
                            pass: Some(d.monotone),
                        })
                        .collect()
                });
                sink.push(params.label(), r)?;
            }
            vec!["beta", "distance", "covariance", "se"]
        }
    };
    Ok(Outcome { task: cfg.task, columns, rows: sink.rows, refusals: sink.refusals })
}

fn params_value(p: &CouplingParams) -> Value {
    match p.beta() {
        Some(b) => json!({ "beta": b }),
        None => json!({ "beta_p": p.betas() }),
    }
}

/// Header fields shared by both formats. Only `timestamp` varies between
/// runs of the same config.
pub fn header(resolved: &ExperimentConfig) -> Result<Value> {
    let text = resolved.to_toml()?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(json!({
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "version": env!("CARGO_PKG_VERSION"),
        "rng_algorithm": RNG_ALGORITHM,
        "config_hash": hash,
        "config": resolved,
    }))
}

/// Serialize the header line followed by the payload.
pub fn write_output(out: &mut dyn Write, format: Format, header: &Value, outcome: &Outcome) -> Result<()> {
    let task = outcome.task.id();
    match format {
        Format::Jsonl => {
            writeln!(out, "{}", json!({ "header": header }))?;
            for r in &outcome.rows {
                writeln!(out, "{}", json!({ "task": task, "record": r.json }))?;
            }
            for r in &outcome.refusals {
                writeln!(out, "{}", json!({ "task": task, "refusal": r }))?;
            }
        }
        Format::Csv => {
            writeln!(out, "# {header}")?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(&outcome.columns).map_err(io)?;
            for r in &outcome.rows {
                w.write_record(&r.csv).map_err(io)?;
            }
            out.write_all(&w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
            for r in &outcome.refusals {
                writeln!(out, "# {}: {}: {}", r.kind, r.item, r.message)?;
            }
        }
    }
    Ok(())
}
