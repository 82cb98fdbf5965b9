//! JSON formats for instances, solve reports, and oracle results.
//!
//! Floats go through `serde_json`, which writes the shortest decimal that
//! round-trips, so parse -> emit -> parse is the identity.

mod gen;

pub use gen::{generate, GenParams};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bnb::SolveReport;
use crate::error::{Error, Result};
use crate::instance::{validate_instance, QcqpInstance, QuadConstraint, Violation, ViolationCode};
use crate::oracle::OracleResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConstraintFile {
    #[serde(rename = "Qi")]
    pub qi_mat: Vec<Vec<f64>>,
    pub qi: Vec<f64>,
    pub di: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "Q")]
    pub q_mat: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub quad_constraints: Vec<QuadConstraintFile>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl From<&QcqpInstance> for InstanceFile {
    fn from(inst: &QcqpInstance) -> Self {
        Self {
            n: inst.n(),
            m: inst.m(),
            p: inst.p(),
            q_mat: rows(&inst.q_mat),
            q: inst.q_vec.iter().copied().collect(),
            a: rows(&inst.a),
            b: inst.b.iter().copied().collect(),
            quad_constraints: inst
                .quad_constraints
                .iter()
                .map(|c| QuadConstraintFile {
                    qi_mat: rows(&c.matrix),
                    qi: c.linear.iter().copied().collect(),
                    di: c.rhs,
                })
                .collect(),
        }
    }
}

impl InstanceFile {
    /// Checks the declared sizes against the arrays and builds the instance.
    pub fn to_instance(&self) -> Result<QcqpInstance> {
        let mut bad = Vec::new();
        let mut expect = |ok: bool, message: String| {
            if !ok {
                bad.push(Violation {
                    code: ViolationCode::DimensionMismatch,
                    message,
                });
            }
        };
        let (n, m, p) = (self.n, self.m, self.p);
        expect(self.q_mat.len() == n, format!("Q has {} rows, n = {n}", self.q_mat.len()));
        for (i, r) in self.q_mat.iter().enumerate() {
            expect(r.len() == n, format!("Q[{i}] has {} entries, n = {n}", r.len()));
        }
        expect(self.q.len() == n, format!("q has {} entries, n = {n}", self.q.len()));
        expect(self.a.len() == m, format!("A has {} rows, m = {m}", self.a.len()));
        for (i, r) in self.a.iter().enumerate() {
            expect(r.len() == n, format!("A[{i}] has {} entries, n = {n}", r.len()));
        }
        expect(self.b.len() == m, format!("b has {} entries, m = {m}", self.b.len()));
        expect(
            self.quad_constraints.len() == p,
            format!("quad_constraints has {} entries, p = {p}", self.quad_constraints.len()),
        );
        for (k, c) in self.quad_constraints.iter().enumerate() {
            expect(
                c.qi_mat.len() == n && c.qi_mat.iter().all(|r| r.len() == n),
                format!("quad_constraints[{k}].Qi is not {n}x{n}"),
            );
            expect(
                c.qi.len() == n,
                format!("quad_constraints[{k}].qi has {} entries, n = {n}", c.qi.len()),
            );
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad));
        }

        let matrix = |r: &[Vec<f64>], cols: usize| {
            DMatrix::from_row_iterator(r.len(), cols, r.iter().flatten().copied())
        };
        Ok(QcqpInstance::new(
            matrix(&self.q_mat, n),
            DVector::from_vec(self.q.clone()),
            matrix(&self.a, n),
            DVector::from_vec(self.b.clone()),
            self.quad_constraints
                .iter()
                .map(|c| {
                    QuadConstraint::new(
                        matrix(&c.qi_mat, n),
                        DVector::from_vec(c.qi.clone()),
                        c.di,
                    )
                })
                .collect(),
        ))
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses without semantic validation; malformed JSON and wrong shapes or
/// types are `Parse` errors carrying the JSON path and the offset of the byte
/// at which the error was detected.
pub fn parse_instance_file(text: &str) -> Result<InstanceFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let offset = byte_offset(text, inner.line(), inner.column());
        let full = inner.to_string();
        let message = match full.rfind(" at line ") {
            Some(cut) => full[..cut].to_string(),
            None => full,
        };
        Error::Parse {
            offset,
            path,
            message,
        }
    })?;
    Ok(file)
}

/// Parses and validates an instance.
pub fn parse_instance(text: &str) -> Result<QcqpInstance> {
    let inst = parse_instance_file(text)?.to_instance()?;
    let report = validate_instance(&inst);
    if !report.valid {
        return Err(Error::Validation(report.violations));
    }
    Ok(inst)
}

pub fn emit_instance(inst: &QcqpInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: u64,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub node_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub status: String,
    pub value: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub y0: Option<f64>,
    pub yy: Option<Vec<f64>>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub gap: Option<f64>,
    pub epsilon: f64,
    pub iterations: u64,
    pub cp_solves: u64,
    pub lp_solves: u64,
    pub wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEntry>>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl ReportFile {
    pub fn from_report(rep: &SolveReport, with_trace: bool) -> Self {
        let has_point = rep.x_star.is_some();
        Self {
            status: rep.status.as_str().to_string(),
            value: rep.value(),
            x: rep.x_star.as_ref().map(|x| x.iter().copied().collect()),
            y0: rep.y_star.as_ref().map(|y| y.y0),
            yy: rep.y_star.as_ref().map(|y| y.yy.iter().copied().collect()),
            lower_bound: finite(rep.lb).filter(|_| has_point),
            upper_bound: finite(rep.ub),
            gap: finite(rep.gap),
            epsilon: rep.epsilon,
            iterations: rep.iterations,
            cp_solves: rep.counters.cp_solves,
            lp_solves: rep.counters.lp_solves,
            wall_time_seconds: rep.wall_time_seconds,
            trace: with_trace.then(|| {
                rep.trace
                    .iter()
                    .map(|t| TraceEntry {
                        iter: t.iter,
                        lb: finite(t.lb),
                        ub: finite(t.ub),
                        node_diameter: t.node_diameter,
                    })
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

/// Shortest round-trip digits, in scientific notation for extreme magnitudes.
fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), fmt_num)
}

/// Human-readable summary of a solve.
pub fn report_text(rep: &SolveReport, with_trace: bool) -> String {
    let file = ReportFile::from_report(rep, with_trace);
    let mut out = String::new();
    out.push_str(&format!("status       {}\n", file.status));
    out.push_str(&format!("value        {}\n", fmt_opt(file.value)));
    if let Some(x) = &file.x {
        out.push_str(&format!("x            {}\n", fmt_vec(x)));
    }
    out.push_str(&format!("lower bound  {}\n", fmt_opt(file.lower_bound)));
    out.push_str(&format!("upper bound  {}\n", fmt_opt(file.upper_bound)));
    out.push_str(&format!(
        "gap          {}  (epsilon {})\n",
        fmt_opt(file.gap),
        fmt_num(file.epsilon)
    ));
    out.push_str(&format!(
        "iterations   {}  (cp solves {}, lp solves {})\n",
        file.iterations, file.cp_solves, file.lp_solves
    ));
    out.push_str(&format!("wall time    {:.3}s\n", file.wall_time_seconds));
    if let Some(msg) = &rep.message {
        out.push_str(&format!("note         {msg}\n"));
    }
    if let Some(trace) = &file.trace {
        out.push_str("\n  iter             lb             ub       diameter\n");
        for t in trace {
            out.push_str(&format!(
                "{:>6} {:>14} {:>14} {:>14.6e}\n",
                t.iter,
                fmt_opt(t.lb.map(|x| (x * 1e9).round() / 1e9)),
                fmt_opt(t.ub.map(|x| (x * 1e9).round() / 1e9)),
                t.node_diameter
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub method: String,
    pub value: f64,
    pub x: Vec<f64>,
    pub resolution: f64,
    pub tolerance: f64,
    pub guarantee: String,
}

impl From<&OracleResult> for OracleFile {
    fn from(r: &OracleResult) -> Self {
        Self {
            method: r.method.as_str().to_string(),
            value: r.value,
            x: r.x.iter().copied().collect(),
            resolution: r.resolution,
            tolerance: r.tolerance,
            guarantee: r.guarantee.clone(),
        }
    }
}

impl OracleFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}
