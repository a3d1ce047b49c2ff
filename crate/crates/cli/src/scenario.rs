//! Scenario files.
//!
//! ```toml
//! schema = "combidyn.scenario.v1"
//!
//! [fleet]
//! m = 1
//! b = [33.5]
//! theta_ambient = [19.5]
//! theta_lo = [0.0]
//! theta_hi = [4.0]
//! delta = [1.0]
//! c = [10.0]
//! x0 = [2.0]
//!
//! [fleet.a]
//! rows = 1
//! cols = 1
//! data = [1.0]
//!
//! [schedule]
//! step_minutes = 15.0
//! num_steps = 1
//!
//! [case]
//! kind = "target_band"
//! y_lo = [0.0]
//! y_hi = [10.0]
//! ```
//!
//! A `tu` case carries `q = { rows, cols, data }`, `r` and an optional
//! per-step `z_bar`. An optional `[transient]` table lists `xi` and 1-based
//! `members`.

use std::fmt::Write as _;
use std::path::Path;

use combidyn_core::matrix::DenseMatrix;
use combidyn_core::refrigeration::{Case, EtpParams, Scenario, Transient};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "combidyn.scenario.v1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema: String,
    fleet: RawFleet,
    schedule: RawSchedule,
    case: RawCase,
    transient: Option<RawTransient>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFleet {
    m: usize,
    a: RawMatrix<f64>,
    b: Vec<f64>,
    theta_ambient: Vec<f64>,
    theta_lo: Vec<f64>,
    theta_hi: Vec<f64>,
    delta: Vec<f64>,
    c: Vec<f64>,
    x0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    step_minutes: f64,
    num_steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    kind: String,
    y_lo: Option<Vec<f64>>,
    y_hi: Option<Vec<f64>>,
    q: Option<RawMatrix<i64>>,
    r: Option<Vec<i64>>,
    z_bar: Option<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransient {
    xi: Vec<f64>,
    members: Vec<usize>,
}

/// Line lookup for dotted field paths in the source text.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of_offset(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    /// 1-based line where `path` is defined: `key = ...` inside its table, or
    /// the table header itself.
    fn line_of(&self, path: &str) -> Option<usize> {
        let (table, key) = match path.rsplit_once('.') {
            Some((t, k)) => (t, k),
            None => ("", path),
        };
        let mut current = String::new();
        let mut header_line = None;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                if current == path {
                    return Some(n + 1);
                }
                if current == table {
                    header_line = Some(n + 1);
                }
                continue;
            }
            if current == table {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(n + 1);
                    }
                }
            }
        }
        header_line
    }

    fn error(&self, path: &str, message: impl Into<String>) -> CliError {
        CliError::parse(path, self.line_of(path), message)
    }
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let src = Source { text };
    let de = toml::Deserializer::parse(text).map_err(|e| {
        let line = e.span().map(|s| src.line_of_offset(s.start));
        CliError::parse("<document>", line, e.message().to_string())
    })?;
    let raw: RawFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner();
        let line = inner
            .span()
            .map(|s| src.line_of_offset(s.start))
            .or_else(|| src.line_of(&path));
        let path = if path == "." { "<document>".to_string() } else { path };
        CliError::parse(path, line, inner.message().to_string())
    })?;
    build(&src, raw)
}

fn check_len<T>(src: &Source<'_>, path: &str, v: &[T], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(src.error(path, format!("expected {expected} entries, found {}", v.len())));
    }
    Ok(())
}

fn check_finite(src: &Source<'_>, path: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(src.error(path, format!("entry {} is not finite", i + 1))),
        None => Ok(()),
    }
}

fn check_min(src: &Source<'_>, path: &str, v: &[f64], strict: bool) -> Result<()> {
    let bad = v.iter().position(|&x| if strict { x <= 0.0 } else { x < 0.0 });
    match bad {
        Some(i) => {
            let rel = if strict { "> 0" } else { ">= 0" };
            Err(src.error(path, format!("entry {} = {} must be {rel}", i + 1, v[i])))
        }
        None => Ok(()),
    }
}

fn matrix<T: Copy + Default>(src: &Source<'_>, path: &str, raw: RawMatrix<T>) -> Result<DenseMatrix<T>> {
    if raw.data.len() != raw.rows * raw.cols {
        return Err(src.error(
            &format!("{path}.data"),
            format!("expected rows*cols = {} entries, found {}", raw.rows * raw.cols, raw.data.len()),
        ));
    }
    DenseMatrix::from_row_major(raw.rows, raw.cols, raw.data).map_err(|e| src.error(path, e.to_string()))
}

fn build(src: &Source<'_>, raw: RawFile) -> Result<Scenario> {
    if raw.schema != SCHEMA {
        return Err(src.error("schema", format!("expected `{SCHEMA}`, found `{}`", raw.schema)));
    }
    let f = raw.fleet;
    let m = f.m;
    if m == 0 {
        return Err(src.error("fleet.m", "fleet needs at least one unit"));
    }
    if f.a.rows != m || f.a.cols != m {
        return Err(src.error("fleet.a", format!("expected a {m}x{m} matrix, found {}x{}", f.a.rows, f.a.cols)));
    }
    let a = matrix(src, "fleet.a", f.a)?;
    if let Some(i) = a.as_slice().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(src.error("fleet.a.data", format!("entry {} must be finite and >= 0", i + 1)));
    }
    for (name, v) in [
        ("b", &f.b),
        ("theta_ambient", &f.theta_ambient),
        ("theta_lo", &f.theta_lo),
        ("theta_hi", &f.theta_hi),
        ("delta", &f.delta),
        ("c", &f.c),
        ("x0", &f.x0),
    ] {
        let path = format!("fleet.{name}");
        check_len(src, &path, v, m)?;
        check_finite(src, &path, v)?;
    }
    check_min(src, "fleet.b", &f.b, true)?;
    check_min(src, "fleet.delta", &f.delta, false)?;
    check_min(src, "fleet.c", &f.c, false)?;
    if let Some(i) = (0..m).find(|&i| f.theta_lo[i] >= f.theta_hi[i]) {
        return Err(src.error(
            "fleet.theta_lo",
            format!(
                "unit {}: theta_lo {} must be below theta_hi {}",
                i + 1,
                f.theta_lo[i],
                f.theta_hi[i]
            ),
        ));
    }
    let params = EtpParams {
        m,
        a,
        b: f.b,
        theta_ambient: f.theta_ambient,
        theta_lo: f.theta_lo,
        theta_hi: f.theta_hi,
        delta: f.delta,
        c: f.c,
        x0: f.x0,
    };

    let s = raw.schedule;
    if !(s.step_minutes.is_finite() && s.step_minutes >= combidyn_core::refrigeration::MIN_STEP_MINUTES) {
        return Err(src.error(
            "schedule.step_minutes",
            format!(
                "must be at least {} minutes, got {}",
                combidyn_core::refrigeration::MIN_STEP_MINUTES,
                s.step_minutes
            ),
        ));
    }
    let k = s.num_steps;
    if k == 0 {
        return Err(src.error("schedule.num_steps", "must be positive"));
    }

    let c = raw.case;
    let case = match c.kind.as_str() {
        "target_band" => {
            for (name, present) in [("q", c.q.is_some()), ("r", c.r.is_some()), ("z_bar", c.z_bar.is_some())] {
                if present {
                    return Err(src.error(&format!("case.{name}"), "not allowed for kind `target_band`"));
                }
            }
            let y_lo = c.y_lo.ok_or_else(|| src.error("case", "missing field `y_lo`"))?;
            let y_hi = c.y_hi.ok_or_else(|| src.error("case", "missing field `y_hi`"))?;
            for (path, v) in [("case.y_lo", &y_lo), ("case.y_hi", &y_hi)] {
                check_len(src, path, v, k)?;
                check_finite(src, path, v)?;
                check_min(src, path, v, false)?;
            }
            if let Some(i) = (0..k).find(|&i| y_lo[i] > y_hi[i]) {
                return Err(src.error(
                    "case.y_lo",
                    format!("step {}: y_lo {} exceeds y_hi {}", i + 1, y_lo[i], y_hi[i]),
                ));
            }
            Case::TargetBand { y_lo, y_hi }
        }
        "tu" => {
            for (name, present) in [("y_lo", c.y_lo.is_some()), ("y_hi", c.y_hi.is_some())] {
                if present {
                    return Err(src.error(&format!("case.{name}"), "not allowed for kind `tu`"));
                }
            }
            let q = c.q.ok_or_else(|| src.error("case", "missing field `q`"))?;
            if q.cols != m {
                return Err(src.error("case.q", format!("expected {m} columns, found {}", q.cols)));
            }
            let q = matrix(src, "case.q", q)?;
            let r = c.r.ok_or_else(|| src.error("case", "missing field `r`"))?;
            check_len(src, "case.r", &r, q.rows())?;
            if let Some(z) = &c.z_bar {
                check_len(src, "case.z_bar", z, k)?;
                if q.rows() == 0 {
                    return Err(src.error("case.z_bar", "needs at least one row in `q`"));
                }
            }
            Case::Tu { q, r, z_bar: c.z_bar }
        }
        other => {
            return Err(src.error(
                "case.kind",
                format!("unknown kind `{other}`, expected `target_band` or `tu`"),
            ))
        }
    };

    let transient = match raw.transient {
        None => None,
        Some(t) => {
            check_len(src, "transient.xi", &t.xi, t.members.len())?;
            check_finite(src, "transient.xi", &t.xi)?;
            check_min(src, "transient.xi", &t.xi, true)?;
            if let Some(&u) = t.members.iter().find(|&&u| u == 0 || u > m) {
                return Err(src.error("transient.members", format!("unit {u} is outside 1..={m}")));
            }
            let mut sorted = t.members.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != t.members.len() {
                return Err(src.error("transient.members", "units must be distinct"));
            }
            Some(Transient {
                xi: t.xi,
                members: t.members.iter().map(|u| u - 1).collect(),
            })
        }
    };

    let scenario = Scenario {
        params,
        step_minutes: s.step_minutes,
        num_steps: k,
        case,
        transient,
    };
    scenario.validate().map_err(|e| src.error("case", e.to_string()))?;
    Ok(scenario)
}

fn floats(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn ints<T: std::fmt::Display>(v: &[T]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Row-major data, one matrix row per line.
fn matrix_data(rows: usize, row: impl Fn(usize) -> String) -> String {
    let mut out = String::from("[\n");
    for i in 0..rows {
        let _ = writeln!(out, "  {},", row(i));
    }
    out.push(']');
    out
}

/// Serializes a scenario. Floats use the shortest representation that
/// round-trips exactly.
pub fn write_scenario(s: &Scenario) -> String {
    let p = &s.params;
    let m = p.m;
    let mut out = String::new();
    let _ = writeln!(out, "schema = \"{SCHEMA}\"\n");
    let _ = writeln!(out, "[fleet]");
    let _ = writeln!(out, "m = {m}");
    for (name, v) in [
        ("b", &p.b),
        ("theta_ambient", &p.theta_ambient),
        ("theta_lo", &p.theta_lo),
        ("theta_hi", &p.theta_hi),
        ("delta", &p.delta),
        ("c", &p.c),
        ("x0", &p.x0),
    ] {
        let _ = writeln!(out, "{name} = {}", floats(v));
    }
    let _ = writeln!(out, "\n[fleet.a]\nrows = {m}\ncols = {m}");
    let row = |i: usize| {
        let items: Vec<String> = p.a.row(i).iter().map(|x| format!("{x:?}")).collect();
        items.join(", ")
    };
    let _ = writeln!(out, "data = {}", matrix_data(m, row));
    let _ = writeln!(out, "\n[schedule]");
    let _ = writeln!(out, "step_minutes = {:?}", s.step_minutes);
    let _ = writeln!(out, "num_steps = {}", s.num_steps);
    let _ = writeln!(out, "\n[case]");
    match &s.case {
        Case::TargetBand { y_lo, y_hi } => {
            let _ = writeln!(out, "kind = \"target_band\"");
            let _ = writeln!(out, "y_lo = {}", floats(y_lo));
            let _ = writeln!(out, "y_hi = {}", floats(y_hi));
        }
        Case::Tu { q, r, z_bar } => {
            let _ = writeln!(out, "kind = \"tu\"");
            let _ = writeln!(out, "r = {}", ints(r));
            if let Some(z) = z_bar {
                let _ = writeln!(out, "z_bar = {}", ints(z));
            }
            let _ = writeln!(out, "\n[case.q]\nrows = {}\ncols = {}", q.rows(), q.cols());
            let _ = writeln!(out, "data = {}", matrix_data(q.rows(), |i| {
                let items: Vec<String> = q.row(i).iter().map(|x| x.to_string()).collect();
                items.join(", ")
            }));
        }
    }
    if let Some(t) = &s.transient {
        let _ = writeln!(out, "\n[transient]");
        let _ = writeln!(out, "xi = {}", floats(&t.xi));
        let members: Vec<usize> = t.members.iter().map(|u| u + 1).collect();
        let _ = writeln!(out, "members = {}", ints(&members));
    }
    out
}
