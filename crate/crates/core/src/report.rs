//! Run reports and plots.
//!
//! Reports are JSON with `"schema": 1`. Every non-integer number is written
//! with 17 significant digits, so a report read back gives the same `f64`s.

use crate::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Number, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Metric {
    /// Passes when `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Metric { name: name.into(), value, bound, pass: value <= bound }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Metric { name: name.into(), value, bound, pass: value >= bound }
    }

    /// Passes when `value == bound`.
    pub fn equals(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Metric { name: name.into(), value, bound, pass: value == bound }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub metrics: Vec<Metric>,
    pub artifacts: Vec<String>,
    pub data: Map<String, Value>,
    pub error: Option<String>,
    pub wall_time: f64,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        RunReport {
            command: command.into(),
            seed,
            params: BTreeMap::new(),
            metrics: Vec::new(),
            artifacts: Vec::new(),
            data: Map::new(),
            error: None,
            wall_time: 0.0,
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(name.into(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn metric(&mut self, m: Metric) -> &mut Self {
        self.metrics.push(m);
        self
    }

    pub fn data(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.data.insert(name.into(), serde_json::to_value(value).expect("serializable"));
        self
    }

    /// True when no error was recorded and every metric passed.
    pub fn all_pass(&self) -> bool {
        self.error.is_none() && self.metrics.iter().all(|m| m.pass)
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(SCHEMA_VERSION));
        root.insert("command".into(), Value::from(self.command.clone()));
        root.insert("seed".into(), Value::from(self.seed));
        root.insert("params".into(), serde_json::to_value(&self.params).expect("serializable"));
        root.insert("metrics".into(), serde_json::to_value(&self.metrics).expect("serializable"));
        root.insert("artifacts".into(), serde_json::to_value(&self.artifacts).expect("serializable"));
        root.insert("data".into(), Value::Object(self.data.clone()));
        root.insert("error".into(), self.error.clone().map_or(Value::Null, Value::from));
        root.insert("pass".into(), Value::from(self.all_pass()));
        root.insert("wall_time".into(), float(self.wall_time));
        canonical(Value::Object(root))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serializable") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// A float as a JSON number with 17 significant digits; non-finite values
/// become strings.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("valid number"))
    } else {
        Value::from(x.to_string())
    }
}

/// Rewrites every non-integer number in `v` with 17 significant digits.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone SVG line plot. The output depends only on the input.
pub fn plot_svg(title: &str, series: &[Series]) -> Result<String> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if pts.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidArgument("plot points must be finite".into()));
    }
    let range = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#).unwrap();
    for (v, y) in [(y0, b), (y1, t)] {
        writeln!(s, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.4}</text>"#, l - 4.0).unwrap();
    }
    for (v, x) in [(x0, l), (x1, r)] {
        writeln!(s, r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.4}</text>"#, b + 14.0).unwrap();
    }
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" ")).unwrap();
        for &(x, y) in &ser.points {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, sx(x), sy(y)).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, r - 120.0, t + 14.0 * (k as f64 + 1.0), escape(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(title: &str, series: &[Series], path: &Path) -> Result<()> {
    std::fs::write(path, plot_svg(title, series)?)?;
    Ok(())
}
