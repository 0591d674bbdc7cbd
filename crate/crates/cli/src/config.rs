//! Problem configuration: a JSON document with keys `A`, `b`, `T`, `K`,
//! `method`, `target`, `samples`, `tolerances` and `sweep`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex;
use serde_json::{json, Map, Value};
use wavectl_core::moments::TargetSpec;
use wavectl_core::pipeline::Method;
use wavectl_core::{Problem, System, Target, Tolerances};

pub const DEFAULT_K: usize = 16;
pub const DEFAULT_SAMPLES: usize = 2048;
const MAX_DIM: usize = 32;
const KEYS: [&str; 9] = ["A", "b", "T", "K", "method", "target", "samples", "tolerances", "sweep"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    T,
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T => "T",
            SweepParam::K => "K",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub t: f64,
    pub k: usize,
    pub method: Method,
    pub target: Target,
    pub samples: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub sweep: Option<Sweep>,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ProblemConfig, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("config: cannot read {}: {e}", path.display())])?;
    parse_config(&text)
}

/// Parses a configuration, reporting every invalid field at once.
pub fn parse_config(text: &str) -> Result<ProblemConfig, Vec<String>> {
    let value: Value = serde_json::from_str(text).map_err(|e| vec![format!("config: malformed JSON: {e}")])?;
    let Value::Object(obj) = value else {
        return Err(vec!["config: top level must be an object".into()]);
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) {
            errs.push(format!("{key}: unknown field"));
        }
    }

    let a = match obj.get("A") {
        None => {
            errs.push("A: required".into());
            None
        }
        Some(v) => matrix(v, &mut errs),
    };
    let n = a.as_ref().map(|m| m.len());
    let b = match obj.get("b") {
        None => {
            errs.push("b: required".into());
            None
        }
        Some(v) => real_vector(v, "b", &mut errs).and_then(|b| {
            if let Some(n) = n {
                if b.len() != n {
                    errs.push(format!("b: length {} does not match A ({n}×{n})", b.len()));
                    return None;
                }
            }
            if b.iter().all(|&x| x == 0.0) {
                errs.push("b: must be nonzero".into());
                return None;
            }
            Some(b)
        }),
    };
    let t = match obj.get("T") {
        None => {
            errs.push("T: required".into());
            None
        }
        Some(v) => match horizon(v) {
            Ok(t) => Some(t),
            Err(e) => {
                errs.push(format!("T: {e}"));
                None
            }
        },
    };
    let k = match obj.get("K") {
        None => Some(DEFAULT_K),
        Some(v) => positive_int(v).or_else(|| {
            errs.push("K: must be a positive integer".into());
            None
        }),
    };
    let method = match obj.get("method") {
        None => Some(Method::Raw),
        Some(Value::String(s)) => Method::parse(s).or_else(|| {
            errs.push(format!("method: unknown method {s:?} (expected raw, edd or n2_sharp)"));
            None
        }),
        Some(_) => {
            errs.push("method: must be a string".into());
            None
        }
    };
    let target = match obj.get("target") {
        None => Some(TargetSpec::default()),
        Some(v) => target_spec(v, n, &mut errs),
    };
    if let (Some(k), Some(tg)) = (k, &target) {
        if tg.max_mode() > k {
            errs.push(format!("K: {k} is below the largest target mode {}", tg.max_mode()));
        }
    }
    let samples = match obj.get("samples") {
        None => Some(None),
        Some(v) => match positive_int(v) {
            Some(s) if s >= 2 => Some(Some(s)),
            _ => {
                errs.push("samples: must be an integer ≥ 2".into());
                None
            }
        },
    };
    let tolerances = match obj.get("tolerances") {
        None => Some(BTreeMap::new()),
        Some(v) => tolerance_overrides(v, &mut errs),
    };
    let sweep = match obj.get("sweep") {
        None => Some(None),
        Some(v) => sweep_spec(v, &mut errs).map(Some),
    };
    if method == Some(Method::N2Sharp) {
        if let (Some(n), Some(b)) = (n, &b) {
            if n != 2 || b[1] != 0.0 {
                errs.push("method: n2_sharp needs N = 2 and b = (b₁, 0)".into());
            }
        }
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(ProblemConfig {
        a: a.unwrap(),
        b: b.unwrap(),
        t: t.unwrap(),
        k: k.unwrap(),
        method: method.unwrap(),
        target: target.unwrap(),
        samples: samples.unwrap(),
        tolerances: tolerances.unwrap(),
        sweep: sweep.unwrap(),
    })
}

impl ProblemConfig {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("A".into(), json!(self.a));
        obj.insert("b".into(), json!(self.b));
        obj.insert("T".into(), json!(self.t));
        obj.insert("K".into(), json!(self.k));
        obj.insert("method".into(), json!(self.method.name()));
        obj.insert("target".into(), json!({ "z0": entries(&self.target.z0), "z1": entries(&self.target.z1) }));
        if let Some(s) = self.samples {
            obj.insert("samples".into(), json!(s));
        }
        if !self.tolerances.is_empty() {
            obj.insert("tolerances".into(), json!(self.tolerances));
        }
        if let Some(sw) = &self.sweep {
            let values: Vec<Value> = match sw.param {
                SweepParam::T => sw.values.iter().map(|&v| json!(v)).collect(),
                SweepParam::K => sw.values.iter().map(|&v| json!(v as u64)).collect(),
            };
            obj.insert("sweep".into(), json!({ "param": sw.param.name(), "values": values }));
        }
        Value::Object(obj)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("config serializes")
    }

    /// Profile tolerances with this config's overrides applied.
    pub fn tolerances(&self, profile: &Tolerances) -> Tolerances {
        let mut tol = *profile;
        for (name, &v) in &self.tolerances {
            tol.set(name, v);
        }
        tol
    }

    pub fn problem(&self, profile: &Tolerances) -> Result<Problem, String> {
        let system = System::new(self.a.clone(), self.b.clone()).map_err(|e| format!("A, b: {e}"))?;
        Ok(Problem {
            system,
            t: self.t,
            k_max: self.k,
            method: self.method,
            target: self.target.clone(),
            tol: self.tolerances(profile),
        })
    }
}

/// Accepts a positive number or a multiple of π written as `"4pi"`,
/// `"4*pi"`, `"pi"` or `"2.5π"`.
fn horizon(v: &Value) -> Result<f64, String> {
    let t = match v {
        Value::Number(x) => x.as_f64().ok_or("not a finite number")?,
        Value::String(s) => parse_pi_multiple(s).ok_or_else(|| format!("cannot read {s:?} as a time"))?,
        _ => return Err("must be a number or a multiple of pi".into()),
    };
    if !(t.is_finite() && t > 0.0) {
        return Err(format!("must be positive, got {t}"));
    }
    Ok(t)
}

pub fn parse_pi_multiple(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let coef = s.strip_suffix("pi").or_else(|| s.strip_suffix('π'));
    match coef {
        Some(c) => {
            let c = c.strip_suffix('*').unwrap_or(c);
            let c = if c.is_empty() { 1.0 } else { c.parse::<f64>().ok()? };
            Some(c * PI)
        }
        None => s.parse().ok(),
    }
}

fn positive_int(v: &Value) -> Option<usize> {
    v.as_u64().filter(|&x| x >= 1).map(|x| x as usize)
}

fn finite(v: &Value) -> Option<f64> {
    v.as_f64().filter(|x| x.is_finite())
}

fn real_vector(v: &Value, field: &str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
    let Some(arr) = v.as_array() else {
        errs.push(format!("{field}: must be an array of numbers"));
        return None;
    };
    let out: Option<Vec<f64>> = arr.iter().map(finite).collect();
    if out.is_none() {
        errs.push(format!("{field}: entries must be finite numbers"));
    }
    out
}

fn matrix(v: &Value, errs: &mut Vec<String>) -> Option<Vec<Vec<f64>>> {
    let Some(rows) = v.as_array() else {
        errs.push("A: must be an array of rows".into());
        return None;
    };
    let n = rows.len();
    if n == 0 {
        errs.push("A: must have at least one row".into());
        return None;
    }
    if n > MAX_DIM {
        errs.push(format!("A: dimension {n} exceeds {MAX_DIM}"));
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut ok = true;
    for (i, r) in rows.iter().enumerate() {
        match real_vector(r, &format!("A[{i}]"), errs) {
            Some(row) if row.len() == n => out.push(row),
            Some(row) => {
                errs.push(format!("A: not square (row {i} has {} entries, expected {n})", row.len()));
                ok = false;
            }
            None => ok = false,
        }
    }
    ok.then_some(out)
}

fn component(v: &Value) -> Option<Complex<f64>> {
    match v {
        Value::Number(_) => finite(v).map(|x| Complex::new(x, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(Complex::new(finite(&p[0])?, finite(&p[1])?)),
        _ => None,
    }
}

type Entries = Vec<(usize, Vec<Complex<f64>>)>;

fn target_entries(v: &Value, field: &str, n: Option<usize>, errs: &mut Vec<String>) -> Option<Entries> {
    let Some(arr) = v.as_array() else {
        errs.push(format!("{field}: must be an array of [n, [components]] pairs"));
        return None;
    };
    let mut out = Vec::with_capacity(arr.len());
    let mut ok = true;
    for (i, e) in arr.iter().enumerate() {
        let pair = e.as_array().filter(|p| p.len() == 2);
        let Some(pair) = pair else {
            errs.push(format!("{field}[{i}]: must be [n, [components]]"));
            ok = false;
            continue;
        };
        let Some(m) = positive_int(&pair[0]) else {
            errs.push(format!("{field}[{i}]: mode index must be a positive integer"));
            ok = false;
            continue;
        };
        let comps: Option<Vec<_>> = pair[1].as_array().and_then(|c| c.iter().map(component).collect());
        match comps {
            None => {
                errs.push(format!("{field}[{i}]: components must be numbers or [re, im] pairs"));
                ok = false;
            }
            Some(c) if n.is_some_and(|n| n != c.len()) => {
                errs.push(format!("{field}[{i}]: {} components, expected {}", c.len(), n.unwrap()));
                ok = false;
            }
            Some(c) => out.push((m, c)),
        }
    }
    ok.then_some(out)
}

fn target_spec(v: &Value, n: Option<usize>, errs: &mut Vec<String>) -> Option<Target> {
    let Some(obj) = v.as_object() else {
        errs.push("target: must be an object with z0 and z1".into());
        return None;
    };
    for key in obj.keys() {
        if key != "z0" && key != "z1" {
            errs.push(format!("target.{key}: unknown field"));
        }
    }
    let z0 = obj.get("z0").map_or(Some(Vec::new()), |v| target_entries(v, "target.z0", n, errs));
    let z1 = obj.get("z1").map_or(Some(Vec::new()), |v| target_entries(v, "target.z1", n, errs));
    Some(TargetSpec { z0: z0?, z1: z1? })
}

fn tolerance_overrides(v: &Value, errs: &mut Vec<String>) -> Option<BTreeMap<String, f64>> {
    let Some(obj) = v.as_object() else {
        errs.push("tolerances: must be an object".into());
        return None;
    };
    let mut out = BTreeMap::new();
    let mut ok = true;
    for (name, x) in obj {
        if !Tolerances::NAMES.contains(&name.as_str()) {
            errs.push(format!("tolerances.{name}: unknown tolerance"));
            ok = false;
            continue;
        }
        match finite(x).filter(|&x| x > 0.0) {
            Some(x) => {
                out.insert(name.clone(), x);
            }
            None => {
                errs.push(format!("tolerances.{name}: must be a positive number"));
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn sweep_spec(v: &Value, errs: &mut Vec<String>) -> Option<Sweep> {
    let Some(obj) = v.as_object() else {
        errs.push("sweep: must be an object with param and values".into());
        return None;
    };
    let param = match obj.get("param").and_then(Value::as_str) {
        Some("T") => Some(SweepParam::T),
        Some("K") => Some(SweepParam::K),
        _ => {
            errs.push("sweep.param: must be \"T\" or \"K\"".into());
            None
        }
    };
    let values = match obj.get("values").and_then(Value::as_array) {
        Some(arr) if !arr.is_empty() => Some(arr),
        _ => {
            errs.push("sweep.values: must be a non-empty array".into());
            None
        }
    };
    let (param, values) = (param?, values?);
    let mut out = Vec::with_capacity(values.len());
    for (i, x) in values.iter().enumerate() {
        let parsed = match param {
            SweepParam::T => horizon(x).ok(),
            SweepParam::K => positive_int(x).map(|k| k as f64),
        };
        match parsed {
            Some(p) => out.push(p),
            None => errs.push(format!("sweep.values[{i}]: invalid {} value", param.name())),
        }
    }
    (out.len() == values.len()).then_some(Sweep { param, values: out })
}

fn entries(v: &[(usize, Vec<Complex<f64>>)]) -> Value {
    Value::Array(
        v.iter()
            .map(|(m, c)| {
                let comps: Vec<Value> =
                    c.iter().map(|z| if z.im == 0.0 { json!(z.re) } else { json!([z.re, z.im]) }).collect();
                json!([m, comps])
            })
            .collect(),
    )
}
