//! Machine-readable run reports.
//!
//! Everything except `timings` is a deterministic function of the inputs.
//! Non-finite numbers serialize as `null`.

use std::collections::BTreeMap;

use serde::Serialize;
use wavectl_core::coupling::ConditionsReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConditionsViolated,
    NumericalFailure,
    BadInput,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ConditionsViolated => 2,
            Status::NumericalFailure => 3,
            Status::BadInput => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceJson {
    pub k: u64,
    pub l: u64,
    pub i: usize,
    pub j: usize,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsJson {
    pub n: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub min_separation: f64,
    pub kalman_rank: usize,
    pub kalman_ok: bool,
    pub beta_magnitudes: Vec<f64>,
    pub beta_ok: bool,
    pub resonances: Vec<ResonanceJson>,
    pub t: f64,
    pub t_min: f64,
    pub t_ok: bool,
    pub overall_controllable: bool,
}

impl From<&ConditionsReport> for ConditionsJson {
    fn from(c: &ConditionsReport) -> Self {
        Self {
            n: c.n,
            eigenvalues: c.eigenvalues.iter().map(|&(re, im)| [re, im]).collect(),
            min_separation: c.min_separation,
            kalman_rank: c.kalman_rank,
            kalman_ok: c.kalman_ok,
            beta_magnitudes: c.beta_magnitudes.clone(),
            beta_ok: c.beta_ok,
            resonances: c
                .resonances
                .iter()
                .map(|r| ResonanceJson { k: r.k, l: r.l, i: r.i, j: r.j, defect: r.defect })
                .collect(),
            t: c.t,
            t_min: c.t_min,
            t_ok: c.t_ok,
            overall_controllable: c.overall_controllable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisJson {
    pub method: String,
    pub control_norm: f64,
    pub moment_residual: f64,
    pub cond_estimate: f64,
    pub realification_residual: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationJson {
    pub max_rel_error: f64,
    /// `[k, l]` with `l` counted from 1.
    pub worst_mode: [usize; 2],
    /// Terminal error within `verify_tol` and the conditions hold.
    pub pass: bool,
    pub terminal_ok: bool,
    pub wellposedness_ratio: f64,
    /// Closed form against the quadrature oracle on the same control.
    pub oracle_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestJson {
    pub seed: u64,
    pub terms: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub t: f64,
    pub k: usize,
    pub controllable: Option<bool>,
    pub cond_f64: Option<f64>,
    pub cond_dd: Option<f64>,
    pub max_rel_error: Option<f64>,
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepJson {
    pub param: String,
    pub basis: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub errors: Vec<String>,
    pub forced: bool,
    pub conditions: Option<ConditionsJson>,
    pub synthesis: Option<SynthesisJson>,
    pub verification: Option<VerificationJson>,
    pub self_test: Option<SelfTestJson>,
    pub sweep: Option<SweepJson>,
    pub files: Vec<String>,
    /// Wall-clock seconds per phase; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            status: Status::Ok,
            exit_code: 0,
            errors: Vec::new(),
            forced: false,
            conditions: None,
            synthesis: None,
            verification: None,
            self_test: None,
            sweep: None,
            files: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// The report without `timings`.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        v
    }
}
