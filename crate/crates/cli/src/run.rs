//! Command execution: analyze, synthesize, verify and sweep.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavectl_core::coupling::{decompose, ConditionsReport};
use wavectl_core::pipeline::{convert_problem, gram_condition, Method, Synthesized};
use wavectl_core::spectrum::build_frequencies;
use wavectl_core::waveform::{duhamel_exact, evolve, evolve_quadrature, modal_differences, reconstruct};
use wavectl_core::{Control, DoubleDouble, Error, Problem, Tolerances};

use crate::config::{ProblemConfig, SweepParam};
use crate::report::{
    ConditionsJson, RunReport, SelfTestJson, Status, SweepJson, SweepRow, SynthesisJson, VerificationJson,
};

pub const STATE_POINTS: usize = 513;
const SELF_TEST_TERMS: usize = 6;
const SELF_TEST_TOL: f64 = 1e-6;
/// Phase advance per quadrature step for the oracle runs.
const ORACLE_PHASE_STEP: f64 = 1e-3;
const MAX_ORACLE_SAMPLES: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Synthesize,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Synthesize => "synthesize",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub method: Option<Method>,
    pub seed: Option<u64>,
    /// Run the numerics even when a condition fails. Control files are
    /// still withheld.
    pub force: bool,
    pub profile: Tolerances,
}

impl Default for Options {
    fn default() -> Self {
        Self { out: None, method: None, seed: None, force: false, profile: Tolerances::default() }
    }
}

pub fn status_of(e: &Error) -> Status {
    if e.is_condition_violation() {
        Status::ConditionsViolated
    } else if e.is_numerical() || matches!(e, Error::NotHermitian { .. }) {
        Status::NumericalFailure
    } else {
        Status::BadInput
    }
}

/// Report for a configuration that failed validation.
pub fn bad_input(command: Command, errors: Vec<String>) -> RunReport {
    let mut r = RunReport::new(command.name());
    r.errors = errors;
    r.set_status(Status::BadInput);
    r
}

/// Runs one command; artifacts go to `opts.out` when set. The report is
/// also written there as `report.json`.
pub fn run(command: Command, config: &ProblemConfig, opts: &Options) -> RunReport {
    let start = Instant::now();
    let mut config = config.clone();
    if let Some(m) = opts.method {
        config.method = m;
    }
    let mut r = RunReport::new(command.name());
    r.forced = opts.force;
    match config.problem(&opts.profile) {
        Err(e) => {
            r.errors.push(e);
            r.set_status(Status::BadInput);
        }
        Ok(problem) => {
            if config.method == Method::N2Sharp && (config.dim() != 2 || config.b[1] != 0.0) {
                r.errors.push("method: n2_sharp needs N = 2 and b = (b₁, 0)".into());
                r.set_status(Status::BadInput);
            } else if command == Command::Sweep {
                sweep(&config, opts, &mut r);
            } else {
                single(command, &config, &problem, opts, &mut r);
            }
        }
    }
    r.timings.insert("total".into(), start.elapsed().as_secs_f64());
    if let Some(dir) = &opts.out {
        let path = dir.join("report.json");
        r.files.push(path.display().to_string());
        if let Err(e) = write_file(&path, &r.to_text()) {
            r.errors.push(e);
            r.set_status(Status::BadInput);
        }
    }
    r
}

fn fail(r: &mut RunReport, e: &Error) {
    r.errors.push(e.to_string());
    r.set_status(status_of(e));
}

fn single(command: Command, config: &ProblemConfig, problem: &Problem, opts: &Options, r: &mut RunReport) {
    let clock = Instant::now();
    let conditions = problem.conditions();
    r.timings.insert("analyze".into(), clock.elapsed().as_secs_f64());
    let controllable = match &conditions {
        Ok(c) => {
            r.conditions = Some(ConditionsJson::from(c));
            c.overall_controllable
        }
        Err(e) => {
            fail(r, e);
            if !e.is_condition_violation() {
                return;
            }
            false
        }
    };
    if !controllable {
        r.set_status(Status::ConditionsViolated);
        if let Ok(c) = &conditions {
            r.errors.extend(violations(c));
        }
    }
    if command == Command::Analyze || (!controllable && !opts.force) {
        return;
    }

    let clock = Instant::now();
    let run = problem.synthesize();
    r.timings.insert("synthesize".into(), clock.elapsed().as_secs_f64());
    let run = match run {
        Ok(run) => run,
        Err(e) => return fail(r, &e),
    };
    r.synthesis = Some(SynthesisJson {
        method: config.method.name().into(),
        control_norm: run.control.l2_norm(),
        moment_residual: run.synthesis.moment_residual,
        cond_estimate: run.synthesis.cond_estimate,
        realification_residual: run.control.realification_residual,
        terms: run.control.combo.len(),
    });
    let mut artifacts: Vec<(&str, String)> = vec![
        ("control.csv", control_csv(&run.control, config.samples())),
        ("control_combo.json", combo_json(&run.control)),
    ];

    if command == Command::Verify {
        let clock = Instant::now();
        let checked = verification(problem, &run, controllable);
        r.timings.insert("verify".into(), clock.elapsed().as_secs_f64());
        match checked {
            Ok((v, state)) => {
                if !v.terminal_ok && controllable {
                    r.set_status(Status::NumericalFailure);
                    r.errors.push(format!("terminal error {:e} exceeds verify_tol", v.max_rel_error));
                }
                r.verification = Some(v);
                artifacts.push(("state.csv", state));
            }
            Err(e) => return fail(r, &e),
        }
        if let Some(seed) = opts.seed {
            let clock = Instant::now();
            match self_test(problem, seed) {
                Ok(s) => r.self_test = Some(s),
                Err(e) => r.errors.push(format!("self-test: {e}")),
            }
            r.timings.insert("self_test".into(), clock.elapsed().as_secs_f64());
        }
    }

    if !controllable {
        return;
    }
    if let Some(dir) = &opts.out {
        for (name, text) in artifacts {
            let path = dir.join(name);
            match write_file(&path, &text) {
                Ok(()) => r.files.push(path.display().to_string()),
                Err(e) => {
                    r.errors.push(e);
                    r.set_status(Status::BadInput);
                }
            }
        }
    }
}

fn violations(c: &ConditionsReport) -> Vec<String> {
    let mut out = Vec::new();
    if !c.kalman_ok {
        out.push(format!("Kalman condition fails (rank {} of {}, beta_ok = {})", c.kalman_rank, c.n, c.beta_ok));
    }
    for res in &c.resonances {
        out.push(format!("resonance k = {}, l = {} between eigenvalues {} and {}", res.k, res.l, res.i + 1, res.j + 1));
    }
    if !c.t_ok {
        out.push(format!("T = {} is below 2πN = {}", c.t, c.t_min));
    }
    out
}

fn oracle_samples(t: f64, max_freq: f64) -> usize {
    ((t * max_freq.max(1.0) / ORACLE_PHASE_STEP).ceil() as usize + 1).clamp(1024, MAX_ORACLE_SAMPLES)
}

fn verification(problem: &Problem, run: &Synthesized<f64>, controllable: bool) -> wavectl_core::Result<(VerificationJson, String)> {
    let v = problem.verify(run)?;
    let prep = &run.prepared;
    let max_freq = prep.grid.max_abs().max(run.control.combo.iter().map(|c| c.0.norm()).fold(0.0, f64::max));
    let oracle = evolve(&prep.spec, &prep.grid, &run.control, problem.t, Some(oracle_samples(problem.t, max_freq)))?;
    let oracle_residual = oracle.per_mode_residuals.map(|d| d.into_iter().fold(0.0, f64::max));
    let json = VerificationJson {
        max_rel_error: v.max_rel_error,
        worst_mode: [v.worst_mode.0, v.worst_mode.1 + 1],
        pass: v.pass && controllable,
        terminal_ok: v.pass,
        wellposedness_ratio: v.wellposedness_ratio,
        oracle_residual,
    };
    Ok((json, state_csv(&v.achieved, &prep.spec)))
}

/// Closed form against quadrature on a random real-frequency combination.
pub fn self_test(problem: &Problem, seed: u64) -> wavectl_core::Result<SelfTestJson> {
    let tol = &problem.tol;
    let spec = decompose(&problem.system, tol)?;
    let grid = build_frequencies(&spec, problem.k_max, tol.zero_tol, tol.collision_threshold(problem.k_max))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = grid.max_abs() + 1.0;
    let combo: Vec<_> = (0..SELF_TEST_TERMS)
        .map(|_| {
            let nu = Complex::new(rng.gen_range(-span..span), 0.0);
            (nu, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    let f = Control::new(problem.t, combo);
    let samples = oracle_samples(problem.t, span);
    let exact = duhamel_exact(&spec, &grid, &f, problem.t);
    let quad = evolve_quadrature(&spec, &grid, &f.sample(samples), problem.t)?;
    let max_residual = modal_differences(&exact, &quad).into_iter().fold(0.0, f64::max);
    Ok(SelfTestJson { seed, terms: SELF_TEST_TERMS, samples, max_residual, pass: max_residual <= SELF_TEST_TOL })
}

fn sweep(config: &ProblemConfig, opts: &Options, r: &mut RunReport) {
    let Some(sw) = &config.sweep else {
        r.errors.push("sweep: the config has no sweep section".into());
        return r.set_status(Status::BadInput);
    };
    let clock = Instant::now();
    let rows: Vec<SweepRow> = std::thread::scope(|s| {
        let handles: Vec<_> = sw
            .values
            .iter()
            .map(|&value| {
                let mut c = config.clone();
                match sw.param {
                    SweepParam::T => c.t = value,
                    SweepParam::K => c.k = value as usize,
                }
                s.spawn(move || sweep_point(value, &c, &opts.profile))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    r.timings.insert("sweep".into(), clock.elapsed().as_secs_f64());
    let table = sweep_csv(&rows);
    r.sweep = Some(SweepJson {
        param: sw.param.name().into(),
        basis: if config.method == Method::Raw { "raw" } else { "edd" }.into(),
        rows,
    });
    if let Some(dir) = &opts.out {
        let path = dir.join("sweep.csv");
        match write_file(&path, &table) {
            Ok(()) => r.files.push(path.display().to_string()),
            Err(e) => {
                r.errors.push(e);
                r.set_status(Status::BadInput);
            }
        }
    }
}

fn sweep_point(value: f64, config: &ProblemConfig, profile: &Tolerances) -> SweepRow {
    let mut row = SweepRow {
        value,
        t: config.t,
        k: config.k,
        controllable: None,
        cond_f64: None,
        cond_dd: None,
        max_rel_error: None,
        pass: None,
        error: None,
    };
    let mut errors = Vec::new();
    if config.target.max_mode() > config.k {
        row.error = Some(format!("K = {} is below the largest target mode {}", config.k, config.target.max_mode()));
        return row;
    }
    let problem = match config.problem(profile) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e);
            return row;
        }
    };
    match problem.conditions() {
        Ok(c) => row.controllable = Some(c.overall_controllable),
        Err(e) => errors.push(e.to_string()),
    }
    let basis = problem.method.basis();
    match gram_condition(&problem.system, problem.t, problem.k_max, basis, &problem.tol) {
        Ok(c) => row.cond_f64 = Some(c),
        Err(e) => errors.push(e.to_string()),
    }
    let dd = convert_problem(&problem, problem.tol.cast::<DoubleDouble>())
        .and_then(|q| gram_condition(&q.system, q.t, q.k_max, basis, &q.tol));
    match dd {
        Ok(c) => row.cond_dd = Some(c.to_f64()),
        Err(e) => errors.push(format!("double-double: {e}")),
    }
    match problem.solve() {
        Ok(s) => {
            row.max_rel_error = Some(s.verify.max_rel_error);
            row.pass = Some(s.verify.pass && row.controllable == Some(true));
        }
        Err(e) => errors.push(e.to_string()),
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("value,T,K,controllable,cond_f64,cond_dd,max_rel_error,pass\n");
    for r in rows {
        let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{},{},{},{},{},{}",
            r.value,
            r.t,
            r.k,
            flag(r.controllable),
            num(r.cond_f64),
            num(r.cond_dd),
            num(r.max_rel_error),
            flag(r.pass)
        );
    }
    s
}

/// `t,f` on a uniform grid; complex controls get `t,f_re,f_im`.
pub fn control_csv(f: &Control, samples: usize) -> String {
    let real = is_real_combo(f);
    let smp = f.sample(samples);
    let mut s = String::from(if real { "t,f\n" } else { "t,f_re,f_im\n" });
    for (j, v) in smp.values.iter().enumerate() {
        let t = if j + 1 == samples { f.t } else { smp.dt * j as f64 };
        if real {
            let _ = writeln!(s, "{t:.16e},{:.16e}", v.re);
        } else {
            let _ = writeln!(s, "{t:.16e},{:.16e},{:.16e}", v.re, v.im);
        }
    }
    s
}

/// Terms come in conjugate pairs `(ν, α)`, `(−conj ν, conj α)`.
fn is_real_combo(f: &Control) -> bool {
    f.combo.iter().all(|&(nu, al)| {
        f.combo.iter().any(|&(m, b)| {
            (m + nu.conj()).norm() <= 1e-14 * (1.0 + nu.norm()) && (b - al.conj()).norm() <= 1e-14 * (1.0 + al.norm())
        })
    })
}

/// Exact exponential combination, one `[ν_re, ν_im, α_re, α_im]` row per term.
pub fn combo_json(f: &Control) -> String {
    let terms: Vec<[f64; 4]> = f.combo.iter().map(|(nu, al)| [nu.re, nu.im, al.re, al.im]).collect();
    serde_json::to_string_pretty(&serde_json::json!({ "T": f.t, "terms": terms })).expect("combo serializes") + "\n"
}

/// `x,u1..uN,ut1..utN` (real parts) on `STATE_POINTS` points of `[0, π]`.
pub fn state_csv(modal: &wavectl_core::Modal, spec: &wavectl_core::Decomposition) -> String {
    let n = modal.dim();
    let xs: Vec<f64> = (0..STATE_POINTS).map(|j| PI * j as f64 / (STATE_POINTS - 1) as f64).collect();
    let (u, ut) = reconstruct(modal, spec, &xs);
    let mut s = String::from("x");
    for c in 1..=n {
        let _ = write!(s, ",u{c}");
    }
    for c in 1..=n {
        let _ = write!(s, ",ut{c}");
    }
    s.push('\n');
    for (j, x) in xs.iter().enumerate() {
        let _ = write!(s, "{x:.16e}");
        for z in u[j].iter().chain(&ut[j]) {
            let _ = write!(s, ",{:.16e}", z.re);
        }
        s.push('\n');
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
