//! End-to-end runs: analysis, synthesis and terminal verification of one
//! problem instance.

use num_complex::Complex;

use crate::coupling::{analyze, decompose, ConditionsReport, CouplingSystem, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::moments::{
    assemble_gram, moments_from_target, n2_normalize_eigvecs, n2_sharp_targets, realify, synthesize, target_to_modal,
    BasisKind, ControlSignal, ModalState, MomentSystem, N2Basis, Synthesis, TargetSpec,
};
use crate::scalar::Real;
use crate::spectrum::{build_edd, build_frequencies, EddFamily, FrequencyGrid};
use crate::tolerances::Tolerances;
use crate::waveform::{verify, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Raw,
    Edd,
    /// Two components, `b ∥ (1, 0)`: normalized eigenvectors, divided
    /// difference coordinates and the EDD family.
    N2Sharp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Edd => "edd",
            Method::N2Sharp => "n2_sharp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Method::Raw),
            "edd" => Some(Method::Edd),
            "n2_sharp" => Some(Method::N2Sharp),
            _ => None,
        }
    }

    pub fn basis(self) -> BasisKind {
        match self {
            Method::Raw => BasisKind::Raw,
            Method::Edd | Method::N2Sharp => BasisKind::Edd,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem<S> {
    pub system: CouplingSystem<S>,
    pub t: S,
    pub k_max: usize,
    pub method: Method,
    pub target: TargetSpec<S>,
    pub tol: Tolerances<S>,
}

/// Spectral data shared by every stage.
#[derive(Debug, Clone)]
pub struct Prepared<S> {
    pub spec: SpectralDecomposition<S>,
    pub grid: FrequencyGrid<S>,
    pub edd: Option<EddFamily<S>>,
    pub n2: Option<N2Basis<S>>,
}

impl<S: Real> Problem<S> {
    pub fn conditions(&self) -> Result<ConditionsReport> {
        analyze(&self.system, self.t, &self.tol)
    }

    pub fn prepare(&self) -> Result<Prepared<S>> {
        let base = decompose(&self.system, &self.tol)?;
        let (spec, n2) = match self.method {
            Method::N2Sharp => {
                let nb = n2_normalize_eigvecs(&base)?;
                (nb.spec.clone(), Some(nb))
            }
            _ => (base, None),
        };
        let coll = self.tol.collision_threshold(self.k_max);
        let grid = build_frequencies(&spec, self.k_max, self.tol.zero_tol, coll)?;
        let edd = match self.method.basis() {
            BasisKind::Edd => Some(build_edd(&grid, coll)?),
            BasisKind::Raw => None,
        };
        Ok(Prepared { spec, grid, edd, n2 })
    }

    pub fn moment_system(&self, prep: &Prepared<S>) -> Result<MomentSystem<S>> {
        assemble_gram(&prep.grid, prep.edd.as_ref(), self.t, self.method.basis())
    }

    pub fn target_modal(&self, prep: &Prepared<S>) -> Result<ModalState<S>> {
        match &prep.n2 {
            Some(nb) => n2_sharp_targets(&self.target, nb, &prep.grid),
            None => target_to_modal(&self.target, &prep.spec, self.k_max),
        }
    }

    fn target_is_real(&self) -> bool {
        self.target.z0.iter().chain(&self.target.z1).flat_map(|e| e.1.iter()).all(|z| z.im == S::zero())
    }

    /// Minimal-norm control for the target. Real targets get the real part
    /// of the control (the exact minimal-norm control is real then); the
    /// imaginary residual is kept on the signal.
    pub fn synthesize(&self) -> Result<Synthesized<S>> {
        let prep = self.prepare()?;
        let target = self.target_modal(&prep)?;
        let gamma = moments_from_target(&target, &prep.spec, &prep.grid, self.t, &self.tol)?;
        let system = self.moment_system(&prep)?;
        let synthesis = synthesize(&system, &gamma, &self.tol)?;
        let control = if self.target_is_real() { realify(&synthesis.control) } else { synthesis.control.clone() };
        Ok(Synthesized { prepared: prep, target, gamma, system, synthesis, control })
    }

    /// Closed-form terminal check of a synthesized control.
    pub fn verify(&self, run: &Synthesized<S>) -> Result<VerifyReport<S>> {
        verify(&run.prepared.spec, &run.prepared.grid, &run.control, &run.target, self.t, self.tol.verify_tol)
    }

    pub fn solve(&self) -> Result<Solution<S>> {
        let run = self.synthesize()?;
        let verify = self.verify(&run)?;
        Ok(Solution { run, verify })
    }
}

#[derive(Debug, Clone)]
pub struct Synthesized<S> {
    pub prepared: Prepared<S>,
    pub target: ModalState<S>,
    pub gamma: Vec<Complex<S>>,
    pub system: MomentSystem<S>,
    pub synthesis: Synthesis<S>,
    pub control: ControlSignal<S>,
}

#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub run: Synthesized<S>,
    pub verify: VerifyReport<S>,
}

/// Gram condition estimate of the given family at `(T, K)`.
pub fn gram_condition<S: Real>(
    system: &CouplingSystem<S>,
    t: S,
    k_max: usize,
    basis: BasisKind,
    tol: &Tolerances<S>,
) -> Result<S> {
    let spec = decompose(system, tol)?;
    let coll = tol.collision_threshold(k_max);
    let grid = build_frequencies(&spec, k_max, tol.zero_tol, coll)?;
    let edd = match basis {
        BasisKind::Edd => Some(build_edd(&grid, coll)?),
        BasisKind::Raw => None,
    };
    Ok(assemble_gram(&grid, edd.as_ref(), t, basis)?.cond_estimate)
}

/// Converts an `f64` problem into another scalar type.
pub fn convert_problem<S: Real>(p: &Problem<f64>, tol: Tolerances<S>) -> Result<Problem<S>> {
    let lift = |x: f64| S::from_f64(x).ok_or(Error::NonFinite("conversion"));
    let a = p
        .system
        .a()
        .iter()
        .map(|r| r.iter().map(|&x| lift(x)).collect::<Result<Vec<S>>>())
        .collect::<Result<Vec<_>>>()?;
    let b = p.system.b().iter().map(|&x| lift(x)).collect::<Result<Vec<S>>>()?;
    let lift_c = |z: &Complex<f64>| Ok(Complex::new(lift(z.re)?, lift(z.im)?));
    let lift_t = |v: &[(usize, Vec<Complex<f64>>)]| {
        v.iter()
            .map(|(n, c)| Ok((*n, c.iter().map(lift_c).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()
    };
    Ok(Problem {
        system: CouplingSystem::new(a, b)?,
        t: lift(p.t)?,
        k_max: p.k_max,
        method: p.method,
        target: TargetSpec { z0: lift_t(&p.target.z0)?, z1: lift_t(&p.target.z1)? },
        tol,
    })
}
