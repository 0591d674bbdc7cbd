//! The moment problem `γ_{k,l} = (f, e_{k,l})_{L²(0,T)}`: targets, Gram
//! systems of the raw and divided-difference families, minimal-norm
//! synthesis, and the sharp two-component procedure.
//!
//! Mode `(k, l)` obeys `ä + ω²a = (2k/π) β_l f` with `ω = ω_{k,l}`, so
//! `c_{k,l}(T) = (2|k|/π) β_l e^{iω_{k,l}T} (f, e^{i ν_{k,l} t})` with
//! `ν_{k,l} = conj(ω_{k,l})`. The family frequencies are therefore the
//! conjugated grid; for real spectra the two coincide.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::coupling::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::kernels::exp_integral;
use crate::linalg::{inner, vec_norm, ComplexMatrix, HermitianFactor};
use crate::scalar::{cabs, cexp, count, lit, to_f64, Real};
use crate::spectrum::{index_order, EddFamily, FrequencyGrid, ModeIndex};
use crate::tolerances::Tolerances;

/// Terminal coefficients `a_{k,l}`, `ȧ_{k,l}` for `k = 1..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState<S> {
    k_max: usize,
    n: usize,
    a: Vec<Complex<S>>,
    adot: Vec<Complex<S>>,
}

impl<S: Real> ModalState<S> {
    pub fn zeros(k_max: usize, n: usize) -> Self {
        Self { k_max, n, a: vec![Complex::zero(); k_max * n], adot: vec![Complex::zero(); k_max * n] }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn pos(&self, k: usize, l: usize) -> usize {
        assert!(k >= 1 && k <= self.k_max && l < self.n, "mode ({k}, {l}) out of range");
        (k - 1) * self.n + l
    }

    pub fn a(&self, k: usize, l: usize) -> Complex<S> {
        self.a[self.pos(k, l)]
    }

    pub fn adot(&self, k: usize, l: usize) -> Complex<S> {
        self.adot[self.pos(k, l)]
    }

    pub fn set(&mut self, k: usize, l: usize, a: Complex<S>, adot: Complex<S>) {
        let p = self.pos(k, l);
        self.a[p] = a;
        self.adot[p] = adot;
    }

    /// `c_{k,l} = iω_{k,l} a_{|k|,l} + ȧ_{|k|,l}` for signed `k`.
    pub fn c(&self, grid: &FrequencyGrid<S>, k: i64, l: usize) -> Complex<S> {
        let m = k.unsigned_abs() as usize;
        let w = grid.omega(k, l);
        Complex::new(-w.im, w.re) * self.a(m, l) + self.adot(m, l)
    }

    /// `c` over [`index_order`].
    pub fn c_vector(&self, grid: &FrequencyGrid<S>) -> Vec<Complex<S>> {
        index_order(self.k_max, self.n).into_iter().map(|(k, l)| self.c(grid, k, l)).collect()
    }

    pub fn a_values(&self) -> &[Complex<S>] {
        &self.a
    }

    pub fn adot_values(&self) -> &[Complex<S>] {
        &self.adot
    }

    pub fn scaled(&self, s: Complex<S>) -> Self {
        Self {
            a: self.a.iter().map(|z| *z * s).collect(),
            adot: self.adot.iter().map(|z| *z * s).collect(),
            ..self.clone()
        }
    }
}

/// Terminal data `z⁰(x) = Σ ẑ⁰_n sin(nx)`, `z¹(x) = Σ ẑ¹_n sin(nx)` with
/// `ẑ_n ∈ ℂ^N`. Repeated `n` entries add up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetSpec<S> {
    pub z0: Vec<(usize, Vec<Complex<S>>)>,
    pub z1: Vec<(usize, Vec<Complex<S>>)>,
}

impl<S: Real> TargetSpec<S> {
    pub fn from_real(z0: Vec<(usize, Vec<S>)>, z1: Vec<(usize, Vec<S>)>) -> Self {
        let lift = |v: Vec<(usize, Vec<S>)>| {
            v.into_iter()
                .map(|(n, c)| (n, c.into_iter().map(|x| Complex::new(x, S::zero())).collect()))
                .collect()
        };
        Self { z0: lift(z0), z1: lift(z1) }
    }

    pub fn max_mode(&self) -> usize {
        self.z0.iter().chain(&self.z1).map(|e| e.0).max().unwrap_or(0)
    }

    fn check(&self, k_max: usize, n: usize) -> Result<()> {
        for (m, v) in self.z0.iter().chain(&self.z1) {
            if *m == 0 || *m > k_max {
                return Err(Error::ModeOutOfRange { n: *m, k_max });
            }
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!("target vector for n = {m} has length {}, expected {n}", v.len())));
            }
        }
        Ok(())
    }

    /// Per-mode sine coefficients `(ẑ⁰_n, ẑ¹_n)` for `n = 1..K`.
    pub fn dense(&self, k_max: usize, n: usize) -> Result<Vec<(Vec<Complex<S>>, Vec<Complex<S>>)>> {
        self.check(k_max, n)?;
        let mut out = vec![(vec![Complex::zero(); n], vec![Complex::zero(); n]); k_max];
        for (m, v) in &self.z0 {
            for (dst, src) in out[m - 1].0.iter_mut().zip(v) {
                *dst = *dst + *src;
            }
        }
        for (m, v) in &self.z1 {
            for (dst, src) in out[m - 1].1.iter_mut().zip(v) {
                *dst = *dst + *src;
            }
        }
        Ok(out)
    }
}

/// `a_{n,j} = ⟨ẑ⁰_n, ψ_j⟩`, `ȧ_{n,j} = ⟨ẑ¹_n, ψ_j⟩`.
pub fn target_to_modal<S: Real>(target: &TargetSpec<S>, spec: &SpectralDecomposition<S>, k_max: usize) -> Result<ModalState<S>> {
    let n = spec.dim();
    let dense = target.dense(k_max, n)?;
    let mut m = ModalState::zeros(k_max, n);
    for (k, (z0, z1)) in dense.iter().enumerate() {
        for (l, psi) in spec.biorthogonal.iter().enumerate() {
            m.set(k + 1, l, inner(z0, psi), inner(z1, psi));
        }
    }
    Ok(m)
}

fn check_beta<S: Real>(spec: &SpectralDecomposition<S>, tol: &Tolerances<S>) -> Result<()> {
    let threshold = tol.beta_tol * vec_norm(&spec.b);
    for (l, b) in spec.beta.iter().enumerate() {
        if cabs(*b) <= threshold {
            return Err(Error::BetaZero { l, magnitude: to_f64(cabs(*b)) });
        }
    }
    Ok(())
}

/// `(2|k|/π) β_l e^{iω_{k,l}T}`, the factor mapping moments to `c`.
pub fn moment_scale<S: Real>(spec: &SpectralDecomposition<S>, grid: &FrequencyGrid<S>, t: S, k: i64, l: usize) -> Complex<S> {
    let w = grid.omega(k, l);
    let kk = count::<S>(k.unsigned_abs() as usize);
    spec.beta[l] * cexp(Complex::new(-w.im * t, w.re * t)) * (lit::<S>(2.0) * kk / S::pi())
}

/// `γ_{k,l} = c_{k,l}(T) / ((2|k|/π) β_l e^{iω_{k,l}T})` over [`index_order`].
pub fn moments_from_target<S: Real>(
    modal: &ModalState<S>,
    spec: &SpectralDecomposition<S>,
    grid: &FrequencyGrid<S>,
    t: S,
    tol: &Tolerances<S>,
) -> Result<Vec<Complex<S>>> {
    check_beta(spec, tol)?;
    Ok(grid
        .index_order()
        .into_iter()
        .map(|(k, l)| modal.c(grid, k, l) / moment_scale(spec, grid, t, k, l))
        .collect())
}

/// `(e^{iω_a t}, e^{iω_b t})_{L²(0,T)} = ∫₀ᵀ e^{i(ω_a − conj ω_b)t} dt`.
pub fn gram_entry<S: Real>(wa: Complex<S>, wb: Complex<S>, t: S) -> Complex<S> {
    exp_integral(wa - wb.conj(), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Raw,
    Edd,
}

/// Gram system of the raw or divided-difference family on `[0, T]`.
///
/// Family function `i` is `Σ_p W[i][p] e^{iν_p t}`; `W` is the identity for
/// the raw family. `gram[i][j] = (fam_j, fam_i)`.
#[derive(Debug, Clone)]
pub struct MomentSystem<S> {
    pub basis: BasisKind,
    pub t: S,
    pub index_order: Vec<ModeIndex>,
    /// `ν_p = conj(ω_p)` over [`index_order`].
    pub frequencies: Vec<Complex<S>>,
    expansion: Vec<Vec<(usize, Complex<S>)>>,
    /// Gram matrix of the raw exponentials.
    pub raw_gram: ComplexMatrix<S>,
    pub gram: ComplexMatrix<S>,
    /// 1-norm condition number of the unit-diagonal scaling of `gram`;
    /// infinite when the scaled matrix is singular at working precision.
    pub cond_estimate: S,
}

impl<S: Real> MomentSystem<S> {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Family function `i` as `(raw index, coefficient)` pairs.
    pub fn expansion(&self, i: usize) -> &[(usize, Complex<S>)] {
        &self.expansion[i]
    }

    /// Moments against the family, `γ̃_i = Σ_p conj(W[i][p]) γ_p`.
    pub fn family_moments(&self, gamma: &[Complex<S>]) -> Vec<Complex<S>> {
        self.expansion
            .iter()
            .map(|row| row.iter().fold(Complex::<S>::zero(), |acc, &(p, w)| acc + w.conj() * gamma[p]))
            .collect()
    }

    /// `(f, e_q)` for `f = Σ_p amp_p e_p`.
    pub fn raw_moments_of(&self, amplitudes: &[Complex<S>]) -> Vec<Complex<S>> {
        self.raw_gram.mul_vec(amplitudes).expect("matching length")
    }
}

fn equilibrate<S: Real>(g: &ComplexMatrix<S>) -> Option<(ComplexMatrix<S>, Vec<S>)> {
    let n = g.rows();
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let gii = g[(i, i)].re;
        if !(gii > S::zero()) {
            return None;
        }
        d.push(S::one() / gii.sqrt());
    }
    let mut s = g.clone();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = g[(i, j)] * (d[i] * d[j]);
        }
    }
    Some((s, d))
}

/// Singular at working precision (pivot below `n·ε·‖G‖₁`) reads as infinite.
fn scaled_condition<S: Real>(g: &ComplexMatrix<S>) -> S {
    let floor = count::<S>(g.rows().max(1)) * S::epsilon();
    match equilibrate(g) {
        Some((s, _)) => HermitianFactor::new(&s, floor).map(|f| f.cond_one()).unwrap_or(S::infinity()),
        None => S::infinity(),
    }
}

pub fn assemble_gram<S: Real>(
    grid: &FrequencyGrid<S>,
    edd: Option<&EddFamily<S>>,
    t: S,
    basis: BasisKind,
) -> Result<MomentSystem<S>> {
    if !(t > S::zero()) {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    let order = grid.index_order();
    let nu: Vec<Complex<S>> = grid.omegas().into_iter().map(|w| w.conj()).collect();
    let m = nu.len();
    let mut raw = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = gram_entry(nu[j], nu[i], t);
            raw[(i, j)] = v;
            raw[(j, i)] = v.conj();
        }
        raw[(i, i)].im = S::zero();
    }
    let expansion: Vec<Vec<(usize, Complex<S>)>> = match (basis, edd) {
        (BasisKind::Raw, None) => (0..m).map(|p| vec![(p, Complex::one())]).collect(),
        (BasisKind::Edd, Some(e)) => {
            if e.k_max() != grid.k_max() || e.dim() != grid.dim() {
                return Err(Error::DimensionMismatch("EDD family does not match the grid".into()));
            }
            e.expansion()
                .into_iter()
                .map(|row| row.into_iter().map(|(p, w)| (p, w.conj())).collect())
                .collect()
        }
        (BasisKind::Raw, Some(_)) => return Err(Error::InvalidArgument("raw basis takes no EDD family".into())),
        (BasisKind::Edd, None) => return Err(Error::InvalidArgument("EDD basis needs an EDD family".into())),
    };
    let gram = match basis {
        BasisKind::Raw => raw.clone(),
        BasisKind::Edd => {
            let mut g = ComplexMatrix::zeros(m, m);
            for i in 0..m {
                for j in i..m {
                    let mut acc = Complex::<S>::zero();
                    for &(q, wq) in &expansion[i] {
                        for &(p, wp) in &expansion[j] {
                            acc = acc + wp * wq.conj() * raw[(q, p)];
                        }
                    }
                    g[(i, j)] = acc;
                    g[(j, i)] = acc.conj();
                }
                g[(i, i)].im = S::zero();
            }
            g
        }
    };
    let cond_estimate = scaled_condition(&gram);
    Ok(MomentSystem { basis, t, index_order: order, frequencies: nu, expansion, raw_gram: raw, gram, cond_estimate })
}

/// Uniform samples of a control on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples<S> {
    pub dt: S,
    pub values: Vec<Complex<S>>,
}

/// `f(t) = Σ α e^{iνt}` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal<S> {
    pub t: S,
    /// `(ν, α)` pairs.
    pub combo: Vec<(Complex<S>, Complex<S>)>,
    pub samples: Option<Samples<S>>,
    /// `‖Im f‖ / max(‖f‖, ε)`.
    pub realification_residual: S,
}

impl<S: Real> ControlSignal<S> {
    pub fn new(t: S, combo: Vec<(Complex<S>, Complex<S>)>) -> Self {
        let mut f = Self { t, combo, samples: None, realification_residual: S::zero() };
        f.realification_residual = f.imaginary_ratio();
        f
    }

    pub fn zero(t: S) -> Self {
        Self::new(t, Vec::new())
    }

    pub fn eval(&self, time: S) -> Complex<S> {
        self.combo
            .iter()
            .fold(Complex::zero(), |acc, &(nu, al)| acc + al * cexp(Complex::new(-nu.im * time, nu.re * time)))
    }

    pub fn l2_norm(&self) -> S {
        combo_norm(&self.combo, self.t)
    }

    /// `count ≥ 2` samples with `dt = T/(count − 1)`.
    pub fn sample(&self, count_: usize) -> Samples<S> {
        assert!(count_ >= 2, "at least two samples");
        let dt = self.t / count::<S>(count_ - 1);
        let mut values: Vec<Complex<S>> = (0..count_).map(|j| self.eval(dt * count::<S>(j))).collect();
        values[count_ - 1] = self.eval(self.t);
        Samples { dt, values }
    }

    pub fn with_samples(mut self, count_: usize) -> Self {
        self.samples = Some(self.sample(count_));
        self
    }

    fn imaginary_ratio(&self) -> S {
        let half_i = Complex::new(S::zero(), lit::<S>(0.5));
        // Im f = Σ α/(2i) e^{iνt} − conj(α)/(2i) e^{−i conj(ν) t}
        let im: Vec<_> = self
            .combo
            .iter()
            .flat_map(|&(nu, al)| [(nu, -al * half_i), (-nu.conj(), al.conj() * half_i)])
            .collect();
        let num = combo_norm(&merge_terms(im), self.t);
        let den = self.l2_norm().max(S::epsilon());
        num / den
    }
}

fn combo_norm<S: Real>(combo: &[(Complex<S>, Complex<S>)], t: S) -> S {
    let mut acc = Complex::<S>::zero();
    for &(np, ap) in combo {
        for &(nq, aq) in combo {
            acc = acc + ap * aq.conj() * gram_entry(np, nq, t);
        }
    }
    acc.re.max(S::zero()).sqrt()
}

/// Merges terms whose frequencies agree to rounding and drops zero
/// amplitudes.
fn merge_terms<S: Real>(terms: Vec<(Complex<S>, Complex<S>)>) -> Vec<(Complex<S>, Complex<S>)> {
    let mut out: Vec<(Complex<S>, Complex<S>)> = Vec::with_capacity(terms.len());
    let eps = lit::<S>(8.0) * S::epsilon();
    for (nu, al) in terms {
        match out.iter_mut().find(|(m, _)| cabs(*m - nu) <= eps * (S::one() + cabs(nu))) {
            Some(e) => e.1 = e.1 + al,
            None => out.push((nu, al)),
        }
    }
    out.retain(|e| !e.1.is_zero());
    out
}

/// `Re f` as an exponential combination.
pub fn realify<S: Real>(f: &ControlSignal<S>) -> ControlSignal<S> {
    let half = lit::<S>(0.5);
    let re: Vec<_> = f
        .combo
        .iter()
        .flat_map(|&(nu, al)| [(nu, al * half), (-nu.conj(), al.conj() * half)])
        .collect();
    let mut out = ControlSignal::new(f.t, merge_terms(re));
    out.realification_residual = f.realification_residual;
    if let Some(s) = &f.samples {
        out = out.with_samples(s.values.len());
    }
    out
}

/// Minimal-norm control reproducing a moment vector.
#[derive(Debug, Clone)]
pub struct Synthesis<S> {
    pub control: ControlSignal<S>,
    /// Coefficients on the family functions.
    pub coefficients: Vec<Complex<S>>,
    /// `‖(f, e_p)_p − γ‖ / ‖γ‖`
    pub moment_residual: S,
    pub cond_estimate: S,
}

/// Solves `G α = γ̃` on the family and expands `f = Σ α_i fam_i` into
/// exponentials.
pub fn synthesize<S: Real>(ms: &MomentSystem<S>, gamma: &[Complex<S>], tol: &Tolerances<S>) -> Result<Synthesis<S>> {
    let m = ms.len();
    if gamma.len() != m {
        return Err(Error::DimensionMismatch(format!("moment vector has length {}, expected {m}", gamma.len())));
    }
    let rhs = ms.family_moments(gamma);
    let (scaled, d) = equilibrate(&ms.gram).ok_or(Error::SingularSystem {
        step: 0,
        pivot: 0.0,
        threshold: to_f64(tol.pivot_tol),
    })?;
    let factor = HermitianFactor::new(&scaled, tol.pivot_tol)?;
    let cond = factor.cond_one();
    if cond > tol.cond_cap {
        return Err(Error::ConditioningExceeded { cond: to_f64(cond), cap: to_f64(tol.cond_cap) });
    }
    let srhs: Vec<Complex<S>> = rhs.iter().zip(&d).map(|(z, s)| *z * *s).collect();
    let y = factor.solve(&srhs)?;
    let coefficients: Vec<Complex<S>> = y.iter().zip(&d).map(|(z, s)| *z * *s).collect();

    let mut amplitudes = vec![Complex::<S>::zero(); m];
    for (row, al) in ms.expansion.iter().zip(&coefficients) {
        for &(p, w) in row {
            amplitudes[p] = amplitudes[p] + w * *al;
        }
    }
    let achieved = ms.raw_moments_of(&amplitudes);
    let gnorm = vec_norm(gamma);
    let diff: Vec<Complex<S>> = achieved.iter().zip(gamma).map(|(a, g)| *a - *g).collect();
    let moment_residual = if gnorm.is_zero() { vec_norm(&diff) } else { vec_norm(&diff) / gnorm };
    let combo = ms.frequencies.iter().copied().zip(amplitudes).filter(|(_, a)| !a.is_zero()).collect();
    Ok(Synthesis { control: ControlSignal::new(ms.t, combo), coefficients, moment_residual, cond_estimate: cond })
}

/// Rescaled eigenvectors with `φ₁ + φ₂ = (α, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct N2Basis<S> {
    pub spec: SpectralDecomposition<S>,
    pub alpha: Complex<S>,
}

/// `φ₁ ← φ₁/φ₁[1]`, `φ₂ ← −φ₂/φ₂[1]`, so the second components cancel and
/// `α = φ₁[0] + φ₂[0]`; `ψ` and `β` are rebuilt for the new scaling.
pub fn n2_normalize_eigvecs<S: Real>(spec: &SpectralDecomposition<S>) -> Result<N2Basis<S>> {
    if spec.dim() != 2 {
        return Err(Error::InvalidArgument(format!("two-component procedure needs N = 2, got {}", spec.dim())));
    }
    if cabs(spec.b[1]) > lit::<S>(1e-14) * cabs(spec.b[0]) || spec.b[0].is_zero() {
        return Err(Error::InvalidArgument("two-component procedure needs b parallel to (1, 0)".into()));
    }
    let mut phis = Vec::with_capacity(2);
    for (l, phi) in spec.eigenvectors.iter().enumerate() {
        if cabs(phi[1]) <= lit::<S>(1e-12) * vec_norm(phi) {
            return Err(Error::DegenerateEigenvector { l });
        }
        let s = if l == 0 { Complex::<S>::one() } else { -Complex::<S>::one() };
        phis.push(phi.iter().map(|z| *z * s / phi[1]).collect::<Vec<_>>());
    }
    let alpha = phis[0][0] + phis[1][0];
    if cabs(alpha) <= lit::<S>(1e-12) {
        return Err(Error::DegenerateEigenvector { l: 0 });
    }
    Ok(N2Basis { spec: spec.with_eigenvectors(phis)?, alpha })
}

/// Modal state reaching the target through the divided-difference
/// coordinates `ã_{n,1} = a_{n,1}`, `ã_{n,2} = (a_{n,2} − a_{n,1})/δ_n`,
/// `δ_n = ω_{n,2} − ω_{n,1}`.
///
/// The second physical component fixes `ã_{n,2} = z₂/(δ_n φ₂[1])`; the first
/// then fixes `ã_{n,1} = (z₁ − ã_{n,2} δ_n φ₂[0])/α`.
pub fn n2_sharp_targets<S: Real>(target: &TargetSpec<S>, basis: &N2Basis<S>, grid: &FrequencyGrid<S>) -> Result<ModalState<S>> {
    let k_max = grid.k_max();
    let dense = target.dense(k_max, 2)?;
    let phi2 = &basis.spec.eigenvectors[1];
    let (beta_c, gamma_c) = (phi2[0], phi2[1]);
    if gamma_c.is_zero() {
        return Err(Error::DegenerateEigenvector { l: 1 });
    }
    let mut m = ModalState::zeros(k_max, 2);
    for (k0, (z0, z1)) in dense.iter().enumerate() {
        let k = k0 + 1;
        let delta = grid.omega(k as i64, 1) - grid.omega(k as i64, 0);
        let solve = |z: &[Complex<S>]| {
            let t2 = z[1] / (delta * gamma_c);
            let t1 = (z[0] - t2 * delta * beta_c) / basis.alpha;
            (t1, t1 + delta * t2)
        };
        let (a1, a2) = solve(z0);
        let (d1, d2) = solve(z1);
        m.set(k, 0, a1, d1);
        m.set(k, 1, a2, d2);
    }
    Ok(m)
}

/// `(ã_{n,1}, ã_{n,2})` of the position coefficients, `n = 1..K`.
pub fn n2_tilde<S: Real>(modal: &ModalState<S>, grid: &FrequencyGrid<S>) -> Vec<[Complex<S>; 2]> {
    (1..=modal.k_max())
        .map(|k| {
            let delta = grid.omega(k as i64, 1) - grid.omega(k as i64, 0);
            let (a1, a2) = (modal.a(k, 0), modal.a(k, 1));
            [a1, (a2 - a1) / delta]
        })
        .collect()
}

/// `(‖u₁‖²_{L²} + ‖u₂‖²_{H¹}) / Σ |ã_{n,j}|²` for the position field of a
/// modal state expressed in the normalized basis.
pub fn n2_norm_ratio<S: Real>(modal: &ModalState<S>, basis: &N2Basis<S>, grid: &FrequencyGrid<S>) -> S {
    let phi = &basis.spec.eigenvectors;
    let half_pi = S::pi() * lit(0.5);
    let mut phys = S::zero();
    for k in 1..=modal.k_max() {
        let u1 = modal.a(k, 0) * phi[0][0] + modal.a(k, 1) * phi[1][0];
        let u2 = modal.a(k, 0) * phi[0][1] + modal.a(k, 1) * phi[1][1];
        let kk = count::<S>(k * k);
        phys = phys + half_pi * (u1.norm_sqr() + (S::one() + kk) * u2.norm_sqr());
    }
    let coef = n2_tilde(modal, grid).iter().fold(S::zero(), |acc, t| acc + t[0].norm_sqr() + t[1].norm_sqr());
    phys / coef
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{decompose, CouplingSystem};
    use crate::spectrum::{build_edd, build_frequencies};
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn setup(a: Vec<Vec<f64>>, b: Vec<f64>, k_max: usize) -> (SpectralDecomposition<f64>, FrequencyGrid<f64>, Tolerances<f64>) {
        let tol = Tolerances::default();
        let spec = decompose(&CouplingSystem::new(a, b).unwrap(), &tol).unwrap();
        let grid = build_frequencies(&spec, k_max, tol.zero_tol, tol.collision_threshold(k_max)).unwrap();
        (spec, grid, tol)
    }

    #[test]
    fn gram_entry_examples() {
        assert!((gram_entry(c(1.0, 0.0), c(1.0, 0.0), 2.0 * PI) - 2.0 * PI).norm() < 1e-14);
        assert!(gram_entry(c(1.0, 0.0), c(0.0, 0.0), 2.0 * PI).norm() < 1e-14);
        assert!((gram_entry(c(0.5, 0.0), c(0.0, 0.0), 2.0 * PI) - c(0.0, 4.0)).norm() < 1e-14);
        // small Δ stays continuous
        let d = gram_entry(c(1.0 + 1e-9, 0.0), c(1.0, 0.0), 1.0);
        assert!((d - c(1.0, 0.5e-9)).norm() < 1e-15);
    }

    #[test]
    fn scalar_gram_is_orthogonal() {
        let (_, grid, _) = setup(vec![vec![0.0]], vec![1.0], 1);
        let ms = assemble_gram(&grid, None, 2.0 * PI, BasisKind::Raw).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 2.0 * PI } else { 0.0 };
                assert!((ms.gram[(i, j)] - e).norm() < 1e-13);
            }
        }
        assert!((ms.cond_estimate - 1.0).abs() < 1e-12);
        let edd = build_edd(&grid, 1e-8).unwrap();
        let me = assemble_gram(&grid, Some(&edd), 2.0 * PI, BasisKind::Edd).unwrap();
        assert_eq!(me.gram, ms.gram);
    }

    #[test]
    fn target_to_modal_uses_biorthogonal_family() {
        let (spec, _, _) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 4);
        let phi = spec.eigenvectors.clone();
        let sum: Vec<C> = phi[0].iter().zip(&phi[1]).map(|(x, y)| x + y).collect();
        let t = TargetSpec { z0: vec![(1, sum)], z1: vec![(2, phi[1].clone())] };
        let m = target_to_modal(&t, &spec, 4).unwrap();
        assert!((m.a(1, 0) - 1.0).norm() < 1e-12 && (m.a(1, 1) - 1.0).norm() < 1e-12);
        assert!((m.adot(2, 1) - 1.0).norm() < 1e-12 && m.adot(2, 0).norm() < 1e-12);
        let bad = TargetSpec { z0: vec![(5, vec![c(1.0, 0.0), c(0.0, 0.0)])], z1: vec![] };
        assert!(matches!(target_to_modal(&bad, &spec, 4), Err(Error::ModeOutOfRange { n: 5, .. })));
    }

    #[test]
    fn scalar_moment_value() {
        let (spec, grid, tol) = setup(vec![vec![0.0]], vec![1.0], 1);
        let mut m = ModalState::zeros(1, 1);
        m.set(1, 0, c(0.0, 0.0), c(1.0, 0.0));
        let g = moments_from_target(&m, &spec, &grid, 2.0 * PI, &tol).unwrap();
        // index order is (−1, 0), (1, 0)
        assert!((g[1] - PI / 2.0).norm() < 1e-12);
        assert!((g[0] - PI / 2.0).norm() < 1e-12);
        let g2 = moments_from_target(&m.scaled(c(2.0, 0.0)), &spec, &grid, 2.0 * PI, &tol).unwrap();
        assert!((g2[1] - 2.0 * g[1]).norm() < 1e-14);
    }

    #[test]
    fn scalar_synthesis_is_blockwise() {
        let (_, grid, tol) = setup(vec![vec![0.0]], vec![1.0], 1);
        let ms = assemble_gram(&grid, None, 2.0 * PI, BasisKind::Raw).unwrap();
        let gamma = vec![c(PI / 2.0, 0.0), c(PI / 2.0, 0.0)];
        let s = synthesize(&ms, &gamma, &tol).unwrap();
        for (al, g) in s.coefficients.iter().zip(&gamma) {
            assert!((al - g / (2.0 * PI)).norm() < 1e-14);
        }
        assert!(s.moment_residual < 1e-14);
        let z = synthesize(&ms, &[c(0.0, 0.0), c(0.0, 0.0)], &tol).unwrap();
        assert!(z.control.combo.is_empty() && z.control.l2_norm() == 0.0);
    }

    #[test]
    fn realify_examples() {
        let t = 2.0 * PI;
        let f = ControlSignal::new(t, vec![(c(1.0, 0.0), c(1.0, 0.0)), (c(-1.0, 0.0), c(1.0, 0.0))]);
        assert!(f.realification_residual < 1e-15);
        let f = ControlSignal::new(t, vec![(c(1.0, 0.0), c(0.0, 1.0)), (c(-1.0, 0.0), c(0.0, -1.0))]);
        assert!(f.realification_residual < 1e-15);
        let f = ControlSignal::new(t, vec![(c(1.0, 0.0), c(1.0, 0.0))]);
        assert!((f.realification_residual - 0.5f64.sqrt()).abs() < 1e-14);
        let r = realify(&f);
        for j in 0..20 {
            let s = j as f64 * 0.3;
            assert!((r.eval(s) - c(s.cos(), 0.0)).norm() < 1e-14);
        }
        assert!((r.realification_residual - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn n2_normalization() {
        let (spec, _, _) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 2);
        let nb = n2_normalize_eigvecs(&spec).unwrap();
        let p = &nb.spec.eigenvectors;
        assert!((p[0][1] + p[1][1]).norm() < 1e-14);
        // λ = −0.3 (φ ∝ (0, 1)) comes first, so α = −0.8
        assert!((nb.alpha - c(-0.8, 0.0)).norm() < 1e-13);
        assert!(nb.spec.biorthogonality_defect() < 1e-12);

        let (spec, _, _) = setup(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0], 2);
        let nb = n2_normalize_eigvecs(&spec).unwrap();
        assert!((nb.alpha.norm() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn n2_sharp_examples() {
        let (spec, grid, _) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 2);
        let nb = n2_normalize_eigvecs(&spec).unwrap();
        let delta = grid.omega(1, 1) - grid.omega(1, 0);
        let (bc, gc) = (nb.spec.eigenvectors[1][0], nb.spec.eigenvectors[1][1]);

        let t = TargetSpec::from_real(vec![(1, vec![1.0, 0.0])], vec![]);
        let m = n2_sharp_targets(&t, &nb, &grid).unwrap();
        let tl = n2_tilde(&m, &grid);
        assert!(tl[0][1].norm() < 1e-14 && (tl[0][0] - 1.0 / nb.alpha).norm() < 1e-14);

        let t = TargetSpec::from_real(vec![(1, vec![0.0, 1.0])], vec![]);
        let m = n2_sharp_targets(&t, &nb, &grid).unwrap();
        let tl = n2_tilde(&m, &grid);
        let a2 = 1.0 / (gc * delta);
        assert!((tl[0][1] - a2).norm() < 1e-12);
        assert!((tl[0][0] + bc / nb.alpha * a2 * delta).norm() < 1e-12);

        let m = n2_sharp_targets(&TargetSpec::default(), &nb, &grid).unwrap();
        assert!(m.a_values().iter().chain(m.adot_values()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn n2_sharp_agrees_with_biorthogonal_projection() {
        let (spec, grid, _) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 3);
        let nb = n2_normalize_eigvecs(&spec).unwrap();
        let t = TargetSpec::from_real(vec![(1, vec![0.3, -1.0]), (3, vec![2.0, 0.5])], vec![(2, vec![1.0, 1.0])]);
        let sharp = n2_sharp_targets(&t, &nb, &grid).unwrap();
        let proj = target_to_modal(&t, &nb.spec, 3).unwrap();
        for (x, y) in sharp.a_values().iter().chain(sharp.adot_values()).zip(proj.a_values().iter().chain(proj.adot_values())) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn n2_rejects_wrong_shape() {
        let (spec, _, _) = setup(vec![vec![0.5]], vec![1.0], 2);
        assert!(n2_normalize_eigvecs(&spec).is_err());
    }
}
