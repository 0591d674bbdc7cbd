//! Forward evolution under a given control, physical reconstruction and
//! terminal verification.
//!
//! Each mode solves `ä + ω²a = (2k/π) β_l f`, `a(0) = ȧ(0) = 0`, so
//! `a(t) = (2k/π) β_l ∫₀ᵗ f(τ) sin(ω(t−τ))/ω dτ` and `ȧ` carries `cos`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::coupling::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::kernels::{exp_integral, exp_moment};
use crate::moments::{ControlSignal, ModalState, Samples};
use crate::scalar::{cabs, cexp, count, is_finite_c, lit, to_f64, Real};
use crate::spectrum::FrequencyGrid;

/// Below this value of `|ω|T` the `sin(ωs)/ω` kernel is expanded in powers
/// of `ω²`, which is continuous through `ω = 0`.
const SMALL_OMEGA_T: f64 = 1.0;

fn i_times<S: Real>(z: Complex<S>) -> Complex<S> {
    Complex::new(-z.im, z.re)
}

/// Modal forcing factor `(2k/π) β_l`.
pub fn forcing<S: Real>(spec: &SpectralDecomposition<S>, k: usize, l: usize) -> Complex<S> {
    spec.beta[l] * (lit::<S>(2.0) * count::<S>(k) / S::pi())
}

/// `(∫₀ᵀ f(τ) sin(ω(T−τ))/ω dτ, ∫₀ᵀ f(τ) cos(ω(T−τ)) dτ)` for
/// `f = Σ α e^{iντ}`, in closed form.
pub fn mode_response<S: Real>(omega: Complex<S>, combo: &[(Complex<S>, Complex<S>)], t: S) -> (Complex<S>, Complex<S>) {
    let half = lit::<S>(0.5);
    let eplus = cexp(i_times(omega * t));
    let eminus = Complex::<S>::one() / eplus;
    let small = cabs(omega) * t <= lit(SMALL_OMEGA_T);
    let mut sin_part = Complex::<S>::zero();
    let mut cos_part = Complex::<S>::zero();
    for &(nu, al) in combo {
        // I± = ∫₀ᵀ e^{iντ} e^{±iω(T−τ)} dτ
        let ip = eplus * exp_integral(nu - omega, t);
        let im = if is_finite_c(eminus) { eminus * exp_integral(nu + omega, t) } else { Complex::zero() };
        cos_part = cos_part + al * (ip + im) * half;
        let s = if small {
            small_omega_sin(omega, nu, t)
        } else {
            (ip - im) / (i_times(omega) * lit::<S>(2.0))
        };
        sin_part = sin_part + al * s;
    }
    (sin_part, cos_part)
}

/// `∫₀ᵀ e^{iντ} sin(ω(T−τ))/ω dτ = e^{iνT} Σ_m (−1)^m ω^{2m}/(2m+1)! J_{2m+1}(−iν, T)`.
fn small_omega_sin<S: Real>(omega: Complex<S>, nu: Complex<S>, t: S) -> Complex<S> {
    let w2 = omega * omega;
    let mu = -i_times(nu);
    let mut coef = Complex::<S>::one();
    let mut sum = Complex::<S>::zero();
    for m in 0..40usize {
        let term = coef * exp_moment(2 * m + 1, mu, t);
        sum = sum + term;
        if cabs(term) <= S::epsilon() * cabs(sum) * lit(0.25) {
            break;
        }
        coef = -coef * w2 / count::<S>((2 * m + 2) * (2 * m + 3));
    }
    cexp(i_times(nu * t)) * sum
}

/// `(sin(ωs)/ω, cos(ωs))` by power series, for `|ωs|` of order one or less.
fn small_omega_kernel<S: Real>(omega: Complex<S>, s: S) -> (Complex<S>, Complex<S>) {
    let x2 = omega * omega * (s * s);
    let mut ts = Complex::<S>::new(s, S::zero());
    let mut tc = Complex::<S>::one();
    let (mut ks, mut kc) = (ts, tc);
    for m in 1..30usize {
        ts = -ts * x2 / count::<S>((2 * m) * (2 * m + 1));
        tc = -tc * x2 / count::<S>((2 * m - 1) * (2 * m));
        ks = ks + ts;
        kc = kc + tc;
        if cabs(ts) <= S::epsilon() * cabs(ks) && cabs(tc) <= S::epsilon() * cabs(kc) {
            break;
        }
    }
    (ks, kc)
}

/// Closed-form terminal modal state at time `t` for an exponential-combo
/// control (the combo's own horizon is not used).
pub fn duhamel_exact<S: Real>(spec: &SpectralDecomposition<S>, grid: &FrequencyGrid<S>, f: &ControlSignal<S>, t: S) -> ModalState<S> {
    let (k_max, n) = (grid.k_max(), grid.dim());
    let mut m = ModalState::zeros(k_max, n);
    if f.combo.is_empty() {
        return m;
    }
    for k in 1..=k_max {
        for l in 0..n {
            let (s, c) = mode_response(grid.omega(k as i64, l), &f.combo, t);
            let g = forcing(spec, k, l);
            m.set(k, l, g * s, g * c);
        }
    }
    m
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss4<S: Real>() -> [(S, S); 4] {
    let a = (lit::<S>(3.0) - lit::<S>(2.0) * (lit::<S>(6.0) / lit::<S>(5.0)).sqrt()) / lit::<S>(7.0);
    let b = (lit::<S>(3.0) + lit::<S>(2.0) * (lit::<S>(6.0) / lit::<S>(5.0)).sqrt()) / lit::<S>(7.0);
    let (xa, xb) = (a.sqrt(), b.sqrt());
    let wa = (lit::<S>(18.0) + lit::<S>(30.0).sqrt()) / lit::<S>(36.0);
    let wb = (lit::<S>(18.0) - lit::<S>(30.0).sqrt()) / lit::<S>(36.0);
    let h = lit::<S>(0.5);
    [(h - h * xb, h * wb), (h - h * xa, h * wa), (h + h * xa, h * wa), (h + h * xb, h * wb)]
}

/// Modal state from a sampled control treated as piecewise linear.
///
/// Each segment is integrated exactly against `e^{±iω(T−τ)}`; modes with
/// `|ω|T ≤ 1` use four-point Gauss–Legendre against the series kernel
/// instead. Second order in `dt`.
pub fn evolve_quadrature<S: Real>(
    spec: &SpectralDecomposition<S>,
    grid: &FrequencyGrid<S>,
    samples: &Samples<S>,
    t: S,
) -> Result<ModalState<S>> {
    let vals = &samples.values;
    if vals.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let h = samples.dt;
    let segs = vals.len() - 1;
    if (h * count::<S>(segs) - t).abs() > lit::<S>(1e-12) * t.max(S::one()) {
        return Err(Error::InvalidArgument("sample grid does not cover [0, T]".into()));
    }
    let wmax = grid.max_abs();
    let limit = S::pi() / (lit::<S>(4.0) * wmax);
    if h > limit {
        return Err(Error::GridTooCoarse { dt: to_f64(h), limit: to_f64(limit) });
    }
    let (k_max, n) = (grid.k_max(), grid.dim());
    let slopes: Vec<Complex<S>> = (0..segs).map(|j| (vals[j + 1] - vals[j]) / h).collect();
    let gl = gauss4::<S>();
    let mut m = ModalState::zeros(k_max, n);
    let resync = 256;
    for k in 1..=k_max {
        for l in 0..n {
            let w = grid.omega(k as i64, l);
            let (s_part, c_part) = if cabs(w) * t <= lit(SMALL_OMEGA_T) {
                let (mut acc_s, mut acc_c) = (Complex::<S>::zero(), Complex::<S>::zero());
                for j in 0..segs {
                    let t0 = h * count::<S>(j);
                    for &(x, wt) in &gl {
                        let fv = vals[j] + slopes[j] * (x * h);
                        let (ks, kc) = small_omega_kernel(w, t - t0 - x * h);
                        acc_s = acc_s + fv * ks * (wt * h);
                        acc_c = acc_c + fv * kc * (wt * h);
                    }
                }
                (acc_s, acc_c)
            } else {
                let iw = i_times(w);
                // ∫₀ʰ (f_j + m_j s) e^{∓iωs} ds
                let (j0m, j1m) = (exp_moment(0, -iw, h), exp_moment(1, -iw, h));
                let (j0p, j1p) = (exp_moment(0, iw, h), exp_moment(1, iw, h));
                let (stepm, stepp) = (cexp(-iw * h), cexp(iw * h));
                let (mut ap, mut am) = (Complex::<S>::zero(), Complex::<S>::zero());
                let (mut pp, mut pm) = (Complex::<S>::one(), Complex::<S>::one());
                for j in 0..segs {
                    if j % resync == 0 {
                        let rem = t - h * count::<S>(j);
                        pp = cexp(iw * rem);
                        pm = cexp(-iw * rem);
                    }
                    ap = ap + pp * (vals[j] * j0m + slopes[j] * j1m);
                    am = am + pm * (vals[j] * j0p + slopes[j] * j1p);
                    pp = pp * stepm;
                    pm = pm * stepp;
                }
                ((ap - am) / (iw * lit::<S>(2.0)), (ap + am) * lit::<S>(0.5))
            };
            let g = forcing(spec, k, l);
            m.set(k, l, g * s_part, g * c_part);
        }
    }
    Ok(m)
}

/// `u(x) = Σ_k sin(kx) Σ_l a_{k,l} φ_l` and the same with `ȧ`, at each
/// point. The sine series vanishes at both ends; the boundary trace
/// `u(0, t) = b f(t)` is not represented.
pub fn reconstruct<S: Real>(
    modal: &ModalState<S>,
    spec: &SpectralDecomposition<S>,
    xs: &[S],
) -> (Vec<Vec<Complex<S>>>, Vec<Vec<Complex<S>>>) {
    let (k_max, n) = (modal.k_max(), modal.dim());
    let (uc, vc) = physical_coefficients(modal, spec);
    let mut u = Vec::with_capacity(xs.len());
    let mut v = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut ux = vec![Complex::<S>::zero(); n];
        let mut vx = vec![Complex::<S>::zero(); n];
        for k in 1..=k_max {
            let (s, _) = (count::<S>(k) * x).sin_cos();
            for c in 0..n {
                ux[c] = ux[c] + uc[k - 1][c] * s;
                vx[c] = vx[c] + vc[k - 1][c] * s;
            }
        }
        u.push(ux);
        v.push(vx);
    }
    (u, v)
}

/// Per-mode sine coefficients of `u` and `u_t` in physical components.
pub fn physical_coefficients<S: Real>(
    modal: &ModalState<S>,
    spec: &SpectralDecomposition<S>,
) -> (Vec<Vec<Complex<S>>>, Vec<Vec<Complex<S>>>) {
    let (k_max, n) = (modal.k_max(), modal.dim());
    let mut uc = vec![vec![Complex::<S>::zero(); n]; k_max];
    let mut vc = vec![vec![Complex::<S>::zero(); n]; k_max];
    for k in 1..=k_max {
        for (l, phi) in spec.eigenvectors.iter().enumerate() {
            let (a, ad) = (modal.a(k, l), modal.adot(k, l));
            for c in 0..n {
                uc[k - 1][c] = uc[k - 1][c] + a * phi[c];
                vc[k - 1][c] = vc[k - 1][c] + ad * phi[c];
            }
        }
    }
    (uc, vc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Position,
    Velocity,
}

/// `(Σ_{k,l} k^{2s} |coef_{k,l}|²)^{1/2}` in eigenbasis coordinates.
///
/// Equivalent to the physical `H^s` norm up to the eigenvector condition
/// number ([`SpectralDecomposition::eigenvector_condition`]).
pub fn sobolev_norm<S: Real>(modal: &ModalState<S>, s: i32, field: Field) -> S {
    let vals = match field {
        Field::Position => modal.a_values(),
        Field::Velocity => modal.adot_values(),
    };
    let n = modal.dim();
    let mut acc = S::zero();
    for (p, z) in vals.iter().enumerate() {
        let k = count::<S>(p / n + 1);
        acc = acc + k.powi(2 * s) * z.norm_sqr();
    }
    acc.sqrt()
}

/// `(Σ_{k ∈ ±1..±K, l} |c_{k,l}|²/k²)^{1/2}`.
pub fn c_norm<S: Real>(modal: &ModalState<S>, grid: &FrequencyGrid<S>) -> S {
    let mut acc = S::zero();
    for (k, l) in grid.index_order() {
        let kk = count::<S>(k.unsigned_abs() as usize);
        acc = acc + modal.c(grid, k, l).norm_sqr() / (kk * kk);
    }
    acc.sqrt()
}

/// `‖u‖_{L²(0,π)}` and `‖u_t‖_{H⁻¹(0,π)}` with the sine-series norms
/// `(π/2) Σ |û_k|²` and `(π/2) Σ |v̂_k|²/k²`.
pub fn physical_norms<S: Real>(modal: &ModalState<S>, spec: &SpectralDecomposition<S>) -> (S, S) {
    let (uc, vc) = physical_coefficients(modal, spec);
    let half_pi = S::pi() * lit(0.5);
    let mut nu = S::zero();
    let mut nv = S::zero();
    for (k0, (u, v)) in uc.iter().zip(&vc).enumerate() {
        let kk = count::<S>((k0 + 1) * (k0 + 1));
        nu = nu + u.iter().fold(S::zero(), |a, z| a + z.norm_sqr());
        nv = nv + v.iter().fold(S::zero(), |a, z| a + z.norm_sqr()) / kk;
    }
    ((half_pi * nu).sqrt(), (half_pi * nv).sqrt())
}

/// `(‖u‖²_{L²} + ‖u_t‖²_{H⁻¹})^{1/2}`
pub fn energy_norm<S: Real>(modal: &ModalState<S>, spec: &SpectralDecomposition<S>) -> S {
    let (a, b) = physical_norms(modal, spec);
    (a * a + b * b).sqrt()
}

/// State norm over control norm; zero for the zero control.
pub fn wellposedness_ratio<S: Real>(modal: &ModalState<S>, spec: &SpectralDecomposition<S>, f: &ControlSignal<S>) -> S {
    let fn_ = f.l2_norm();
    if fn_.is_zero() {
        S::zero()
    } else {
        energy_norm(modal, spec) / fn_
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<S> {
    pub modal: ModalState<S>,
    /// Closed form versus quadrature per mode, relative to the largest
    /// coefficient; present when the oracle ran.
    pub per_mode_residuals: Option<Vec<S>>,
    pub wellposedness_ratio: S,
}

/// Closed-form evolution, optionally cross-checked against the quadrature
/// oracle on `oracle_samples` points.
pub fn evolve<S: Real>(
    spec: &SpectralDecomposition<S>,
    grid: &FrequencyGrid<S>,
    f: &ControlSignal<S>,
    t: S,
    oracle_samples: Option<usize>,
) -> Result<EvolutionResult<S>> {
    let modal = duhamel_exact(spec, grid, f, t);
    let per_mode_residuals = match oracle_samples {
        Some(count_) => {
            let mut g = f.clone();
            g.t = t;
            let q = evolve_quadrature(spec, grid, &g.sample(count_), t)?;
            Some(modal_differences(&modal, &q))
        }
        None => None,
    };
    let wellposedness_ratio = wellposedness_ratio(&modal, spec, f);
    Ok(EvolutionResult { modal, per_mode_residuals, wellposedness_ratio })
}

/// `max(|Δa|, |Δȧ|)` per mode over the largest entry of `reference`.
pub fn modal_differences<S: Real>(reference: &ModalState<S>, other: &ModalState<S>) -> Vec<S> {
    let scale = reference
        .a_values()
        .iter()
        .chain(reference.adot_values())
        .fold(S::zero(), |m, z| m.max(cabs(*z)))
        .max(S::min_positive_value());
    reference
        .a_values()
        .iter()
        .zip(other.a_values())
        .zip(reference.adot_values().iter().zip(other.adot_values()))
        .map(|((a, b), (c, d))| cabs(*a - *b).max(cabs(*c - *d)) / scale)
        .collect()
}

#[derive(Debug, Clone)]
pub struct VerifyReport<S> {
    /// `max |achieved − target| / (1 + |target|)` over all `a` and `ȧ`.
    pub max_rel_error: S,
    /// `(k, l)` of the worst entry.
    pub worst_mode: (usize, usize),
    pub pass: bool,
    pub wellposedness_ratio: S,
    pub achieved: ModalState<S>,
}

pub fn verify<S: Real>(
    spec: &SpectralDecomposition<S>,
    grid: &FrequencyGrid<S>,
    f: &ControlSignal<S>,
    target: &ModalState<S>,
    t: S,
    tol: S,
) -> Result<VerifyReport<S>> {
    if target.k_max() != grid.k_max() || target.dim() != grid.dim() {
        return Err(Error::DimensionMismatch("target and grid truncations differ".into()));
    }
    let achieved = duhamel_exact(spec, grid, f, t);
    let mut worst = S::zero();
    let mut worst_mode = (1, 0);
    for k in 1..=grid.k_max() {
        for l in 0..grid.dim() {
            for (x, y) in [(achieved.a(k, l), target.a(k, l)), (achieved.adot(k, l), target.adot(k, l))] {
                let e = cabs(x - y) / (S::one() + cabs(y));
                if e > worst || e != e {
                    worst = e;
                    worst_mode = (k, l);
                }
            }
        }
    }
    let ratio = wellposedness_ratio(&achieved, spec, f);
    Ok(VerifyReport { pass: worst <= tol, max_rel_error: worst, worst_mode, wellposedness_ratio: ratio, achieved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{decompose, CouplingSystem};
    use crate::spectrum::build_frequencies;
    use crate::tolerances::Tolerances;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn setup(a: Vec<Vec<f64>>, b: Vec<f64>, k_max: usize) -> (SpectralDecomposition<f64>, FrequencyGrid<f64>) {
        let tol = Tolerances::default();
        let spec = decompose(&CouplingSystem::new(a, b).unwrap(), &tol).unwrap();
        let grid = build_frequencies(&spec, k_max, tol.zero_tol, tol.collision_threshold(k_max)).unwrap();
        (spec, grid)
    }

    fn sine() -> Vec<(C, C)> {
        // sin t = (e^{it} − e^{−it})/(2i)
        vec![(c(1.0, 0.0), c(0.0, -0.5)), (c(-1.0, 0.0), c(0.0, 0.5))]
    }

    #[test]
    fn resonant_sine_forcing() {
        let (spec, grid) = setup(vec![vec![0.0]], vec![1.0], 1);
        let f = ControlSignal::new(2.0 * PI, sine());
        let m = duhamel_exact(&spec, &grid, &f, 2.0 * PI);
        assert!((m.a(1, 0) - c(-2.0, 0.0)).norm() < 1e-13, "{}", m.a(1, 0));
        // ȧ = (2/π)·(T sin T)/2 = 0 at T = 2π
        assert!(m.adot(1, 0).norm() < 1e-13);
    }

    #[test]
    fn zero_control_gives_zero_state() {
        let (spec, grid) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 4);
        let m = duhamel_exact(&spec, &grid, &ControlSignal::zero(1.0), 1.0);
        assert!(m.a_values().iter().all(|z| z.norm() == 0.0));
        let s = Samples { dt: 0.01, values: vec![c(0.0, 0.0); 101] };
        let m = evolve_quadrature(&spec, &grid, &s, 1.0).unwrap();
        assert!(m.a_values().iter().chain(m.adot_values()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn nonresonant_mode_matches_simpson() {
        let (spec, grid) = setup(vec![vec![0.0]], vec![1.0], 1);
        let t = 2.7;
        let f = ControlSignal::new(t, vec![(c(3.0, 0.0), c(1.0, 0.0))]);
        let m = duhamel_exact(&spec, &grid, &f, t);
        let n = 200_000;
        let h = t / n as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..=n {
            let tau = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += c(0.0, 3.0 * tau).exp() * (t - tau).sin() * w;
        }
        let oracle = acc * (h / 3.0) * (2.0 / PI);
        assert!((m.a(1, 0) - oracle).norm() < 1e-10);
    }

    #[test]
    fn constant_forcing_closed_form() {
        let (spec, grid) = setup(vec![vec![0.0]], vec![1.0], 1);
        let t = 3.3;
        let f = ControlSignal::new(t, vec![(c(0.0, 0.0), c(1.0, 0.0))]);
        let exact = 2.0 / PI * (1.0 - t.cos());
        let m = duhamel_exact(&spec, &grid, &f, t);
        assert!((m.a(1, 0) - exact).norm() < 1e-14);
        let q = evolve_quadrature(&spec, &grid, &f.sample(2001), t).unwrap();
        assert!((q.a(1, 0) - exact).norm() < 1e-13);
    }

    #[test]
    fn quadrature_is_second_order() {
        let (spec, grid) = setup(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0], 3);
        let t = 4.0;
        let f = ControlSignal::new(t, vec![(c(2.5, 0.0), c(0.3, 0.2)), (c(-1.1, 0.0), c(1.0, 0.0))]);
        let exact = duhamel_exact(&spec, &grid, &f, t);
        let err = |count_: usize| {
            let q = evolve_quadrature(&spec, &grid, &f.sample(count_), t).unwrap();
            modal_differences(&exact, &q).into_iter().fold(0.0, f64::max)
        };
        let (e1, e2) = (err(401), err(801));
        let ratio = e1 / e2;
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let (spec, grid) = setup(vec![vec![0.0]], vec![1.0], 8);
        let f = ControlSignal::new(1.0, vec![(c(0.0, 0.0), c(1.0, 0.0))]);
        assert!(matches!(evolve_quadrature(&spec, &grid, &f.sample(5), 1.0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn zero_frequency_limit_is_continuous() {
        let f = vec![(c(0.7, 0.0), c(1.0, -0.5)), (c(-2.0, 0.0), c(0.2, 0.0))];
        let t = 5.0;
        let (s0, c0) = mode_response(c(0.0, 0.0), &f, t);
        let (s1, c1) = mode_response(c(1e-12, 0.0), &f, t);
        assert!((s0 - s1).norm() < 1e-8 * s0.norm());
        assert!((c0 - c1).norm() < 1e-8 * c0.norm());
        // either side of the series switch agrees
        let (sa, ca) = mode_response(c(0.999999 / t, 0.0), &f, t);
        let (sb, cb) = mode_response(c(1.000001 / t, 0.0), &f, t);
        assert!((sa - sb).norm() < 1e-5 * sa.norm() && (ca - cb).norm() < 1e-5 * ca.norm());
    }

    #[test]
    fn hyperbolic_mode_matches_quadrature() {
        let (spec, grid) = setup(vec![vec![-3.0]], vec![1.0], 1);
        assert!(grid.omega(1, 0).re.abs() < 1e-15);
        let t = 2.0;
        let f = ControlSignal::new(t, vec![(c(1.3, 0.0), c(1.0, 0.0))]);
        let exact = duhamel_exact(&spec, &grid, &f, t);
        let q = evolve_quadrature(&spec, &grid, &f.sample(20001), t).unwrap();
        assert!(modal_differences(&exact, &q)[0] < 1e-8);
    }

    #[test]
    fn reconstruct_single_and_sum() {
        let (spec, _) = setup(vec![vec![1.0, 0.0], vec![0.0, 2.0]], vec![1.0, 1.0], 2);
        let mut m = ModalState::zeros(2, 2);
        m.set(1, 0, c(1.0, 0.0), c(0.0, 0.0));
        let xs = [0.0, 0.4, PI / 2.0, PI];
        let (u, _) = reconstruct(&m, &spec, &xs);
        for (x, ux) in xs.iter().zip(&u) {
            assert!((ux[0] - c(x.sin(), 0.0)).norm() < 1e-15 && ux[1].norm() < 1e-15);
        }
        let mut m2 = ModalState::zeros(2, 2);
        m2.set(2, 1, c(0.5, 0.0), c(1.0, 0.0));
        let mut both = m.clone();
        both.set(2, 1, c(0.5, 0.0), c(1.0, 0.0));
        let (ua, va) = reconstruct(&m, &spec, &xs);
        let (ub, vb) = reconstruct(&m2, &spec, &xs);
        let (us, vs) = reconstruct(&both, &spec, &xs);
        for i in 0..xs.len() {
            for j in 0..2 {
                assert!((us[i][j] - ua[i][j] - ub[i][j]).norm() < 1e-15);
                assert!((vs[i][j] - va[i][j] - vb[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sobolev_weights() {
        let mut m = ModalState::<f64>::zeros(3, 1);
        m.set(2, 0, c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(sobolev_norm(&m, 1, Field::Position), 2.0);
        assert_eq!(sobolev_norm(&m, 0, Field::Position), 1.0);
        assert_eq!(sobolev_norm(&m, -1, Field::Position), 0.5);
        assert_eq!(sobolev_norm(&m, 0, Field::Velocity), 0.0);
    }

    #[test]
    fn parseval_against_trapezoid() {
        let (spec, _) = setup(vec![vec![1.0, 0.0], vec![0.0, 2.0]], vec![1.0, 1.0], 4);
        let mut m = ModalState::zeros(4, 2);
        m.set(1, 0, c(0.3, 0.0), c(0.0, 0.0));
        m.set(3, 1, c(-1.2, 0.5), c(0.0, 0.0));
        m.set(4, 0, c(0.1, 0.0), c(0.0, 0.0));
        let npts = 4001;
        let xs: Vec<f64> = (0..npts).map(|i| PI * i as f64 / (npts - 1) as f64).collect();
        let (u, _) = reconstruct(&m, &spec, &xs);
        let h = PI / (npts - 1) as f64;
        let quad: f64 = u.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() * h;
        let (nu, _) = physical_norms(&m, &spec);
        assert!((quad - nu * nu).abs() < 1e-6);
        // orthonormal eigenvectors: eigenbasis norm equals the scaled physical norm
        assert!((sobolev_norm(&m, 0, Field::Position).powi(2) * PI / 2.0 - nu * nu).abs() < 1e-12);
    }

    #[test]
    fn verify_zero_control_fails() {
        let (spec, grid) = setup(vec![vec![0.0]], vec![1.0], 2);
        let mut target = ModalState::zeros(2, 1);
        target.set(2, 0, c(3.0, 0.0), c(0.0, 0.0));
        let r = verify(&spec, &grid, &ControlSignal::zero(2.0 * PI), &target, 2.0 * PI, 1e-6).unwrap();
        assert!(!r.pass);
        assert!((r.max_rel_error - 0.75).abs() < 1e-14);
        assert_eq!(r.worst_mode, (2, 0));
    }
}
