//! Closed-form integrals of polynomial-times-exponential kernels.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{cabs, cexp, count, lit, Real};

/// `J_p(μ, T) = ∫₀ᵀ s^p e^{μ s} ds` for complex `μ`.
///
/// Power series when `|μ|T` is at most `max(1, p + 1)`, where forward
/// recursion would amplify rounding; otherwise upward recursion from
/// `J_0 = (e^{μT} − 1)/μ`.
pub fn exp_moment<S: Real>(p: usize, mu: Complex<S>, t: S) -> Complex<S> {
    let x = cabs(mu) * t;
    let switch = count::<S>(p + 1).max(S::one());
    if x <= switch {
        return exp_moment_series(p, mu, t);
    }
    let e = cexp(mu * t);
    let mut j = (e - Complex::one()) / mu;
    let mut tp = S::one();
    for q in 1..=p {
        tp = tp * t;
        j = (e * tp - j * count::<S>(q)) / mu;
    }
    j
}

fn exp_moment_series<S: Real>(p: usize, mu: Complex<S>, t: S) -> Complex<S> {
    // Σ_n μⁿ T^{n+p+1} / (n! (n+p+1))
    let mut tp1 = S::one();
    for _ in 0..=p {
        tp1 = tp1 * t;
    }
    let z = mu * t;
    let mut term: Complex<S> = Complex::one();
    let mut sum: Complex<S> = Complex::zero();
    let cap = 60 + 3 * (p + 1);
    for n in 0..cap {
        let contrib = term / count::<S>(n + p + 1);
        sum = sum + contrib;
        if n > 0 && cabs(contrib) <= S::epsilon() * cabs(sum) * lit(0.25) {
            break;
        }
        term = term * z / count::<S>(n + 1);
    }
    sum * tp1
}

/// `∫₀ᵀ e^{iΔ s} ds` with `Δ` complex.
pub fn exp_integral<S: Real>(delta: Complex<S>, t: S) -> Complex<S> {
    exp_moment(0, Complex::new(-delta.im, delta.re), t)
}
