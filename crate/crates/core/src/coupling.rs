//! The pair `(A, b)`: eigen-structure, control weights and the three
//! controllability tests.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{eig_dense, inner, inverse, rank_qr, vec_norm, ComplexMatrix};
use crate::scalar::{cabs, count, lex_cmp, lit, to_f64, Real};
use crate::tolerances::Tolerances;

/// `u_tt − u_xx + A u = 0` on `(0, π)` with boundary control `u(0, t) = b f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSystem<S> {
    a: Vec<Vec<S>>,
    b: Vec<S>,
}

impl<S: Real> CouplingSystem<S> {
    pub fn new(a: Vec<Vec<S>>, b: Vec<S>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidSystem("A must have at least one row".into()));
        }
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSystem(format!("A must be square ({n} rows)")));
        }
        if b.len() != n {
            return Err(Error::InvalidSystem(format!("b has length {}, expected {n}", b.len())));
        }
        if !a.iter().flatten().chain(b.iter()).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("coupling system"));
        }
        if b.iter().all(|x| x.is_zero()) {
            return Err(Error::InvalidSystem("b is identically zero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<S>] {
        &self.a
    }

    pub fn b(&self) -> &[S] {
        &self.b
    }

    pub fn matrix(&self) -> ComplexMatrix<S> {
        ComplexMatrix::from_real_rows(&self.a).expect("validated at construction")
    }

    pub fn b_complex(&self) -> Vec<Complex<S>> {
        self.b.iter().map(|&x| Complex::new(x, S::zero())).collect()
    }

    pub fn norm_fro(&self) -> S {
        self.a.iter().flatten().fold(S::zero(), |acc, &x| acc + x * x).sqrt()
    }
}

/// Eigenpairs `(λ_l, φ_l)`, the biorthogonal family `ψ_l` and the weights
/// `β_l = ⟨b, ψ_l⟩`, all indexed by `l = 0..N` in `(Re λ, Im λ)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<S> {
    pub eigenvalues: Vec<Complex<S>>,
    pub eigenvectors: Vec<Vec<Complex<S>>>,
    pub biorthogonal: Vec<Vec<Complex<S>>>,
    pub beta: Vec<Complex<S>>,
    pub min_separation: S,
    pub b: Vec<Complex<S>>,
}

impl<S: Real> SpectralDecomposition<S> {
    /// Rebuilds `ψ` and `β` for a rescaled set of eigenvectors.
    pub fn with_eigenvectors(&self, eigenvectors: Vec<Vec<Complex<S>>>) -> Result<Self> {
        if eigenvectors.len() != self.eigenvalues.len() {
            return Err(Error::DimensionMismatch("eigenvector count".into()));
        }
        let biorthogonal = biorthogonal_family(&eigenvectors)?;
        let beta = biorthogonal.iter().map(|psi| inner(&self.b, psi)).collect();
        Ok(Self { eigenvectors, biorthogonal, beta, ..self.clone() })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_{i,j} |⟨φ_i, ψ_j⟩ − δ_ij|`
    pub fn biorthogonality_defect(&self) -> S {
        let mut worst = S::zero();
        for (i, phi) in self.eigenvectors.iter().enumerate() {
            for (j, psi) in self.biorthogonal.iter().enumerate() {
                let target = if i == j { Complex::one() } else { Complex::zero() };
                worst = worst.max(cabs(inner(phi, psi) - target));
            }
        }
        worst
    }

    /// 1-norm condition number of the eigenvector matrix; the equivalence
    /// constant between eigenbasis and physical norms.
    pub fn eigenvector_condition(&self) -> S {
        let v = ComplexMatrix::from_columns(&self.eigenvectors).expect("square by construction");
        let w = ComplexMatrix::from_columns(&self.biorthogonal).expect("square by construction");
        v.norm_one() * w.conj_transpose().norm_one()
    }

    /// True when all eigenvalues have exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.eigenvalues.iter().all(|z| z.im.is_zero())
    }
}

fn biorthogonal_family<S: Real>(eigenvectors: &[Vec<Complex<S>>]) -> Result<Vec<Vec<Complex<S>>>> {
    let v = ComplexMatrix::from_columns(eigenvectors)?;
    let vinv = inverse(&v)?;
    Ok((0..v.rows()).map(|l| vinv.row(l).iter().map(|z| z.conj()).collect()).collect())
}

/// Eigendecomposition with biorthogonal family and control weights.
///
/// Eigenvalues whose imaginary part is at rounding level are snapped to the
/// real axis together with their eigenvectors, so that real spectra stay
/// exactly real downstream.
pub fn decompose<S: Real>(sys: &CouplingSystem<S>, tol: &Tolerances<S>) -> Result<SpectralDecomposition<S>> {
    let n = sys.dim();
    let anorm = sys.norm_fro();
    let eig = eig_dense(&sys.matrix(), tol.eig_tol)?;
    let snap = lit::<S>(64.0) * S::epsilon() * (S::one() + anorm);

    let mut pairs: Vec<(Complex<S>, Vec<Complex<S>>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let mut v = eig.eigenvectors.column(j);
            let mut lambda = lambda;
            if lambda.im.abs() <= snap {
                lambda.im = S::zero();
                if v.iter().all(|z| z.im.abs() <= snap.sqrt()) {
                    for z in v.iter_mut() {
                        z.im = S::zero();
                    }
                    let nrm = vec_norm(&v);
                    for z in v.iter_mut() {
                        *z = *z / nrm;
                    }
                }
            }
            (lambda, v)
        })
        .collect();
    pairs.sort_by(|x, y| lex_cmp(&x.0, &y.0));

    let mut min_sep = S::infinity();
    for i in 0..n {
        for j in (i + 1)..n {
            min_sep = min_sep.min(cabs(pairs[i].0 - pairs[j].0));
        }
    }
    let threshold = tol.sep_tol * (S::one() + anorm);
    if n > 1 && min_sep <= threshold {
        return Err(Error::RepeatedEigenvalues { separation: to_f64(min_sep), threshold: to_f64(threshold) });
    }

    let (eigenvalues, eigenvectors): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let b = sys.b_complex();
    let biorthogonal = biorthogonal_family(&eigenvectors)?;
    let beta = biorthogonal.iter().map(|psi| inner(&b, psi)).collect();
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, biorthogonal, beta, min_separation: min_sep, b })
}

/// Kalman matrix `[A^{N−1}b, …, Ab, b]`.
pub fn kalman_matrix<S: Real>(sys: &CouplingSystem<S>) -> ComplexMatrix<S> {
    let n = sys.dim();
    let a = sys.matrix();
    let mut cols = vec![sys.b_complex()];
    for _ in 1..n {
        let next = a.mul_vec(cols.last().expect("nonempty")).expect("square");
        cols.push(next);
    }
    cols.reverse();
    ComplexMatrix::from_columns(&cols).expect("square")
}

/// Numerical rank of the Kalman matrix.
///
/// Columns are scaled to unit norm first; rank is invariant under column
/// scaling and the powers of `A` otherwise dominate the relative threshold.
pub fn kalman_check<S: Real>(sys: &CouplingSystem<S>, rank_tol: S) -> (usize, bool) {
    let n = sys.dim();
    let k = kalman_matrix(sys);
    let cols: Vec<Vec<Complex<S>>> = (0..n)
        .map(|j| {
            let c = k.column(j);
            let nrm = vec_norm(&c);
            if nrm.is_zero() {
                c
            } else {
                c.into_iter().map(|z| z / nrm).collect()
            }
        })
        .collect();
    let rank = rank_qr(&ComplexMatrix::from_columns(&cols).expect("square"), rank_tol);
    (rank, rank == n)
}

/// A coincidence `k² − l² = λ_i − λ_j` (`i`, `j` are 0-based eigenvalue
/// indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub k: u64,
    pub l: u64,
    pub i: usize,
    pub j: usize,
    pub defect: f64,
}

/// All `(k, l, i, j)` with `k ≠ l ≥ 1`, `i ≠ j` and
/// `|(k² − l²) − (λ_i − λ_j)| ≤ res_tol`.
pub fn resonance_check<S: Real>(lambda: &[Complex<S>], res_tol: S) -> Vec<Resonance> {
    let n = lambda.len();
    let mut spread = S::zero();
    for i in 0..n {
        for j in 0..n {
            spread = spread.max(cabs(lambda[i] - lambda[j]));
        }
    }
    // |k² − l²| ≥ k + l once k ≠ l
    let bound = to_f64(spread).floor() as u64 + 1;
    let mut out = Vec::new();
    for k in 1..=bound {
        for l in 1..=bound {
            if k == l || (k * k).abs_diff(l * l) > bound {
                continue;
            }
            let gap = lit::<S>(k as f64 * k as f64 - l as f64 * l as f64);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = lambda[i] - lambda[j];
                    let defect = cabs(Complex::new(gap, S::zero()) - d);
                    if defect <= res_tol {
                        out.push(Resonance { k, l, i, j, defect: to_f64(defect) });
                    }
                }
            }
        }
    }
    out
}

/// Outcome of the three controllability tests at a given horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    pub n: usize,
    pub eigenvalues: Vec<(f64, f64)>,
    pub min_separation: f64,
    pub kalman_rank: usize,
    /// Full Kalman rank and every `|β_l|` above threshold.
    pub kalman_ok: bool,
    pub beta_magnitudes: Vec<f64>,
    pub beta_ok: bool,
    pub resonances: Vec<Resonance>,
    pub t: f64,
    pub t_min: f64,
    pub t_ok: bool,
    pub overall_controllable: bool,
}

pub fn analyze<S: Real>(sys: &CouplingSystem<S>, t: S, tol: &Tolerances<S>) -> Result<ConditionsReport> {
    if !(t > S::zero()) {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    let spec = decompose(sys, tol)?;
    let n = sys.dim();
    let (kalman_rank, rank_ok) = kalman_check(sys, tol.rank_tol);
    let bnorm = vec_norm(&spec.b);
    let beta_magnitudes: Vec<S> = spec.beta.iter().map(|z| cabs(*z)).collect();
    let beta_ok = beta_magnitudes.iter().all(|&m| m > tol.beta_tol * bnorm);
    let resonances = resonance_check(&spec.eigenvalues, tol.res_tol);
    let t_min = lit::<S>(2.0) * S::pi() * count::<S>(n);
    let t_ok = t >= t_min - tol.time_tol;
    let kalman_ok = rank_ok && beta_ok;
    Ok(ConditionsReport {
        n,
        eigenvalues: spec.eigenvalues.iter().map(|z| (to_f64(z.re), to_f64(z.im))).collect(),
        min_separation: to_f64(spec.min_separation),
        kalman_rank,
        kalman_ok,
        beta_magnitudes: beta_magnitudes.into_iter().map(to_f64).collect(),
        beta_ok,
        overall_controllable: kalman_ok && resonances.is_empty() && t_ok,
        resonances,
        t: to_f64(t),
        t_min: to_f64(t_min),
        t_ok,
    })
}
