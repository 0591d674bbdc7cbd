//! Small dense complex linear algebra.
//!
//! Everything here targets matrices of a few dozen rows (eigenproblems are
//! capped at 32) up to a few hundred (Gram systems). Storage is row-major.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cabs, count, is_finite_c, lex_cmp, lit, to_f64, Real};

pub const MAX_EIG_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<S>>,
}

impl<S: Real> ComplexMatrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<S>>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|z| is_finite_c(*z)) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Embeds a real matrix given as rows.
    pub fn from_real_rows(rows: &[Vec<S>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&x| Complex::new(x, S::zero())).collect();
        Self::new(r, c, data)
    }

    pub fn from_rows(rows: &[Vec<Complex<S>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Complex<S>>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        if !m.data.iter().all(|z| is_finite_c(*z)) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex<S>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<S>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Complex<S>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch("matmul inner dimensions".into()));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] = m[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, x: &[Complex<S>]) -> Result<Vec<Complex<S>>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch("matrix-vector length".into()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(Complex::<S>::zero(), |acc, (a, b)| acc + *a * *b))
            .collect())
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> S {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(S::zero(), |acc, i| acc + cabs(self[(i, j)])))
            .fold(S::zero(), S::max)
    }

    pub fn norm_fro(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// `max |G - Gᴴ|` over all entries.
    pub fn hermitian_defect(&self) -> S {
        let mut d = S::zero();
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                d = d.max(cabs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        d
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl<S> Index<(usize, usize)> for ComplexMatrix<S> {
    type Output = Complex<S>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<S> {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for ComplexMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<S> {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm<S: Real>(x: &[Complex<S>]) -> S {
    x.iter().fold(S::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `⟨x, y⟩ = Σ x_m · conj(y_m)`.
pub fn inner<S: Real>(x: &[Complex<S>], y: &[Complex<S>]) -> Complex<S> {
    x.iter().zip(y).fold(Complex::<S>::zero(), |acc, (a, b)| acc + *a * b.conj())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<S> {
    pub eigenvalues: Vec<Complex<S>>,
    /// Unit-norm eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix<S>,
    pub residuals: Vec<S>,
}

/// Eigendecomposition of a small dense complex matrix.
///
/// Householder reduction to Hessenberg form, then single-shift complex QR
/// with Wilkinson shifts to a Schur form `A = Q T Qᴴ`; eigenvectors come from
/// back-substitution on `T`. Eigenpairs are returned sorted by `(Re, Im)`,
/// each eigenvector scaled to unit norm with its largest component real and
/// positive.
///
/// Returns an error when any residual `‖A v − λ v‖` exceeds
/// `eig_tol · max(1, ‖A‖_F)`.
pub fn eig_dense<S: Real>(a: &ComplexMatrix<S>, eig_tol: S) -> Result<EigenResult<S>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eig_dense needs a square matrix, got {}x{}", a.rows, a.cols)));
    }
    let n = a.rows;
    if n > MAX_EIG_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    if n == 0 {
        return Ok(EigenResult { eigenvalues: vec![], eigenvectors: ComplexMatrix::zeros(0, 0), residuals: vec![] });
    }
    let (mut h, mut q) = hessenberg(a);
    schur_qr(&mut h, &mut q)?;
    let anorm = a.norm_fro();

    let mut pairs: Vec<(Complex<S>, Vec<Complex<S>>)> = (0..n)
        .map(|j| {
            let x = triangular_eigvec(&h, j, anorm);
            let mut v = q.mul_vec(&x).expect("square");
            normalize_phase(&mut v);
            (h[(j, j)], v)
        })
        .collect();
    pairs.sort_by(|x, y| lex_cmp(&x.0, &y.0));

    let bound = eig_tol * S::one().max(anorm);
    let mut residuals = Vec::with_capacity(n);
    for (lambda, v) in &pairs {
        let av = a.mul_vec(v)?;
        let r: Vec<_> = av.iter().zip(v).map(|(x, y)| *x - *lambda * *y).collect();
        let res = vec_norm(&r) / vec_norm(v);
        if !(res <= bound) {
            return Err(Error::NonConvergence { iterations: 0 });
        }
        residuals.push(res);
    }
    let cols: Vec<_> = pairs.iter().map(|p| p.1.clone()).collect();
    Ok(EigenResult {
        eigenvalues: pairs.into_iter().map(|p| p.0).collect(),
        eigenvectors: ComplexMatrix::from_columns(&cols)?,
        residuals,
    })
}

/// Unit norm, largest-magnitude component real and positive.
fn normalize_phase<S: Real>(v: &mut [Complex<S>]) {
    let norm = vec_norm(v);
    if norm == S::zero() {
        return;
    }
    let mut best = 0;
    let mut best_mag = S::zero();
    for (i, z) in v.iter().enumerate() {
        // first index wins ties beyond rounding
        let m = cabs(*z);
        if m > best_mag * (S::one() + lit(1e-12)) {
            best = i;
            best_mag = m;
        }
    }
    let phase = v[best].conj() / cabs(v[best]);
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    v[best].im = S::zero();
}

fn hessenberg<S: Real>(a: &ComplexMatrix<S>) -> (ComplexMatrix<S>, ComplexMatrix<S>) {
    let n = a.rows;
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let two = lit::<S>(2.0);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex<S>> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&v);
        if xnorm == S::zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if cabs(x0) == S::zero() { Complex::one() } else { x0 / cabs(x0) };
        v[0] = v[0] + phase * xnorm;
        let vnorm = vec_norm(&v);
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        // H ← P H, P = I − 2 v vᴴ acting on rows k+1..n
        for j in 0..n {
            let s = (0..v.len()).fold(Complex::<S>::zero(), |acc, m| acc + v[m].conj() * h[(k + 1 + m, j)]);
            for m in 0..v.len() {
                h[(k + 1 + m, j)] = h[(k + 1 + m, j)] - v[m] * s * two;
            }
        }
        // H ← H P, Q ← Q P
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let s = (0..v.len()).fold(Complex::<S>::zero(), |acc, m| acc + mat[(i, k + 1 + m)] * v[m]);
                for m in 0..v.len() {
                    mat[(i, k + 1 + m)] = mat[(i, k + 1 + m)] - s * v[m].conj() * two;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex::zero();
        }
    }
    (h, q)
}

/// Complex Givens rotation `[c s; −s̄ c]` (c real) mapping `(x, y)` to `(r, 0)`.
fn givens<S: Real>(x: Complex<S>, y: Complex<S>) -> (S, Complex<S>) {
    let ax = cabs(x);
    let ay = cabs(y);
    if ay == S::zero() {
        return (S::one(), Complex::zero());
    }
    if ax == S::zero() {
        return (S::zero(), y.conj() / ay);
    }
    let r = (ax * ax + ay * ay).sqrt();
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

fn schur_qr<S: Real>(h: &mut ComplexMatrix<S>, q: &mut ComplexMatrix<S>) -> Result<()> {
    let n = h.rows;
    let eps = S::epsilon();
    let max_iter = 100 * n * n;
    let hnorm = h.norm_fro().max(S::min_positive_value());
    let mut hi = n - 1;
    let mut iter_since = 0usize;
    let mut total = 0usize;
    let half = lit::<S>(0.5);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = cabs(h[(lo - 1, lo - 1)]) + cabs(h[(lo, lo)]);
            if s == S::zero() {
                s = hnorm;
            }
            if cabs(h[(lo, lo - 1)]) <= eps * s {
                h[(lo, lo - 1)] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since = 0;
            continue;
        }
        total += 1;
        iter_since += 1;
        if total > max_iter {
            return Err(Error::NonConvergence { iterations: total });
        }

        let mu = if iter_since % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + Complex::new(cabs(h[(hi, hi - 1)]) * lit(0.75), S::zero())
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let p = (a - d) * half;
            let disc = crate::scalar::csqrt(p * p + b * c);
            let den1 = p + disc;
            let den2 = p - disc;
            let den = if cabs(den1) >= cabs(den2) { den1 } else { den2 };
            if cabs(den) == S::zero() {
                d
            } else {
                d - b * c / den
            }
        };

        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] - mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex::zero();
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            for i in 0..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = x * c + y * s.conj();
                q[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] + mu;
        }
    }
    Ok(())
}

/// Eigenvector of upper triangular `t` for the diagonal entry `j`.
fn triangular_eigvec<S: Real>(t: &ComplexMatrix<S>, j: usize, scale: S) -> Vec<Complex<S>> {
    let n = t.rows;
    let lambda = t[(j, j)];
    let small = S::epsilon() * scale.max(S::min_positive_value());
    let mut x = vec![Complex::zero(); n];
    x[j] = Complex::one();
    for i in (0..j).rev() {
        let s = ((i + 1)..=j).fold(Complex::<S>::zero(), |acc, m| acc + t[(i, m)] * x[m]);
        let mut d = t[(i, i)] - lambda;
        if cabs(d) < small {
            d = Complex::new(small, S::zero());
        }
        x[i] = -s / d;
    }
    x
}

/// Pivoted `P G Pᵀ = L D Lᴴ` factorization of a Hermitian matrix.
///
/// Symmetric pivoting on the largest remaining diagonal magnitude; no 2×2
/// pivots, so indefinite matrices with vanishing diagonals are reported as
/// singular. Intended for Gram matrices, which are positive semidefinite.
#[derive(Debug, Clone)]
pub struct HermitianFactor<S> {
    n: usize,
    perm: Vec<usize>,
    l: ComplexMatrix<S>,
    d: Vec<S>,
    norm_one: S,
}

impl<S: Real> HermitianFactor<S> {
    /// Fails with `SingularSystem` when a pivot magnitude drops to
    /// `pivot_tol · ‖G‖₁` or below.
    pub fn new(g: &ComplexMatrix<S>, pivot_tol: S) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch("Hermitian factor needs a square matrix".into()));
        }
        let n = g.rows;
        let norm_one = g.norm_one();
        let mut a = g.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = ComplexMatrix::identity(n);
        let mut d = vec![S::zero(); n];
        let threshold = pivot_tol * norm_one;
        for k in 0..n {
            let mut p = k;
            for i in (k + 1)..n {
                if a[(i, i)].re.abs() > a[(p, p)].re.abs() {
                    p = i;
                }
            }
            if p != k {
                a.swap_rows(k, p);
                for r in 0..n {
                    a.data.swap(r * n + k, r * n + p);
                }
                perm.swap(k, p);
                for c in 0..k {
                    let tmp = l[(k, c)];
                    l[(k, c)] = l[(p, c)];
                    l[(p, c)] = tmp;
                }
            }
            let dk = a[(k, k)].re;
            if !(dk.abs() > threshold) {
                return Err(Error::SingularSystem { step: k, pivot: to_f64(dk), threshold: to_f64(threshold) });
            }
            d[k] = dk;
            for i in (k + 1)..n {
                l[(i, k)] = a[(i, k)] / dk;
            }
            for i in (k + 1)..n {
                let lik = l[(i, k)] * dk;
                for j in (k + 1)..=i {
                    let v = a[(i, j)] - lik * l[(j, k)].conj();
                    a[(i, j)] = v;
                    a[(j, i)] = v.conj();
                }
                a[(i, i)].im = S::zero();
            }
        }
        Ok(Self { n, perm, l, d, norm_one })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[S] {
        &self.d
    }

    pub fn solve(&self, rhs: &[Complex<S>]) -> Result<Vec<Complex<S>>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        let mut z: Vec<Complex<S>> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s = (0..i).fold(z[i], |acc, j| acc - self.l[(i, j)] * z[j]);
            z[i] = s;
        }
        for i in 0..n {
            z[i] = z[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let s = ((i + 1)..n).fold(z[i], |acc, j| acc - self.l[(j, i)].conj() * z[j]);
            z[i] = s;
        }
        let mut x = vec![Complex::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Ok(x)
    }

    /// `‖G‖₁ · ‖G⁻¹‖₁`, with `‖G⁻¹‖₁` computed column by column.
    pub fn cond_one(&self) -> S {
        let n = self.n;
        let mut inv_norm = S::zero();
        let mut e = vec![Complex::zero(); n];
        for j in 0..n {
            e[j] = Complex::one();
            let col = self.solve(&e).expect("dimension checked");
            e[j] = Complex::zero();
            inv_norm = inv_norm.max(col.iter().fold(S::zero(), |acc, z| acc + cabs(*z)));
        }
        self.norm_one * inv_norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSolve<S> {
    pub solution: Vec<Complex<S>>,
    pub cond_estimate: S,
}

/// Solves `G x = rhs` for Hermitian `G` and attaches a 1-norm condition
/// estimate.
pub fn solve_hermitian<S: Real>(g: &ComplexMatrix<S>, rhs: &[Complex<S>], pivot_tol: S) -> Result<HermitianSolve<S>> {
    if !g.is_square() || rhs.len() != g.rows {
        return Err(Error::DimensionMismatch("solve_hermitian dimensions".into()));
    }
    if !rhs.iter().all(|z| is_finite_c(*z)) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let defect = g.hermitian_defect();
    if defect > lit::<S>(1e-10) * g.norm_one() {
        return Err(Error::NotHermitian { defect: to_f64(defect) });
    }
    let f = HermitianFactor::new(g, pivot_tol)?;
    let solution = f.solve(rhs)?;
    Ok(HermitianSolve { solution, cond_estimate: f.cond_one() })
}

/// Numerical rank by Householder QR with column pivoting: the number of
/// `|R_kk|` above `rank_tol · |R_00|`.
pub fn rank_qr<S: Real>(m: &ComplexMatrix<S>, rank_tol: S) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut a = m.clone();
    let steps = rows.min(cols);
    let mut diag = Vec::with_capacity(steps);
    let two = lit::<S>(2.0);
    for k in 0..steps {
        // pivot: largest remaining column norm
        let mut best = k;
        let mut best_norm = S::zero();
        for j in k..cols {
            let nrm = (k..rows).fold(S::zero(), |acc, i| acc + a[(i, j)].norm_sqr());
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != k {
            for i in 0..rows {
                a.data.swap(i * cols + k, i * cols + best);
            }
        }
        let xnorm = best_norm.sqrt();
        diag.push(xnorm);
        if xnorm == S::zero() {
            break;
        }
        let mut v: Vec<Complex<S>> = (k..rows).map(|i| a[(i, k)]).collect();
        let x0 = v[0];
        let phase = if cabs(x0) == S::zero() { Complex::one() } else { x0 / cabs(x0) };
        v[0] = v[0] + phase * xnorm;
        let vnorm = vec_norm(&v);
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        for j in k..cols {
            let s = (0..v.len()).fold(Complex::<S>::zero(), |acc, r| acc + v[r].conj() * a[(k + r, j)]);
            for r in 0..v.len() {
                a[(k + r, j)] = a[(k + r, j)] - v[r] * s * two;
            }
        }
    }
    let top = diag.first().copied().unwrap_or(S::zero());
    if top == S::zero() {
        return 0;
    }
    diag.iter().filter(|&&d| d > rank_tol * top).count()
}

/// Inverse by Gaussian elimination with partial pivoting.
pub fn inverse<S: Real>(m: &ComplexMatrix<S>) -> Result<ComplexMatrix<S>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse needs a square matrix".into()));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    let scale = m.norm_one();
    for k in 0..n {
        let mut p = k;
        for i in (k + 1)..n {
            if cabs(a[(i, k)]) > cabs(a[(p, k)]) {
                p = i;
            }
        }
        let piv = a[(p, k)];
        if !(cabs(piv) > S::epsilon() * count::<S>(n) * scale) {
            return Err(Error::SingularSystem { step: k, pivot: to_f64(cabs(piv)), threshold: to_f64(S::epsilon() * scale) });
        }
        a.swap_rows(k, p);
        inv.swap_rows(k, p);
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[(i, k)] / piv;
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                a[(i, j)] = a[(i, j)] - f * a[(k, j)];
                inv[(i, j)] = inv[(i, j)] - f * inv[(k, j)];
            }
        }
        for j in 0..n {
            a[(k, j)] = a[(k, j)] / piv;
            inv[(k, j)] = inv[(k, j)] / piv;
        }
    }
    Ok(inv)
}
