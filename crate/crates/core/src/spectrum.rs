//! Modal frequencies `ω_{k,l}`, collision screening and exponential divided
//! differences.

use num_complex::Complex;
use num_traits::One;

use crate::coupling::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::scalar::{cabs, count, csqrt, lex_cmp, to_f64, Real};

/// Signed mode `k ∈ {±1..±K}` paired with a 0-based eigen index `l`.
pub type ModeIndex = (i64, usize);

/// Index order shared by moment vectors and Gram matrices: `k` ascending over
/// `−K..−1, 1..K`, then `l` ascending.
pub fn index_order(k_max: usize, n: usize) -> Vec<ModeIndex> {
    let k_max = k_max as i64;
    (-k_max..=k_max)
        .filter(|&k| k != 0)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .collect()
}

/// Position of `(k, l)` in [`index_order`].
pub fn index_of(k_max: usize, n: usize, k: i64, l: usize) -> usize {
    let block = if k < 0 { (k + k_max as i64) as usize } else { (k + k_max as i64 - 1) as usize };
    block * n + l
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub first: ModeIndex,
    pub second: ModeIndex,
    pub distance: f64,
}

/// `ω_{k,l} = √(k² + λ_l)` (principal branch) for `k = 1..K`, extended by
/// `ω_{−k,l} = −ω_{k,l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<S> {
    k_max: usize,
    n: usize,
    positive: Vec<Complex<S>>,
    pub zero_modes: Vec<ModeIndex>,
    pub collisions: Vec<Collision>,
}

impl<S: Real> FrequencyGrid<S> {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn omega(&self, k: i64, l: usize) -> Complex<S> {
        assert!(k != 0 && k.unsigned_abs() as usize <= self.k_max && l < self.n, "mode ({k}, {l}) out of range");
        let w = self.positive[(k.unsigned_abs() as usize - 1) * self.n + l];
        if k > 0 {
            w
        } else {
            -w
        }
    }

    pub fn index_order(&self) -> Vec<ModeIndex> {
        index_order(self.k_max, self.n)
    }

    /// Frequencies in [`index_order`].
    pub fn omegas(&self) -> Vec<Complex<S>> {
        self.index_order().into_iter().map(|(k, l)| self.omega(k, l)).collect()
    }

    pub fn max_abs(&self) -> S {
        self.positive.iter().fold(S::zero(), |m, z| m.max(cabs(*z)))
    }
}

pub fn build_frequencies<S: Real>(
    spec: &SpectralDecomposition<S>,
    k_max: usize,
    zero_tol: S,
    coll_tol: S,
) -> Result<FrequencyGrid<S>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let n = spec.dim();
    let mut positive = Vec::with_capacity(k_max * n);
    for k in 1..=k_max {
        let k2 = count::<S>(k * k);
        for lambda in &spec.eigenvalues {
            positive.push(csqrt(Complex::new(k2, S::zero()) + *lambda));
        }
    }
    let mut grid = FrequencyGrid { k_max, n, positive, zero_modes: Vec::new(), collisions: Vec::new() };
    grid.zero_modes = grid
        .index_order()
        .into_iter()
        .filter(|&(k, l)| cabs(grid.omega(k, l)) <= zero_tol)
        .collect();
    grid.collisions = detect_collisions(&grid, coll_tol);
    Ok(grid)
}

/// All unordered pairs of distinct grid entries closer than `coll_tol`.
pub fn detect_collisions<S: Real>(grid: &FrequencyGrid<S>, coll_tol: S) -> Vec<Collision> {
    let idx = grid.index_order();
    let w = grid.omegas();
    let mut out = Vec::new();
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            let d = cabs(w[a] - w[b]);
            if d <= coll_tol {
                out.push(Collision { first: idx[a], second: idx[b], distance: to_f64(d) });
            }
        }
    }
    out
}

/// Exponential divided differences of each block `{ω_{k,l}}_l`.
///
/// Within block `k` the frequencies are taken in ascending `(Re, Im)` order
/// `σ_0, σ_1, …`; function `m` of the block is the divided difference
/// `[ω_{σ_0}, …, ω_{σ_m}]` of `e^{iωt}`, i.e. `Σ_{j≤m} w_{m,j} e^{iω_{σ_j}t}`
/// with `w_{m,j} = 1/∏_{r≤m, r≠j}(ω_{σ_j} − ω_{σ_r})`.
#[derive(Debug, Clone, PartialEq)]
pub struct EddFamily<S> {
    k_max: usize,
    n: usize,
    /// Per block (in signed-`k` order): the sorted eigen indices.
    order: Vec<Vec<usize>>,
    /// Per block: lower-triangular weights, `weights[m][j]` for `j ≤ m`.
    weights: Vec<Vec<Vec<Complex<S>>>>,
}

impl<S: Real> EddFamily<S> {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn block(k_max: usize, k: i64) -> usize {
        index_of(k_max, 1, k, 0)
    }

    /// Eigen indices of block `k` in node order.
    pub fn order(&self, k: i64) -> &[usize] {
        &self.order[Self::block(self.k_max, k)]
    }

    /// Weights `w_{m,0..=m}` of function `m` in block `k`.
    pub fn weights(&self, k: i64, m: usize) -> &[Complex<S>] {
        &self.weights[Self::block(self.k_max, k)][m]
    }

    /// `|w_{m,m}|`, the factor by which function `m` of block `k` amplifies
    /// its newest exponential.
    pub fn weight_scale(&self, k: i64, m: usize) -> S {
        cabs(self.weights(k, m)[m])
    }

    /// Family function `i` (in [`index_order`] with `l` read as the position
    /// within the block) as sparse `(raw index, coefficient)` pairs.
    pub fn expansion(&self) -> Vec<Vec<(usize, Complex<S>)>> {
        index_order(self.k_max, self.n)
            .into_iter()
            .map(|(k, m)| {
                let order = self.order(k);
                self.weights(k, m)
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| (index_of(self.k_max, self.n, k, order[j]), w))
                    .collect()
            })
            .collect()
    }
}

pub fn build_edd<S: Real>(grid: &FrequencyGrid<S>, coll_tol: S) -> Result<EddFamily<S>> {
    let (k_max, n) = (grid.k_max(), grid.dim());
    let mut order = Vec::with_capacity(2 * k_max);
    let mut weights = Vec::with_capacity(2 * k_max);
    let ks = (-(k_max as i64)..=k_max as i64).filter(|&k| k != 0);
    for k in ks {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.sort_by(|&x, &y| lex_cmp(&grid.omega(k, x), &grid.omega(k, y)));
        let nodes: Vec<Complex<S>> = sigma.iter().map(|&l| grid.omega(k, l)).collect();
        for a in 0..n {
            for b in (a + 1)..n {
                if cabs(nodes[a] - nodes[b]) <= coll_tol {
                    return Err(Error::CollisionInBlock { k, first: sigma[a], second: sigma[b] });
                }
            }
        }
        let block: Vec<Vec<Complex<S>>> = (0..n)
            .map(|m| {
                (0..=m)
                    .map(|j| {
                        let prod = (0..=m)
                            .filter(|&r| r != j)
                            .fold(Complex::<S>::one(), |acc, r| acc * (nodes[j] - nodes[r]));
                        Complex::<S>::one() / prod
                    })
                    .collect()
            })
            .collect();
        order.push(sigma);
        weights.push(block);
    }
    Ok(EddFamily { k_max, n, order, weights })
}

/// In-block spread of the frequencies, `d_k = max_{i,j} |ω_{k,i} − ω_{k,j}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDiagnostics {
    /// `(k, d_k, k·d_k)` for `k = 1..K`.
    pub diameters: Vec<(usize, f64, f64)>,
    /// Median of `k·d_k` over the upper half `k > K/2`.
    pub asymptotic_constant: f64,
    /// Upper-half modes whose `k·d_k` leaves `[c/2, 2c]`.
    pub outliers: Vec<usize>,
}

impl GapDiagnostics {
    pub fn non_asymptotic(&self) -> bool {
        !self.outliers.is_empty()
    }
}

/// Empty report for `N = 1`.
pub fn gap_diagnostics<S: Real>(grid: &FrequencyGrid<S>) -> GapDiagnostics {
    let (k_max, n) = (grid.k_max(), grid.dim());
    if n < 2 {
        return GapDiagnostics { diameters: vec![], asymptotic_constant: 0.0, outliers: vec![] };
    }
    let diameters: Vec<(usize, f64, f64)> = (1..=k_max)
        .map(|k| {
            let mut d = S::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    d = d.max(cabs(grid.omega(k as i64, i) - grid.omega(k as i64, j)));
                }
            }
            let d = to_f64(d);
            (k, d, k as f64 * d)
        })
        .collect();
    let upper: Vec<&(usize, f64, f64)> = diameters.iter().filter(|e| 2 * e.0 > k_max).collect();
    let mut vals: Vec<f64> = upper.iter().map(|e| e.2).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    let c = if vals.is_empty() {
        0.0
    } else if vals.len() % 2 == 1 {
        vals[vals.len() / 2]
    } else {
        0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
    };
    let outliers = upper.iter().filter(|e| e.2 < 0.5 * c || e.2 > 2.0 * c).map(|e| e.0).collect();
    GapDiagnostics { diameters, asymptotic_constant: c, outliers }
}
