use num_complex::Complex;
use proptest::prelude::*;
use wavectl_core::linalg::{eig_dense, inverse, rank_qr, solve_hermitian, vec_norm, ComplexMatrix};
use wavectl_core::{DoubleDouble, Matrix};

type C = Complex<f64>;

fn entry() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(entry(), n * n).prop_map(move |d| ComplexMatrix::new(n, n, d).unwrap())
}

/// `V D V⁻¹` with random well-conditioned `V` and well-separated `D`.
fn similarity() -> impl Strategy<Value = (Matrix, Vec<C>)> {
    (1usize..=8).prop_flat_map(|n| {
        (square(n), prop::collection::vec(entry(), n)).prop_map(move |(p, jitter)| {
            let mut v = ComplexMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    v[(i, j)] += p[(i, j)] * (0.6 / n as f64);
                }
            }
            let d: Vec<C> = (0..n).map(|i| C::new(i as f64 - 2.0, 0.0) + jitter[i] * 0.3).collect();
            let mut dm = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                dm[(i, i)] = d[i];
            }
            let a = v.matmul(&dm).unwrap().matmul(&inverse(&v).unwrap()).unwrap();
            (a, d)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn eigenvalues_of_a_similarity_transform((a, d) in similarity()) {
        let r = eig_dense(&a, 1e-10).unwrap();
        let scale = 1.0 + a.norm_fro();
        for di in &d {
            let best = r.eigenvalues.iter().map(|l| (l - di).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-10 * scale, "{di} missing, nearest at {best:e}");
        }
        for (j, res) in r.residuals.iter().enumerate() {
            prop_assert!(*res <= 1e-10 * scale);
            let v = r.eigenvectors.column(j);
            prop_assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenpairs_of_random_matrices(a in (1usize..=10).prop_flat_map(square)) {
        let r = eig_dense(&a, 1e-10).unwrap();
        let trace: C = (0..a.rows()).map(|i| a[(i, i)]).sum();
        let sum: C = r.eigenvalues.iter().sum();
        prop_assert!((trace - sum).norm() <= 1e-10 * (1.0 + a.norm_fro()));
        for j in 0..a.rows() {
            let v = r.eigenvectors.column(j);
            let av = a.mul_vec(&v).unwrap();
            let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - r.eigenvalues[j] * y).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-10 * (1.0 + a.norm_fro()));
        }
    }
}

fn hpd() -> impl Strategy<Value = (Matrix, Vec<C>)> {
    (1usize..=16).prop_flat_map(|n| {
        (square(n), prop::collection::vec(entry(), n), 0.0..6.0f64).prop_map(move |(b, rhs, spread)| {
            // B Bᴴ + δ I with δ spanning several decades
            let mut g = b.matmul(&b.conj_transpose()).unwrap();
            let delta = 10f64.powf(-spread);
            for i in 0..n {
                g[(i, i)] += delta;
            }
            (g, rhs)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hermitian_solve_residual((g, rhs) in hpd()) {
        let s = solve_hermitian(&g, &rhs, 1e-14).unwrap();
        let back = g.mul_vec(&s.solution).unwrap();
        let res: f64 = back.iter().zip(&rhs).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(s.cond_estimate >= 1.0 - 1e-12);
        prop_assert!(res <= 1e-10 * s.cond_estimate * vec_norm(&rhs), "res {res:e} cond {:e}", s.cond_estimate);
    }
}

fn low_rank() -> impl Strategy<Value = (Matrix, usize)> {
    (2usize..=7, 1usize..=7).prop_flat_map(|(n, r)| {
        let r = r.min(n);
        (square(n), square(n)).prop_map(move |(x, y)| {
            // X[:, :r] · Y[:r, :] has rank r almost surely
            let mut m = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = (0..r).map(|p| x[(i, p)] * y[(p, j)]).sum();
                }
            }
            (m, r)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rank_survives_column_permutation_and_scaling(
        (m, r) in low_rank(),
        perm_seed in any::<u64>(),
        logs in prop::collection::vec(-3.0..3.0f64, 7),
        phases in prop::collection::vec(0.0..std::f64::consts::TAU, 7),
    ) {
        let n = m.rows();
        // generic products need not be full rank numerically; compare against the unmodified rank
        let base = rank_qr(&m, 1e-9);
        prop_assume!(base == r);
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let cols: Vec<Vec<C>> = order
            .iter()
            .enumerate()
            .map(|(p, &j)| {
                let f = C::from_polar(10f64.powf(logs[p]), phases[p]);
                m.column(j).into_iter().map(|z| z * f).collect()
            })
            .collect();
        let shuffled = ComplexMatrix::from_columns(&cols).unwrap();
        prop_assert_eq!(rank_qr(&shuffled, 1e-9), base);
    }
}

#[test]
fn double_double_eigenvalues_are_sharper() {
    let rows = [[2.0, 1.0, 0.0], [0.5, 3.0, 1.0], [0.0, 0.25, 5.0]];
    let a: Vec<Vec<DoubleDouble>> = rows.iter().map(|r| r.iter().map(|&x| DoubleDouble::from(x)).collect()).collect();
    let m = ComplexMatrix::from_real_rows(&a).unwrap();
    let r = eig_dense(&m, DoubleDouble::from(1e-25)).unwrap();
    for res in r.residuals {
        assert!(res.to_f64() < 1e-28);
    }
}
