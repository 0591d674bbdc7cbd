use num_complex::Complex;
use proptest::prelude::*;
use wavectl_core::coupling::{analyze, decompose, kalman_check, resonance_check, CouplingSystem};
use wavectl_core::linalg::inverse;
use wavectl_core::{Error, Matrix, System, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn system(max_n: usize) -> impl Strategy<Value = System> {
    (1usize..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(-2.0..2.0f64, n * n), prop::collection::vec(-1.0..1.0f64, n)).prop_filter_map(
            "b = 0",
            move |(a, b)| {
                let rows = a.chunks(n).map(<[f64]>::to_vec).collect();
                CouplingSystem::new(rows, b).ok()
            },
        )
    })
}

/// Real `V diag(d) V⁻¹` with distinct `d`, together with `V`.
fn diagonalizable(n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (prop::collection::vec(-0.4..0.4f64, n * n), prop::collection::vec(0.1..1.0f64, n)).prop_map(move |(p, gaps)| {
        let v: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| p[i * n + j] + if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let mut d = Vec::with_capacity(n);
        let mut acc = -1.0;
        for g in gaps {
            acc += g;
            d.push(acc);
        }
        let vm = Matrix::from_real_rows(&v).unwrap();
        let vi = inverse(&vm).unwrap();
        let a = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|r| v[i][r] * d[r] * vi[(r, j)].re).sum()).collect())
            .collect();
        (a, v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn eigenvectors_and_biorthogonal_family_are_dual(sys in system(6)) {
        match decompose(&sys, &tol()) {
            Ok(d) => prop_assert!(d.biorthogonality_defect() <= 1e-9, "defect {:e}", d.biorthogonality_defect()),
            Err(Error::RepeatedEigenvalues { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn kalman_rank_implies_nonzero_beta(sys in system(6)) {
        let t = tol();
        let Ok(d) = decompose(&sys, &t) else { return Ok(()) };
        let (_, full) = kalman_check(&sys, t.rank_tol);
        let bnorm = sys.b().iter().map(|x| x * x).sum::<f64>().sqrt();
        if full {
            for b in &d.beta {
                prop_assert!(b.norm() > t.beta_tol * bnorm);
            }
        }
    }

    #[test]
    fn eigenvector_control_loses_rank(((a, v), col) in (2usize..=6).prop_flat_map(|n| (diagonalizable(n), 0..n))) {
        let n = v.len();
        let b: Vec<f64> = (0..n).map(|i| v[i][col]).collect();
        let sys = CouplingSystem::new(a, b).unwrap();
        let (rank, full) = kalman_check(&sys, tol().rank_tol);
        prop_assert!(!full && rank < n);
        let report = analyze(&sys, 4.0 * n as f64 * std::f64::consts::PI, &tol()).unwrap();
        prop_assert!(!report.kalman_ok && !report.overall_controllable);
    }

    #[test]
    fn resonances_come_in_mirrored_pairs(lams in prop::collection::btree_set(0i32..25, 1..=5)) {
        let lambda: Vec<Complex<f64>> = lams.iter().map(|&x| Complex::new(x as f64, 0.0)).collect();
        let found = resonance_check(&lambda, 1e-9);
        for r in &found {
            prop_assert!(found.iter().any(|s| s.k == r.l && s.l == r.k && s.i == r.j && s.j == r.i), "{r:?} unmatched");
            let lhs = (r.k * r.k) as f64 - (r.l * r.l) as f64;
            let rhs = lambda[r.i].re - lambda[r.j].re;
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn analyze_is_deterministic(sys in system(5), t in 0.5..30.0f64) {
        let first = analyze(&sys, t, &tol());
        let second = analyze(&sys, t, &tol());
        prop_assert_eq!(format!("{first:?}"), format!("{second:?}"));
    }
}

#[test]
fn known_resonance_is_reported_both_ways() {
    let sys = CouplingSystem::new(vec![vec![0.0, 0.0], vec![1.0, 3.0]], vec![1.0, 0.0]).unwrap();
    let r = analyze(&sys, 4.0 * std::f64::consts::PI, &tol()).unwrap();
    assert!(r.resonances.iter().any(|x| x.k == 2 && x.l == 1));
    assert!(r.resonances.iter().any(|x| x.k == 1 && x.l == 2));
    assert!(!r.overall_controllable && r.kalman_ok && r.t_ok);
}

#[test]
fn horizon_threshold_is_two_pi_n() {
    let sys = CouplingSystem::new(vec![vec![0.5, 0.0], vec![1.0, -0.3]], vec![1.0, 0.0]).unwrap();
    let below = analyze(&sys, 4.0 * std::f64::consts::PI - 1e-6, &tol()).unwrap();
    let at = analyze(&sys, 4.0 * std::f64::consts::PI, &tol()).unwrap();
    assert!(!below.t_ok && at.t_ok && at.overall_controllable);
}
