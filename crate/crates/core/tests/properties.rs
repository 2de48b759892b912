//! Randomized invariants across the crate.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use robust_ts::concentration::{
    bernstein_bound, bound_params, clipped_linear_transform, empirical_tail, BoundParams, TailModel,
};
use robust_ts::huber::{self, huber_loss, weight, HuberConfig, WeightSpec};
use robust_ts::linalg::{
    dependence_profile, matrix_norms, min_eigenvalue_spd, operator_norm_2, power_norms, spectral_radius,
};
use robust_ts::mean::{huber_mean_scalar, huber_score};
use robust_ts::sim::{build_design, simulate_var};
use robust_ts::var::{
    autocov_robust, dantzig_column, lasso_kkt_residual, lasso_row_fit, robust_dantzig_var, robust_lasso_var, truncate,
    LASSO_KKT_TOL,
};
use robust_ts::{DenseMatrix, InnovationDist, SeriesSample, VarDesign};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

fn heavy_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = StudentT::new(2.5).unwrap();
    DenseMatrix::from_fn(rows, cols, |_, _| t.sample(&mut rng))
}

fn normal_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn var_sample(seed: u64, p: usize, n: usize) -> SeriesSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = build_design(&VarDesign::banded(), p, &mut rng).unwrap();
    simulate_var(&a, n, &InnovationDist::standard_t5(), 100, &mut rng).unwrap()
}

fn spd(seed: u64, p: usize) -> DenseMatrix {
    let m = normal_matrix(seed, p + 3, p);
    m.gram()
        .scale(1.0 / (p + 3) as f64)
        .add(&DenseMatrix::identity(p).scale(0.05))
        .unwrap()
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn powers_are_submultiplicative(seed in any::<u64>(), p in 2usize..8) {
        let a = normal_matrix(seed, p, p).scale(0.4 / p as f64);
        let norms = power_norms(&a, 12).unwrap();
        for k in 0..=12 {
            for j in 0..=12 - k {
                prop_assert!(norms[k + j] <= norms[k] * norms[j] + 1e-8);
            }
        }
    }

    #[test]
    fn profile_envelope_dominates(seed in any::<u64>(), p in 2usize..8) {
        let mut a = normal_matrix(seed, p, p);
        let r = spectral_radius(&a).unwrap();
        a = a.scale(0.8 / r.max(1e-9));
        let prof = dependence_profile(&a, 0.5, 400).unwrap();
        for (k, v) in prof.norms.iter().enumerate() {
            prop_assert!(*v <= prof.envelope(k) * (1.0 + 1e-12) + 1e-12, "k = {k}");
        }
    }

    #[test]
    fn norm_ordering(seed in any::<u64>(), r in 1usize..7, c in 1usize..7) {
        let a = normal_matrix(seed, r, c);
        let n = matrix_norms(&a).unwrap();
        let op = operator_norm_2(&a).unwrap();
        prop_assert!(n.max_abs <= op + 1e-10);
        prop_assert!(op <= n.frobenius + 1e-10);
        if r == c {
            prop_assert!(spectral_radius(&a).unwrap() <= op + 1e-10);
        }
    }

    #[test]
    fn zero_transition_returns_innovations(seed in any::<u64>(), p in 1usize..6) {
        let a = DenseMatrix::zeros(p, p);
        let innov = InnovationDist::standard_t5();
        let x = simulate_var(&a, 20, &innov, 0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let sampler = innov.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut eps = vec![0.0; 21 * p];
        for row in eps.chunks_mut(p) {
            sampler.fill(&mut rng, row);
        }
        prop_assert_eq!(x.x.as_slice(), &eps[..]);
    }

    #[test]
    fn huber_mean_translation_equivariant(seed in any::<u64>(), shift in -50.0f64..50.0, nu in 0.3f64..4.0) {
        let xs = heavy_matrix(seed, 30, 1).into_vec();
        let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let a = huber_mean_scalar(&xs, nu).unwrap();
        let b = huber_mean_scalar(&moved, nu).unwrap();
        prop_assert!((b - a - shift).abs() <= 1e-9 * (1.0 + shift.abs()));
    }

    #[test]
    fn huber_mean_root_and_monotonicity(seed in any::<u64>(), nu in 0.3f64..4.0, idx in 0usize..30, bump in 0.0f64..20.0) {
        let xs = heavy_matrix(seed, 30, 1).into_vec();
        let mu = huber_mean_scalar(&xs, nu).unwrap();
        let score: f64 = xs.iter().map(|x| huber_score(x - mu, nu).unwrap()).sum();
        prop_assert!(score.abs() <= 1e-9 * xs.len() as f64 * nu);
        let mut raised = xs.clone();
        raised[idx] += bump;
        prop_assert!(huber_mean_scalar(&raised, nu).unwrap() >= mu);
    }

    #[test]
    fn huber_loss_derivative_and_convexity(x in -20.0f64..20.0, y in -20.0f64..20.0, nu in prop::sample::select(vec![0.5, 1.0, 5.0])) {
        let h = 1e-6;
        let fd = (huber_loss(x + h, nu).unwrap() - huber_loss(x - h, nu).unwrap()) / (2.0 * h);
        prop_assert!((fd - huber_score(x, nu).unwrap()).abs() <= 1e-6);
        let mid = huber_loss(0.5 * (x + y), nu).unwrap();
        prop_assert!(mid <= 0.5 * (huber_loss(x, nu).unwrap() + huber_loss(y, nu).unwrap()) + 1e-12);
    }

    #[test]
    fn weight_clamps_norm(seed in any::<u64>(), p in 1usize..6, b in 0.1f64..10.0) {
        let shape = spd(seed, p);
        let spec = WeightSpec::new(Some(shape.clone()), b).unwrap();
        let b0 = b / min_eigenvalue_spd(&shape).unwrap();
        let xs = heavy_matrix(seed ^ 1, 50, p);
        for i in 0..50 {
            let x = xs.row(i);
            let w = weight(x, &spec);
            let norm = x.iter().map(|v| (w * v).powi(2)).sum::<f64>().sqrt();
            prop_assert!(norm <= b0 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn huber_fit_certificates(seed in any::<u64>(), nu in 0.5f64..3.0, frac in 0.05f64..0.8, weighted in any::<bool>()) {
        let x = heavy_matrix(seed, 60, 5);
        let noise = heavy_matrix(seed ^ 7, 60, 1).into_vec();
        let y: Vec<f64> = (0..60).map(|i| x.get(i, 0) - x.get(i, 2) + noise[i]).collect();
        let spec = weighted.then(|| WeightSpec::identity(3.0).unwrap());
        let lmax = huber::lambda_max(&x, &y, nu, spec.as_ref());
        let cfg = HuberConfig::new(nu, frac * lmax).with_weight(spec);
        let fit = huber::fit(&x, &y, &cfg).unwrap();
        prop_assert!(fit.converged);
        for w in fit.objective.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        // Subgradient check from first principles.
        let n = 60.0;
        let wts: Vec<f64> = (0..60).map(|i| cfg.weight.as_ref().map_or(1.0, |s| weight(x.row(i), s))).collect();
        let tol = 10.0 * cfg.tol;
        for j in 0..5 {
            let grad: f64 = (0..60)
                .map(|i| {
                    let r = y[i] - dot_rows(x.row(i), &fit.beta_hat);
                    -huber_score(r * wts[i], nu).unwrap() * wts[i] * x.get(i, j) / n
                })
                .sum();
            let b = fit.beta_hat[j];
            if b != 0.0 {
                prop_assert!((grad + cfg.lambda * b.signum()).abs() <= tol, "j={j} grad={grad}");
            } else {
                prop_assert!(grad.abs() <= cfg.lambda + tol);
            }
        }
    }

    #[test]
    fn huber_fit_scale_covariant(seed in any::<u64>(), c in 0.2f64..5.0) {
        let x = heavy_matrix(seed, 50, 4);
        let noise = heavy_matrix(seed ^ 3, 50, 1).into_vec();
        let y: Vec<f64> = (0..50).map(|i| 0.8 * x.get(i, 1) + noise[i]).collect();
        let (nu, lambda) = (1.5, 0.05);
        // Both fits are solved well below the compared tolerance so that only
        // the minimizers, not the stopping points, are compared.
        let tight = |nu: f64, lambda: f64| HuberConfig { tol: 1e-13, max_iter: 1_000_000, ..HuberConfig::new(nu, lambda) };
        let base = huber::fit(&x, &y, &tight(nu, lambda)).unwrap();
        let xs = x.scale(c);
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let scaled = huber::fit(&xs, &ys, &tight(nu * c, lambda * c * c)).unwrap();
        prop_assert!(base.converged && scaled.converged);
        for (a, b) in base.beta_hat.iter().zip(&scaled.beta_hat) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn truncation_is_monotone_and_idempotent(seed in any::<u64>(), nu in 0.1f64..5.0) {
        let sample = SeriesSample::new(heavy_matrix(seed, 20, 4));
        let once = truncate(&sample, nu).unwrap().x_tilde;
        let twice = truncate(&SeriesSample::new(once.clone()), nu).unwrap().x_tilde;
        prop_assert_eq!(&once, &twice);
        for (t, x) in once.as_slice().iter().zip(sample.x.as_slice()) {
            prop_assert!(t.abs() <= x.abs().min(nu));
            prop_assert!(t * x >= 0.0);
        }
    }

    #[test]
    fn lasso_rows_satisfy_kkt(seed in any::<u64>(), frac in 0.02f64..0.9) {
        let z = heavy_matrix(seed, 40, 6);
        let y: Vec<f64> = (0..40).map(|i| z.get(i, 0) * 0.7 + z.get(i, 3) * 0.2).collect();
        let g = z.gram().scale(1.0 / 40.0);
        let q: Vec<f64> = z.t_matvec(&y).iter().map(|v| v / 40.0).collect();
        let lmax = q.iter().fold(0.0f64, |m, v| m.max(2.0 * v.abs()));
        let lambda = frac * lmax;
        let fit = lasso_row_fit(&z, &y, lambda).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(lasso_kkt_residual(&g, &q, &fit.beta, lambda) <= LASSO_KKT_TOL * lambda);
    }

    #[test]
    fn dantzig_feasible_and_no_worse_than_lasso(seed in any::<u64>(), frac in 0.05f64..0.9) {
        let sample = var_sample(seed, 6, 60);
        let s0 = autocov_robust(&sample, 2.0, 0).unwrap();
        let s1 = autocov_robust(&sample, 2.0, 1).unwrap();
        let lambda = frac * s1.max_abs();
        let lasso = robust_lasso_var(&sample, 2.0, 0.5 * lambda).unwrap();
        for j in 0..6 {
            let c = s1.column(j);
            let b = dantzig_column(&s0, &c, lambda).unwrap();
            let res = s0.matvec(&b).iter().zip(&c).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
            prop_assert!(res <= lambda + 1e-8);
            // Any feasible point bounds the optimum; the Lasso row is one
            // candidate whenever it happens to be feasible.
            let cand = lasso.a_hat.row(j);
            let cres = s0.matvec(cand).iter().zip(&c).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
            if cres <= lambda {
                let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
                prop_assert!(l1(&b) <= l1(cand) + 1e-6);
            }
        }
    }

    #[test]
    fn column_solves_are_separable(seed in any::<u64>(), frac in 0.1f64..0.9) {
        let sample = var_sample(seed, 5, 50);
        let s0 = autocov_robust(&sample, 1.5, 0).unwrap();
        let s1 = autocov_robust(&sample, 1.5, 1).unwrap();
        let lambda = frac * s1.max_abs();
        let est = robust_dantzig_var(&sample, 1.5, lambda).unwrap();
        for j in (0..5).rev() {
            let b = dantzig_column(&s0, &s1.column(j), lambda).unwrap();
            prop_assert_eq!(est.a_hat.row(j), &b[..]);
        }
        let lasso = robust_lasso_var(&sample, 1.5, lambda).unwrap();
        let xt = truncate(&sample, 1.5).unwrap().x_tilde;
        let z = DenseMatrix::new(50, 5, xt.as_slice()[..250].to_vec()).unwrap();
        for j in [4, 0, 2] {
            let y: Vec<f64> = (1..=50).map(|i| xt.get(i, j)).collect();
            let row = lasso_row_fit(&z, &y, lambda).unwrap().beta;
            for (a, b) in lasso.a_hat.row(j).iter().zip(&row) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn bound_dominates_its_two_regimes(x in 0.01f64..500.0, n in 1usize..1000, tau in 1.0f64..5.0, gamma in 1.0f64..3.0) {
        let params = BoundParams { rho0: 0.5, tau, gamma, sigma: 1.0, m: 2.0, n };
        let b = bernstein_bound(x, &params).unwrap();
        let sub_g = 2.0 * (-x * x / (params.c1() * n as f64 * (tau * gamma).powi(2))).exp();
        let sub_e = 2.0 * (-x / (params.c2() * tau * 2.0)).exp();
        prop_assert!(b >= sub_g && b >= sub_e);
        prop_assert!(bernstein_bound(x * 1.01, &params).unwrap() < b || b == 0.0);
    }
}

fn dot_rows(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

proptest! {
    #![proptest_config(cfg(6))]

    #[test]
    fn empirical_tail_is_non_increasing(seed in any::<u64>(), coef in 0.0f64..0.8) {
        let model = TailModel::ar1(coef, InnovationDist::Gaussian { sigma: 1.0 });
        let g = clipped_linear_transform(&[1.0], 1.0).unwrap();
        let params = bound_params(&model, &g, 30).unwrap();
        let grid: Vec<f64> = (0..12).map(|k| k as f64 * 0.1 * (30.0f64).sqrt() * params.gamma).collect();
        let table = empirical_tail(&model, &g, 30, &grid, 1000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for w in table.rows.windows(2) {
            prop_assert!(w[1].empirical <= w[0].empirical);
            prop_assert!(w[1].x >= w[0].x);
        }
    }
}
