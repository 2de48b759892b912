//! Independent brute-force minimizers for each solver, run on random small
//! instances. Each `*_worst` function returns the largest deviation seen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use robust_ts::huber::{self, HuberConfig, WeightSpec};
use robust_ts::mean::huber_mean_scalar;
use robust_ts::var::{dantzig_column, lasso_row};
use robust_ts::DenseMatrix;

pub const INSTANCES: u64 = 100;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Minimizes `f` over a box by repeated grid search, each round zooming in on
/// the best grid point. Returns the final best point.
fn zoom_grid<const D: usize>(f: impl Fn(&[f64; D]) -> f64, center: [f64; D], half: f64, tol: f64) -> [f64; D] {
    const STEPS: i64 = 20;
    let mut center = center;
    let mut half = half;
    while half > tol {
        let h = half / STEPS as f64;
        let mut best = (f64::INFINITY, center);
        let total = (2 * STEPS + 1).pow(D as u32);
        for idx in 0..total {
            let mut pt = center;
            let mut rem = idx;
            for c in pt.iter_mut() {
                *c += ((rem % (2 * STEPS + 1)) - STEPS) as f64 * h;
                rem /= 2 * STEPS + 1;
            }
            let v = f(&pt);
            if v < best.0 {
                best = (v, pt);
            }
        }
        center = best.1;
        // Keep a few cells around the best point so a skewed level set cannot
        // push the minimizer out of the next box.
        half = 4.0 * h;
    }
    center
}

pub fn lasso_worst(instances: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = 25;
        let z = gaussian_matrix(&mut rng, n, 3);
        let truth = [rng.random_range(-1.0..1.0), 0.0, rng.random_range(-1.0..1.0)];
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                (0..3).map(|j| z.get(i, j) * truth[j]).sum::<f64>() + 0.5 * e
            })
            .collect();
        let lambda = rng.random_range(0.01..0.6);
        let obj = |b: &[f64; 3]| {
            let rss: f64 = (0..n)
                .map(|i| {
                    let r = y[i] - (0..3).map(|j| z.get(i, j) * b[j]).sum::<f64>();
                    r * r
                })
                .sum();
            rss / n as f64 + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
        };
        let oracle = zoom_grid(obj, [0.0; 3], 4.0, 1e-5);
        let fit = lasso_row(&z, &y, lambda).unwrap();
        for j in 0..3 {
            worst = worst.max((fit[j] - oracle[j]).abs());
        }
    }
    worst
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = r[i];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

/// `min |b|_1` subject to `|S b - c|_inf <= lambda` in three dimensions: the
/// optimum sits on a vertex of the arrangement of the six constraint planes
/// and the three coordinate planes, so every triple is tried.
fn dantzig_vertex_oracle(s: &DenseMatrix, c: &[f64], lambda: f64) -> (f64, Vec<[f64; 3]>) {
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    for i in 0..3 {
        let row = [s.get(i, 0), s.get(i, 1), s.get(i, 2)];
        planes.push((row, c[i] + lambda));
        planes.push((row, c[i] - lambda));
        let mut e = [0.0; 3];
        e[i] = 1.0;
        planes.push((e, 0.0));
    }
    let mut best = f64::INFINITY;
    let mut argmins: Vec<([f64; 3], f64)> = Vec::new();
    for a in 0..planes.len() {
        for b in a + 1..planes.len() {
            for d in b + 1..planes.len() {
                let m = [planes[a].0, planes[b].0, planes[d].0];
                let Some(v) = solve3(m, [planes[a].1, planes[b].1, planes[d].1]) else {
                    continue;
                };
                let feasible = (0..3).all(|i| {
                    let r: f64 = (0..3).map(|j| s.get(i, j) * v[j]).sum::<f64>() - c[i];
                    r.abs() <= lambda * (1.0 + 1e-10) + 1e-12
                });
                if feasible {
                    let l1 = v.iter().map(|x| x.abs()).sum::<f64>();
                    best = best.min(l1);
                    argmins.push((v, l1));
                }
            }
        }
    }
    let sols = argmins
        .into_iter()
        .filter(|(_, l1)| *l1 <= best + 1e-10)
        .map(|(v, _)| v)
        .collect();
    (best, sols)
}

/// Worst deviation of the objective and, where the optimum is unique, of the
/// solution.
pub fn dantzig_worst(instances: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_obj: f64 = 0.0;
    let mut worst_sol: f64 = 0.0;
    for _ in 0..instances {
        let m = gaussian_matrix(&mut rng, 6, 3);
        let s = m
            .gram()
            .scale(1.0 / 6.0)
            .add(&DenseMatrix::identity(3).scale(0.1))
            .unwrap();
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = rng.random_range(0.02..0.5);
        let (best, sols) = dantzig_vertex_oracle(&s, &c, lambda);
        let b = dantzig_column(&s, &c, lambda).unwrap();
        let l1: f64 = b.iter().map(|v| v.abs()).sum();
        worst_obj = worst_obj.max((l1 - best).abs());
        // Compare the point itself only when the optimum is unique.
        let unique = sols.iter().all(|v| (0..3).all(|j| (v[j] - sols[0][j]).abs() < 1e-9));
        if unique {
            for j in 0..3 {
                worst_sol = worst_sol.max((b[j] - sols[0][j]).abs());
            }
        }
    }
    (worst_obj, worst_sol)
}

fn huber_loss_sum(xs: &[f64], mu: f64, nu: f64) -> f64 {
    xs.iter()
        .map(|&x| {
            let r = (x - mu).abs();
            if r <= nu {
                0.5 * r * r
            } else {
                nu * r - 0.5 * nu * nu
            }
        })
        .sum()
}

/// Golden-section search, then exact solves of the stationarity equation on
/// the quadratic piece containing the iterate until the piece stops changing.
fn huber_mean_oracle(xs: &[f64], nu: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if huber_loss_sum(xs, c, nu) < huber_loss_sum(xs, d, nu) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut mu = 0.5 * (a + b);
    for _ in 0..50 {
        let (mut inner_sum, mut inner, mut up, mut down) = (0.0, 0usize, 0usize, 0usize);
        for &x in xs {
            if (x - mu).abs() <= nu {
                inner_sum += x;
                inner += 1;
            } else if x > mu {
                up += 1;
            } else {
                down += 1;
            }
        }
        if inner == 0 {
            break;
        }
        let next = (inner_sum + nu * (up as f64 - down as f64)) / inner as f64;
        if next == mu {
            break;
        }
        mu = next;
    }
    mu
}

pub fn huber_mean_worst(instances: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let t = StudentT::new(2.5).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(5..60);
        let shift = rng.random_range(-3.0..3.0);
        let xs: Vec<f64> = (0..n).map(|_| shift + t.sample(&mut rng)).collect();
        let nu = rng.random_range(0.5..3.0);
        let oracle = huber_mean_oracle(&xs, nu);
        worst = worst.max((huber_mean_scalar(&xs, nu).unwrap() - oracle).abs());
    }
    worst
}

pub fn huber_regression_worst(instances: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let t = StudentT::new(3.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 40;
        let x = DenseMatrix::from_fn(n, 2, |_, _| t.sample(&mut rng));
        let beta = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let y: Vec<f64> = (0..n)
            .map(|i| x.get(i, 0) * beta[0] + x.get(i, 1) * beta[1] + t.sample(&mut rng))
            .collect();
        let nu = rng.random_range(0.5..3.0);
        let lambda = rng.random_range(0.0..0.3);
        let b = if k % 2 == 0 {
            None
        } else {
            Some(rng.random_range(1.0..4.0))
        };
        let w: Vec<f64> = (0..n)
            .map(|i| {
                let norm = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                b.map_or(1.0, |b| if norm <= b { 1.0 } else { b / norm })
            })
            .collect();
        let obj = |bb: &[f64; 2]| {
            let loss: f64 = (0..n)
                .map(|i| {
                    let r = ((y[i] - x.get(i, 0) * bb[0] - x.get(i, 1) * bb[1]) * w[i]).abs();
                    if r <= nu {
                        0.5 * r * r
                    } else {
                        nu * r - 0.5 * nu * nu
                    }
                })
                .sum();
            loss / n as f64 + lambda * (bb[0].abs() + bb[1].abs())
        };
        let oracle = zoom_grid(obj, [0.0; 2], 8.0, 1e-6);
        let cfg = HuberConfig::new(nu, lambda).with_weight(b.map(|b| WeightSpec::identity(b).unwrap()));
        let fit = huber::fit(&x, &y, &cfg).unwrap();
        for j in 0..2 {
            worst = worst.max((fit.beta_hat[j] - oracle[j]).abs());
        }
    }
    worst
}
