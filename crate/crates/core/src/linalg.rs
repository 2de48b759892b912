//! Dense linear algebra shared by the estimators and simulators.
//!
//! [`DenseMatrix`] is a small row-major matrix type. The spectral routines
//! use power iteration where it is cheap and certifiable and fall back to a
//! dense eigensolver otherwise, so every result meets its stated accuracy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real `rows x cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds a matrix from a closure over `(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x`.
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "t_matvec dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `A^T A`, exploiting symmetry.
    pub fn gram(&self) -> Self {
        let c = self.cols;
        let mut g = Self::zeros(c, c);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..c {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let g_row = &mut g.data[a * c..(a + 1) * c];
                for b in a..c {
                    g_row[b] += ra * r[b];
                }
            }
        }
        for a in 0..c {
            for b in 0..a {
                g.data[a * c + b] = g.data[b * c + a];
            }
        }
        g
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute asymmetry `max |a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// The five norms used throughout: induced l1 (max column sum), induced
/// l-infinity (max row sum), Frobenius, max-abs and entrywise l1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixNorms {
    pub l1_induced: f64,
    pub linf_induced: f64,
    pub frobenius: f64,
    pub max_abs: f64,
    pub entry_l1: f64,
}

pub fn matrix_norms(a: &DenseMatrix) -> Result<MatrixNorms> {
    ensure_finite(a)?;
    let mut col_sums = vec![0.0; a.cols()];
    let mut linf: f64 = 0.0;
    let mut fro = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut entry_l1 = 0.0;
    for i in 0..a.rows() {
        let mut row_sum = 0.0;
        for (j, v) in a.row(i).iter().enumerate() {
            let x = v.abs();
            row_sum += x;
            col_sums[j] += x;
            fro += x * x;
            max_abs = max_abs.max(x);
            entry_l1 += x;
        }
        linf = linf.max(row_sum);
    }
    Ok(MatrixNorms {
        l1_induced: col_sums.iter().fold(0.0, |m: f64, &v| m.max(v)),
        linf_induced: linf,
        frobenius: fro.sqrt(),
        max_abs,
        entry_l1,
    })
}

const POWER_MAX_ITER: usize = 500;

// Deterministic, non-degenerate start vector.
fn start_vector(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64 + 1.0) * 0.7548776662466927).sin())
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Largest eigenvalue of a symmetric PSD matrix: power iteration with a
/// residual certificate, dense symmetric eigensolver when that stalls.
fn largest_eigenvalue_psd(g: &DenseMatrix) -> f64 {
    let n = g.rows();
    if n == 0 {
        return 0.0;
    }
    let scale = g.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    for _ in 0..POWER_MAX_ITER {
        let w = g.matvec(&v);
        let theta = dot(&v, &w);
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - theta * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if theta > 0.0 && resid <= 1e-11 * theta {
            return theta;
        }
        let nw = norm2(&w);
        if nw == 0.0 {
            break;
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    symmetric_eigenvalues(g).into_iter().fold(f64::MIN, f64::max)
}

fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let m = a.to_nalgebra();
    // Symmetrize to absorb rounding in the caller's construction.
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().collect()
}

/// Spectral norm (largest singular value).
pub fn operator_norm_2(a: &DenseMatrix) -> Result<f64> {
    ensure_finite(a)?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let g = if a.cols() <= a.rows() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    Ok(largest_eigenvalue_psd(&g).max(0.0).sqrt())
}

/// Largest eigenvalue modulus.
///
/// Symmetric inputs go straight to the symmetric eigensolver. Otherwise a
/// power iteration on `A` is tried first and accepted only when its residual
/// certifies a real dominant eigenvalue; rotational (complex-dominant) or
/// defective spectra stall that test and fall back to the eigenvalues of a
/// real Schur form.
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "spectral radius needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    ensure_finite(a)?;
    let n = a.rows();
    let scale = a.max_abs();
    if n == 0 || scale == 0.0 {
        return Ok(0.0);
    }
    if a.asymmetry() <= 1e-14 * scale {
        return Ok(symmetric_eigenvalues(a)
            .into_iter()
            .fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    if let Some(r) = power_radius(a) {
        return Ok(r);
    }
    Ok(a.to_nalgebra()
        .complex_eigenvalues()
        .iter()
        .fold(0.0, |m: f64, z| m.max(z.norm())))
}

fn power_radius(a: &DenseMatrix) -> Option<f64> {
    let fro = matrix_norms(a).ok()?.frobenius;
    let mut v = start_vector(a.rows());
    for _ in 0..POWER_MAX_ITER {
        let w = a.matvec(&v);
        let nw = norm2(&w);
        if nw <= 1e-300 {
            return None;
        }
        let theta = dot(&v, &w);
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - theta * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if theta.abs() > 1e-8 * fro && resid <= 1e-13 * fro {
            return Some(theta.abs());
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    None
}

/// `||A^k||^(1/k)`, the Gelfand upper estimate of the spectral radius.
pub fn gelfand_estimate(a: &DenseMatrix, k: usize) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape("gelfand estimate needs a square matrix".into()));
    }
    let k = k.max(1);
    let mut p = a.clone();
    for _ in 1..k {
        p = p.matmul(a)?;
    }
    Ok(operator_norm_2(&p)?.powf(1.0 / k as f64))
}

/// Smallest eigenvalue of a symmetric positive semi-definite matrix.
pub fn min_eigenvalue_spd(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape("min eigenvalue needs a square matrix".into()));
    }
    ensure_finite(a)?;
    if a.asymmetry() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {:.3e})",
            a.asymmetry()
        )));
    }
    if a.rows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    Ok(symmetric_eigenvalues(a).into_iter().fold(f64::INFINITY, f64::min))
}

/// Geometric-decay certificate for the powers of a stable matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    pub rho0: f64,
    /// Smallest `k >= 1` with `||A^k|| <= rho0`.
    pub tau: usize,
    /// `rho0^-1 * max_{0 <= k < tau} ||A^k||`. An admissible constant, not
    /// the smallest one: symmetric contractions get `1 / rho0`, not 1.
    pub gamma: f64,
    /// `||A^k||` for `k = 0..=kmax`.
    pub norms: Vec<f64>,
}

impl DependenceProfile {
    /// The envelope `gamma * rho0^(k / tau)`.
    pub fn envelope(&self, k: usize) -> f64 {
        self.gamma * self.rho0.powf(k as f64 / self.tau as f64)
    }

    pub fn peak(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Spectral norms of `A^0 ..= A^kmax` with `tau` and `gamma`.
pub fn dependence_profile(a: &DenseMatrix, rho0: f64, kmax: usize) -> Result<DependenceProfile> {
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::InvalidParameter(format!("rho0 = {rho0} not in (0,1)")));
    }
    let radius = spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::NonStationary { radius });
    }
    let norms = power_norms(a, kmax)?;
    let tau = (1..norms.len())
        .find(|&k| norms[k] <= rho0)
        .ok_or(Error::HorizonExceeded { kmax, rho0 })?;
    let gamma = norms[..tau].iter().copied().fold(0.0, f64::max) / rho0;
    Ok(DependenceProfile {
        rho0,
        tau,
        gamma,
        norms,
    })
}

/// `||A^k||` for `k = 0..=kmax`, one multiplication per lag.
///
/// The running power is kept re-normalized (with its log scale carried
/// separately) so long horizons neither underflow nor drift.
pub fn power_norms(a: &DenseMatrix, kmax: usize) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Shape("matrix powers need a square matrix".into()));
    }
    ensure_finite(a)?;
    let mut norms = Vec::with_capacity(kmax + 1);
    norms.push(if a.rows() == 0 { 0.0 } else { 1.0 });
    let mut power = a.clone();
    let mut log_scale = 0.0f64;
    for k in 1..=kmax {
        if k > 1 {
            power = power.matmul(a)?;
        }
        let m = power.max_abs();
        if m == 0.0 {
            norms.extend(std::iter::repeat_n(0.0, kmax + 1 - k));
            break;
        }
        norms.push(operator_norm_2(&power)? * log_scale.exp());
        if !(1e-100..=1e100).contains(&m) {
            log_scale += m.ln();
            power = power.scale(1.0 / m);
        }
    }
    Ok(norms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn operator_norm_examples() {
        assert!(close(operator_norm_2(&DenseMatrix::identity(3)).unwrap(), 1.0, 1e-12));
        let d = DenseMatrix::from_diag(&[2.0, -3.0]);
        assert!(close(operator_norm_2(&d).unwrap(), 3.0, 1e-12));
        // [[0,1],[0,0]] = e1 e2^T has singular values {1, 0}.
        let shift = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(close(operator_norm_2(&shift).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(DenseMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn spectral_radius_examples() {
        assert!(close(spectral_radius(&DenseMatrix::identity(4)).unwrap(), 1.0, 1e-12));
        let upper = DenseMatrix::from_fn(4, 4, |i, j| if j > i { 1.0 + j as f64 } else { 0.0 });
        assert!(spectral_radius(&upper).unwrap().abs() < 1e-12);
        let a = DenseMatrix::from_rows(&[vec![0.5, 0.3], vec![0.1, 0.4]]).unwrap();
        // lambda^2 - 0.9 lambda + 0.17 = 0
        let root = (0.9 + (0.81f64 - 0.68).sqrt()) / 2.0;
        assert!(close(spectral_radius(&a).unwrap(), root, 1e-10));
        assert!(spectral_radius(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn spectral_radius_rotation() {
        // 0.9 * rotation: complex pair of modulus 0.9
        let (c, s) = (0.9 * 0.3f64.cos(), 0.9 * 0.3f64.sin());
        let a = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        assert!(close(spectral_radius(&a).unwrap(), 0.9, 1e-10));
    }

    #[test]
    fn norms_hand_computed() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 0.0]]).unwrap();
        let n = matrix_norms(&a).unwrap();
        assert_eq!(n.l1_induced, 4.0);
        assert_eq!(n.linf_induced, 3.0);
        assert!((n.frobenius - 14f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.max_abs, 3.0);
        assert_eq!(n.entry_l1, 6.0);

        let z = matrix_norms(&DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(
            z.frobenius + z.l1_induced + z.linf_induced + z.max_abs + z.entry_l1,
            0.0
        );

        let i = matrix_norms(&DenseMatrix::identity(5)).unwrap();
        assert_eq!((i.l1_induced, i.linf_induced), (1.0, 1.0));
        assert!((i.frobenius - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!(close(
            min_eigenvalue_spd(&DenseMatrix::identity(3)).unwrap(),
            1.0,
            1e-12
        ));
        assert!(close(
            min_eigenvalue_spd(&DenseMatrix::from_diag(&[4.0, 9.0])).unwrap(),
            4.0,
            1e-12
        ));
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(close(min_eigenvalue_spd(&a).unwrap(), 1.0, 1e-12));
        let asym = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.1, 2.0]]).unwrap();
        assert!(matches!(min_eigenvalue_spd(&asym), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn profile_of_zero_matrix() {
        let p = dependence_profile(&DenseMatrix::zeros(3, 3), 0.5, 5).unwrap();
        assert_eq!(p.tau, 1);
        assert_eq!(p.norms, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.gamma, 2.0);
    }

    #[test]
    fn profile_of_symmetric_contraction() {
        let a = DenseMatrix::from_diag(&[0.5, -0.25, 0.1]);
        let p = dependence_profile(&a, 0.5, 10).unwrap();
        assert_eq!(p.tau, 1);
        assert!(close(p.gamma, 2.0, 1e-12));
        for (k, n) in p.norms.iter().enumerate() {
            assert!((n - 0.5f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_errors() {
        let a = DenseMatrix::from_diag(&[1.0, 0.2]);
        assert!(matches!(
            dependence_profile(&a, 0.5, 10),
            Err(Error::NonStationary { .. })
        ));
        let slow = DenseMatrix::from_diag(&[0.99]);
        assert!(matches!(
            dependence_profile(&slow, 0.5, 10),
            Err(Error::HorizonExceeded { .. })
        ));
        assert!(dependence_profile(&slow, 1.5, 10).is_err());
    }

    #[test]
    fn gelfand_upper_bounds_radius() {
        let a = DenseMatrix::from_rows(&[vec![0.5, 2.0], vec![0.0, 0.4]]).unwrap();
        let r = spectral_radius(&a).unwrap();
        assert!(close(r, 0.5, 1e-10));
        for k in [1, 5, 20, 80] {
            assert!(gelfand_estimate(&a, k).unwrap() >= r - 1e-12);
        }
        assert!(gelfand_estimate(&a, 200).unwrap() < 0.53);
    }
}
