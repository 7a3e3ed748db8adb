//! Uniform grids, trapezoid quadrature, norms and tridiagonal solvers.
//!
//! Every grid has `x = 0` as a node so that the point interaction sits
//! exactly on a sample. Fields carry their grid by value (it is four numbers)
//! and all binary operations check that the grids agree.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing grid geometry.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("grid needs n >= 3, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        let k = -x_min / h;
        if x_min > 0.0 || x_max < 0.0 || (k - k.round()).abs() > GRID_TOL * k.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "x = 0 must be a grid node (x_min = {x_min}, h = {h})"
            )));
        }
        Ok(Self { x_min, x_max, n, h })
    }

    /// Symmetric grid `[-half_width, half_width]` with spacing as close to `h`
    /// as an integer node count allows.
    pub fn symmetric(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "symmetric grid needs positive half width and spacing, got {half_width}, {h}"
            )));
        }
        let half = (half_width / h).round() as usize;
        Self::new(-half_width, half_width, 2 * half + 1)
    }

    /// Index of the node `x = 0`.
    pub fn origin_index(&self) -> usize {
        (-self.x_min / self.h).round() as usize
    }

    pub fn x(&self, i: usize) -> f64 {
        // Offsets from the origin node keep x = 0 exact.
        (i as f64 - self.origin_index() as f64) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Nearest node to `x`, or `None` outside the grid.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x_min) / self.h).round();
        if k < 0.0 || k > (self.n - 1) as f64 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Same node count and spacing, all coordinates divided by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            x_min: self.x_min / lambda,
            x_max: self.x_max / lambda,
            n: self.n,
            h: self.h / lambda,
        }
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.h - other.h).abs() <= GRID_TOL * self.h
            && (self.x_min - other.x_min).abs() <= GRID_TOL * self.h
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self::new(-60.0, 60.0, 6001).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl WaveField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn from_real(f: &RealField) -> Self {
        Self {
            grid: f.grid,
            values: f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.grid.origin_index()]
    }

    pub fn sub(&self, other: &WaveField) -> Result<WaveField> {
        check_grids(&self.grid, &other.grid)?;
        Ok(WaveField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> WaveField {
        WaveField { grid: self.grid, values: self.values.iter().map(|a| a * c).collect() }
    }

    pub fn modulus_squared(&self) -> RealField {
        RealField { grid: self.grid, values: self.values.iter().map(|v| v.norm_sqr()).collect() }
    }
}

impl RealField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.grid.weight(i)).sum()
    }

    pub fn dot(&self, other: &RealField) -> Result<f64> {
        check_grids(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a * b * self.grid.weight(i))
            .sum())
    }

    pub fn l2(&self) -> f64 {
        self.dot(self).unwrap_or(0.0).sqrt()
    }
}

fn check_grids(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Trapezoid approximation of `∫ conj(f) g dx`.
pub fn complex_inner(f: &WaveField, g: &WaveField) -> Result<Complex64> {
    check_grids(&f.grid, &g.grid)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        acc += a.conj() * b * f.grid.weight(i);
    }
    Ok(acc)
}

/// Real inner product `Re ∫ conj(f) g dx`.
pub fn real_inner(f: &WaveField, g: &WaveField) -> Result<f64> {
    check_grids(&f.grid, &g.grid)?;
    let mut acc = 0.0;
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        acc += (a.re * b.re + a.im * b.im) * f.grid.weight(i);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub sup: f64,
}

/// Second-order derivative: centered in the interior, one-sided at the ends.
pub fn derivative<T>(values: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    let mut d = Vec::with_capacity(n);
    if n < 3 {
        return values.iter().map(|&v| v * 0.0).collect();
    }
    let inv2h = 0.5 / h;
    d.push((values[0] * -3.0 + values[1] * 4.0 - values[2]) * inv2h);
    for i in 1..n - 1 {
        d.push((values[i + 1] - values[i - 1]) * inv2h);
    }
    d.push((values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * inv2h);
    d
}

pub fn norms(f: &WaveField) -> Norms {
    let grid = &f.grid;
    let l2 = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v.norm_sqr() * grid.weight(i))
        .sum::<f64>()
        .sqrt();
    let d = derivative(&f.values, grid.h);
    let dl2 = d
        .iter()
        .enumerate()
        .map(|(i, v)| v.norm_sqr() * grid.weight(i))
        .sum::<f64>()
        .sqrt();
    let sup = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Norms { l2, h1: l2 + dl2, sup }
}

pub fn real_norms(f: &RealField) -> Norms {
    norms(&WaveField::from_real(f))
}

/// Field arithmetic needed by the tridiagonal solvers.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factors of a symmetric tridiagonal matrix, computed without pivoting.
///
/// Intended for diagonally dominant systems such as the Crank–Nicolson
/// matrix, which is factored once and reused every step.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    off: Vec<T>,
    /// Reciprocal pivots.
    inv_pivot: Vec<T>,
}

impl<T: Scalar> TridiagonalLu<T> {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn factor(diag: &[T], off: &[T]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal system needs off-diagonal of length n-1 (n = {n}, got {})",
                off.len()
            )));
        }
        let scale = diag.iter().map(|d| d.modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut inv_pivot = Vec::with_capacity(n);
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - off[i - 1] * off[i - 1] * inv_pivot[i - 1];
            }
            if !(pivot.modulus() > 1e-300 * scale) || !pivot.modulus().is_finite() {
                return Err(Error::Singular { row: i });
            }
            inv_pivot.push(T::one() / pivot);
        }
        Ok(Self { off: off.to_vec(), inv_pivot })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = x.len();
        for i in 1..n {
            x[i] = x[i] - self.off[i - 1] * self.inv_pivot[i - 1] * x[i - 1];
        }
        x[n - 1] = x[n - 1] * self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.off[i] * x[i + 1]) * self.inv_pivot[i];
        }
    }
}

/// Solve a symmetric tridiagonal system `(diag, off) x = rhs`.
pub fn tridiagonal_solve<T: Scalar>(diag: &[T], off: &[T], rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != diag.len() {
        return Err(Error::InvalidParameter("rhs length differs from matrix size".into()));
    }
    Ok(TridiagonalLu::factor(diag, off)?.solve(rhs))
}

/// Solve a real symmetric tridiagonal system with partial pivoting.
///
/// Used for indefinite shifted systems (inverse iteration), where the
/// unpivoted factorization can break down.
pub fn tridiagonal_solve_pivoted(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidParameter("inconsistent tridiagonal dimensions".into()));
    }
    // Row i of U holds (u0[i], u1[i], u2[i]) on columns i, i+1, i+2.
    let mut u0 = diag.to_vec();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { off[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let scale = diag.iter().chain(off).map(|v| v.abs()).fold(0.0, f64::max);
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    for i in 0..n.saturating_sub(1) {
        // Sub-diagonal entry below the pivot is off[i] (symmetric matrix).
        let sub = off[i];
        let next_diag = u0[i + 1];
        let next_sup = u1[i + 1];
        if sub.abs() > u0[i].abs() {
            // Swap rows i and i+1.
            let m = u0[i] / sub;
            let (r1, r2) = (u1[i], u2[i]);
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            b.swap(i, i + 1);
            u0[i + 1] = r1 - m * next_diag;
            u1[i + 1] = r2 - m * next_sup;
            b[i + 1] -= m * b[i];
        } else {
            let piv = if u0[i].abs() < tiny { tiny } else { u0[i] };
            u0[i] = piv;
            let m = sub / piv;
            u0[i + 1] = next_diag - m * u1[i];
            u1[i + 1] = next_sup - m * u2[i];
            b[i + 1] -= m * b[i];
        }
    }
    if u0[n - 1].abs() < tiny {
        u0[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
        if !x[i].is_finite() {
            return Err(Error::Singular { row: i });
        }
    }
    Ok(x)
}

/// Dense Gaussian elimination with partial pivoting (small systems only).
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Singular { row: col });
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= m * y;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

/// Four-point cubic Lagrange interpolation of uniformly sampled data.
///
/// Points outside the sampled range evaluate to zero.
pub fn interpolate_cubic<T>(values: &[T], grid: &Grid1D, x: f64, zero: T) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let t = (x - grid.x_min) / grid.h;
    let n = values.len();
    if t < -1e-9 || t > (n - 1) as f64 + 1e-9 {
        return zero;
    }
    let k = t.round();
    if (t - k).abs() < 1e-12 {
        return values[k as usize];
    }
    let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
    let s = t - i as f64;
    let (w0, w1, w2, w3) = (
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    );
    values[i - 1] * w0 + values[i] * w1 + values[i + 1] * w2 + values[i + 2] * w3
}

/// Composite trapezoid rule with `steps` panels on `[a, b]`.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..steps {
        acc += f(a + k as f64 * h);
    }
    acc * h
}

/// Gauss–Legendre rule (8 nodes) on `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const WEIGHTS: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        acc += w * (f(mid + half * x) + f(mid - half * x));
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    /// Independent dense oracle: plain Gauss–Jordan on the full matrix.
    fn dense_oracle(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = diag.len();
        let mut m = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            m[i][i] = diag[i];
            if i + 1 < n {
                m[i][i + 1] = off[i];
                m[i + 1][i] = off[i];
            }
            m[i][n] = rhs[i];
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
            m.swap(col, piv);
            let p = m[col][col];
            m[col].iter_mut().for_each(|x| *x /= p);
            let pivot_row = m[col].clone();
            for (row, r) in m.iter_mut().enumerate() {
                if row != col {
                    let f = r[col];
                    r.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        m.iter().map(|r| r[n]).collect()
    }

    #[test]
    fn grid_requires_origin_node() {
        assert!(Grid1D::new(-1.0, 1.0, 201).is_ok());
        assert!(Grid1D::new(-1.0, 1.0, 200).is_err());
        assert!(Grid1D::new(0.5, 1.0, 11).is_err());
        assert!(Grid1D::new(-1.0, 1.0, 2).is_err());
        let g = Grid1D::default();
        assert_eq!(g.n, 6001);
        assert!((g.h - 0.02).abs() < 1e-15);
        assert_eq!(g.x(g.origin_index()), 0.0);
    }

    #[test]
    fn inner_products_of_constants() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let one = WaveField::from_fn(g, |_| c(1.0, 0.0));
        let i = WaveField::from_fn(g, |_| c(0.0, 1.0));
        assert!((complex_inner(&one, &one).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        assert!((complex_inner(&one, &i).unwrap() - c(0.0, 2.0)).norm() < 1e-12);
        assert!(real_inner(&one, &i).unwrap().abs() < 1e-15);
        assert!((real_inner(&one, &one).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sech_integrals() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        let f = WaveField::from_fn(g, |x| c(sech(x), 0.0));
        assert!((complex_inner(&f, &f).unwrap().re - 2.0).abs() < 1e-8);
        let nrm = norms(&f);
        assert!((nrm.l2 - 2f64.sqrt()).abs() < 1e-6);
        assert!((nrm.sup - 1.0).abs() < 1e-12);
        assert_eq!(norms(&WaveField::zeros(g)), Norms { l2: 0.0, h1: 0.0, sup: 0.0 });
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = Grid1D::new(-30.0, 30.0, 3001).unwrap();
        let q = WaveField::from_fn(g, |x| c(2f64.sqrt() * sech(x), 0.0));
        let dq = WaveField::from_fn(g, |x| c(-2f64.sqrt() * sech(x) * x.tanh(), 0.0));
        assert!(real_inner(&q, &dq).unwrap().abs() < 1e-10);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = WaveField::zeros(Grid1D::new(-1.0, 1.0, 11).unwrap());
        let b = WaveField::zeros(Grid1D::new(-1.0, 1.0, 21).unwrap());
        assert!(matches!(complex_inner(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn tridiagonal_identity_and_laplacian() {
        let r: Vec<f64> = (0..10).map(|i| i as f64 * 0.3 - 1.0).collect();
        let x = tridiagonal_solve(&[1.0; 10], &[0.0; 9], &r).unwrap();
        assert_eq!(x, r);

        // (I - D²) with unit spacing, constant rhs.
        let diag = vec![3.0; 10];
        let off = vec![-1.0; 9];
        let rhs = vec![1.0; 10];
        let x = tridiagonal_solve(&diag, &off, &rhs).unwrap();
        let oracle = dense_oracle(&diag, &off, &rhs);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-13);
        }
        // Far from the ends the profile approaches 1/(3-2) = 1.
        assert!((x[5] - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_pivot_is_singular() {
        let err = tridiagonal_solve(&[0.0, 1.0], &[1.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 0 }));
    }

    #[test]
    fn pivoted_solver_handles_indefinite_systems() {
        let diag = vec![0.0, 1.0, -2.0, 0.5, 3.0];
        let off = vec![1.0, 2.0, -1.0, 0.25];
        let rhs = vec![1.0, -2.0, 0.5, 4.0, 1.0];
        let x = tridiagonal_solve_pivoted(&diag, &off, &rhs).unwrap();
        let oracle = dense_oracle(&diag, &off, &rhs);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_tridiagonal() {
        let n = 20;
        let diag: Vec<Complex64> = (0..n).map(|i| c(1.0, 2.0 + 0.1 * i as f64)).collect();
        let off = vec![c(0.0, -1.0); n - 1];
        let rhs: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let x = tridiagonal_solve(&diag, &off, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                r += off[i] * x[i + 1];
            }
            assert!((r - rhs[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = Grid1D::new(-2.0, 2.0, 41).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| x * x * x - 2.0 * x + 1.0).collect();
        for x in [-1.234, 0.0, 0.05, 1.77] {
            let y = interpolate_cubic(&v, &g, x, 0.0);
            assert!((y - (x * x * x - 2.0 * x + 1.0)).abs() < 1e-12);
        }
        assert_eq!(interpolate_cubic(&v, &g, 5.0, 0.0), 0.0);
    }

    #[test]
    fn quadrature_rules() {
        let exact = 1.0 - (-3.0f64).exp();
        assert!((gauss_legendre(|x| (-x).exp(), 0.0, 3.0) - exact).abs() < 1e-9);
        assert!((trapezoid(|x| (-x).exp(), 0.0, 3.0, 3000) - exact).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn tridiagonal_matches_dense_oracle(
            n in 2usize..64,
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
        ) {
            let off: Vec<f64> = (0..n - 1).map(|i| seed[i % seed.len()]).collect();
            let diag: Vec<f64> = (0..n)
                .map(|i| 2.5 + seed[(i + 70) % seed.len()])
                .collect();
            let rhs: Vec<f64> = (0..n).map(|i| seed[(i + 130) % seed.len()] * 3.0).collect();
            let x = tridiagonal_solve(&diag, &off, &rhs).unwrap();
            let oracle = dense_oracle(&diag, &off, &rhs);
            let scale = oracle.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (a, b) in x.iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn complex_inner_is_hermitian(
            re in proptest::collection::vec(-2.0f64..2.0, 21),
            im in proptest::collection::vec(-2.0f64..2.0, 21),
        ) {
            let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
            let f = WaveField::new(g, re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect()).unwrap();
            let h = WaveField::new(g, im.iter().zip(&re).map(|(&a, &b)| c(a * 0.5, -b)).collect()).unwrap();
            let fh = complex_inner(&f, &h).unwrap();
            let hf = complex_inner(&h, &f).unwrap();
            prop_assert!((fh - hf.conj()).norm() < 1e-12);
        }
    }
}
