//! Small dense linear algebra used by the geometry: n ≤ 3 real systems, complex
//! determinants, and eigenvalues of complex upper Hessenberg matrices.

use num_traits::Zero;

use crate::scalar::{Real, C};

/// Determinant by Gaussian elimination with partial pivoting. Destroys `m`.
pub(crate) fn complex_det_in_place<T: Real>(m: &mut [Vec<C<T>>]) -> C<T> {
    let n = m.len();
    let mut det = C::new(T::one(), T::zero());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .norm_sqr()
                    .partial_cmp(&m[b][col].norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col].is_zero() {
            return C::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det = det * p;
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] = m[row][k] - f * v;
            }
        }
    }
    det
}

/// Real square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn det(&self) -> T {
        let n = self.n;
        match n {
            1 => self.data[0],
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                let g = |i, j| self.get(i, j);
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                    - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
            _ => {
                let (lu, sign) = match self.lu() {
                    Some(v) => v,
                    None => return T::zero(),
                };
                (0..n).fold(sign, |acc, i| acc * lu.get(i, i))
            }
        }
    }

    fn lu(&self) -> Option<(Mat<T>, T)> {
        let n = self.n;
        let mut m = self.clone();
        let mut sign = T::one();
        for col in 0..n {
            let pivot = (col..n).max_by(|&a, &b| {
                m.get(a, col)
                    .abs()
                    .partial_cmp(&m.get(b, col).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if m.get(pivot, col) == T::zero() {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    m.data.swap(pivot * n + k, col * n + k);
                }
                sign = -sign;
            }
            for row in col + 1..n {
                let f = m.get(row, col) / m.get(col, col);
                for k in col..n {
                    let v = m.get(row, k) - f * m.get(col, k);
                    m.set(row, k, v);
                }
            }
        }
        Some((m, sign))
    }

    /// Inverse via Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Mat<T>> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| {
                a.get(x, col)
                    .abs()
                    .partial_cmp(&a.get(y, col).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            let pv = a.get(pivot, col);
            if pv == T::zero() || !pv.is_finite() {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
            }
            let d = a.get(col, col);
            for k in 0..n {
                a.set(col, k, a.get(col, k) / d);
                inv.set(col, k, inv.get(col, k) / d);
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a.get(row, col);
                if f == T::zero() {
                    continue;
                }
                for k in 0..n {
                    a.set(row, k, a.get(row, k) - f * a.get(col, k));
                    inv.set(row, k, inv.get(row, k) - f * inv.get(col, k));
                }
            }
        }
        Some(inv)
    }

    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let inv = self.inverse()?;
        Some(
            (0..self.n)
                .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + inv.get(i, j) * b[j]))
                .collect(),
        )
    }

    /// Smallest eigenvalue of a symmetric matrix, by Jacobi rotations (n ≤ 3 in practice).
    pub fn min_sym_eigenvalue(&self) -> T {
        let n = self.n;
        let mut a = self.clone();
        for _sweep in 0..50 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off = off + a.get(i, j) * a.get(i, j);
                    }
                }
            }
            if off <= T::eps() * T::eps() * a.data.iter().fold(T::zero(), |s, v| s + *v * *v) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (T::two() * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        (0..n).map(|i| a.get(i, i)).fold(T::infinity(), |m, v| m.min(v))
    }
}

/// Eigenvalues of a complex upper Hessenberg matrix by the shifted QR iteration with
/// Wilkinson shifts and deflation. `h` is row-major and is destroyed.
pub(crate) fn hessenberg_eigenvalues<T: Real>(mut h: Vec<Vec<C<T>>>) -> Option<Vec<C<T>>> {
    let mut n = h.len();
    let mut eig = Vec::with_capacity(n);
    let max_iter = 100 * n.max(1);
    let mut iter = 0;
    while n > 0 {
        if n == 1 {
            eig.push(h[0][0]);
            break;
        }
        // look for a negligible subdiagonal entry
        let mut l = n - 1;
        while l > 0 {
            let s = h[l - 1][l - 1].norm() + h[l][l].norm();
            let s = if s == T::zero() { T::one() } else { s };
            if h[l][l - 1].norm() <= T::eps() * s {
                h[l][l - 1] = C::zero();
                break;
            }
            l -= 1;
        }
        if l == n - 1 {
            eig.push(h[n - 1][n - 1]);
            n -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return None;
        }
        // Wilkinson shift from the trailing 2x2 block
        let a = h[n - 2][n - 2];
        let b = h[n - 2][n - 1];
        let c = h[n - 1][n - 2];
        let d = h[n - 1][n - 1];
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr * T::lit(0.25) - det).sqrt();
        let half = tr * T::half();
        let mu1 = half + disc;
        let mu2 = half - disc;
        let mut mu = if (mu1 - d).norm() < (mu2 - d).norm() { mu1 } else { mu2 };
        if iter % 11 == 10 {
            // exceptional shift
            mu = d + C::new(h[n - 1][n - 2].norm() * T::lit(0.75), T::zero());
        }
        // QR step on the active block l..n via Givens rotations
        for i in l..n {
            h[i][i] = h[i][i] - mu;
        }
        let mut rots = Vec::with_capacity(n - l);
        for k in l..n - 1 {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == T::zero() {
                (C::new(T::one(), T::zero()), C::zero())
            } else {
                (x / r, y / r)
            };
            for j in k..n {
                let u = h[k][j];
                let v = h[k + 1][j];
                h[k][j] = cs.conj() * u + sn.conj() * v;
                h[k + 1][j] = -sn * u + cs * v;
            }
            rots.push((cs, sn));
        }
        for (idx, k) in (l..n - 1).enumerate() {
            let (cs, sn) = rots[idx];
            let top = (k + 2).min(n);
            for i in l..top {
                let u = h[i][k];
                let v = h[i][k + 1];
                h[i][k] = u * cs + v * sn;
                h[i][k + 1] = -(u * sn.conj()) + v * cs.conj();
            }
        }
        for i in l..n {
            h[i][i] = h[i][i] + mu;
        }
    }
    Some(eig)
}

/// Gauss–Legendre nodes and weights on [-1, 1] via Newton iteration on P_m.
pub fn gauss_legendre<T: Real>(m: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((T::lit(x), T::lit(w)));
    }
    out
}

/// Ordinary least squares fit `y = slope * x + intercept`; returns (slope, intercept, r²).
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<(T, T, T)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        sxx = sxx + (*x - mx) * (*x - mx);
        sxy = sxy + (*x - mx) * (*y - my);
        syy = syy + (*y - my) * (*y - my);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_inverse_and_det() {
        let mut m = Mat::<f64>::zeros(3);
        m.data = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = m.inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-14);
            }
        }
        let mut m4 = Mat::<f64>::identity(4);
        m4.set(0, 3, 2.0);
        m4.set(3, 0, 1.0);
        assert!((m4.det() - (1.0 - 2.0)).abs() < 1e-14);
        let lam = m.min_sym_eigenvalue();
        // characteristic check: det(m - lam I) ≈ 0
        let mut shifted = m.clone();
        for i in 0..3 {
            shifted.set(i, i, m.get(i, i) - lam);
        }
        assert!(shifted.det().abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let nodes = gauss_legendre::<f64>(6);
        let wsum: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        let x10: f64 = nodes.iter().map(|(x, w)| w * x.powi(10)).sum();
        assert!((x10 - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn hessenberg_eigenvalues_of_companion_matrix() {
        // roots 1, 2, 3, -1 + i, -1 - i  →  monic polynomial coefficients via expansion
        let roots = [
            C::new(1.0, 0.0),
            C::new(2.0, 0.0),
            C::new(3.0, 0.0),
            C::new(-1.0, 1.0),
            C::new(-1.0, -1.0),
        ];
        let mut coeffs = vec![C::new(1.0f64, 0.0)];
        for r in roots {
            let mut next = vec![C::zero(); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] = next[k] + *c;
                next[k + 1] = next[k + 1] - *c * r;
            }
            coeffs = next;
        }
        let n = 5;
        let mut h = vec![vec![C::zero(); n]; n];
        for j in 0..n {
            h[0][j] = -coeffs[j + 1];
        }
        for i in 1..n {
            h[i][i - 1] = C::new(1.0, 0.0);
        }
        let eig = hessenberg_eigenvalues(h).unwrap();
        for r in roots {
            let best = eig.iter().map(|e| (*e - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "root {r} missed, best {best}");
        }
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, i, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 2.5).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
