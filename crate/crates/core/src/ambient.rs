//! Flat ambient structures of C^n: Kähler form, Liouville form, holomorphic volume form
//! and the hyperkähler rotation of C².
//!
//! Points and tangent vectors are [`CVector`]s with real coordinates interleaved as
//! `(x₁, y₁, …, xₙ, yₙ)`, so that the complex coordinate `z_j = x_j + i y_j` is the pair at
//! positions `2j, 2j + 1`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{GeomError, Result};
use crate::scalar::{Real, C};

/// A point or vector of C^n in interleaved real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector<T> {
    coords: Vec<T>,
}

impl<T: Real> CVector<T> {
    /// Builds a vector from interleaved coordinates. The length must be even and at least 4.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() % 2 != 0 || coords.len() < 4 {
            return Err(GeomError::InvalidArgument(format!(
                "interleaved coordinate vector of length {} does not describe C^n with n >= 2",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { coords })
    }

    /// Unchecked constructor for internal hot paths.
    pub(crate) fn from_raw(coords: Vec<T>) -> Self {
        debug_assert!(coords.len() % 2 == 0);
        Self { coords }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coords: vec![T::zero(); 2 * n],
        }
    }

    pub fn from_complex(z: &[C<T>]) -> Self {
        let mut coords = Vec::with_capacity(2 * z.len());
        for w in z {
            coords.push(w.re);
            coords.push(w.im);
        }
        Self { coords }
    }

    /// Unit vector along `x_j` (`imaginary = false`) or `y_j` (`imaginary = true`).
    pub fn basis(n: usize, j: usize, imaginary: bool) -> Self {
        let mut v = Self::zeros(n);
        v.coords[2 * j + usize::from(imaginary)] = T::one();
        v
    }

    /// Complex dimension n.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn z(&self, j: usize) -> C<T> {
        C::new(self.coords[2 * j], self.coords[2 * j + 1])
    }

    pub fn to_complex(&self) -> Vec<C<T>> {
        (0..self.n()).map(|j| self.z(j)).collect()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.coords.iter().map(|c| *c * s).collect())
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a = *a + s * *b;
        }
    }

    /// Multiplication by the complex structure J (i.e. by `i` in every complex coordinate).
    pub fn j(&self) -> Self {
        let mut out = Vec::with_capacity(self.coords.len());
        for pair in self.coords.chunks(2) {
            out.push(-pair[1]);
            out.push(pair[0]);
        }
        Self::from_raw(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(GeomError::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(())
    }
}

impl<T> Index<usize> for CVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

impl<T: Real> Add for &CVector<T> {
    type Output = CVector<T>;
    fn add(self, rhs: Self) -> CVector<T> {
        CVector::from_raw(self.coords.iter().zip(&rhs.coords).map(|(a, b)| *a + *b).collect())
    }
}

impl<T: Real> Sub for &CVector<T> {
    type Output = CVector<T>;
    fn sub(self, rhs: Self) -> CVector<T> {
        CVector::from_raw(self.coords.iter().zip(&rhs.coords).map(|(a, b)| *a - *b).collect())
    }
}

impl<T: Real> Mul<T> for &CVector<T> {
    type Output = CVector<T>;
    fn mul(self, rhs: T) -> CVector<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &CVector<T> {
    type Output = CVector<T>;
    fn neg(self) -> CVector<T> {
        self.scale(-T::one())
    }
}

/// ω(u, v) = Σ_j (u_{x_j} v_{y_j} − u_{y_j} v_{x_j}).
pub fn kahler_form<T: Real>(u: &CVector<T>, v: &CVector<T>) -> Result<T> {
    u.check_same(v)?;
    Ok(omega_unchecked(u, v))
}

pub(crate) fn omega_unchecked<T: Real>(u: &CVector<T>, v: &CVector<T>) -> T {
    let mut acc = T::zero();
    for (a, b) in u.coords.chunks(2).zip(v.coords.chunks(2)) {
        acc = acc + a[0] * b[1] - a[1] * b[0];
    }
    acc
}

/// Liouville form λ_p(v) = Σ_j (p_{x_j} v_{y_j} − p_{y_j} v_{x_j}); it satisfies dλ = 2ω.
pub fn liouville_form<T: Real>(p: &CVector<T>, v: &CVector<T>) -> Result<T> {
    kahler_form(p, v)
}

/// Ω(v₁, …, vₙ) = det of the complex matrix whose columns are the frame vectors.
pub fn holomorphic_volume<T: Real>(frame: &[CVector<T>]) -> Result<C<T>> {
    let n = frame.len();
    if n < 2 {
        return Err(GeomError::InvalidArgument(format!("frame of {n} vectors")));
    }
    for v in frame {
        if v.n() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                found: v.n(),
            });
        }
    }
    Ok(volume_unchecked(frame))
}

pub(crate) fn volume_unchecked<T: Real>(frame: &[CVector<T>]) -> C<T> {
    let n = frame.len();
    // row-major: m[row][col] = z_row of column vector col
    let mut m: Vec<Vec<C<T>>> = (0..n)
        .map(|row| frame.iter().map(|col| col.z(row)).collect())
        .collect();
    crate::linalg::complex_det_in_place(&mut m)
}

/// Hyperkähler rotation of C², ρ(u₁ + i v₁, u₂ + i v₂) = (u₁ + i u₂, v₁ − i v₂).
///
/// ρ is an R-linear isometric involution. It carries complex curves (for the standard complex
/// structure) onto special Lagrangian surfaces of angle zero, and is applied to tangent
/// vectors by the same formula.
pub fn hyperkahler_rotate<T: Real>(p: &CVector<T>) -> Result<CVector<T>> {
    if p.n() != 2 {
        return Err(GeomError::InvalidArgument(format!(
            "hyperkähler rotation is defined on C², got C^{}",
            p.n()
        )));
    }
    Ok(rotate_unchecked(p))
}

pub(crate) fn rotate_unchecked<T: Real>(p: &CVector<T>) -> CVector<T> {
    let c = &p.coords;
    CVector::from_raw(vec![c[0], c[2], c[1], -c[3]])
}

/// Applies ρ to a pair of complex numbers `(w₁, w₂)`.
pub fn rotate_complex<T: Real>(w1: C<T>, w2: C<T>) -> CVector<T> {
    CVector::from_raw(vec![w1.re, w2.re, w1.im, -w2.im])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CVector<f64> {
        CVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kahler_form_on_coordinate_pairs() {
        let ex = CVector::<f64>::basis(2, 0, false);
        let ey = CVector::<f64>::basis(2, 0, true);
        assert_eq!(kahler_form(&ex, &ey).unwrap(), 1.0);
        assert_eq!(kahler_form(&ey, &ex).unwrap(), -1.0);
        let u = cv(&[0.3, -1.2, 2.0, 0.7]);
        assert_eq!(kahler_form(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = CVector::<f64>::zeros(2);
        let b = CVector::<f64>::zeros(3);
        assert!(matches!(
            kahler_form(&a, &b),
            Err(GeomError::DimensionMismatch { .. })
        ));
        assert!(CVector::new(vec![1.0f64, 2.0, 3.0]).is_err());
    }

    #[test]
    fn liouville_form_examples() {
        let v = cv(&[0.4, 1.0, -2.0, 3.0]);
        assert_eq!(liouville_form(&CVector::zeros(2), &v).unwrap(), 0.0);
        let p = CVector::<f64>::basis(2, 0, false);
        assert_eq!(
            liouville_form(&p, &CVector::basis(2, 0, true)).unwrap(),
            1.0
        );
        let q = CVector::<f64>::basis(2, 0, true);
        assert_eq!(
            liouville_form(&q, &CVector::basis(2, 0, false)).unwrap(),
            -1.0
        );
    }

    #[test]
    fn holomorphic_volume_of_real_and_rotated_frames() {
        for n in 2..=3 {
            let frame: Vec<_> = (0..n).map(|j| CVector::<f64>::basis(n, j, false)).collect();
            let v = holomorphic_volume(&frame).unwrap();
            assert!((v - C::new(1.0, 0.0)).norm() < 1e-15);
        }
        let phi = [0.4, 1.1, -1.5];
        let frame: Vec<_> = (0..3)
            .map(|j| {
                let mut z = vec![C::new(0.0, 0.0); 3];
                z[j] = C::from_polar(1.0, phi[j]);
                CVector::from_complex(&z)
            })
            .collect();
        let v = holomorphic_volume(&frame).unwrap();
        let expected = C::from_polar(1.0, phi.iter().sum::<f64>());
        assert!((v - expected).norm() < 1e-14);

        let mut swapped = frame.clone();
        swapped.swap(0, 2);
        let w = holomorphic_volume(&swapped).unwrap();
        assert!((w + v).norm() < 1e-14);
    }

    #[test]
    fn rotation_examples_and_involution() {
        let a = 0.7;
        let p = cv(&[1.0, 0.0, a, 0.0]);
        let r = hyperkahler_rotate(&p).unwrap();
        assert_eq!(r.coords(), &[1.0, a, 0.0, 0.0]);

        let q = cv(&[0.0, 1.0, 0.0, 1.0]);
        let r = hyperkahler_rotate(&q).unwrap();
        assert_eq!(r.z(0), C::new(0.0, 0.0));
        assert_eq!(r.z(1), C::new(1.0, -1.0));

        let s = cv(&[0.3, -0.8, 1.9, 2.2]);
        let back = hyperkahler_rotate(&hyperkahler_rotate(&s).unwrap()).unwrap();
        assert_eq!(back, s);

        assert!(hyperkahler_rotate(&CVector::<f64>::zeros(3)).is_err());
    }

    #[test]
    fn rotation_maps_complex_lines_to_lagrangian_planes() {
        // tangent pair (u, i u) of a complex curve
        let u = cv(&[0.3, 1.4, -0.6, 0.2]);
        let iu = u.j();
        let a = hyperkahler_rotate(&u).unwrap();
        let b = hyperkahler_rotate(&iu).unwrap();
        assert!(kahler_form(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let ex = CVector::<f32>::basis(2, 1, false);
        let ey = CVector::<f32>::basis(2, 1, true);
        assert_eq!(kahler_form(&ex, &ey).unwrap(), 1.0f32);
        let v = holomorphic_volume(&[CVector::<f32>::basis(2, 0, false), CVector::basis(2, 1, false)])
            .unwrap();
        assert_eq!(v, C::new(1.0f32, 0.0));
    }
}
