use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{GeomError, Result};
use crate::scalar::{Real, C};

/// Sparse polynomial in `x, y` with complex coefficients. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly<T: Real> {
    coeffs: BTreeMap<(u32, u32), C<T>>,
}

impl<T: Real> Default for BiPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> BiPoly<T> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: C<T>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: C<T>, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(C::new(T::one(), T::zero()), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(C::new(T::one(), T::zero()), 0, 1)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), C<T>)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: C<T>) {
        let e = self.coeffs.entry((i, j)).or_insert_with(C::zero);
        *e = *e + c;
        if e.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).max()
    }

    pub fn degree_in_x(&self) -> u32 {
        self.coeffs.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn degree_in_y(&self) -> u32 {
        self.coeffs.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn coeff(&self, i: u32, j: u32) -> C<T> {
        self.coeffs.get(&(i, j)).copied().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), C<T>)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> T {
        self.coeffs.values().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.coeffs.keys().map(|&(i, j)| i + j);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(C::new(T::one(), T::zero()));
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, x: C<T>, y: C<T>) -> C<T> {
        self.terms()
            .fold(C::zero(), |s, ((i, j), c)| s + c * x.powu(i) * y.powu(j))
    }

    pub fn dx(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&((i, _), _)| i > 0)
                .map(|((i, j), c)| ((i - 1, j), c * T::from_u32(i).unwrap())),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&((_, j), _)| j > 0)
                .map(|((i, j), c)| ((i, j - 1), c * T::from_u32(j).unwrap())),
        )
    }

    /// Monomials with `i + j = k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Self::from_terms(self.terms().filter(|&((i, j), _)| i + j == k))
    }

    /// `H(1, t)` for homogeneous `H`, coefficients in increasing powers of `t`.
    pub(crate) fn dehomogenize_x(&self, d: u32) -> Vec<C<T>> {
        let mut v = vec![C::zero(); d as usize + 1];
        for ((i, j), c) in self.terms() {
            if i + j == d {
                v[j as usize] = c;
            }
        }
        v
    }

    /// Coefficients in `y`, each a polynomial in `x` evaluated at `x0`; increasing powers of `y`.
    pub(crate) fn in_y_at(&self, x0: C<T>) -> Vec<C<T>> {
        let mut v = vec![C::zero(); self.degree_in_y() as usize + 1];
        for ((i, j), c) in self.terms() {
            v[j as usize] = v[j as usize] + c * x0.powu(i);
        }
        v
    }

    /// Relative size of the largest coefficient difference.
    pub fn relative_distance(&self, other: &Self) -> T {
        let scale = self.max_coeff().max(other.max_coeff());
        if scale == T::zero() {
            return T::zero();
        }
        (self - other).max_coeff() / scale
    }

    pub fn map_coeffs(&self, f: impl Fn(u32, u32, C<T>) -> C<T>) -> Self {
        Self::from_terms(self.terms().map(|((i, j), c)| ((i, j), f(i, j, c))))
    }
}

impl<T: Real> Add for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn add(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        let mut out = self.clone();
        for ((i, j), c) in rhs.terms() {
            out.add_term(i, j, c);
        }
        out
    }
}

impl<T: Real> Sub for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn sub(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        let mut out = self.clone();
        for ((i, j), c) in rhs.terms() {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl<T: Real> Mul for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn mul(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        let mut out = BiPoly::zero();
        for ((i, j), a) in self.terms() {
            for ((k, l), b) in rhs.terms() {
                out.add_term(i + k, j + l, a * b);
            }
        }
        out
    }
}

impl<T: Real> Neg for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn neg(self) -> BiPoly<T> {
        self.scale(C::new(-T::one(), T::zero()))
    }
}

fn fmt_coeff<T: Real>(c: C<T>) -> (bool, String) {
    // Returns (negative, magnitude text) with the sign pulled out when the coefficient is
    // purely real or purely imaginary.
    if c.im == T::zero() {
        (c.re < T::zero(), format!("{}", c.re.abs()))
    } else if c.re == T::zero() {
        (c.im < T::zero(), format!("{}*i", c.im.abs()))
    } else {
        let sign = if c.im < T::zero() { "-" } else { "+" };
        (false, format!("({} {} {}*i)", c.re, sign, c.im.abs()))
    }
}

/// Canonical text: terms by descending total degree, then descending power of `x`. The output
/// parses back to the same polynomial.
impl<T: Real> fmt::Display for BiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.coeffs.keys().copied().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        for (n, &(i, j)) in keys.iter().enumerate() {
            let (neg, mag) = fmt_coeff(self.coeffs[&(i, j)]);
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if mag != "1" || (i == 0 && j == 0) {
                factors.push(mag);
            }
            for (v, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => factors.push(v.to_string()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// `P = P_0 + P_1 + … + P_d`, indexed by degree. Intermediate parts may be zero.
pub fn homogeneous_parts<T: Real>(p: &BiPoly<T>) -> Result<Vec<BiPoly<T>>> {
    let d = p.degree().ok_or(GeomError::ZeroPolynomial)?;
    Ok((0..=d).map(|k| p.homogeneous_part(k)).collect())
}

/// `λ^d P(x/λ, y/λ)`: coefficient `c_ij ↦ λ^{d−i−j} c_ij`.
pub fn rescale_poly<T: Real>(p: &BiPoly<T>, lambda: T) -> Result<BiPoly<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(GeomError::InvalidArgument("rescale factor must be positive".into()));
    }
    let Some(d) = p.degree() else {
        return Ok(BiPoly::zero());
    };
    Ok(p.map_coeffs(|i, j, c| c * lambda.powi((d - i - j) as i32)))
}

/// Homogeneous polynomial in `x, y, z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriPoly<T: Real> {
    degree: u32,
    coeffs: BTreeMap<(u32, u32, u32), C<T>>,
}

impl<T: Real> TriPoly<T> {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff(&self, i: u32, j: u32, k: u32) -> C<T> {
        self.coeffs.get(&(i, j, k)).copied().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32, u32), C<T>)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn eval(&self, x: C<T>, y: C<T>, z: C<T>) -> C<T> {
        self.terms()
            .fold(C::zero(), |s, ((i, j, k), c)| s + c * x.powu(i) * y.powu(j) * z.powu(k))
    }

    /// `(∂_x, ∂_y, ∂_z)` at a point.
    pub fn gradient(&self, x: C<T>, y: C<T>, z: C<T>) -> [C<T>; 3] {
        let mut g = [C::zero(); 3];
        let pw = |b: C<T>, e: u32| if e == 0 { C::zero() } else { b.powu(e - 1) * T::from_u32(e).unwrap() };
        for ((i, j, k), c) in self.terms() {
            g[0] = g[0] + c * pw(x, i) * y.powu(j) * z.powu(k);
            g[1] = g[1] + c * x.powu(i) * pw(y, j) * z.powu(k);
            g[2] = g[2] + c * x.powu(i) * y.powu(j) * pw(z, k);
        }
        g
    }

    /// Sets `z = 1`.
    pub fn dehomogenize(&self) -> BiPoly<T> {
        BiPoly::from_terms(self.terms().map(|((i, j, _), c)| ((i, j), c)))
    }
}

/// `P̃(x, y, z) = Σ c_ij x^i y^j z^{d−i−j}`.
pub fn homogenize<T: Real>(p: &BiPoly<T>) -> Result<TriPoly<T>> {
    let d = p.degree().ok_or(GeomError::ZeroPolynomial)?;
    Ok(TriPoly {
        degree: d,
        coeffs: p.terms().map(|((i, j), c)| ((i, j, d - i - j), c)).collect(),
    })
}
