use num_traits::Zero;
use serde::Serialize;

use super::poly::BiPoly;
use super::roots::{cluster, roots};
use crate::error::{GeomError, Result};
use crate::scalar::{Real, C};

/// Linear form `α x + β y` with `|(α, β)| = 1` and first nonzero entry positive real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFactor<T: Real> {
    pub alpha: C<T>,
    pub beta: C<T>,
    pub multiplicity: u32,
}

impl<T: Real> LinearFactor<T> {
    /// Normalizes `(α, β)`; returns the complex factor removed so that `raw = unit·factor`.
    pub fn normalized(alpha: C<T>, beta: C<T>, multiplicity: u32) -> (Self, C<T>) {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        let lead = if alpha.norm() > T::lit(1e-14) * norm { alpha } else { beta };
        let unit = lead / lead.norm() * norm;
        (
            Self {
                alpha: alpha / unit,
                beta: beta / unit,
                multiplicity,
            },
            unit,
        )
    }

    pub fn as_poly(&self) -> BiPoly<T> {
        BiPoly::from_terms([((1, 0), self.alpha), ((0, 1), self.beta)])
    }

    /// The zero `[x : y : 0]` at infinity, scaled so the first nonzero coordinate is one.
    pub fn point_at_infinity(&self) -> ProjPoint<T> {
        ProjPoint::normalized(self.beta, -self.alpha, C::zero())
    }

    /// Same projective line up to a complex multiple.
    pub fn same_line(&self, other: &Self, tol: T) -> bool {
        (self.alpha * other.beta - self.beta * other.alpha).norm() <= tol
    }
}

/// `H = scale · ∏ (α_j x + β_j y)^{m_j}` with pairwise distinct lines.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFactorization<T: Real> {
    pub factors: Vec<LinearFactor<T>>,
    pub scale: C<T>,
}

impl<T: Real> PlaneFactorization<T> {
    /// Number of distinct planes `D`.
    pub fn distinct(&self) -> usize {
        self.factors.len()
    }

    /// `Σ m_j`.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.multiplicity).sum()
    }

    pub fn expand(&self) -> BiPoly<T> {
        self.factors
            .iter()
            .fold(BiPoly::constant(self.scale), |acc, f| &acc * &f.as_poly().pow(f.multiplicity))
    }
}

/// Point of `CP²`, scaled so that the first nonzero coordinate is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint<T: Real> {
    pub x: C<T>,
    pub y: C<T>,
    pub z: C<T>,
}

impl<T: Real> ProjPoint<T> {
    pub fn normalized(x: C<T>, y: C<T>, z: C<T>) -> Self {
        let s = T::one().max(x.norm()).max(y.norm()).max(z.norm());
        let tiny = T::lit(1e-14) * s;
        let lead = [x, y, z].into_iter().find(|v| v.norm() > tiny).unwrap_or(C::new(T::one(), T::zero()));
        let clean = |v: C<T>| if v.norm() > tiny { v / lead } else { C::zero() };
        Self {
            x: clean(x),
            y: clean(y),
            z: clean(z),
        }
    }
}

impl<T: Real> Serialize for ProjPoint<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let c = |v: C<T>| [v.re.as_f64(), v.im.as_f64()];
        [c(self.x), c(self.y), c(self.z)].serialize(s)
    }
}

/// Splits a nonzero homogeneous polynomial into linear factors. The `x` factor is read off the
/// lowest power of `x`; the others come from the roots `t_j` of `H(1, t)` as `t_j x − y`.
pub fn factor_top<T: Real>(h: &BiPoly<T>) -> Result<PlaneFactorization<T>> {
    let d = h.degree().ok_or(GeomError::ZeroPolynomial)?;
    if !h.is_homogeneous() {
        return Err(GeomError::InvalidArgument("factor_top needs a homogeneous polynomial".into()));
    }
    let kmin = h.terms().map(|((i, _), _)| i).min().unwrap_or(0);
    let coeffs = h.dehomogenize_x(d);
    let mut factors = Vec::new();
    if kmin > 0 {
        factors.push(LinearFactor {
            alpha: C::new(T::one(), T::zero()),
            beta: C::zero(),
            multiplicity: kmin,
        });
    }
    let mut clusters = cluster(&roots(&coeffs)?)?;
    clusters.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (t, m) in clusters {
        factors.push(LinearFactor::normalized(t, C::new(-T::one(), T::zero()), m).0);
    }
    let mut fact = PlaneFactorization {
        factors,
        scale: C::new(T::one(), T::zero()),
    };
    // Match the largest coefficient of H.
    let unit = fact.expand();
    let ((i, j), c) = h
        .terms()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonzero");
    fact.scale = c / unit.coeff(i, j);
    Ok(fact)
}

/// Projective zeros of `P_d`, without multiplicity.
pub fn points_at_infinity<T: Real>(p: &BiPoly<T>) -> Result<Vec<ProjPoint<T>>> {
    Ok(blow_down_poly(p)?
        .factors
        .iter()
        .map(|f| f.point_at_infinity())
        .collect())
}

/// Factorization of the top-degree part: the planes of the tangent cone at infinity.
pub fn blow_down_poly<T: Real>(p: &BiPoly<T>) -> Result<PlaneFactorization<T>> {
    let d = p.degree().ok_or(GeomError::ZeroPolynomial)?;
    factor_top(&p.homogeneous_part(d))
}

/// Factorization of the lowest nonzero homogeneous part: the tangent cone at the origin.
pub fn blow_up_poly<T: Real>(p: &BiPoly<T>) -> Result<(u32, PlaneFactorization<T>)> {
    if p.is_zero() {
        return Err(GeomError::ZeroPolynomial);
    }
    if !p.coeff(0, 0).is_zero() {
        return Err(GeomError::InvalidArgument("the origin is not on the curve".into()));
    }
    let k = p.terms().map(|((i, j), _)| i + j).min().expect("nonzero");
    Ok((k, factor_top(&p.homogeneous_part(k))?))
}
