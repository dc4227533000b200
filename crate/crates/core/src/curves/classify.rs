use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::factor::{factor_top, LinearFactor};
use super::poly::BiPoly;
use crate::chart::RotatedCurveChart;
use crate::domain::{Domain, End};
use crate::error::{GeomError, Result};
use crate::patch::{Integral, LagrangianPatch, ParamLoop, TailEstimate, ANALYTIC_TOLERANCE};
use crate::scalar::{Real, C};

/// Conic determinant below this (relative) means reducible.
pub const REDUCIBLE_THRESHOLD: f64 = 1e-10;

/// Affine linear form `α x + β y + γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm<T: Real> {
    pub alpha: C<T>,
    pub beta: C<T>,
    pub gamma: C<T>,
}

impl<T: Real> LinearForm<T> {
    pub fn as_poly(&self) -> BiPoly<T> {
        BiPoly::from_terms([((1, 0), self.alpha), ((0, 1), self.beta), ((0, 0), self.gamma)])
    }
}

/// `P/s = x′(a x′ + b y′) + c x′ + d y′ + e` in the rotated coordinates `(x′, y′) = U(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedConic<T: Real> {
    pub a: C<T>,
    pub b: C<T>,
    pub c: C<T>,
    pub d: C<T>,
    pub e: C<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConicKind {
    TwoPlanes,
    LawlorType,
    ParabolaType,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification<T: Real> {
    /// `P = s·f₁·f₂`.
    TwoPlanes {
        factors: [LinearForm<T>; 2],
        parallel: bool,
    },
    /// `X·Y = neck` with `X = x′ + d/b`, `Y = a x′ + b y′ + c − ad/b`.
    LawlorType { neck: C<T> },
    /// `Y = μ X²` with `X = x′ + c/2`, `Y = y′ + (e − c²/4)/d`.
    ParabolaType { mu: C<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult<T: Real> {
    pub classification: Classification<T>,
    /// Unitary `U` with `(x′, y′) = U (x, y)`.
    pub change: [[C<T>; 2]; 2],
    pub scale: C<T>,
    pub normalized: NormalizedConic<T>,
    /// Relative conic determinant used for the reducibility test.
    pub conic_determinant: T,
}

impl<T: Real> ClassificationResult<T> {
    pub fn kind(&self) -> ConicKind {
        match self.classification {
            Classification::TwoPlanes { .. } => ConicKind::TwoPlanes,
            Classification::LawlorType { .. } => ConicKind::LawlorType,
            Classification::ParabolaType { .. } => ConicKind::ParabolaType,
        }
    }

    /// `(x, y) = Uᴴ (x′, y′)`.
    pub fn to_original(&self, xp: C<T>, yp: C<T>) -> (C<T>, C<T>) {
        let u = &self.change;
        (
            u[0][0].conj() * xp + u[1][0].conj() * yp,
            u[0][1].conj() * xp + u[1][1].conj() * yp,
        )
    }

    /// Total curvature predicted for the rotated Lagrangian: `8π` for Lawlor necks, `4π` for
    /// parabolas, `0` for planes.
    pub fn predicted_total_curvature(&self) -> T {
        let pi = T::PI();
        match self.classification {
            Classification::TwoPlanes { .. } => T::zero(),
            Classification::LawlorType { .. } => T::lit(8.0) * pi,
            Classification::ParabolaType { .. } => T::lit(4.0) * pi,
        }
    }

    /// Holomorphic parametrization of the curve, truncated at `extent` times the neck scale.
    pub fn parametrization(&self, extent: T) -> Result<ComplexCurve<T>> {
        if !(extent > T::one()) {
            return Err(GeomError::InvalidArgument("extent must exceed 1".into()));
        }
        let NormalizedConic { a, b, c, d, e } = self.normalized;
        let u = self.change;
        let back = move |xp: C<T>, yp: C<T>| {
            (
                u[0][0].conj() * xp + u[1][0].conj() * yp,
                u[0][1].conj() * xp + u[1][1].conj() * yp,
            )
        };
        match self.classification {
            Classification::TwoPlanes { .. } => Err(GeomError::InvalidArgument(
                "reducible conic: parametrize each line separately".into(),
            )),
            Classification::LawlorType { neck } => {
                let shift_x = d / b;
                let shift_y = c - a * d / b;
                let map = move |w: C<T>| {
                    let xp = w - shift_x;
                    let v = neck / w - shift_y;
                    back(xp, (v - a * xp) / b)
                };
                let derivative = move |w: C<T>| back(C::new(T::one(), T::zero()), (-neck / (w * w) - a) / b);
                let r = neck.norm().sqrt();
                Ok(ComplexCurve {
                    map: Arc::new(map),
                    derivative: Arc::new(derivative),
                    domain: Domain::Annulus {
                        r0: r / extent,
                        r1: r * extent,
                    },
                    ends: vec![End::low(0), End::high(0)],
                    generators: vec![ParamLoop::circle(r)],
                    basepoint: vec![r, T::zero()],
                })
            }
            Classification::ParabolaType { .. } => {
                // X = √(−d)·w, Y = w² solves Y = −X²/d.
                let root = (-d).sqrt();
                let shift_y = (e - c * c * T::lit(0.25)) / d;
                let map = move |w: C<T>| back(root * w - c * T::half(), w * w - shift_y);
                let derivative = move |w: C<T>| back(root, w * T::two());
                let r = root.norm();
                Ok(ComplexCurve {
                    map: Arc::new(map),
                    derivative: Arc::new(derivative),
                    domain: Domain::Disk {
                        radius: r * extent,
                        core: r,
                    },
                    ends: vec![End::high(0)],
                    generators: vec![],
                    basepoint: vec![T::zero(), T::zero()],
                })
            }
        }
    }
}

type HoloFn<T> = dyn Fn(C<T>) -> (C<T>, C<T>) + Send + Sync;

/// Regular holomorphic map `w ↦ (x(w), y(w))` on a planar parameter domain.
#[derive(Clone)]
pub struct ComplexCurve<T: Real> {
    pub map: Arc<HoloFn<T>>,
    pub derivative: Arc<HoloFn<T>>,
    pub domain: Domain<T>,
    pub ends: Vec<End>,
    pub generators: Vec<ParamLoop<T>>,
    pub basepoint: Vec<T>,
}

impl<T: Real> ComplexCurve<T> {
    /// The affine line through `point` with direction `dir`, on a disk of the given radius.
    pub fn line(point: (C<T>, C<T>), dir: (C<T>, C<T>), radius: T) -> Self {
        Self {
            map: Arc::new(move |w| (point.0 + dir.0 * w, point.1 + dir.1 * w)),
            derivative: Arc::new(move |_| dir),
            domain: Domain::Disk { radius, core: radius },
            ends: vec![],
            generators: vec![],
            basepoint: vec![T::zero(), T::zero()],
        }
    }
}

/// Rotates a holomorphic curve into a certified Lagrangian patch.
pub fn curve_to_lagrangian<T: Real>(curve: &ComplexCurve<T>) -> Result<LagrangianPatch<T>> {
    let (m, dm) = (curve.map.clone(), curve.derivative.clone());
    let chart = RotatedCurveChart::new(move |w| m(w), move |w| dm(w));
    let patch = LagrangianPatch::new("curve", Arc::new(chart), curve.domain.clone())?
        .with_basepoint(curve.basepoint.clone())
        .with_ends(curve.ends.clone())
        .with_generators(curve.generators.clone())
        .with_area_ratio_bound(T::two_pi());
    match patch.certify(T::lit(ANALYTIC_TOLERANCE)) {
        Err(GeomError::NotImmersed { param, .. }) => Err(GeomError::SingularCurve(param)),
        other => other,
    }
}

fn conic_matrix<T: Real>(p: &BiPoly<T>) -> [[C<T>; 3]; 3] {
    let h = T::half();
    [
        [p.coeff(2, 0), p.coeff(1, 1) * h, p.coeff(1, 0) * h],
        [p.coeff(1, 1) * h, p.coeff(0, 2), p.coeff(0, 1) * h],
        [p.coeff(1, 0) * h, p.coeff(0, 1) * h, p.coeff(0, 0)],
    ]
}

fn det3<T: Real>(m: &[[C<T>; 3]; 3]) -> C<T> {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Degree-two classification: reducible pairs of lines, Lawlor-type necks `XY = c`, and
/// parabolas `Y = μX²`.
pub fn classify_degree2<T: Real>(p: &BiPoly<T>) -> Result<ClassificationResult<T>> {
    let deg = p.degree().ok_or(GeomError::ZeroPolynomial)?;
    if deg != 2 {
        return Err(GeomError::UnsupportedDegree {
            found: deg,
            supported: "2".into(),
        });
    }
    let m = conic_matrix(p);
    let big = m.iter().flatten().map(|c| c.norm()).fold(T::zero(), T::max);
    let rel = det3(&m).norm() / (big * big * big);
    let threshold = T::lit(REDUCIBLE_THRESHOLD);
    if rel > threshold && rel <= T::lit(10.0) * threshold {
        return Err(GeomError::Ambiguous(format!(
            "relative conic determinant {:e} is within a factor 10 of the reducibility threshold",
            rel.as_f64()
        )));
    }
    let reducible = rel <= threshold;

    let top = factor_top(&p.homogeneous_part(2))?;
    let first = top.factors[0];
    let second: LinearFactor<T> = top.factors.get(1).copied().unwrap_or(first);
    let (al1, be1) = (first.alpha, first.beta);
    let change = [[al1, be1], [-be1.conj(), al1.conj()]];
    let a = second.alpha * al1.conj() + second.beta * be1.conj();
    let b = al1 * second.beta - second.alpha * be1;
    let s = top.scale;
    let (dl, el) = (p.coeff(1, 0), p.coeff(0, 1));
    let normalized = NormalizedConic {
        a,
        b: if top.factors.len() == 1 { C::zero() } else { b },
        c: (dl * al1.conj() + el * be1.conj()) / s,
        d: (el * al1 - dl * be1) / s,
        e: p.coeff(0, 0) / s,
    };
    let NormalizedConic { a, b, c, d, e } = normalized;
    let classification = if reducible {
        if !b.is_zero() {
            let g1 = d / b;
            let g2 = c - a * d / b;
            Classification::TwoPlanes {
                factors: [
                    LinearForm {
                        alpha: al1,
                        beta: be1,
                        gamma: g1,
                    },
                    LinearForm {
                        alpha: second.alpha,
                        beta: second.beta,
                        gamma: g2,
                    },
                ],
                parallel: false,
            }
        } else {
            // s(x′² + c x′ + e); the y′ coefficient vanishes for a reducible parabola.
            let disc = (c * c - e * T::lit(4.0)).sqrt();
            let r1 = (-c + disc) * T::half();
            let r2 = (-c - disc) * T::half();
            let line = |r: C<T>| LinearForm {
                alpha: al1,
                beta: be1,
                gamma: -r,
            };
            Classification::TwoPlanes {
                factors: [line(r1), line(r2)],
                parallel: true,
            }
        }
    } else if !b.is_zero() {
        let neck = -(e - d / b * (c - a * d / b));
        Classification::LawlorType { neck }
    } else {
        Classification::ParabolaType { mu: -d.inv() }
    };
    Ok(ClassificationResult {
        classification,
        change,
        scale: s,
        normalized,
        conic_determinant: rel,
    })
}

/// `∫|A|²` over a patch with fitted tails.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalCurvature<T> {
    pub value: T,
    pub truncated: Integral<T>,
    pub tails: Vec<TailEstimate<T>>,
}

pub fn total_curvature<T: Real>(patch: &LagrangianPatch<T>, res: usize) -> Result<TotalCurvature<T>> {
    let field = |p: &[T]| patch.second_fundamental_norm(p);
    let t = patch.integrate_with_tails(&field, res)?;
    Ok(TotalCurvature {
        value: t.value(),
        truncated: t.truncated,
        tails: t.tails,
    })
}

/// Total curvature of the rotated curve `{P = 0}` for degree one or two. Lines and reducible
/// conics give zero; irreducible conics are parametrized out to `extent` times the neck scale.
pub fn poly_total_curvature<T: Real>(p: &BiPoly<T>, extent: T, res: usize) -> Result<TotalCurvature<T>> {
    let zero = || TotalCurvature {
        value: T::zero(),
        truncated: Integral {
            value: T::zero(),
            error: T::zero(),
            resolution: 0,
        },
        tails: vec![],
    };
    match p.degree() {
        None => Err(GeomError::ZeroPolynomial),
        Some(0) => Err(GeomError::InvalidArgument("constant polynomial has no curve".into())),
        Some(1) => Ok(zero()),
        Some(2) => {
            let cls = classify_degree2(p)?;
            if cls.kind() == ConicKind::TwoPlanes {
                return Ok(zero());
            }
            let patch = curve_to_lagrangian(&cls.parametrization(extent)?)?;
            total_curvature(&patch, res)
        }
        Some(d) => Err(GeomError::UnsupportedDegree {
            found: d,
            supported: "1..=2".into(),
        }),
    }
}

/// Lagrangian patch of `{P = 0}` for degree one or irreducible degree two.
pub fn poly_to_lagrangian<T: Real>(p: &BiPoly<T>, extent: T) -> Result<LagrangianPatch<T>> {
    match p.degree() {
        Some(1) => {
            let (al, be, ga) = (p.coeff(1, 0), p.coeff(0, 1), p.coeff(0, 0));
            let n2 = al.norm_sqr() + be.norm_sqr();
            // closest point to the origin and a unit direction
            let point = (-ga * al.conj() / n2, -ga * be.conj() / n2);
            let n = n2.sqrt();
            let dir = (-be / n, al / n);
            curve_to_lagrangian(&ComplexCurve::line(point, dir, extent))
        }
        Some(2) => curve_to_lagrangian(&classify_degree2(p)?.parametrization(extent)?),
        Some(d) => Err(GeomError::UnsupportedDegree {
            found: d,
            supported: "1..=2".into(),
        }),
        None => Err(GeomError::ZeroPolynomial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::parse_poly;
    use crate::gallery::{make_lawlor2, make_sl_z2};

    #[test]
    fn classifies_examples() {
        let r = classify_degree2(&parse_poly::<f64>("x*y - 1").unwrap()).unwrap();
        match r.classification {
            Classification::LawlorType { neck } => assert!((neck - C::new(1.0, 0.0)).norm() < 1e-14),
            ref other => panic!("{other:?}"),
        }
        let r = classify_degree2(&parse_poly::<f64>("x^2 - y").unwrap()).unwrap();
        assert_eq!(r.kind(), ConicKind::ParabolaType);
        let r = classify_degree2(&parse_poly::<f64>("x^2 - 1").unwrap()).unwrap();
        match r.classification {
            Classification::TwoPlanes { factors, parallel } => {
                assert!(parallel);
                let prod = &factors[0].as_poly() * &factors[1].as_poly();
                assert!(prod.scale(r.scale).relative_distance(&parse_poly("x^2 - 1").unwrap()) < 1e-14);
            }
            ref other => panic!("{other:?}"),
        }
        let p = parse_poly::<f64>("(x + 2*y - 1)*(i*x - y + 3)").unwrap();
        let r = classify_degree2(&p).unwrap();
        match r.classification {
            Classification::TwoPlanes { factors, parallel } => {
                assert!(!parallel);
                let prod = (&factors[0].as_poly() * &factors[1].as_poly()).scale(r.scale);
                assert!(prod.relative_distance(&p) < 1e-12);
            }
            ref other => panic!("{other:?}"),
        }
        assert!(classify_degree2(&parse_poly::<f64>("x^3 - y").unwrap()).is_err());
        assert!(matches!(
            classify_degree2(&parse_poly::<f64>("x*y - 0.0000000001").unwrap()),
            Err(GeomError::Ambiguous(_))
        ));
    }

    #[test]
    fn rotated_normal_forms_match_the_gallery() {
        let lawlor = make_lawlor2(2.0f64, 0.0).unwrap();
        let patch = poly_to_lagrangian(&parse_poly::<f64>("x*y - 2").unwrap(), 20.0).unwrap();
        for p in [[1.0, 0.3], [0.5, -2.0], [3.0, 1.0]] {
            assert!((&patch.position(&p) - &lawlor.position(&p)).norm() < 1e-12);
        }
        let sl = make_sl_z2(1.0f64, 0.5).unwrap();
        let patch = poly_to_lagrangian(&parse_poly::<f64>("x^2 - (1 + 0.5*i)^2*y").unwrap(), 30.0).unwrap();
        for p in [[1.0, 0.3], [0.5, -2.0], [3.0, 1.0]] {
            assert!((&patch.position(&p) - &sl.position(&p)).norm() < 1e-12);
        }
        let line = poly_to_lagrangian(&parse_poly::<f64>("x + i*y - 1").unwrap(), 5.0).unwrap();
        assert!(line.second_fundamental_norm(&[0.4, 0.1]).unwrap() < 1e-12);
    }

    #[test]
    fn curve_points_satisfy_the_polynomial() {
        for s in ["x*y - 1", "x^2 + 3*x*y - i*x + 2*y - 5", "(x + i*y)^2 + x - y", "2*x^2 - 4*x*y + 2*y^2 + x + 1"] {
            let p = parse_poly::<f64>(s).unwrap();
            let r = classify_degree2(&p).unwrap();
            let curve = r.parametrization(10.0).unwrap();
            for w in [C::new(0.7, 0.2), C::new(-1.5, 0.4), C::new(0.1, -2.0)] {
                let (x, y) = (curve.map)(w);
                assert!(p.eval(x, y).norm() < 1e-10 * (1.0 + x.norm() + y.norm()).powi(2), "{s}");
            }
        }
    }

    #[test]
    fn total_curvature_of_normal_forms() {
        let pi = std::f64::consts::PI;
        let t = poly_total_curvature(&parse_poly::<f64>("x*y - 1").unwrap(), 20.0, 64).unwrap();
        assert!((t.value - 8.0 * pi).abs() < 0.02 * 8.0 * pi, "{}", t.value);
        let t = poly_total_curvature(&parse_poly::<f64>("x^2 - y").unwrap(), 30.0, 64).unwrap();
        assert!((t.value - 4.0 * pi).abs() < 0.02 * 4.0 * pi, "{}", t.value);
        assert_eq!(poly_total_curvature(&parse_poly::<f64>("x + y").unwrap(), 5.0, 64).unwrap().value, 0.0);
    }
}
