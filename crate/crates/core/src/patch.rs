//! Immersed Lagrangian pieces and their pointwise and integrated invariants.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::ambient::{omega_unchecked, volume_unchecked, CVector};
use crate::chart::{Chart, GridSpec, SampledChart};
use crate::domain::{Domain, End};
use crate::error::{GeomError, Result};
use crate::linalg::{gauss_legendre, linear_fit, Mat};
use crate::scalar::{wrap_angle, Real};

/// Default certification tolerance for closed-form charts.
pub const ANALYTIC_TOLERANCE: f64 = 1e-8;

/// Default relative finite-difference step for second derivatives of closed-form charts.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A closed path in the parameter domain, traversed for `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamLoop<T> {
    /// The periodic coordinate `axis` swept once, other coordinates fixed at `base`.
    Coordinate { axis: usize, base: Vec<T> },
    /// Circle of the given radius around `center` in parameters `(0, 1)`.
    Circle { center: [T; 2], radius: T },
    /// Piecewise linear path; the first and last vertex must coincide.
    Polyline(Vec<Vec<T>>),
}

impl<T: Real> ParamLoop<T> {
    pub fn circle(radius: T) -> Self {
        ParamLoop::Circle {
            center: [T::zero(), T::zero()],
            radius,
        }
    }

    fn point(&self, t: T) -> (Vec<T>, Vec<T>) {
        match self {
            ParamLoop::Coordinate { axis, base } => {
                let mut p = base.clone();
                p[*axis] = base[*axis] + T::two_pi() * t;
                let mut d = vec![T::zero(); base.len()];
                d[*axis] = T::two_pi();
                (p, d)
            }
            ParamLoop::Circle { center, radius } => {
                let a = T::two_pi() * t;
                let (c, s) = (a.cos(), a.sin());
                (
                    vec![center[0] + *radius * c, center[1] + *radius * s],
                    vec![-*radius * s * T::two_pi(), *radius * c * T::two_pi()],
                )
            }
            ParamLoop::Polyline(v) => {
                let m = v.len() - 1;
                let x = t * T::from_usize_lossy(m);
                let k = x.floor().to_usize().unwrap_or(0).min(m - 1);
                let u = x - T::from_usize_lossy(k);
                let fm = T::from_usize_lossy(m);
                let p = (0..v[k].len())
                    .map(|j| v[k][j] + u * (v[k + 1][j] - v[k][j]))
                    .collect();
                let d = (0..v[k].len()).map(|j| (v[k + 1][j] - v[k][j]) * fm).collect();
                (p, d)
            }
        }
    }

    fn closure_gap(&self) -> T {
        match self {
            ParamLoop::Polyline(v) => {
                if v.len() < 3 {
                    return T::infinity();
                }
                let (a, b) = (&v[0], &v[v.len() - 1]);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (*x - *y).abs())
                    .fold(T::zero(), T::max)
            }
            _ => T::zero(),
        }
    }

    fn is_smooth_periodic(&self) -> bool {
        !matches!(self, ParamLoop::Polyline(_))
    }
}

/// Pullback 1-forms that can be integrated along loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopForm {
    Liouville,
    DTheta,
}

/// Position, tangents and metric at one parameter point.
#[derive(Debug, Clone)]
pub struct PointFrame<T> {
    pub position: CVector<T>,
    pub tangents: Vec<CVector<T>>,
    pub metric: Mat<T>,
    pub metric_inverse: Mat<T>,
    /// `√det g`.
    pub volume: T,
}

impl<T: Real> PointFrame<T> {
    /// Component of `v` normal to the tangent space.
    pub fn normal_part(&self, v: &CVector<T>) -> CVector<T> {
        let n = self.tangents.len();
        let dots: Vec<T> = self.tangents.iter().map(|t| t.dot(v)).collect();
        let mut out = v.clone();
        for c in 0..n {
            let mut coef = T::zero();
            for d in 0..n {
                coef = coef + self.metric_inverse.get(c, d) * dots[d];
            }
            out.axpy(-coef, &self.tangents[c]);
        }
        out
    }
}

/// Full set of pointwise invariants at one parameter point.
#[derive(Debug, Clone)]
pub struct GeometrySample<T> {
    pub param: Vec<T>,
    pub position: CVector<T>,
    pub tangent: Vec<CVector<T>>,
    pub metric: Mat<T>,
    pub mean_curvature: CVector<T>,
    pub angle: T,
    pub a2: T,
    pub liouville_pullback: Vec<T>,
    pub dtheta: Vec<T>,
    /// `max_a |ω(H, ∂_a F) + ∂_a θ|`.
    pub angle_residual: T,
    /// `max_a |ω(x^⊥, ∂_a F) − λ(∂_a F)|`.
    pub liouville_residual: T,
}

/// Quadrature value with the Richardson refinement estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub resolution: usize,
}

/// Integral over the chart plus fitted contributions of the truncated ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TailedIntegral<T> {
    pub truncated: Integral<T>,
    pub tails: Vec<TailEstimate<T>>,
}

impl<T: Real> TailedIntegral<T> {
    pub fn value(&self) -> T {
        self.truncated.value + self.tails.iter().map(|t| t.value).sum::<T>()
    }
}

/// Power-law model `D(s) ≈ C s^p` of the slab density near an end, integrated to the boundary
/// of the natural coordinate range (`0` for low ends, `∞` for high ends).
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate<T> {
    pub end: End,
    pub exponent: T,
    pub value: T,
    pub r2: T,
}

pub type ScalarField<'a, T> = &'a (dyn Fn(&[T]) -> Result<T> + Sync);

/// A parametrized Lagrangian piece `F: D → Cⁿ`.
#[derive(Clone)]
pub struct LagrangianPatch<T: Real> {
    name: String,
    chart: Arc<dyn Chart<T>>,
    domain: Domain<T>,
    orientation: T,
    basepoint: Vec<T>,
    certified: bool,
    certification_residual: Option<T>,
    fd_step: T,
    check_resolution: usize,
    ends: Vec<End>,
    generators: Vec<ParamLoop<T>>,
    area_ratio_bound: Option<T>,
}

impl<T: Real> std::fmt::Debug for LagrangianPatch<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianPatch")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("certified", &self.certified)
            .finish()
    }
}

fn params_f64<T: Real>(p: &[T]) -> Vec<f64> {
    p.iter().map(|x| x.as_f64()).collect()
}

impl<T: Real> LagrangianPatch<T> {
    pub fn new(name: impl Into<String>, chart: Arc<dyn Chart<T>>, domain: Domain<T>) -> Result<Self> {
        if chart.param_dim() != domain.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: chart.param_dim(),
                found: domain.dim(),
            });
        }
        if chart.target_dim() != chart.param_dim() {
            return Err(GeomError::DimensionMismatch {
                expected: chart.param_dim(),
                found: chart.target_dim(),
            });
        }
        let basepoint = domain.default_basepoint();
        Ok(Self {
            name: name.into(),
            chart,
            domain,
            orientation: T::one(),
            basepoint,
            certified: false,
            certification_residual: None,
            fd_step: T::lit(DEFAULT_FD_STEP),
            check_resolution: 24,
            ends: Vec::new(),
            generators: Vec::new(),
            area_ratio_bound: None,
        })
    }

    pub fn with_orientation(mut self, sign: T) -> Self {
        self.orientation = if sign < T::zero() { -T::one() } else { T::one() };
        self
    }

    pub fn with_basepoint(mut self, p: Vec<T>) -> Self {
        self.basepoint = p;
        self
    }

    pub fn with_ends(mut self, ends: Vec<End>) -> Self {
        self.ends = ends;
        self
    }

    pub fn with_generators(mut self, loops: Vec<ParamLoop<T>>) -> Self {
        self.generators = loops;
        self
    }

    /// Constant `C` with `Hⁿ(L ∩ B_r(x)) ≤ C rⁿ` for the complete surface this patch truncates.
    pub fn with_area_ratio_bound(mut self, c: T) -> Self {
        self.area_ratio_bound = Some(c);
        self
    }

    pub fn with_fd_step(mut self, h: T) -> Self {
        self.fd_step = h;
        self
    }

    pub fn with_check_resolution(mut self, res: usize) -> Self {
        self.check_resolution = res.max(2);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Complex dimension of the ambient space.
    pub fn n(&self) -> usize {
        self.chart.param_dim()
    }

    pub fn chart(&self) -> &Arc<dyn Chart<T>> {
        &self.chart
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn orientation(&self) -> T {
        self.orientation
    }

    pub fn basepoint(&self) -> &[T] {
        &self.basepoint
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn certification_residual(&self) -> Option<T> {
        self.certification_residual
    }

    pub fn ends(&self) -> &[End] {
        &self.ends
    }

    pub fn generators(&self) -> &[ParamLoop<T>] {
        &self.generators
    }

    pub fn area_ratio_bound(&self) -> Option<T> {
        self.area_ratio_bound
    }

    pub fn fd_step(&self) -> T {
        self.fd_step
    }

    /// Replaces chart and domain, keeping every other attribute. Certification is dropped.
    pub(crate) fn with_chart(&self, chart: Arc<dyn Chart<T>>, domain: Domain<T>) -> Self {
        let mut out = self.clone();
        out.chart = chart;
        out.domain = domain;
        out.certified = false;
        out.certification_residual = None;
        out
    }

    /// Marks the patch certified when a transformation is known to preserve the property.
    pub(crate) fn inherit_certification(mut self, residual: Option<T>) -> Self {
        self.certified = true;
        self.certification_residual = residual;
        self
    }

    fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(GeomError::NotCertified(
                self.certification_residual.map_or(f64::NAN, |r| r.as_f64()),
            ))
        }
    }

    pub fn position(&self, p: &[T]) -> CVector<T> {
        self.chart.position(p)
    }

    /// Per-axis finite-difference steps at `p`.
    pub fn fd_steps(&self, p: &[T]) -> Vec<T> {
        match self.chart.sample_spacing() {
            Some(h) => h,
            None => {
                let h = self.fd_step * self.domain.local_scale(p);
                vec![h; self.n()]
            }
        }
    }

    pub fn frame(&self, p: &[T]) -> Result<PointFrame<T>> {
        let position = self.chart.position(p);
        let tangents = self.chart.tangents(p);
        let n = tangents.len();
        let mut g = Mat::zeros(n);
        for a in 0..n {
            for b in a..n {
                let v = tangents[a].dot(&tangents[b]);
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        let det = g.det();
        let trace: T = (0..n).map(|a| g.get(a, a)).sum();
        if !(det > T::lit(1e-13) * trace.powi(n as i32)) || !det.is_finite() {
            return Err(GeomError::NotImmersed {
                param: params_f64(p),
                det: det.as_f64(),
            });
        }
        let metric_inverse = g.inverse().ok_or(GeomError::NotImmersed {
            param: params_f64(p),
            det: det.as_f64(),
        })?;
        Ok(PointFrame {
            position,
            tangents,
            metric: g,
            metric_inverse,
            volume: det.sqrt(),
        })
    }

    pub fn induced_metric(&self, p: &[T]) -> Result<Mat<T>> {
        self.frame(p).map(|f| f.metric)
    }

    /// Points at which certification and pointwise sweeps are evaluated.
    pub fn check_points(&self) -> Vec<Vec<T>> {
        self.domain
            .nodes(self.check_resolution)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    }

    /// Maximum of `|ω(∂_a F, ∂_b F)|` over the check points. Sets the certification flag iff it
    /// does not exceed `tol`.
    pub fn check_lagrangian(&mut self, tol: T) -> T {
        let pts = self.check_points();
        let chart = &self.chart;
        let res = pts
            .par_iter()
            .map(|p| {
                let t = chart.tangents(p);
                let mut m = T::zero();
                for a in 0..t.len() {
                    for b in a + 1..t.len() {
                        m = m.max(omega_unchecked(&t[a], &t[b]).abs());
                    }
                }
                m
            })
            .collect::<Vec<T>>()
            .into_iter()
            .fold(T::zero(), |acc, x| if x.is_nan() { x } else { acc.max(x) });
        self.certified = res <= tol;
        self.certification_residual = Some(res);
        res
    }

    /// Runs [`LagrangianPatch::check_lagrangian`] and fails if the tolerance is not met.
    pub fn certify(mut self, tol: T) -> Result<Self> {
        let r = self.check_lagrangian(tol);
        if self.certified {
            Ok(self)
        } else {
            Err(GeomError::NotCertified(r.as_f64()))
        }
    }

    /// Angle in `(−π, π]` of `orientation · Ω(∂F) / √det g`.
    pub fn principal_angle(&self, p: &[T]) -> Result<T> {
        let f = self.frame(p)?;
        self.principal_angle_of(p, &f)
    }

    fn principal_angle_of(&self, p: &[T], f: &PointFrame<T>) -> Result<T> {
        let z = volume_unchecked(&f.tangents) * self.orientation;
        let mag = z.norm();
        if !(mag > T::lit(1e-12) * f.volume) {
            return Err(GeomError::ZeroVolume(params_f64(p)));
        }
        Ok(z.im.atan2(z.re))
    }

    /// Continuous branch of the Lagrangian angle, continued from the basepoint along the domain
    /// path. The basepoint value is taken in `(−π, π]`.
    pub fn lagrangian_angle(&self, p: &[T]) -> Result<T> {
        self.require_certified()?;
        let mut steps = 16usize;
        loop {
            match self.continue_angle(p, steps)? {
                Some(theta) => return Ok(theta),
                None if steps < 4096 => steps *= 4,
                None => return Ok(self.continue_angle_unchecked(p, steps)?),
            }
        }
    }

    fn continue_angle(&self, p: &[T], steps: usize) -> Result<Option<T>> {
        let mut prev = self.principal_angle(&self.basepoint)?;
        let mut acc = prev;
        for k in 1..=steps {
            let t = T::from_usize_lossy(k) / T::from_usize_lossy(steps);
            let (q, _) = self.domain.path(&self.basepoint, p, t);
            let cur = self.principal_angle(&q)?;
            let d = wrap_angle(cur - prev);
            if d.abs() > T::FRAC_PI_4() {
                return Ok(None);
            }
            acc = acc + d;
            prev = cur;
        }
        Ok(Some(acc))
    }

    fn continue_angle_unchecked(&self, p: &[T], steps: usize) -> Result<T> {
        let mut prev = self.principal_angle(&self.basepoint)?;
        let mut acc = prev;
        for k in 1..=steps {
            let t = T::from_usize_lossy(k) / T::from_usize_lossy(steps);
            let (q, _) = self.domain.path(&self.basepoint, p, t);
            let cur = self.principal_angle(&q)?;
            acc = acc + wrap_angle(cur - prev);
            prev = cur;
        }
        Ok(acc)
    }

    /// `∂_a θ` by centered differences of the principal angle.
    pub fn angle_differential(&self, p: &[T]) -> Result<Vec<T>> {
        let h = self.fd_steps(p);
        let mut q = p.to_vec();
        let mut out = Vec::with_capacity(p.len());
        for a in 0..p.len() {
            q[a] = p[a] + h[a];
            let tp = self.principal_angle(&q)?;
            q[a] = p[a] - h[a];
            let tm = self.principal_angle(&q)?;
            q[a] = p[a];
            out.push(wrap_angle(tp - tm) / (T::two() * h[a]));
        }
        Ok(out)
    }

    /// Normal parts `A_ab` of the second derivatives.
    fn second_fundamental(&self, p: &[T], f: &PointFrame<T>) -> Vec<Vec<CVector<T>>> {
        let hess = self.chart.hessian(p, &self.fd_steps(p));
        hess.iter()
            .map(|row| row.iter().map(|v| f.normal_part(v)).collect())
            .collect()
    }

    fn mean_curvature_of(&self, f: &PointFrame<T>, a: &[Vec<CVector<T>>]) -> CVector<T> {
        let n = a.len();
        let mut h = CVector::zeros(self.n());
        for i in 0..n {
            for j in 0..n {
                h.axpy(f.metric_inverse.get(i, j), &a[i][j]);
            }
        }
        h
    }

    fn a2_of(&self, f: &PointFrame<T>, a: &[Vec<CVector<T>>]) -> T {
        let n = a.len();
        let gi = &f.metric_inverse;
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let w = gi.get(i, k) * gi.get(j, l);
                        if w != T::zero() {
                            s = s + w * a[i][j].dot(&a[k][l]);
                        }
                    }
                }
            }
        }
        s.max(T::zero())
    }

    pub fn mean_curvature(&self, p: &[T]) -> Result<CVector<T>> {
        self.mean_curvature_with_residual(p).map(|(h, _)| h)
    }

    /// `H` together with `max_a |ω(H, ∂_a F) + ∂_a θ|`.
    pub fn mean_curvature_with_residual(&self, p: &[T]) -> Result<(CVector<T>, T)> {
        self.require_certified()?;
        let f = self.frame(p)?;
        let a = self.second_fundamental(p, &f);
        let h = self.mean_curvature_of(&f, &a);
        let dtheta = self.angle_differential(p)?;
        let res = f
            .tangents
            .iter()
            .zip(&dtheta)
            .map(|(t, d)| (omega_unchecked(&h, t) + *d).abs())
            .fold(T::zero(), T::max);
        Ok((h, res))
    }

    /// `|A|²`.
    pub fn second_fundamental_norm(&self, p: &[T]) -> Result<T> {
        self.require_certified()?;
        let f = self.frame(p)?;
        let a = self.second_fundamental(p, &f);
        Ok(self.a2_of(&f, &a))
    }

    /// Gauss curvature of the induced metric by the Brioschi formula, from centered differences
    /// of the metric alone. Surfaces only.
    pub fn gauss_curvature(&self, p: &[T]) -> Result<T> {
        if self.n() != 2 {
            return Err(GeomError::DimensionMismatch {
                expected: 2,
                found: self.n(),
            });
        }
        let h: Vec<T> = match self.chart.sample_spacing() {
            Some(h) => h,
            None => vec![T::lit(1e-3) * self.domain.local_scale(p); 2],
        };
        let g = |du: i32, dv: i32| -> Result<(T, T, T)> {
            let q = [
                p[0] + T::from_i32(du).unwrap() * h[0],
                p[1] + T::from_i32(dv).unwrap() * h[1],
            ];
            let m = self.induced_metric(&q)?;
            Ok((m.get(0, 0), m.get(0, 1), m.get(1, 1)))
        };
        let (e, f, gg) = g(0, 0)?;
        let (e_up, f_up, g_up) = g(1, 0)?;
        let (e_um, f_um, g_um) = g(-1, 0)?;
        let (e_vp, f_vp, g_vp) = g(0, 1)?;
        let (e_vm, f_vm, g_vm) = g(0, -1)?;
        let (_, f_pp, _) = g(1, 1)?;
        let (_, f_pm, _) = g(1, -1)?;
        let (_, f_mp, _) = g(-1, 1)?;
        let (_, f_mm, _) = g(-1, -1)?;
        let two = T::two();
        let (hu, hv) = (h[0], h[1]);
        let e_u = (e_up - e_um) / (two * hu);
        let e_v = (e_vp - e_vm) / (two * hv);
        let f_u = (f_up - f_um) / (two * hu);
        let f_v = (f_vp - f_vm) / (two * hv);
        let g_u = (g_up - g_um) / (two * hu);
        let g_v = (g_vp - g_vm) / (two * hv);
        let e_vv = (e_vp - two * e + e_vm) / (hv * hv);
        let g_uu = (g_up - two * gg + g_um) / (hu * hu);
        let f_uv = (f_pp - f_pm - f_mp + f_mm) / (T::lit(4.0) * hu * hv);
        let hf = T::half();
        let m1 = Mat {
            n: 3,
            data: vec![
                -hf * e_vv + f_uv - hf * g_uu,
                hf * e_u,
                f_u - hf * e_v,
                f_v - hf * g_u,
                e,
                f,
                hf * g_v,
                f,
                gg,
            ],
        };
        let m2 = Mat {
            n: 3,
            data: vec![
                T::zero(),
                hf * e_v,
                hf * g_u,
                hf * e_v,
                e,
                f,
                hf * g_u,
                f,
                gg,
            ],
        };
        let w = e * gg - f * f;
        Ok((m1.det() - m2.det()) / (w * w))
    }

    pub fn pullback_liouville(&self, p: &[T]) -> Result<Vec<T>> {
        self.pullback_liouville_with_residual(p).map(|(l, _)| l)
    }

    /// `λ(∂_a F)` together with `max_a |ω(x^⊥, ∂_a F) − λ(∂_a F)|`.
    pub fn pullback_liouville_with_residual(&self, p: &[T]) -> Result<(Vec<T>, T)> {
        self.require_certified()?;
        let f = self.frame(p)?;
        Ok(self.liouville_of(&f))
    }

    fn liouville_of(&self, f: &PointFrame<T>) -> (Vec<T>, T) {
        let xperp = f.normal_part(&f.position);
        let lam: Vec<T> = f
            .tangents
            .iter()
            .map(|t| omega_unchecked(&f.position, t))
            .collect();
        let res = f
            .tangents
            .iter()
            .zip(&lam)
            .map(|(t, l)| (omega_unchecked(&xperp, t) - *l).abs())
            .fold(T::zero(), T::max);
        (lam, res)
    }

    /// Every pointwise invariant at `p`. The angle is the continued branch.
    pub fn sample(&self, p: &[T]) -> Result<GeometrySample<T>> {
        self.require_certified()?;
        let f = self.frame(p)?;
        let a = self.second_fundamental(p, &f);
        let h = self.mean_curvature_of(&f, &a);
        let a2 = self.a2_of(&f, &a);
        let dtheta = self.angle_differential(p)?;
        let angle_residual = f
            .tangents
            .iter()
            .zip(&dtheta)
            .map(|(t, d)| (omega_unchecked(&h, t) + *d).abs())
            .fold(T::zero(), T::max);
        let (lam, liouville_residual) = self.liouville_of(&f);
        let angle = self.lagrangian_angle(p)?;
        Ok(GeometrySample {
            param: p.to_vec(),
            position: f.position,
            tangent: f.tangents,
            metric: f.metric,
            mean_curvature: h,
            angle,
            a2,
            liouville_pullback: lam,
            dtheta,
            angle_residual,
            liouville_residual,
        })
    }

    /// Line integral of a pullback form along a closed parameter loop.
    pub fn loop_integral(&self, path: &ParamLoop<T>, form: LoopForm, nodes: usize) -> Result<T> {
        self.require_certified()?;
        let gap = path.closure_gap();
        if gap > T::lit(1e-12) {
            return Err(GeomError::OpenPath(gap.as_f64()));
        }
        let nodes = nodes.max(8);
        match form {
            LoopForm::Liouville => {
                let integrand = |t: T| -> Result<T> {
                    let (q, dq) = path.point(t);
                    if !self.domain.contains(&q) {
                        return Err(GeomError::OutsideDomain(params_f64(&q)));
                    }
                    let x = self.chart.position(&q);
                    let tang = self.chart.tangents(&q);
                    let mut v = CVector::zeros(self.n());
                    for (a, t) in tang.iter().enumerate() {
                        v.axpy(dq[a], t);
                    }
                    Ok(omega_unchecked(&x, &v))
                };
                if path.is_smooth_periodic() {
                    let w = T::one() / T::from_usize_lossy(nodes);
                    let mut s = T::zero();
                    for k in 0..nodes {
                        s = s + integrand(T::from_usize_lossy(k) * w)? * w;
                    }
                    Ok(s)
                } else {
                    let ParamLoop::Polyline(v) = path else {
                        unreachable!()
                    };
                    let segs = v.len() - 1;
                    let gl = gauss_legendre::<T>(16);
                    let panels = (nodes / (16 * segs)).max(1);
                    let seg_w = T::one() / T::from_usize_lossy(segs * panels);
                    let mut s = T::zero();
                    for k in 0..segs * panels {
                        let t0 = T::from_usize_lossy(k) * seg_w;
                        for &(x, w) in &gl {
                            let t = t0 + (x + T::one()) * T::half() * seg_w;
                            s = s + integrand(t)? * w * T::half() * seg_w;
                        }
                    }
                    Ok(s)
                }
            }
            LoopForm::DTheta => {
                let mut n = nodes;
                loop {
                    let mut prev = None;
                    let mut acc = T::zero();
                    let mut ok = true;
                    for k in 0..=n {
                        let t = T::from_usize_lossy(k) / T::from_usize_lossy(n);
                        let (q, _) = path.point(t);
                        if !self.domain.contains(&q) {
                            return Err(GeomError::OutsideDomain(params_f64(&q)));
                        }
                        let th = self.principal_angle(&q)?;
                        if let Some(pr) = prev {
                            let d = wrap_angle(th - pr);
                            if d.abs() > T::FRAC_PI_4() {
                                ok = false;
                                break;
                            }
                            acc = acc + d;
                        }
                        prev = Some(th);
                    }
                    if ok || n > (1 << 16) {
                        return Ok(acc);
                    }
                    n *= 4;
                }
            }
        }
    }

    /// Primitive of the pullback Liouville form, after checking that it integrates to zero on
    /// every declared generator loop.
    pub fn exactness_potential(&self, basepoint: &[T], tol: T) -> Result<Potential<'_, T>> {
        self.require_certified()?;
        if !self.domain.contains(basepoint) {
            return Err(GeomError::OutsideDomain(params_f64(basepoint)));
        }
        let mut worst = T::zero();
        for g in &self.generators {
            let v = self.loop_integral(g, LoopForm::Liouville, 512)?;
            if v.abs() > worst.abs() {
                worst = v;
            }
        }
        if worst.abs() > tol {
            return Err(GeomError::NonExact(worst.as_f64()));
        }
        Ok(Potential {
            patch: self,
            base: basepoint.to_vec(),
        })
    }

    /// Minimum of `cos θ` over the domain nodes at resolution `res`.
    pub fn almost_calibrated_margin(&self, res: usize) -> Result<T> {
        self.require_certified()?;
        let nodes = self.domain.nodes(res);
        let vals = nodes
            .par_iter()
            .map(|(p, _)| self.principal_angle(p).map(|t| t.cos()))
            .collect::<Result<Vec<T>>>()?;
        Ok(vals.into_iter().fold(T::infinity(), T::min))
    }

    fn quadrature_at(&self, field: ScalarField<'_, T>, region: &Domain<T>, res: usize) -> Result<T> {
        let rows = region.node_rows(res);
        let sums = rows
            .par_iter()
            .map(|row| {
                let mut s = T::zero();
                for (p, w) in row {
                    if *w == T::zero() {
                        continue;
                    }
                    let f = field(p)?;
                    let vol = self.frame(p)?.volume;
                    s = s + f * vol * *w;
                }
                Ok(s)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(sums.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// `∫ field · √det g` over `region` (the whole domain when `None`), by the composite midpoint
    /// rule at resolutions `res` and `2·res` with Richardson extrapolation.
    pub fn integrate_scalar(
        &self,
        field: ScalarField<'_, T>,
        region: Option<&Domain<T>>,
        res: usize,
    ) -> Result<Integral<T>> {
        let region = region.unwrap_or(&self.domain);
        let nodes = region.nodes(2);
        let total: T = nodes.iter().map(|(_, w)| *w).sum();
        if !(total > T::zero()) {
            return Err(GeomError::EmptyRegion);
        }
        for (p, _) in region.nodes(8) {
            if !self.domain.contains(&p) {
                return Err(GeomError::OutsideDomain(params_f64(&p)));
            }
        }
        let res = res.max(2);
        let coarse = self.quadrature_at(field, region, res)?;
        let fine = self.quadrature_at(field, region, 2 * res)?;
        let three = T::lit(3.0);
        Ok(Integral {
            value: fine + (fine - coarse) / three,
            error: (fine - coarse).abs() / three,
            resolution: 2 * res,
        })
    }

    /// Slab density of `field · √det g` on the slice `natural[axis] = s`.
    pub fn slab_density(&self, field: ScalarField<'_, T>, axis: usize, s: T, res: usize) -> Result<T> {
        let pts = self.domain.slab(axis, s, res);
        let vals = pts
            .par_iter()
            .map(|(p, w)| Ok(field(p)? * self.frame(p)?.volume * *w))
            .collect::<Result<Vec<T>>>()?;
        Ok(vals.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// Fitted contribution of one end beyond the chart.
    pub fn tail_estimate(&self, field: ScalarField<'_, T>, end: End, res: usize) -> Result<TailEstimate<T>> {
        let (lo, hi) = self.domain.natural_bounds(end.axis);
        let q = T::lit(2.0f64.powf(0.2));
        let stations: Vec<T> = (0..6)
            .map(|k| {
                let f = q.powi(k);
                if end.high {
                    hi / f
                } else {
                    lo * f
                }
            })
            .collect();
        if stations.iter().any(|s| !(*s > T::zero()) || *s < lo || *s > hi) {
            return Err(GeomError::TailFit(format!(
                "end stations leave the range [{lo}, {hi}]"
            )));
        }
        let dens = stations
            .iter()
            .map(|s| self.slab_density(field, end.axis, *s, res).map(|d| d.abs()))
            .collect::<Result<Vec<T>>>()?;
        let scale = dens.iter().fold(T::zero(), |a, &b| a.max(b));
        let boundary = if end.high { hi } else { lo };
        if scale == T::zero() || dens.iter().all(|d| *d <= T::lit(1e-300).max(T::min_positive_value()) ) {
            return Ok(TailEstimate {
                end,
                exponent: T::neg_infinity(),
                value: T::zero(),
                r2: T::one(),
            });
        }
        if dens.iter().any(|d| *d == T::zero()) {
            return Err(GeomError::TailFit("slab density vanishes at some stations".into()));
        }
        let xs: Vec<T> = stations.iter().map(|s| s.ln()).collect();
        let ys: Vec<T> = dens.iter().map(|d| d.ln()).collect();
        let (p, c, r2) = linear_fit(&xs, &ys)
            .ok_or_else(|| GeomError::TailFit("degenerate station spacing".into()))?;
        let c = c.exp();
        let value = if end.high {
            if !(p < -T::one()) {
                return Err(GeomError::TailFit(format!(
                    "slab density decays like s^{p}, not integrable at infinity"
                )));
            }
            c * boundary.powf(p + T::one()) / (-(p + T::one()))
        } else {
            if !(p > -T::one()) {
                return Err(GeomError::TailFit(format!(
                    "slab density behaves like s^{p}, not integrable at zero"
                )));
            }
            c * boundary.powf(p + T::one()) / (p + T::one())
        };
        Ok(TailEstimate {
            end,
            exponent: p,
            value,
            r2,
        })
    }

    /// [`LagrangianPatch::integrate_scalar`] over the whole domain plus fitted tails on every
    /// declared end.
    pub fn integrate_with_tails(&self, field: ScalarField<'_, T>, res: usize) -> Result<TailedIntegral<T>> {
        let truncated = self.integrate_scalar(field, None, res)?;
        let tails = self
            .ends
            .iter()
            .map(|e| self.tail_estimate(field, *e, res))
            .collect::<Result<Vec<_>>>()?;
        Ok(TailedIntegral { truncated, tails })
    }

    /// Smallest distance from `x` to the image of the end faces; infinite without ends.
    pub fn coverage_radius(&self, x: &CVector<T>, res: usize) -> T {
        let mut r = T::infinity();
        for e in &self.ends {
            for p in self.domain.face(*e, res) {
                r = r.min((&self.chart.position(&p) - x).norm());
            }
        }
        r
    }

    /// Crossings of `|F − x| = r` and interior intervals along one line.
    fn ball_segments(
        &self,
        line: &crate::domain::Line<T>,
        x: &CVector<T>,
        r: T,
        samples: usize,
    ) -> (Vec<(T, T)>, Vec<T>) {
        let dist = |u: T| {
            let (p, _, _) = self.domain.line_point(line, u);
            (&self.chart.position(&p) - x).norm() - r
        };
        let us: Vec<T> = (0..=samples)
            .map(|k| T::from_usize_lossy(k) / T::from_usize_lossy(samples))
            .collect();
        let ds: Vec<T> = us.iter().map(|&u| dist(u)).collect();
        let mut crossings = Vec::new();
        for k in 0..samples {
            if (ds[k] < T::zero()) != (ds[k + 1] < T::zero()) {
                let (mut a, mut b) = (us[k], us[k + 1]);
                let fa_neg = ds[k] < T::zero();
                for _ in 0..100 {
                    let m = (a + b) * T::half();
                    if m <= a || m >= b {
                        break;
                    }
                    if (dist(m) < T::zero()) == fa_neg {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                crossings.push((a + b) * T::half());
            }
        }
        let mut intervals = Vec::new();
        let mut start = if ds[0] < T::zero() { Some(T::zero()) } else { None };
        for &c in &crossings {
            match start {
                Some(s) => {
                    intervals.push((s, c));
                    start = None;
                }
                None => start = Some(c),
            }
        }
        if let Some(s) = start {
            intervals.push((s, T::one()));
        }
        (intervals, crossings)
    }

    /// `∫_{F⁻¹(B_r(x))} field · √det g`, by integrating along the axis-0 lines of the domain
    /// between the crossings of the sphere.
    pub fn ball_integral(&self, field: ScalarField<'_, T>, x: &CVector<T>, r: T, res: usize) -> Result<T> {
        let lines = self.domain.lines(res);
        let gl = gauss_legendre::<T>(8);
        let samples = 4 * res;
        let panel = T::one() / T::from_usize_lossy(samples);
        let sums = lines
            .par_iter()
            .map(|line| {
                let (intervals, _) = self.ball_segments(line, x, r, samples);
                let mut s = T::zero();
                for (a, b) in intervals {
                    let m = ((b - a) / panel).ceil().to_usize().unwrap_or(1).max(1);
                    let w = (b - a) / T::from_usize_lossy(m);
                    for k in 0..m {
                        let u0 = a + T::from_usize_lossy(k) * w;
                        for &(t, gw) in &gl {
                            let u = u0 + (t + T::one()) * T::half() * w;
                            let (p, _, dens) = self.domain.line_point(line, u);
                            let v = field(&p)? * self.frame(&p)?.volume;
                            s = s + v * dens * gw * T::half() * w;
                        }
                    }
                }
                Ok(s * line.weight)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(sums.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// `d/dr` of [`LagrangianPatch::ball_integral`]: the sum over sphere crossings of the
    /// integrand divided by the radial speed of `|F − x|` along the line.
    pub fn ball_boundary_integral(
        &self,
        field: ScalarField<'_, T>,
        x: &CVector<T>,
        r: T,
        res: usize,
    ) -> Result<T> {
        let lines = self.domain.lines(res);
        let samples = 4 * res;
        let sums = lines
            .par_iter()
            .map(|line| {
                let (_, crossings) = self.ball_segments(line, x, r, samples);
                let mut s = T::zero();
                for u in crossings {
                    let (p, dp, dens) = self.domain.line_point(line, u);
                    let f = self.frame(&p)?;
                    let diff = &f.position - x;
                    let mut vel = CVector::zeros(self.n());
                    for (a, t) in f.tangents.iter().enumerate() {
                        vel.axpy(dp[a], t);
                    }
                    let speed = (diff.dot(&vel) / diff.norm()).abs();
                    if speed == T::zero() {
                        continue;
                    }
                    s = s + field(&p)? * f.volume * dens / speed;
                }
                Ok(s * line.weight)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(sums.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// Resamples the chart on a uniform grid, giving a patch whose derivatives are centered
    /// differences. The result is certified at `10·h²` (relative to the grid's squared extent).
    pub fn discretize(&self, grid: GridSpec<T>) -> Result<Self> {
        for k in [0usize, 1] {
            let corner: Vec<T> = (0..grid.lo.len())
                .map(|a| if k == 0 { grid.lo[a] } else { grid.hi[a] })
                .collect();
            if !self.domain.contains(&corner) {
                return Err(GeomError::OutsideDomain(params_f64(&corner)));
            }
        }
        let h = grid.spacing().into_iter().fold(T::zero(), T::max);
        let bounds: Vec<(T, T)> = (0..grid.lo.len()).map(|a| (grid.lo[a], grid.hi[a])).collect();
        let sampled = SampledChart::sample(self.chart.as_ref(), grid.clone());
        let mut out = self.with_chart(Arc::new(sampled), Domain::rectangle(&bounds));
        out.basepoint = out.domain.default_basepoint();
        out.ends.clear();
        out.generators.clear();
        out.check_lagrangian(T::lit(10.0) * h * h);
        Ok(out)
    }

    /// Writes one CSV row per domain node: parameters, position, θ, |A|², |H|, λ components.
    pub fn dump_csv<W: Write>(&self, out: W, res: usize) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..n).map(|a| format!("p{a}")).collect();
        for j in 1..=n {
            header.push(format!("x{j}"));
            header.push(format!("y{j}"));
        }
        header.extend(["theta".into(), "a2".into(), "h_norm".into()]);
        header.extend((0..n).map(|a| format!("lambda{a}")));
        w.write_record(&header)
            .map_err(|e| GeomError::InvalidArgument(e.to_string()))?;
        let rows = self
            .domain
            .nodes(res)
            .par_iter()
            .map(|(p, _)| self.sample(p))
            .collect::<Result<Vec<_>>>()?;
        for s in rows {
            let mut rec: Vec<String> = s.param.iter().map(|x| x.to_string()).collect();
            rec.extend(s.position.coords().iter().map(|x| x.to_string()));
            rec.push(s.angle.to_string());
            rec.push(s.a2.to_string());
            rec.push(s.mean_curvature.norm().to_string());
            rec.extend(s.liouville_pullback.iter().map(|x| x.to_string()));
            w.write_record(&rec)
                .map_err(|e| GeomError::InvalidArgument(e.to_string()))?;
        }
        w.flush().map_err(|e| GeomError::InvalidArgument(e.to_string()))?;
        Ok(())
    }
}

/// Primitive `β` of the pullback Liouville form on an exact patch.
pub struct Potential<'a, T: Real> {
    patch: &'a LagrangianPatch<T>,
    base: Vec<T>,
}

impl<T: Real> Potential<'_, T> {
    pub fn base(&self) -> &[T] {
        &self.base
    }

    fn segment(&self, a: &[T], b: &[T]) -> Result<T> {
        let gl = gauss_legendre::<T>(16);
        let panels = 4;
        let pw = T::one() / T::from_usize_lossy(panels);
        let mut s = T::zero();
        for k in 0..panels {
            let t0 = T::from_usize_lossy(k) * pw;
            for &(x, w) in &gl {
                let t = t0 + (x + T::one()) * T::half() * pw;
                let (q, dq) = self.patch.domain.path(a, b, t);
                if !self.patch.domain.contains(&q) {
                    return Err(GeomError::OutsideDomain(params_f64(&q)));
                }
                let pos = self.patch.chart.position(&q);
                let tang = self.patch.chart.tangents(&q);
                let mut v = CVector::zeros(self.patch.n());
                for (i, t) in tang.iter().enumerate() {
                    v.axpy(dq[i], t);
                }
                s = s + omega_unchecked(&pos, &v) * w * T::half() * pw;
            }
        }
        Ok(s)
    }

    /// `β(p)` along the domain path from the base point.
    pub fn value(&self, p: &[T]) -> Result<T> {
        self.segment(&self.base, p)
    }

    /// Largest discrepancy between the direct path to `p` and the path through `q`, over the
    /// given pairs.
    pub fn path_independence_residual(&self, pairs: &[(Vec<T>, Vec<T>)]) -> Result<T> {
        let mut worst = T::zero();
        for (p, q) in pairs {
            let direct = self.value(p)?;
            let via = self.value(q)? + self.segment(q, p)?;
            worst = worst.max((direct - via).abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::FnChart;

    fn complex_line() -> LagrangianPatch<f64> {
        let chart = FnChart::new(
            2,
            2,
            |p: &[f64]| CVector::from_raw(vec![p[0], p[1], 0.0, 0.0]),
            |_p: &[f64]| {
                vec![
                    CVector::from_raw(vec![1.0, 0.0, 0.0, 0.0]),
                    CVector::from_raw(vec![0.0, 1.0, 0.0, 0.0]),
                ]
            },
        );
        LagrangianPatch::new("complex-line", Arc::new(chart), Domain::rectangle(&[(-1.0, 1.0), (-1.0, 1.0)]))
            .unwrap()
    }

    fn identity_plane(extent: f64) -> LagrangianPatch<f64> {
        identity_plane_on(Domain::rectangle(&[(-extent, extent), (-extent, extent)]))
    }

    fn identity_plane_on(domain: Domain<f64>) -> LagrangianPatch<f64> {
        let chart = FnChart::new(
            2,
            2,
            |p: &[f64]| CVector::from_raw(vec![p[0], 0.0, p[1], 0.0]),
            |_p: &[f64]| {
                vec![
                    CVector::from_raw(vec![1.0, 0.0, 0.0, 0.0]),
                    CVector::from_raw(vec![0.0, 0.0, 1.0, 0.0]),
                ]
            },
        );
        LagrangianPatch::new("plane", Arc::new(chart), domain)
        .unwrap()
        .certify(1e-12)
        .unwrap()
    }

    #[test]
    fn complex_line_is_not_lagrangian() {
        let mut p = complex_line();
        let r = p.check_lagrangian(1e-8);
        assert!((r - 1.0).abs() < 1e-15);
        assert!(!p.is_certified());
        assert!(matches!(p.mean_curvature(&[0.0, 0.0]), Err(GeomError::NotCertified(_))));
    }

    #[test]
    fn plane_invariants_vanish() {
        let p = identity_plane(1.0);
        let s = p.sample(&[0.2, -0.3]).unwrap();
        assert_eq!(s.mean_curvature.norm(), 0.0);
        assert_eq!(s.a2, 0.0);
        assert_eq!(s.angle, 0.0);
        let g = p.induced_metric(&[0.1, 0.1]).unwrap();
        assert_eq!(g, Mat::identity(2));
    }

    #[test]
    fn unit_square_area() {
        let p = identity_plane(0.5);
        let one = |_: &[f64]| Ok(1.0);
        let i = p.integrate_scalar(&one, None, 4).unwrap();
        assert!((i.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_integral_of_plane_is_disk_area() {
        let p = identity_plane_on(Domain::Disk { radius: 3.0, core: 1.0 });
        let one = |_: &[f64]| Ok(1.0);
        let pi = std::f64::consts::PI;
        let a = p.ball_integral(&one, &CVector::zeros(2), 1.0, 64).unwrap();
        assert!((a - pi).abs() < 1e-10, "{a}");
        let d = p.ball_boundary_integral(&one, &CVector::zeros(2), 1.0, 64).unwrap();
        assert!((d - 2.0 * pi).abs() < 1e-10, "{d}");
        // Off-center balls cut the polar lines obliquely.
        let x = CVector::from_raw(vec![0.5, 0.0, 0.0, 0.0]);
        let a = p.ball_integral(&one, &x, 1.0, 256).unwrap();
        assert!((a - pi).abs() < 1e-4, "{a}");
    }

    #[test]
    fn open_polyline_is_rejected() {
        let p = identity_plane(1.0);
        let path = ParamLoop::Polyline(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.5]]);
        assert!(matches!(
            p.loop_integral(&path, LoopForm::Liouville, 64),
            Err(GeomError::OpenPath(_))
        ));
        let outside = ParamLoop::circle(5.0);
        assert!(matches!(
            p.loop_integral(&outside, LoopForm::Liouville, 64),
            Err(GeomError::OutsideDomain(_))
        ));
    }

    #[test]
    fn liouville_on_plane_through_origin_vanishes() {
        let p = identity_plane(1.0);
        let sq = ParamLoop::Polyline(vec![
            vec![-0.5, -0.5],
            vec![0.5, -0.5],
            vec![0.5, 0.5],
            vec![-0.5, 0.5],
            vec![-0.5, -0.5],
        ]);
        assert_eq!(p.loop_integral(&sq, LoopForm::Liouville, 128).unwrap(), 0.0);
        let beta = p.exactness_potential(&[0.0, 0.0], 1e-12).unwrap();
        assert_eq!(beta.value(&[0.7, -0.2]).unwrap(), 0.0);
    }
}
