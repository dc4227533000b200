//! Backwards heat kernels, Gaussian density ratios, area ratios and parabolic rescaling.

use std::sync::Arc;
use std::time::Instant;

use statrs::function::gamma::{gamma, gamma_ur};

use crate::ambient::CVector;
use crate::chart::AffineChart;
use crate::error::{GeomError, Result};
use crate::gallery::PlaneSpec;
use crate::patch::LagrangianPatch;
use crate::report::{Norm, VerificationReport};
use crate::scalar::Real;

/// Centre `x₀`, scale `l` and time `t < l` of a backwards heat kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityQuery<T> {
    center: CVector<T>,
    scale: T,
    time: T,
}

impl<T: Real> DensityQuery<T> {
    pub fn new(center: CVector<T>, scale: T, time: T) -> Result<Self> {
        if !(scale > T::zero()) || !(scale - time > T::zero()) || !time.is_finite() {
            return Err(GeomError::InvalidArgument(format!(
                "need l > 0 and t < l (got l = {scale}, t = {time})"
            )));
        }
        Ok(Self {
            center,
            scale,
            time,
        })
    }

    /// Query at time zero.
    pub fn at(center: CVector<T>, scale: T) -> Result<Self> {
        Self::new(center, scale, T::zero())
    }

    pub fn center(&self) -> &CVector<T> {
        &self.center
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn time(&self) -> T {
        self.time
    }

    /// `τ = l − t`.
    pub fn tau(&self) -> T {
        self.scale - self.time
    }
}

/// `exp(−|x−x₀|²/4τ) / (4πτ)^{n/2}`.
pub fn heat_kernel<T: Real>(q: &DensityQuery<T>, x: &CVector<T>) -> Result<T> {
    if x.n() != q.center.n() {
        return Err(GeomError::DimensionMismatch {
            expected: q.center.n(),
            found: x.n(),
        });
    }
    Ok(kernel_unchecked(q, x))
}

fn kernel_unchecked<T: Real>(q: &DensityQuery<T>, x: &CVector<T>) -> T {
    let tau = q.tau();
    let n = T::from_usize_lossy(x.n());
    let d2 = (x - &q.center).norm_sqr();
    (-d2 / (T::lit(4.0) * tau)).exp() / (T::lit(4.0) * T::PI() * tau).powf(n / T::two())
}

/// Bound on `∫_{L∖B_R(x₀)} Φ` for an `n`-dimensional `L` with `Hⁿ(L ∩ B_r) ≤ C rⁿ`:
/// `C π^{−n/2} Γ(n/2 + 1, R²/4τ)`.
pub fn gaussian_tail_bound(area_ratio: f64, n: usize, tau: f64, radius: f64) -> f64 {
    let a = n as f64 / 2.0 + 1.0;
    let u = radius * radius / (4.0 * tau);
    area_ratio * std::f64::consts::PI.powf(-(n as f64) / 2.0) * gamma_ur(a, u) * gamma(a)
}

/// Smallest radius (to 0.1% in `R²/4τ`) at which [`gaussian_tail_bound`] drops below `tol`.
pub fn required_radius(area_ratio: f64, n: usize, tau: f64, tol: f64) -> f64 {
    let bound = |u: f64| gaussian_tail_bound(area_ratio, n, tau, (4.0 * tau * u).sqrt());
    let mut hi = 1.0;
    while bound(hi) > tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 * hi {
        let m = 0.5 * (lo + hi);
        if bound(m) > tol {
            lo = m;
        } else {
            hi = m;
        }
    }
    (4.0 * tau * hi).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate<T> {
    pub value: T,
    /// Sum of the rigorous Gaussian tail bounds of the truncated parts.
    pub tail_bound: T,
    /// Richardson estimate of the quadrature error.
    pub quad_error: T,
    /// Smallest chart coverage radius among the patches.
    pub truncation_radius: T,
    pub resolution: usize,
}

/// Gaussian density `Θ = Σ ∫_L Φ_{(x₀,l)}` over several patches. Each patch must declare an
/// area-ratio bound; its chart must reach far enough from `x₀` that the discarded tail is
/// below `tol / 2` in total.
pub fn gaussian_density<T: Real>(
    patches: &[&LagrangianPatch<T>],
    q: &DensityQuery<T>,
    tol: T,
) -> Result<DensityEstimate<T>> {
    let tau = q.tau().as_f64();
    let share = tol.as_f64() / (2.0 * patches.len().max(1) as f64);
    let mut value = T::zero();
    let mut tail_total = 0.0;
    let mut quad_error = T::zero();
    let mut trunc = T::infinity();
    let mut resolution = 0;
    for patch in patches {
        if !patch.is_certified() {
            return Err(GeomError::NotCertified(
                patch.certification_residual().map_or(f64::NAN, |r| r.as_f64()),
            ));
        }
        if patch.n() != q.center.n() {
            return Err(GeomError::DimensionMismatch {
                expected: q.center.n(),
                found: patch.n(),
            });
        }
        let c = patch
            .area_ratio_bound()
            .ok_or_else(|| {
                GeomError::InvalidArgument(format!(
                    "patch '{}' declares no area-ratio bound",
                    patch.name()
                ))
            })?
            .as_f64();
        let n = patch.n();
        let coverage = patch.coverage_radius(&q.center, 64);
        let tail = if coverage.is_infinite() {
            0.0
        } else {
            let need = required_radius(c, n, tau, share);
            if coverage.as_f64() < need {
                return Err(GeomError::InsufficientTruncation {
                    required: need,
                    available: coverage.as_f64(),
                });
            }
            gaussian_tail_bound(c, n, tau, coverage.as_f64())
        };
        tail_total += tail;
        trunc = trunc.min(coverage);

        let field = |p: &[T]| Ok(kernel_unchecked(q, &patch.position(p)));
        // Successive Richardson values; their difference bounds the error of the later one far
        // more tightly than the single-level estimate.
        let mut res = 16;
        let mut prev = patch.integrate_scalar(&field, None, res)?;
        let est = loop {
            res *= 2;
            let mut est = patch.integrate_scalar(&field, None, res)?;
            est.error = (est.value - prev.value).abs();
            if est.error.as_f64() <= share || res >= 512 {
                break est;
            }
            prev = est;
        };
        value = value + est.value;
        quad_error = quad_error + est.error;
        resolution = resolution.max(est.resolution);
    }
    Ok(DensityEstimate {
        value,
        tail_bound: T::lit(tail_total),
        quad_error,
        truncation_radius: trunc,
        resolution,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaRatio<T> {
    pub value: T,
    /// The ball reaches beyond the chart, so `value` only bounds the true ratio from below.
    pub lower_bound_only: bool,
}

/// `Hⁿ(L ∩ B_r(x)) / rⁿ`.
pub fn area_ratio<T: Real>(patch: &LagrangianPatch<T>, x: &CVector<T>, r: T, res: usize) -> Result<AreaRatio<T>> {
    if !(r > T::zero()) {
        return Err(GeomError::InvalidArgument("radius must be positive".into()));
    }
    let one = |_: &[T]| Ok(T::one());
    let area = patch.ball_integral(&one, x, r, res)?;
    Ok(AreaRatio {
        value: area / r.powi(patch.n() as i32),
        lower_bound_only: patch.coverage_radius(x, 64) < r,
    })
}

/// `σ (L − center)`. Densities transform as `Θ_{σL}(σ(x₀−c), σ²l) = Θ_L(x₀, l)`.
pub fn rescale_patch<T: Real>(patch: &LagrangianPatch<T>, sigma: T, center: &CVector<T>) -> Result<LagrangianPatch<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(GeomError::InvalidArgument("σ must be positive".into()));
    }
    if center.n() != patch.n() {
        return Err(GeomError::DimensionMismatch {
            expected: patch.n(),
            found: center.n(),
        });
    }
    let chart = AffineChart::new(patch.chart().clone(), sigma, center.clone());
    let out = patch.with_chart(Arc::new(chart), patch.domain().clone());
    Ok(if patch.is_certified() {
        out.inherit_certification(patch.certification_residual().map(|r| r * sigma * sigma))
    } else {
        out
    })
}

/// Parabolic blow-down `σ⁻¹ L` about the origin.
pub fn blow_down<T: Real>(patch: &LagrangianPatch<T>, sigma: T) -> Result<LagrangianPatch<T>> {
    rescale_patch(patch, T::one() / sigma, &CVector::zeros(patch.n()))
}

/// Rescales about `F(p)` by `|A|(p)`, so that the image point has `|A| = 1`.
pub fn normalize_by_curvature<T: Real>(patch: &LagrangianPatch<T>, p: &[T]) -> Result<LagrangianPatch<T>> {
    let a2 = patch.second_fundamental_norm(p)?;
    let scale = patch.frame(p)?.tangents.iter().map(|t| t.norm()).fold(T::zero(), T::max);
    // |A| has units of inverse length; compare against the chart's own length scale.
    if !(a2.sqrt() * patch.domain().local_scale(p) * scale > T::lit(1e-10)) {
        return Err(GeomError::FlatPoint);
    }
    rescale_patch(patch, a2.sqrt(), &patch.position(p))
}

/// Largest `|H|` over the check points.
pub fn sup_mean_curvature<T: Real>(patch: &LagrangianPatch<T>) -> Result<T> {
    use rayon::prelude::*;
    let vals = patch
        .check_points()
        .par_iter()
        .map(|p| patch.mean_curvature(p).map(|h| h.norm()))
        .collect::<Result<Vec<T>>>()?;
    Ok(vals.into_iter().fold(T::zero(), T::max))
}

/// Minimality gate shared by the static-flow checks.
pub const MINIMALITY_TOLERANCE: f64 = 1e-5;

/// Checks that `l ↦ Θ(x₀, l)` is nondecreasing on the grid, as it must be for a static minimal
/// patch.
pub fn density_monotonicity_check<T: Real>(
    patch: &LagrangianPatch<T>,
    x0: &CVector<T>,
    l_grid: &[T],
    tol: T,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let h = sup_mean_curvature(patch)?;
    if h > T::lit(MINIMALITY_TOLERANCE) {
        return Err(GeomError::NonMinimal(h.as_f64()));
    }
    if l_grid.len() < 2 {
        return Err(GeomError::InvalidArgument("need at least two scales".into()));
    }
    let mut thetas = Vec::with_capacity(l_grid.len());
    let mut errs = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let q = DensityQuery::at(x0.clone(), l)?;
        let d = gaussian_density(&[patch], &q, tol)?;
        thetas.push(d.value.as_f64());
        errs.push((d.quad_error.as_f64() + d.tail_bound.as_f64(), d.tail_bound.as_f64()));
    }
    let min_step = thetas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let report = VerificationReport::compare(
        "density-monotonicity",
        "Gaussian density of a static minimal surface is nondecreasing in the scale",
        vec![min_step],
        vec![0.0],
        "monotonicity formula for static minimal surfaces",
        tol.as_f64(),
        Norm::AtLeast,
    )
    .with_meta("patch", patch.name())
    .with_meta("scales", l_grid.iter().map(|l| l.as_f64()).collect::<Vec<_>>())
    .with_meta("theta", &thetas)
    .with_meta("error_bounds", errs.iter().map(|e| e.0).collect::<Vec<_>>())
    .with_meta("sup_mean_curvature", h.as_f64());
    Ok(report.with_runtime(started))
}

/// Distance from `x` to the real span of an orthonormal plane.
pub fn distance_to_plane<T: Real>(spec: &PlaneSpec<T>, x: &CVector<T>) -> T {
    let mut d2 = x.norm_sqr();
    for a in 0..spec.n() {
        let c = spec.direction(a).dot(x);
        d2 = d2 - c * c;
    }
    d2.max(T::zero()).sqrt()
}

/// Hausdorff distance within `B_radius(0)` between the patch and a union of planes, estimated
/// from chart samples at resolution `res` and plane samples on a polar grid. Both one-sided
/// distances are returned: `(patch → planes, planes → patch)`.
pub fn hausdorff_to_planes<T: Real>(
    patch: &LagrangianPatch<T>,
    planes: &[PlaneSpec<T>],
    radius: T,
    res: usize,
) -> Result<(T, T)> {
    use rayon::prelude::*;
    if planes.iter().any(|p| p.n() != patch.n()) {
        return Err(GeomError::DimensionMismatch {
            expected: patch.n(),
            found: planes[0].n(),
        });
    }
    let pts: Vec<CVector<T>> = patch
        .domain()
        .nodes(res)
        .into_iter()
        .map(|(p, _)| patch.position(&p))
        .filter(|x| x.norm() <= radius)
        .collect();
    if pts.is_empty() {
        return Err(GeomError::EmptyRegion);
    }
    let forward = pts
        .par_iter()
        .map(|x| {
            planes
                .iter()
                .map(|s| distance_to_plane(s, x))
                .fold(T::infinity(), T::min)
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), T::max);
    if patch.n() != 2 {
        return Ok((forward, T::nan()));
    }
    // Plane samples on circles of radius ≤ 0.9·radius, to stay clear of the ball boundary.
    let mut probes = Vec::new();
    let m = 24;
    for s in planes {
        for i in 1..=m {
            let r = radius * T::lit(0.9) * T::from_usize_lossy(i) / T::from_usize_lossy(m);
            for k in 0..4 * m {
                let a = T::two_pi() * T::from_usize_lossy(k) / T::from_usize_lossy(4 * m);
                let mut v = s.direction(0).scale(r * a.cos());
                v.axpy(r * a.sin(), &s.direction(1));
                probes.push(v);
            }
        }
    }
    let backward = probes
        .par_iter()
        .map(|y| {
            pts.iter()
                .map(|x| (x - y).norm())
                .fold(T::infinity(), T::min)
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), T::max);
    Ok((forward, backward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_lawlor2, make_plane};
    use std::f64::consts::PI;

    #[test]
    fn kernel_normalization_and_symmetry() {
        let q = DensityQuery::at(CVector::zeros(2), 1.0 / (4.0 * PI)).unwrap();
        assert!((heat_kernel(&q, &CVector::zeros(2)).unwrap() - 1.0).abs() < 1e-15);
        let q = DensityQuery::new(CVector::<f64>::zeros(2), 2.0, 0.5).unwrap();
        let a = heat_kernel(&q, &CVector::from_raw(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
        let b = heat_kernel(&q, &CVector::from_raw(vec![0.0, 0.0, 0.0, -1.0])).unwrap();
        assert!((a - b).abs() < 1e-16);
        assert!(DensityQuery::new(CVector::<f64>::zeros(2), 1.0, 1.0).is_err());
    }

    #[test]
    fn tail_bound_closed_form_for_surfaces() {
        // For n = 2: (C/π)(u + 1)e^{−u}.
        let (c, tau, r): (f64, f64, f64) = (2.0 * PI, 0.7, 3.0);
        let u = r * r / (4.0 * tau);
        let expect = c / PI * (u + 1.0) * (-u).exp();
        assert!((gaussian_tail_bound(c, 2, tau, r) - expect).abs() < 1e-12 * expect.max(1e-300));
        let need = required_radius(c, 2, tau, 1e-8);
        assert!(gaussian_tail_bound(c, 2, tau, need) <= 1e-8);
        assert!(gaussian_tail_bound(c, 2, tau, 0.99 * need) > 1e-8);
    }

    #[test]
    fn plane_density_is_one() {
        let p = make_plane(&PlaneSpec::<f64>::real(2), 20.0).unwrap();
        let q = DensityQuery::at(CVector::zeros(2), 1.0).unwrap();
        let d = gaussian_density(&[&p], &q, 1e-8).unwrap();
        assert!((d.value - 1.0).abs() < 1e-6, "{d:?}");
        let q = DensityQuery::at(CVector::zeros(2), 1e3).unwrap();
        assert!(matches!(
            gaussian_density(&[&p], &q, 1e-8),
            Err(GeomError::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn plane_area_ratio_is_pi() {
        let p = make_plane(&PlaneSpec::real(2), 5.0).unwrap();
        for r in [0.5, 1.0, 3.0] {
            let a = area_ratio(&p, &CVector::zeros(2), r, 64).unwrap();
            assert!((a.value - PI).abs() < 1e-9);
            assert!(!a.lower_bound_only);
        }
        assert!(area_ratio(&p, &CVector::zeros(2), 6.0, 64).unwrap().lower_bound_only);
    }

    #[test]
    fn rescaling_identity_and_curvature_normalization() {
        let l = make_lawlor2(1.0f64, 0.0).unwrap();
        let same = rescale_patch(&l, 1.0, &CVector::zeros(2)).unwrap();
        let p = [0.7, -0.4];
        assert!((&same.position(&p) - &l.position(&p)).norm() == 0.0);
        let n = normalize_by_curvature(&l, &[1.0, 0.0]).unwrap();
        assert!((n.second_fundamental_norm(&[1.0, 0.0]).unwrap().sqrt() - 1.0).abs() < 1e-8);
        let flat = make_plane(&PlaneSpec::real(2), 5.0).unwrap();
        assert_eq!(normalize_by_curvature(&flat, &[0.5, 0.5]).unwrap_err(), GeomError::FlatPoint);
    }
}
