//! Graphs over asymptotic planes, log-polar rescaling, decay fits, and the radial monotonicity
//! identities of minimal surfaces.

use std::time::Instant;

use rayon::prelude::*;

use crate::ambient::CVector;
use crate::density::{area_ratio, sup_mean_curvature, MINIMALITY_TOLERANCE};
use crate::error::{GeomError, Result};
use crate::gallery::PlaneSpec;
use crate::linalg::linear_fit;
use crate::patch::LagrangianPatch;
use crate::report::{Norm, VerificationReport};
use crate::scalar::Real;

/// Least-squares power law `max_ω |v| ≈ C r^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub alpha: T,
    pub c: T,
    pub r2: T,
}

/// Normal graph `v` over a plane, sampled on log-spaced radii and uniform angles of an annulus.
#[derive(Debug, Clone)]
pub struct GraphField<T: Real> {
    pub plane: PlaneSpec<T>,
    pub annulus: (T, T),
    pub radii: Vec<T>,
    pub angles: Vec<T>,
    /// `normals[i][k]` is `v` at radius `i`, angle `k`.
    pub normals: Vec<Vec<CVector<T>>>,
    /// Patch parameters of the sampled points, when the field comes from a patch.
    pub params: Option<Vec<Vec<Vec<T>>>>,
    pub fit: Option<DecayFit<T>>,
}

fn stations<T: Real>(annulus: (T, T), n_r: usize, n_ang: usize) -> Result<(Vec<T>, Vec<T>)> {
    let (r0, r1) = annulus;
    if !(r0 > T::zero() && r1 > r0) {
        return Err(GeomError::InvalidArgument(format!(
            "annulus [{r0}, {r1}] must satisfy 0 < r0 < R (the plane point r = 0 is excluded)"
        )));
    }
    if n_r < 2 || n_ang < 1 {
        return Err(GeomError::InvalidArgument("need at least two radii and one angle".into()));
    }
    let (l0, l1) = (r0.ln(), r1.ln());
    let radii = (0..n_r)
        .map(|i| (l0 + (l1 - l0) * T::from_usize_lossy(i) / T::from_usize_lossy(n_r - 1)).exp())
        .collect();
    let angles = (0..n_ang)
        .map(|k| T::two_pi() * T::from_usize_lossy(k) / T::from_usize_lossy(n_ang))
        .collect();
    Ok((radii, angles))
}

/// `(⟨F, e₁⟩, ⟨F, e₂⟩)` and the normal remainder.
fn split<T: Real>(plane: &PlaneSpec<T>, f: &CVector<T>) -> ([T; 2], CVector<T>) {
    let (e0, e1) = (plane.direction(0), plane.direction(1));
    let c = [f.dot(&e0), f.dot(&e1)];
    let mut v = f.clone();
    v.axpy(-c[0], &e0);
    v.axpy(-c[1], &e1);
    (c, v)
}

impl<T: Real> GraphField<T> {
    /// Synthetic field `v(r, ω) = f(r, ω)·J e₁`.
    pub fn synthetic(
        plane: PlaneSpec<T>,
        annulus: (T, T),
        n_r: usize,
        n_ang: usize,
        f: impl Fn(T, T) -> T,
    ) -> Result<Self> {
        if plane.n() != 2 {
            return Err(GeomError::InvalidArgument("graph fields are implemented over 2-planes".into()));
        }
        let (radii, angles) = stations(annulus, n_r, n_ang)?;
        let normal = plane.direction(0).j();
        let normals = radii
            .iter()
            .map(|&r| angles.iter().map(|&w| normal.scale(f(r, w))).collect())
            .collect();
        Ok(Self {
            plane,
            annulus,
            radii,
            angles,
            normals,
            params: None,
            fit: None,
        })
    }

    /// `max_ω |v|` per radius.
    pub fn max_norms(&self) -> Vec<T> {
        self.normals
            .iter()
            .map(|row| row.iter().map(|v| v.norm()).fold(T::zero(), T::max))
            .collect()
    }
}

/// Writes the patch as a normal graph over `plane` on the annulus, inverting the orthogonal
/// projection by Newton's method from the nearest chart sample. Fails where the projection
/// Jacobian degenerates or changes sign.
pub fn graph_over_plane<T: Real>(
    patch: &LagrangianPatch<T>,
    plane: &PlaneSpec<T>,
    annulus: (T, T),
    n_r: usize,
    n_ang: usize,
) -> Result<GraphField<T>> {
    if patch.n() != 2 || plane.n() != 2 {
        return Err(GeomError::InvalidArgument("graph fields are implemented for surfaces over 2-planes".into()));
    }
    let (radii, angles) = stations(annulus, n_r, n_ang)?;
    let seeds: Vec<(Vec<T>, [T; 2])> = patch
        .domain()
        .nodes(96)
        .into_iter()
        .map(|(p, _)| {
            let (c, _) = split(plane, &patch.position(&p));
            (p, c)
        })
        .collect();
    let solve = |r: T, ang: T| -> Result<(Vec<T>, CVector<T>, T)> {
        let target = [r * ang.cos(), r * ang.sin()];
        let dist = |c: &[T; 2]| (c[0] - target[0]).powi(2) + (c[1] - target[1]).powi(2);
        let (mut p, _) = seeds
            .iter()
            .min_by(|a, b| dist(&a.1).partial_cmp(&dist(&b.1)).unwrap_or(std::cmp::Ordering::Equal))
            .cloned()
            .ok_or(GeomError::EmptyRegion)?;
        let tol = T::lit(1e-12) * T::one().max(r);
        for _ in 0..50 {
            let f = patch.frame(&p)?;
            let (c, _) = split(plane, &f.position);
            let res = [c[0] - target[0], c[1] - target[1]];
            let e = [plane.direction(0), plane.direction(1)];
            let j = [
                [f.tangents[0].dot(&e[0]), f.tangents[1].dot(&e[0])],
                [f.tangents[0].dot(&e[1]), f.tangents[1].dot(&e[1])],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let scale = f.tangents[0].norm() * f.tangents[1].norm();
            if !(det.abs() > T::lit(1e-10) * scale) {
                return Err(GeomError::NotGraphical { radius: r.as_f64() });
            }
            if (res[0] * res[0] + res[1] * res[1]).sqrt() < tol {
                let (_, v) = split(plane, &f.position);
                return Ok((p, v, det));
            }
            let dp = [
                (j[1][1] * res[0] - j[0][1] * res[1]) / det,
                (-j[1][0] * res[0] + j[0][0] * res[1]) / det,
            ];
            let next = vec![p[0] - dp[0], p[1] - dp[1]];
            if !patch.domain().contains(&next) {
                return Err(GeomError::NotGraphical { radius: r.as_f64() });
            }
            p = next;
        }
        Err(GeomError::NotGraphical { radius: r.as_f64() })
    };
    let rows = radii
        .par_iter()
        .map(|&r| angles.iter().map(|&w| solve(r, w)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let sign = rows[0][0].2.signum();
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(|s| s.2.signum() != sign) {
            return Err(GeomError::NotGraphical {
                radius: radii[i].as_f64(),
            });
        }
    }
    let params = rows.iter().map(|row| row.iter().map(|s| s.0.clone()).collect()).collect();
    let normals = rows.into_iter().map(|row| row.into_iter().map(|s| s.1).collect()).collect();
    let mut g = GraphField {
        plane: plane.clone(),
        annulus,
        radii,
        angles,
        normals,
        params: Some(params),
        fit: None,
    };
    g.fit = fit_decay(&g).ok();
    Ok(g)
}

/// Slope of `log max_ω |v|` against `log r`. An identically zero field reports `α = −∞`.
pub fn fit_decay<T: Real>(g: &GraphField<T>) -> Result<DecayFit<T>> {
    if g.radii.len() < 10 {
        return Err(GeomError::DegenerateFit(format!(
            "{} radial stations; at least 10 are needed",
            g.radii.len()
        )));
    }
    let m = g.max_norms();
    if m.iter().all(|&v| v == T::zero()) {
        return Ok(DecayFit {
            alpha: T::neg_infinity(),
            c: T::zero(),
            r2: T::one(),
        });
    }
    if m.iter().any(|&v| !(v > T::zero())) {
        return Err(GeomError::DegenerateFit("field vanishes at some radii but not all".into()));
    }
    let xs: Vec<T> = g.radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = m.iter().map(|v| v.ln()).collect();
    let (alpha, intercept, r2) =
        linear_fit(&xs, &ys).ok_or_else(|| GeomError::DegenerateFit("zero variance in log r".into()))?;
    Ok(DecayFit {
        alpha,
        c: intercept.exp(),
        r2,
    })
}

/// `u(ω, t) = e^{−t} v(e^t ω)` on the station grid, `t = log r`.
#[derive(Debug, Clone)]
pub struct LogPolarField<T: Real> {
    pub t: Vec<T>,
    pub angles: Vec<T>,
    pub u: Vec<Vec<CVector<T>>>,
}

pub fn log_polar<T: Real>(g: &GraphField<T>) -> LogPolarField<T> {
    LogPolarField {
        t: g.radii.iter().map(|r| r.ln()).collect(),
        angles: g.angles.clone(),
        u: g
            .normals
            .iter()
            .zip(&g.radii)
            .map(|(row, &r)| row.iter().map(|v| v.scale(T::one() / r)).collect())
            .collect(),
    }
}

impl<T: Real> LogPolarField<T> {
    /// Linear interpolation in `t` and (periodically) in `ω`.
    pub fn at(&self, omega: T, t: T) -> Result<CVector<T>> {
        let (t0, t1) = (self.t[0], *self.t.last().expect("nonempty"));
        let slack = T::lit(1e-12) * T::one().max(t0.abs()).max(t1.abs());
        if t < t0 - slack || t > t1 + slack || self.t.len() < 2 {
            return Err(GeomError::OutOfCoverage);
        }
        let nt = self.t.len();
        let dt = (t1 - t0) / T::from_usize_lossy(nt - 1);
        let s = ((t - t0) / dt).max(T::zero());
        let i = s.floor().to_usize().unwrap_or(0).min(nt - 2);
        let ft = s - T::from_usize_lossy(i);
        let na = self.angles.len();
        let da = T::two_pi() / T::from_usize_lossy(na);
        let tau = T::two_pi();
        let w = (omega % tau + tau) % tau / da;
        let k: usize = w.floor().to_usize().unwrap_or(0) % na;
        let fa = w - w.floor();
        let k1 = (k + 1) % na;
        let lerp = |a: &CVector<T>, b: &CVector<T>, f: T| {
            let mut out = a.scale(T::one() - f);
            out.axpy(f, b);
            out
        };
        let lo = lerp(&self.u[i][k], &self.u[i][k1], fa);
        let hi = lerp(&self.u[i + 1][k], &self.u[i + 1][k1], fa);
        Ok(lerp(&lo, &hi, ft))
    }

    /// `h(r ω) = r u(ω, log r)`.
    pub fn reconstruct(&self, r: T, omega: T) -> Result<CVector<T>> {
        Ok(self.at(omega, r.ln())?.scale(r))
    }

    /// `∂_t u` by centered differences at interior stations (one-sided at the ends).
    pub fn dt(&self) -> Vec<Vec<CVector<T>>> {
        let nt = self.t.len();
        (0..nt)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i + 1 == nt {
                    (nt - 2, nt - 1)
                } else {
                    (i - 1, i + 1)
                };
                let h = self.t[b] - self.t[a];
                self.u[b]
                    .iter()
                    .zip(&self.u[a])
                    .map(|(ub, ua)| (ub - ua).scale(T::one() / h))
                    .collect()
            })
            .collect()
    }
}

/// `|D^⊥r|²` at a patch point, `r = |F|`.
fn normal_radial_sq<T: Real>(patch: &LagrangianPatch<T>, p: &[T]) -> Result<T> {
    let f = patch.frame(p)?;
    let r = f.position.norm();
    if r == T::zero() {
        return Ok(T::zero());
    }
    Ok(f.normal_part(&f.position.scale(T::one() / r)).norm_sqr())
}

fn require_minimal<T: Real>(patch: &LagrangianPatch<T>) -> Result<T> {
    let h = sup_mean_curvature(patch)?;
    if h > T::lit(MINIMALITY_TOLERANCE) {
        return Err(GeomError::NonMinimal(h.as_f64()));
    }
    Ok(h)
}

/// Range of `|D^⊥r|² / |∂_t u|²` over the interior stations of a graph taken from `patch`.
pub fn sandwich_ratio<T: Real>(patch: &LagrangianPatch<T>, g: &GraphField<T>) -> Result<(T, T)> {
    let params = g
        .params
        .as_ref()
        .ok_or_else(|| GeomError::InvalidArgument("graph field has no patch parameters".into()))?;
    let lp = log_polar(g);
    let du = lp.dt();
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    for i in 1..g.radii.len().saturating_sub(1) {
        for k in 0..g.angles.len() {
            let ud = du[i][k].norm_sqr();
            if ud == T::zero() {
                continue;
            }
            let ratio = normal_radial_sq(patch, &params[i][k])? / ud;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    if lo > hi {
        return Err(GeomError::EmptyRegion);
    }
    Ok((lo, hi))
}

/// Compares a centered difference of `ρ ↦ μ(B_ρ)/ρⁿ` with `∫_{L∩∂B_ρ} |D^⊥r|²/(rⁿ|∇^L r|)`,
/// the derivative of `∫_{L∩B_ρ} |D^⊥r|²/rⁿ`. Balls are centred at the origin.
pub fn density_ratio_derivative_check<T: Real>(
    patch: &LagrangianPatch<T>,
    rho_grid: &[T],
    res: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let h = require_minimal(patch)?;
    let n = patch.n() as i32;
    let origin = CVector::zeros(patch.n());
    let coverage = patch.coverage_radius(&origin, 64);
    let field = |p: &[T]| -> Result<T> {
        let r = patch.position(p).norm();
        Ok(normal_radial_sq(patch, p)? / r.powi(n))
    };
    let mut lhs = Vec::with_capacity(rho_grid.len());
    let mut rhs = Vec::with_capacity(rho_grid.len());
    let mut ball = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let d = T::lit(0.01) * rho;
        if rho + d * T::two() > coverage {
            return Err(GeomError::InsufficientTruncation {
                required: (rho + d * T::two()).as_f64(),
                available: coverage.as_f64(),
            });
        }
        let ar = |s: T| area_ratio(patch, &origin, s, res).map(|a| a.value);
        // fourth-order centered difference
        let deriv = (ar(rho - d * T::two())? - ar(rho + d * T::two())? + T::lit(8.0) * (ar(rho + d)? - ar(rho - d)?))
            / (T::lit(12.0) * d);
        lhs.push(deriv.as_f64());
        rhs.push(patch.ball_boundary_integral(&field, &origin, rho, res)?.as_f64());
        ball.push(patch.ball_integral(&field, &origin, rho, res)?.as_f64());
    }
    // relative mismatch, with exact agreement at zero
    let mismatch: Vec<f64> = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| {
            let s = l.abs().max(r.abs());
            if s < 1e-12 {
                0.0
            } else {
                (l - r).abs() / s
            }
        })
        .collect();
    let report = VerificationReport::compare(
        "density-ratio-derivative",
        "radial derivative of the area ratio of a minimal surface equals the normal radial energy density",
        mismatch.clone(),
        vec![0.0; mismatch.len()],
        "coarea identity for the monotonicity formula; quadrature on both sides",
        tol,
        Norm::MaxAbs,
    )
    .with_meta("patch", patch.name())
    .with_meta("rho", rho_grid.iter().map(|r| r.as_f64()).collect::<Vec<_>>())
    .with_meta("lhs_area_ratio_derivative", &lhs)
    .with_meta("rhs_boundary_integral", &rhs)
    .with_meta("ball_integral", &ball)
    .with_meta("sup_mean_curvature", h.as_f64())
    .with_meta("resolution", res);
    Ok(report.with_runtime(started))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEnergy<T> {
    pub rho: T,
    /// `I(ρ) = ∫_{L∖B_ρ} |D^⊥r|²/rⁿ`, including fitted tails.
    pub value: T,
    pub area_ratio: T,
    pub mu_infinity: T,
    /// `|I(ρ) + μ(B_ρ)/ρⁿ − μ_∞| / μ_∞`.
    pub cross_residual: T,
}

/// `μ_∞` from area ratios at `R/4, R/2, R` by Aitken extrapolation, falling back to the
/// value at `R` when the sequence is not geometric.
pub fn mu_infinity<T: Real>(patch: &LagrangianPatch<T>, radius: T, res: usize) -> Result<T> {
    let origin = CVector::zeros(patch.n());
    let a = |s: T| area_ratio(patch, &origin, s, res).map(|a| a.value);
    let (x0, x1, x2) = (a(radius * T::lit(0.25))?, a(radius * T::half())?, a(radius)?);
    let denom = x2 - x1 * T::two() + x0;
    let d1 = x2 - x1;
    if denom.abs() <= T::eps() * x2.abs() || (x1 - x0).abs() <= d1.abs() {
        return Ok(x2);
    }
    Ok(x2 - d1 * d1 / denom)
}

/// `I(ρ)` at each radius, cross-checked against `μ_∞ − μ(B_ρ)/ρⁿ`. `mu_radius` is the largest
/// radius used to estimate `μ_∞`; it must lie inside the chart coverage.
pub fn radial_energy<T: Real>(
    patch: &LagrangianPatch<T>,
    rhos: &[T],
    mu_radius: T,
    res: usize,
) -> Result<Vec<RadialEnergy<T>>> {
    require_minimal(patch)?;
    let n = patch.n() as i32;
    let origin = CVector::zeros(patch.n());
    let coverage = patch.coverage_radius(&origin, 64);
    if mu_radius > coverage {
        return Err(GeomError::InsufficientTruncation {
            required: mu_radius.as_f64(),
            available: coverage.as_f64(),
        });
    }
    let field = |p: &[T]| -> Result<T> {
        let r = patch.position(p).norm();
        Ok(normal_radial_sq(patch, p)? / r.powi(n))
    };
    let total = patch.integrate_with_tails(&field, res)?.value();
    let mu = mu_infinity(patch, mu_radius, res)?;
    rhos.iter()
        .map(|&rho| {
            let inside = patch.ball_integral(&field, &origin, rho, res)?;
            let value = total - inside;
            let ratio = area_ratio(patch, &origin, rho, res)?.value;
            Ok(RadialEnergy {
                rho,
                value,
                area_ratio: ratio,
                mu_infinity: mu,
                cross_residual: (value + ratio - mu).abs() / mu,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_lawlor2_on, make_plane};

    fn lawlor() -> LagrangianPatch<f64> {
        make_lawlor2_on(1.0, 0.0, 1e-2, 1e2).unwrap()
    }

    #[test]
    fn lawlor_graph_over_the_real_plane() {
        let l = lawlor();
        let g = graph_over_plane(&l, &PlaneSpec::real(2), (2.0, 50.0), 16, 12).unwrap();
        for (row, r) in g.normals.iter().zip(&g.radii) {
            for v in row {
                assert!((v.norm() - 1.0 / r).abs() < 1e-10);
            }
        }
        let fit = g.fit.unwrap();
        assert!((fit.alpha + 1.0).abs() < 0.05 && fit.r2 > 0.999);
        let (lo, hi) = sandwich_ratio(&l, &g).unwrap();
        assert!(lo >= 0.5 && hi <= 2.0, "{lo} {hi}");
        assert!(graph_over_plane(&l, &PlaneSpec::real(2), (0.0, 5.0), 16, 12).is_err());
    }

    #[test]
    fn plane_over_itself_is_zero() {
        let spec = PlaneSpec::new(vec![0.3f64, -0.3]).unwrap();
        let p = make_plane(&spec, 10.0).unwrap();
        let g = graph_over_plane(&p, &spec, (0.5, 5.0), 12, 8).unwrap();
        assert!(g.max_norms().iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn synthetic_power_laws() {
        for alpha in [0.5, 0.0, -1.0] {
            let g = GraphField::synthetic(PlaneSpec::real(2), (1.0, 100.0), 20, 8, |r: f64, w: f64| {
                r.powf(alpha) * (1.0 + 0.1 * w.cos().powi(2))
            })
            .unwrap();
            assert!((fit_decay(&g).unwrap().alpha - alpha).abs() < 0.01);
        }
        let zero = GraphField::synthetic(PlaneSpec::real(2), (1.0, 100.0), 12, 4, |_: f64, _: f64| 0.0).unwrap();
        assert_eq!(fit_decay(&zero).unwrap().alpha, f64::NEG_INFINITY);
        let few = GraphField::synthetic(PlaneSpec::real(2), (1.0, 100.0), 5, 4, |r: f64, _| r).unwrap();
        assert!(fit_decay(&few).is_err());
    }

    #[test]
    fn log_polar_round_trip() {
        let g = GraphField::synthetic(PlaneSpec::real(2), (1.0, 50.0), 30, 16, |r: f64, _| 3.0 / r).unwrap();
        let lp = log_polar(&g);
        for (i, &t) in lp.t.iter().enumerate() {
            assert!((lp.u[i][3].norm() - 3.0 * (-2.0 * t).exp()).abs() < 1e-12);
        }
        let h = lp.reconstruct(g.radii[7], g.angles[5]).unwrap();
        assert!((&h - &g.normals[7][5]).norm() < 1e-12);
        assert!(lp.at(0.0, 10.0).is_err());
        let cone = GraphField::synthetic(PlaneSpec::real(2), (1.0, 50.0), 12, 4, |r: f64, _| 0.7 * r).unwrap();
        assert!(log_polar(&cone).u.iter().flatten().all(|u| (u.norm() - 0.7).abs() < 1e-12));
    }

    #[test]
    fn plane_has_no_radial_energy() {
        let p = make_plane(&PlaneSpec::real(2), 30.0).unwrap();
        let rep = density_ratio_derivative_check(&p, &[1.0, 3.0, 10.0], 48, 0.01).unwrap();
        assert!(rep.pass, "{}", rep.summary());
    }
}
