//! Soliton residuals, the heat equation for the Lagrangian angle along prescribed motions, and
//! an explicit mean curvature flow step on sampled charts.

use std::sync::Arc;

use rayon::prelude::*;

use crate::ambient::CVector;
use crate::chart::SampledChart;
use crate::density::rescale_patch;
use crate::error::{GeomError, Result};
use crate::linalg::Mat;
use crate::patch::LagrangianPatch;
use crate::scalar::{wrap_angle, Real};

/// Ambient motion applied rigidly to a patch.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity<T> {
    Static,
    /// `F_t = F + t V`.
    Translation(CVector<T>),
    /// `F_t = e^{rate·t} F`.
    Dilation(T),
}

#[derive(Debug, Clone)]
pub struct PrescribedMotion<T: Real> {
    pub base: LagrangianPatch<T>,
    pub velocity: Velocity<T>,
    pub window: (T, T),
}

impl<T: Real> PrescribedMotion<T> {
    pub fn new(base: LagrangianPatch<T>, velocity: Velocity<T>, window: (T, T)) -> Result<Self> {
        let finite = match &velocity {
            Velocity::Static => true,
            Velocity::Translation(v) => v.is_finite() && v.n() == base.n(),
            Velocity::Dilation(r) => r.is_finite(),
        };
        if !finite || !(window.0 < window.1) {
            return Err(GeomError::InvalidArgument(
                "velocity must be finite, of the patch dimension, with a nonempty window".into(),
            ));
        }
        Ok(Self {
            base,
            velocity,
            window,
        })
    }

    /// The moved patch at time `t`.
    pub fn patch_at(&self, t: T) -> Result<LagrangianPatch<T>> {
        if t < self.window.0 || t > self.window.1 {
            return Err(GeomError::OutOfCoverage);
        }
        match &self.velocity {
            Velocity::Static => Ok(self.base.clone()),
            Velocity::Translation(v) => rescale_patch(&self.base, T::one(), &v.scale(-t)),
            Velocity::Dilation(r) => rescale_patch(&self.base, (*r * t).exp(), &CVector::zeros(self.base.n())),
        }
    }
}

/// `√(r_a g^{ab} r_b)`: length of a covector given by components on the chart basis.
fn covector_norm<T: Real>(r: &[T], ginv: &Mat<T>) -> T {
    let mut s = T::zero();
    for a in 0..r.len() {
        for b in 0..r.len() {
            s = s + r[a] * ginv.get(a, b) * r[b];
        }
    }
    s.max(T::zero()).sqrt()
}

fn sup_over_checks<T: Real>(
    patch: &LagrangianPatch<T>,
    f: impl Fn(&[T]) -> Result<T> + Sync,
) -> Result<T> {
    let vals = patch
        .check_points()
        .par_iter()
        .map(|p| f(p))
        .collect::<Result<Vec<T>>>()?;
    Ok(vals.into_iter().fold(T::zero(), T::max))
}

/// `sup |dθ + λ/2t|` in the induced metric. Self-shrinkers at time `t < 0` give zero.
pub fn shrinker_residual<T: Real>(patch: &LagrangianPatch<T>, t: T) -> Result<T> {
    if !(t < T::zero()) {
        return Err(GeomError::InvalidArgument("shrinker time must be negative".into()));
    }
    sup_over_checks(patch, |p| {
        let lam = patch.pullback_liouville(p)?;
        let dth = patch.angle_differential(p)?;
        let f = patch.frame(p)?;
        let r: Vec<T> = dth
            .iter()
            .zip(&lam)
            .map(|(d, l)| *d + *l / (T::two() * t))
            .collect();
        Ok(covector_norm(&r, &f.metric_inverse))
    })
}

/// `sup |dθ − α|_L|` in the induced metric for a constant covector `α`, given by its components
/// on the real coordinates `(x₁, y₁, …)`.
pub fn translator_residual<T: Real>(patch: &LagrangianPatch<T>, alpha: &CVector<T>) -> Result<T> {
    if alpha.n() != patch.n() {
        return Err(GeomError::DimensionMismatch {
            expected: patch.n(),
            found: alpha.n(),
        });
    }
    patch.lagrangian_angle(patch.basepoint())?;
    sup_over_checks(patch, |p| {
        let dth = patch.angle_differential(p)?;
        let f = patch.frame(p)?;
        let r: Vec<T> = dth
            .iter()
            .zip(&f.tangents)
            .map(|(d, t)| *d - alpha.dot(t))
            .collect();
        Ok(covector_norm(&r, &f.metric_inverse))
    })
}

/// Laplace–Beltrami `(1/√g) ∂_a(√g g^{ab} ∂_b f)` by nested centered differences with step `h`
/// (scaled per axis by the domain's local length).
pub fn laplace_beltrami<T: Real>(
    patch: &LagrangianPatch<T>,
    f: &(dyn Fn(&[T]) -> Result<T> + Sync),
    p: &[T],
    h: T,
) -> Result<T> {
    let n = p.len();
    let steps: Vec<T> = vec![h * patch.domain().local_scale(p); n];
    let grad = |q: &[T]| -> Result<Vec<T>> {
        let mut r = q.to_vec();
        let mut g = Vec::with_capacity(n);
        for b in 0..n {
            r[b] = q[b] + steps[b];
            let fp = f(&r)?;
            r[b] = q[b] - steps[b];
            let fm = f(&r)?;
            r[b] = q[b];
            g.push((fp - fm) / (T::two() * steps[b]));
        }
        Ok(g)
    };
    let flux = |q: &[T], a: usize| -> Result<T> {
        let fr = patch.frame(q)?;
        let g = grad(q)?;
        let mut s = T::zero();
        for b in 0..n {
            s = s + fr.metric_inverse.get(a, b) * g[b];
        }
        Ok(fr.volume * s)
    };
    let mut div = T::zero();
    let mut q = p.to_vec();
    for a in 0..n {
        q[a] = p[a] + steps[a];
        let up = flux(&q, a)?;
        q[a] = p[a] - steps[a];
        let dn = flux(&q, a)?;
        q[a] = p[a];
        div = div + (up - dn) / (T::two() * steps[a]);
    }
    Ok(div / patch.frame(p)?.volume)
}

/// `|(d/dt − Δ)θ|` at `(p, t)`. The time derivative is taken along the normal motion: the
/// fixed-parameter derivative minus `dθ(V^T)`, where `V^T` is the tangential part of the motion
/// velocity.
pub fn evolution_residual_theta<T: Real>(
    motion: &PrescribedMotion<T>,
    p: &[T],
    t: T,
    h_t: T,
    h_x: T,
) -> Result<T> {
    let now = motion.patch_at(t)?;
    let later = motion.patch_at(t + h_t)?;
    let earlier = motion.patch_at(t - h_t)?;
    let dtheta_fixed = wrap_angle(later.principal_angle(p)? - earlier.principal_angle(p)?) / (T::two() * h_t);
    let velocity = (&later.position(p) - &earlier.position(p)).scale(T::one() / (T::two() * h_t));
    let f = now.frame(p)?;
    let dth = now.angle_differential(p)?;
    let n = p.len();
    let mut tangential = T::zero();
    for a in 0..n {
        let mut c = T::zero();
        for b in 0..n {
            c = c + f.metric_inverse.get(a, b) * f.tangents[b].dot(&velocity);
        }
        tangential = tangential + c * dth[a];
    }
    // Angle relative to its value at p, so the wrapped differences stay on one branch.
    let theta0 = now.principal_angle(p)?;
    let rel = |q: &[T]| -> Result<T> { Ok(wrap_angle(now.principal_angle(q)? - theta0)) };
    let lap = laplace_beltrami(&now, &rel, p, h_x)?;
    Ok((dtheta_fixed - tangential - lap).abs())
}

/// Largest admissible explicit step `¼ h² min_p λ_min(g)` for a sampled patch.
pub fn stable_step<T: Real>(patch: &LagrangianPatch<T>) -> Result<T> {
    let h = patch
        .chart()
        .sample_spacing()
        .ok_or_else(|| GeomError::InvalidArgument("patch is not sampled; discretize it first".into()))?;
    let hmin = h.iter().copied().fold(T::infinity(), T::min);
    let eig = patch
        .check_points()
        .par_iter()
        .map(|p| Ok(patch.induced_metric(p)?.min_sym_eigenvalue()))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::infinity(), T::min);
    Ok(T::lit(0.25) * hmin * hmin * eig)
}

/// One explicit step `F ← F + dt·H` on the interior nodes of a sampled patch, boundary nodes
/// frozen.
pub fn euler_step<T: Real>(patch: &LagrangianPatch<T>, dt: T) -> Result<LagrangianPatch<T>> {
    if !(dt > T::zero()) {
        return Err(GeomError::InvalidArgument("dt must be positive".into()));
    }
    let sampled = patch
        .chart()
        .as_ref()
        .sample_spacing()
        .ok_or_else(|| GeomError::InvalidArgument("patch is not sampled; discretize it first".into()))?;
    let bound = stable_step(patch)?;
    if dt > bound {
        return Err(GeomError::InvalidArgument(format!(
            "dt = {dt} exceeds the explicit stability bound {bound}"
        )));
    }
    let grid = grid_of(patch)?;
    let counts = grid.counts.clone();
    let total = grid.len();
    let values = (0..total)
        .into_par_iter()
        .map(|k| {
            let idx = unflat(&counts, k);
            let x = grid.node(&idx);
            let pos = patch.position(&x);
            let boundary = idx.iter().zip(&counts).any(|(&i, &c)| i == 0 || i + 1 == c);
            if boundary {
                return Ok(pos);
            }
            let h = patch.mean_curvature(&x)?;
            let mut out = pos;
            out.axpy(dt, &h);
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let chart = SampledChart::from_values(grid.clone(), values);
    let mut out = patch.with_chart(Arc::new(chart), patch.domain().clone());
    for k in 0..total {
        let x = grid.node(&unflat(&counts, k));
        if out.frame(&x).is_err() {
            return Err(GeomError::ImmersionLost);
        }
    }
    let hmax = sampled.iter().copied().fold(T::zero(), T::max);
    let tol = patch
        .certification_residual()
        .unwrap_or(T::zero())
        .max(T::lit(10.0) * hmax * hmax);
    out.check_lagrangian(tol);
    Ok(out)
}

fn unflat(counts: &[usize], mut k: usize) -> Vec<usize> {
    let mut idx = vec![0; counts.len()];
    for a in (0..counts.len()).rev() {
        idx[a] = k % counts[a];
        k /= counts[a];
    }
    idx
}

fn grid_of<T: Real>(patch: &LagrangianPatch<T>) -> Result<crate::chart::GridSpec<T>> {
    let h = patch
        .chart()
        .sample_spacing()
        .ok_or_else(|| GeomError::InvalidArgument("patch is not sampled".into()))?;
    let dim = patch.n();
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    let mut counts = Vec::with_capacity(dim);
    for a in 0..dim {
        let (l, u) = patch.domain().natural_bounds(a);
        let c = ((u - l) / h[a]).round().to_usize().unwrap_or(1) + 1;
        lo.push(l);
        hi.push(u);
        counts.push(c);
    }
    Ok(crate::chart::GridSpec::new(lo, hi, counts))
}
