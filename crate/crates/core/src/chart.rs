//! Chart evaluators: closed-form maps with analytic first derivatives, uniformly sampled grids,
//! and affine rescalings of either.

use std::sync::Arc;

use crate::ambient::{rotate_complex, CVector};
use crate::scalar::{Real, C};

/// A smooth map `F: D ⊂ Rⁿ → Cⁿ` with first derivatives.
pub trait Chart<T: Real>: Send + Sync {
    fn param_dim(&self) -> usize;

    /// Complex dimension of the target.
    fn target_dim(&self) -> usize {
        self.param_dim()
    }

    fn position(&self, p: &[T]) -> CVector<T>;

    /// `∂_a F` for `a = 0..param_dim`.
    fn tangents(&self, p: &[T]) -> Vec<CVector<T>>;

    /// Symmetric array of second derivatives `∂_a ∂_b F`. The default takes centered differences
    /// of the analytic tangents with per-axis steps `h`.
    fn hessian(&self, p: &[T], h: &[T]) -> Vec<Vec<CVector<T>>> {
        let n = self.param_dim();
        let mut cols: Vec<Vec<CVector<T>>> = Vec::with_capacity(n);
        let mut q = p.to_vec();
        for b in 0..n {
            q[b] = p[b] + h[b];
            let tp = self.tangents(&q);
            q[b] = p[b] - h[b];
            let tm = self.tangents(&q);
            q[b] = p[b];
            let inv = T::one() / (T::two() * h[b]);
            cols.push((0..n).map(|a| (&tp[a] - &tm[a]).scale(inv)).collect());
        }
        let mut out = vec![vec![CVector::zeros(self.target_dim()); n]; n];
        for a in 0..n {
            for b in 0..n {
                out[a][b] = (&cols[b][a] + &cols[a][b]).scale(T::half());
            }
        }
        out
    }

    /// Grid spacing for sampled charts; finite-difference consumers use it instead of their
    /// own step.
    fn sample_spacing(&self) -> Option<Vec<T>> {
        None
    }
}

type PosFn<T> = dyn Fn(&[T]) -> CVector<T> + Send + Sync;
type TanFn<T> = dyn Fn(&[T]) -> Vec<CVector<T>> + Send + Sync;

/// Chart given by a pair of closures.
#[derive(Clone)]
pub struct FnChart<T: Real> {
    dim: usize,
    target: usize,
    position: Arc<PosFn<T>>,
    tangents: Arc<TanFn<T>>,
}

impl<T: Real> FnChart<T> {
    pub fn new(
        dim: usize,
        target: usize,
        position: impl Fn(&[T]) -> CVector<T> + Send + Sync + 'static,
        tangents: impl Fn(&[T]) -> Vec<CVector<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            target,
            position: Arc::new(position),
            tangents: Arc::new(tangents),
        }
    }
}

impl<T: Real> Chart<T> for FnChart<T> {
    fn param_dim(&self) -> usize {
        self.dim
    }
    fn target_dim(&self) -> usize {
        self.target
    }
    fn position(&self, p: &[T]) -> CVector<T> {
        (self.position)(p)
    }
    fn tangents(&self, p: &[T]) -> Vec<CVector<T>> {
        (self.tangents)(p)
    }
}

type HoloFn<T> = dyn Fn(C<T>) -> (C<T>, C<T>) + Send + Sync;

/// A holomorphic curve `w ↦ (w₁(w), w₂(w))` in C² with parameter `w = p₀ + i p₁`, composed with
/// the hyperkähler rotation. By the Cauchy–Riemann equations `∂₀ = f'` and `∂₁ = i f'`.
#[derive(Clone)]
pub struct RotatedCurveChart<T: Real> {
    map: Arc<HoloFn<T>>,
    derivative: Arc<HoloFn<T>>,
}

impl<T: Real> RotatedCurveChart<T> {
    pub fn new(
        map: impl Fn(C<T>) -> (C<T>, C<T>) + Send + Sync + 'static,
        derivative: impl Fn(C<T>) -> (C<T>, C<T>) + Send + Sync + 'static,
    ) -> Self {
        Self {
            map: Arc::new(map),
            derivative: Arc::new(derivative),
        }
    }

    /// The unrotated curve point.
    pub fn curve_point(&self, w: C<T>) -> (C<T>, C<T>) {
        (self.map)(w)
    }
}

impl<T: Real> Chart<T> for RotatedCurveChart<T> {
    fn param_dim(&self) -> usize {
        2
    }
    fn position(&self, p: &[T]) -> CVector<T> {
        let (w1, w2) = (self.map)(C::new(p[0], p[1]));
        rotate_complex(w1, w2)
    }
    fn tangents(&self, p: &[T]) -> Vec<CVector<T>> {
        let (d1, d2) = (self.derivative)(C::new(p[0], p[1]));
        let i = C::new(T::zero(), T::one());
        vec![rotate_complex(d1, d2), rotate_complex(i * d1, i * d2)]
    }
}

/// `x ↦ scale·(F(x) − center)`.
#[derive(Clone)]
pub struct AffineChart<T: Real> {
    inner: Arc<dyn Chart<T>>,
    scale: T,
    center: CVector<T>,
}

impl<T: Real> AffineChart<T> {
    pub fn new(inner: Arc<dyn Chart<T>>, scale: T, center: CVector<T>) -> Self {
        Self {
            inner,
            scale,
            center,
        }
    }
}

impl<T: Real> Chart<T> for AffineChart<T> {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn target_dim(&self) -> usize {
        self.inner.target_dim()
    }
    fn position(&self, p: &[T]) -> CVector<T> {
        (&self.inner.position(p) - &self.center).scale(self.scale)
    }
    fn tangents(&self, p: &[T]) -> Vec<CVector<T>> {
        self.inner
            .tangents(p)
            .into_iter()
            .map(|v| v.scale(self.scale))
            .collect()
    }
    fn hessian(&self, p: &[T], h: &[T]) -> Vec<Vec<CVector<T>>> {
        self.inner
            .hessian(p, h)
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.scale(self.scale)).collect())
            .collect()
    }
    fn sample_spacing(&self) -> Option<Vec<T>> {
        self.inner.sample_spacing()
    }
}

/// Uniform tensor grid `lo + k·h`, `k = 0..count`, inclusive of both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub counts: Vec<usize>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, counts: Vec<usize>) -> Self {
        assert!(lo.len() == hi.len() && lo.len() == counts.len());
        assert!(counts.iter().all(|&c| c >= 2));
        Self { lo, hi, counts }
    }

    pub fn spacing(&self) -> Vec<T> {
        (0..self.lo.len())
            .map(|a| (self.hi[a] - self.lo[a]) / T::from_usize_lossy(self.counts[a] - 1))
            .collect()
    }

    /// Grid with half the spacing whose nodes include all current nodes.
    pub fn refined(&self) -> Self {
        Self {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            counts: self.counts.iter().map(|c| 2 * c - 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, idx: &[usize]) -> Vec<T> {
        let h = self.spacing();
        (0..idx.len())
            .map(|a| self.lo[a] + T::from_usize_lossy(idx[a]) * h[a])
            .collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        for (a, &i) in idx.iter().enumerate() {
            k = k * self.counts[a] + i;
        }
        k
    }

    fn unflat(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for a in (0..self.counts.len()).rev() {
            idx[a] = k % self.counts[a];
            k /= self.counts[a];
        }
        idx
    }
}

/// Chart known only through values on a uniform grid. Derivatives are those of the tensor
/// Catmull–Rom interpolant, which at nodes are centered second-order differences.
#[derive(Clone)]
pub struct SampledChart<T: Real> {
    grid: GridSpec<T>,
    h: Vec<T>,
    values: Vec<CVector<T>>,
    target: usize,
}

fn cr_weights<T: Real>(u: T) -> [T; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    let h = T::half();
    let c15 = T::lit(1.5);
    let c25 = T::lit(2.5);
    [
        -h * u3 + u2 - h * u,
        c15 * u3 - c25 * u2 + T::one(),
        -c15 * u3 + T::two() * u2 + h * u,
        h * u3 - h * u2,
    ]
}

fn cr_dweights<T: Real>(u: T) -> [T; 4] {
    let u2 = u * u;
    let h = T::half();
    let c15 = T::lit(1.5);
    let c45 = T::lit(4.5);
    [
        -c15 * u2 + T::two() * u - h,
        c45 * u2 - T::lit(5.0) * u,
        -c45 * u2 + T::lit(4.0) * u + h,
        c15 * u2 - u,
    ]
}

impl<T: Real> SampledChart<T> {
    /// Samples `chart` on `grid`.
    pub fn sample(chart: &dyn Chart<T>, grid: GridSpec<T>) -> Self {
        let values = (0..grid.len())
            .map(|k| chart.position(&grid.node(&grid.unflat(k))))
            .collect();
        Self::from_values(grid, values)
    }

    pub fn from_values(grid: GridSpec<T>, values: Vec<CVector<T>>) -> Self {
        assert_eq!(values.len(), grid.len());
        let target = values[0].n();
        let h = grid.spacing();
        Self {
            grid,
            h,
            values,
            target,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[CVector<T>] {
        &self.values
    }

    pub fn value_at(&self, idx: &[usize]) -> &CVector<T> {
        &self.values[self.grid.flat(idx)]
    }

    /// Value at a possibly out-of-range index. Missing nodes are filled by quadratic
    /// extrapolation from the nearest three along each offending axis.
    fn value_ext(&self, idx: &mut [isize]) -> CVector<T> {
        for a in 0..idx.len() {
            let last = self.grid.counts[a] as isize - 1;
            let i = idx[a];
            if i < 0 || i > last {
                let (edge, step) = if i < 0 { (0, 1) } else { (last, -1) };
                let coeffs: &[(isize, T)] = if last >= 2 {
                    &[(0, T::lit(3.0)), (1, T::lit(-3.0)), (2, T::one())]
                } else {
                    &[(0, T::two()), (1, -T::one())]
                };
                // only one ghost layer is ever requested
                let mut acc = CVector::zeros(self.target);
                for &(k, w) in coeffs {
                    idx[a] = edge + k * step;
                    acc.axpy(w, &self.value_ext(idx));
                }
                idx[a] = i;
                return acc;
            }
        }
        let j: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
        self.values[self.grid.flat(&j)].clone()
    }

    /// Base index and fractional offset along each axis.
    fn locate(&self, p: &[T]) -> Vec<(isize, T)> {
        (0..p.len())
            .map(|a| {
                let x = (p[a] - self.grid.lo[a]) / self.h[a];
                let last = self.grid.counts[a] as isize - 1;
                let mut i = x.floor().to_isize().unwrap_or(0).clamp(0, last - 1);
                let mut u = x - T::from_isize(i).unwrap();
                // Snap onto nodes so that node evaluations use the exact centered stencils.
                let snap = T::lit(1e-9);
                if (u - T::one()).abs() < snap && i < last {
                    i += 1;
                    u = T::zero();
                } else if u.abs() < snap {
                    u = T::zero();
                }
                (i, u)
            })
            .collect()
    }

    /// Nearest node if `p` sits on the grid.
    fn node_index(&self, p: &[T]) -> Option<Vec<usize>> {
        let loc = self.locate(p);
        if loc.iter().all(|(_, u)| *u == T::zero()) {
            Some(loc.iter().map(|(i, _)| *i as usize).collect())
        } else {
            None
        }
    }

    /// Tensor evaluation with per-axis weight sets selected by `deriv[a]`.
    fn tensor(&self, loc: &[(isize, T)], deriv: &[bool]) -> CVector<T> {
        let n = loc.len();
        let weights: Vec<[T; 4]> = (0..n)
            .map(|a| {
                if deriv[a] {
                    let w = cr_dweights(loc[a].1);
                    w.map(|x| x / self.h[a])
                } else {
                    cr_weights(loc[a].1)
                }
            })
            .collect();
        let mut acc = CVector::zeros(self.target);
        let total = 4usize.pow(n as u32);
        let mut idx = vec![0isize; n];
        for k in 0..total {
            let mut rem = k;
            let mut w = T::one();
            for a in 0..n {
                let o = rem % 4;
                rem /= 4;
                w = w * weights[a][o];
                idx[a] = loc[a].0 - 1 + o as isize;
            }
            if w != T::zero() {
                acc.axpy(w, &self.value_ext(&mut idx));
            }
        }
        acc
    }

    /// Second-difference stencil at a node.
    fn node_second(&self, idx: &[usize], a: usize, b: usize) -> CVector<T> {
        let at = |shift: &[(usize, isize)]| -> CVector<T> {
            let mut j: Vec<isize> = idx.iter().map(|&i| i as isize).collect();
            for &(ax, s) in shift {
                j[ax] += s;
            }
            self.value_ext(&mut j)
        };
        if a == b {
            let v = &(&at(&[(a, 1)]) + &at(&[(a, -1)])) - &at(&[]).scale(T::two());
            v.scale(T::one() / (self.h[a] * self.h[a]))
        } else {
            let v = &(&at(&[(a, 1), (b, 1)]) - &at(&[(a, 1), (b, -1)]))
                - &(&at(&[(a, -1), (b, 1)]) - &at(&[(a, -1), (b, -1)]));
            v.scale(T::one() / (T::lit(4.0) * self.h[a] * self.h[b]))
        }
    }
}

impl<T: Real> Chart<T> for SampledChart<T> {
    fn param_dim(&self) -> usize {
        self.grid.counts.len()
    }
    fn target_dim(&self) -> usize {
        self.target
    }
    fn position(&self, p: &[T]) -> CVector<T> {
        let loc = self.locate(p);
        self.tensor(&loc, &vec![false; loc.len()])
    }
    fn tangents(&self, p: &[T]) -> Vec<CVector<T>> {
        let loc = self.locate(p);
        let n = loc.len();
        (0..n)
            .map(|a| {
                let deriv: Vec<bool> = (0..n).map(|b| b == a).collect();
                self.tensor(&loc, &deriv)
            })
            .collect()
    }
    fn hessian(&self, p: &[T], _h: &[T]) -> Vec<Vec<CVector<T>>> {
        let n = self.param_dim();
        if let Some(idx) = self.node_index(p) {
            return (0..n)
                .map(|a| (0..n).map(|b| self.node_second(&idx, a, b)).collect())
                .collect();
        }
        // Off-node: differentiate the interpolated tangents.
        let h: Vec<T> = self.h.iter().map(|&x| x * T::lit(1e-3)).collect();
        let mut cols = Vec::with_capacity(n);
        let mut q = p.to_vec();
        for b in 0..n {
            q[b] = p[b] + h[b];
            let tp = self.tangents(&q);
            q[b] = p[b] - h[b];
            let tm = self.tangents(&q);
            q[b] = p[b];
            let inv = T::one() / (T::two() * h[b]);
            cols.push((0..n).map(|a| (&tp[a] - &tm[a]).scale(inv)).collect::<Vec<_>>());
        }
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (&cols[b][a] + &cols[a][b]).scale(T::half()))
                    .collect()
            })
            .collect()
    }
    fn sample_spacing(&self) -> Option<Vec<T>> {
        Some(self.h.clone())
    }
}
