//! Parameter domains of charts and the structured quadrature laid over them.
//!
//! Every domain has "natural coordinates": the chart parameters themselves for products of
//! intervals and circles, and polar `(r, φ)` for the annulus and disk descriptors (whose chart
//! parameters are Cartesian). Natural axis 0 is the "line" axis used by ball-restricted
//! integration and by end/tail bookkeeping.

use crate::scalar::Real;

/// One factor of a product domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis<T> {
    Interval { lo: T, hi: T },
    /// A periodic coordinate on `[0, 2π)`.
    Circle,
}

impl<T: Real> Axis<T> {
    pub fn bounds(&self) -> (T, T) {
        match *self {
            Axis::Interval { lo, hi } => (lo, hi),
            Axis::Circle => (T::zero(), T::two_pi()),
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Axis::Circle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain<T> {
    /// Product of intervals and circles; chart parameters are the product coordinates.
    Product(Vec<Axis<T>>),
    /// Planar annulus `r0 ≤ |p| ≤ r1` in Cartesian parameters, with log-radial quadrature.
    Annulus { r0: T, r1: T },
    /// Planar disk `|p| ≤ radius` in Cartesian parameters. `core` is the length scale near the
    /// center that the stretched radial quadrature resolves uniformly.
    Disk { radius: T, core: T },
}

/// A boundary piece of the domain beyond which the surface continues to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct End {
    pub axis: usize,
    pub high: bool,
}

impl End {
    pub const fn high(axis: usize) -> Self {
        Self { axis, high: true }
    }
    pub const fn low(axis: usize) -> Self {
        Self { axis, high: false }
    }
}

/// A line of the natural axis-0 foliation, with fixed values of the remaining natural
/// coordinates and the transverse quadrature weight.
#[derive(Debug, Clone)]
pub struct Line<T> {
    pub fixed: Vec<T>,
    pub weight: T,
}

fn midpoints<T: Real>(lo: T, hi: T, n: usize) -> impl Iterator<Item = (T, T)> {
    let h = (hi - lo) / T::from_usize_lossy(n);
    (0..n).map(move |k| (lo + (T::from_usize_lossy(k) + T::half()) * h, h))
}

impl<T: Real> Domain<T> {
    pub fn rectangle(bounds: &[(T, T)]) -> Self {
        Domain::Product(
            bounds
                .iter()
                .map(|&(lo, hi)| Axis::Interval { lo, hi })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Product(axes) => axes.len(),
            _ => 2,
        }
    }

    pub fn is_polar(&self) -> bool {
        !matches!(self, Domain::Product(_))
    }

    pub fn contains(&self, p: &[T]) -> bool {
        let slack = T::lit(1e-12);
        match self {
            Domain::Product(axes) => axes.iter().zip(p).all(|(ax, x)| match *ax {
                Axis::Interval { lo, hi } => {
                    let s = slack * (T::one() + lo.abs().max(hi.abs()));
                    *x >= lo - s && *x <= hi + s
                }
                Axis::Circle => x.is_finite(),
            }),
            Domain::Annulus { r0, r1 } => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                r >= *r0 * (T::one() - slack) && r <= *r1 * (T::one() + slack)
            }
            Domain::Disk { radius, .. } => {
                (p[0] * p[0] + p[1] * p[1]).sqrt() <= *radius * (T::one() + slack)
            }
        }
    }

    /// Reference point for angle continuation: the center of a product, a point on the
    /// geometric-mean circle of an annulus, the center of a disk.
    pub fn default_basepoint(&self) -> Vec<T> {
        match self {
            Domain::Product(axes) => axes
                .iter()
                .map(|ax| {
                    let (lo, hi) = ax.bounds();
                    if ax.is_periodic() {
                        T::zero()
                    } else {
                        (lo + hi) * T::half()
                    }
                })
                .collect(),
            Domain::Annulus { r0, r1 } => vec![(*r0 * *r1).sqrt(), T::zero()],
            Domain::Disk { .. } => vec![T::zero(), T::zero()],
        }
    }

    /// Characteristic length at `p`, used to scale finite-difference steps.
    pub fn local_scale(&self, p: &[T]) -> T {
        match self {
            Domain::Product(_) => T::one(),
            Domain::Annulus { .. } => (p[0] * p[0] + p[1] * p[1]).sqrt(),
            Domain::Disk { core, .. } => (p[0] * p[0] + p[1] * p[1]).sqrt().max(*core),
        }
    }

    /// Natural coordinates of a parameter point.
    pub fn to_natural(&self, p: &[T]) -> Vec<T> {
        match self {
            Domain::Product(_) => p.to_vec(),
            _ => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let mut phi = p[1].atan2(p[0]);
                if phi < T::zero() {
                    phi = phi + T::two_pi();
                }
                vec![r, phi]
            }
        }
    }

    /// Parameter point and the Jacobian factor `dparam / dnatural` (as a density).
    pub fn from_natural(&self, s: &[T]) -> (Vec<T>, T) {
        match self {
            Domain::Product(_) => (s.to_vec(), T::one()),
            _ => {
                let (r, phi) = (s[0], s[1]);
                (vec![r * phi.cos(), r * phi.sin()], r)
            }
        }
    }

    /// Bounds of natural axis `axis`.
    pub fn natural_bounds(&self, axis: usize) -> (T, T) {
        match self {
            Domain::Product(axes) => axes[axis].bounds(),
            Domain::Annulus { r0, r1 } => {
                if axis == 0 {
                    (*r0, *r1)
                } else {
                    (T::zero(), T::two_pi())
                }
            }
            Domain::Disk { radius, .. } => {
                if axis == 0 {
                    (T::zero(), *radius)
                } else {
                    (T::zero(), T::two_pi())
                }
            }
        }
    }

    /// Map from the line variable `u ∈ [0, 1]` to natural axis-0 coordinate `s`, with `ds/du`.
    /// Annuli use a logarithmic map and disks a sinh stretch, so that uniform `u` resolves
    /// both the core and the far field.
    pub fn line_coordinate(&self, u: T) -> (T, T) {
        match self {
            Domain::Product(axes) => {
                let (lo, hi) = axes[0].bounds();
                (lo + u * (hi - lo), hi - lo)
            }
            Domain::Annulus { r0, r1 } => {
                let l = (*r1 / *r0).ln();
                let r = *r0 * (u * l).exp();
                (r, r * l)
            }
            Domain::Disk { radius, core } => {
                let k = (*radius / *core).asinh().max(T::lit(1e-3));
                let sk = k.sinh();
                let r = *radius * (k * u).sinh() / sk;
                (r, *radius * k * (k * u).cosh() / sk)
            }
        }
    }

    /// Inverse of [`Domain::line_coordinate`].
    pub fn line_parameter(&self, s: T) -> T {
        match self {
            Domain::Product(axes) => {
                let (lo, hi) = axes[0].bounds();
                (s - lo) / (hi - lo)
            }
            Domain::Annulus { r0, r1 } => (s / *r0).ln() / (*r1 / *r0).ln(),
            Domain::Disk { radius, core } => {
                let k = (*radius / *core).asinh().max(T::lit(1e-3));
                (s / *radius * k.sinh()).asinh() / k
            }
        }
    }

    /// Transverse lines at resolution `res` (cells per transverse axis).
    pub fn lines(&self, res: usize) -> Vec<Line<T>> {
        match self {
            Domain::Product(axes) => {
                let mut lines = vec![Line {
                    fixed: Vec::new(),
                    weight: T::one(),
                }];
                for ax in &axes[1..] {
                    let (lo, hi) = ax.bounds();
                    let mut next = Vec::with_capacity(lines.len() * res);
                    for line in &lines {
                        for (x, h) in midpoints(lo, hi, res) {
                            let mut fixed = line.fixed.clone();
                            fixed.push(x);
                            next.push(Line {
                                fixed,
                                weight: line.weight * h,
                            });
                        }
                    }
                    lines = next;
                }
                lines
            }
            _ => midpoints(T::zero(), T::two_pi(), res)
                .map(|(phi, h)| Line {
                    fixed: vec![phi],
                    weight: h,
                })
                .collect(),
        }
    }

    /// Point on a line at line variable `u`: `(param, dparam/du, density)` where `density`
    /// includes both the natural-coordinate Jacobian and `ds/du`.
    pub fn line_point(&self, line: &Line<T>, u: T) -> (Vec<T>, Vec<T>, T) {
        let (s, ds) = self.line_coordinate(u);
        let mut nat = Vec::with_capacity(line.fixed.len() + 1);
        nat.push(s);
        nat.extend_from_slice(&line.fixed);
        let (p, jac) = self.from_natural(&nat);
        let dp = match self {
            Domain::Product(_) => {
                let mut d = vec![T::zero(); p.len()];
                d[0] = ds;
                d
            }
            _ => {
                let phi = line.fixed[0];
                vec![ds * phi.cos(), ds * phi.sin()]
            }
        };
        (p, dp, jac * ds)
    }

    /// Composite midpoint nodes `(param, weight)`; weights integrate functions against the
    /// parameter Lebesgue measure.
    pub fn nodes(&self, res: usize) -> Vec<(Vec<T>, T)> {
        let res = res.max(1);
        let lines = self.lines(res);
        let mut out = Vec::with_capacity(lines.len() * res);
        for line in &lines {
            for (u, du) in midpoints(T::zero(), T::one(), res) {
                let (p, _, dens) = self.line_point(line, u);
                out.push((p, line.weight * dens * du));
            }
        }
        out
    }

    /// Nodes grouped by transverse line, for parallel evaluation with a fixed reduction order.
    pub fn node_rows(&self, res: usize) -> Vec<Vec<(Vec<T>, T)>> {
        let res = res.max(1);
        self.lines(res)
            .iter()
            .map(|line| {
                midpoints(T::zero(), T::one(), res)
                    .map(|(u, du)| {
                        let (p, _, dens) = self.line_point(line, u);
                        (p, line.weight * dens * du)
                    })
                    .collect()
            })
            .collect()
    }

    /// Nodes on the slice `natural[axis] = value`, weighted so that summing `f * weight`
    /// gives the density of the integral with respect to `natural[axis]`.
    pub fn slab(&self, axis: usize, value: T, res: usize) -> Vec<(Vec<T>, T)> {
        let dim = self.dim();
        let mut nats: Vec<(Vec<T>, T)> = vec![(Vec::new(), T::one())];
        for k in 0..dim {
            let mut next = Vec::new();
            for (nat, w) in &nats {
                if k == axis {
                    let mut v = nat.clone();
                    v.push(value);
                    next.push((v, *w));
                } else {
                    let (lo, hi) = self.natural_bounds(k);
                    for (x, h) in midpoints(lo, hi, res) {
                        let mut v = nat.clone();
                        v.push(x);
                        next.push((v, *w * h));
                    }
                }
            }
            nats = next;
        }
        nats.into_iter()
            .map(|(nat, w)| {
                let (p, jac) = self.from_natural(&nat);
                (p, w * jac)
            })
            .collect()
    }

    /// Sample points on the face of an end.
    pub fn face(&self, end: End, res: usize) -> Vec<Vec<T>> {
        let (lo, hi) = self.natural_bounds(end.axis);
        let v = if end.high { hi } else { lo };
        self.slab(end.axis, v, res).into_iter().map(|(p, _)| p).collect()
    }

    /// Interpolating path between two parameter points, with its derivative in `t ∈ [0, 1]`.
    /// Products interpolate linearly (circles along the shorter arc), annuli in polar
    /// coordinates so the path stays inside the domain.
    pub fn path(&self, a: &[T], b: &[T], t: T) -> (Vec<T>, Vec<T>) {
        match self {
            Domain::Product(axes) => {
                let mut p = Vec::with_capacity(a.len());
                let mut d = Vec::with_capacity(a.len());
                for (k, ax) in axes.iter().enumerate() {
                    let delta = if ax.is_periodic() {
                        crate::scalar::wrap_angle(b[k] - a[k])
                    } else {
                        b[k] - a[k]
                    };
                    p.push(a[k] + t * delta);
                    d.push(delta);
                }
                (p, d)
            }
            Domain::Annulus { .. } => {
                let na = self.to_natural(a);
                let nb = self.to_natural(b);
                let dr = nb[0] - na[0];
                let dphi = crate::scalar::wrap_angle(nb[1] - na[1]);
                let r = na[0] + t * dr;
                let phi = na[1] + t * dphi;
                let (c, s) = (phi.cos(), phi.sin());
                (
                    vec![r * c, r * s],
                    vec![dr * c - r * s * dphi, dr * s + r * c * dphi],
                )
            }
            Domain::Disk { .. } => {
                let p = vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                (p, vec![b[0] - a[0], b[1] - a[1]])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_area() {
        let rect = Domain::rectangle(&[(0.0, 2.0), (-1.0, 0.5)]);
        let area: f64 = rect.nodes(7).iter().map(|(_, w)| w).sum();
        assert!((area - 3.0).abs() < 1e-12);

        let ann = Domain::Annulus { r0: 0.5, r1: 4.0 };
        let exact = std::f64::consts::PI * (16.0 - 0.25);
        let a1: f64 = ann.nodes(64).iter().map(|(_, w)| w).sum();
        let a2: f64 = ann.nodes(128).iter().map(|(_, w)| w).sum();
        assert!((a1 - exact).abs() / exact < 1e-3);
        assert!((a2 - exact).abs() < (a1 - exact).abs());

        let disk = Domain::Disk { radius: 10.0, core: 1.0 };
        let a: f64 = disk.nodes(200).iter().map(|(_, w)| w).sum();
        assert!((a - std::f64::consts::PI * 100.0).abs() / (std::f64::consts::PI * 100.0) < 1e-4);
    }

    #[test]
    fn slab_density_matches_circumference() {
        let ann = Domain::Annulus { r0: 1.0, r1: 3.0 };
        let s: f64 = ann.slab(0, 2.0, 50).iter().map(|(_, w)| w).sum();
        assert!((s - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn annulus_path_stays_inside() {
        let ann = Domain::Annulus { r0: 0.5, r1: 2.0 };
        let a = [1.0, 0.0];
        let b = [-1.0, 0.0];
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let (p, _) = ann.path(&a, &b, t);
            assert!(ann.contains(&p));
        }
    }

    #[test]
    fn line_parameter_inverts_line_coordinate() {
        for d in [
            Domain::Annulus { r0: 0.1, r1: 30.0 },
            Domain::Disk { radius: 50.0, core: 0.5 },
            Domain::rectangle(&[(-1.0, 2.0), (0.0, 1.0)]),
        ] {
            for u in [0.0f64, 0.3, 0.77, 1.0] {
                let (s, _) = d.line_coordinate(u);
                assert!((d.line_parameter(s) - u).abs() < 1e-12);
            }
        }
    }
}
