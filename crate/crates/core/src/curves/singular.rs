use num_traits::Zero;

use super::factor::{blow_down_poly, ProjPoint};
use super::poly::BiPoly;
use super::roots::roots;
use crate::error::{GeomError, Result};
use crate::linalg::complex_det_in_place;
use crate::scalar::{Real, C};

/// Residual accepted for a polished singular point, relative to the coefficient scale.
pub const SINGULAR_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoints<T: Real> {
    pub affine: Vec<(C<T>, C<T>)>,
    pub at_infinity: Vec<ProjPoint<T>>,
}

impl<T: Real> SingularPoints<T> {
    pub fn is_empty(&self) -> bool {
        self.affine.is_empty() && self.at_infinity.is_empty()
    }
}

/// Resultant in `y` of `f` and `g` as a polynomial in `x`, recovered from values of the Sylvester
/// determinant on a circle by a discrete Fourier transform. Coefficients in increasing order.
fn resultant_y<T: Real>(f: &BiPoly<T>, g: &BiPoly<T>) -> Vec<C<T>> {
    let m = f.degree_in_y() as usize;
    let n = g.degree_in_y() as usize;
    let bound = (f.degree().unwrap_or(0) * g.degree().unwrap_or(0)) as usize;
    let samples = bound + 1;
    let size = m + n;
    let mut vals = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = C::from_polar(T::one(), T::two_pi() * T::from_usize_lossy(k) / T::from_usize_lossy(samples));
        let mut fc = f.in_y_at(x);
        let mut gc = g.in_y_at(x);
        fc.resize(m + 1, C::zero());
        gc.resize(n + 1, C::zero());
        if size == 0 {
            vals.push(C::new(T::one(), T::zero()));
            continue;
        }
        let mut s = vec![vec![C::zero(); size]; size];
        for r in 0..n {
            for (k2, &c) in fc.iter().rev().enumerate() {
                s[r][r + k2] = c;
            }
        }
        for r in 0..m {
            for (k2, &c) in gc.iter().rev().enumerate() {
                s[n + r][r + k2] = c;
            }
        }
        vals.push(complex_det_in_place(&mut s));
    }
    (0..samples)
        .map(|j| {
            let mut acc = C::zero();
            for (k, v) in vals.iter().enumerate() {
                let ang = -T::two_pi() * T::from_usize_lossy(j * k) / T::from_usize_lossy(samples);
                acc = acc + *v * C::from_polar(T::one(), ang);
            }
            acc / T::from_usize_lossy(samples)
        })
        .collect()
}

fn scale_of<T: Real>(p: &BiPoly<T>) -> T {
    p.max_coeff().max(T::min_positive_value())
}

fn residual<T: Real>(sys: &[BiPoly<T>; 3], x: C<T>, y: C<T>) -> T {
    sys.iter()
        .map(|q| q.eval(x, y).norm() / (scale_of(q) * T::one().max(x.norm()).max(y.norm()).powi(q.degree().unwrap_or(0) as i32)))
        .fold(T::zero(), T::max)
}

/// Gauss–Newton on `(P, P_x, P_y) = 0` with the Jacobian built from second derivatives.
fn polish<T: Real>(p: &BiPoly<T>, sys: &[BiPoly<T>; 3], mut x: C<T>, mut y: C<T>) -> (C<T>, C<T>, T) {
    let (pxx, pxy, pyy) = (sys[1].dx(), sys[1].dy(), sys[2].dy());
    let mut best = residual(sys, x, y);
    for _ in 0..60 {
        if best < T::lit(SINGULAR_RESIDUAL) * T::lit(1e-3) {
            break;
        }
        let px = sys[1].eval(x, y);
        let py = sys[2].eval(x, y);
        let j = [
            [px, py],
            [pxx.eval(x, y), pxy.eval(x, y)],
            [pxy.eval(x, y), pyy.eval(x, y)],
        ];
        let r = [p.eval(x, y), px, py];
        // normal equations JᴴJ δ = −Jᴴr
        let mut a: [[C<T>; 2]; 2] = [[C::zero(); 2]; 2];
        let mut b = [C::zero(); 2];
        for row in 0..3 {
            for u in 0..2 {
                b[u] = b[u] - j[row][u].conj() * r[row];
                for v in 0..2 {
                    a[u][v] = a[u][v] + j[row][u].conj() * j[row][v];
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let trace = a[0][0].norm() + a[1][1].norm();
        if det.norm() <= T::lit(1e-28) * trace * trace {
            break;
        }
        let dx = (b[0] * a[1][1] - a[0][1] * b[1]) / det;
        let dy = (a[0][0] * b[1] - a[1][0] * b[0]) / det;
        let (nx, ny) = (x + dx, y + dy);
        let nr = residual(sys, nx, ny);
        if !(nr < best) {
            break;
        }
        x = nx;
        y = ny;
        best = nr;
    }
    (x, y, best)
}

/// Singular points of `{P = 0}` in `C²` and on the line at infinity, for `deg P ≤ 4`.
pub fn singular_points<T: Real>(p: &BiPoly<T>) -> Result<SingularPoints<T>> {
    let d = p.degree().ok_or(GeomError::ZeroPolynomial)?;
    if d > 4 {
        return Err(GeomError::UnsupportedDegree {
            found: d,
            supported: "1..=4".into(),
        });
    }
    let sys = [p.clone(), p.dx(), p.dy()];
    let mut affine: Vec<(C<T>, C<T>)> = Vec::new();
    if d >= 2 {
        let pairs = [(1, 2), (0, 1), (0, 2)];
        let mut resultant = None;
        for (a, b) in pairs {
            if sys[a].is_zero() || sys[b].is_zero() {
                continue;
            }
            let r = resultant_y(&sys[a], &sys[b]);
            let scale = scale_of(&sys[a]).powi(sys[b].degree_in_y().max(1) as i32)
                * scale_of(&sys[b]).powi(sys[a].degree_in_y().max(1) as i32);
            let mag = r.iter().map(|c| c.norm()).fold(T::zero(), T::max);
            if mag > T::lit(1e-9) * scale {
                let cleaned: Vec<C<T>> = r
                    .into_iter()
                    .map(|c| if c.norm() <= T::lit(1e-12) * mag { C::zero() } else { c })
                    .collect();
                resultant = Some(cleaned);
                break;
            }
        }
        let resultant = resultant.ok_or_else(|| {
            GeomError::InvalidArgument("polynomial shares a factor with its derivatives (not squarefree)".into())
        })?;
        for x0 in roots(&resultant)? {
            let mut ys = Vec::new();
            for q in &sys {
                let cy = q.in_y_at(x0);
                let mag = cy.iter().map(|c| c.norm()).fold(T::zero(), T::max);
                if mag <= T::lit(1e-10) * scale_of(q) {
                    continue;
                }
                let cy: Vec<C<T>> = cy
                    .into_iter()
                    .map(|c| if c.norm() <= T::lit(1e-13) * mag { C::zero() } else { c })
                    .collect();
                if cy.len() > 1 && cy[1..].iter().any(|c| !c.is_zero()) {
                    ys.extend(roots(&cy)?);
                }
            }
            for y0 in ys {
                let first = residual(&sys, x0, y0);
                if first > T::lit(1e-4) {
                    continue;
                }
                let (x1, y1, res) = polish(p, &sys, x0, y0);
                if res > T::lit(SINGULAR_RESIDUAL) {
                    return Err(GeomError::PolishingFailed {
                        last: vec![x1.re.as_f64(), x1.im.as_f64(), y1.re.as_f64(), y1.im.as_f64()],
                        residual: res.as_f64(),
                    });
                }
                let dup = affine.iter().any(|(a, b)| (*a - x1).norm() + (*b - y1).norm() < T::lit(1e-7));
                if !dup {
                    affine.push((x1, y1));
                }
            }
        }
    }
    // At infinity: ∇P̃ = (∂_x P_d, ∂_y P_d, P_{d−1}) on z = 0, so a point is singular when it is a
    // repeated factor of P_d and P_{d−1} vanishes there.
    let mut at_infinity = Vec::new();
    let top = blow_down_poly(p)?;
    let next = p.homogeneous_part(d - 1);
    let next_scale = scale_of(p);
    for f in &top.factors {
        if f.multiplicity < 2 {
            continue;
        }
        let pt = f.point_at_infinity();
        let norm = (pt.x.norm_sqr() + pt.y.norm_sqr()).sqrt();
        let v = next.eval(pt.x / norm, pt.y / norm).norm();
        if v <= T::lit(1e-8) * next_scale {
            at_infinity.push(pt);
        }
    }
    Ok(SingularPoints { affine, at_infinity })
}

pub fn has_singularity_at_infinity<T: Real>(p: &BiPoly<T>) -> Result<bool> {
    Ok(!singular_points(p)?.at_infinity.is_empty())
}
