//! Roots of univariate complex polynomials: closed forms through degree four, companion matrix
//! eigenvalues above.

use num_traits::Zero;

use crate::error::{GeomError, Result};
use crate::linalg::hessenberg_eigenvalues;
use crate::scalar::{Real, C};

/// Relative clustering radius for multiplicity detection.
pub const CLUSTER_RADIUS: f64 = 1e-7;

/// Evaluates `Σ c_k t^k` by Horner's rule.
pub fn horner<T: Real>(c: &[C<T>], t: C<T>) -> C<T> {
    c.iter().rev().fold(C::zero(), |acc, &a| acc * t + a)
}

fn derivative<T: Real>(c: &[C<T>]) -> Vec<C<T>> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * T::from_usize_lossy(k))
        .collect()
}

/// Drops trailing (highest-order) zero coefficients.
fn trim<T: Real>(c: &[C<T>]) -> &[C<T>] {
    let mut n = c.len();
    while n > 0 && c[n - 1].is_zero() {
        n -= 1;
    }
    &c[..n]
}

/// All complex roots of `Σ c_k t^k`, with repetition. Coefficients are in increasing order.
pub fn roots<T: Real>(c: &[C<T>]) -> Result<Vec<C<T>>> {
    let c = trim(c);
    if c.is_empty() {
        return Err(GeomError::ZeroPolynomial);
    }
    let deg = c.len() - 1;
    let lead = c[deg];
    let m: Vec<C<T>> = c.iter().map(|&a| a / lead).collect();
    let mut r = match deg {
        0 => vec![],
        1 => vec![-m[0]],
        2 => quadratic(m[1], m[0]).to_vec(),
        3 => cubic(m[2], m[1], m[0]).to_vec(),
        4 => quartic(m[3], m[2], m[1], m[0]).to_vec(),
        _ => companion_roots(&m)?,
    };
    polish(&m, &mut r);
    Ok(r)
}

/// Newton steps on isolated roots; clustered roots are left alone since Newton only converges
/// linearly there and could merge them.
fn polish<T: Real>(m: &[C<T>], r: &mut [C<T>]) {
    let dm = derivative(m);
    let n = r.len();
    for k in 0..n {
        let scale = T::one().max(r[k].norm());
        let isolated = (0..n).all(|j| j == k || (r[j] - r[k]).norm() > T::lit(1e-4) * scale);
        if !isolated {
            continue;
        }
        for _ in 0..4 {
            let f = horner(m, r[k]);
            let df = horner(&dm, r[k]);
            if df.is_zero() {
                break;
            }
            let next = r[k] - f / df;
            if horner(m, next).norm() >= f.norm() {
                break;
            }
            r[k] = next;
        }
    }
}

fn quadratic<T: Real>(b: C<T>, c: C<T>) -> [C<T>; 2] {
    // t² + b t + c, cancellation-free form.
    let disc = (b * b - c * T::lit(4.0)).sqrt();
    let q = if (b.conj() * disc).re >= T::zero() {
        -(b + disc) * T::half()
    } else {
        -(b - disc) * T::half()
    };
    if q.is_zero() {
        return [C::zero(), C::zero()];
    }
    [q, c / q]
}

/// Zeroes quantities that are pure roundoff relative to `scale`.
fn snap<T: Real>(v: C<T>, scale: T) -> C<T> {
    if v.norm() <= T::lit(64.0) * T::eps() * scale {
        C::zero()
    } else {
        v
    }
}

fn cubic<T: Real>(a: C<T>, b: C<T>, c: C<T>) -> [C<T>; 3] {
    // t³ + a t² + b t + c with t = s − a/3: s³ + p s + q.
    let three = T::lit(3.0);
    let shift = a / three;
    let s2 = T::one().max(a.norm_sqr()).max(b.norm());
    let s3 = s2 * T::one().max(a.norm()).max(c.norm().cbrt());
    let p = snap(b - a * a / three, s2);
    let q = snap(a * a * a * T::lit(2.0 / 27.0) - a * b / three + c, s3);
    if p.is_zero() && q.is_zero() {
        return [-shift; 3];
    }
    let disc = (q * q * T::lit(0.25) + p * p * p / T::lit(27.0)).sqrt();
    let half_q = q * T::half();
    let u3 = if (-half_q + disc).norm() >= (-half_q - disc).norm() {
        -half_q + disc
    } else {
        -half_q - disc
    };
    let u = u3.cbrt();
    let omega = C::new(-T::half(), three.sqrt() * T::half());
    let mut out = [C::zero(); 3];
    let mut w = C::new(T::one(), T::zero());
    for slot in out.iter_mut() {
        let uk = u * w;
        *slot = uk - p / (uk * three) - shift;
        w = w * omega;
    }
    out
}

fn quartic<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> [C<T>; 4] {
    // t⁴ + a t³ + b t² + c t + d with t = s − a/4: s⁴ + p s² + q s + r.
    let shift = a * T::lit(0.25);
    let scale = T::one().max(a.norm()).max(b.norm().sqrt()).max(c.norm().cbrt()).max(d.norm().sqrt().sqrt());
    let a2 = a * a;
    let p = snap(b - a2 * T::lit(3.0 / 8.0), scale.powi(2));
    let q = snap(a2 * a * T::lit(0.125) - a * b * T::half() + c, scale.powi(3));
    let r = snap(
        -a2 * a2 * T::lit(3.0 / 256.0) + a2 * b * T::lit(1.0 / 16.0) - a * c * T::lit(0.25) + d,
        scale.powi(4),
    );
    let s = if q.is_zero() {
        // biquadratic
        let z = quadratic(p, r);
        [z[0].sqrt(), -z[0].sqrt(), z[1].sqrt(), -z[1].sqrt()]
    } else {
        // resolvent cubic 8m³ + 8p m² + (2p² − 8r) m − q² = 0; any nonzero root works.
        let res = cubic(p, p * p * T::lit(0.25) - r, -q * q * T::lit(0.125));
        let m = res
            .iter()
            .copied()
            .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("three roots");
        let sq = (m * T::two()).sqrt();
        let k = q / (m * T::lit(4.0));
        // s² + p/2 + m = ± sq (s − k)
        let base = p * T::half() + m;
        let r1 = quadratic(-sq, base + sq * k);
        let r2 = quadratic(sq, base - sq * k);
        [r1[0], r1[1], r2[0], r2[1]]
    };
    s.map(|v| v - shift)
}

fn companion_roots<T: Real>(monic: &[C<T>]) -> Result<Vec<C<T>>> {
    let n = monic.len() - 1;
    let mut h = vec![vec![C::zero(); n]; n];
    for j in 0..n {
        h[0][j] = -monic[n - 1 - j];
    }
    for i in 1..n {
        h[i][i - 1] = C::new(T::one(), T::zero());
    }
    hessenberg_eigenvalues(h).ok_or_else(|| GeomError::DegenerateFit("companion QR iteration did not converge".into()))
}

/// Groups roots within the relative clustering radius. Returns `(center, multiplicity)` pairs,
/// or an error when two clusters sit within ten radii of each other.
pub fn cluster<T: Real>(roots: &[C<T>]) -> Result<Vec<(C<T>, u32)>> {
    let radius = |z: C<T>| T::lit(CLUSTER_RADIUS) * T::one().max(z.norm());
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    // single linkage by repeated relabeling; n is tiny
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if label[j] != label[i] && (roots[i] - roots[j]).norm() <= radius(roots[i]).max(radius(roots[j])) {
                    let l = label[i].min(label[j]);
                    label[i] = l;
                    label[j] = l;
                    changed = true;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C<T>>)> = Vec::new();
    for (i, &l) in label.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, v)) => v.push(roots[i]),
            None => groups.push((l, vec![roots[i]])),
        }
    }
    let out: Vec<(C<T>, u32)> = groups
        .into_iter()
        .map(|(_, v)| {
            let k = v.len();
            let sum = v.into_iter().fold(C::zero(), |a, b| a + b);
            (sum / T::from_usize_lossy(k), k as u32)
        })
        .collect();
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            let dist = (out[i].0 - out[j].0).norm();
            let rad = radius(out[i].0).max(radius(out[j].0));
            if dist <= T::lit(10.0) * rad {
                return Err(GeomError::ClusterAmbiguity {
                    distance: dist.as_f64(),
                    radius: rad.as_f64(),
                });
            }
        }
    }
    Ok(out)
}
