//! Closed-form special Lagrangians and the grim reaper translator, as certified patches.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ambient::CVector;
use crate::chart::{FnChart, RotatedCurveChart};
use crate::domain::{Axis, Domain, End};
use crate::error::{GeomError, Result};
use crate::patch::{LagrangianPatch, ParamLoop, ANALYTIC_TOLERANCE};
use crate::scalar::{Real, C};

/// Angles of the plane `P_φ = {(e^{iφ₁}x₁, …, e^{iφₙ}xₙ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec<T> {
    phi: Vec<T>,
    pub multiplicity: u32,
}

impl<T: Real> PlaneSpec<T> {
    pub fn new(phi: Vec<T>) -> Result<Self> {
        Self::with_multiplicity(phi, 1)
    }

    pub fn with_multiplicity(phi: Vec<T>, multiplicity: u32) -> Result<Self> {
        if phi.len() < 2 {
            return Err(GeomError::InvalidArgument(
                "a plane needs at least two angles".into(),
            ));
        }
        if multiplicity == 0 || phi.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidArgument(
                "multiplicity must be positive and angles finite".into(),
            ));
        }
        let phi = phi
            .into_iter()
            .map(|x| {
                let y = x % T::two_pi();
                if y < T::zero() {
                    y + T::two_pi()
                } else {
                    y
                }
            })
            .collect();
        Ok(Self { phi, multiplicity })
    }

    /// `P₀ = Rⁿ`.
    pub fn real(n: usize) -> Self {
        Self {
            phi: vec![T::zero(); n],
            multiplicity: 1,
        }
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    /// Lagrangian angle `Σφ_j`, wrapped to `(−π, π]`.
    pub fn angle(&self) -> T {
        crate::scalar::wrap_angle(self.phi.iter().copied().sum::<T>())
    }

    /// Unit vector `e^{iφ_a} e_a`.
    pub fn direction(&self, a: usize) -> CVector<T> {
        let mut c = vec![T::zero(); 2 * self.n()];
        c[2 * a] = self.phi[a].cos();
        c[2 * a + 1] = self.phi[a].sin();
        CVector::from_raw(c)
    }
}

/// Volume of the unit ball in `Rⁿ`, the area-ratio constant of a plane.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    let mut v = if n % 2 == 0 { T::one() } else { T::two() };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v = v * T::two_pi() / T::from_usize_lossy(k);
        k += 2;
    }
    v
}

/// Area-ratio constant of the Harvey–Lawson cone (and of its smoothings by monotonicity).
pub fn hl_area_ratio<T: Real>() -> T {
    T::lit(4.0) * T::PI() * T::PI() / (T::lit(3.0) * T::lit(3.0).sqrt())
}

pub fn make_plane<T: Real>(spec: &PlaneSpec<T>, radius: T) -> Result<LagrangianPatch<T>> {
    let n = spec.n();
    let dirs: Vec<CVector<T>> = (0..n).map(|a| spec.direction(a)).collect();
    let dirs_pos = dirs.clone();
    let chart = FnChart::new(
        n,
        n,
        move |p: &[T]| {
            let mut v = CVector::zeros(n);
            for (a, d) in dirs_pos.iter().enumerate() {
                v.axpy(p[a], d);
            }
            v
        },
        move |_p: &[T]| dirs.clone(),
    );
    let (domain, ends) = if n == 2 {
        (
            Domain::Disk {
                radius,
                core: T::one().min(radius),
            },
            vec![End::high(0)],
        )
    } else {
        let bounds = vec![(-radius, radius); n];
        let ends = (0..n).flat_map(|a| [End::low(a), End::high(a)]).collect();
        (Domain::rectangle(&bounds), ends)
    };
    LagrangianPatch::new("plane", Arc::new(chart), domain)?
        .with_basepoint(vec![T::zero(); n])
        .with_ends(ends)
        .with_area_ratio_bound(unit_ball_volume(n))
        .certify(T::lit(ANALYTIC_TOLERANCE))
}

fn nonzero_c<T: Real>(a: T, b: T) -> Result<C<T>> {
    if a == T::zero() && b == T::zero() {
        return Err(GeomError::InvalidArgument("(a, b) must not be (0, 0)".into()));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(GeomError::InvalidArgument("(a, b) must be finite".into()));
    }
    Ok(C::new(a, b))
}

/// `L_{π/2}(a+ib)`: the rotation of `{w₁w₂ = c}` parametrized by `w₁ = x₁ + i x₂` on the
/// default annulus `|c|^{1/2}·[1/20, 20]`.
pub fn make_lawlor2<T: Real>(a: T, b: T) -> Result<LagrangianPatch<T>> {
    let s = nonzero_c(a, b)?.norm().sqrt();
    make_lawlor2_on(a, b, s / T::lit(20.0), s * T::lit(20.0))
}

pub fn make_lawlor2_on<T: Real>(a: T, b: T, r0: T, r1: T) -> Result<LagrangianPatch<T>> {
    make_lawlor_phi_on(T::FRAC_PI_2(), a, b, r0, r1).map(|p| p.with_name("lawlor2"))
}

/// `L_φ(a+ib)`, asymptotic to `P₀ ∪ P_φ`: the curve `{(w + cos φ·c/w, sin φ·c/w)}`, which is
/// `{w₁w₂ = c}` under the complex-linear map taking the second axis to the direction
/// `(cos φ, sin φ)`, followed by the rotation.
pub fn make_lawlor_phi_on<T: Real>(phi: T, a: T, b: T, r0: T, r1: T) -> Result<LagrangianPatch<T>> {
    let c = nonzero_c(a, b)?;
    if !(r0 > T::zero() && r1 > r0) {
        return Err(GeomError::InvalidArgument(format!(
            "annulus [{r0}, {r1}] must satisfy 0 < r0 < r1"
        )));
    }
    let (cp, sp) = (phi.cos(), phi.sin());
    if sp.abs() < T::lit(1e-12) {
        return Err(GeomError::InvalidArgument(
            "φ must not be a multiple of π (the planes would coincide)".into(),
        ));
    }
    let chart = RotatedCurveChart::new(
        move |w: C<T>| {
            let v = c / w;
            (w + v * cp, v * sp)
        },
        move |w: C<T>| {
            let d = -c / (w * w);
            (C::new(T::one(), T::zero()) + d * cp, d * sp)
        },
    );
    let unit = if r0 < T::one() && T::one() < r1 {
        T::one()
    } else {
        (r0 * r1).sqrt()
    };
    LagrangianPatch::new("lawlor-phi", Arc::new(chart), Domain::Annulus { r0, r1 })?
        .with_basepoint(vec![unit, T::zero()])
        .with_ends(vec![End::low(0), End::high(0)])
        .with_generators(vec![ParamLoop::circle(unit)])
        .with_area_ratio_bound(T::two_pi())
        .certify(T::lit(ANALYTIC_TOLERANCE))
}

/// `L(a+ib)`: the rotation of `{(cw, w²)}` on the disk `|w| ≤ 30|c|`.
pub fn make_sl_z2<T: Real>(a: T, b: T) -> Result<LagrangianPatch<T>> {
    let r = nonzero_c(a, b)?.norm();
    make_sl_z2_on(a, b, T::lit(30.0) * r)
}

pub fn make_sl_z2_on<T: Real>(a: T, b: T, radius: T) -> Result<LagrangianPatch<T>> {
    let c = nonzero_c(a, b)?;
    if !(radius > T::zero()) {
        return Err(GeomError::InvalidArgument("radius must be positive".into()));
    }
    let chart = RotatedCurveChart::new(
        move |w: C<T>| (c * w, w * w),
        move |w: C<T>| (c, w * T::two()),
    );
    LagrangianPatch::new(
        "sl-z2",
        Arc::new(chart),
        Domain::Disk {
            radius,
            core: c.norm().min(radius),
        },
    )?
    .with_ends(vec![End::high(0)])
    .with_area_ratio_bound(T::two_pi())
    .certify(T::lit(ANALYTIC_TOLERANCE))
}

/// `γ × R` for the grim reaper `γ(s) = s − i log cos s`, on
/// `[−π/2 + collar, π/2 − collar] × [−extent, extent]`.
pub fn make_grim_reaper_product<T: Real>(s_collar: T, x3_extent: T) -> Result<LagrangianPatch<T>> {
    if !(s_collar > T::zero() && s_collar < T::FRAC_PI_2()) {
        return Err(GeomError::InvalidArgument(format!(
            "collar {s_collar} must lie in (0, π/2)"
        )));
    }
    if !(x3_extent > T::zero()) {
        return Err(GeomError::InvalidArgument("extent must be positive".into()));
    }
    let z = T::zero();
    let chart = FnChart::new(
        2,
        2,
        move |p: &[T]| CVector::from_raw(vec![p[0], -p[0].cos().ln(), p[1], z]),
        move |p: &[T]| {
            vec![
                CVector::from_raw(vec![T::one(), p[0].tan(), z, z]),
                CVector::from_raw(vec![z, z, T::one(), z]),
            ]
        },
    );
    let s = T::FRAC_PI_2() - s_collar;
    LagrangianPatch::new(
        "grim-reaper",
        Arc::new(chart),
        Domain::rectangle(&[(-s, s), (-x3_extent, x3_extent)]),
    )?
    .with_basepoint(vec![T::zero(), T::zero()])
    .with_area_ratio_bound(T::lit(4.0) * T::PI())
    .certify(T::lit(ANALYTIC_TOLERANCE))
}

/// Radii `(R₁, R₂, R₃)` of the torus orbit through `s`, with their `s`-derivatives.
type RadiusFn<T> = dyn Fn(T) -> ([T; 3], [T; 3]) + Send + Sync;

fn torus_family<T: Real>(name: &str, radii: Arc<RadiusFn<T>>, s0: T, s1: T) -> Result<LagrangianPatch<T>> {
    let r_pos = radii.clone();
    let chart = FnChart::new(
        3,
        3,
        move |p: &[T]| {
            let (r, _) = r_pos(p[0]);
            let psi = -(p[1] + p[2]);
            let z = [
                C::from_polar(r[0], psi),
                C::from_polar(r[1], p[1]),
                C::from_polar(r[2], p[2]),
            ];
            CVector::from_complex(&z)
        },
        move |p: &[T]| {
            let (r, dr) = radii(p[0]);
            let psi = -(p[1] + p[2]);
            let e = [
                C::from_polar(T::one(), psi),
                C::from_polar(T::one(), p[1]),
                C::from_polar(T::one(), p[2]),
            ];
            let i = C::new(T::zero(), T::one());
            let zero = C::new(T::zero(), T::zero());
            let ds = [e[0] * dr[0], e[1] * dr[1], e[2] * dr[2]];
            let d2 = [-i * e[0] * r[0], i * e[1] * r[1], zero];
            let d3 = [-i * e[0] * r[0], zero, i * e[2] * r[2]];
            vec![
                CVector::from_complex(&ds),
                CVector::from_complex(&d2),
                CVector::from_complex(&d3),
            ]
        },
    );
    let domain = Domain::Product(vec![
        Axis::Interval { lo: s0, hi: s1 },
        Axis::Circle,
        Axis::Circle,
    ]);
    let mid = (s0 * s1).sqrt();
    LagrangianPatch::new(name, Arc::new(chart), domain)?
        // The holomorphic volume of the (s, φ₂, φ₃) frame is real negative.
        .with_orientation(-T::one())
        .with_basepoint(vec![mid, T::zero(), T::zero()])
        .with_ends(vec![End::low(0), End::high(0)])
        .with_generators(vec![
            ParamLoop::Coordinate {
                axis: 1,
                base: vec![mid, T::zero(), T::zero()],
            },
            ParamLoop::Coordinate {
                axis: 2,
                base: vec![mid, T::zero(), T::zero()],
            },
        ])
        .with_area_ratio_bound(hl_area_ratio())
        .with_check_resolution(12)
        .certify(T::lit(ANALYTIC_TOLERANCE))
}

/// The T²-cone `(s e^{−i(φ₂+φ₃)}, s e^{iφ₂}, s e^{iφ₃})` for `s ∈ [s0, s1]`, `s0 > 0`.
pub fn make_hl_cone<T: Real>(s0: T, s1: T) -> Result<LagrangianPatch<T>> {
    if !(s0 > T::zero() && s1 > s0) {
        return Err(GeomError::InvalidArgument(format!(
            "cone range [{s0}, {s1}] must satisfy 0 < s0 < s1"
        )));
    }
    let radii: Arc<RadiusFn<T>> = Arc::new(|s: T| ([s, s, s], [T::one(), T::one(), T::one()]));
    torus_family("hl-cone", radii, s0, s1)
}

/// Smoothing `L_j(a)`: the cone chart with the `j`-th radius replaced by `√(s² + a)`.
pub fn make_hl_smoothing<T: Real>(j: usize, a: T, s_min: T, s_max: T) -> Result<LagrangianPatch<T>> {
    if !(1..=3).contains(&j) {
        return Err(GeomError::InvalidArgument(format!("index {j} must be 1, 2 or 3")));
    }
    if !(a > T::zero()) || !(s_min > T::zero() && s_max > s_min) {
        return Err(GeomError::InvalidArgument(
            "need a > 0 and 0 < s_min < s_max".into(),
        ));
    }
    let k = j - 1;
    let radii: Arc<RadiusFn<T>> = Arc::new(move |s: T| {
        let mut r = [s, s, s];
        let mut dr = [T::one(), T::one(), T::one()];
        r[k] = (s * s + a).sqrt();
        dr[k] = s / r[k];
        (r, dr)
    });
    torus_family("hl-smoothing", radii, s_min, s_max)
}

/// Parameter of a gallery constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub help: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    /// Whether the example is special Lagrangian, with the constant angle.
    pub special_angle: Option<f64>,
}

const fn ps(name: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec { name, default, help }
}

pub const REGISTRY: &[GalleryEntry] = &[
    GalleryEntry {
        name: "plane",
        description: "plane P_phi in C^2",
        params: &[
            ps("phi1", 0.0, "first angle"),
            ps("phi2", 0.0, "second angle"),
            ps("radius", 20.0, "chart radius"),
        ],
        special_angle: Some(0.0),
    },
    GalleryEntry {
        name: "lawlor2",
        description: "Lagrangian catenoid family, rotation of w1*w2 = a+ib",
        params: &[
            ps("a", 1.0, "real part of the neck parameter"),
            ps("b", 0.0, "imaginary part of the neck parameter"),
            ps("r0", 0.05, "inner chart radius"),
            ps("r1", 20.0, "outer chart radius"),
        ],
        special_angle: Some(0.0),
    },
    GalleryEntry {
        name: "sl-z2",
        description: "rotation of the curve (c*w, w^2), c = a+ib",
        params: &[
            ps("a", 1.0, "real part of c"),
            ps("b", 0.0, "imaginary part of c"),
            ps("radius", 30.0, "chart radius in w"),
        ],
        special_angle: Some(0.0),
    },
    GalleryEntry {
        name: "grim-reaper",
        description: "grim reaper curve times a line (translator)",
        params: &[
            ps("collar", 0.1, "distance of the s-range from +-pi/2"),
            ps("extent", 2.0, "half-length of the line factor"),
        ],
        special_angle: None,
    },
    GalleryEntry {
        name: "hl-cone",
        description: "T^2-invariant special Lagrangian cone in C^3",
        params: &[
            ps("s0", 0.1, "inner radius parameter"),
            ps("s1", 10.0, "outer radius parameter"),
        ],
        special_angle: Some(0.0),
    },
    GalleryEntry {
        name: "hl-smoothing",
        description: "smoothing L_j(a) of the T^2 cone",
        params: &[
            ps("j", 1.0, "which radius is lifted (1, 2 or 3)"),
            ps("a", 1.0, "smoothing parameter a > 0"),
            ps("s_min", 0.1, "inner s collar"),
            ps("s_max", 10.0, "outer s"),
        ],
        special_angle: Some(0.0),
    },
];

pub fn lookup(name: &str) -> Option<&'static GalleryEntry> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Builds a registry example, filling unspecified parameters with defaults.
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<LagrangianPatch<f64>> {
    let entry = lookup(name).ok_or_else(|| {
        GeomError::InvalidArgument(format!(
            "unknown gallery example '{name}' (known: {})",
            REGISTRY.iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
        ))
    })?;
    for k in params.keys() {
        if !entry.params.iter().any(|p| p.name == k) {
            return Err(GeomError::InvalidArgument(format!(
                "example '{name}' has no parameter '{k}'"
            )));
        }
    }
    let get = |k: &str| -> f64 {
        params.get(k).copied().unwrap_or_else(|| {
            entry
                .params
                .iter()
                .find(|p| p.name == k)
                .map(|p| p.default)
                .unwrap_or(f64::NAN)
        })
    };
    match name {
        "plane" => make_plane(&PlaneSpec::new(vec![get("phi1"), get("phi2")])?, get("radius")),
        "lawlor2" => make_lawlor2_on(get("a"), get("b"), get("r0"), get("r1")),
        "sl-z2" => make_sl_z2_on(get("a"), get("b"), get("radius")),
        "grim-reaper" => make_grim_reaper_product(get("collar"), get("extent")),
        "hl-cone" => make_hl_cone(get("s0"), get("s1")),
        "hl-smoothing" => {
            let j = get("j");
            if j.fract() != 0.0 {
                return Err(GeomError::InvalidArgument("j must be an integer".into()));
            }
            make_hl_smoothing(j as usize, get("a"), get("s_min"), get("s_max"))
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::hyperkahler_rotate;
    use crate::patch::LoopForm;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn plane_angles_and_flatness() {
        let p0 = make_plane(&PlaneSpec::real(2), 5.0).unwrap();
        assert_eq!(p0.lagrangian_angle(&[1.0, 2.0]).unwrap(), 0.0);
        let pphi = make_plane(&PlaneSpec::new(vec![FRAC_PI_2, -FRAC_PI_2]).unwrap(), 5.0).unwrap();
        assert!(pphi.lagrangian_angle(&[0.3, -1.0]).unwrap().abs() < 1e-14);
        assert_eq!(pphi.second_fundamental_norm(&[0.3, 0.2]).unwrap(), 0.0);
        let p3 = make_plane(&PlaneSpec::new(vec![0.3f64, 0.5, -0.8]).unwrap(), 2.0).unwrap();
        assert!(p3.lagrangian_angle(&[0.1, 0.2, 0.3]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume::<f64>(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn lawlor_matches_printed_chart() {
        // First coordinate x₁ + i(a x₁ + b x₂)/r², second x₂ − i(b x₁ − a x₂)/r².
        let (a, b) = (0.7, -0.4);
        let l = make_lawlor2(a, b).unwrap();
        for (x1, x2) in [(1.0, 0.0), (0.3, -0.8), (-2.0, 1.5)] {
            let r2: f64 = x1 * x1 + x2 * x2;
            let expect = [x1, (a * x1 + b * x2) / r2, x2, -(b * x1 - a * x2) / r2];
            let got = l.position(&[x1, x2]);
            for k in 0..4 {
                assert!((got[k] - expect[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lawlor_is_rotation_equivariant() {
        let l = make_lawlor2(1.0, 0.0).unwrap();
        let t: f64 = 0.9;
        let (c, s) = (t.cos(), t.sin());
        let p = [0.8, 0.3];
        let q = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let fp = l.position(&p);
        let fq = l.position(&q);
        // Simultaneous rotation of (x₁, x₂) and of (y₁, y₂).
        let rot = |v: &CVector<f64>| {
            vec![
                c * v[0] - s * v[2],
                c * v[1] - s * v[3],
                s * v[0] + c * v[2],
                s * v[1] + c * v[3],
            ]
        };
        let r = rot(&fp);
        for k in 0..4 {
            assert!((r[k] - fq[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn sl_z2_example_point_and_rotation() {
        let l = make_sl_z2(1.0, 0.0).unwrap();
        let f = l.position(&[1.0, 1.0]);
        assert_eq!(f.coords(), &[1.0, 0.0, 1.0, -2.0]);
        let (a, b) = (0.4, 1.3);
        let l = make_sl_z2(a, b).unwrap();
        let w = C::new(0.6, -0.2);
        let c = C::new(a, b);
        let curve = CVector::from_complex(&[c * w, w * w]);
        let rotated = hyperkahler_rotate(&curve).unwrap();
        assert!((&rotated - &l.position(&[0.6, -0.2])).norm() < 1e-12);
    }

    #[test]
    fn constant_angles() {
        let cases: Vec<LagrangianPatch<f64>> = vec![
            make_lawlor2(1.0, 0.0).unwrap(),
            make_lawlor2(0.0, 1.0).unwrap(),
            make_sl_z2(1.0, 0.5).unwrap(),
            make_hl_cone(0.2, 3.0).unwrap(),
            make_hl_smoothing(1, 1.0, 0.1, 3.0).unwrap(),
            make_hl_smoothing(3, 0.25, 0.1, 3.0).unwrap(),
        ];
        for p in &cases {
            for (q, _) in p.domain().nodes(6) {
                let th = p.lagrangian_angle(&q).unwrap();
                assert!(th.abs() < 1e-8, "{}: θ = {th}", p.name());
            }
        }
    }

    #[test]
    fn grim_reaper_angle_equals_s() {
        let g = make_grim_reaper_product(0.1, 1.0).unwrap();
        for s in [-1.3f64, -0.4, 0.0, 0.9, 1.4] {
            assert!((g.lagrangian_angle(&[s, 0.3]).unwrap() - s).abs() < 1e-12);
        }
        let m = g.almost_calibrated_margin(40).unwrap();
        // Midpoint nodes stay inside the collar, so the margin is at least sin(collar).
        assert!(m >= 0.1f64.sin() - 1e-12 && m < 0.1f64.sin() + 0.05);
    }

    #[test]
    fn lawlor_liouville_loops() {
        let l = make_lawlor2(1.0f64, 0.0).unwrap();
        let v = l.loop_integral(&ParamLoop::circle(1.0), LoopForm::Liouville, 256).unwrap();
        assert!(v.abs() < 1e-12);
        let l = make_lawlor2(0.0, 1.0).unwrap();
        let v = l.loop_integral(&ParamLoop::circle(1.0), LoopForm::Liouville, 256).unwrap();
        // Σ Im(z̄ dz) around the circle gives 4πb.
        assert!((v - 4.0 * PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn registry_builds_every_entry() {
        for e in REGISTRY {
            let p = build(e.name, &BTreeMap::new()).unwrap();
            assert!(p.is_certified(), "{}", e.name);
        }
        assert!(build("nope", &BTreeMap::new()).is_err());
        let mut bad = BTreeMap::new();
        bad.insert("zzz".to_string(), 1.0);
        assert!(build("plane", &bad).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(make_lawlor2(0.0, 0.0).is_err());
        assert!(make_sl_z2(0.0f64, 0.0).is_err());
        assert!(make_grim_reaper_product(0.0, 1.0).is_err());
        assert!(make_grim_reaper_product(2.0, 1.0).is_err());
        assert!(make_hl_smoothing(4, 1.0, 0.1, 1.0).is_err());
        assert!(make_hl_smoothing(1, -1.0, 0.1, 1.0).is_err());
    }
}
