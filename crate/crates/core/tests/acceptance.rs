//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and exits nonzero
//! if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use lagrangian_lab::asymptotics::{fit_decay, graph_over_plane, radial_energy, GraphField};
use lagrangian_lab::asymptotics::density_ratio_derivative_check;
use lagrangian_lab::chart::GridSpec;
use lagrangian_lab::curves::{
    classify_degree2, parse_poly, poly_to_lagrangian, total_curvature, BiPoly, ConicKind,
};
use lagrangian_lab::density::{gaussian_density, DensityQuery};
use lagrangian_lab::error::GeomError;
use lagrangian_lab::flow::{shrinker_residual, translator_residual};
use lagrangian_lab::gallery::{
    build, make_grim_reaper_product, make_hl_smoothing, make_lawlor2, make_lawlor2_on, make_plane,
    make_sl_z2, PlaneSpec, REGISTRY,
};
use lagrangian_lab::patch::LoopForm;
use lagrangian_lab::{Complex, Patch, Poly, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fail(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

macro_rules! tryo {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn total_curvature_case(patch: Patch, expected: f64) -> Outcome {
    let started = Instant::now();
    let tc = tryo!(total_curvature(&patch, 64));
    let secs = started.elapsed().as_secs_f64();
    let rel = (tc.value - expected).abs() / expected;
    outcome(
        rel < 0.02 && secs < 30.0,
        format!(
            "∫|A|² = {:.6} (target {:.6}, rel err {rel:.2e}, tails {:.2e})",
            tc.value,
            expected,
            tc.tails.iter().map(|t| t.value).sum::<f64>()
        ),
    )
}

fn c01_lawlor_total_curvature() -> Outcome {
    total_curvature_case(tryo!(make_lawlor2(1.0, 0.0)), 8.0 * PI)
}

fn c02_z2_total_curvature() -> Outcome {
    total_curvature_case(tryo!(make_sl_z2(1.0, 0.0)), 4.0 * PI)
}

fn c03_plane_pair_density() -> Outcome {
    let started = Instant::now();
    let p0 = tryo!(PlaneSpec::new(vec![0.0, 0.0]));
    let p1 = tryo!(PlaneSpec::new(vec![PI / 2.0, -PI / 2.0]));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &(a1, a2) in &[(0.0, 0.0), (0.5, 1.0), (1.0, 2.0), (2.0, 0.3)] {
        for &l in &[0.25f64, 1.0, 4.0] {
            // distance a1 to the real plane, a2 to the imaginary one
            let x0 = Vector::from_complex(&[c(a2, a1), c(0.0, 0.0)]);
            let radius = x0.norm() + 12.0 * l.sqrt() + 2.0;
            let planes = [tryo!(make_plane(&p0, radius)), tryo!(make_plane(&p1, radius))];
            let q = tryo!(DensityQuery::at(x0, l));
            let est = tryo!(gaussian_density(&[&planes[0], &planes[1]], &q, 1e-8));
            let exact = (-a1 * a1 / (4.0 * l)).exp() + (-a2 * a2 / (4.0 * l)).exp();
            worst = worst.max((est.value - exact).abs());
            count += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 10.0,
        format!("{count} cases, max |Θ − closed form| = {worst:.2e}"),
    )
}

/// Sample window for each gallery entry: a parameter rectangle inside the domain.
fn window(name: &str) -> (Vec<f64>, Vec<f64>) {
    match name {
        "plane" => (vec![-2.0, -2.0], vec![2.0, 2.0]),
        "lawlor2" => (vec![0.5, 0.5], vec![2.0, 2.0]),
        "sl-z2" => (vec![-2.0, -2.0], vec![2.0, 2.0]),
        "grim-reaper" => (vec![-1.0, -1.0], vec![1.0, 1.0]),
        _ => (vec![1.0, 0.0, 0.0], vec![2.0, 0.5, 0.5]),
    }
}

/// Max identity residuals over interior nodes of the coarse grid `g`, evaluated on a patch
/// sampled on `g` refined `stride − 1` times.
fn identity_residuals(p: &Patch, g: &GridSpec<f64>, stride: usize) -> Result<(f64, f64), GeomError> {
    let n = g.counts.len();
    let fine = if stride == 1 { g.clone() } else { g.refined() };
    let mut out: (f64, f64) = (0.0, 0.0);
    let total: usize = g.counts.iter().product();
    for k in 0..total {
        let mut rem = k;
        let mut idx = vec![0; n];
        let mut interior = true;
        for a in (0..n).rev() {
            idx[a] = rem % g.counts[a];
            rem /= g.counts[a];
            interior &= idx[a] >= 2 && idx[a] + 2 < g.counts[a];
        }
        if !interior {
            continue;
        }
        let fine_idx: Vec<usize> = idx.iter().map(|i| i * stride).collect();
        let s = p.sample(&fine.node(&fine_idx))?;
        out.0 = out.0.max(s.angle_residual);
        out.1 = out.1.max(s.liouville_residual);
    }
    Ok(out)
}

fn c04_identity_convergence() -> Outcome {
    // Residuals below this on both grids mean the identity holds exactly for the stencil.
    const EXACT: f64 = 1e-12;
    let order = |coarse: f64, fine: f64| {
        if coarse < EXACT && fine < EXACT {
            f64::INFINITY
        } else {
            (coarse / fine).log2()
        }
    };
    let mut lines = Vec::new();
    let mut pass = true;
    for e in REGISTRY {
        let patch = tryo!(build(e.name, &BTreeMap::new()));
        let (lo, hi) = window(e.name);
        let counts = if lo.len() == 3 { 9 } else { 17 };
        let g = GridSpec::new(lo.clone(), hi, vec![counts; lo.len()]);
        let coarse = tryo!(patch.discretize(g.clone()));
        let fine = tryo!(patch.discretize(g.refined()));
        let rc = tryo!(identity_residuals(&coarse, &g, 1));
        let rf = tryo!(identity_residuals(&fine, &g, 2));
        let (oa, ol) = (order(rc.0, rf.0), order(rc.1, rf.1));
        pass &= oa >= 1.9 && ol >= 1.9;
        lines.push(format!("{} {oa:.2}/{ol:.2}", e.name));
    }
    outcome(pass, format!("orders (angle/Liouville): {}", lines.join(", ")))
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn c05_angle_and_minimality() -> Outcome {
    let mut worst_theta: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    let mut names = Vec::new();
    for e in REGISTRY {
        let Some(theta_bar) = e.special_angle else { continue };
        let patch = tryo!(build(e.name, &BTreeMap::new()));
        names.push(e.name);
        // one refinement of the default sweep
        for (p, _) in patch.domain().nodes(32) {
            worst_theta = worst_theta.max(angle_distance(tryo!(patch.lagrangian_angle(&p)), theta_bar));
            worst_h = worst_h.max(tryo!(patch.mean_curvature(&p)).norm());
        }
    }
    outcome(
        worst_theta < 1e-8 && worst_h < 1e-5,
        format!(
            "{}: sup|θ − θ̄| = {worst_theta:.2e}, sup|H| = {worst_h:.2e}",
            names.join(", ")
        ),
    )
}

fn c06_exactness() -> Outcome {
    let lawlor = tryo!(make_lawlor2(1.0f64, 0.0));
    let gen = &lawlor.generators()[0];
    let neck = tryo!(lawlor.loop_integral(gen, LoopForm::Liouville, 512));
    let mut worst_rel: f64 = 0.0;
    let mut pts = Vec::new();
    for a in [0.25f64, 1.0, 4.0] {
        let l = tryo!(make_hl_smoothing(1, a, 0.1f64, 10.0));
        let m = tryo!(l.loop_integral(&l.generators()[0], LoopForm::Liouville, 512)).abs();
        worst_rel = worst_rel.max((m - 2.0 * PI * a).abs() / (2.0 * PI * a));
        pts.push((a, m));
    }
    let r2 = linear_r2(&pts);
    outcome(
        neck.abs() <= 1e-8 && worst_rel < 1e-4 && r2 > 0.9999,
        format!("Lawlor loop {neck:.2e}; HL |∮λ| rel err {worst_rel:.2e}, regression r² = {r2:.8}"),
    )
}

fn linear_r2(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn rand_c(rng: &mut ChaCha8Rng) -> Complex {
    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

fn linear(rng: &mut ChaCha8Rng) -> Poly {
    BiPoly::from_terms([((1, 0), rand_c(rng)), ((0, 1), rand_c(rng)), ((0, 0), rand_c(rng))])
}

fn c07_classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = Vec::new();
    let mut counts = BTreeMap::new();
    for k in 0..100 {
        // a third reducible, a third generic, a third with a square top part
        let (p, expected) = match k % 3 {
            0 => (&linear(&mut rng) * &linear(&mut rng), ConicKind::TwoPlanes),
            1 => {
                let mut p = Poly::zero();
                for e in [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)] {
                    p = &p + &BiPoly::monomial(rand_c(&mut rng), e.0, e.1);
                }
                (p, ConicKind::LawlorType)
            }
            _ => {
                let l = BiPoly::from_terms([((1, 0), rand_c(&mut rng)), ((0, 1), rand_c(&mut rng))]);
                (&l.pow(2) + &linear(&mut rng), ConicKind::ParabolaType)
            }
        };
        match classify_degree2(&p) {
            Ok(r) => {
                *counts.entry(format!("{:?}", r.kind())).or_insert(0) += 1;
                if r.kind() != expected {
                    mismatches.push(format!("{p} → {:?}", r.kind()));
                }
            }
            Err(e) => mismatches.push(format!("{p} → error {e}")),
        }
    }
    let named = [("x*y - 1", ConicKind::LawlorType), ("x^2 - y", ConicKind::ParabolaType)];
    for (s, want) in named {
        match parse_poly::<f64>(s).and_then(|p| classify_degree2(&p)) {
            Ok(r) if r.kind() == want => {}
            other => mismatches.push(format!("{s} → {:?}", other.map(|r| r.kind()))),
        }
    }
    // rotated normal forms against the gallery charts
    let mut worst: f64 = 0.0;
    let probes = [[1.0, 0.3], [0.5, -2.0], [3.0, 1.0], [-0.7, 0.9]];
    for (a, b) in [(1.0, 0.0), (2.0, 0.0), (0.5, 1.5), (-1.0, 0.25)] {
        let neck = c(a, b);
        let p = &(&BiPoly::x() * &BiPoly::y()) - &BiPoly::constant(neck);
        let lag = tryo!(poly_to_lagrangian(&p, 20.0));
        let gal = tryo!(make_lawlor2(a, b));
        for q in &probes {
            worst = worst.max((&lag.position(q) - &gal.position(q)).norm());
        }
        // L(c) and L(−c) are the same surface; the classifier returns the root with Re c ≥ 0.
        let cc = if a < 0.0 { -neck } else { neck };
        let p = &BiPoly::x().pow(2) - &BiPoly::y().scale(neck * neck);
        let lag = tryo!(poly_to_lagrangian(&p, 30.0));
        let gal = tryo!(make_sl_z2(cc.re, cc.im));
        for q in &probes {
            worst = worst.max((&lag.position(q) - &gal.position(q)).norm());
        }
    }
    outcome(
        mismatches.is_empty() && worst <= 1e-12,
        format!(
            "kinds {counts:?}, {} mismatches{}, normal-form chart deviation {worst:.2e}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn c08_monotonicity_identities() -> Outcome {
    let l = tryo!(make_lawlor2_on(1.0f64, 0.0, 1e-2, 1e2));
    let rhos = [1.0, 1.2, 1.6, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0];
    let rep = tryo!(density_ratio_derivative_check(&l, &rhos, 48, 0.01));
    let energy = tryo!(radial_energy(&l, &rhos, 80.0, 48));
    let nonincreasing = energy.windows(2).all(|w| w[1].value <= w[0].value + 1e-9);
    let mu = energy[0].mu_infinity;
    let worst_cross = energy
        .iter()
        .map(|e| e.cross_residual.abs() / mu)
        .fold(0.0, f64::max);
    let mu_err = (mu - 2.0 * PI).abs() / (2.0 * PI);
    outcome(
        rep.pass && nonincreasing && worst_cross <= 0.02 && mu_err <= 0.02,
        format!(
            "derivative identity {} (max rel mismatch {:.2e}); I nonincreasing: {nonincreasing}; \
             I + μ/ρ² vs μ∞ rel {worst_cross:.2e}; μ∞ = {mu:.6} (2π rel {mu_err:.2e})",
            if rep.pass { "agrees" } else { "disagrees" },
            rep.measured.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

fn c09_decay_fit() -> Outcome {
    let l = tryo!(make_lawlor2_on(1.0f64, 0.0, 1e-2, 1e2));
    let g = tryo!(graph_over_plane(&l, &PlaneSpec::real(2), (2.0, 50.0), 16, 12));
    let fit = tryo!(fit_decay::<f64>(&g));
    let mut synth = Vec::new();
    for alpha in [0.5, 0.0] {
        let field = tryo!(GraphField::synthetic(PlaneSpec::real(2), (1.0, 100.0), 20, 8, |r: f64, w: f64| {
            r.powf(alpha) * (1.0 + 0.1 * w.cos().powi(2))
        }));
        synth.push((alpha, tryo!(fit_decay(&field)).alpha));
    }
    let synth_ok = synth.iter().all(|(a, f)| (a - f).abs() <= 0.01);
    outcome(
        (fit.alpha + 1.0).abs() <= 0.05 && fit.alpha < 1.0 && synth_ok,
        format!("Lawlor α = {:.4} (r² {:.6}); synthetic {:?}", fit.alpha, fit.r2, synth),
    )
}

fn c10_solitons_and_density() -> Outcome {
    let g = tryo!(make_grim_reaper_product(0.1, 2.0));
    let trans = tryo!(translator_residual(&g, &Vector::basis(2, 0, false)));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut shrink: f64 = 0.0;
    for _ in 0..8 {
        let a: f64 = rng.gen_range(0.0..2.0 * PI);
        let spec = tryo!(PlaneSpec::new(vec![a, -a]));
        let p = tryo!(make_plane(&spec, 5.0));
        shrink = shrink.max(tryo!(shrinker_residual(&p, -1.0)));
    }
    let l = tryo!(make_lawlor2_on(1.0, 0.0, 1e-3, 1e3));
    let scales: Vec<f64> = (0..=8).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect();
    let mut theta = Vec::new();
    for &s in &scales {
        let q = tryo!(DensityQuery::at(Vector::zeros(2), s));
        theta.push(tryo!(gaussian_density(&[&l], &q, 1e-4)).value);
    }
    let monotone = theta.windows(2).all(|w| w[1] >= w[0] - 1e-4);
    let (small, large) = (theta[0], theta[theta.len() - 1]);
    let pass = trans < 1e-8
        && shrink < 1e-12
        && monotone
        && (small - 1.0).abs() <= 1e-3
        && (large - 2.0).abs() <= 1e-2;
    outcome(
        pass,
        format!(
            "translator {trans:.2e}, shrinker {shrink:.2e}, Θ monotone: {monotone}, \
             Θ(0, 1e-2) = {small:.3e} (limit 1 ± 1e-3), Θ(0, 1e2) = {large:.6} (limit 2 ± 1e-2)"
        ),
    )
}

fn random_sparse(rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..6) {
        let i = rng.gen_range(0..5);
        let j = rng.gen_range(0..5);
        let coeff = match rng.gen_range(0..4) {
            0 => c(rng.gen_range(-9..10) as f64, 0.0),
            1 => c(0.0, rng.gen_range(-3.0..3.0)),
            2 => c(rng.gen_range(-1e3..1e3), rng.gen_range(-1e-3..1e-3)),
            _ => rand_c(rng),
        };
        p = &p + &BiPoly::monomial(coeff, i, j);
    }
    p
}

fn c11_parser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let p = random_sparse(&mut rng);
        let printed = p.to_string();
        match parse_poly::<f64>(&printed) {
            Ok(q) if q == p && q.to_string() == printed => {}
            Ok(q) => failures.push(format!("{printed} → {q}")),
            Err(e) => failures.push(format!("{printed} → {e}")),
        }
    }
    let errors: [(&str, usize); 8] = [
        ("x^", 2),
        ("2x", 1),
        ("(x + y", 6),
        ("x + y)", 5),
        ("x % y", 2),
        ("", 0),
        ("x^65", 2),
        ("1..2", 0),
    ];
    for (s, want) in errors {
        match parse_poly::<f64>(s) {
            Err(GeomError::Syntax { offset, .. }) | Err(GeomError::ExponentOverflow { offset, .. })
                if offset == want => {}
            other => failures.push(format!("{s:?} → {other:?}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "1000 round trips and {} error cases, {} failures{}",
            errors.len(),
            failures.len(),
            failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("total curvature of the Lawlor neck is 8π", c01_lawlor_total_curvature),
        ("total curvature of the z² example is 4π", c02_z2_total_curvature),
        ("plane-pair Gaussian density", c03_plane_pair_density),
        ("identity residuals converge at second order", c04_identity_convergence),
        ("special Lagrangian angle and minimality", c05_angle_and_minimality),
        ("exactness dichotomy", c06_exactness),
        ("degree-2 classifier", c07_classifier),
        ("monotonicity identities", c08_monotonicity_identities),
        ("decay fit", c09_decay_fit),
        ("soliton residuals and density limits", c10_solitons_and_density),
        ("parser round trip and diagnostics", c11_parser),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({:.2} s)",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
