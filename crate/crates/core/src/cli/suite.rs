//! The full reproduction suite behind `copol verify-paper`.
//!
//! Each criterion is a pure function of the config and yields one
//! sub-report; the suite may run them on several threads and always
//! assembles them in name order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::maps::{SelfMap, CLASSIFY_TOL};
use crate::operators::{
    adjoint, build_matrix, check_product_isometry, compose_ops, gram_block, isometry_defect, kernel_adjoint_check,
    norm_bounds, op_norm_est, product_matrix, unitary_defect, verify_composition_structure, Bound, NormOptions, OpMatrix,
    OperatorError, ProductOptions, ProductVariant, Report,
};
use crate::quadrature::{QuadSpec, Quadrature};
use crate::series::TruncSeries;
use crate::spaces::SpaceSpec;

/// Number of random polynomial pairs in the quadrature cross-check.
pub const ORACLE_PAIRS: usize = 200;
pub const ORACLE_MAX_DEGREE: usize = 12;
pub const MONOMIAL_MAX_DEGREE: usize = 40;

type Criterion = fn(&ExperimentConfig) -> Report;

/// Criteria in report order.
pub const CRITERIA: [(&str, Criterion); 10] = [
    ("01-norm-z3-s2", norm_z3_s2),
    ("02-adjoint-product-norm-s2", adjoint_product_norm_s2),
    ("03-norm-one-criterion", norm_one_criterion),
    ("04-rotation-isometries", rotation_isometries),
    ("05-product-isometries", product_isometries),
    ("06-kernel-adjoint-identity", kernel_identity),
    ("07-kernel-closed-forms", kernel_closed_forms),
    ("08-composition-structure", composition_structure),
    ("09-quadrature-oracle", quadrature_oracle),
    ("10-truncation-honesty", truncation_honesty),
];

pub fn run_suite(cfg: &ExperimentConfig, parallel: bool) -> Report {
    let mut children: Vec<Report> = if parallel {
        CRITERIA.par_iter().map(|(name, f)| named(name, f(cfg))).collect()
    } else {
        CRITERIA.iter().map(|(name, f)| named(name, f(cfg))).collect()
    };
    children.sort_by(|a, b| a.check_name.cmp(&b.check_name));
    let mut suite = Report::new("verify-paper", cfg.tolerances.defect_zero)
        .input("space", cfg.space)
        .input("truncation", cfg.truncation)
        .input("seed", cfg.seed);
    for c in children {
        suite.child(c);
    }
    suite
}

fn named(name: &str, mut r: Report) -> Report {
    r.check_name = name.to_string();
    r
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn norm_opts(cfg: &ExperimentConfig) -> NormOptions {
    NormOptions { seed: cfg.seed, ..NormOptions::default() }
}

fn bergman(alpha: f64) -> SpaceSpec {
    SpaceSpec::WeightedBergman { alpha }
}

fn rotation(theta: f64) -> SelfMap {
    SelfMap::rotation(Complex64::from_polar(1.0, theta)).expect("unimodular")
}

fn poly_045() -> SelfMap {
    SelfMap::real_polynomial(&[0.0, 0.45, 0.45]).expect("interior polynomial")
}

/// Origin-fixing symbols used across the suite.
fn origin_fixing() -> Vec<(&'static str, SelfMap)> {
    vec![
        ("z2", SelfMap::monomial(2)),
        ("z3", SelfMap::monomial(3)),
        ("0.45z+0.45z2", poly_045()),
        ("rot(i)", rotation(PI / 2.0)),
        ("rot(pi/4)", rotation(PI / 4.0)),
    ]
}

fn all_spaces() -> Vec<SpaceSpec> {
    vec![SpaceSpec::Hardy, SpaceSpec::DerivativeHardy, bergman(0.0), bergman(0.5), bergman(2.0)]
}

/// Records an operator error as a failed metric instead of aborting.
fn guard<T>(r: &mut Report, name: &str, res: Result<T, OperatorError>) -> Option<T> {
    match res {
        Ok(v) => Some(v),
        Err(e) => {
            r.fail(name, format!("refused: {e}"));
            None
        }
    }
}

fn norm_z3_s2(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.norm_exact;
    let mut r = Report::new("", tol).input("symbol", "z3").input("space", "s2").input("trunc_order", n);
    if let Some(m) = guard(&mut r, "build", build_matrix(&SelfMap::monomial(3), SpaceSpec::DerivativeHardy, n)) {
        if let Some(est) = guard(&mut r, "norm_estimate", op_norm_est(&m, &norm_opts(cfg))) {
            r.metric("norm_estimate", est.value, Bound::Within { target: 3.0, tol });
            r.info("iterations", est.iterations as f64);
        }
    }
    r
}

fn adjoint_product_norm_s2(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.norm_exact;
    let mut r = Report::new("", tol).input("product", "C_id* C_z3").input("space", "s2").input("trunc_order", n);
    let id = rotation(0.0);
    let z3 = SelfMap::monomial(3);
    r.flag("both_fix_origin", id.fixes_origin(0.0) && z3.fixes_origin(0.0));
    let prod = build_matrix(&id, SpaceSpec::DerivativeHardy, n).and_then(|a| {
        let b = build_matrix(&z3, SpaceSpec::DerivativeHardy, n)?;
        compose_ops(&adjoint(&a), &b)
    });
    if let Some(p) = guard(&mut r, "build", prod) {
        if let Some(est) = guard(&mut r, "norm_estimate", op_norm_est(&p, &norm_opts(cfg))) {
            r.metric("norm_estimate", est.value, Bound::Within { target: 3.0, tol });
        }
    }
    r.note("both symbols fix the origin, yet the product norm is 3 on S2");
    r
}

fn norm_one_criterion(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.norm_agreement;
    let opts = norm_opts(cfg);
    let mut r = Report::new("", tol).input("trunc_order", n);
    let maps = origin_fixing();
    let moeb = SelfMap::moebius(c(1.0, 0.0), c(0.5, 0.0)).expect("automorphism");
    for alpha in [0.0, 0.5, 2.0] {
        let space = bergman(alpha);
        for (lp, phi) in &maps {
            for (lq, psi) in &maps {
                let name = format!("norm/{lp}*{lq}/{space}");
                let est = product_matrix(phi, psi, space, n, ProductVariant::PhiStarPsi)
                    .and_then(|p| op_norm_est(&p, &opts));
                if let Some(est) = guard(&mut r, &name, est) {
                    r.metric(&name, est.value, Bound::Within { target: 1.0, tol });
                }
            }
        }
        let Some(b) = guard(&mut r, "moebius_bounds", norm_bounds(&moeb, space)) else { continue };
        for (lq, psi) in &maps {
            let name = format!("norm/moebius(1;0.5)*{lq}/{space}");
            let est = product_matrix(&moeb, psi, space, n, ProductVariant::PhiStarPsi)
                .and_then(|p| op_norm_est(&p, &opts));
            if let Some(est) = guard(&mut r, &name, est) {
                r.metric(&name, est.value, Bound::InRange { lo: b.lower - tol, hi: b.upper + tol });
                r.flag(&format!("{name}/exceeds_one"), est.value > 1.0 + tol);
            }
        }
    }
    r
}

fn rotation_isometries(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let t = cfg.tolerances;
    let mut r = Report::new("", t.defect_zero).input("trunc_order", n);
    for (label, theta) in [("rot(1)", 0.0), ("rot(i)", PI / 2.0), ("rot(pi/4)", PI / 4.0)] {
        for space in all_spaces() {
            let Some(m) = guard(&mut r, &format!("build/{label}/{space}"), build_matrix(&rotation(theta), space, n))
            else {
                continue;
            };
            if let Some(d) = guard(&mut r, &format!("isometry/{label}/{space}"), isometry_defect(&m)) {
                r.metric(&format!("isometry/{label}/{space}"), d.value, Bound::AtMost { limit: t.defect_zero });
            }
            if let Some(d) = guard(&mut r, &format!("unitary/{label}/{space}"), unitary_defect(&m)) {
                r.metric(&format!("unitary/{label}/{space}"), d.value, Bound::AtMost { limit: t.defect_zero });
            }
        }
    }
    let a2 = bergman(0.0);
    for (label, map, band) in [
        ("z2", SelfMap::monomial(2), Some(0.5)),
        ("z3", SelfMap::monomial(3), None),
        ("0.45z+0.45z2", poly_045(), None),
    ] {
        let name = format!("isometry/{label}/{a2}");
        let Some(m) = guard(&mut r, &name, build_matrix(&map, a2, n)) else { continue };
        if let Some(d) = guard(&mut r, &name, isometry_defect(&m)) {
            let bound = match band {
                Some(hi) => Bound::InRange { lo: t.defect_floor, hi },
                None => Bound::AtLeast { limit: t.defect_floor },
            };
            r.metric(&name, d.value, bound);
            let g11 = gram_block(&m, 2)[(1, 1)].re;
            if label == "z2" {
                r.metric(&format!("gram_defect_e1/{label}/{a2}"), 1.0 - g11, Bound::Within { target: 1.0 / 3.0, tol: t.exactness });
            } else {
                r.info(&format!("gram_defect_e1/{label}/{a2}"), 1.0 - g11);
            }
        }
    }
    r
}

fn product_isometries(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let t = cfg.tolerances;
    let space = bergman(0.0);
    let opts = ProductOptions { zero_tol: t.defect_zero, norm_tol: t.norm_agreement, norm: norm_opts(cfg) };
    let mut r = Report::new("", t.defect_zero).input("space", space).input("trunc_order", n);
    let ri = rotation(PI / 2.0);
    let rmu = rotation(PI / 3.0);
    let z2 = SelfMap::monomial(2);
    let pairs = [("rot(i)", &ri, "rot(pi/3)", &rmu), ("rot(i)", &ri, "z2", &z2), ("z2", &z2, "rot(i)", &ri), ("z2", &z2, "z2", &z2)];
    let mut consistent = 0usize;
    for variant in [ProductVariant::PhiPsiStar, ProductVariant::PhiStarPsi] {
        for (lp, phi, lq, psi) in pairs {
            let name = format!("{}/{lp}/{lq}", variant.label());
            let Some(mut child) = guard(&mut r, &name, check_product_isometry(phi, psi, space, n, variant, &opts)) else {
                continue;
            };
            child.check_name = name.clone();
            let both = phi.is_rotation(CLASSIFY_TOL) && psi.is_rotation(CLASSIFY_TOL);
            let mixed = phi.is_rotation(CLASSIFY_TOL) != psi.is_rotation(CLASSIFY_TOL);
            if let Some(d) = child.value("isometry_defect") {
                if both {
                    r.metric(&format!("{name}/defect"), d, Bound::AtMost { limit: t.defect_zero });
                } else if mixed {
                    r.metric(&format!("{name}/defect"), d, Bound::AtLeast { limit: t.mixed_defect_floor });
                } else {
                    r.info(&format!("{name}/defect"), d);
                }
            }
            if child.passed() {
                consistent += 1;
            }
            r.child(child);
        }
    }
    r.metric("iff_consistent_pairs", consistent as f64, Bound::Within { target: 8.0, tol: 0.0 });
    r
}

fn kernel_identity(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.kernel;
    let mut r = Report::new("", tol).input("trunc_order", n);
    let maps = [("z2", SelfMap::monomial(2)), ("z3", SelfMap::monomial(3)), ("rot(i)", rotation(PI / 2.0))];
    let points = [("0", c(0.0, 0.0)), ("0.3", c(0.3, 0.0)), ("0.5i", c(0.0, 0.5)), ("-0.4+0.2i", c(-0.4, 0.2))];
    for (label, map) in &maps {
        for space in [bergman(0.0), bergman(1.0), SpaceSpec::Hardy] {
            for (wl, w) in points {
                let name = format!("residual/{label}/{space}/w={wl}");
                if let Some(k) = guard(&mut r, &name, kernel_adjoint_check(map, space, w, n)) {
                    r.metric(&name, k.residual, Bound::AtMost { limit: tol });
                }
            }
        }
    }
    r
}

fn kernel_closed_forms(cfg: &ExperimentConfig) -> Report {
    let n = 2 * cfg.truncation;
    let tol = cfg.tolerances.closed_form;
    let mut r = Report::new("", tol).input("trunc_order", n);
    let ws = [c(0.0, 0.0), c(0.3, 0.0), c(0.6, 0.0), c(0.0, 0.6), c(-0.42, 0.42), Complex64::from_polar(0.5, 2.0)];
    let zs = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, -0.6), c(0.3, 0.4), c(-0.55, -0.2)];
    for alpha in [0.0, 1.0] {
        let space = bergman(alpha);
        let mut pointwise = 0.0f64;
        let mut norms = 0.0f64;
        for &w in &ws {
            let k = space.kernel(w, n).expect("|w| < 1");
            for &z in &zs {
                let exact = space.kernel_closed_form(w, z).expect("Bergman closed form");
                pointwise = pointwise.max((k.eval(z) - exact).norm());
            }
            let exact = space.kernel_norm_sq_closed_form(w).expect("Bergman closed form");
            norms = norms.max((space.kernel_norm_sq(w, n).expect("|w| < 1") - exact).abs());
        }
        r.metric(&format!("pointwise/{space}"), pointwise, Bound::AtMost { limit: tol });
        r.metric(&format!("norm_sq/{space}"), norms, Bound::AtMost { limit: tol });
    }
    r
}

fn composition_structure(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.exactness;
    let mut r = Report::new("", tol).input("trunc_order", n);
    let symbols = [
        ("z2", SelfMap::monomial(2)),
        ("z3", SelfMap::monomial(3)),
        ("0.45z+0.45z2", poly_045()),
        ("rot(pi/3)", rotation(PI / 3.0)),
    ];
    for (label, map) in &symbols {
        for space in [bergman(0.0), SpaceSpec::DerivativeHardy, SpaceSpec::Hardy] {
            let name = format!("{label}/{space}");
            let verdict = build_matrix(map, space, n).and_then(|m| verify_composition_structure(&m, tol));
            if let Some(mut child) = guard(&mut r, &name, verdict) {
                child.check_name = name;
                r.child(child);
            }
        }
    }

    // Matrices that are not composition operators must be rejected.
    let a2 = bergman(0.0);
    let mut synthetic: Vec<(&str, Result<OpMatrix, OperatorError>)> = Vec::new();
    let doubling: Vec<Complex64> = (0..=n).map(|j| c(2f64.powi(j as i32), 0.0)).collect();
    synthetic.push(("scaled-diagonal", OpMatrix::synthetic_diagonal(a2, &doubling)));
    synthetic.push(("perturbed-entry", build_matrix(&SelfMap::monomial(2), a2, n).map(|m| m.perturbed(4, 2, c(0.01, 0.0)))));
    synthetic.push(("te0-not-e0", OpMatrix::synthetic_diagonal(a2, &vec![c(2.0, 0.0); n + 1])));
    for (label, m) in synthetic {
        let name = format!("reject/{label}");
        let Some(rep) = guard(&mut r, &name, m.and_then(|m| verify_composition_structure(&m, tol))) else { continue };
        let violated = rep.first_failure().map(str::to_string);
        r.flag(&name, !rep.passed() && violated.is_some());
        if let Some(v) = violated {
            r.note(format!("{label}: first violated condition `{v}`"));
        }
    }
    r
}

/// Random complex polynomial of degree at most `max_degree`, coefficients in the unit square.
pub fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> TruncSeries {
    let d = rng.gen_range(0..=max_degree);
    let coeffs = (0..=d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    TruncSeries::new(coeffs).expect("finite coefficients")
}

fn quadrature_oracle(cfg: &ExperimentConfig) -> Report {
    let tol = cfg.tolerances.quadrature;
    let mut r = Report::new("", tol).input("pairs", ORACLE_PAIRS).input("max_degree", ORACLE_MAX_DEGREE);
    let quad = Quadrature::new(QuadSpec::default()).expect("default rule is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<_> = (0..ORACLE_PAIRS)
        .map(|_| (random_poly(&mut rng, ORACLE_MAX_DEGREE), random_poly(&mut rng, ORACLE_MAX_DEGREE)))
        .collect();
    let spaces = [SpaceSpec::Hardy, SpaceSpec::DerivativeHardy, bergman(0.0), bergman(0.5), bergman(1.5), bergman(2.0)];
    for space in spaces {
        let worst = pairs
            .par_iter()
            .map(|(f, g)| (space.inner_product(f, g) - quad.inner(space, f, g)).norm())
            .reduce(|| 0.0, f64::max);
        r.metric(&format!("inner_product/{space}"), worst, Bound::AtMost { limit: tol });
    }
    let mtol = cfg.tolerances.monomial_norm;
    for alpha in [0.0, 0.5, 1.5, 2.0] {
        let space = bergman(alpha);
        let worst = (0..=MONOMIAL_MAX_DEGREE)
            .map(|k| {
                let zk = TruncSeries::monomial(k, c(1.0, 0.0));
                let q = quad.bergman_inner(&zk, &zk, alpha).expect("alpha > -1").re;
                (q - space.beta_sq(k)).abs()
            })
            .fold(0.0, f64::max);
        r.metric(&format!("monomial_norm/{space}"), worst, Bound::AtMost { limit: mtol });
    }
    r
}

fn truncation_honesty(cfg: &ExperimentConfig) -> Report {
    let n = cfg.truncation;
    let tol = cfg.tolerances.honesty;
    let mut r = Report::new("", tol).input("trunc_order", n);
    let symbols = [("z2", SelfMap::monomial(2)), ("z3", SelfMap::monomial(3)), ("0.45z+0.45z2", poly_045())];
    for (label, map) in &symbols {
        for space in all_spaces() {
            let name = format!("{label}/{space}");
            let pair = build_matrix(map, space, n).and_then(|a| Ok((a, build_matrix(map, space, 2 * n)?)));
            let Some((small, big)) = guard(&mut r, &name, pair) else { continue };
            let block = small.exact_block();
            let diff = (0..block)
                .flat_map(|j| (0..=n).map(move |i| (i, j)))
                .map(|(i, j)| (small.entry(i, j) - big.entry(i, j)).norm())
                .fold(0.0, f64::max);
            r.metric(&name, diff, Bound::AtMost { limit: tol });
            // Exact columns carry their whole image: nothing below row N in the big build.
            let leak = (0..block)
                .flat_map(|j| (n + 1..=2 * n).map(move |i| (i, j)))
                .map(|(i, j)| big.entry(i, j).norm())
                .fold(0.0, f64::max);
            r.metric(&format!("{name}/below_block"), leak, Bound::AtMost { limit: tol });
        }
    }
    r
}
