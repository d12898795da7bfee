//! Subcommand implementations: run a pipeline or verifier from the scenario
//! config and collect report checks plus optional CSV artifacts.

use std::path::Path;

use collarext::analysis::{certify_lw, slab_separation, CertifyOptions, SampleStream};
use collarext::extension::{
    build_extension_collar, build_extension_disjoint, build_extension_identity, BuildOptions,
    CollarInput, ExtensionBundle, IdentityCaseInput, SlabSpec,
};
use collarext::geometry::{normalize_balls, Ball, Region};
use collarext::map::{compose, identity, SmoothMap};
use collarext::primitives::{
    generalized_inversion, shear_profile, sphere_bump_rotation, sphere_rotation, stereographic,
    twist_maps, InversionParams, Pole,
};

use crate::config::{origin, Budgets, ScenarioConfig};
use crate::report::Report;

pub struct RunError {
    pub exit_code: i32,
    pub message: String,
}

impl RunError {
    fn config(message: impl Into<String>) -> RunError {
        RunError {
            exit_code: 2,
            message: message.into(),
        }
    }
}

impl From<collarext::Error> for RunError {
    fn from(e: collarext::Error) -> RunError {
        use collarext::Error::*;
        let exit_code = match &e {
            CheckFailure { .. } | SeparationFailure { .. } | SeamMismatch { .. } => 1,
            InvalidGeometry(_) | Hypothesis(_) => 2,
            _ => 3,
        };
        RunError {
            exit_code,
            message: e.to_string(),
        }
    }
}

fn build_opts(cfg: &ScenarioConfig, budgets: &Budgets) -> BuildOptions {
    BuildOptions {
        seed: cfg.seed,
        samples: budgets.samples.max(100),
        inversion_exponent: cfg.inversion_exponent,
        ..Default::default()
    }
}

fn anchor_for(check: &str) -> &'static str {
    match check {
        "identity_outside_ball" => "identity-hypothesis",
        "conjugated_identity_outside_ball" => "conjugated-identity",
        "image_hole1_below_slab" | "image_hole2_above_slab" | "slab_separation" => "slab-separation",
        "inverse_round_trip" => "inverse-round-trip",
        "agreement_on_neighborhood" | "agreement_outer" => "boundary-agreement",
        "periodicity" => "lattice-periodicity",
        "origin_fixed" => "origin-fixed",
        "origin_continuity" => "origin-continuity",
        _ => "pipeline-check",
    }
}

fn record_bundle(report: &mut Report, bundle: &ExtensionBundle) {
    for check in &bundle.checks {
        report.push_flag(&check.name, anchor_for(&check.name), check.measured, check.pass);
    }
}

fn identity_input(cfg: &ScenarioConfig) -> Result<IdentityCaseInput, RunError> {
    let dim = cfg.dimension;
    let holes = cfg
        .holes
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `holes`"))?;
    let hole1 = holes.inner.to_ball(dim).map_err(RunError::config)?;
    let hole2 = holes.outer.to_ball(dim).map_err(RunError::config)?;
    let slab = cfg
        .slab
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `slab`"))?;
    if !(slab.low < slab.high) {
        return Err(RunError::config("slab levels must satisfy low < high"));
    }
    let g = cfg.map().map_err(RunError::config)?;
    let g_inv = g.inverse().map_err(RunError::from)?;
    let image_hole1 = Region::preimage(g_inv.clone(), hole1.region());
    let image_hole2 = Region::preimage(g_inv, hole2.region());
    Ok(IdentityCaseInput {
        g,
        hole1: hole1.region(),
        hole2: hole2.region(),
        image_hole1,
        image_hole2,
        ball: Ball::unit(dim),
        slab: SlabSpec::axis_aligned(slab.low, slab.high),
    })
}

pub fn extend_identity(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    _out: &Path,
) -> Result<(), RunError> {
    let input = identity_input(cfg)?;
    let bundle = build_extension_identity(&input, &build_opts(cfg, budgets))?;
    record_bundle(report, &bundle);
    Ok(())
}

pub fn extend_punctured(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    _out: &Path,
) -> Result<(), RunError> {
    let dim = cfg.dimension;
    let holes = cfg
        .holes
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `holes`"))?;
    let hole1 = holes.inner.to_ball(dim).map_err(RunError::config)?;
    let hole2 = holes.outer.to_ball(dim).map_err(RunError::config)?;
    let image = cfg
        .image_balls
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `image_balls`"))?;
    let b1 = image.inner.to_ball(dim).map_err(RunError::config)?;
    let b2 = image.outer.to_ball(dim).map_err(RunError::config)?;
    let g = cfg.map().map_err(RunError::config)?;
    let p = cfg.exponent.unwrap_or(1.0);
    let bundle = build_extension_disjoint(
        &g,
        &hole1.region(),
        &hole2.region(),
        &b1,
        &b2,
        p,
        &build_opts(cfg, budgets),
    )?;
    record_bundle(report, &bundle);
    Ok(())
}

pub fn extend_collar(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    _out: &Path,
) -> Result<(), RunError> {
    let dim = cfg.dimension;
    let p = cfg.require_exponent().map_err(RunError::config)?;
    if !(p < dim as f64) {
        return Err(RunError::config(format!(
            "collar scenarios need 1 <= p < n = {dim}, got p = {p}"
        )));
    }
    let image = cfg
        .image_balls
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `image_balls`"))?;
    let domain = cfg
        .domain_balls
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `domain_balls`"))?;
    let b1 = image.inner.to_ball(dim).map_err(RunError::config)?;
    let b2 = image.outer.to_ball(dim).map_err(RunError::config)?;
    let d1 = domain.inner.to_ball(dim).map_err(RunError::config)?;
    let d2 = domain.outer.to_ball(dim).map_err(RunError::config)?;

    // The collar map carries the domain balls onto the image balls; this
    // runner uses the similarity determined by the two outer balls and
    // validates that it also matches the inner pair.
    let scale = b2.radius / d2.radius;
    if (b1.radius / d1.radius - scale).abs() > 1e-9 {
        return Err(RunError::config(
            "domain and image balls are not related by one similarity scale",
        ));
    }
    let f = compose(
        &compose(
            &collarext::map::translation(&b2.center),
            &collarext::map::dilation(dim, scale),
        ),
        &collarext::map::translation(&(-&d2.center)),
    );
    let check = f.eval(&d1.center);
    if (check - &b1.center).norm() > 1e-9 {
        return Err(RunError::config(
            "domain and image inner balls are not aligned by the outer-ball similarity",
        ));
    }
    let input = CollarInput {
        f,
        domain1: d1.region(),
        domain2: d2.region(),
        image_ball1: b1,
        image_ball2: b2,
        exponent: p,
    };
    let bundle = build_extension_collar(&input, &build_opts(cfg, budgets))?;
    record_bundle(report, &bundle);
    Ok(())
}

pub fn verify_map(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    _out: &Path,
) -> Result<(), RunError> {
    let dim = cfg.dimension;
    let m = cfg.map().map_err(RunError::config)?;
    let region = match &cfg.region {
        Some(spec) => spec.to_ball(dim).map_err(RunError::config)?.region(),
        None => Region::Ball(Ball::unit(dim)),
    };
    let p = cfg.exponent.unwrap_or(1.0);
    let opts = CertifyOptions {
        n_pairs: budgets.pairs,
        n_samples: budgets.samples,
        levels: budgets.levels.min(if dim >= 3 { 5 } else { 7 }),
        seed: cfg.seed,
        ..Default::default()
    };
    let rep = certify_lw(&m, &region, p, &opts)?;
    for flag in &rep.flags {
        report.push_flag(&flag.name, "regularity-certificate", flag.measured, flag.pass);
    }
    report.push_flag("lipschitz_lower", "lipschitz-estimate", rep.lipschitz_lower, true);
    report.push_flag(
        "lipschitz_inverse_lower",
        "lipschitz-estimate",
        rep.lipschitz_inverse_lower,
        true,
    );
    if let Some(last) = rep.sobolev_seq.last() {
        if last.excluded_measure > 0.0 {
            report.warn(format!(
                "quadrature excluded measure {:.3e} near seams",
                last.excluded_measure
            ));
        }
    }
    Ok(())
}

pub fn sweep_slab(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    out: &Path,
) -> Result<(), RunError> {
    let dim = cfg.dimension;
    let image = cfg
        .image_balls
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `image_balls`"))?;
    let b1 = image.inner.to_ball(dim).map_err(RunError::config)?;
    let b2 = image.outer.to_ball(dim).map_err(RunError::config)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `sweep`"))?;
    let np = normalize_balls(&b1, &b2)?;
    let mut rows = Vec::new();
    for a in sweep.values() {
        let params = InversionParams::new(a, np.tangent_radius)?;
        let rep = slab_separation(&params, &np, budgets.samples.max(1000), cfg.seed)?;
        let pole_gap = rep.pole_image_2[dim - 1] - rep.pole_image_1[dim - 1];
        report.push_flag(
            &format!("pole_comparison[a={a}]"),
            "pole-comparison",
            pole_gap,
            pole_gap > 0.0,
        );
        report.push_flag(
            &format!("separated[a={a}]"),
            "slab-separation",
            rep.c2 - rep.c1,
            rep.separated,
        );
        if !rep.c1_at_pole || !rep.c2_at_pole {
            report.warn(format!(
                "a={a}: image extremum off the pole (inner at pole: {}, outer at pole: {})",
                rep.c1_at_pole, rep.c2_at_pole
            ));
        }
        rows.push(rep);
    }
    std::fs::create_dir_all(out).map_err(|e| RunError {
        exit_code: 3,
        message: e.to_string(),
    })?;
    let path = out.join("slab_sweep.json");
    let mut body = serde_json::to_string_pretty(&rows).expect("serializable rows");
    body.push('\n');
    std::fs::write(&path, body).map_err(|e| RunError {
        exit_code: 3,
        message: e.to_string(),
    })?;
    report.artifacts.push("slab_sweep.json".to_string());
    Ok(())
}

pub fn milnor_glue(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    _out: &Path,
) -> Result<(), RunError> {
    let dim = cfg.dimension;
    if dim < 3 {
        return Err(RunError::config(
            "twist scenarios need ambient dimension >= 3",
        ));
    }
    let stream = SampleStream::new(cfg.seed);
    let samples = budgets.samples.max(1000) as u64;
    let id_star = generalized_inversion(dim, 1.0, 1.0);

    let phis: Vec<(&str, SmoothMap)> = vec![
        ("identity", identity(dim)),
        ("rotation", sphere_rotation(dim, (0, 1), 0.8)),
        ("bump-rotation", sphere_bump_rotation(dim, (0, 1), 0.6, 0.8)),
    ];
    for (name, phi) in &phis {
        let pair = twist_maps(phi)?;
        let lhs = compose(&id_star, &pair.star);
        let mut worst = 0.0f64;
        for i in 0..samples {
            let x = (0.2 + 3.0 * (i as f64 / samples as f64)) * stream.direction(i, dim);
            worst = worst.max((lhs.eval(&x) - pair.bar.eval(&x)).norm());
        }
        report.push(&format!("untwist_radial[{name}]"), "twist-identity", worst, 1e-12);
    }

    let pi1 = stereographic(dim, Pole::North);
    let pi2_inv = stereographic(dim, Pole::South).inverse()?;
    let transition = compose(&pi2_inv, &pi1);
    let mut worst_transition = 0.0f64;
    let mut worst_sphere = 0.0f64;
    for i in 0..samples {
        let x = (0.05 + 4.0 * (i as f64 / samples as f64)) * stream.direction(10_000 + i, dim);
        worst_transition =
            worst_transition.max((transition.eval(&x) - id_star.eval(&x)).norm());
        worst_sphere = worst_sphere.max((pi1.eval(&x).norm() - 1.0).abs());
    }
    report.push("chart_transition", "chart-transition", worst_transition, 1e-12);
    report.push("chart_image_on_sphere", "chart-transition", worst_sphere, 1e-12);
    Ok(())
}

pub fn plot_data(
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    out: &Path,
) -> Result<(), RunError> {
    let slab = cfg
        .slab
        .as_ref()
        .ok_or_else(|| RunError::config("config is missing `slab`"))?;
    let (a, b) = (slab.low, slab.high);
    if !(a < b) {
        return Err(RunError::config("slab levels must satisfy low < high"));
    }
    std::fs::create_dir_all(out).map_err(|e| RunError {
        exit_code: 3,
        message: e.to_string(),
    })?;

    // Images of vertical lines under the shear, tagged by slab branch.
    let profile = shear_profile(a, b)?;
    let mut csv = String::from("x1,xn,branch-id\n");
    let span = b - a;
    for line in 0..9 {
        let c = -2.0 * span + (line as f64 / 8.0) * (4.0 * span);
        for i in 0..=200 {
            let t = (a - 1.5 * span) + (i as f64 / 200.0) * (4.0 * span);
            let x1 = c - profile.value(t);
            let branch = if t < a {
                0
            } else if t > b {
                2
            } else {
                1
            };
            csv.push_str(&format!("{x1},{t},{branch}\n"));
        }
    }
    let shear_path = out.join("shear_levels.csv");
    std::fs::write(&shear_path, csv).map_err(|e| RunError {
        exit_code: 3,
        message: e.to_string(),
    })?;
    report.artifacts.push("shear_levels.csv".to_string());

    // Staged images of sampled lattice-ball points through the periodic
    // extension pipeline: stage 0 input, then g*, S∘g*, g*⁻¹∘S∘g*, τ₁∘…
    let input = identity_input(cfg)?;
    let bundle = build_extension_identity(&input, &build_opts(cfg, budgets))?;
    record_bundle(report, &bundle);
    let g_star = &bundle.periodicized;
    let g_star_inv = &bundle.periodicized_inv;
    let shear_map = &bundle.shear;
    let stream = SampleStream::new(cfg.seed ^ 0x9107);
    let mut csv = String::from("x1,xn,branch-id\n");
    let dim = cfg.dimension;
    let count = budgets.samples.clamp(100, 2000) as u64;
    for i in 0..count {
        let base = if i % 3 == 0 {
            stream.on_sphere(i, &origin(dim), 1.0)
        } else {
            stream.in_ball(i, &origin(dim), 1.0)
        };
        let column = (i % 3) as f64 * 3.0;
        let mut x = base;
        x[0] += column;
        let s0 = x.clone();
        let s1 = g_star.eval(&s0);
        let s2 = shear_map.eval(&s1);
        let s3 = g_star_inv.eval(&s2);
        let s4 = {
            let mut y = s3.clone();
            y[0] += 3.0;
            y
        };
        for (stage, p) in [&s0, &s1, &s2, &s3, &s4].iter().enumerate() {
            csv.push_str(&format!("{},{},{stage}\n", p[0], p[dim - 1]));
        }
    }
    let stages_path = out.join("gstar_stages.csv");
    std::fs::write(&stages_path, csv).map_err(|e| RunError {
        exit_code: 3,
        message: e.to_string(),
    })?;
    report.artifacts.push("gstar_stages.csv".to_string());
    Ok(())
}

pub fn run_scenario(
    name: &str,
    cfg: &ScenarioConfig,
    budgets: &Budgets,
    report: &mut Report,
    out: &Path,
) -> Result<(), RunError> {
    match name {
        "extend-collar" => extend_collar(cfg, budgets, report, out),
        "extend-punctured" => extend_punctured(cfg, budgets, report, out),
        "extend-identity" => extend_identity(cfg, budgets, report, out),
        "verify-map" => verify_map(cfg, budgets, report, out),
        "sweep-slab" => sweep_slab(cfg, budgets, report, out),
        "milnor-glue" => milnor_glue(cfg, budgets, report, out),
        "plot-data" => plot_data(cfg, budgets, report, out),
        other => Err(RunError::config(format!("unknown scenario `{other}`"))),
    }
}
