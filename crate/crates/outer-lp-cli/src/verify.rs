//! The `verify` subcommands: seeded property suites with envelope tables.
//!
//! Each suite runs a deterministic corpus, emits one table row per checked
//! instance, and reports an overall verdict: exit code `0` when every
//! property held, `1` otherwise (failing rows carry the witness name).

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use outer_lp::conditions::{canopy_check, crop_check, CoveringSpec};
use outer_lp::decompose::{
    exterior_decompose, interior_decompose, quasi_triangle_constant, verify_exterior,
    verify_interior, DecompositionReport, ExteriorVariant,
};
use outer_lp::duality::{build_dual, triangle_defect, verify_duality};
use outer_lp::dyadic::{
    make_dyadic_discrete, strip_intersection_label, strip_tree_intersection_label,
    DyadicSetting, PointSet,
};
use outer_lp::norms::{outer_norm, SizeExpr, SpaceTables};
use outer_lp::settings::{make_cartesian, make_counterexample_first, make_three_measures};
use outer_lp::space::build_measure_table;
use outer_lp::{EngineOptions, FiniteSpace, MeasureKind, Rational};

use crate::output::{csv_line, emit, fnum, to_pretty_body, Format};

/// Property suites runnable through `outerlp verify`.
#[derive(clap::Subcommand)]
pub enum Suite {
    /// Repeated-exponent collapse: double/single norm ratio envelope.
    Collapse(CorpusArgs),
    /// Dual-witness bounds with pairing envelopes.
    Holder(CorpusArgs),
    /// Two-term quasi-triangle bounds plus the growing m-term defect.
    Triangle(CorpusArgs),
    /// Decomposition replays: interior and all exterior variants.
    Decompose(CorpusArgs),
    /// Structured strip/tree geometry at the small truncations.
    DyadicGeometry(GeometryArgs),
}

/// Shared flags of the corpus-driven suites.
#[derive(clap::Args)]
pub struct CorpusArgs {
    /// Base seed; instance `i` derives its seed as `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeded instances.
    #[arg(long, default_value_t = 48)]
    instances: usize,
    /// Probe budget for sampled condition checks.
    #[arg(long, default_value_t = 400)]
    budget: u64,
    /// Exhaustive-enumeration cap for measure tables.
    #[arg(long, default_value_t = 12)]
    exact_limit: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Flags of the dyadic-geometry suite.
#[derive(clap::Args)]
pub struct GeometryArgs {
    /// Seed for sampled layers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probe budget for sampled condition checks at the large truncation.
    #[arg(long, default_value_t = 40)]
    budget: u64,
    /// Enables the exhaustive extension layer when at least the point count.
    #[arg(long, default_value_t = 32)]
    exact_limit: usize,
    /// Largest truncation exercised (`1` or `2`).
    #[arg(long, default_value_t = 2)]
    j_max: u32,
    /// Random generator pairs checked at the large truncation.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Dispatches a suite; `Ok(true)` means every property held.
pub fn run(suite: &Suite) -> anyhow::Result<bool> {
    match suite {
        Suite::Collapse(args) => collapse(args),
        Suite::Holder(args) => holder(args),
        Suite::Triangle(args) => triangle(args),
        Suite::Decompose(args) => decompose(args),
        Suite::DyadicGeometry(args) => dyadic_geometry(args),
    }
}

// ---------------------------------------------------------------------------
// Shared corpus plumbing.

struct Instance {
    seed: u64,
    kind: &'static str,
    space: FiniteSpace,
    covering: CoveringSpec,
}

/// Deterministic corpus: singleton-generated spaces on 3–7 points, with
/// every fourth instance a product space on at most 6 points.
fn corpus_instance(index: usize, base_seed: u64) -> anyhow::Result<Instance> {
    let seed = base_seed + index as u64;
    if index % 4 == 3 {
        let sizes = [[2, 2, 1], [2, 1, 2], [1, 2, 2], [3, 2, 1]][(index / 4) % 4];
        let setting = make_cartesian(sizes, None, seed)?;
        Ok(Instance {
            seed,
            kind: "cartesian",
            space: setting.space,
            covering: setting.covering,
        })
    } else {
        let n = 3 + index % 5;
        let setting = make_three_measures(n, seed)?;
        Ok(Instance {
            seed,
            kind: "threeMeasures",
            space: setting.space,
            covering: setting.covering,
        })
    }
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let f: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen_range(0.125..4.0)
                }
            })
            .collect();
        if f.iter().any(|v| *v > 0.0) {
            return f;
        }
    }
}

fn render(
    format: Format,
    suite: &str,
    columns: &[&str],
    rows: &[Vec<String>],
    extras: serde_json::Value,
) -> String {
    match format {
        Format::Csv => {
            let mut body = csv_line(&columns.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            for row in rows {
                body.push_str(&csv_line(row));
            }
            body
        }
        Format::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let object: serde_json::Map<String, serde_json::Value> = columns
                        .iter()
                        .zip(row)
                        .map(|(name, value)| (name.to_string(), json!(value)))
                        .collect();
                    serde_json::Value::Object(object)
                })
                .collect();
            let mut report = json!({
                "command": "verify",
                "suite": suite,
                "rows": rows_json,
            });
            if let (Some(target), Some(source)) = (report.as_object_mut(), extras.as_object()) {
                for (key, value) in source {
                    target.insert(key.clone(), value.clone());
                }
            }
            to_pretty_body(&report)
        }
    }
}

/// Smallest integer parameter in `1..=4` at which the named condition
/// holds, with the verdict's exhaustiveness.
fn find_parameter(
    space: &FiniteSpace,
    nu: &outer_lp::MeasureTable,
    covering: &CoveringSpec,
    crop_branch: bool,
    options: &EngineOptions,
) -> anyhow::Result<Option<Rational>> {
    for candidate in 1..=4 {
        let k = Rational::from_integer(candidate);
        let verdict = if crop_branch {
            crop_check(space, nu, covering, &k, options)?
        } else {
            canopy_check(space, nu, covering, &k, options)?
        };
        if verdict.holds {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

fn first_failure(report: &DecompositionReport) -> String {
    report
        .properties
        .iter()
        .find(|check| !check.passed)
        .map(|check| check.name.clone())
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Collapse suite.

fn collapse(args: &CorpusArgs) -> anyhow::Result<bool> {
    const BOUND: f64 = 16.0;
    let columns = ["seed", "kind", "n", "s", "single", "double", "ratio"];
    let mut rows = Vec::new();
    let mut low = f64::INFINITY;
    let mut high = 0.0_f64;
    for index in 0..args.instances {
        let instance = corpus_instance(index, args.seed)?;
        let s = [1.0, 1.5, 2.0, 3.0][index % 4];
        let mut rng = ChaCha8Rng::seed_from_u64(instance.seed);
        let f = random_function(&mut rng, instance.space.len());
        let mu = build_measure_table(&instance.space, MeasureKind::Mu, args.exact_limit)?;
        let nu = build_measure_table(&instance.space, MeasureKind::Nu, args.exact_limit)?;
        let tables = SpaceTables { mu: &mu, nu: &nu };
        let single = outer_norm(&instance.space, tables, &f, s, SizeExpr::Inner { r: s })?.value;
        let double =
            outer_norm(&instance.space, tables, &f, s, SizeExpr::Outer { q: s, r: s })?.value;
        let ratio = double / single;
        low = low.min(ratio);
        high = high.max(ratio);
        rows.push(vec![
            instance.seed.to_string(),
            instance.kind.to_string(),
            instance.space.len().to_string(),
            fnum(s),
            fnum(single),
            fnum(double),
            fnum(ratio),
        ]);
    }
    let all_pass = low >= 1.0 / BOUND && high <= BOUND;
    let body = render(
        args.format,
        "collapse",
        &columns,
        &rows,
        json!({"envelope": {"low": low, "high": high}, "bound": BOUND, "allPass": all_pass}),
    );
    let summary = format!(
        "collapse: {} instances, ratio ∈ [{}, {}], bound {BOUND}: {}",
        rows.len(),
        fnum(low),
        fnum(high),
        if all_pass { "pass" } else { "FAIL" }
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// Duality (Hölder-direction) suite.

fn holder(args: &CorpusArgs) -> anyhow::Result<bool> {
    let triples = [(2.0, 2.0, 3.0), (2.0, 3.0, 2.0), (3.0, 2.0, 4.0)];
    let columns = [
        "seed", "kind", "n", "p", "q", "r", "K", "cLower", "cUpper", "ratio", "passed",
    ];
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut lower_floor = f64::INFINITY;
    let mut upper_cap = 0.0_f64;
    for index in 0..args.instances {
        let instance = corpus_instance(index, args.seed)?;
        let (p, q, r) = triples[index % 3];
        let mu = build_measure_table(&instance.space, MeasureKind::Mu, args.exact_limit)?;
        let nu = build_measure_table(&instance.space, MeasureKind::Nu, args.exact_limit)?;
        let options = EngineOptions {
            exact_limit: args.exact_limit,
            budget: args.budget,
            seed: instance.seed,
        };
        let k = find_parameter(&instance.space, &nu, &instance.covering, q > r, &options)?;
        let Some(k) = k else {
            all_pass = false;
            rows.push(vec![
                instance.seed.to_string(),
                instance.kind.to_string(),
                instance.space.len().to_string(),
                fnum(p),
                fnum(q),
                fnum(r),
                "none".into(),
                String::new(),
                String::new(),
                String::new(),
                "false".into(),
            ]);
            continue;
        };
        let mut rng = ChaCha8Rng::seed_from_u64(instance.seed);
        let f = random_function(&mut rng, instance.space.len());
        let witness = build_dual(&instance.space, &mu, &nu, &f, p, q, r, &instance.covering, &k)?;
        let report =
            verify_duality(&instance.space, &mu, &nu, &f, &witness, &instance.covering, &k)?;
        all_pass &= report.all_pass && report.c_lower > 0.0;
        lower_floor = lower_floor.min(report.c_lower);
        upper_cap = upper_cap.max(report.c_upper);
        rows.push(vec![
            instance.seed.to_string(),
            instance.kind.to_string(),
            instance.space.len().to_string(),
            fnum(p),
            fnum(q),
            fnum(r),
            k.to_string(),
            fnum(report.c_lower),
            fnum(report.c_upper),
            fnum(report.ratio),
            report.all_pass.to_string(),
        ]);
    }
    let body = render(
        args.format,
        "holder",
        &columns,
        &rows,
        json!({
            "envelope": {"cLowerMin": lower_floor, "cUpperMax": upper_cap},
            "allPass": all_pass,
        }),
    );
    let summary = format!(
        "holder: {} instances, c_lower ≥ {}, C_upper ≤ {}: {}",
        rows.len(),
        fnum(lower_floor),
        fnum(upper_cap),
        if all_pass { "pass" } else { "FAIL" }
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// Quasi-triangle suite.

/// Two-term triangle constant of the double iterated quasi-norm: the
/// outermost λ-split and power split on top of the single-norm constant.
fn double_triangle_bound(p: f64, q: f64, r: f64) -> f64 {
    2.0 * 1.0_f64.max((1.0 / p - 1.0).exp2()) * quasi_triangle_constant(q, r)
}

fn triangle(args: &CorpusArgs) -> anyhow::Result<bool> {
    let triples = [
        (2.0, 2.0, 2.0),
        (2.0, 3.0, 1.5),
        (1.5, 2.0, 3.0),
        (1.0, 1.0, 1.0),
        (2.0, 1.0, 0.5),
    ];
    let columns = [
        "case", "seed", "kind", "n", "p", "q", "r", "defect", "bound", "direction", "passed",
    ];
    let mut rows = Vec::new();
    let mut all_pass = true;
    for index in 0..args.instances {
        let instance = corpus_instance(index, args.seed)?;
        let (p, q, r) = triples[index % 5];
        let mu = build_measure_table(&instance.space, MeasureKind::Mu, args.exact_limit)?;
        let nu = build_measure_table(&instance.space, MeasureKind::Nu, args.exact_limit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(instance.seed);
        let f = random_function(&mut rng, instance.space.len());
        let g = random_function(&mut rng, instance.space.len());
        let defect = triangle_defect(&instance.space, &mu, &nu, p, q, r, &[f, g])?;
        let bound = double_triangle_bound(p, q, r);
        let passed = defect <= bound * (1.0 + 1e-9);
        all_pass &= passed;
        rows.push(vec![
            "pair".into(),
            instance.seed.to_string(),
            instance.kind.to_string(),
            instance.space.len().to_string(),
            fnum(p),
            fnum(q),
            fnum(r),
            fnum(defect),
            fnum(bound),
            "≤".into(),
            passed.to_string(),
        ]);
    }
    // The m-term defect of the first extremal family under the single
    // iterated norm with r = 1/2 grows like m, outrunning every fixed
    // constant: ‖1‖ = m^{1/r} while the m singleton summands have norm one.
    let r = 0.5;
    for m in 2..=10 {
        let setting = make_counterexample_first(m)?;
        let space = &setting.space;
        let mu = build_measure_table(space, MeasureKind::Mu, space.len())?;
        let nu = build_measure_table(space, MeasureKind::Nu, space.len())?;
        let tables = SpaceTables { mu: &mu, nu: &nu };
        let whole = outer_norm(space, tables, &setting.f, 1.0, SizeExpr::Inner { r })?.value;
        let mut point = vec![0.0; m];
        point[0] = 1.0;
        let one = outer_norm(space, tables, &point, 1.0, SizeExpr::Inner { r })?.value;
        let defect = whole / (m as f64 * one);
        let reference = (m as f64).powf(1.0 / r - 1.0);
        let passed = defect >= reference * (1.0 - 1e-9);
        all_pass &= passed;
        rows.push(vec![
            "growth".into(),
            m.to_string(),
            "ce1".into(),
            m.to_string(),
            "1".into(),
            "1".into(),
            fnum(r),
            fnum(defect),
            fnum(reference),
            "≥".into(),
            passed.to_string(),
        ]);
    }
    let body = render(
        args.format,
        "triangle",
        &columns,
        &rows,
        json!({"allPass": all_pass}),
    );
    let summary = format!(
        "triangle: {} rows ({} paired, 9 growth): {}",
        rows.len(),
        args.instances,
        if all_pass { "pass" } else { "FAIL" }
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// Decomposition suite.

fn decompose(args: &CorpusArgs) -> anyhow::Result<bool> {
    let exps = [
        (2.0, 2.0, 2.0),
        (2.0, 3.0, 2.0),
        (3.0, 2.0, 1.5),
        (1.5, 2.5, 2.0),
    ];
    let columns = [
        "seed", "kind", "n", "p", "q", "r", "variant", "levels", "checks", "passed",
        "firstFailure",
    ];
    let mut rows = Vec::new();
    let mut all_pass = true;
    for index in 0..args.instances {
        let instance = corpus_instance(index, args.seed)?;
        let (p, q, r) = exps[index % 4];
        let mu = build_measure_table(&instance.space, MeasureKind::Mu, args.exact_limit)?;
        let nu = build_measure_table(&instance.space, MeasureKind::Nu, args.exact_limit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(instance.seed);
        let f = random_function(&mut rng, instance.space.len());
        // On singleton-generated spaces ν is additive, so every disjoint
        // collection is 1-bounded and the extension bound is automatic; the
        // product spaces get their parameter from the verified condition.
        let k_bound = if instance.kind == "threeMeasures" {
            Some(Rational::from_integer(1))
        } else {
            let options = EngineOptions {
                exact_limit: args.exact_limit,
                budget: args.budget,
                seed: instance.seed,
            };
            find_parameter(&instance.space, &nu, &instance.covering, false, &options)?
        };
        let mut push = |variant: &str, report: &DecompositionReport, levels: usize| {
            all_pass &= report.all_pass;
            rows.push(vec![
                instance.seed.to_string(),
                instance.kind.to_string(),
                instance.space.len().to_string(),
                fnum(p),
                fnum(q),
                fnum(r),
                variant.to_string(),
                levels.to_string(),
                report.properties.len().to_string(),
                report.all_pass.to_string(),
                first_failure(report),
            ]);
        };
        let interior = interior_decompose(&instance.space, &nu, &f, q, r)?;
        let report = verify_interior(&instance.space, &nu, &f, &interior)?;
        push("interior", &report, interior.levels.len());
        for (variant, name) in [
            (ExteriorVariant::QGeqR, "qGeqR"),
            (ExteriorVariant::Canopy, "canopy"),
            (ExteriorVariant::Psi, "psi"),
        ] {
            if variant == ExteriorVariant::QGeqR && q < r {
                continue;
            }
            let d = exterior_decompose(
                &instance.space,
                &mu,
                &nu,
                &f,
                p,
                q,
                r,
                &instance.covering,
                variant,
            )?;
            let report = verify_exterior(
                &instance.space,
                &mu,
                &nu,
                &f,
                &d,
                &instance.covering,
                k_bound.as_ref(),
            )?;
            push(name, &report, d.levels.len());
        }
    }
    let body = render(
        args.format,
        "decompose",
        &columns,
        &rows,
        json!({"allPass": all_pass}),
    );
    let summary = format!(
        "decompose: {} replays over {} instances: {}",
        rows.len(),
        args.instances,
        if all_pass { "pass" } else { "FAIL" }
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// Dyadic geometry suite.

fn point_set(ids: &[usize]) -> PointSet {
    ids.iter().copied().collect()
}

/// Intersection calculus: point-set intersections match the predicted
/// labels.  Exhaustive over all pairs when `sample` is `None`.
fn check_intersections(
    setting: &DyadicSetting,
    sample: Option<(usize, u64)>,
    detail: &mut String,
) -> (bool, u64) {
    let strip_sets: Vec<PointSet> = (0..setting.strip_count())
        .map(|s| point_set(setting.strip_points(s)))
        .collect();
    let mut samples = 0u64;
    let check_pair = |a: usize, b: usize| -> bool {
        let common: PointSet = strip_sets[a].intersection(&strip_sets[b]).copied().collect();
        let expected = match strip_intersection_label(setting.strip_label(a), setting.strip_label(b))
        {
            None => PointSet::new(),
            Some(label) => strip_sets[setting.strip_index_of(label).expect("closed family")]
                .clone(),
        };
        common == expected
    };
    let check_mixed = |s: usize, t: usize| -> bool {
        let tree: PointSet = point_set(setting.tree_points(t));
        let common: PointSet = strip_sets[s].intersection(&tree).copied().collect();
        let expected = match strip_tree_intersection_label(
            setting.strip_label(s),
            setting.tree_label(t),
        ) {
            None => PointSet::new(),
            Some(label) => point_set(
                setting.tree_points(setting.tree_index_of(label).expect("closed family")),
            ),
        };
        common == expected
    };
    match sample {
        None => {
            for a in 0..setting.strip_count() {
                for b in a..setting.strip_count() {
                    samples += 1;
                    if !check_pair(a, b) {
                        *detail = format!("strip pair ({a}, {b})");
                        return (false, samples);
                    }
                }
            }
            for s in 0..setting.strip_count() {
                for t in 0..setting.tree_count() {
                    samples += 1;
                    if !check_mixed(s, t) {
                        *detail = format!("strip {s} × tree {t}");
                        return (false, samples);
                    }
                }
            }
        }
        Some((pairs, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                samples += 1;
                if rng.gen_bool(0.5) {
                    let a = rng.gen_range(0..setting.strip_count());
                    let b = rng.gen_range(0..setting.strip_count());
                    if !check_pair(a.min(b), a.max(b)) {
                        *detail = format!("strip pair ({a}, {b})");
                        return (false, samples);
                    }
                } else {
                    let s = rng.gen_range(0..setting.strip_count());
                    let t = rng.gen_range(0..setting.tree_count());
                    if !check_mixed(s, t) {
                        *detail = format!("strip {s} × tree {t}");
                        return (false, samples);
                    }
                }
            }
        }
    }
    (true, samples)
}

/// Generator measures equal their pre-measures, exhaustively.
fn check_generator_measures(setting: &DyadicSetting, detail: &mut String) -> (bool, u64) {
    let mut samples = 0u64;
    for sid in 0..setting.strip_count() {
        samples += 1;
        if setting.strip_cover_value(&point_set(setting.strip_points(sid)))
            != setting.strip_pre_measure(sid)
        {
            *detail = format!("strip {sid}");
            return (false, samples);
        }
    }
    for tid in 0..setting.tree_count() {
        samples += 1;
        let value = match setting.tree_cover_value(&point_set(setting.tree_points(tid))) {
            Ok(v) => v,
            Err(e) => {
                *detail = format!("tree {tid}: {e}");
                return (false, samples);
            }
        };
        if value != setting.tree_pre_measure(tid) {
            *detail = format!("tree {tid}");
            return (false, samples);
        }
    }
    (true, samples)
}

/// Structured engines agree with the generic subset recursion on random
/// windows.
fn check_windows(
    setting: &DyadicSetting,
    windows: usize,
    max_size: usize,
    probes: usize,
    seed: u64,
    detail: &mut String,
) -> (bool, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = 0u64;
    let all: Vec<usize> = (0..setting.len()).collect();
    for _ in 0..windows {
        let mut pool = all.clone();
        pool.shuffle(&mut rng);
        let size = rng.gen_range(1..=max_size);
        let window: Vec<usize> = pool[..size].to_vec();
        let space = match setting.window_space(&window) {
            Ok(s) => s,
            Err(e) => {
                *detail = e.to_string();
                return (false, samples);
            }
        };
        let (mu, nu) = match (
            build_measure_table(&space, MeasureKind::Mu, max_size),
            build_measure_table(&space, MeasureKind::Nu, max_size),
        ) {
            (Ok(mu), Ok(nu)) => (mu, nu),
            _ => {
                *detail = "window table construction failed".into();
                return (false, samples);
            }
        };
        let full = (1u32 << size) - 1;
        let mut masks: Vec<u32> = (0..probes).map(|_| rng.gen_range(0..=full)).collect();
        masks.push(full);
        for mask in masks {
            samples += 1;
            let pts: PointSet = (0..size)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| window[i])
                .collect();
            let tree_value = match setting.tree_cover_value(&pts) {
                Ok(v) => v,
                Err(e) => {
                    *detail = e.to_string();
                    return (false, samples);
                }
            };
            if mu.value(mask) != setting.strip_cover_value(&pts) || nu.value(mask) != tree_value
            {
                *detail = format!("window {window:?} mask {mask:#x}");
                return (false, samples);
            }
        }
    }
    (true, samples)
}

fn dyadic_geometry(args: &GeometryArgs) -> anyhow::Result<bool> {
    if !(1..=2).contains(&args.j_max) {
        anyhow::bail!("the geometry suite supports truncations 1 and 2");
    }
    let columns = ["check", "j", "holds", "exhaustive", "samples", "detail"];
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut push =
        |check: &str, j: u32, holds: bool, exhaustive: bool, samples: u64, detail: String| {
            all_pass &= holds;
            rows.push(vec![
                check.to_string(),
                j.to_string(),
                holds.to_string(),
                exhaustive.to_string(),
                samples.to_string(),
                detail,
            ]);
        };
    for j in 1..=args.j_max {
        let setting = make_dyadic_discrete(j)?;
        let exhaustive = j == 1;
        let mut detail = String::new();
        let sample = if exhaustive {
            None
        } else {
            Some((args.pairs, args.seed))
        };
        let (holds, samples) = check_intersections(&setting, sample, &mut detail);
        push("intersections", j, holds, exhaustive, samples, detail);

        let mut detail = String::new();
        let (holds, samples) = check_generator_measures(&setting, &mut detail);
        push("generatorMeasures", j, holds, true, samples, detail);

        let mut detail = String::new();
        let (windows, max_size, probes) = if exhaustive { (40, 12, 20) } else { (10, 10, 10) };
        let (holds, samples) =
            check_windows(&setting, windows, max_size, probes, args.seed, &mut detail);
        push("windowAgreement", j, holds, false, samples, detail);

        let options = EngineOptions {
            exact_limit: args.exact_limit,
            budget: args.budget,
            seed: args.seed,
        };
        let two = Rational::from_integer(2);
        let one = Rational::from_integer(1);
        let parent = setting.parent_check(&two, &options);
        push(
            "parentCovering",
            j,
            parent.holds,
            parent.checked_exhaustively,
            parent.samples,
            parent.detail.unwrap_or_default(),
        );
        let canopy = setting.canopy_geometry_check(&two, &options)?;
        push(
            "extensionBound",
            j,
            canopy.holds,
            canopy.checked_exhaustively,
            canopy.samples,
            canopy.detail.unwrap_or_default(),
        );
        let crop = setting.crop_geometry_check(&one, &options)?;
        push(
            "pruningInvisibility",
            j,
            crop.holds,
            crop.checked_exhaustively,
            crop.samples,
            crop.detail.unwrap_or_default(),
        );
    }
    let body = render(
        args.format,
        "dyadic-geometry",
        &columns,
        &rows,
        json!({"allPass": all_pass}),
    );
    let checked: BTreeSet<String> = rows.iter().map(|row| row[0].clone()).collect();
    let summary = format!(
        "dyadic-geometry: {} checks over J ≤ {} ({}): {}",
        rows.len(),
        args.j_max,
        checked.iter().cloned().collect::<Vec<_>>().join(", "),
        if all_pass { "pass" } else { "FAIL" }
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}
