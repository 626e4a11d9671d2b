//! Acceptance checks for the complete engine.  Each test covers one
//! criterion, prints exactly one pass/fail line with its pinned tolerance
//! and runtime budget, and fails loudly on any violation.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use outer_lp::conditions::{canopy_check, caratheodory_verdict, crop_check};
use outer_lp::decompose::{
    exterior_decompose, interior_decompose, verify_exterior, verify_interior, ExteriorVariant,
};
use outer_lp::duality::{build_dual, verify_duality};
use outer_lp::dyadic::{
    make_dyadic_discrete, strip_intersection_label, strip_tree_intersection_label, DyadicSetting,
    PointSet,
};
use outer_lp::norms::{outer_norm, NormContext, SizeExpr, SpaceTables};
use outer_lp::settings::{
    make_cartesian, make_counterexample_first, make_counterexample_second, make_three_measures,
};
use outer_lp::space::build_measure_table;
use outer_lp::{
    EngineOptions, FiniteSpace, Generator, MeasureKind, MeasureTable, Rational, SubsetMask,
};

/// Prints the single verdict line of one criterion and returns the verdict.
fn verdict(name: &str, pass: bool, detail: &str) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail}");
    pass
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn tables(space: &FiniteSpace) -> (MeasureTable, MeasureTable) {
    let n = space.len();
    (
        build_measure_table(space, MeasureKind::Mu, n).unwrap(),
        build_measure_table(space, MeasureKind::Nu, n).unwrap(),
    )
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

// ---------------------------------------------------------------------------
// 1. Exact norm tables of the two extremal families.

#[test]
fn a1_extremal_family_norm_tables() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut checks = 0;
    let mut violations = 0;
    for m in 1..=8usize {
        let setting = make_counterexample_first(m).unwrap();
        let (mu, nu) = tables(&setting.space);
        let t = SpaceTables { mu: &mu, nu: &nu };
        for r in [1.0, 2.0, 4.0] {
            let single = outer_norm(&setting.space, t, &setting.f, 1.0, SizeExpr::Inner { r })
                .unwrap()
                .value;
            checks += 1;
            if !close(single, (m as f64).powf(1.0 / r), tol) {
                violations += 1;
            }
            let double = outer_norm(
                &setting.space,
                t,
                &setting.f,
                1.0,
                SizeExpr::Outer { q: 1.0, r },
            )
            .unwrap()
            .value;
            checks += 1;
            if !close(double, m as f64, tol) {
                violations += 1;
            }
        }
    }
    for m in 1..=6usize {
        for r in [Rational::new(1, 2), Rational::from_integer(1)] {
            let setting = make_counterexample_second(m, &r).unwrap();
            let (mu, nu) = tables(&setting.space);
            let t = SpaceTables { mu: &mu, nu: &nu };
            let r_f64 = *r.numer() as f64 / *r.denom() as f64;
            let single = outer_norm(
                &setting.space,
                t,
                &setting.f,
                1.0,
                SizeExpr::Inner { r: r_f64 },
            )
            .unwrap()
            .value;
            checks += 1;
            if !close(single, (m as f64).powf(1.0 / r_f64), tol) {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && elapsed < 10.0;
    assert!(verdict(
        "extremal family norm tables",
        pass,
        &format!("{checks} exact values, {violations} violations, tol 1e-9, {elapsed:.2}s (budget 10s)"),
    ));
}

// ---------------------------------------------------------------------------
// 2. Growth exponents of the double norm on the first family.

#[test]
fn a2_growth_exponent_regression() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (p, q, r) in [(2.0, 3.0, 2.0), (2.0, 2.0, 1.5)] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for m in 2..=10usize {
            let setting = make_counterexample_first(m).unwrap();
            let (mu, nu) = tables(&setting.space);
            let t = SpaceTables { mu: &mu, nu: &nu };
            let value = outer_norm(&setting.space, t, &setting.f, p, SizeExpr::Outer { q, r })
                .unwrap()
                .value;
            xs.push((m as f64).ln());
            ys.push(value.ln());
        }
        let n = xs.len() as f64;
        let mean_x = xs.iter().sum::<f64>() / n;
        let mean_y = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mean_x).powi(2)).sum::<f64>();
        let target = 1.0 / p - 1.0 / q + 1.0 / r - 0.05;
        pass &= slope >= target;
        lines.push(format!("({p},{q},{r}): slope {slope:.4} ≥ {target:.4}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    assert!(verdict(
        "growth exponent regression",
        pass,
        &format!("{}; {elapsed:.2}s (budget 60s)", lines.join("; ")),
    ));
}

// ---------------------------------------------------------------------------
// 3. Agreement with the exhaustive removal/test-set enumeration oracle.

/// Random space with composite generators: full-set cover plus a few
/// random subsets per family, random small-denominator weights.
fn random_space(rng: &mut ChaCha8Rng) -> FiniteSpace {
    let n = rng.gen_range(3..=6usize);
    let full = (1 as SubsetMask) << n;
    let weight = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(1..=8), rng.gen_range(1..=4));
    let omega: Vec<Rational> = (0..n).map(|_| weight(rng)).collect();
    let gens = |rng: &mut ChaCha8Rng| -> Vec<Generator> {
        let mut g = vec![Generator::new(full - 1, weight(rng))];
        for _ in 0..rng.gen_range(1..=3) {
            g.push(Generator::new(rng.gen_range(1..full), weight(rng)));
        }
        g
    };
    FiniteSpace::new(omega, gens(rng), gens(rng)).unwrap()
}

/// The norm of a non-increasing step function described by its jump
/// thresholds: `Σ m(T_j)·(T_{j+1}^p − T_j^p)`, all thresholds swept.
fn integrate_profile(thresholds: &[f64], measure_at: impl Fn(f64) -> f64, p: f64) -> f64 {
    let mut total = 0.0;
    for pair in thresholds.windows(2) {
        total += measure_at(pair[0]) * (pair[1].powf(p) - pair[0].powf(p));
    }
    total.powf(1.0 / p)
}

struct SingleOracle {
    /// `sup_b[b]`: largest normalized size over all test sets once the
    /// points of `b` are removed.
    sup_b: Vec<f64>,
    nu: Vec<f64>,
    thresholds: Vec<f64>,
}

impl SingleOracle {
    /// Brute force over every (removal, test-set) pair for `f·1_d` under
    /// the pointwise size with exponent `r`.
    fn build(n: usize, mass_r: &[f64], nu: &MeasureTable, d: usize, r: f64) -> Self {
        let masks = 1usize << n;
        let nu_f64: Vec<f64> = (0..masks).map(|m| nu.value_f64(m as SubsetMask)).collect();
        let mut sup_b = vec![0.0f64; masks];
        for b in 0..masks {
            let mut sup = 0.0f64;
            for a in 0..masks {
                let kept = a & d & !b;
                if kept == 0 {
                    continue;
                }
                let size = (mass_r[kept] / nu_f64[a]).powf(1.0 / r);
                sup = sup.max(size);
            }
            sup_b[b] = sup;
        }
        let mut thresholds: Vec<f64> = sup_b.clone();
        thresholds.push(0.0);
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        SingleOracle {
            sup_b,
            nu: nu_f64,
            thresholds,
        }
    }

    fn measure_at(&self, lambda: f64) -> f64 {
        self.sup_b
            .iter()
            .zip(&self.nu)
            .filter(|(sup, _)| **sup <= lambda)
            .map(|(_, nu)| *nu)
            .fold(f64::INFINITY, f64::min)
    }

    fn norm(&self, p: f64) -> f64 {
        integrate_profile(&self.thresholds, |l| self.measure_at(l), p)
    }
}

/// Midpoints of well-separated adjacent thresholds.
fn midpoints(thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .windows(2)
        .filter(|pair| pair[1] - pair[0] > 1e-9 * pair[1].max(1.0))
        .map(|pair| (pair[0] + pair[1]) / 2.0)
        .collect()
}

#[test]
fn a3_enumeration_oracle_agreement() {
    let start = Instant::now();
    let tol = 1e-9;
    let (q, r) = (2.5, 1.5);
    let mut norm_checks = 0;
    let mut level_checks = 0;
    let mut violations = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let n = space.len();
        let masks = 1usize << n;
        let (mu, nu) = tables(&space);
        let t = SpaceTables { mu: &mu, nu: &nu };
        let f = random_function(&mut rng, n);
        let mass_r: Vec<f64> = (0..masks)
            .map(|m| {
                (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| space.omega_f64(i) * f[i].powf(r))
                    .sum()
            })
            .collect();

        // Single iterated norm against the direct enumeration.
        let oracle = SingleOracle::build(n, &mass_r, &nu, masks - 1, r);
        let ctx = NormContext::with_inner_size(&space, &nu, &f, r).unwrap();
        for p in [1.5, 3.0] {
            norm_checks += 1;
            let engine = outer_norm(&space, t, &f, p, SizeExpr::Inner { r }).unwrap().value;
            if !close(engine, oracle.norm(p), tol) {
                violations += 1;
            }
        }
        norm_checks += 1;
        let engine_sup = outer_norm(&space, t, &f, f64::INFINITY, SizeExpr::Inner { r })
            .unwrap()
            .value;
        if !close(engine_sup, *oracle.thresholds.last().unwrap(), tol) {
            violations += 1;
        }
        for lambda in midpoints(&oracle.thresholds) {
            level_checks += 1;
            let engine = ctx.super_level(lambda).0;
            let engine = *engine.numer() as f64 / *engine.denom() as f64;
            if !close(engine, oracle.measure_at(lambda), tol) {
                violations += 1;
            }
        }

        // Double iterated norm: the middle layer reuses oracle values of
        // every restriction, the outer layer enumerates removals again.
        // The composed size normalizes by the outermost measure.
        let single_value: Vec<f64> = (0..masks)
            .map(|d| SingleOracle::build(n, &mass_r, &nu, d, r).norm(q))
            .collect();
        let mu_f64: Vec<f64> = (0..masks).map(|m| mu.value_f64(m as SubsetMask)).collect();
        let mut sup_b = vec![0.0f64; masks];
        for b in 0..masks {
            let mut sup = 0.0f64;
            for a in 0..masks {
                let kept = a & !b;
                if a == 0 || single_value[kept] == 0.0 {
                    continue;
                }
                sup = sup.max(single_value[kept] / mu_f64[a].powf(1.0 / q));
            }
            sup_b[b] = sup;
        }
        let mut thresholds: Vec<f64> = sup_b.clone();
        thresholds.push(0.0);
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let measure_at = |lambda: f64| {
            sup_b
                .iter()
                .zip(&mu_f64)
                .filter(|(sup, _)| **sup <= lambda)
                .map(|(_, m)| *m)
                .fold(f64::INFINITY, f64::min)
        };
        let p = 2.0;
        norm_checks += 1;
        let engine = outer_norm(&space, t, &f, p, SizeExpr::Outer { q, r }).unwrap().value;
        if !close(engine, integrate_profile(&thresholds, measure_at, p), tol) {
            violations += 1;
        }
        let ctx = NormContext::with_outer_size(&space, &mu, &nu, &f, q, r).unwrap();
        for lambda in midpoints(&thresholds) {
            level_checks += 1;
            let engine = ctx.super_level(lambda).0;
            let engine = *engine.numer() as f64 / *engine.denom() as f64;
            if !close(engine, measure_at(lambda), tol) {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && elapsed < 120.0;
    assert!(verdict(
        "enumeration oracle agreement",
        pass,
        &format!(
            "200 spaces, {norm_checks} norms + {level_checks} level sets, {violations} violations, tol 1e-9, {elapsed:.2}s (budget 120s)"
        ),
    ));
}

// ---------------------------------------------------------------------------
// 4. Level-set orthogonality with the explicit overlap factors.

fn masked(f: &[f64], mask: SubsetMask) -> Vec<f64> {
    f.iter()
        .enumerate()
        .map(|(i, v)| if mask >> i & 1 == 1 { *v } else { 0.0 })
        .collect()
}

fn random_disjoint_collection(rng: &mut ChaCha8Rng, n: usize) -> Vec<SubsetMask> {
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    let used = rng.gen_range(2..=n);
    let blocks = rng.gen_range(2..=used.min(4));
    let mut collection = vec![0 as SubsetMask; blocks];
    for (slot, point) in points[..used].iter().enumerate() {
        collection[slot % blocks] |= 1 << point;
    }
    collection.retain(|m| *m != 0);
    collection
}

fn minimal_overlap_parameter(nu: &MeasureTable, collection: &[SubsetMask], n: usize) -> Rational {
    let mut best = Rational::from_integer(1);
    for u in 1..(1 as SubsetMask) << n {
        let total: Rational = collection.iter().map(|a| nu.value(u & a)).sum();
        let ratio = total / nu.value(u);
        if ratio > best {
            best = ratio;
        }
    }
    best
}

#[test]
fn a4_level_set_orthogonality_factors() {
    let start = Instant::now();
    let options = EngineOptions::default();
    let mut lambda_checks = 0u64;
    let mut violations = 0u64;
    for seed in 0..100u64 {
        let space = if seed % 4 == 3 {
            let sizes = [[2, 2, 1], [2, 1, 2], [1, 2, 2], [3, 2, 1]][(seed as usize / 4) % 4];
            make_cartesian(sizes, None, seed).unwrap().space
        } else {
            make_three_measures(3 + (seed as usize) % 5, seed).unwrap().space
        };
        let n = space.len();
        let nu = build_measure_table(&space, MeasureKind::Nu, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c76_6c73);
        let f = random_function(&mut rng, n);
        let collection = random_disjoint_collection(&mut rng, n);
        let k = minimal_overlap_parameter(&nu, &collection, n);
        let checked = caratheodory_verdict(&nu, &collection, &k, &options).unwrap();
        assert!(checked.holds && checked.checked_exhaustively);
        let r = [0.5, 1.0, 2.0][seed as usize % 3];
        let union = collection.iter().fold(0, |acc, a| acc | a);
        let whole = NormContext::with_inner_size(&space, &nu, &masked(&f, union), r).unwrap();
        let parts: Vec<NormContext> = collection
            .iter()
            .map(|a| NormContext::with_inner_size(&space, &nu, &masked(&f, *a), r).unwrap())
            .collect();
        let k_f64 = *k.numer() as f64 / *k.denom() as f64;
        let scale = k_f64.powf(1.0 / r);
        let mut points: Vec<f64> = whole.profile().breakpoints.clone();
        for part in &parts {
            points.extend_from_slice(&part.profile().breakpoints);
        }
        points.extend(points.clone().iter().map(|b| b / scale));
        points.retain(|b| *b > 0.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut lambdas: Vec<f64> = points.clone();
        lambdas.extend(points.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        if let (Some(first), Some(last)) = (points.first(), points.last()) {
            lambdas.push(first / 2.0);
            lambdas.push(last * 2.0);
        }
        for lambda in lambdas {
            lambda_checks += 1;
            let lhs = whole.super_level(scale * lambda).0;
            let mid: Rational = parts.iter().map(|p| p.super_level(lambda).0).sum();
            let rhs = whole.super_level(lambda).0;
            if lhs > mid || mid > k.clone() * rhs {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0;
    assert!(verdict(
        "level-set orthogonality factors",
        pass,
        &format!(
            "100 verified overlap-bounded families, {lambda_checks} thresholds, {violations} violations, exact rational comparisons, {elapsed:.2}s"
        ),
    ));
}

// ---------------------------------------------------------------------------
// 5. Decomposition replays across both random setting families.

#[test]
fn a5_decomposition_replays() {
    let start = Instant::now();
    let options = EngineOptions::default();
    let mut replays = 0;
    let mut violations = 0;
    for seed in 0..100u64 {
        let (space, covering, additive) = if seed % 4 == 3 {
            let sizes = [[2, 2, 1], [2, 1, 2], [1, 2, 2], [3, 2, 1]][(seed as usize / 4) % 4];
            let s = make_cartesian(sizes, None, seed).unwrap();
            (s.space, s.covering, false)
        } else {
            let s = make_three_measures(3 + (seed as usize) % 5, seed).unwrap();
            (s.space, s.covering, true)
        };
        let n = space.len();
        let (mu, nu) = tables(&space);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6465_6373);
        let f = random_function(&mut rng, n);
        let (p, q, r) = [
            (2.0, 2.0, 2.0),
            (2.0, 3.0, 2.0),
            (3.0, 2.0, 1.5),
            (1.5, 2.5, 2.0),
        ][seed as usize % 4];
        let k_bound = if additive {
            Some(Rational::from_integer(1))
        } else {
            (1..=4)
                .map(Rational::from_integer)
                .find(|k| canopy_check(&space, &nu, &covering, k, &options).unwrap().holds)
        };
        assert!(k_bound.is_some());
        let interior = interior_decompose(&space, &nu, &f, q, r).unwrap();
        replays += 1;
        if !verify_interior(&space, &nu, &f, &interior).unwrap().all_pass {
            violations += 1;
        }
        for variant in [
            ExteriorVariant::QGeqR,
            ExteriorVariant::Canopy,
            ExteriorVariant::Psi,
        ] {
            let d = exterior_decompose(&space, &mu, &nu, &f, p, q, r, &covering, variant).unwrap();
            replays += 1;
            let report =
                verify_exterior(&space, &mu, &nu, &f, &d, &covering, k_bound.as_ref()).unwrap();
            if !report.all_pass {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && elapsed < 300.0;
    assert!(verdict(
        "decomposition replays",
        pass,
        &format!("{replays} replays over 100 instances, {violations} violations, {elapsed:.2}s (budget 300s)"),
    ));
}

// ---------------------------------------------------------------------------
// 6. Duality bounds with the traced constants, envelope logged to CSV.

#[test]
fn a6_duality_envelopes() {
    let start = Instant::now();
    let options = EngineOptions::default();
    let mut rows = vec!["seed,n,p,q,r,c_lower,C_upper,ratio".to_string()];
    let mut violations = 0;
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for seed in 0..100u64 {
        let (space, covering) = if seed % 4 == 3 {
            let sizes = [[2, 2, 1], [2, 1, 2], [1, 2, 2], [3, 2, 1]][(seed as usize / 4) % 4];
            let s = make_cartesian(sizes, None, seed).unwrap();
            (s.space, s.covering)
        } else {
            let s = make_three_measures(3 + (seed as usize) % 5, seed).unwrap();
            (s.space, s.covering)
        };
        let n = space.len();
        let (p, q, r) = [(2.0, 2.0, 3.0), (2.0, 3.0, 2.0), (3.0, 2.0, 4.0)][seed as usize % 3];
        let (mu, nu) = tables(&space);
        let k = (1..=4)
            .map(Rational::from_integer)
            .find(|k| {
                let v = if q > r {
                    crop_check(&space, &nu, &covering, k, &options).unwrap()
                } else {
                    canopy_check(&space, &nu, &covering, k, &options).unwrap()
                };
                v.holds
            })
            .expect("condition parameter ≤ 4");
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6475_616c);
        let f = random_function(&mut rng, n);
        let witness = build_dual(&space, &mu, &nu, &f, p, q, r, &covering, &k).unwrap();
        let report = verify_duality(&space, &mu, &nu, &f, &witness, &covering, &k).unwrap();
        if !report.all_pass || !report.ratio.is_finite() {
            violations += 1;
        }
        lower = lower.min(report.c_lower);
        upper = upper.max(report.c_upper);
        rows.push(format!(
            "{seed},{n},{p},{q},{r},{},{},{}",
            report.c_lower, report.c_upper, report.ratio
        ));
    }
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    let csv_path = dir.join("duality_envelope.csv");
    std::fs::write(&csv_path, rows.join("\n") + "\n").unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && lower > 0.0 && upper.is_finite();
    assert!(verdict(
        "duality envelopes",
        pass,
        &format!(
            "100 instances, {violations} violations, envelope [{lower:.6}, {upper:.6}] logged to {}, {elapsed:.2}s",
            csv_path.display()
        ),
    ));
}

// ---------------------------------------------------------------------------
// 7. Structured dyadic geometry, exhaustively small and sampled large.

fn point_set(ids: &[usize]) -> PointSet {
    ids.iter().copied().collect()
}

fn intersections_hold(setting: &DyadicSetting, sample: Option<(usize, u64)>) -> (bool, u64) {
    let strip_sets: Vec<PointSet> = (0..setting.strip_count())
        .map(|s| point_set(setting.strip_points(s)))
        .collect();
    let check_pair = |a: usize, b: usize| -> bool {
        let common: PointSet = strip_sets[a].intersection(&strip_sets[b]).copied().collect();
        match strip_intersection_label(setting.strip_label(a), setting.strip_label(b)) {
            None => common.is_empty(),
            Some(label) => common == strip_sets[setting.strip_index_of(label).unwrap()],
        }
    };
    let check_mixed = |s: usize, t: usize| -> bool {
        let tree: PointSet = point_set(setting.tree_points(t));
        let common: PointSet = strip_sets[s].intersection(&tree).copied().collect();
        match strip_tree_intersection_label(setting.strip_label(s), setting.tree_label(t)) {
            None => common.is_empty(),
            Some(label) => {
                common == point_set(setting.tree_points(setting.tree_index_of(label).unwrap()))
            }
        }
    };
    let mut samples = 0u64;
    match sample {
        None => {
            for a in 0..setting.strip_count() {
                for b in a..setting.strip_count() {
                    samples += 1;
                    if !check_pair(a, b) {
                        return (false, samples);
                    }
                }
            }
            for s in 0..setting.strip_count() {
                for t in 0..setting.tree_count() {
                    samples += 1;
                    if !check_mixed(s, t) {
                        return (false, samples);
                    }
                }
            }
        }
        Some((pairs, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                samples += 1;
                let ok = if rng.gen_bool(0.5) {
                    let a = rng.gen_range(0..setting.strip_count());
                    let b = rng.gen_range(0..setting.strip_count());
                    check_pair(a.min(b), a.max(b))
                } else {
                    check_mixed(
                        rng.gen_range(0..setting.strip_count()),
                        rng.gen_range(0..setting.tree_count()),
                    )
                };
                if !ok {
                    return (false, samples);
                }
            }
        }
    }
    (true, samples)
}

/// Structured engines versus the generic minimal-cover recursion on every
/// mask of a window.
fn window_agrees(setting: &DyadicSetting, window: &[usize]) -> bool {
    let space = setting.window_space(window).unwrap();
    let mu = build_measure_table(&space, MeasureKind::Mu, window.len()).unwrap();
    let nu = build_measure_table(&space, MeasureKind::Nu, window.len()).unwrap();
    for mask in 0..(1u64 << window.len()) {
        let pts: PointSet = (0..window.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| window[i])
            .collect();
        if mu.value(mask as SubsetMask) != setting.structured_measure(MeasureKind::Mu, &pts).unwrap()
            || nu.value(mask as SubsetMask)
                != setting.structured_measure(MeasureKind::Nu, &pts).unwrap()
        {
            return false;
        }
    }
    true
}

#[test]
fn a7_structured_dyadic_geometry() {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();

    // Small truncation: everything exhaustive.
    let small = make_dyadic_discrete(1).unwrap();
    let (ok, pairs) = intersections_hold(&small, None);
    pass &= ok;
    notes.push(format!("J=1 intersections {pairs} pairs"));
    for sid in 0..small.strip_count() {
        pass &= small.strip_cover_value(&point_set(small.strip_points(sid)))
            == small.strip_pre_measure(sid);
    }
    for tid in 0..small.tree_count() {
        pass &= small.tree_cover_value(&point_set(small.tree_points(tid))).unwrap()
            == small.tree_pre_measure(tid);
    }
    // Generic-recursion agreement: a window partition of all points plus
    // every small subset of the whole ground set.
    let n = small.len();
    let thirds: Vec<Vec<usize>> = (0..3)
        .map(|c| (0..n).filter(|i| i % 3 == c).collect())
        .collect();
    for window in &thirds {
        pass &= window_agrees(&small, window);
    }
    let mut small_subsets = 0u64;
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let pts: PointSet = [a, b, c].into_iter().collect();
                let window: Vec<usize> = pts.iter().copied().collect();
                let space = small.window_space(&window).unwrap();
                let nu = build_measure_table(&space, MeasureKind::Nu, 3).unwrap();
                let mu = build_measure_table(&space, MeasureKind::Mu, 3).unwrap();
                let full = ((1u64 << window.len()) - 1) as SubsetMask;
                small_subsets += 1;
                pass &= mu.value(full) == small.structured_measure(MeasureKind::Mu, &pts).unwrap()
                    && nu.value(full)
                        == small.structured_measure(MeasureKind::Nu, &pts).unwrap();
            }
        }
    }
    notes.push(format!(
        "window partition + {small_subsets} small subsets vs generic recursion"
    ));
    let exhaustive_options = EngineOptions {
        exact_limit: 32,
        budget: 200,
        seed: 5,
    };
    let two = Rational::from_integer(2);
    let one = Rational::from_integer(1);
    let parent = small.parent_check(&two, &exhaustive_options);
    pass &= parent.holds && parent.checked_exhaustively;
    let canopy = small.canopy_geometry_check(&two, &exhaustive_options).unwrap();
    pass &= canopy.holds && canopy.checked_exhaustively;
    notes.push(format!("J=1 extension bound {} joints", canopy.samples));
    let crop = small.crop_geometry_check(&one, &exhaustive_options).unwrap();
    pass &= crop.holds && crop.checked_exhaustively;

    // Large truncation: sampled intersections, exhaustive generator
    // measures, sampled condition layers.
    let large = make_dyadic_discrete(2).unwrap();
    let (ok, pairs) = intersections_hold(&large, Some((1000, 17)));
    pass &= ok;
    notes.push(format!("J=2 intersections {pairs} sampled pairs"));
    for sid in 0..large.strip_count() {
        pass &= large.strip_cover_value(&point_set(large.strip_points(sid)))
            == large.strip_pre_measure(sid);
    }
    for tid in 0..large.tree_count() {
        pass &= large.tree_cover_value(&point_set(large.tree_points(tid))).unwrap()
            == large.tree_pre_measure(tid);
    }
    let sampled_options = EngineOptions {
        exact_limit: 12,
        budget: 40,
        seed: 17,
    };
    let parent = large.parent_check(&two, &sampled_options);
    pass &= parent.holds;
    let canopy = large.canopy_geometry_check(&two, &sampled_options).unwrap();
    pass &= canopy.holds;
    let crop = large.crop_geometry_check(&one, &sampled_options).unwrap();
    pass &= crop.holds;

    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    assert!(verdict(
        "structured dyadic geometry",
        pass,
        &format!("{}; {elapsed:.2}s (budget 300s)", notes.join("; ")),
    ));
}

// ---------------------------------------------------------------------------
// 8. Repeated-exponent collapse inside one fixed envelope.

#[test]
fn a8_repeated_exponent_collapse() {
    let start = Instant::now();
    const C: f64 = 16.0;
    let mut low = f64::INFINITY;
    let mut high = 0.0f64;
    let mut inside = 0;
    for seed in 0..100u64 {
        let space = if seed % 4 == 3 {
            let sizes = [[2, 2, 2], [3, 2, 1], [2, 1, 2], [1, 2, 2]][(seed as usize / 4) % 4];
            make_cartesian(sizes, None, seed).unwrap().space
        } else {
            make_three_measures(3 + (seed as usize) % 6, seed).unwrap().space
        };
        let n = space.len();
        let (mu, nu) = tables(&space);
        let t = SpaceTables { mu: &mu, nu: &nu };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f_6c6c);
        let f = random_function(&mut rng, n);
        let s = [1.0, 1.5, 2.0, 3.0][seed as usize % 4];
        let single = outer_norm(&space, t, &f, s, SizeExpr::Inner { r: s }).unwrap().value;
        let double = outer_norm(&space, t, &f, s, SizeExpr::Outer { q: s, r: s })
            .unwrap()
            .value;
        let ratio = double / single;
        low = low.min(ratio);
        high = high.max(ratio);
        if (1.0 / C..=C).contains(&ratio) {
            inside += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = inside == 100;
    assert!(verdict(
        "repeated-exponent collapse",
        pass,
        &format!(
            "100 instances on 3–8 points, ratios ∈ [{low:.6}, {high:.6}] within [1/{C}, {C}], {elapsed:.2}s"
        ),
    ));
}
