//! Duality-layer properties: Hölder-side pairing bounds, dyadic-scaling
//! invariance of the traced constants, witness tampering, and the growth
//! of many-term triangle defects past any fixed two-term constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use outer_lp::conditions::{canopy_check, crop_check};
use outer_lp::decompose::quasi_triangle_constant;
use outer_lp::duality::{build_dual, triangle_defect, verify_duality};
use outer_lp::norms::NormContext;
use outer_lp::settings::{make_cartesian, make_counterexample_first, make_three_measures};
use outer_lp::space::build_measure_table;
use outer_lp::{EngineOptions, MeasureKind, Rational};

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

#[test]
fn pairings_stay_below_the_holder_product() {
    let options = EngineOptions::default();
    for seed in 0..24u64 {
        let (space, covering) = if seed % 4 == 3 {
            let sizes = [[2, 2, 1], [2, 1, 2], [1, 2, 2], [3, 2, 1]][(seed as usize / 4) % 4];
            let s = make_cartesian(sizes, None, seed).unwrap();
            (s.space, s.covering)
        } else {
            let n = 3 + (seed as usize) % 5;
            let s = make_three_measures(n, seed).unwrap();
            (s.space, s.covering)
        };
        let n = space.len();
        let (p, q, r) = [(2.0, 2.0, 3.0), (2.0, 3.0, 2.0), (3.0, 2.0, 4.0)][seed as usize % 3];
        let mu = build_measure_table(&space, MeasureKind::Mu, n).unwrap();
        let nu = build_measure_table(&space, MeasureKind::Nu, n).unwrap();
        let mut k_param = None;
        for candidate in 1..=4 {
            let k = Rational::from_integer(candidate);
            let verdict = if q > r {
                crop_check(&space, &nu, &covering, &k, &options).unwrap()
            } else {
                canopy_check(&space, &nu, &covering, &k, &options).unwrap()
            };
            if verdict.holds {
                k_param = Some(k);
                break;
            }
        }
        let k = k_param.expect("condition parameter ≤ 4");
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6475_616c);
        let f = random_function(&mut rng, n);
        let witness = build_dual(&space, &mu, &nu, &f, p, q, r, &covering, &k).unwrap();
        let report = verify_duality(&space, &mu, &nu, &f, &witness, &covering, &k).unwrap();
        assert!(report.all_pass, "seed {seed}: {report:?}");
        assert!(
            report.ratio <= 1.0 + 1e-9,
            "pairing exceeded the product at seed {seed}: {}",
            report.ratio
        );
        assert!(report.c_lower > 0.0 && report.c_upper.is_finite());
        assert!(report.pairing > 0.0);
    }
}

#[test]
fn traced_constants_are_invariant_under_dyadic_rescaling() {
    let options = EngineOptions::default();
    for seed in [2u64, 5, 13] {
        let n = 4 + (seed as usize) % 3;
        let setting = make_three_measures(n, seed).unwrap();
        let mu = build_measure_table(&setting.space, MeasureKind::Mu, n).unwrap();
        let nu = build_measure_table(&setting.space, MeasureKind::Nu, n).unwrap();
        let (p, q, r) = (2.0, 2.0, 3.0);
        let k = Rational::from_integer(1);
        let verdict = canopy_check(&setting.space, &nu, &setting.covering, &k, &options).unwrap();
        assert!(verdict.holds);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_function(&mut rng, n);
        let base_witness =
            build_dual(&setting.space, &mu, &nu, &f, p, q, r, &setting.covering, &k).unwrap();
        let base = verify_duality(
            &setting.space,
            &mu,
            &nu,
            &f,
            &base_witness,
            &setting.covering,
            &k,
        )
        .unwrap();
        for t in [3, -2] {
            let scaled: Vec<f64> = f.iter().map(|v| v * (t as f64).exp2()).collect();
            let witness = build_dual(
                &setting.space,
                &mu,
                &nu,
                &scaled,
                p,
                q,
                r,
                &setting.covering,
                &k,
            )
            .unwrap();
            assert_eq!(witness.scale_exp, base_witness.scale_exp + t);
            let report = verify_duality(
                &setting.space,
                &mu,
                &nu,
                &scaled,
                &witness,
                &setting.covering,
                &k,
            )
            .unwrap();
            assert!(report.all_pass);
            assert!((report.ratio - base.ratio).abs() <= 1e-9 * base.ratio.max(1.0));
            assert!((report.c_lower - base.c_lower).abs() <= 1e-9 * base.c_lower);
            assert!((report.c_upper - base.c_upper).abs() <= 1e-9 * base.c_upper);
        }
    }
}

#[test]
fn tampered_witnesses_fail_verification() {
    let options = EngineOptions::default();
    let n = 5;
    let setting = make_three_measures(n, 31).unwrap();
    let mu = build_measure_table(&setting.space, MeasureKind::Mu, n).unwrap();
    let nu = build_measure_table(&setting.space, MeasureKind::Nu, n).unwrap();
    let k = Rational::from_integer(1);
    assert!(
        canopy_check(&setting.space, &nu, &setting.covering, &k, &options)
            .unwrap()
            .holds
    );
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let f = random_function(&mut rng, n);
    let mut witness = build_dual(
        &setting.space,
        &mu,
        &nu,
        &f,
        2.0,
        2.0,
        3.0,
        &setting.covering,
        &k,
    )
    .unwrap();
    for v in &mut witness.g {
        *v *= 100.0;
    }
    let report = verify_duality(
        &setting.space,
        &mu,
        &nu,
        &f,
        &witness,
        &setting.covering,
        &k,
    )
    .unwrap();
    assert!(!report.all_pass, "inflated density must break a bound");
}

#[test]
fn two_term_defects_respect_the_derived_constant() {
    for seed in 0..12u64 {
        let n = 3 + (seed as usize) % 5;
        let setting = make_three_measures(n, seed).unwrap();
        let mu = build_measure_table(&setting.space, MeasureKind::Mu, n).unwrap();
        let nu = build_measure_table(&setting.space, MeasureKind::Nu, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7472_6961);
        let f = random_function(&mut rng, n);
        let g = random_function(&mut rng, n);
        for (p, q, r) in [(2.0, 2.0, 2.0), (2.0, 3.0, 1.5), (1.5, 2.0, 3.0)] {
            let defect =
                triangle_defect(&setting.space, &mu, &nu, p, q, r, &[f.clone(), g.clone()])
                    .unwrap();
            let bound =
                2.0 * 1.0_f64.max((1.0 / p - 1.0).exp2()) * quasi_triangle_constant(q, r);
            assert!(
                defect <= bound * (1.0 + 1e-9),
                "(p,q,r)=({p},{q},{r}): defect {defect} > bound {bound}"
            );
        }
    }
}

#[test]
fn many_term_defects_outgrow_the_two_term_constant() {
    // Singleton summands of the all-ones function on the extremal family:
    // the m-term defect of the single iterated norm at (q, r) = (1, 1/2)
    // equals m, passing the fixed two-term constant 4 from m = 5 on.
    let two_term = quasi_triangle_constant(1.0, 0.5);
    assert_eq!(two_term, 4.0);
    let (q, r) = (1.0, 0.5);
    let mut previous = 0.0;
    for m in 2..=10usize {
        let setting = make_counterexample_first(m).unwrap();
        let nu = build_measure_table(&setting.space, MeasureKind::Nu, m).unwrap();
        let whole = NormContext::with_inner_size(&setting.space, &nu, &setting.f, r)
            .unwrap()
            .norm(q)
            .unwrap()
            .value;
        let parts: f64 = (0..m)
            .map(|i| {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                NormContext::with_inner_size(&setting.space, &nu, &e, r)
                    .unwrap()
                    .norm(q)
                    .unwrap()
                    .value
            })
            .sum();
        let defect = whole / parts;
        assert!(
            (defect - m as f64).abs() <= 1e-9 * m as f64,
            "m={m}: defect {defect}"
        );
        assert!(defect > previous);
        previous = defect;
        if m >= 5 {
            assert!(defect > two_term);
        }
    }
}
