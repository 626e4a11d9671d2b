//! Structural invariants of the truncated strip/tree setting: intersection
//! calculus, exact generator measures, agreement with the generic subset
//! engine on small windows, additivity across disjoint generators, and the
//! covering/extension/pruning conditions of the half-cover assignment.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use outer_lp::dyadic::{
    make_dyadic_discrete, strip_intersection_label, strip_tree_intersection_label, DyadicSetting,
    PointSet,
};
use outer_lp::space::{build_measure_table, MeasureKind};
use outer_lp::{EngineOptions, Rational};

fn point_set(ids: &[usize]) -> PointSet {
    ids.iter().copied().collect()
}

#[test]
fn strip_geometry_invariants_hold_at_both_truncations() {
    for j in [1, 2] {
        let setting = make_dyadic_discrete(j).unwrap();
        for a in 0..setting.strip_count() {
            let sa = point_set(setting.strip_points(a));
            for b in a..setting.strip_count() {
                let sb = point_set(setting.strip_points(b));
                let common: PointSet = sa.intersection(&sb).copied().collect();
                match strip_intersection_label(setting.strip_label(a), setting.strip_label(b)) {
                    None => assert!(common.is_empty(), "strips {a} and {b} at J={j}"),
                    Some(label) => {
                        let expected =
                            point_set(setting.strip_points(setting.strip_index_of(label).unwrap()));
                        assert_eq!(common, expected, "strips {a} and {b} at J={j}");
                    }
                }
            }
        }
        for sid in 0..setting.strip_count() {
            let sa = point_set(setting.strip_points(sid));
            for tid in 0..setting.tree_count() {
                let ta = point_set(setting.tree_points(tid));
                let common: PointSet = sa.intersection(&ta).copied().collect();
                match strip_tree_intersection_label(
                    setting.strip_label(sid),
                    setting.tree_label(tid),
                ) {
                    None => assert!(common.is_empty(), "strip {sid} tree {tid} at J={j}"),
                    Some(label) => {
                        let expected =
                            point_set(setting.tree_points(setting.tree_index_of(label).unwrap()));
                        assert_eq!(common, expected, "strip {sid} tree {tid} at J={j}");
                    }
                }
            }
        }
    }
}

#[test]
fn generator_measures_equal_pre_measures_at_both_truncations() {
    for j in [1, 2] {
        let setting = make_dyadic_discrete(j).unwrap();
        for sid in 0..setting.strip_count() {
            let pts = point_set(setting.strip_points(sid));
            assert_eq!(
                setting.strip_cover_value(&pts),
                setting.strip_pre_measure(sid),
                "strip {sid} at J={j}"
            );
        }
        for tid in 0..setting.tree_count() {
            let pts = point_set(setting.tree_points(tid));
            assert_eq!(
                setting.tree_cover_value(&pts).unwrap(),
                setting.tree_pre_measure(tid),
                "tree {tid} at J={j}"
            );
        }
    }
}

/// Draws a window of distinct points and compares both structured measures
/// against the generic subset recursion on the embedded space.
fn check_windows(setting: &DyadicSetting, windows: usize, max_size: usize, probes: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..setting.len()).collect();
    for _ in 0..windows {
        let mut pool = all.clone();
        pool.shuffle(&mut rng);
        let size = rng.gen_range(1..=max_size);
        let window: Vec<usize> = pool[..size].to_vec();
        let space = setting.window_space(&window).unwrap();
        let mu = build_measure_table(&space, MeasureKind::Mu, max_size).unwrap();
        let nu = build_measure_table(&space, MeasureKind::Nu, max_size).unwrap();
        let full = if size == 32 { u32::MAX } else { (1u32 << size) - 1 };
        let mut masks: Vec<u32> = (0..probes).map(|_| rng.gen_range(0..=full)).collect();
        masks.push(full);
        for mask in masks {
            let pts: PointSet = (0..size)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| window[i])
                .collect();
            assert_eq!(
                mu.value(mask),
                setting.strip_cover_value(&pts),
                "window {window:?} mask {mask:#x}"
            );
            assert_eq!(
                nu.value(mask),
                setting.tree_cover_value(&pts).unwrap(),
                "window {window:?} mask {mask:#x}"
            );
        }
    }
}

#[test]
fn structured_measures_match_windowed_subset_recursion() {
    let small = make_dyadic_discrete(1).unwrap();
    check_windows(&small, 300, 12, 40, 41);
    let large = make_dyadic_discrete(2).unwrap();
    check_windows(&large, 60, 10, 20, 43);
}

#[test]
fn measures_add_across_disjoint_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for j in [1, 2] {
        let setting = make_dyadic_discrete(j).unwrap();
        for _ in 0..40 {
            // Random pairwise-disjoint strip family.
            let mut chosen: Vec<usize> = Vec::new();
            let mut order: Vec<usize> = (0..setting.strip_count()).collect();
            order.shuffle(&mut rng);
            for sid in order {
                if chosen.len() >= 4 {
                    break;
                }
                if chosen.iter().all(|c| {
                    strip_intersection_label(setting.strip_label(*c), setting.strip_label(sid))
                        .is_none()
                }) {
                    chosen.push(sid);
                }
            }
            let mut union = PointSet::new();
            let mut total = Rational::from_integer(0);
            for sid in &chosen {
                union.extend(setting.strip_points(*sid).iter().copied());
                total += setting.strip_pre_measure(*sid);
            }
            assert_eq!(setting.strip_cover_value(&union), total);
            // A tree split across the disjoint strips: its cover value adds.
            let tid = rng.gen_range(0..setting.tree_count());
            let tpts = point_set(setting.tree_points(tid));
            let mut cut_union = PointSet::new();
            let mut cut_total = Rational::from_integer(0);
            for sid in &chosen {
                let spts = point_set(setting.strip_points(*sid));
                let cut: PointSet = tpts.intersection(&spts).copied().collect();
                cut_total += setting.tree_cover_value(&cut).unwrap();
                cut_union.extend(cut);
            }
            assert_eq!(setting.tree_cover_value(&cut_union).unwrap(), cut_total);
        }
    }
}

#[test]
fn half_cover_assignment_passes_all_conditions_at_the_small_truncation() {
    let setting = make_dyadic_discrete(1).unwrap();
    let options = EngineOptions {
        exact_limit: 32,
        budget: 200,
        seed: 5,
    };
    let parent = setting.parent_check(&Rational::from_integer(2), &options);
    assert!(parent.holds, "{:?}", parent.detail);
    assert!(parent.checked_exhaustively);

    let canopy = setting
        .canopy_geometry_check(&Rational::from_integer(2), &options)
        .unwrap();
    assert!(canopy.holds, "{:?}", canopy.detail);
    assert!(canopy.checked_exhaustively);
    assert!(canopy.samples > 1_000_000, "got {} samples", canopy.samples);

    let crop = setting
        .crop_geometry_check(&Rational::from_integer(1), &options)
        .unwrap();
    assert!(crop.holds, "{:?}", crop.detail);
    assert!(crop.checked_exhaustively);
}

#[test]
fn sampled_conditions_hold_at_the_large_truncation() {
    let setting = make_dyadic_discrete(2).unwrap();
    let parent_options = EngineOptions {
        exact_limit: 12,
        budget: 60,
        seed: 13,
    };
    let parent = setting.parent_check(&Rational::from_integer(2), &parent_options);
    assert!(parent.holds, "{:?}", parent.detail);
    assert!(!parent.checked_exhaustively);

    let canopy_options = EngineOptions {
        exact_limit: 12,
        budget: 10,
        seed: 17,
    };
    let canopy = setting
        .canopy_geometry_check(&Rational::from_integer(2), &canopy_options)
        .unwrap();
    assert!(canopy.holds, "{:?}", canopy.detail);
    assert!(!canopy.checked_exhaustively);

    let crop_options = EngineOptions {
        exact_limit: 12,
        budget: 12,
        seed: 19,
    };
    let crop = setting
        .crop_geometry_check(&Rational::from_integer(1), &crop_options)
        .unwrap();
    assert!(crop.holds, "{:?}", crop.detail);
    assert!(!crop.checked_exhaustively);
}

#[test]
fn tile_norm_identity_holds_for_random_tile_functions() {
    let setting = make_dyadic_discrete(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..2 {
        let values: Vec<f64> = (0..setting.len())
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.2..3.0)
                }
            })
            .collect();
        let (weighted, discrete) = setting.tile_norm_pair(&values, 2.0, 2.0, 2.0).unwrap();
        assert!(
            (weighted - discrete).abs() <= 1e-9 * weighted.abs().max(1.0),
            "weighted {weighted} vs discrete {discrete}"
        );
    }
}

/// A tree crossing two disjoint strips has `BTreeSet`-level intersections
/// that stay inside the strips' point sets.
#[test]
fn tree_cuts_stay_inside_their_strips() {
    let setting = make_dyadic_discrete(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..50 {
        let sid = rng.gen_range(0..setting.strip_count());
        let tid = rng.gen_range(0..setting.tree_count());
        let spts: BTreeSet<usize> = setting.strip_points(sid).iter().copied().collect();
        let cut: BTreeSet<usize> = setting
            .tree_points(tid)
            .iter()
            .copied()
            .filter(|p| spts.contains(p))
            .collect();
        assert!(cut.is_subset(&spts));
    }
}
