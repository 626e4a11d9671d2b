//! Covering functions and the two structural conditions on them.
//!
//! A covering function maps each subset `A` to a pairwise-disjoint
//! subcollection `C(A)` of a fixed family whose union — the parent set
//! `B_C(A)` — contains `A`, costs at most `Φ·μ(A)`, and grows monotonically
//! in `A`.  On top of it sit two conditions quantified over disjoint
//! collections: the *extension* condition (adding any set disjoint from the
//! parent of a summation-bounded collection keeps the bound) and the
//! *pruning* condition (inside any subcollection of the family there is a
//! bounded disjoint subcollection whose removal from the assignment never
//! changes parents of outside sets).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::space::{
    caratheodory_check, check_disjoint, full_mask, mask_points, submasks, MeasureTable,
};
use crate::{EngineOptions, Error, FiniteSpace, Rational, Result, SubsetMask};

/// How a covering spec assigns subcollections to subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignRule {
    /// `C(A) = {A}` over the implicit family of all nonempty subsets.
    Identity,
    /// `C(A)` is every member of the (pairwise disjoint, covering) family
    /// meeting `A`.
    Partition,
    /// Explicit table from mask to indices into the family.
    Explicit(BTreeMap<SubsetMask, Vec<usize>>),
}

/// A covering function: family, assignment rule, and cost parameter `Φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSpec {
    /// The generating family the assignment may use (empty for the identity
    /// rule, whose family is all nonempty subsets).
    pub family: Vec<SubsetMask>,
    /// The assignment rule.
    pub rule: AssignRule,
    /// Cost parameter: `μ(B_C(A)) ≤ Φ·μ(A)` must hold for all `A`.
    pub phi: Rational,
}

impl CoveringSpec {
    /// The identity covering: every set is its own parent, `Φ = 1`.
    pub fn identity() -> Self {
        CoveringSpec {
            family: Vec::new(),
            rule: AssignRule::Identity,
            phi: Rational::from_integer(1),
        }
    }

    /// Covering through a pairwise-disjoint family that covers the space.
    pub fn partition(space: &FiniteSpace, family: Vec<SubsetMask>, phi: Rational) -> Result<Self> {
        check_disjoint(&family)?;
        let union = family.iter().fold(0, |acc, m| acc | m);
        if union != space.full() || family.iter().any(|m| *m == 0) {
            return Err(Error::BadAssignment);
        }
        Ok(CoveringSpec {
            family,
            rule: AssignRule::Partition,
            phi,
        })
    }

    /// Covering given by an explicit assignment table.
    pub fn explicit(
        family: Vec<SubsetMask>,
        table: BTreeMap<SubsetMask, Vec<usize>>,
        phi: Rational,
    ) -> Result<Self> {
        for indices in table.values() {
            if indices.iter().any(|i| *i >= family.len()) {
                return Err(Error::BadAssignment);
            }
        }
        Ok(CoveringSpec {
            family,
            rule: AssignRule::Explicit(table),
            phi,
        })
    }

    /// The subcollection `C(A)`, as masks.
    pub fn assign(&self, a: SubsetMask) -> Result<Vec<SubsetMask>> {
        let members = match &self.rule {
            AssignRule::Identity => {
                if a == 0 {
                    Vec::new()
                } else {
                    vec![a]
                }
            }
            AssignRule::Partition => self
                .family
                .iter()
                .copied()
                .filter(|m| m & a != 0)
                .collect(),
            AssignRule::Explicit(table) => {
                let indices = table.get(&a).ok_or(Error::MissingAssignment)?;
                indices.iter().map(|i| self.family[*i]).collect()
            }
        };
        check_disjoint(&members).map_err(|_| Error::BadAssignment)?;
        Ok(members)
    }

    /// The parent set `B_C(A)`, the union of `C(A)`.
    pub fn parent(&self, a: SubsetMask) -> Result<SubsetMask> {
        Ok(self.assign(a)?.iter().fold(0, |acc, m| acc | m))
    }

    /// Whether a mask belongs to the family (`Identity` admits any nonempty
    /// subset).
    pub fn in_family(&self, m: SubsetMask) -> bool {
        match self.rule {
            AssignRule::Identity => m != 0,
            _ => self.family.contains(&m),
        }
    }
}

/// A failing instance of one of the condition checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Covering-function violation on `a` (containment or cost), or — when
    /// `extension` is present — a monotonicity violation between `a` and the
    /// one-point extension.
    Parent {
        /// The violating set.
        a: SubsetMask,
        /// The superset whose parent fails to contain the parent of `a`.
        extension: Option<SubsetMask>,
    },
    /// A bounded collection, a set disjoint from its parent, and a test set
    /// on which the extended collection breaks the summation bound.
    Extension {
        /// The disjoint collection.
        collection: Vec<SubsetMask>,
        /// The adjoined set.
        d: SubsetMask,
        /// The violating test set.
        u: SubsetMask,
    },
    /// A subcollection of the family admitting no valid pruning, plus the
    /// outside set whose parent changes under the best candidate (absent
    /// when no bounded disjoint subcollection exists at all).
    Pruning {
        /// The subcollection of the family.
        collection: Vec<SubsetMask>,
        /// An outside set rebutting the preferred candidate.
        f: Option<SubsetMask>,
    },
}

/// Result of a condition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionVerdict {
    /// Whether the condition held on everything examined.
    pub holds: bool,
    /// A failing instance when it did not.
    pub witness: Option<Witness>,
    /// Whether the quantifier was enumerated exhaustively.
    pub checked_exhaustively: bool,
    /// Number of quantifier instances examined.
    pub samples: u64,
}

impl ConditionVerdict {
    fn pass(exhaustive: bool, samples: u64) -> Self {
        ConditionVerdict {
            holds: true,
            witness: None,
            checked_exhaustively: exhaustive,
            samples,
        }
    }

    fn fail(witness: Witness, exhaustive: bool, samples: u64) -> Self {
        ConditionVerdict {
            holds: false,
            witness: Some(witness),
            checked_exhaustively: exhaustive,
            samples,
        }
    }
}

/// Exact comparison `lhs ≤ bound·rhs` for scaled measure numerators.
fn le_scaled(lhs: i128, bound: &Rational, rhs: i128) -> bool {
    lhs.checked_mul(*bound.denom())
        .zip(bound.numer().checked_mul(rhs))
        .map(|(l, r)| l <= r)
        .expect("measure magnitudes validated at construction")
}

/// Verifies that a spec is a genuine covering function for `μ`.
///
/// Checks, for every subset `A` (exhaustively when `n` is within the exact
/// limit, sampled otherwise): the members of `C(A)` are pairwise disjoint and
/// in the family, `A ⊆ B_C(A)`, `μ(B_C(A)) ≤ Φ·μ(A)`, and monotonicity via
/// all one-point extensions `B_C(A) ⊆ B_C(A ∪ {x})` — which chains to full
/// monotonicity under inclusion.
pub fn parent_function_check(
    space: &FiniteSpace,
    mu: &MeasureTable,
    spec: &CoveringSpec,
    options: &EngineOptions,
) -> Result<ConditionVerdict> {
    let n = space.len();
    let full = full_mask(n);
    let mut samples = 0u64;
    let mut check_one = |a: SubsetMask| -> Result<Option<Witness>> {
        samples += 1;
        let members = spec.assign(a)?;
        if members.iter().any(|m| !spec.in_family(*m)) {
            return Err(Error::BadAssignment);
        }
        let parent = members.iter().fold(0, |acc, m| acc | m);
        if a & !parent != 0 {
            return Ok(Some(Witness::Parent { a, extension: None }));
        }
        if !le_scaled(mu.scaled(parent), &spec.phi, mu.scaled(a)) {
            return Ok(Some(Witness::Parent { a, extension: None }));
        }
        for x in mask_points(full & !a) {
            let bigger = a | (1 << x);
            if parent & !spec.parent(bigger)? != 0 {
                return Ok(Some(Witness::Parent {
                    a,
                    extension: Some(bigger),
                }));
            }
        }
        Ok(None)
    };
    if n <= options.exact_limit {
        for a in submasks(full) {
            if let Some(w) = check_one(a)? {
                return Ok(ConditionVerdict::fail(w, true, samples));
            }
        }
        Ok(ConditionVerdict::pass(true, samples))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.budget {
            let a = rng.gen::<u32>() & full;
            if let Some(w) = check_one(a)? {
                return Ok(ConditionVerdict::fail(w, false, samples));
            }
        }
        Ok(ConditionVerdict::pass(false, samples))
    }
}

/// Calls `visit` with every collection of pairwise-disjoint nonempty subsets
/// of the masked ground set (the empty collection included), each exactly
/// once.  Stops early when `visit` returns `false`.
pub fn for_each_disjoint_collection(
    points: SubsetMask,
    visit: &mut impl FnMut(&[SubsetMask]) -> bool,
) -> bool {
    fn recurse(
        remaining: &[usize],
        blocks: &mut Vec<SubsetMask>,
        visit: &mut impl FnMut(&[SubsetMask]) -> bool,
    ) -> bool {
        let Some((&point, rest)) = remaining.split_first() else {
            return visit(blocks);
        };
        // The point stays unused...
        if !recurse(rest, blocks, visit) {
            return false;
        }
        // ...or joins an existing block...
        for i in 0..blocks.len() {
            blocks[i] |= 1 << point;
            let go = recurse(rest, blocks, visit);
            blocks[i] &= !(1 << point);
            if !go {
                return false;
            }
        }
        // ...or opens a new block (labels in first-appearance order keeps
        // each unordered collection unique).
        blocks.push(1 << point);
        let go = recurse(rest, blocks, visit);
        blocks.pop();
        go
    }
    let points: Vec<usize> = mask_points(points).collect();
    recurse(&points, &mut Vec::new(), visit)
}

/// Draws a random collection of pairwise-disjoint nonempty subsets.
fn random_disjoint_collection(rng: &mut ChaCha8Rng, n: usize) -> Vec<SubsetMask> {
    let mut blocks: Vec<SubsetMask> = Vec::new();
    for point in 0..n {
        // Skip with probability 1/2, else uniformly join or open a block.
        if rng.gen_bool(0.5) {
            continue;
        }
        let choice = rng.gen_range(0..=blocks.len());
        if choice == blocks.len() {
            blocks.push(1 << point);
        } else {
            blocks[choice] |= 1 << point;
        }
    }
    blocks
}

/// Exhaustive bound check for `collection ∪ {d}` given precomputed block
/// sums: `sums[U] = Σ_A ν(U∩A)` over the base collection.
fn extension_violation(
    nu: &MeasureTable,
    sums: &[i128],
    base_union: SubsetMask,
    d: SubsetMask,
    k: &Rational,
) -> Option<SubsetMask> {
    for u in submasks(base_union | d) {
        let lhs = sums[(u & base_union) as usize] + nu.scaled(u & d);
        if !le_scaled(lhs, k, nu.scaled(u)) {
            return Some(u);
        }
    }
    None
}

/// Whether a disjoint collection satisfies the summation bound, by direct
/// enumeration of test sets inside its union.
fn collection_bounded(nu: &MeasureTable, collection: &[SubsetMask], k: &Rational) -> bool {
    let union = collection.iter().fold(0, |acc, a| acc | a);
    submasks(union).all(|u| {
        let lhs: i128 = collection.iter().map(|a| nu.scaled(u & a)).sum();
        le_scaled(lhs, k, nu.scaled(u))
    })
}

/// Checks the extension condition at parameter `K`.
///
/// For every summation-bounded disjoint collection and every nonempty set
/// disjoint from the collection's parent set, the extended collection must
/// satisfy the same bound.  Collections are enumerated exhaustively for
/// `n ≤ 8` and sampled from the seed beyond.
pub fn canopy_check(
    space: &FiniteSpace,
    nu: &MeasureTable,
    spec: &CoveringSpec,
    k: &Rational,
    options: &EngineOptions,
) -> Result<ConditionVerdict> {
    let n = space.len();
    let full = full_mask(n);
    let exhaustive = n <= 8;
    let mut samples = 0u64;
    let mut failure: Option<Witness> = None;
    let mut spec_error: Option<Error> = None;
    let mut sums = vec![0i128; 1 << n];
    let handle = |collection: &[SubsetMask],
                      sums: &mut Vec<i128>,
                      samples: &mut u64,
                      failure: &mut Option<Witness>,
                      spec_error: &mut Option<Error>|
     -> bool {
        if !collection_bounded(nu, collection, k) {
            return true; // hypothesis fails; nothing to check
        }
        let union = collection.iter().fold(0, |acc, a| acc | a);
        let parent = match spec.parent(union) {
            Ok(p) => p,
            Err(e) => {
                *spec_error = Some(e);
                return false;
            }
        };
        for u in submasks(union) {
            sums[u as usize] = collection.iter().map(|a| nu.scaled(u & a)).sum();
        }
        for d in submasks(full & !parent) {
            if d == 0 {
                continue;
            }
            *samples += 1;
            if let Some(u) = extension_violation(nu, sums, union, d, k) {
                *failure = Some(Witness::Extension {
                    collection: collection.to_vec(),
                    d,
                    u,
                });
                return false;
            }
        }
        true
    };
    if exhaustive {
        for_each_disjoint_collection(full, &mut |collection| {
            handle(collection, &mut sums, &mut samples, &mut failure, &mut spec_error)
        });
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.budget {
            let collection = random_disjoint_collection(&mut rng, n);
            if !handle(&collection, &mut sums, &mut samples, &mut failure, &mut spec_error) {
                break;
            }
        }
    }
    if let Some(e) = spec_error {
        return Err(e);
    }
    Ok(match failure {
        Some(w) => ConditionVerdict::fail(w, exhaustive, samples),
        None => ConditionVerdict::pass(exhaustive, samples),
    })
}

/// Greedy maximal pairwise-disjoint subcollection: scan by descending size,
/// ascending mask, keeping whatever stays disjoint.  Every member of the
/// input meets the result's union (otherwise it would have been kept).
fn greedy_maximal_disjoint(collection: &[SubsetMask]) -> Vec<SubsetMask> {
    let mut sorted: Vec<SubsetMask> = collection.to_vec();
    sorted.sort_unstable_by(|a, b| b.count_ones().cmp(&a.count_ones()).then(a.cmp(b)));
    sorted.dedup();
    let mut taken: Vec<SubsetMask> = Vec::new();
    let mut union: SubsetMask = 0;
    for m in sorted {
        if m != 0 && m & union == 0 {
            taken.push(m);
            union |= m;
        }
    }
    taken
}

/// Tests one pruning candidate: it must satisfy the summation bound, and no
/// set disjoint from its union may change parents when the collection is
/// removed from the assignment.  Returns `Some(None)` when the candidate
/// breaks the bound, `Some(Some(f))` with the rebutting outside set, and
/// `None` when the candidate is valid.
pub fn pruning_rebuttal(
    space: &FiniteSpace,
    nu: &MeasureTable,
    spec: &CoveringSpec,
    collection: &[SubsetMask],
    candidate: &[SubsetMask],
    k: &Rational,
) -> Result<Option<Option<SubsetMask>>> {
    if !collection_bounded(nu, candidate, k) {
        // Candidate unusable; signalled as a rebuttal without a set.
        return Ok(Some(None));
    }
    let union = candidate.iter().fold(0, |acc, a| acc | a);
    for f in submasks(space.full() & !union) {
        let members = spec.assign(f)?;
        let full_parent = members.iter().fold(0, |acc, m| acc | m);
        let pruned_parent = members
            .iter()
            .filter(|m| !collection.contains(m))
            .fold(0, |acc, m| acc | m);
        if pruned_parent != full_parent {
            return Ok(Some(Some(f)));
        }
    }
    Ok(None)
}

/// Finds a valid pruning subcollection for one collection, or `None`.
///
/// Tries the greedy maximal disjoint subcollection first, then every
/// disjoint subcollection.
pub fn crop_select(
    space: &FiniteSpace,
    nu: &MeasureTable,
    spec: &CoveringSpec,
    collection: &[SubsetMask],
    k: &Rational,
) -> Result<Option<Vec<SubsetMask>>> {
    let greedy = greedy_maximal_disjoint(collection);
    if pruning_rebuttal(space, nu, spec, collection, &greedy, k)?.is_none() {
        return Ok(Some(greedy));
    }
    // Exhaustive fallback over disjoint subcollections (including empty).
    let mut members: Vec<SubsetMask> = collection.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.len() > 20 {
        return Err(Error::Unsupported(
            "pruning search over more than 2^20 subcollections".into(),
        ));
    }
    for choice in 0u32..(1 << members.len()) {
        let candidate: Vec<SubsetMask> = members
            .iter()
            .enumerate()
            .filter(|(i, _)| choice >> i & 1 == 1)
            .map(|(_, m)| *m)
            .collect();
        if check_disjoint(&candidate).is_err() {
            continue;
        }
        if pruning_rebuttal(space, nu, spec, collection, &candidate, k)?.is_none() {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Checks the pruning condition at parameter `K`.
///
/// For every subcollection of the family there must exist a
/// summation-bounded disjoint subcollection whose removal from the
/// assignment leaves the parent of every outside set unchanged.
/// Subcollections are enumerated exhaustively when `2^|family|` fits the
/// budget; otherwise seeded random subcollections are drawn (always the case
/// for the identity rule, whose family is all nonempty subsets).
pub fn crop_check(
    space: &FiniteSpace,
    nu: &MeasureTable,
    spec: &CoveringSpec,
    k: &Rational,
    options: &EngineOptions,
) -> Result<ConditionVerdict> {
    let family: Vec<SubsetMask> = match spec.rule {
        AssignRule::Identity => submasks(space.full()).filter(|m| *m != 0).collect(),
        _ => spec.family.clone(),
    };
    let exhaustive =
        family.len() < 63 && (1u64 << family.len().min(62)) <= options.budget.max(1);
    let mut samples = 0u64;
    let mut check_one = |collection: &[SubsetMask]| -> Result<Option<Witness>> {
        samples += 1;
        if crop_select(space, nu, spec, collection, k)?.is_some() {
            return Ok(None);
        }
        let greedy = greedy_maximal_disjoint(collection);
        let f = pruning_rebuttal(space, nu, spec, collection, &greedy, k)?.flatten();
        Ok(Some(Witness::Pruning {
            collection: collection.to_vec(),
            f,
        }))
    };
    if exhaustive {
        for choice in 0u64..(1 << family.len()) {
            let collection: Vec<SubsetMask> = family
                .iter()
                .enumerate()
                .filter(|(i, _)| choice >> i & 1 == 1)
                .map(|(_, m)| *m)
                .collect();
            if let Some(w) = check_one(&collection)? {
                return Ok(ConditionVerdict::fail(w, true, samples));
            }
        }
        Ok(ConditionVerdict::pass(true, samples))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.budget {
            let collection: Vec<SubsetMask> = family
                .iter()
                .filter(|_| rng.gen_bool(0.5_f64.min(8.0 / family.len() as f64)))
                .copied()
                .collect();
            if let Some(w) = check_one(&collection)? {
                return Ok(ConditionVerdict::fail(w, false, samples));
            }
        }
        Ok(ConditionVerdict::pass(false, samples))
    }
}

/// Replays an extension witness against the definition; `true` means the
/// witness genuinely violates the bound.
pub fn replay_extension_witness(
    nu: &MeasureTable,
    witness: &Witness,
    k: &Rational,
) -> bool {
    let Witness::Extension { collection, d, u } = witness else {
        return false;
    };
    let mut extended = collection.clone();
    extended.push(*d);
    if check_disjoint(&extended).is_err() {
        return false;
    }
    let union = extended.iter().fold(0, |acc, a| acc | a);
    let lhs: i128 = extended.iter().map(|a| nu.scaled(u & a)).sum();
    !le_scaled(lhs, k, nu.scaled(u & union))
}

/// One-shot summation-bound check re-exported at condition level.
pub fn caratheodory_verdict(
    nu: &MeasureTable,
    collection: &[SubsetMask],
    k: &Rational,
    options: &EngineOptions,
) -> Result<crate::space::CaratheodoryVerdict> {
    caratheodory_check(nu, collection, k, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_measure_table, Generator, MeasureKind};

    fn rat(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    /// m points, counting weights; middle generators are singletons of
    /// weight one (an additive measure).
    fn additive_space(m: usize) -> FiniteSpace {
        FiniteSpace::new(
            vec![rat(1, 1); m],
            vec![Generator::new(full_mask(m), rat(1, 1))],
            (0..m).map(|i| Generator::new(1 << i, rat(1, 1))).collect(),
        )
        .unwrap()
    }

    /// m points; middle measure gives every nonempty set mass one.
    fn trivial_middle_space(m: usize) -> FiniteSpace {
        FiniteSpace::new(
            vec![rat(1, 1); m],
            (0..m).map(|i| Generator::new(1 << i, rat(1, 1))).collect(),
            vec![Generator::new(full_mask(m), rat(1, 1))],
        )
        .unwrap()
    }

    #[test]
    fn identity_spec_is_a_covering_function_with_unit_cost() {
        let space = additive_space(4);
        let mu = build_measure_table(&space, MeasureKind::Mu, 12).unwrap();
        let verdict =
            parent_function_check(&space, &mu, &CoveringSpec::identity(), &EngineOptions::default())
                .unwrap();
        assert!(verdict.holds && verdict.checked_exhaustively);
    }

    #[test]
    fn partition_cover_needs_cost_two_on_pair_slabs() {
        // μ additive counting; slabs {0,1} and {2,3}: a singleton's parent
        // has measure 2.
        let space = FiniteSpace::new(
            vec![rat(1, 1); 4],
            (0..4).map(|i| Generator::new(1 << i, rat(1, 1))).collect(),
            vec![Generator::new(0b1111, rat(1, 1))],
        )
        .unwrap();
        let mu = build_measure_table(&space, MeasureKind::Mu, 12).unwrap();
        let slabs = vec![0b0011, 0b1100];
        let good =
            CoveringSpec::partition(&space, slabs.clone(), rat(2, 1)).unwrap();
        let verdict =
            parent_function_check(&space, &mu, &good, &EngineOptions::default()).unwrap();
        assert!(verdict.holds);
        let tight = CoveringSpec::partition(&space, slabs, rat(3, 2)).unwrap();
        let verdict =
            parent_function_check(&space, &mu, &tight, &EngineOptions::default()).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(
            verdict.witness,
            Some(Witness::Parent { extension: None, .. })
        ));
    }

    #[test]
    fn oversized_explicit_cover_fails_with_its_set_as_witness() {
        // μ is additive counting here (singleton outer generators).
        let space = trivial_middle_space(2);
        let mu = build_measure_table(&space, MeasureKind::Mu, 12).unwrap();
        // Family {a}, {b}, {ab}; send {a} to {ab} with Φ = 1: cost violated.
        let family = vec![0b01, 0b10, 0b11];
        let mut table = BTreeMap::new();
        table.insert(0b00, vec![]);
        table.insert(0b01, vec![2]);
        table.insert(0b10, vec![1]);
        table.insert(0b11, vec![2]);
        let spec = CoveringSpec::explicit(family, table, rat(1, 1)).unwrap();
        let verdict =
            parent_function_check(&space, &mu, &spec, &EngineOptions::default()).unwrap();
        assert!(!verdict.holds);
        assert_eq!(
            verdict.witness,
            Some(Witness::Parent { a: 0b01, extension: None })
        );
    }

    #[test]
    fn additive_middle_measure_passes_extension_at_parameter_one() {
        let space = additive_space(4);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let verdict = canopy_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &rat(1, 1),
            &EngineOptions::default(),
        )
        .unwrap();
        assert!(verdict.holds && verdict.checked_exhaustively, "{verdict:?}");
    }

    #[test]
    fn trivial_middle_measure_fails_extension_at_parameter_one() {
        // Every nonempty set has middle measure one, so two singletons sum
        // to 2 > 1 on the full test set.
        let space = trivial_middle_space(2);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let k = rat(1, 1);
        let verdict = canopy_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &k,
            &EngineOptions::default(),
        )
        .unwrap();
        assert!(!verdict.holds);
        let w = verdict.witness.unwrap();
        assert!(replay_extension_witness(&nu, &w, &k), "witness must replay");
        // At parameter 2 the same space passes (at most two disjoint pieces).
        let verdict = canopy_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &rat(2, 1),
            &EngineOptions::default(),
        )
        .unwrap();
        assert!(verdict.holds);
    }

    #[test]
    fn summation_check_confirms_exact_constant_boundary() {
        let space = trivial_middle_space(4);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let singletons: Vec<SubsetMask> = (0..4).map(|i| 1 << i).collect();
        let opts = EngineOptions::default();
        let at4 = caratheodory_check(&nu, &singletons, &rat(4, 1), &opts).unwrap();
        assert!(at4.holds);
        let at3 = caratheodory_check(&nu, &singletons, &rat(3, 1), &opts).unwrap();
        assert!(!at3.holds);
        assert_eq!(at3.witness, Some(0b1111), "the full set breaks 3");
    }

    #[test]
    fn identity_spec_passes_pruning_for_additive_measures() {
        let space = additive_space(3);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let mut opts = EngineOptions::default();
        opts.budget = 200;
        let verdict = canopy_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &rat(1, 1),
            &opts,
        )
        .unwrap();
        assert!(verdict.holds);
        let verdict = crop_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &rat(1, 1),
            &opts,
        )
        .unwrap();
        // Seven nonempty subsets, 128 subcollections: within budget 200.
        assert!(verdict.holds, "{verdict:?}");
        assert!(verdict.checked_exhaustively);
        // With a smaller budget the family is sampled instead.
        opts.budget = 50;
        let verdict = crop_check(
            &space,
            &nu,
            &CoveringSpec::identity(),
            &rat(1, 1),
            &opts,
        )
        .unwrap();
        assert!(verdict.holds && !verdict.checked_exhaustively);
    }

    #[test]
    fn retained_family_member_in_outside_assignments_fails_pruning() {
        // Three points; the cover of {c} detours through {a,b}, so pruning
        // {{a,b}} changes the parent of {c}.
        let space = additive_space(3);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let family = vec![0b001, 0b010, 0b100, 0b011];
        let mut table = BTreeMap::new();
        table.insert(0b000, vec![]);
        table.insert(0b001, vec![3]);
        table.insert(0b010, vec![3]);
        table.insert(0b011, vec![3]);
        table.insert(0b100, vec![3, 2]);
        table.insert(0b101, vec![3, 2]);
        table.insert(0b110, vec![3, 2]);
        table.insert(0b111, vec![3, 2]);
        let spec = CoveringSpec::explicit(family, table, rat(3, 1)).unwrap();
        let mu = build_measure_table(&space, MeasureKind::Mu, 12).unwrap();
        let parent_ok =
            parent_function_check(&space, &mu, &spec, &EngineOptions::default()).unwrap();
        assert!(parent_ok.holds, "{parent_ok:?}");
        let verdict = crop_check(
            &space,
            &nu,
            &spec,
            &rat(1, 1),
            &EngineOptions::default(),
        )
        .unwrap();
        assert!(!verdict.holds);
        let Some(Witness::Pruning { collection, f }) = verdict.witness else {
            panic!("expected a pruning witness");
        };
        assert_eq!(collection, vec![0b011]);
        assert_eq!(f, Some(0b100), "the third point's parent changes");
    }

    #[test]
    fn pruning_selection_prefers_the_greedy_maximal_subcollection() {
        let space = additive_space(4);
        let nu = build_measure_table(&space, MeasureKind::Nu, 12).unwrap();
        let spec = CoveringSpec::identity();
        let collection = vec![0b0011, 0b0001, 0b0100];
        let chosen = crop_select(&space, &nu, &spec, &collection, &rat(1, 1))
            .unwrap()
            .unwrap();
        assert_eq!(chosen, vec![0b0011, 0b0100], "larger members first");
    }
}
