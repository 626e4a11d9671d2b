//! Finite ground sets and outer measures induced by generator pre-measures.
//!
//! Subsets are bitmasks over point indices.  Measure values are exact: every
//! space fixes one common denominator for all of its weights, and measure
//! tables store integer numerators over that denominator, so comparisons and
//! additions inside enumeration loops are plain `i128` arithmetic.

use num_integer::Integer;
use num_traits::Signed;

use crate::{Error, Result};

/// Exact rational number used for weights, pre-measures, and measure values.
pub type Rational = num_rational::Ratio<i128>;

/// A subset of the ground set, one bit per point.
pub type SubsetMask = u32;

/// Hard cap on the number of points of a [`FiniteSpace`].
pub const MAX_POINTS: usize = 24;

/// Mask containing the `n` points of a ground set of size `n`.
pub fn full_mask(n: usize) -> SubsetMask {
    debug_assert!(n <= 32);
    if n == 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Whether `inner` is a subset of `outer`.
pub fn is_subset(inner: SubsetMask, outer: SubsetMask) -> bool {
    inner & !outer == 0
}

/// Iterator over the point indices of a mask, ascending.
pub fn mask_points(mask: SubsetMask) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

/// Iterator over all submasks of `of`, descending from `of` to the empty set.
pub struct Submasks {
    of: SubsetMask,
    next: Option<SubsetMask>,
}

/// All submasks of the given mask, including itself and the empty set.
pub fn submasks(of: SubsetMask) -> Submasks {
    Submasks { of, next: Some(of) }
}

impl Iterator for Submasks {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.of)
        };
        Some(cur)
    }
}

/// One generating set together with its strictly positive pre-measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    /// The generating subset.
    pub set: SubsetMask,
    /// Its pre-measure.
    pub weight: Rational,
}

impl Generator {
    /// Convenience constructor.
    pub fn new(set: SubsetMask, weight: Rational) -> Self {
        Generator { set, weight }
    }
}

/// Which of the two outer measures a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// The outermost measure (exponent `p` level).
    Mu,
    /// The middle measure (exponent `q` level).
    Nu,
}

impl MeasureKind {
    /// Lowercase name used in error messages and serialized output.
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Mu => "mu",
            MeasureKind::Nu => "nu",
        }
    }
}

/// A finite ground set with a point weight `ω` and two generator families.
///
/// All weights are strictly positive rationals.  Construction computes one
/// common denominator (the lcm of every weight denominator) and rescales all
/// weights to integer numerators over it; magnitude bounds are enforced so all
/// later sums stay far away from `i128` overflow.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    n: usize,
    omega: Vec<Rational>,
    mu_gens: Vec<Generator>,
    nu_gens: Vec<Generator>,
    denom: i128,
    omega_scaled: Vec<i128>,
    mu_scaled: Vec<i128>,
    nu_scaled: Vec<i128>,
}

/// Keeps per-generator scaled weights below this bound so that sums over
/// thousands of generators stay within `i128`.
const MAX_SCALED_WEIGHT: i128 = 1 << 80;
/// Cap on the common denominator.
const MAX_DENOM: i128 = 1 << 62;

fn check_weight(w: &Rational) -> Result<()> {
    if !w.is_positive() {
        return Err(Error::NonpositiveWeight);
    }
    Ok(())
}

impl FiniteSpace {
    /// Builds a space from point weights and the two generator families.
    ///
    /// Every point must carry a strictly positive weight and be covered by at
    /// least one generator of each family; generator sets must be nonempty
    /// subsets of the ground set with strictly positive pre-measures.
    pub fn new(
        omega: Vec<Rational>,
        mu_gens: Vec<Generator>,
        nu_gens: Vec<Generator>,
    ) -> Result<Self> {
        let n = omega.len();
        if n == 0 || n > MAX_POINTS {
            return Err(Error::TooManyPoints {
                got: n,
                max: MAX_POINTS,
            });
        }
        let full = full_mask(n);
        let mut denom: i128 = 1;
        for w in &omega {
            check_weight(w)?;
            denom = denom.lcm(w.denom());
        }
        for (family, gens) in [("mu", &mu_gens), ("nu", &nu_gens)] {
            let mut covered: SubsetMask = 0;
            for g in gens {
                check_weight(&g.weight)?;
                if g.set == 0 || !is_subset(g.set, full) {
                    return Err(Error::BadGenerator);
                }
                denom = denom.lcm(g.weight.denom());
                covered |= g.set;
            }
            if covered != full {
                let point = mask_points(full & !covered).next().unwrap_or(0);
                return Err(Error::UncoveredPoint { family, point });
            }
            if denom > MAX_DENOM {
                return Err(Error::WeightOutOfRange);
            }
        }
        let scale = |w: &Rational| -> Result<i128> {
            let v = w.numer().checked_mul(denom / w.denom()).ok_or(Error::WeightOutOfRange)?;
            if v <= 0 || v > MAX_SCALED_WEIGHT {
                return Err(Error::WeightOutOfRange);
            }
            Ok(v)
        };
        let omega_scaled = omega.iter().map(&scale).collect::<Result<Vec<_>>>()?;
        let mu_scaled = mu_gens.iter().map(|g| scale(&g.weight)).collect::<Result<Vec<_>>>()?;
        let nu_scaled = nu_gens.iter().map(|g| scale(&g.weight)).collect::<Result<Vec<_>>>()?;
        Ok(FiniteSpace {
            n,
            omega,
            mu_gens,
            nu_gens,
            denom,
            omega_scaled,
            mu_scaled,
            nu_scaled,
        })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Whether the ground set is empty (never true for a constructed space).
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Mask containing every point.
    pub fn full(&self) -> SubsetMask {
        full_mask(self.n)
    }

    /// Point weights.
    pub fn omega(&self) -> &[Rational] {
        &self.omega
    }

    /// Weight of one point as `f64`.
    pub fn omega_f64(&self, point: usize) -> f64 {
        self.omega_scaled[point] as f64 / self.denom as f64
    }

    /// Common denominator of all weights of this space.
    pub fn denom(&self) -> i128 {
        self.denom
    }

    /// ω of a subset, exactly.
    pub fn omega_of(&self, mask: SubsetMask) -> Rational {
        let total: i128 = mask_points(mask).map(|i| self.omega_scaled[i]).sum();
        Rational::new(total, self.denom)
    }

    /// Generators of the requested family.
    pub fn generators(&self, kind: MeasureKind) -> &[Generator] {
        match kind {
            MeasureKind::Mu => &self.mu_gens,
            MeasureKind::Nu => &self.nu_gens,
        }
    }

    fn scaled_weights(&self, kind: MeasureKind) -> &[i128] {
        match kind {
            MeasureKind::Mu => &self.mu_scaled,
            MeasureKind::Nu => &self.nu_scaled,
        }
    }

    /// Validates a function vector against this space.
    pub fn check_function(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::FunctionLength {
                got: f.len(),
                expected: self.n,
            });
        }
        if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::BadFunctionValue);
        }
        Ok(())
    }
}

/// Outer measure values of one family on every subset of the ground set.
///
/// Entry `A` is the minimal total pre-measure over covers of `A` by
/// generators, stored as an integer numerator over the space's common
/// denominator.  The empty set has measure zero.
#[derive(Debug, Clone)]
pub struct MeasureTable {
    /// Which family generated this table.
    pub kind: MeasureKind,
    denom: i128,
    values: Vec<i128>,
}

impl MeasureTable {
    /// Measure of a subset, exactly.
    pub fn value(&self, mask: SubsetMask) -> Rational {
        Rational::new(self.values[mask as usize], self.denom)
    }

    /// Scaled numerator of the measure of a subset (over [`MeasureTable::denom`]).
    pub fn scaled(&self, mask: SubsetMask) -> i128 {
        self.values[mask as usize]
    }

    /// Common denominator shared with the space.
    pub fn denom(&self) -> i128 {
        self.denom
    }

    /// Measure of a subset as `f64`.
    pub fn value_f64(&self, mask: SubsetMask) -> f64 {
        self.values[mask as usize] as f64 / self.denom as f64
    }

    /// Number of subsets covered by the table.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Whether the table is empty (never true for a built table).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Builds the full table of outer measure values for one family.
///
/// Uses the subset recursion `value[A] = min over generators S meeting A of
/// σ(S) + value[A \ S]`, which computes the minimal cover cost because any
/// optimal cover contains a generator meeting `A`, and removing it leaves an
/// optimal cover of the remainder.  Ties between covers do not affect values.
///
/// Fails with [`Error::ExactLimitExceeded`] when the ground set is larger than
/// `exact_limit` (the table has `2^n` entries).
pub fn build_measure_table(
    space: &FiniteSpace,
    kind: MeasureKind,
    exact_limit: usize,
) -> Result<MeasureTable> {
    if space.n > exact_limit || space.n > MAX_POINTS {
        return Err(Error::ExactLimitExceeded {
            points: space.n,
            limit: exact_limit.min(MAX_POINTS),
        });
    }
    let gens = space.generators(kind);
    let weights = space.scaled_weights(kind);
    let size = 1usize << space.n;
    let mut values = vec![0i128; size];
    for a in 1..size {
        let mask = a as SubsetMask;
        let mut best = i128::MAX;
        for (g, w) in gens.iter().zip(weights) {
            if g.set & mask != 0 {
                let rest = values[(mask & !g.set) as usize];
                let cand = w + rest;
                if cand < best {
                    best = cand;
                }
            }
        }
        values[a] = best;
    }
    Ok(MeasureTable {
        kind,
        denom: space.denom,
        values,
    })
}

/// Looks up one outer measure value from a built table.
pub fn outer_measure(table: &MeasureTable, mask: SubsetMask) -> Rational {
    table.value(mask)
}

/// Exact Carathéodory constant of a pairwise disjoint collection.
///
/// Returns the maximum over test sets `U` meeting the union of
/// `Σ_A ν(U ∩ A) / ν(U ∩ ∪A)`; the constant is `1` for the empty collection.
/// The collection members must be pairwise disjoint.
pub fn caratheodory_constant(
    table: &MeasureTable,
    collection: &[SubsetMask],
) -> Result<Rational> {
    check_disjoint(collection)?;
    let union: SubsetMask = collection.iter().fold(0, |acc, a| acc | a);
    if union == 0 {
        return Ok(Rational::from_integer(1));
    }
    // Only the part of U inside the union matters: replacing U by U ∩ ∪A
    // leaves every term unchanged.  Enumerate subsets of the union.
    let mut best = Rational::from_integer(1);
    for u in submasks(union) {
        if u == 0 {
            continue;
        }
        let total: i128 = collection.iter().map(|a| table.scaled(u & a)).sum();
        let denom_val = table.scaled(u);
        // Compare total/denom_val with best, exactly.
        let cand = Rational::new(total, denom_val);
        if cand > best {
            best = cand;
        }
    }
    Ok(best)
}

/// Outcome of testing a disjoint collection against a summation parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaratheodoryVerdict {
    /// Whether every test set satisfied the summation inequality.
    pub holds: bool,
    /// A violating test set when the check fails.
    pub witness: Option<SubsetMask>,
    /// Whether all test sets were enumerated (vs. a random sample).
    pub checked_exhaustively: bool,
}

/// Checks `Σ_A ν(U∩A) ≤ K·ν(U∩∪A)` for every test set `U`.
///
/// Test sets are enumerated exhaustively inside the collection's union when
/// its size is within `options.exact_limit`; otherwise `options.budget`
/// random test sets are drawn from the seed.  Test sets outside the union
/// never add information because both sides only see `U ∩ ∪A`.
pub fn caratheodory_check(
    table: &MeasureTable,
    collection: &[SubsetMask],
    k: &Rational,
    options: &crate::EngineOptions,
) -> Result<CaratheodoryVerdict> {
    check_disjoint(collection)?;
    let union: SubsetMask = collection.iter().fold(0, |acc, a| acc | a);
    let violates = |u: SubsetMask| -> bool {
        let total: i128 = collection.iter().map(|a| table.scaled(u & a)).sum();
        let single = table.scaled(u & union);
        // total ≤ K·single, cross-multiplied exactly.
        total
            .checked_mul(*k.denom())
            .zip(k.numer().checked_mul(single))
            .map(|(lhs, rhs)| lhs > rhs)
            .expect("measure magnitudes validated at construction")
    };
    if (union.count_ones() as usize) <= options.exact_limit {
        for u in submasks(union) {
            if violates(u) {
                return Ok(CaratheodoryVerdict {
                    holds: false,
                    witness: Some(u),
                    checked_exhaustively: true,
                });
            }
        }
        return Ok(CaratheodoryVerdict {
            holds: true,
            witness: None,
            checked_exhaustively: true,
        });
    }
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(options.seed);
    for _ in 0..options.budget {
        let u = (rng.gen::<u32>()) & union;
        if violates(u) {
            return Ok(CaratheodoryVerdict {
                holds: false,
                witness: Some(u),
                checked_exhaustively: false,
            });
        }
    }
    Ok(CaratheodoryVerdict {
        holds: true,
        witness: None,
        checked_exhaustively: false,
    })
}

/// Validates pairwise disjointness of a collection of masks.
pub fn check_disjoint(collection: &[SubsetMask]) -> Result<()> {
    let mut seen: SubsetMask = 0;
    for a in collection {
        if seen & a != 0 {
            return Err(Error::NotDisjoint);
        }
        seen |= a;
    }
    Ok(())
}
