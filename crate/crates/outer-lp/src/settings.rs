//! Ready-made example settings.
//!
//! Four constructors cover the recurring shapes of the test corpus:
//!
//! * [`make_three_measures`] — a ground set whose three layers are all genuine
//!   measures (singleton generators with random positive rational weights),
//!   carrying the identity covering.  Every disjoint collection is
//!   ν-Carathéodory with constant one here, so the canopy and crop conditions
//!   hold with `Φ = K = 1`.
//! * [`make_cartesian`] — a product of three weighted axes where `μ` is
//!   generated by full slabs over the third coordinate and `ν` by full columns
//!   over the last two.  Both outer measures collapse to projection sums,
//!   recorded as closed-form oracles; the slab partition is the covering.
//! * [`make_counterexample_first`] — counting `ω = μ` with the trivial outer
//!   measure `ν ≡ 1` on nonempty sets.  Single and double iterated norms of
//!   the all-ones function have closed forms, and the double norm grows like
//!   `m^{1/p − 1/q + 1/r}`, which separates it from any bound uniform in the
//!   ground-set size once that exponent exceeds one.
//! * [`make_counterexample_second`] — the same trivial `ν`, with `μ` generated
//!   by geometrically growing singleton weights `2^{β(i−1)}`, `β = 2/r`.  For
//!   `r ∈ (0, 1]` the double norm stays of order `m` while the single norm is
//!   `m^{1/r}`, so the collapsing constant between them blows up as `m` grows.

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::CoveringSpec;
use crate::norms::{check_exponent, StepProfile};
use crate::space::Generator;
use crate::{Error, FiniteSpace, Rational, Result, SubsetMask};

/// A small random weight with denominator at most four.
///
/// Numerators stay below seven so products of three axis weights and the lcm
/// of all denominators remain far inside the exact range.
fn random_weight(rng: &mut ChaCha8Rng) -> Rational {
    let numer = rng.gen_range(1..=6i128);
    let denom = [1i128, 2, 3, 4][rng.gen_range(0..4usize)];
    Rational::new(numer, denom)
}

/// A ground set on which all three layers are measures.
#[derive(Debug, Clone)]
pub struct ThreeMeasureSetting {
    /// The space: random positive singleton weights for `ω`, `μ`, and `ν`.
    pub space: FiniteSpace,
    /// The identity covering, valid here with `Φ = K = 1`.
    pub covering: CoveringSpec,
}

/// Builds a ground set where `μ` and `ν` are singleton-generated measures.
///
/// All weights are random positive rationals drawn from the seeded generator.
/// Because `ν` is additive, every pairwise disjoint collection satisfies the
/// ν-Carathéodory bound with constant one, and the identity covering meets
/// the canopy and crop conditions with `Φ = K = 1`.
pub fn make_three_measures(n: usize, seed: u64) -> Result<ThreeMeasureSetting> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Vec<Rational> = (0..n).map(|_| random_weight(&mut rng)).collect();
    let singletons = |rng: &mut ChaCha8Rng| -> Vec<Generator> {
        (0..n)
            .map(|i| Generator::new(1 << i, random_weight(rng)))
            .collect()
    };
    let mu_gens = singletons(&mut rng);
    let nu_gens = singletons(&mut rng);
    let space = FiniteSpace::new(omega, mu_gens, nu_gens)?;
    Ok(ThreeMeasureSetting {
        space,
        covering: CoveringSpec::identity(),
    })
}

/// A product of three weighted axes with slab and column generators.
#[derive(Debug, Clone)]
pub struct CartesianSetting {
    /// Axis cardinalities `(|X₁|, |X₂|, |X₃|)`.
    pub sizes: [usize; 3],
    /// Strictly positive axis weights.
    pub weights: [Vec<Rational>; 3],
    /// The product space: `ω` is the product weight, `μ` is generated by the
    /// slabs `X₁×X₂×{z}` with pre-measure `ω₃(z)`, and `ν` by the columns
    /// `X₁×{y}×{z}` with pre-measure `ω₂(y)·ω₃(z)`.
    pub space: FiniteSpace,
    /// The slab partition covering with `Φ = 1` (valid with `K = 1`).
    pub covering: CoveringSpec,
}

impl CartesianSetting {
    /// Linear index of the point `(x, y, z)`.
    pub fn point_index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.sizes[0] * (y + self.sizes[1] * z)
    }

    /// Mask of the full slab `X₁×X₂×{z}`.
    pub fn slab_mask(&self, z: usize) -> SubsetMask {
        let mut mask = 0;
        for y in 0..self.sizes[1] {
            for x in 0..self.sizes[0] {
                mask |= 1 << self.point_index(x, y, z);
            }
        }
        mask
    }

    /// Mask of the full column `X₁×{y}×{z}`.
    pub fn column_mask(&self, y: usize, z: usize) -> SubsetMask {
        let mut mask = 0;
        for x in 0..self.sizes[0] {
            mask |= 1 << self.point_index(x, y, z);
        }
        mask
    }

    /// Closed-form value of `μ`: the slabs hit by `A` are forced into any
    /// cover and already cover `A`, so `μ(A) = Σ_{z ∈ π₃(A)} ω₃(z)`.
    pub fn mu_oracle(&self, a: SubsetMask) -> Rational {
        let mut total = Rational::from_integer(0);
        for z in 0..self.sizes[2] {
            if self.slab_mask(z) & a != 0 {
                total += self.weights[2][z].clone();
            }
        }
        total
    }

    /// Closed-form value of `ν`: by the same forcing argument over columns,
    /// `ν(A) = Σ_{(y,z) ∈ π₂₃(A)} ω₂(y)·ω₃(z)`.
    pub fn nu_oracle(&self, a: SubsetMask) -> Rational {
        let mut total = Rational::from_integer(0);
        for z in 0..self.sizes[2] {
            for y in 0..self.sizes[1] {
                if self.column_mask(y, z) & a != 0 {
                    total += self.weights[1][y].clone() * self.weights[2][z].clone();
                }
            }
        }
        total
    }
}

/// Builds the product of three weighted axes.
///
/// When `weights` is `None`, random positive rationals are drawn from the
/// seeded generator; otherwise the given per-axis weights are used and the
/// seed is ignored.  The slab partition over the third coordinate is attached
/// as the covering; it costs `Φ = 1` because the slabs hit by a set are
/// exactly its minimal cover.
pub fn make_cartesian(
    sizes: [usize; 3],
    weights: Option<[Vec<Rational>; 3]>,
    seed: u64,
) -> Result<CartesianSetting> {
    if sizes.iter().any(|s| *s == 0) {
        return Err(Error::InvalidInput("axis sizes must be positive".into()));
    }
    let weights = match weights {
        Some(w) => {
            if w.iter().zip(sizes).any(|(axis, s)| axis.len() != s) {
                return Err(Error::InvalidInput(
                    "per-axis weight lists must match the axis sizes".into(),
                ));
            }
            w
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sizes.map(|s| (0..s).map(|_| random_weight(&mut rng)).collect())
        }
    };
    let n = sizes[0] * sizes[1] * sizes[2];
    let index = |x: usize, y: usize, z: usize| x + sizes[0] * (y + sizes[1] * z);
    let mut omega = vec![Rational::from_integer(0); n];
    for z in 0..sizes[2] {
        for y in 0..sizes[1] {
            for x in 0..sizes[0] {
                omega[index(x, y, z)] =
                    weights[0][x].clone() * weights[1][y].clone() * weights[2][z].clone();
            }
        }
    }
    let mut mu_gens = Vec::with_capacity(sizes[2]);
    let mut slabs = Vec::with_capacity(sizes[2]);
    for z in 0..sizes[2] {
        let mut slab = 0;
        for y in 0..sizes[1] {
            for x in 0..sizes[0] {
                slab |= 1 << index(x, y, z);
            }
        }
        slabs.push(slab);
        mu_gens.push(Generator::new(slab, weights[2][z].clone()));
    }
    let mut nu_gens = Vec::with_capacity(sizes[1] * sizes[2]);
    for z in 0..sizes[2] {
        for y in 0..sizes[1] {
            let mut column = 0;
            for x in 0..sizes[0] {
                column |= 1 << index(x, y, z);
            }
            nu_gens.push(Generator::new(
                column,
                weights[1][y].clone() * weights[2][z].clone(),
            ));
        }
    }
    let space = FiniteSpace::new(omega, mu_gens, nu_gens)?;
    let covering = CoveringSpec::partition(&space, slabs, Rational::from_integer(1))?;
    Ok(CartesianSetting {
        sizes,
        weights,
        space,
        covering,
    })
}

/// Counting `ω = μ` with the trivial outer measure `ν ≡ 1`, and closed-form
/// norms of the all-ones function.
#[derive(Debug, Clone)]
pub struct FirstExtremalSetting {
    /// Ground-set size.
    pub m: usize,
    /// Counting point weights, unit singleton `μ` generators, and one unit
    /// full-set `ν` generator.
    pub space: FiniteSpace,
    /// The all-ones witness function.
    pub f: Vec<f64>,
    /// The identity covering (the singleton family realizes a ν-Carathéodory
    /// constant of `m`, which is what breaks uniformity here).
    pub covering: CoveringSpec,
}

impl FirstExtremalSetting {
    /// `‖1‖` under the single iterated norm with any outer exponent: the
    /// trivial `ν` makes every such norm collapse to the plain weighted
    /// `L^r` norm, which is `m^{1/r}` for the all-ones function.
    pub fn single_norm(&self, r: f64) -> Result<f64> {
        check_exponent(r)?;
        if r.is_infinite() {
            return Ok(1.0);
        }
        Ok((self.m as f64).powf(1.0 / r))
    }

    /// `‖1‖` under the double iterated norm with both outer exponents one.
    ///
    /// For `r ≥ 1` the composed size of any off-part restriction is one on
    /// every remaining singleton, so the super-level measure is `m` below
    /// level one and the norm equals `m`.
    pub fn collapsed_double_norm(&self, r: f64) -> Result<f64> {
        check_exponent(r)?;
        if r < 1.0 {
            return Err(Error::Unsupported(
                "the collapsed closed form needs r ≥ 1".into(),
            ));
        }
        Ok(self.m as f64)
    }

    /// Exact super-level profile of the composed size for `1 < r ≤ q < ∞`.
    ///
    /// Removing any `s` points leaves residual sup-size `(m−s)^α` with
    /// `α = 1/r − 1/q`, so the measure plateaus at `m−i+1` on
    /// `[(i−1)^α, i^α)` and the optimal removal sets are prefixes.
    pub fn profile(&self, q: f64, r: f64) -> Result<StepProfile> {
        check_profile_exponents(q, r)?;
        let alpha = 1.0 / r - 1.0 / q;
        let m = self.m;
        if alpha == 0.0 {
            return Ok(StepProfile {
                breakpoints: vec![1.0],
                values: vec![Rational::from_integer(m as i128), Rational::from_integer(0)],
                optimal: vec![(1 << m) - 1, 0],
            });
        }
        let breakpoints = (1..=m).map(|i| (i as f64).powf(alpha)).collect();
        let mut values: Vec<Rational> = (0..=m)
            .map(|k| Rational::from_integer((m - k) as i128))
            .collect();
        values[m] = Rational::from_integer(0);
        let optimal = (0..=m).map(|k| (1 << (m - k)) - 1).collect();
        Ok(StepProfile {
            breakpoints,
            values,
            optimal,
        })
    }

    /// Closed-form double norm for `1 < r ≤ q < ∞` and finite `p`.
    ///
    /// Integrating the plateau profile and summing by parts collapses the
    /// `p`-th power to `Σ_{i=1}^m i^{pα}`.
    pub fn double_norm(&self, p: f64, q: f64, r: f64) -> Result<f64> {
        check_profile_exponents(q, r)?;
        check_exponent(p)?;
        if p.is_infinite() {
            return Err(Error::Unsupported(
                "the closed form integrates a finite outer exponent".into(),
            ));
        }
        let alpha = 1.0 / r - 1.0 / q;
        let sum: f64 = (1..=self.m).map(|i| (i as f64).powf(p * alpha)).sum();
        Ok(sum.powf(1.0 / p))
    }

    /// The growth order `1/p − 1/q + 1/r` of the double norm in `m`.
    pub fn growth_exponent(p: f64, q: f64, r: f64) -> f64 {
        1.0 / p - 1.0 / q + 1.0 / r
    }

    /// A constant `c` with `‖1‖ ≥ c·m^{1/p − 1/q + 1/r}` for every `m`.
    ///
    /// Bounding the closed-form sum below by the integral of `t^{pα}` gives
    /// `c = (pα + 1)^{−1/p}`.
    pub fn growth_constant(p: f64, q: f64, r: f64) -> f64 {
        let alpha = 1.0 / r - 1.0 / q;
        (p * alpha + 1.0).powf(-1.0 / p)
    }
}

/// Validates the exponent window `1 < r ≤ q < ∞` of the plateau closed form.
fn check_profile_exponents(q: f64, r: f64) -> Result<()> {
    check_exponent(q)?;
    check_exponent(r)?;
    if !(1.0 < r && r <= q && q.is_finite()) {
        return Err(Error::Unsupported(
            "the plateau closed form needs 1 < r ≤ q < ∞".into(),
        ));
    }
    Ok(())
}

/// Trivial `ν` with geometric singleton `μ` weights, and closed-form norms of
/// the all-ones function.
#[derive(Debug, Clone)]
pub struct SecondExtremalSetting {
    /// Ground-set size.
    pub m: usize,
    /// The integer `β = 2/r` driving the geometric weights.
    pub beta: u32,
    /// Counting point weights, singleton `μ` generators of weight
    /// `2^{β(i−1)}`, and one unit full-set `ν` generator.
    pub space: FiniteSpace,
    /// The all-ones witness function.
    pub f: Vec<f64>,
    /// The identity covering (as in the first family, singletons realize a
    /// ν-Carathéodory constant of `m`).
    pub covering: CoveringSpec,
}

impl SecondExtremalSetting {
    /// `‖1‖` under the single iterated norm with outer exponent one:
    /// `m^{1/r} = m^{β/2}`.
    pub fn single_norm(&self) -> f64 {
        (self.m as f64).powf(f64::from(self.beta) / 2.0)
    }

    /// Exact super-level profile of the composed size at `q = 1`.
    ///
    /// The cheapest removal set at level `λ ∈ [2^{−βj}, 2^{−β(j−1)})` is the
    /// prefix of the `j` heaviest-exponent… lightest points, whose measure is
    /// the geometric partial sum `Σ_{i=1}^{j} 2^{β(i−1)}`.
    pub fn profile(&self) -> StepProfile {
        let m = self.m;
        let beta = self.beta;
        let partial = |j: usize| -> i128 { (0..j).map(|i| 1i128 << (beta as usize * i)).sum() };
        let breakpoints = (0..m)
            .map(|k| (-f64::from(beta) * ((m - 1 - k) as f64)).exp2())
            .collect();
        let mut values: Vec<Rational> = (0..=m)
            .map(|k| Rational::from_integer(partial(m - k)))
            .collect();
        values[m] = Rational::from_integer(0);
        let optimal = (0..=m).map(|k| (1 << (m - k)) - 1).collect();
        StepProfile {
            breakpoints,
            values,
            optimal,
        }
    }

    /// Exact double norm with all outer exponents one.
    ///
    /// Integrating the plateau profile telescopes to exactly `m`: the full
    /// bottom plateau contributes the tail `Σ 2^{−βk}` and each of the `m−1`
    /// upper plateaus contributes `1 − 2^{−βj}`, which add up to `m`.
    pub fn double_norm_exact(&self) -> Rational {
        Rational::from_integer(self.m as i128)
    }

    /// A constant `C ≥ 1` with `‖1‖ ≤ C·m`, from the geometric-series bound
    /// of the bottom plateau: `C = 2^β / (2^β − 1)`.
    pub fn upper_constant(&self) -> Rational {
        let pow = 1i128 << self.beta;
        Rational::new(pow, pow - 1)
    }
}

/// Builds the first extremal family on `m` points.
pub fn make_counterexample_first(m: usize) -> Result<FirstExtremalSetting> {
    if m == 0 {
        return Err(Error::InvalidInput("the family needs m ≥ 1".into()));
    }
    let one = Rational::from_integer(1);
    let omega = vec![one.clone(); m];
    let mu_gens = (0..m)
        .map(|i| Generator::new(1 << i, one.clone()))
        .collect();
    let nu_gens = vec![Generator::new((1 << m) - 1, one)];
    let space = FiniteSpace::new(omega, mu_gens, nu_gens)?;
    Ok(FirstExtremalSetting {
        m,
        space,
        f: vec![1.0; m],
        covering: CoveringSpec::identity(),
    })
}

/// Builds the second extremal family on `m` points for `r ∈ (0, 1]`.
///
/// The geometric weights `2^{β(i−1)}` stay exact only when `β = 2/r` is an
/// integer, so `r` is taken as an exact rational and rejected otherwise;
/// exponents above one are rejected because the collapse direction under test
/// needs `r ≤ 1`.
pub fn make_counterexample_second(m: usize, r: &Rational) -> Result<SecondExtremalSetting> {
    if m == 0 {
        return Err(Error::InvalidInput("the family needs m ≥ 1".into()));
    }
    if !r.is_positive() {
        return Err(Error::BadExponent);
    }
    if *r > Rational::from_integer(1) {
        return Err(Error::InvalidInput(
            "the geometric family needs r ∈ (0, 1]".into(),
        ));
    }
    let two_over_r = Rational::from_integer(2) / r.clone();
    if !two_over_r.is_integer() {
        return Err(Error::InvalidInput(
            "2/r must be an integer so the geometric weights stay exact".into(),
        ));
    }
    let beta_wide = two_over_r.to_integer();
    if beta_wide < 1 || beta_wide.saturating_mul((m as i128) - 1) > 72 {
        return Err(Error::InvalidInput(
            "geometric weights overflow the exact range for this m and r".into(),
        ));
    }
    let beta = beta_wide as u32;
    let one = Rational::from_integer(1);
    let omega = vec![one.clone(); m];
    let mu_gens = (0..m)
        .map(|i| Generator::new(1 << i, Rational::from_integer(1i128 << (beta as usize * i))))
        .collect();
    let nu_gens = vec![Generator::new((1 << m) - 1, one)];
    let space = FiniteSpace::new(omega, mu_gens, nu_gens)?;
    Ok(SecondExtremalSetting {
        m,
        beta,
        space,
        f: vec![1.0; m],
        covering: CoveringSpec::identity(),
    })
}
