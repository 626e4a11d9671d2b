//! Sizes, super-level measures, and iterated outer `L^p` quasi-norms.
//!
//! A quasi-norm here is determined by a measure table, a size, and an
//! exponent.  Two sizes are supported: the pointwise-mass size
//! `ℓ^r_ω(f)(A) = ν(A)^{-1/r}·‖f·1_A‖_{L^r(ω)}` and the composed size
//! `ℓ^q_ν(ℓ^r_ω)(f)(A) = μ(A)^{-1/q}·‖f·1_A‖_{L^q_ν(ℓ^r_ω)}`, following the
//! convention that a `-1/∞` exponent is zero.  All super-level measures are
//! exact rationals; size values and norms are binary64.
//!
//! A [`NormContext`] freezes one `(space, f, size)` triple and memoizes every
//! per-mask table the evaluation needs, so that restricted norms and profiles
//! can be queried repeatedly at enumeration scale.

use num_traits::ToPrimitive;

use crate::space::{full_mask, mask_points, submasks, MeasureTable, SubsetMask};
use crate::{Error, FiniteSpace, Rational, Result};

/// Size expression: the innermost pointwise size or the composed size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeExpr {
    /// `ℓ^r_ω`: normalized `L^r(ω)` mass on the set.
    Inner {
        /// Exponent in `(0, ∞]`.
        r: f64,
    },
    /// `ℓ^q_ν(ℓ^r_ω)`: normalized inner iterated norm on the set.
    Outer {
        /// Middle exponent in `(0, ∞]`.
        q: f64,
        /// Innermost exponent in `(0, ∞]`.
        r: f64,
    },
}

/// Validates an exponent in `(0, ∞]`.
pub fn check_exponent(e: f64) -> Result<()> {
    if e.is_nan() || e <= 0.0 {
        return Err(Error::BadExponent);
    }
    Ok(())
}

/// `1/e` with the convention `1/∞ = 0`.
fn inv(e: f64) -> f64 {
    if e.is_infinite() {
        0.0
    } else {
        1.0 / e
    }
}

impl SizeExpr {
    fn check(&self) -> Result<()> {
        match self {
            SizeExpr::Inner { r } => check_exponent(*r),
            SizeExpr::Outer { q, r } => {
                check_exponent(*q)?;
                check_exponent(*r)
            }
        }
    }

    /// Innermost exponent.
    pub fn r(&self) -> f64 {
        match self {
            SizeExpr::Inner { r } | SizeExpr::Outer { r, .. } => *r,
        }
    }
}

/// Exact step representation of `λ ↦ m(λ)`, the super-level measure.
///
/// `values[i]` holds on the interval from `breakpoints[i-1]` (or `0`) up to
/// but excluding `breakpoints[i]`; the last value holds from the last
/// breakpoint on and is always `0`.  `optimal[i]` is a removal set of minimal
/// measure realizing `values[i]` on that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    /// Strictly increasing λ values at which the measure drops.
    pub breakpoints: Vec<f64>,
    /// Plateau values, strictly decreasing, ending in `0`.
    pub values: Vec<Rational>,
    /// A minimal-measure removal set per plateau (smallest mask on ties).
    pub optimal: Vec<SubsetMask>,
}

impl StepProfile {
    /// Number of plateaus the λ ∈ [0, breakpoints[i]) intervals split into.
    fn plateau_index(&self, lambda: f64) -> usize {
        self.breakpoints.partition_point(|b| *b <= lambda)
    }

    /// Super-level measure at `lambda`.
    pub fn value_at(&self, lambda: f64) -> Rational {
        self.values[self.plateau_index(lambda)].clone()
    }

    /// Minimal removal set at `lambda`.
    pub fn optimal_at(&self, lambda: f64) -> SubsetMask {
        self.optimal[self.plateau_index(lambda)]
    }

    /// Largest size value of the profiled function (`0` when it vanishes).
    pub fn sup(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// `∫ p·λ^{p-1}·m(λ) dλ` in closed form over the plateaus.
    pub fn norm_pth_power(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0f64;
        for (i, b) in self.breakpoints.iter().enumerate() {
            let v = self.values[i].to_f64().expect("measure fits binary64");
            acc += v * (b.powf(p) - prev.powf(p));
            prev = *b;
        }
        acc
    }

    /// The outer `L^p` quasi-norm this profile integrates to.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.sup()
        } else {
            self.norm_pth_power(p).powf(inv(p))
        }
    }
}

/// Norm value together with the profile it integrates (absent for `p = ∞`).
#[derive(Debug, Clone)]
pub struct NormResult {
    /// The quasi-norm value.
    pub value: f64,
    /// Exact super-level profile, when the exponent is finite.
    pub profile: Option<StepProfile>,
}

/// Memoized evaluation state for one `(space, function, size)` triple.
///
/// Holds per-mask mass, sup, sup-size, and (for the composed size) inner-norm
/// tables.  All queries after construction are lookups plus at most one
/// submask sweep; the state is immutable and safe to share across threads.
pub struct NormContext<'a> {
    space: &'a FiniteSpace,
    /// Measure the quasi-norm integrates against (also normalizes the
    /// composed size).
    measure: &'a MeasureTable,
    /// Measure the inner iterated norm integrates against (composed size
    /// only; equals `measure` for the pointwise size).
    inner_measure: &'a MeasureTable,
    f: Vec<f64>,
    size: SizeExpr,
    mass_r: Vec<f64>,
    sup_f: Vec<f64>,
    inner_sup: Vec<f64>,
    inner_norm: Vec<f64>,
    sup_size: Vec<f64>,
    arg_size: Vec<SubsetMask>,
}

impl<'a> NormContext<'a> {
    /// Context for quasi-norms `L^p_ν(ℓ^r_ω)` over the given measure table.
    pub fn with_inner_size(
        space: &'a FiniteSpace,
        nu: &'a MeasureTable,
        f: &[f64],
        r: f64,
    ) -> Result<Self> {
        Self::build(space, nu, nu, f, SizeExpr::Inner { r })
    }

    /// Context for quasi-norms `L^p_μ(ℓ^q_ν(ℓ^r_ω))`: the composed size is
    /// normalized by `mu` and its inner norm integrates against `nu`.
    pub fn with_outer_size(
        space: &'a FiniteSpace,
        mu: &'a MeasureTable,
        nu: &'a MeasureTable,
        f: &[f64],
        q: f64,
        r: f64,
    ) -> Result<Self> {
        Self::build(space, mu, nu, f, SizeExpr::Outer { q, r })
    }

    fn build(
        space: &'a FiniteSpace,
        measure: &'a MeasureTable,
        inner_measure: &'a MeasureTable,
        f: &[f64],
        size: SizeExpr,
    ) -> Result<Self> {
        size.check()?;
        space.check_function(f)?;
        let n = space.len();
        let masks = 1usize << n;
        let r = size.r();
        let mut mass_r = vec![0.0f64; masks];
        let mut sup_f = vec![0.0f64; masks];
        for m in 1..masks {
            let low = m.trailing_zeros() as usize;
            let rest = m & (m - 1);
            let fv = f[low];
            mass_r[m] = mass_r[rest]
                + if r.is_finite() {
                    space.omega_f64(low) * fv.powf(r)
                } else {
                    0.0
                };
            sup_f[m] = sup_f[rest].max(fv);
        }
        let mut ctx = NormContext {
            space,
            measure,
            inner_measure,
            f: f.to_vec(),
            size,
            mass_r,
            sup_f,
            inner_sup: Vec::new(),
            inner_norm: Vec::new(),
            sup_size: Vec::new(),
            arg_size: Vec::new(),
        };
        ctx.inner_sup = ctx.build_sup_table(|c, m| c.inner_size(m)).0;
        match size {
            SizeExpr::Inner { .. } => {
                let (sup, arg) = ctx.build_sup_table(|c, m| c.inner_size(m));
                ctx.sup_size = sup;
                ctx.arg_size = arg;
            }
            SizeExpr::Outer { q, .. } => {
                ctx.inner_norm = if q.is_finite() {
                    ctx.build_inner_norms(q)
                } else {
                    ctx.inner_sup.clone()
                };
                let (sup, arg) = ctx.build_sup_table(|c, m| c.outer_size(m));
                ctx.sup_size = sup;
                ctx.arg_size = arg;
            }
        }
        Ok(ctx)
    }

    /// Pointwise size of the stored function on a nonempty mask.
    fn inner_size(&self, mask: SubsetMask) -> f64 {
        let r = self.size.r();
        if r.is_finite() {
            let nu = self.inner_measure.value_f64(mask);
            (self.mass_r[mask as usize] / nu).powf(1.0 / r)
        } else {
            self.sup_f[mask as usize]
        }
    }

    /// Composed size of the stored function on a nonempty mask.
    fn outer_size(&self, mask: SubsetMask) -> f64 {
        match self.size {
            SizeExpr::Outer { q, .. } if q.is_finite() => {
                self.measure.value_f64(mask).powf(-1.0 / q) * self.inner_norm[mask as usize]
            }
            _ => self.inner_sup[mask as usize],
        }
    }

    /// Max-table over kept sets: entry `K` is the sup of the base size over
    /// nonempty subsets of `K`, with a smallest-mask witness.
    fn build_sup_table(
        &self,
        base: impl Fn(&Self, SubsetMask) -> f64,
    ) -> (Vec<f64>, Vec<SubsetMask>) {
        let masks = 1usize << self.space.len();
        let mut sup = vec![0.0; masks];
        let mut arg = vec![0 as SubsetMask; masks];
        for m in 1..masks {
            let mask = m as SubsetMask;
            let mut best = base(self, mask);
            let mut best_arg = mask;
            for i in mask_points(mask) {
                let sub = (m & !(1usize << i)) as usize;
                let (v, a) = (sup[sub], arg[sub]);
                if v > best || (v == best && a < best_arg) {
                    best = v;
                    best_arg = a;
                }
            }
            sup[m] = best;
            arg[m] = best_arg;
        }
        (sup, arg)
    }

    /// Inner iterated norm `‖f·1_A‖_{L^q_ν(ℓ^r_ω)}` for every mask `A`.
    ///
    /// For each restriction, sweeps kept subsets `D ⊆ A`: removing `B = A\D`
    /// costs `ν(B)` and caps the surviving sup-size at `inner_sup[D]`, so the
    /// sorted sweep reads off the super-level profile and integrates it.
    fn build_inner_norms(&self, q: f64) -> Vec<f64> {
        let masks = 1usize << self.space.len();
        let denom = self.inner_measure.denom() as f64;
        let mut out = vec![0.0; masks];
        let mut entries: Vec<(f64, i128)> = Vec::new();
        for a in 1..masks {
            let mask = a as SubsetMask;
            entries.clear();
            for d in submasks(mask) {
                entries.push((self.inner_sup[d as usize], self.inner_measure.scaled(mask & !d)));
            }
            entries.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let mut acc = 0.0;
            let mut cur = entries[0].1;
            let mut prev_t = 0.0f64;
            for (t, cost) in entries.iter().skip(1) {
                if *cost < cur {
                    acc += (cur as f64 / denom) * (t.powf(q) - prev_t.powf(q));
                    cur = *cost;
                    prev_t = *t;
                }
            }
            debug_assert_eq!(cur, 0, "keeping the whole restriction removes nothing");
            out[a] = acc.powf(1.0 / q);
        }
        out
    }

    /// The space this context evaluates on.
    pub fn space(&self) -> &FiniteSpace {
        self.space
    }

    /// The measure table the quasi-norm integrates against.
    pub fn measure(&self) -> &MeasureTable {
        self.measure
    }

    /// The stored function values.
    pub fn function(&self) -> &[f64] {
        &self.f
    }

    /// The size expression of this context.
    pub fn size_expr(&self) -> SizeExpr {
        self.size
    }

    /// Size of the stored function on a nonempty set.
    pub fn size(&self, a: SubsetMask) -> Result<f64> {
        if a == 0 {
            return Err(Error::InvalidInput("size of the empty set".into()));
        }
        Ok(match self.size {
            SizeExpr::Inner { .. } => self.inner_size(a),
            SizeExpr::Outer { .. } => self.outer_size(a),
        })
    }

    /// `Σ_{x∈A} ω(x)·f(x)^r` for the stored function (finite `r` only).
    pub fn mass(&self, a: SubsetMask) -> f64 {
        self.mass_r[a as usize]
    }

    /// Largest function value on a set.
    pub fn sup_f(&self, a: SubsetMask) -> f64 {
        self.sup_f[a as usize]
    }

    /// Sup of the size of `f·1_K` over all sets (attained within `K`).
    pub fn sup_size(&self, kept: SubsetMask) -> f64 {
        self.sup_size[kept as usize]
    }

    /// A set realizing [`NormContext::sup_size`] (smallest mask on ties).
    pub fn arg_sup(&self, kept: SubsetMask) -> SubsetMask {
        self.arg_size[kept as usize]
    }

    /// Sup of the pointwise size of `f·1_K`; for the composed size this is
    /// the `L^∞` bound of the inner iterated norm of the restriction.
    pub fn inner_sup(&self, kept: SubsetMask) -> f64 {
        self.inner_sup[kept as usize]
    }

    /// Memoized `‖f·1_A‖_{L^q_ν(ℓ^r_ω)}` (composed-size contexts only).
    pub fn inner_norm(&self, a: SubsetMask) -> f64 {
        match self.size {
            SizeExpr::Inner { .. } => panic!("inner norms exist only for the composed size"),
            SizeExpr::Outer { .. } => self.inner_norm[a as usize],
        }
    }

    /// Exact super-level profile of `f·1_R`.
    ///
    /// Enumerates kept sets `D ⊆ R`; removal sets outside `R` never help
    /// because the size ignores points where the restriction vanishes while
    /// the measure is monotone.
    pub fn restricted_profile(&self, restriction: SubsetMask) -> StepProfile {
        let mut entries: Vec<(f64, i128, SubsetMask)> = submasks(restriction)
            .map(|d| {
                let b = restriction & !d;
                (self.sup_size[d as usize], self.measure.scaled(b), b)
            })
            .collect();
        entries.sort_unstable_by(|x, y| {
            x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
        });
        let denom = self.measure.denom();
        let mut profile = StepProfile {
            breakpoints: Vec::new(),
            values: vec![Rational::new(entries[0].1, denom)],
            optimal: vec![entries[0].2],
        };
        let mut cur = entries[0].1;
        for (t, cost, b) in entries.into_iter().skip(1) {
            if cost < cur {
                profile.breakpoints.push(t);
                profile.values.push(Rational::new(cost, denom));
                profile.optimal.push(b);
                cur = cost;
            }
        }
        debug_assert_eq!(cur, 0, "final plateau keeps everything");
        profile
    }

    /// Profile of the stored function on the whole space.
    pub fn profile(&self) -> StepProfile {
        self.restricted_profile(full_mask(self.space.len()))
    }

    /// Super-level measure of `f·1_R` at `lambda` with a minimal removal set.
    ///
    /// The removal-set constraint is non-strict: the sup of the surviving
    /// size must be `≤ lambda`.
    pub fn restricted_super_level(
        &self,
        lambda: f64,
        restriction: SubsetMask,
    ) -> (Rational, SubsetMask) {
        let mut best: Option<(i128, SubsetMask)> = None;
        for d in submasks(restriction) {
            if self.sup_size[d as usize] <= lambda {
                let b = restriction & !d;
                let cost = self.measure.scaled(b);
                if best.map_or(true, |(c, m)| cost < c || (cost == c && b < m)) {
                    best = Some((cost, b));
                }
            }
        }
        let (cost, b) = best.expect("the empty kept set is always admissible");
        (Rational::new(cost, self.measure.denom()), b)
    }

    /// Super-level measure of the stored function at `lambda`.
    pub fn super_level(&self, lambda: f64) -> (Rational, SubsetMask) {
        self.restricted_super_level(lambda, full_mask(self.space.len()))
    }

    /// Outer `L^p` quasi-norm of `f·1_R`.
    pub fn restricted_norm(&self, p: f64, restriction: SubsetMask) -> Result<f64> {
        check_exponent(p)?;
        if p.is_infinite() {
            return Ok(self.sup_size[restriction as usize]);
        }
        Ok(self.restricted_profile(restriction).norm(p))
    }

    /// Outer `L^p` quasi-norm of the stored function, with its profile.
    pub fn norm(&self, p: f64) -> Result<NormResult> {
        check_exponent(p)?;
        let full = full_mask(self.space.len());
        if p.is_infinite() {
            return Ok(NormResult {
                value: self.sup_size[full as usize],
                profile: None,
            });
        }
        let profile = self.restricted_profile(full);
        Ok(NormResult {
            value: profile.norm(p),
            profile: Some(profile),
        })
    }
}

/// Measure tables a size expression may draw on.
#[derive(Clone, Copy)]
pub struct SpaceTables<'a> {
    /// Outermost measure (normalizes the composed size).
    pub mu: &'a MeasureTable,
    /// Middle measure (integrates inner iterated norms; integrates
    /// pointwise-size quasi-norms).
    pub nu: &'a MeasureTable,
}

impl<'a> SpaceTables<'a> {
    fn context(&self, space: &'a FiniteSpace, f: &[f64], s: SizeExpr) -> Result<NormContext<'a>> {
        match s {
            SizeExpr::Inner { r } => NormContext::with_inner_size(space, self.nu, f, r),
            SizeExpr::Outer { q, r } => {
                NormContext::with_outer_size(space, self.mu, self.nu, f, q, r)
            }
        }
    }
}

/// Size of `f` on a nonempty set.  One-shot wrapper over [`NormContext`].
pub fn size_eval(
    space: &FiniteSpace,
    tables: SpaceTables,
    f: &[f64],
    a: SubsetMask,
    s: SizeExpr,
) -> Result<f64> {
    tables.context(space, f, s)?.size(a)
}

/// Super-level measure of `f` at `lambda` with a minimal removal set.
pub fn super_level_measure(
    space: &FiniteSpace,
    tables: SpaceTables,
    f: &[f64],
    s: SizeExpr,
    lambda: f64,
) -> Result<(Rational, SubsetMask)> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidInput("negative level".into()));
    }
    Ok(tables.context(space, f, s)?.super_level(lambda))
}

/// Exact step profile of the super-level measure of `f`.
pub fn step_profile(
    space: &FiniteSpace,
    tables: SpaceTables,
    f: &[f64],
    s: SizeExpr,
) -> Result<StepProfile> {
    Ok(tables.context(space, f, s)?.profile())
}

/// Outer `L^p` quasi-norm of `f` under size `s`.
pub fn outer_norm(
    space: &FiniteSpace,
    tables: SpaceTables,
    f: &[f64],
    p: f64,
    s: SizeExpr,
) -> Result<NormResult> {
    tables.context(space, f, s)?.norm(p)
}

/// Discrete sums sandwiching the `p`-th power of the quasi-norm.
#[derive(Debug, Clone, Copy)]
pub struct DiscretizedBounds {
    /// `Σ_{k∈ℤ} Ψ^{kp}·m(Ψ^k)`, lower geometric tail in closed form.
    pub single_sum: f64,
    /// `Σ_{k∈ℤ} Ψ^{kp}·Σ_{l≥k} m(Ψ^l)`, equal to the single sum divided by
    /// `1 − Ψ^{-p}`.
    pub double_sum: f64,
    /// `(1 − Ψ^{-p})·single_sum`, a lower bound for the norm's `p`-th power.
    pub lower: f64,
    /// `(Ψ^p − 1)·single_sum`, an upper bound for the norm's `p`-th power.
    pub upper: f64,
}

/// Evaluates the discretized-norm sums of `f` for step `Ψ > 1`.
///
/// The block `[Ψ^k, Ψ^{k+1})` of the defining integral is squeezed between
/// `m(Ψ^{k+1})` and `m(Ψ^k)` times its `λ^p`-increment, which yields the
/// recorded lower and upper bounds on the `p`-th power of the norm.
pub fn discretized_norm_bounds(
    space: &FiniteSpace,
    tables: SpaceTables,
    f: &[f64],
    p: f64,
    s: SizeExpr,
    psi: f64,
) -> Result<DiscretizedBounds> {
    check_exponent(p)?;
    if p.is_infinite() || !(psi > 1.0) || psi.is_infinite() {
        return Err(Error::BadExponent);
    }
    let profile = tables.context(space, f, s)?.profile();
    let single_sum = discretized_single_sum(&profile, p, psi)?;
    let geometric = 1.0 - psi.powf(-p);
    Ok(DiscretizedBounds {
        single_sum,
        double_sum: single_sum / geometric,
        lower: geometric * single_sum,
        upper: (psi.powf(p) - 1.0) * single_sum,
    })
}

fn discretized_single_sum(profile: &StepProfile, p: f64, psi: f64) -> Result<f64> {
    let Some(&first) = profile.breakpoints.first() else {
        return Ok(0.0);
    };
    let last = *profile.breakpoints.last().expect("nonempty");
    // Largest k with Ψ^k < first: below it m is constant at m(0) and the
    // geometric tail sums in closed form.
    let mut k_lo = (first.ln() / psi.ln()).floor() as i64;
    while psi.powi(k_lo as i32) >= first {
        k_lo -= 1;
    }
    while psi.powi((k_lo + 1) as i32) < first {
        k_lo += 1;
    }
    let m0 = profile.values[0].to_f64().expect("measure fits binary64");
    let mut sum = m0 * psi.powf(k_lo as f64 * p) / (1.0 - psi.powf(-p));
    let mut k = k_lo + 1;
    let mut iterations = 0u64;
    loop {
        let level = psi.powf(k as f64);
        if level >= last {
            break;
        }
        sum += level.powf(p)
            * profile
                .value_at(level)
                .to_f64()
                .expect("measure fits binary64");
        k += 1;
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(Error::Unsupported(
                "discretization step too close to 1 for this profile".into(),
            ));
        }
    }
    Ok(sum)
}

/// `(Σ_x f(x)^r·ω(x))^{1/r}`, the classical weighted norm (`sup` at `r=∞`).
pub fn classical_lp(space: &FiniteSpace, f: &[f64], r: f64) -> Result<f64> {
    check_exponent(r)?;
    space.check_function(f)?;
    if r.is_infinite() {
        return Ok(f.iter().fold(0.0, |a, b| a.max(*b)));
    }
    let sum: f64 = f
        .iter()
        .enumerate()
        .map(|(i, v)| space.omega_f64(i) * v.powf(r))
        .sum();
    Ok(sum.powf(1.0 / r))
}
