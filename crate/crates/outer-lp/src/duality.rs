//! Dual witnesses for the double iterated quasi-norms: given `f`, builds an
//! explicit `g` whose normalized pairing against `f` is bounded below by a
//! constant traced through the decomposition machinery, and verifies every
//! step per instance.
//!
//! The construction decomposes `f` along composed-size levels `2^k`, then
//! each level along pointwise-size levels `2^j`, and sets
//! `g = f^{r−1}·Σ_k 2^{k(p−q)} Σ_j 2^{j(q−r)}·1_{W^k_j}` on pairwise-disjoint
//! blocks `W^k_j`.  When the middle exponent dominates the inner one
//! (`q > r`), each block is pruned by a summation-bounded subcollection of
//! family members on which the function is small (the pruning condition
//! supplies it); when `q < r` the parent-extension machinery applies and the
//! blocks are the interior level sets themselves.  The case `q = r` is the
//! single iterated construction and is signalled as an error.

use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conditions::{pruning_rebuttal, CoveringSpec};
use crate::decompose::{
    exterior_decompose, interior_decompose, quasi_triangle_constant, verify_exterior,
    verify_interior, ExteriorDecomposition, ExteriorVariant,
    InteriorDecomposition, PropertyCheck,
};
use crate::norms::{check_exponent, NormContext};
use crate::space::{caratheodory_constant, full_mask, MeasureTable};
use crate::{EngineOptions, Error, FiniteSpace, Rational, Result, SubsetMask};

/// One block of the dual density.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLevel {
    /// Exterior level index (composed size above `2^k`).
    pub k: i32,
    /// Interior level index in the frame of the normalized `f` (pointwise
    /// size above `2^j`).
    pub j: i32,
    /// The interior level set `U^k_j`.
    pub u: SubsetMask,
    /// Its selection pieces.
    pub pieces: Vec<SubsetMask>,
    /// The pruning subcollection of small family members cut out of `U^k_j`
    /// (empty in the parent-extension branch).
    pub pruned: Vec<SubsetMask>,
    /// The block `W^k_j` carrying the dual density.
    pub w: SubsetMask,
    /// The block weight `2^{k(p−q)}·2^{j(q−r)}`.
    pub weight: f64,
}

/// A dual function together with the construction that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    /// Outermost exponent.
    pub p: f64,
    /// Middle exponent.
    pub q: f64,
    /// Innermost exponent.
    pub r: f64,
    /// `f` was divided by `2^scale_exp` before the construction; all level
    /// indices and the density refer to the normalized frame.
    pub scale_exp: i32,
    /// Margin exponent of the small-member test (`2^{j−m}` threshold).
    pub m: i32,
    /// The composed-size level decomposition of the normalized `f`.
    pub exterior: ExteriorDecomposition,
    /// Pointwise-size decompositions of `f·1_{E_k}` per exterior level `k`.
    pub interiors: Vec<(i32, InteriorDecomposition)>,
    /// The flattened blocks carrying the density.
    pub levels: Vec<DualLevel>,
    /// The dual density `g`.
    pub g: Vec<f64>,
}

impl DualWitness {
    /// Replays the density formula on a function in the normalized frame:
    /// `f^{r−1}·weight` on each block.
    pub fn density_for(&self, f_normalized: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; f_normalized.len()];
        for level in &self.levels {
            for x in 0..f_normalized.len() {
                if level.w >> x & 1 == 1 {
                    g[x] = f_normalized[x].powf(self.r - 1.0) * level.weight;
                }
            }
        }
        g
    }
}

/// Verification outcome for a dual witness.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// `‖f·g‖_{L^1(ω)}` in the normalized frame.
    pub pairing: f64,
    /// `‖f‖` in the outermost quasi-norm, normalized frame.
    pub f_norm: f64,
    /// `‖g‖` in the conjugate-exponent quasi-norm.
    pub g_norm: f64,
    /// Traced lower constant: `pairing ≥ c_lower·f_norm^p`.
    pub c_lower: f64,
    /// Realized upper envelope: `g_norm^{p'}/f_norm^p`.
    pub c_upper: f64,
    /// Normalized pairing `pairing/(f_norm·g_norm)`.
    pub ratio: f64,
    /// All asserted steps.
    pub properties: Vec<PropertyCheck>,
    /// Conjunction of all verdicts.
    pub all_pass: bool,
}

/// Conjugate exponent `p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_open_interval(e: f64) -> Result<()> {
    check_exponent(e)?;
    if e <= 1.0 || e.is_infinite() {
        return Err(Error::BadExponent);
    }
    Ok(())
}

/// All family members of a covering spec (materializing the identity rule).
fn family_members(space: &FiniteSpace, spec: &CoveringSpec) -> Result<Vec<SubsetMask>> {
    if spec.family.is_empty() && spec.in_family(1) {
        if space.len() > 16 {
            return Err(Error::Unsupported(
                "identity family materialization beyond 16 points".into(),
            ));
        }
        Ok((1..=full_mask(space.len())).collect())
    } else {
        Ok(spec.family.clone())
    }
}

/// Members whose pointwise size on their intersection with `u` is at most
/// the threshold (empty intersections qualify).
fn small_members(
    space: &FiniteSpace,
    nu: &MeasureTable,
    members: &[SubsetMask],
    scaled: &[f64],
    r: f64,
    u: SubsetMask,
    threshold: f64,
) -> Vec<SubsetMask> {
    members
        .iter()
        .copied()
        .filter(|fm| {
            let cap = fm & u;
            if cap == 0 {
                return true;
            }
            let mass: f64 = (0..space.len())
                .filter(|x| cap >> x & 1 == 1)
                .map(|x| space.omega_f64(x) * scaled[x].powf(r))
                .sum();
            (mass / nu.value_f64(cap)).powf(1.0 / r) <= threshold
        })
        .collect()
}

/// Margin exponent: smallest pruning losses need `2^{−m·r}·K ≤ 2^{−r}`.
fn margin_exponent(k_param: &Rational, r: f64) -> i32 {
    let k = k_param.to_f64().expect("parameter fits binary64").max(1.0);
    2 + (k.log2() / r).floor() as i32
}

/// Builds the dual witness for `f` at exponents `p, q, r ∈ (1, ∞)`, `q ≠ r`.
///
/// `q > r` runs the plain-union level decomposition and prunes each interior
/// block by a subcollection found through the pruning condition; `q < r`
/// runs the parent-set level decomposition (the parent-extension condition
/// is the caller's responsibility) and keeps the blocks whole.  The
/// summation parameter `k_param` sets the pruning margin and the asserted
/// constants.
pub fn build_dual(
    space: &FiniteSpace,
    mu: &MeasureTable,
    nu: &MeasureTable,
    f: &[f64],
    p: f64,
    q: f64,
    r: f64,
    spec: &CoveringSpec,
    k_param: &Rational,
) -> Result<DualWitness> {
    check_open_interval(p)?;
    check_open_interval(q)?;
    check_open_interval(r)?;
    if q == r {
        return Err(Error::EqualExponents);
    }
    space.check_function(f)?;
    if f.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("zero function has no dual witness".into()));
    }
    let variant = if q > r {
        ExteriorVariant::QGeqR
    } else {
        ExteriorVariant::Canopy
    };
    let exterior = exterior_decompose(space, mu, nu, f, p, q, r, spec, variant)?;
    let scale_exp = exterior.scale_exp;
    let scaled: Vec<f64> = f.iter().map(|v| v * (-scale_exp as f64).exp2()).collect();
    let m = margin_exponent(k_param, r);
    let members = if q > r {
        family_members(space, spec)?
    } else {
        Vec::new()
    };
    let mut interiors = Vec::new();
    let mut levels = Vec::new();
    for ext in &exterior.levels {
        let h: Vec<f64> = scaled
            .iter()
            .enumerate()
            .map(|(x, v)| if ext.e >> x & 1 == 1 { *v } else { 0.0 })
            .collect();
        let interior = interior_decompose(space, nu, &h, q, r)?;
        let shift = interior.scale_exp;
        for lvl in &interior.levels {
            let j = lvl.j + shift;
            let pruned = if q > r {
                // Small members: residual pointwise size on F ∩ U at most
                // 2^{j−m}.  The residual on U equals f itself.
                let threshold = ((j - m) as f64).exp2();
                let small = small_members(space, nu, &members, &scaled, r, lvl.u, threshold);
                match crate::conditions::crop_select(space, nu, spec, &small, k_param)? {
                    Some(d) => d,
                    None => {
                        return Err(Error::InvalidInput(
                            "no pruning subcollection for a dual block; the covering \
                             does not satisfy the pruning condition at this parameter"
                                .into(),
                        ))
                    }
                }
            } else {
                Vec::new()
            };
            let cut = pruned.iter().fold(0, |acc, d| acc | d);
            let w = lvl.u & !cut;
            let weight = ((ext.k as f64) * (p - q)).exp2() * ((j as f64) * (q - r)).exp2();
            levels.push(DualLevel {
                k: ext.k,
                j,
                u: lvl.u,
                pieces: lvl.pieces.clone(),
                pruned,
                w,
                weight,
            });
        }
        interiors.push((ext.k, interior));
    }
    let witness = DualWitness {
        p,
        q,
        r,
        scale_exp,
        m,
        exterior,
        interiors,
        levels,
        g: Vec::new(),
    };
    let g = witness.density_for(&scaled);
    Ok(DualWitness { g, ..witness })
}

/// Replays a dual witness and asserts the traced pairing bound.
///
/// Checks, in order: the block geometry (disjointness, density replay, the
/// exact pairing identity), the per-block mass lower bounds (selection for
/// whole blocks, the pruning-margin bound for pruned ones), the per-level
/// summation bounds tying block masses to the interior and exterior norms,
/// the assembled lower constant `pairing ≥ c_lower·‖f‖^p`, the realized
/// upper envelope, and a quasi-triangle consistency bound on `‖g‖` over the
/// blocks.
pub fn verify_duality(
    space: &FiniteSpace,
    mu: &MeasureTable,
    nu: &MeasureTable,
    f: &[f64],
    witness: &DualWitness,
    spec: &CoveringSpec,
    k_param: &Rational,
) -> Result<DualityReport> {
    let (p, q, r) = (witness.p, witness.q, witness.r);
    let scaled: Vec<f64> = f
        .iter()
        .map(|v| v * (-witness.scale_exp as f64).exp2())
        .collect();
    let mut props: Vec<PropertyCheck> = Vec::new();
    let mut all = true;
    let claim = |props: &mut Vec<PropertyCheck>, all: &mut bool, name: String, ok: bool| {
        *all &= ok;
        props.push(PropertyCheck {
            name,
            lhs: if ok { 1.0 } else { 0.0 },
            rhs: 1.0,
            passed: ok,
        });
    };
    let bound = |props: &mut Vec<PropertyCheck>,
                     all: &mut bool,
                     name: String,
                     lhs: f64,
                     rhs: f64,
                     lower: bool| {
        let ok = if lower {
            lhs >= rhs * (1.0 - 1e-9) - 1e-12
        } else {
            lhs <= rhs * (1.0 + 1e-9) + 1e-12
        };
        *all &= ok;
        props.push(PropertyCheck {
            name,
            lhs,
            rhs,
            passed: ok,
        });
    };

    // Sub-decompositions verify on their own contracts.
    let ext_report = verify_exterior(space, mu, nu, f, &witness.exterior, spec, None)?;
    claim(
        &mut props,
        &mut all,
        "composed-size level decomposition verifies".into(),
        ext_report.all_pass,
    );
    let mut int_ok = true;
    for ((k, interior), ext) in witness.interiors.iter().zip(&witness.exterior.levels) {
        int_ok &= *k == ext.k;
        let h: Vec<f64> = scaled
            .iter()
            .enumerate()
            .map(|(x, v)| if ext.e >> x & 1 == 1 { *v } else { 0.0 })
            .collect();
        let rep = verify_interior(space, nu, &h, interior)?;
        int_ok &= rep.all_pass;
    }
    claim(
        &mut props,
        &mut all,
        "pointwise-size level decompositions verify".into(),
        int_ok && witness.interiors.len() == witness.exterior.levels.len(),
    );

    // Block geometry and density replay.
    let mut union: SubsetMask = 0;
    let mut disjoint = true;
    for level in &witness.levels {
        disjoint &= level.u & union == 0;
        union |= level.u;
    }
    claim(
        &mut props,
        &mut all,
        "blocks pairwise disjoint".into(),
        disjoint,
    );
    let replay = witness.density_for(&scaled);
    claim(
        &mut props,
        &mut all,
        "density replays from the blocks".into(),
        replay
            .iter()
            .zip(&witness.g)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0)),
    );

    // Exact pairing identity.
    let pairing: f64 = (0..space.len())
        .map(|x| space.omega_f64(x) * scaled[x] * witness.g[x])
        .sum();
    let mass_r = |mask: SubsetMask| -> f64 {
        (0..space.len())
            .filter(|x| mask >> x & 1 == 1)
            .map(|x| space.omega_f64(x) * scaled[x].powf(r))
            .sum()
    };
    let block_sum: f64 = witness.levels.iter().map(|l| l.weight * mass_r(l.w)).sum();
    bound(
        &mut props,
        &mut all,
        "pairing equals the weighted block masses".into(),
        pairing,
        block_sum,
        false,
    );
    bound(
        &mut props,
        &mut all,
        "pairing equals the weighted block masses (reverse)".into(),
        block_sum,
        pairing,
        false,
    );

    // Per-block mass lower bounds.
    let members = if q > r {
        family_members(space, spec)?
    } else {
        Vec::new()
    };
    let mut c1_min = 1.0f64;
    for level in &witness.levels {
        let name_suffix = format!("(k={}, j={})", level.k, level.j);
        let c1 = if q <= r {
            1.0
        } else {
            // Replay the small-member family and the pruning subcollection.
            let threshold = ((level.j - witness.m) as f64).exp2();
            let small = small_members(space, nu, &members, &scaled, r, level.u, threshold);
            claim(
                &mut props,
                &mut all,
                format!("pruned members are small family members {name_suffix}"),
                level.pruned.iter().all(|d| small.contains(d)),
            );
            let k_hat = caratheodory_constant(nu, &level.pruned)?;
            claim(
                &mut props,
                &mut all,
                format!("pruning subcollection within the parameter {name_suffix}"),
                k_hat <= *k_param,
            );
            let rebuttal = pruning_rebuttal(space, nu, spec, &small, &level.pruned, k_param)?;
            claim(
                &mut props,
                &mut all,
                format!("pruning leaves outside parents unchanged {name_suffix}"),
                rebuttal.is_none(),
            );
            let k_hat = k_hat.to_f64().expect("constant fits binary64");
            1.0 - k_hat * ((-(witness.m as f64)) * r).exp2()
        };
        c1_min = c1_min.min(c1);
        bound(
            &mut props,
            &mut all,
            format!("block keeps most of its mass {name_suffix}"),
            mass_r(level.w),
            c1 * ((level.j as f64) * r).exp2() * nu.value_f64(level.u),
            true,
        );
    }

    // Per-exterior-level summation bounds.
    let ctx = NormContext::with_outer_size(space, mu, nu, &scaled, q, r)?;
    let c2 = (1.0 - (-q).exp2()) * (-q).exp2();
    let mut k_star_max = 1.0f64;
    for ext in &witness.exterior.levels {
        let h_norm = ctx.inner_norm(ext.e);
        let level_sum: f64 = witness
            .levels
            .iter()
            .filter(|l| l.k == ext.k)
            .map(|l| ((l.j as f64) * q).exp2() * nu.value_f64(l.u))
            .sum();
        bound(
            &mut props,
            &mut all,
            format!("interior level sum controls the level norm (k={})", ext.k),
            level_sum,
            c2 * h_norm.powf(q),
            true,
        );
        let k_star = caratheodory_constant(nu, &ext.pieces)?
            .to_f64()
            .expect("constant fits binary64");
        k_star_max = k_star_max.max(k_star);
        bound(
            &mut props,
            &mut all,
            format!("level norm dominates its selection measure (k={})", ext.k),
            h_norm.powf(q),
            ((ext.k as f64) * q).exp2() * mu.value_f64(ext.e) / k_star,
            true,
        );
    }
    let phi = spec.phi.to_f64().expect("cost parameter fits binary64");
    let parent_cost = if q < r { phi } else { 1.0 };
    let c3 = (1.0 - (-p).exp2()) * (-p).exp2() / parent_cost;
    let f_norm = ctx.restricted_norm(p, full_mask(space.len()))?;
    let exterior_sum: f64 = witness
        .exterior
        .levels
        .iter()
        .map(|ext| ((ext.k as f64) * p).exp2() * mu.value_f64(ext.e))
        .sum();
    bound(
        &mut props,
        &mut all,
        "exterior level sum controls the norm".into(),
        exterior_sum,
        c3 * f_norm.powf(p),
        true,
    );

    // Assembled lower bound.
    let c_lower = c1_min * c2 * c3 / k_star_max;
    bound(
        &mut props,
        &mut all,
        "pairing dominates the traced multiple of the norm".into(),
        pairing,
        c_lower * f_norm.powf(p),
        true,
    );

    // Upper envelope and normalized ratio.
    let (pp, qp, rp) = (conjugate(p), conjugate(q), conjugate(r));
    let dual_ctx = NormContext::with_outer_size(space, mu, nu, &witness.g, qp, rp)?;
    let g_norm = dual_ctx.restricted_norm(pp, full_mask(space.len()))?;
    claim(
        &mut props,
        &mut all,
        "dual norm positive and finite".into(),
        g_norm > 0.0 && g_norm.is_finite(),
    );
    let c_upper = g_norm.powf(pp) / f_norm.powf(p);
    let ratio = pairing / (f_norm * g_norm);
    bound(
        &mut props,
        &mut all,
        "normalized pairing meets the assembled constant".into(),
        ratio,
        c_lower / c_upper.powf(1.0 / pp),
        true,
    );

    // Quasi-triangle consistency over the blocks: a balanced binary split
    // bounds ‖g‖ by the blockwise norms.
    let blocks: Vec<f64> = witness
        .levels
        .iter()
        .map(|l| {
            let g_block: Vec<f64> = (0..space.len())
                .map(|x| if l.w >> x & 1 == 1 { witness.g[x] } else { 0.0 })
                .collect();
            NormContext::with_outer_size(space, mu, nu, &g_block, qp, rp)
                .and_then(|c| c.restricted_norm(pp, full_mask(space.len())))
        })
        .collect::<Result<_>>()?;
    let c_delta = 2.0 * 1.0_f64.max((1.0 / pp - 1.0).exp2()) * quasi_triangle_constant(qp, rp);
    let splits = (blocks.len().max(1) as f64).log2().ceil();
    bound(
        &mut props,
        &mut all,
        "dual norm within the quasi-triangle envelope of its blocks".into(),
        g_norm,
        c_delta.powf(splits) * blocks.iter().sum::<f64>(),
        false,
    );

    Ok(DualityReport {
        pairing,
        f_norm,
        g_norm,
        c_lower,
        c_upper,
        ratio,
        properties: props,
        all_pass: all,
    })
}

/// Ratio `‖Σf_i‖/Σ‖f_i‖` in the double iterated quasi-norm; values above 1
/// witness the triangle-inequality failure.
pub fn triangle_defect(
    space: &FiniteSpace,
    mu: &MeasureTable,
    nu: &MeasureTable,
    p: f64,
    q: f64,
    r: f64,
    functions: &[Vec<f64>],
) -> Result<f64> {
    if functions.is_empty() {
        return Err(Error::InvalidInput("no summands".into()));
    }
    let mut total = vec![0.0; space.len()];
    let mut norm_sum = 0.0;
    for f in functions {
        space.check_function(f)?;
        for (t, v) in total.iter_mut().zip(f) {
            *t += v;
        }
        let ctx = NormContext::with_outer_size(space, mu, nu, f, q, r)?;
        norm_sum += ctx.restricted_norm(p, full_mask(space.len()))?;
    }
    if norm_sum == 0.0 {
        return Err(Error::InvalidInput("all summands vanish".into()));
    }
    let ctx = NormContext::with_outer_size(space, mu, nu, &total, q, r)?;
    Ok(ctx.restricted_norm(p, full_mask(space.len()))? / norm_sum)
}

/// Best normalized pairing found over the dual witness and seeded random
/// candidates; returns the ratio and the best candidate.
pub fn pairing_sup_search(
    space: &FiniteSpace,
    mu: &MeasureTable,
    nu: &MeasureTable,
    f: &[f64],
    p: f64,
    q: f64,
    r: f64,
    spec: &CoveringSpec,
    k_param: &Rational,
    options: &EngineOptions,
) -> Result<(f64, Vec<f64>)> {
    check_open_interval(p)?;
    space.check_function(f)?;
    let (pp, qp, rp) = (conjugate(p), conjugate(q), conjugate(r));
    let ctx = NormContext::with_outer_size(space, mu, nu, f, q, r)?;
    let f_norm = ctx.restricted_norm(p, full_mask(space.len()))?;
    if f_norm == 0.0 {
        return Err(Error::InvalidInput("zero function".into()));
    }
    let score = |g: &[f64]| -> Result<f64> {
        let dual = NormContext::with_outer_size(space, mu, nu, g, qp, rp)?;
        let g_norm = dual.restricted_norm(pp, full_mask(space.len()))?;
        if g_norm == 0.0 {
            return Ok(0.0);
        }
        let pairing: f64 = (0..space.len())
            .map(|x| space.omega_f64(x) * f[x] * g[x])
            .sum();
        Ok(pairing / (f_norm * g_norm))
    };
    let mut best = 0.0f64;
    let mut best_g = vec![0.0; space.len()];
    let consider = |g: Vec<f64>, best: &mut f64, best_g: &mut Vec<f64>| -> Result<()> {
        let s = score(&g)?;
        if s > *best {
            *best = s;
            *best_g = g;
        }
        Ok(())
    };
    // The classical pointwise candidate.
    consider(
        f.iter().map(|v| v.powf(p - 1.0)).collect(),
        &mut best,
        &mut best_g,
    )?;
    // The constructed witness, when it applies.
    if q != r {
        if let Ok(witness) = build_dual(space, mu, nu, f, p, q, r, spec, k_param) {
            consider(witness.g, &mut best, &mut best_g)?;
        }
    }
    // Seeded random candidates.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for _ in 0..options.budget {
        let g: Vec<f64> = (0..space.len())
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..2.0f64).powi(3)
                }
            })
            .collect();
        consider(g, &mut best, &mut best_g)?;
    }
    Ok((best, best_g))
}

/// Re-checks that a reported pruning collection consists of family members
/// (used by serialization round-trips).
pub fn pruned_members_in_family(spec: &CoveringSpec, witness: &DualWitness) -> bool {
    witness
        .levels
        .iter()
        .flat_map(|l| &l.pruned)
        .all(|d| spec.in_family(*d))
}
