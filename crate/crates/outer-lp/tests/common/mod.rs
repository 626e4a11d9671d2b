//! Independent brute-force oracles and seeded instance generators shared by
//! the integration suites.
//!
//! Everything here recomputes from first principles: measures by enumerating
//! all covering subcollections, super-level measures by enumerating removal
//! sets and witnesses, norms by integrating over an explicit candidate grid.
//! None of it reuses the library's dynamic programs or memo tables, so
//! agreement is meaningful evidence.

#![allow(dead_code)]

use num_traits::ToPrimitive;
use outer_lp::space::{full_mask, mask_points, submasks};
use outer_lp::{FiniteSpace, Generator, MeasureKind, Rational, SubsetMask};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimal cover cost for every subset, by enumerating all subcollections of
/// the generating family.
pub fn oracle_measure(space: &FiniteSpace, kind: MeasureKind) -> Vec<Rational> {
    let gens = space.generators(kind);
    let g = gens.len();
    assert!(g <= 20, "oracle cover enumeration is exponential in generators");
    let mut covers: Vec<(SubsetMask, Rational)> = Vec::with_capacity(1 << g);
    for sc in 0u32..(1 << g) {
        let mut union: SubsetMask = 0;
        let mut cost = Rational::new(0, 1);
        for (i, gen) in gens.iter().enumerate() {
            if sc >> i & 1 == 1 {
                union |= gen.set;
                cost += gen.weight.clone();
            }
        }
        covers.push((union, cost));
    }
    let masks = 1usize << space.len();
    let mut out = Vec::with_capacity(masks);
    for a in 0..masks {
        let mask = a as SubsetMask;
        let best = covers
            .iter()
            .filter(|(u, _)| mask & !u == 0)
            .map(|(_, c)| c.clone())
            .min()
            .expect("every point is covered, so the full subcollection covers");
        out.push(best);
    }
    out
}

/// Measures of a space recomputed by the cover-enumeration oracle.
pub struct OracleSpace {
    pub n: usize,
    pub omega: Vec<f64>,
    pub mu: Vec<Rational>,
    pub nu: Vec<Rational>,
}

impl OracleSpace {
    pub fn build(space: &FiniteSpace) -> Self {
        OracleSpace {
            n: space.len(),
            omega: (0..space.len()).map(|i| space.omega_f64(i)).collect(),
            mu: oracle_measure(space, MeasureKind::Mu),
            nu: oracle_measure(space, MeasureKind::Nu),
        }
    }

    pub fn full(&self) -> SubsetMask {
        full_mask(self.n)
    }

    fn nu_f64(&self, a: SubsetMask) -> f64 {
        self.nu[a as usize].to_f64().unwrap()
    }

    fn mu_f64(&self, a: SubsetMask) -> f64 {
        self.mu[a as usize].to_f64().unwrap()
    }

    /// `ν(A)^{-1/r}·‖f·1_A‖_{L^r(ω)}` recomputed directly.
    pub fn inner_size(&self, f: &[f64], a: SubsetMask, r: f64) -> f64 {
        assert_ne!(a, 0);
        if r.is_infinite() {
            return mask_points(a).map(|i| f[i]).fold(0.0, f64::max);
        }
        let mass: f64 = mask_points(a).map(|i| self.omega[i] * f[i].powf(r)).sum();
        (mass / self.nu_f64(a)).powf(1.0 / r)
    }

    /// Sup of the inner size of `f·1_K`, searching all nonempty `A ⊆ K`
    /// (monotonicity of ν lets the sup restrict there).
    pub fn inner_sup(&self, f: &[f64], kept: SubsetMask, r: f64) -> f64 {
        submasks(kept)
            .filter(|a| *a != 0)
            .map(|a| self.inner_size(f, a, r))
            .fold(0.0, f64::max)
    }

    /// Super-level measure of `f·1_kept` for the inner size: enumerates every
    /// removal set `B ⊆ kept` and checks the surviving sup against `λ`.
    pub fn super_level_inner(&self, f: &[f64], kept: SubsetMask, r: f64, lambda: f64) -> Rational {
        submasks(kept)
            .filter(|b| self.inner_sup(f, kept & !b, r) <= lambda)
            .map(|b| self.nu[b as usize].clone())
            .min()
            .expect("removing everything is always admissible")
    }

    /// `‖f·1_kept‖_{L^q_ν(ℓ^r_ω)}` by candidate-grid integration of the
    /// oracle super-level measure.
    pub fn double_norm(&self, f: &[f64], kept: SubsetMask, q: f64, r: f64) -> f64 {
        if q.is_infinite() {
            return self.inner_sup(f, kept, r);
        }
        let sizes: Vec<f64> = submasks(kept)
            .filter(|a| *a != 0)
            .map(|a| self.inner_size(f, a, r))
            .collect();
        let m = |lambda: f64| self.super_level_inner(f, kept, r, lambda).to_f64().unwrap();
        integrate_on_grid(sizes, q, m)
    }

    /// Composed size `μ(A)^{-1/q}·‖f·1_A‖_{L^q_ν(ℓ^r_ω)}`, memoized per mask.
    fn outer_sizes(&self, f: &[f64], q: f64, r: f64) -> Vec<f64> {
        let masks = 1usize << self.n;
        let mut out = vec![0.0; masks];
        for a in 1..masks {
            let mask = a as SubsetMask;
            out[a] = if q.is_infinite() {
                self.inner_sup(f, mask, r)
            } else {
                self.mu_f64(mask).powf(-1.0 / q) * self.double_norm(f, mask, q, r)
            };
        }
        out
    }

    /// Super-level measure of `f` for the composed size.
    pub fn super_level_outer(&self, f: &[f64], q: f64, r: f64, lambda: f64) -> Rational {
        let sizes = self.outer_sizes(f, q, r);
        let full = self.full();
        let sup = |kept: SubsetMask| -> f64 {
            submasks(kept)
                .filter(|a| *a != 0)
                .map(|a| sizes[a as usize])
                .fold(0.0, f64::max)
        };
        submasks(full)
            .filter(|b| sup(full & !b) <= lambda)
            .map(|b| self.mu[b as usize].clone())
            .min()
            .expect("removing everything is always admissible")
    }

    /// `‖f‖_{L^p_μ(ℓ^q_ν(ℓ^r_ω))}` by candidate-grid integration.
    pub fn triple_norm(&self, f: &[f64], p: f64, q: f64, r: f64) -> f64 {
        let sizes = self.outer_sizes(f, q, r);
        let full = self.full();
        let sup = |kept: SubsetMask| -> f64 {
            submasks(kept)
                .filter(|a| *a != 0)
                .map(|a| sizes[a as usize])
                .fold(0.0, f64::max)
        };
        if p.is_infinite() {
            return sup(full);
        }
        let candidates: Vec<f64> = (1..(1usize << self.n)).map(|a| sizes[a]).collect();
        let m = |lambda: f64| -> f64 {
            submasks(full)
                .filter(|b| sup(full & !b) <= lambda)
                .map(|b| self.mu_f64(b))
                .fold(f64::INFINITY, f64::min)
        };
        integrate_on_grid(candidates, p, m)
    }
}

/// `(∫ p·λ^{p-1}·m(λ) dλ)^{1/p}` where `m` is constant between consecutive
/// candidate levels (every size value is a candidate, so this is exact).
fn integrate_on_grid(mut candidates: Vec<f64>, p: f64, m: impl Fn(f64) -> f64) -> f64 {
    candidates.retain(|c| *c > 0.0);
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();
    let mut acc = 0.0;
    let mut prev = 0.0f64;
    let mut m_prev = m(0.0);
    for c in candidates {
        acc += m_prev * (c.powf(p) - prev.powf(p));
        prev = c;
        m_prev = m(c);
    }
    assert_eq!(m_prev, 0.0, "above the largest size nothing needs removing");
    acc.powf(1.0 / p)
}

/// Seeded random space: small rational weights, a few random generators per
/// family, singletons added so every point is covered.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteSpace {
    let full = full_mask(n);
    let weight = |rng: &mut ChaCha8Rng| -> Rational {
        rat(rng.gen_range(1..=8), rng.gen_range(1..=4))
    };
    let omega = (0..n).map(|_| weight(rng)).collect();
    let family_gen = |rng: &mut ChaCha8Rng| -> Vec<Generator> {
        let mut gens = Vec::new();
        let count = rng.gen_range(1..=n + 1);
        for _ in 0..count {
            let set = rng.gen_range(1..=full as u64) as SubsetMask;
            gens.push(Generator::new(set, weight(rng)));
        }
        let covered = gens.iter().fold(0, |acc, g| acc | g.set);
        for i in mask_points(full & !covered) {
            gens.push(Generator::new(1 << i, weight(rng)));
        }
        gens
    };
    let mu_gens = family_gen(rng);
    let nu_gens = family_gen(rng);
    FiniteSpace::new(omega, mu_gens, nu_gens).expect("random space construction is total")
}

/// Seeded nonnegative function with a mix of zeros and values in [0.1, 4].
pub fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(0.1..4.0)
            }
        })
        .collect()
}

/// Random exponent from a mix of finite values and ∞.
pub fn random_exponent(rng: &mut ChaCha8Rng, allow_infinite: bool) -> f64 {
    let finite = [0.5, 1.0, 1.5, 2.0, 3.0];
    if allow_infinite && rng.gen_bool(0.2) {
        f64::INFINITY
    } else {
        finite[rng.gen_range(0..finite.len())]
    }
}

/// Relative-tolerance comparison used across the oracle suites.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
