//! JSON reading and writing for every artifact the engines exchange.
//!
//! # File grammar
//!
//! All values that must stay exact are strings; plain JSON numbers appear
//! only where binary64 is the native representation (function values, norm
//! values, breakpoints).
//!
//! * **rational**: `"3"`, `"-2"`, or `"7/2"` — an integer numerator,
//!   optionally followed by `/` and a positive integer denominator.
//! * **mask**: lowercase hex string `"0x2d"` (the `0x` prefix is optional on
//!   input) encoding a subset of the ground set; bit `i` is point `i`.
//! * **space file**:
//!   `{"points": n, "omega": [rational; n],`
//!   `"muGen": [{"mask": mask, "sigma": rational}],`
//!   `"nuGen": [{"mask": mask, "tau": rational}]}`.
//! * **function file**: JSON array of `n` nonnegative numbers aligned with
//!   the space's point order.
//! * **covering file**: `{"assignRule": "identity"|"partition"|"explicit",`
//!   `"family": [mask], "phi": rational, "table": {mask: [index]}}` — the
//!   family must be empty for `identity`, the table is required exactly for
//!   `explicit`.
//! * **setting descriptor**: tagged by `"kind"`:
//!   `{"kind": "threeMeasures", "n": 5, "seed": 7}`,
//!   `{"kind": "cartesian", "sizes": [2,2,2], "weights": [[rational]; 3]?, "seed": 7}`,
//!   `{"kind": "ce1", "m": 4}`,
//!   `{"kind": "ce2", "m": 3, "r": rational}`,
//!   `{"kind": "dyadic", "j": 1}`.
//! * **tile function**: object mapping `"m,l,n"` triple keys to nonnegative
//!   numbers; omitted tiles are zero.
//! * **norm result**: `{"value": v, "breakpoints": [λ...],`
//!   `"plateaus": [rational...]}` with one more plateau than breakpoints,
//!   the last plateau `0`.
//! * **decomposition**: `{"variant": "interior"|"canopy"|"qGeqR"|"psi",`
//!   `"psiBase": b?, "scaleExp": s, "levels": [{"k": k, "E": mask,`
//!   `"F": mask, "pieces": [mask], "properties": [...]}]}` — empty levels
//!   are never emitted, and `psiBase` only for the `psi` variant.
//! * **verdicts**: `{"holds": bool, "checkedExhaustively": bool,`
//!   `"samples": n, "witness": {...}?}` with witnesses spelling out their
//!   masks under the same hex encoding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conditions::{AssignRule, ConditionVerdict, CoveringSpec, Witness};
use crate::decompose::{
    DecompositionReport, ExteriorDecomposition, ExteriorVariant, InteriorDecomposition,
    PropertyCheck,
};
use crate::duality::DualityReport;
use crate::dyadic::{make_dyadic_discrete, DyadicSetting, GeometryVerdict};
use crate::norms::{NormResult, StepProfile};
use crate::settings::{
    make_cartesian, make_counterexample_first, make_counterexample_second, make_three_measures,
    CartesianSetting, FirstExtremalSetting, SecondExtremalSetting, ThreeMeasureSetting,
};
use crate::space::{CaratheodoryVerdict, Generator};
use crate::{Error, FiniteSpace, MeasureKind, Rational, Result, SubsetMask};

// ---------------------------------------------------------------------------
// Scalar codecs.

/// Renders a rational as `"n"` or `"n/d"`.
pub fn rational_string(value: &Rational) -> String {
    value.to_string()
}

/// Parses `"n"` or `"n/d"` with a positive denominator.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("malformed rational {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: i128 = num.trim().parse().map_err(|_| bad())?;
    let den: i128 = den.trim().parse().map_err(|_| bad())?;
    if den <= 0 {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Renders a subset mask as lowercase hex with a `0x` prefix.
pub fn mask_hex(mask: SubsetMask) -> String {
    format!("{mask:#x}")
}

/// Parses a hex mask and checks it fits a ground set of `points` elements.
pub fn parse_mask(text: &str, points: usize) -> Result<SubsetMask> {
    let digits = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")).unwrap_or(text);
    let mask = SubsetMask::from_str_radix(digits, 16)
        .map_err(|_| Error::InvalidInput(format!("malformed mask {text:?}")))?;
    if points < SubsetMask::BITS as usize && mask >> points != 0 {
        return Err(Error::InvalidInput(format!(
            "mask {text:?} uses points beyond the {points}-element ground set"
        )));
    }
    Ok(mask)
}

fn parse_error(stage: &str, err: serde_json::Error) -> Error {
    Error::InvalidInput(format!("{stage}: {err}"))
}

/// Pretty-prints a JSON value with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Space files.

#[derive(Serialize, Deserialize)]
struct MuGenFile {
    mask: String,
    sigma: String,
}

#[derive(Serialize, Deserialize)]
struct NuGenFile {
    mask: String,
    tau: String,
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    points: usize,
    omega: Vec<String>,
    #[serde(rename = "muGen")]
    mu_gen: Vec<MuGenFile>,
    #[serde(rename = "nuGen")]
    nu_gen: Vec<NuGenFile>,
}

/// Serializes a space to the space-file grammar.
pub fn write_space(space: &FiniteSpace) -> String {
    let file = SpaceFile {
        points: space.len(),
        omega: space.omega().iter().map(rational_string).collect(),
        mu_gen: space
            .generators(MeasureKind::Mu)
            .iter()
            .map(|g| MuGenFile {
                mask: mask_hex(g.set),
                sigma: rational_string(&g.weight),
            })
            .collect(),
        nu_gen: space
            .generators(MeasureKind::Nu)
            .iter()
            .map(|g| NuGenFile {
                mask: mask_hex(g.set),
                tau: rational_string(&g.weight),
            })
            .collect(),
    };
    to_pretty(&serde_json::to_value(file).expect("space file"))
}

/// Parses a space file and rebuilds the validated space.
pub fn read_space(text: &str) -> Result<FiniteSpace> {
    let file: SpaceFile =
        serde_json::from_str(text).map_err(|e| parse_error("space file", e))?;
    if file.omega.len() != file.points {
        return Err(Error::InvalidInput(format!(
            "omega lists {} weights for {} points",
            file.omega.len(),
            file.points
        )));
    }
    let omega = file
        .omega
        .iter()
        .map(|w| parse_rational(w))
        .collect::<Result<Vec<_>>>()?;
    let mu = file
        .mu_gen
        .iter()
        .map(|g| Ok(Generator::new(parse_mask(&g.mask, file.points)?, parse_rational(&g.sigma)?)))
        .collect::<Result<Vec<_>>>()?;
    let nu = file
        .nu_gen
        .iter()
        .map(|g| Ok(Generator::new(parse_mask(&g.mask, file.points)?, parse_rational(&g.tau)?)))
        .collect::<Result<Vec<_>>>()?;
    FiniteSpace::new(omega, mu, nu)
}

// ---------------------------------------------------------------------------
// Function files.

/// Serializes point values as a JSON array.
pub fn write_function(f: &[f64]) -> String {
    to_pretty(&json!(f))
}

/// Parses a function file and checks its length against the space.
pub fn read_function(text: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> =
        serde_json::from_str(text).map_err(|e| parse_error("function file", e))?;
    if values.len() != expected {
        return Err(Error::FunctionLength {
            got: values.len(),
            expected,
        });
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// Covering files.

#[derive(Serialize, Deserialize)]
struct CoveringFile {
    #[serde(rename = "assignRule")]
    assign_rule: String,
    family: Vec<String>,
    phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<BTreeMap<String, Vec<usize>>>,
}

/// Serializes a covering specification.
pub fn write_covering(spec: &CoveringSpec) -> String {
    let (rule, table) = match &spec.rule {
        AssignRule::Identity => ("identity", None),
        AssignRule::Partition => ("partition", None),
        AssignRule::Explicit(map) => (
            "explicit",
            Some(
                map.iter()
                    .map(|(mask, indices)| (mask_hex(*mask), indices.clone()))
                    .collect(),
            ),
        ),
    };
    let file = CoveringFile {
        assign_rule: rule.to_string(),
        family: spec.family.iter().map(|m| mask_hex(*m)).collect(),
        phi: rational_string(&spec.phi),
        table,
    };
    to_pretty(&serde_json::to_value(file).expect("covering file"))
}

/// Parses a covering file and validates it against the space.
pub fn read_covering(text: &str, space: &FiniteSpace) -> Result<CoveringSpec> {
    let file: CoveringFile =
        serde_json::from_str(text).map_err(|e| parse_error("covering file", e))?;
    let family = file
        .family
        .iter()
        .map(|m| parse_mask(m, space.len()))
        .collect::<Result<Vec<_>>>()?;
    let phi = parse_rational(&file.phi)?;
    match file.assign_rule.as_str() {
        "identity" => {
            if !family.is_empty() {
                return Err(Error::InvalidInput(
                    "the identity rule carries no explicit family".into(),
                ));
            }
            let mut spec = CoveringSpec::identity();
            spec.phi = phi;
            Ok(spec)
        }
        "partition" => CoveringSpec::partition(space, family, phi),
        "explicit" => {
            let table = file
                .table
                .ok_or_else(|| Error::InvalidInput("explicit rule needs a table".into()))?
                .into_iter()
                .map(|(mask, indices)| Ok((parse_mask(&mask, space.len())?, indices)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            CoveringSpec::explicit(family, table, phi)
        }
        other => Err(Error::InvalidInput(format!("unknown assignRule {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Setting descriptors.

/// A declarative recipe for one of the ready-made settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SettingDescriptor {
    /// Singleton-generated `μ`, `ν`, and `ω` with seeded random weights.
    #[serde(rename = "threeMeasures")]
    ThreeMeasures {
        /// Ground-set size.
        n: usize,
        /// Weight seed.
        seed: u64,
    },
    /// Product of three weighted axes with slab/column generators.
    #[serde(rename = "cartesian")]
    Cartesian {
        /// Axis cardinalities.
        sizes: [usize; 3],
        /// Explicit axis weights (rational strings); random when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<[Vec<String>; 3]>,
        /// Weight seed, ignored when weights are given.
        seed: u64,
    },
    /// First extremal family: counting `μ`, trivial `ν ≡ 1`.
    #[serde(rename = "ce1")]
    First {
        /// Ground-set size.
        m: usize,
    },
    /// Second extremal family: geometric singleton `μ` weights.
    #[serde(rename = "ce2")]
    Second {
        /// Ground-set size.
        m: usize,
        /// Inner exponent in `(0, 1]` as a rational string.
        r: String,
    },
    /// Truncated dyadic strip/tree setting.
    #[serde(rename = "dyadic")]
    Dyadic {
        /// Truncation parameter.
        j: u32,
    },
}

/// Serializes a setting descriptor.
pub fn write_descriptor(descriptor: &SettingDescriptor) -> String {
    to_pretty(&serde_json::to_value(descriptor).expect("descriptor"))
}

/// Parses a setting descriptor.
pub fn read_descriptor(text: &str) -> Result<SettingDescriptor> {
    serde_json::from_str(text).map_err(|e| parse_error("setting descriptor", e))
}

/// A constructed setting, dispatched over the descriptor kinds.
pub enum LoadedSetting {
    /// Singleton-generated space with the identity covering.
    ThreeMeasures(ThreeMeasureSetting),
    /// Product space with the slab covering.
    Cartesian(CartesianSetting),
    /// First extremal family.
    First(FirstExtremalSetting),
    /// Second extremal family.
    Second(SecondExtremalSetting),
    /// Dyadic strip/tree setting with structured engines.
    Dyadic(DyadicSetting),
}

impl LoadedSetting {
    /// Descriptor tag this setting was built from.
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedSetting::ThreeMeasures(_) => "threeMeasures",
            LoadedSetting::Cartesian(_) => "cartesian",
            LoadedSetting::First(_) => "ce1",
            LoadedSetting::Second(_) => "ce2",
            LoadedSetting::Dyadic(_) => "dyadic",
        }
    }

    /// The underlying finite space, absent for the structured dyadic setting.
    pub fn space(&self) -> Option<&FiniteSpace> {
        match self {
            LoadedSetting::ThreeMeasures(s) => Some(&s.space),
            LoadedSetting::Cartesian(s) => Some(&s.space),
            LoadedSetting::First(s) => Some(&s.space),
            LoadedSetting::Second(s) => Some(&s.space),
            LoadedSetting::Dyadic(_) => None,
        }
    }

    /// The attached covering, absent for the structured dyadic setting.
    pub fn covering(&self) -> Option<&CoveringSpec> {
        match self {
            LoadedSetting::ThreeMeasures(s) => Some(&s.covering),
            LoadedSetting::Cartesian(s) => Some(&s.covering),
            LoadedSetting::First(s) => Some(&s.covering),
            LoadedSetting::Second(s) => Some(&s.covering),
            LoadedSetting::Dyadic(_) => None,
        }
    }

    /// The structured dyadic setting, when that is what was built.
    pub fn dyadic(&self) -> Option<&DyadicSetting> {
        match self {
            LoadedSetting::Dyadic(s) => Some(s),
            _ => None,
        }
    }

    /// Number of points of the ground set.
    pub fn len(&self) -> usize {
        match self {
            LoadedSetting::Dyadic(s) => s.len(),
            _ => self.space().expect("non-dyadic settings carry a space").len(),
        }
    }

    /// Whether the ground set is empty (it never is for valid settings).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The natural test function: the attached witness for the extremal
    /// families, all-ones otherwise.
    pub fn default_function(&self) -> Vec<f64> {
        match self {
            LoadedSetting::First(s) => s.f.clone(),
            LoadedSetting::Second(s) => s.f.clone(),
            _ => vec![1.0; self.len()],
        }
    }
}

/// Builds the setting a descriptor describes.
pub fn build_setting(descriptor: &SettingDescriptor) -> Result<LoadedSetting> {
    match descriptor {
        SettingDescriptor::ThreeMeasures { n, seed } => {
            Ok(LoadedSetting::ThreeMeasures(make_three_measures(*n, *seed)?))
        }
        SettingDescriptor::Cartesian {
            sizes,
            weights,
            seed,
        } => {
            let weights = match weights {
                None => None,
                Some(per_axis) => {
                    let mut parsed: [Vec<Rational>; 3] = Default::default();
                    for (axis, texts) in parsed.iter_mut().zip(per_axis.iter()) {
                        *axis = texts
                            .iter()
                            .map(|w| parse_rational(w))
                            .collect::<Result<Vec<_>>>()?;
                    }
                    Some(parsed)
                }
            };
            Ok(LoadedSetting::Cartesian(make_cartesian(
                *sizes, weights, *seed,
            )?))
        }
        SettingDescriptor::First { m } => {
            Ok(LoadedSetting::First(make_counterexample_first(*m)?))
        }
        SettingDescriptor::Second { m, r } => {
            let r = parse_rational(r)?;
            Ok(LoadedSetting::Second(make_counterexample_second(*m, &r)?))
        }
        SettingDescriptor::Dyadic { j } => Ok(LoadedSetting::Dyadic(make_dyadic_discrete(*j)?)),
    }
}

// ---------------------------------------------------------------------------
// Tile functions.

/// Serializes tile values as a `"m,l,n"`-keyed object, omitting zeros.
pub fn write_tile_function(setting: &DyadicSetting, values: &[f64]) -> Result<String> {
    if values.len() != setting.len() {
        return Err(Error::FunctionLength {
            got: values.len(),
            expected: setting.len(),
        });
    }
    let mut map = serde_json::Map::new();
    for (index, value) in values.iter().enumerate() {
        if *value != 0.0 {
            let p = setting.points()[index];
            map.insert(format!("{},{},{}", p.m, p.l, p.n), json!(value));
        }
    }
    Ok(to_pretty(&Value::Object(map)))
}

/// Parses a `"m,l,n"`-keyed tile function into a dense value vector.
pub fn read_tile_function(text: &str, setting: &DyadicSetting) -> Result<Vec<f64>> {
    let map: BTreeMap<String, f64> =
        serde_json::from_str(text).map_err(|e| parse_error("tile function", e))?;
    let mut values = vec![0.0; setting.len()];
    for (key, value) in map {
        let parts: Vec<&str> = key.split(',').collect();
        let bad = || Error::InvalidInput(format!("malformed tile key {key:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let m: i64 = parts[0].trim().parse().map_err(|_| bad())?;
        let l: i32 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: i64 = parts[2].trim().parse().map_err(|_| bad())?;
        let index = setting
            .index_of(crate::dyadic::DyadicIndex { m, l, n })
            .ok_or_else(|| {
                Error::InvalidInput(format!("tile {key:?} is outside the truncated setting"))
            })?;
        values[index] = value;
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// Results.

/// Serializes a step profile as breakpoint and plateau arrays.
pub fn profile_value(profile: &StepProfile) -> Value {
    json!({
        "breakpoints": profile.breakpoints,
        "plateaus": profile.values.iter().map(rational_string).collect::<Vec<_>>(),
    })
}

/// Serializes a norm result, flattening the profile when present.
pub fn norm_result_value(result: &NormResult) -> Value {
    match &result.profile {
        Some(profile) => json!({
            "value": result.value,
            "breakpoints": profile.breakpoints,
            "plateaus": profile.values.iter().map(rational_string).collect::<Vec<_>>(),
        }),
        None => json!({
            "value": result.value,
            "breakpoints": [],
            "plateaus": [],
        }),
    }
}

/// Serializes one verified inequality.
pub fn property_value(check: &PropertyCheck) -> Value {
    json!({
        "name": check.name,
        "lhs": check.lhs,
        "rhs": check.rhs,
        "passed": check.passed,
    })
}

fn level_properties(report: Option<&DecompositionReport>, tag: &str) -> Value {
    match report {
        None => json!([]),
        Some(report) => json!(report
            .properties
            .iter()
            .filter(|c| c.name.contains(tag))
            .map(property_value)
            .collect::<Vec<_>>()),
    }
}

/// Serializes an interior decomposition, with per-level checks when a
/// verification report is supplied.
pub fn interior_value(
    decomposition: &InteriorDecomposition,
    report: Option<&DecompositionReport>,
) -> Value {
    let levels: Vec<Value> = decomposition
        .levels
        .iter()
        .map(|level| {
            json!({
                "k": level.j,
                "E": mask_hex(level.u),
                "F": mask_hex(decomposition.v(level.j)),
                "pieces": level.pieces.iter().map(|p| mask_hex(*p)).collect::<Vec<_>>(),
                "properties": level_properties(report, &format!("(j={})", level.j)),
            })
        })
        .collect();
    json!({
        "variant": "interior",
        "scaleExp": decomposition.scale_exp,
        "q": decomposition.q,
        "r": decomposition.r,
        "levels": levels,
        "allPass": report.map(|r| r.all_pass),
    })
}

/// Serializes an exterior decomposition, with per-level checks when a
/// verification report is supplied.
pub fn exterior_value(
    decomposition: &ExteriorDecomposition,
    report: Option<&DecompositionReport>,
) -> Value {
    let variant = match decomposition.variant {
        ExteriorVariant::Canopy => "canopy",
        ExteriorVariant::QGeqR => "qGeqR",
        ExteriorVariant::Psi => "psi",
    };
    let levels: Vec<Value> = decomposition
        .levels
        .iter()
        .map(|level| {
            json!({
                "k": level.k,
                "E": mask_hex(level.e),
                "F": mask_hex(level.f),
                "pieces": level.pieces.iter().map(|p| mask_hex(*p)).collect::<Vec<_>>(),
                "properties": level_properties(report, &format!("(k={})", level.k)),
            })
        })
        .collect();
    let mut value = json!({
        "variant": variant,
        "scaleExp": decomposition.scale_exp,
        "p": decomposition.p,
        "q": decomposition.q,
        "r": decomposition.r,
        "levels": levels,
        "allPass": report.map(|r| r.all_pass),
    });
    if decomposition.variant == ExteriorVariant::Psi {
        value["psiBase"] = json!(decomposition.base);
    }
    value
}

// ---------------------------------------------------------------------------
// Verdicts.

fn witness_value(witness: &Witness) -> Value {
    match witness {
        Witness::Parent { a, extension } => json!({
            "type": "parent",
            "a": mask_hex(*a),
            "extension": extension.map(mask_hex),
        }),
        Witness::Extension { collection, d, u } => json!({
            "type": "extension",
            "collection": collection.iter().map(|m| mask_hex(*m)).collect::<Vec<_>>(),
            "d": mask_hex(*d),
            "u": mask_hex(*u),
        }),
        Witness::Pruning { collection, f } => json!({
            "type": "pruning",
            "collection": collection.iter().map(|m| mask_hex(*m)).collect::<Vec<_>>(),
            "f": f.map(mask_hex),
        }),
    }
}

/// Serializes a structural-condition verdict.
pub fn verdict_value(verdict: &ConditionVerdict) -> Value {
    json!({
        "holds": verdict.holds,
        "checkedExhaustively": verdict.checked_exhaustively,
        "samples": verdict.samples,
        "witness": verdict.witness.as_ref().map(witness_value),
    })
}

/// Serializes a summation-bound verdict.
pub fn caratheodory_value(verdict: &CaratheodoryVerdict) -> Value {
    json!({
        "holds": verdict.holds,
        "checkedExhaustively": verdict.checked_exhaustively,
        "witness": verdict.witness.map(mask_hex),
    })
}

/// Serializes a structured-setting geometry verdict.
pub fn geometry_value(verdict: &GeometryVerdict) -> Value {
    json!({
        "holds": verdict.holds,
        "checkedExhaustively": verdict.checked_exhaustively,
        "samples": verdict.samples,
        "detail": verdict.detail,
    })
}

/// Serializes a dual-witness verification report.
pub fn duality_value(report: &DualityReport) -> Value {
    json!({
        "pairing": report.pairing,
        "fNorm": report.f_norm,
        "gNorm": report.g_norm,
        "cLower": report.c_lower,
        "cUpper": report.c_upper,
        "ratio": report.ratio,
        "allPass": report.all_pass,
        "properties": report.properties.iter().map(property_value).collect::<Vec<_>>(),
    })
}
