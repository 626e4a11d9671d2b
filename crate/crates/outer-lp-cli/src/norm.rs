//! The `norm` subcommand: one quasi-norm evaluation with its step profile.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::{json, Value};

use outer_lp::dyadic::DyadicSetting;
use outer_lp::io::{
    build_setting, rational_string, read_descriptor, read_function, read_space,
    read_tile_function, LoadedSetting,
};
use outer_lp::norms::{outer_norm, SizeExpr, SpaceTables};
use outer_lp::space::build_measure_table;
use outer_lp::{FiniteSpace, MeasureKind, Rational};

use crate::output::{csv_line, emit, exponent_json, fnum, parse_exponent, Format};

/// Flags of the `norm` subcommand.
#[derive(clap::Args)]
pub struct NormArgs {
    /// Setting descriptor or explicit space file.
    #[arg(long)]
    setting: PathBuf,
    /// Function file: value array, or a tile map for the dyadic setting
    /// (defaults to the setting's natural witness function).
    #[arg(long)]
    function: Option<PathBuf>,
    /// Outermost exponent (integrates the super-level measure).
    #[arg(long, value_parser = parse_exponent)]
    p: f64,
    /// Middle exponent; when present the double iterated norm
    /// `L^p_μ(ℓ^q_ν(ℓ^r_ω))` is computed, otherwise the single iterated
    /// `L^p_ν(ℓ^r_ω)`.
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    /// Innermost exponent.
    #[arg(long, value_parser = parse_exponent)]
    r: f64,
    /// Exhaustive-enumeration cap for the measure tables.
    #[arg(long, default_value_t = 12)]
    exact_limit: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// What the `--setting` file resolved to.
enum Target {
    /// A descriptor-built setting.
    Setting(LoadedSetting),
    /// An explicit space file.
    Raw(FiniteSpace),
}

impl Target {
    fn kind(&self) -> &'static str {
        match self {
            Target::Setting(s) => s.kind(),
            Target::Raw(_) => "spaceFile",
        }
    }

    fn space(&self) -> Option<&FiniteSpace> {
        match self {
            Target::Setting(s) => s.space(),
            Target::Raw(space) => Some(space),
        }
    }

    fn dyadic(&self) -> Option<&DyadicSetting> {
        match self {
            Target::Setting(s) => s.dyadic(),
            Target::Raw(_) => None,
        }
    }

    fn len(&self) -> usize {
        match self {
            Target::Setting(s) => s.len(),
            Target::Raw(space) => space.len(),
        }
    }

    fn default_function(&self) -> Vec<f64> {
        match self {
            Target::Setting(s) => s.default_function(),
            Target::Raw(space) => vec![1.0; space.len()],
        }
    }
}

fn load_target(path: &PathBuf) -> anyhow::Result<Target> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sniff: Value = serde_json::from_str(&text)
        .with_context(|| format!("setting file {}", path.display()))?;
    if sniff.get("kind").is_some() {
        Ok(Target::Setting(build_setting(&read_descriptor(&text)?)?))
    } else {
        Ok(Target::Raw(read_space(&text)?))
    }
}

fn load_function(args: &NormArgs, target: &Target) -> anyhow::Result<Vec<f64>> {
    let Some(path) = &args.function else {
        return Ok(target.default_function());
    };
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sniff: Value = serde_json::from_str(&text)
        .with_context(|| format!("function file {}", path.display()))?;
    match (target.dyadic(), sniff.is_object()) {
        (Some(setting), true) => Ok(read_tile_function(&text, setting)?),
        _ => Ok(read_function(&text, target.len())?),
    }
}

/// Norm value plus profile arrays (breakpoints, exact plateau strings).
struct Computed {
    value: f64,
    breakpoints: Vec<f64>,
    plateaus: Vec<Rational>,
}

fn compute(args: &NormArgs, target: &Target, f: &[f64]) -> anyhow::Result<Computed> {
    if let Some(setting) = target.dyadic() {
        let omega = setting.unit_weights();
        let (value, profile) = match args.q {
            Some(q) => setting.double_norm(&omega, f, args.p, q, args.r)?,
            None => setting.single_norm(&omega, f, args.p, args.r)?,
        };
        return Ok(Computed {
            value,
            breakpoints: profile.breakpoints,
            plateaus: profile.values,
        });
    }
    let space = target.space().expect("non-dyadic targets carry a space");
    let mu = build_measure_table(space, MeasureKind::Mu, args.exact_limit)?;
    let nu = build_measure_table(space, MeasureKind::Nu, args.exact_limit)?;
    let tables = SpaceTables { mu: &mu, nu: &nu };
    let size = match args.q {
        Some(q) => SizeExpr::Outer { q, r: args.r },
        None => SizeExpr::Inner { r: args.r },
    };
    let result = outer_norm(space, tables, f, args.p, size)?;
    let (breakpoints, plateaus) = match result.profile {
        Some(profile) => (profile.breakpoints, profile.values),
        None => (Vec::new(), Vec::new()),
    };
    Ok(Computed {
        value: result.value,
        breakpoints,
        plateaus,
    })
}

/// Runs the subcommand; `Ok(true)` means the evaluation succeeded.
pub fn run(args: &NormArgs) -> anyhow::Result<bool> {
    let target = load_target(&args.setting)?;
    let f = load_function(args, &target)?;
    let computed = compute(args, &target, &f)?;
    let body = match args.format {
        Format::Json => {
            let mut exponents = json!({
                "p": exponent_json(args.p),
                "r": exponent_json(args.r),
            });
            if let Some(q) = args.q {
                exponents["q"] = exponent_json(q);
            }
            crate::output::to_pretty_body(&json!({
                "command": "norm",
                "setting": {"path": args.setting.display().to_string(), "kind": target.kind()},
                "exponents": exponents,
                "exactLimit": args.exact_limit,
                "result": {
                    "value": computed.value,
                    "breakpoints": computed.breakpoints,
                    "plateaus": computed.plateaus.iter().map(rational_string).collect::<Vec<_>>(),
                },
            }))
        }
        Format::Csv => {
            let mut body = csv_line(&["kind".into(), "lambda".into(), "value".into()]);
            body.push_str(&csv_line(&[
                "norm".into(),
                String::new(),
                fnum(computed.value),
            ]));
            for (i, plateau) in computed.plateaus.iter().enumerate() {
                let start = if i == 0 {
                    "0".to_string()
                } else {
                    fnum(computed.breakpoints[i - 1])
                };
                body.push_str(&csv_line(&[
                    "plateau".into(),
                    start,
                    rational_string(plateau),
                ]));
            }
            body
        }
    };
    emit(&args.out, &body, "")?;
    Ok(true)
}
