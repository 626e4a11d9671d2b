//! The `counterexample` subcommand: per-`m` tables of the two extremal
//! families, with engine values, closed-form references, and growth ratios.

use std::path::PathBuf;

use serde_json::json;

use outer_lp::io::{parse_rational, rational_string};
use outer_lp::norms::{outer_norm, SizeExpr, SpaceTables};
use outer_lp::settings::{
    make_counterexample_first, make_counterexample_second, FirstExtremalSetting,
};
use outer_lp::space::build_measure_table;
use outer_lp::MeasureKind;

use crate::output::{close, csv_line, emit, fnum, parse_exponent, to_pretty_body, Format};

/// Which extremal family to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// Counting `μ`, trivial `ν ≡ 1`: the double norm grows like `m`.
    First,
    /// Geometric singleton `μ` weights with `r ≤ 1`.
    Second,
}

/// Flags of the `counterexample` subcommand.
#[derive(clap::Args)]
pub struct CounterexampleArgs {
    /// Extremal family.
    #[arg(long, value_enum)]
    family: Family,
    /// Smallest ground-set size.
    #[arg(long, default_value_t = 1)]
    m_min: usize,
    /// Largest ground-set size (engine tables need `m ≤ 12`).
    #[arg(long, default_value_t = 8)]
    m_max: usize,
    /// Inner exponent as a rational string (default `2` for the first
    /// family, `1/2` for the second; the second family needs `r ≤ 1` with
    /// `2/r` integer).
    #[arg(long)]
    r: Option<String>,
    /// Optional outer exponent: adds a general double-norm column with its
    /// growth floor (first family only; needs `--q`).
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    /// Optional middle exponent for the general double-norm column.
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

struct Row {
    m: usize,
    cells: Vec<(&'static str, String)>,
    passed: bool,
}

fn check_range(args: &CounterexampleArgs) -> anyhow::Result<()> {
    if args.m_min == 0 || args.m_min > args.m_max {
        anyhow::bail!("need 1 ≤ m-min ≤ m-max");
    }
    if args.m_max > 12 {
        anyhow::bail!("engine tables are limited to m ≤ 12");
    }
    Ok(())
}

fn first_rows(args: &CounterexampleArgs) -> anyhow::Result<(Vec<Row>, String)> {
    let r_rat = parse_rational(args.r.as_deref().unwrap_or("2"))?;
    let r = *r_rat.numer() as f64 / *r_rat.denom() as f64;
    let general = match (args.p, args.q) {
        (Some(p), Some(q)) => Some((p, q)),
        (None, None) => None,
        _ => anyhow::bail!("the general column needs both --p and --q"),
    };
    let mut rows = Vec::new();
    for m in args.m_min..=args.m_max {
        let setting = make_counterexample_first(m)?;
        let space = &setting.space;
        let mu = build_measure_table(space, MeasureKind::Mu, space.len())?;
        let nu = build_measure_table(space, MeasureKind::Nu, space.len())?;
        let tables = SpaceTables { mu: &mu, nu: &nu };
        let single = outer_norm(space, tables, &setting.f, 1.0, SizeExpr::Inner { r })?.value;
        let single_ref = setting.single_norm(r)?;
        let double = outer_norm(space, tables, &setting.f, 1.0, SizeExpr::Outer { q: 1.0, r })?
            .value;
        let double_ref = setting.collapsed_double_norm(r)?;
        let ratio = double / single;
        let mut passed = close(single, single_ref) && close(double, double_ref);
        let mut cells = vec![
            ("single", fnum(single)),
            ("singleRef", fnum(single_ref)),
            ("double", fnum(double)),
            ("doubleRef", fnum(double_ref)),
            ("ratio", fnum(ratio)),
        ];
        if let Some((p, q)) = general {
            let value =
                outer_norm(space, tables, &setting.f, p, SizeExpr::Outer { q, r })?.value;
            let exponent = FirstExtremalSetting::growth_exponent(p, q, r);
            let floor = FirstExtremalSetting::growth_constant(p, q, r)
                * (m as f64).powf(exponent);
            passed &= value >= floor * (1.0 - 1e-9);
            cells.push(("general", fnum(value)));
            cells.push(("growthFloor", fnum(floor)));
        }
        rows.push(Row { m, cells, passed });
    }
    Ok((rows, rational_string(&r_rat)))
}

fn second_rows(args: &CounterexampleArgs) -> anyhow::Result<(Vec<Row>, String)> {
    if args.p.is_some() || args.q.is_some() {
        anyhow::bail!("the general column applies to the first family only");
    }
    let r_rat = parse_rational(args.r.as_deref().unwrap_or("1/2"))?;
    let r = *r_rat.numer() as f64 / *r_rat.denom() as f64;
    let mut rows = Vec::new();
    for m in args.m_min..=args.m_max {
        let setting = make_counterexample_second(m, &r_rat)?;
        let space = &setting.space;
        let mu = build_measure_table(space, MeasureKind::Mu, space.len())?;
        let nu = build_measure_table(space, MeasureKind::Nu, space.len())?;
        let tables = SpaceTables { mu: &mu, nu: &nu };
        let single = outer_norm(space, tables, &setting.f, 1.0, SizeExpr::Inner { r })?.value;
        let single_ref = setting.single_norm();
        let double = outer_norm(space, tables, &setting.f, 1.0, SizeExpr::Outer { q: 1.0, r })?
            .value;
        let double_exact = setting.double_norm_exact();
        let double_exact_f64 = *double_exact.numer() as f64 / *double_exact.denom() as f64;
        let upper = setting.upper_constant();
        let upper_f64 = (*upper.numer() as f64 / *upper.denom() as f64) * m as f64;
        let passed = close(single, single_ref)
            && close(double, double_exact_f64)
            && double <= upper_f64 * (1.0 + 1e-9);
        rows.push(Row {
            m,
            cells: vec![
                ("single", fnum(single)),
                ("singleRef", fnum(single_ref)),
                ("double", fnum(double)),
                ("doubleExact", rational_string(&double_exact)),
                ("upper", fnum(upper_f64)),
                ("ratio", fnum(double / m as f64)),
            ],
            passed,
        });
    }
    Ok((rows, rational_string(&r_rat)))
}

/// Runs the subcommand; `Ok(true)` means every row matched its references.
pub fn run(args: &CounterexampleArgs) -> anyhow::Result<bool> {
    check_range(args)?;
    let (rows, r_text) = match args.family {
        Family::First => first_rows(args)?,
        Family::Second => second_rows(args)?,
    };
    let all_pass = rows.iter().all(|row| row.passed);
    let family = match args.family {
        Family::First => "first",
        Family::Second => "second",
    };
    let body = match args.format {
        Format::Csv => {
            let mut header = vec!["m".to_string()];
            header.extend(rows[0].cells.iter().map(|(name, _)| name.to_string()));
            header.push("passed".into());
            let mut body = csv_line(&header);
            for row in &rows {
                let mut fields = vec![row.m.to_string()];
                fields.extend(row.cells.iter().map(|(_, value)| value.clone()));
                fields.push(row.passed.to_string());
                body.push_str(&csv_line(&fields));
            }
            body
        }
        Format::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut object = serde_json::Map::new();
                    object.insert("m".into(), json!(row.m));
                    for (name, value) in &row.cells {
                        object.insert((*name).into(), json!(value));
                    }
                    object.insert("passed".into(), json!(row.passed));
                    serde_json::Value::Object(object)
                })
                .collect();
            to_pretty_body(&json!({
                "command": "counterexample",
                "family": family,
                "r": r_text,
                "rows": rows_json,
                "allPass": all_pass,
            }))
        }
    };
    let summary = format!(
        "counterexample {family}: {} rows, r = {r_text}, all references matched: {all_pass}",
        rows.len()
    );
    emit(&args.out, &body, &summary)?;
    Ok(all_pass)
}
