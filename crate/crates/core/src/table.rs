//! The reference table of drift bounds: `q ∈ {3, 5, 10, 20}` against
//! `p ∈ {4/5, 2/3, 1/2, 1/4}`, with the printed reference values.

use serde::Serialize;

use crate::analytic::{self, BoundsReport, DriftBounds, ModelParams};
use crate::error::Result;

pub const TABLE_Q: [u32; 4] = [3, 5, 10, 20];
/// `p` as exact fractions, in table order.
pub const TABLE_P: [(u32, u32); 4] = [(4, 5), (2, 3), (1, 2), (1, 4)];

pub const COLUMNS: [&str; 5] = [
    "projection_drift",
    "ell_low",
    "ell_low2",
    "ell_up",
    "rel_precision",
];

/// Reference values as printed, in the order of [`COLUMNS`].
#[rustfmt::skip]
pub const REFERENCE: [(u32, (u32, u32), [&str; 5]); 16] = [
    (3, (4, 5), ["0.067", "0.145098", "0.144410", "0.157358", "0.01314"]),
    (3, (2, 3), ["0.111", "0.234567", "0.233467", "0.253778", "0.02161"]),
    (3, (1, 2), ["0.167", "0.333", "0.333", "0.359733", "0.03167"]),
    (3, (1, 4), ["0.25", "0.428571", "0.438050", "0.461289", "0.03099"]),
    (5, (4, 5), ["0.12", "0.216", "0.215942", "0.221533", "0.00629"]),
    (5, (2, 3), ["0.2", "0.347368", "0.347629", "0.355735", "0.010459"]),
    (5, (1, 2), ["0.3", "0.490909", "0.492585", "0.501825", "0.01559"]),
    (5, (1, 4), ["0.45", "0.635294", "0.641344", "0.647154", "0.01056"]),
    (10, (4, 5), ["0.16", "0.256", "0.256029", "0.257516", "0.001805"]),
    (10, (2, 3), ["0.267", "0.412121", "0.412311", "0.414351", "0.003040"]),
    (10, (1, 2), ["0.4", "0.584615", "0.585277", "0.587408", "0.00465"]),
    (10, (1, 4), ["0.6", "0.771429", "0.773099", "0.774202", "0.00276"]),
    (20, (4, 5), ["0.18", "0.273176", "0.273189", "0.273569", "0.0004789"]),
    (20, (2, 3), ["0.3", "0.440425", "0.440487", "0.440994", "0.0008128"]),
    (20, (1, 2), ["0.45", "0.626785", "0.626975", "0.627483", "0.001269"]),
    (20, (1, 4), ["0.675", "0.836413", "0.836835", "0.837079", "0.00075"]),
];

/// Absolute tolerance for a printed cell: half a unit in the sixth decimal
/// for six-decimal bound columns, `5·10⁻⁴` otherwise.
pub fn tolerance(column: &str, printed: &str) -> f64 {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.len());
    if column != "rel_precision" && decimals >= 6 {
        5e-6
    } else {
        5e-4
    }
}

/// All table rows in table order.
pub fn table_reports() -> Result<Vec<BoundsReport>> {
    table_params().map(analytic::bounds_report).collect()
}

fn table_params() -> impl Iterator<Item = ModelParams> {
    TABLE_Q.into_iter().flat_map(|q| {
        TABLE_P.into_iter().map(move |(num, den)| {
            ModelParams::new(q, num as f64 / den as f64).expect("table grid is valid")
        })
    })
}

/// Header plus sixteen rows.
pub fn table_csv() -> Result<String> {
    let mut out = String::from(BoundsReport::CSV_HEADER);
    out.push('\n');
    for report in table_reports()? {
        out.push_str(&report.csv_row());
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub q: u32,
    pub p: String,
    pub column: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares every reference cell with values from `bounds`.
pub fn compare_with_reference<F>(bounds: F) -> Result<Vec<CellCheck>>
where
    F: Fn(ModelParams) -> Result<DriftBounds>,
{
    let mut checks = Vec::with_capacity(16 * COLUMNS.len());
    for (q, (num, den), cells) in REFERENCE {
        let params = ModelParams::new(q, num as f64 / den as f64)?;
        let b = bounds(params)?;
        let actual = [
            analytic::projection_drift(params),
            b.ell_low,
            b.ell_low2,
            b.ell_up,
            b.rel_precision,
        ];
        for ((column, printed), actual) in COLUMNS.into_iter().zip(cells).zip(actual) {
            let expected: f64 = printed.parse().expect("reference cells are numbers");
            let tolerance = tolerance(column, printed);
            checks.push(CellCheck {
                q,
                p: format!("{num}/{den}"),
                column,
                expected,
                actual,
                tolerance,
                pass: (actual - expected).abs() <= tolerance,
            });
        }
    }
    Ok(checks)
}
