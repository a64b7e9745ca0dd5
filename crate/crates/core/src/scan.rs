//! Parameter sweeps behind the five standard figures, rendered as CSV or JSON.
//!
//! Every row is assembled from library calls; the only arithmetic done here
//! is forming ratios.

use rayon::prelude::*;
use serde_json::{json, Map, Number, Value};

use crate::helstrom::{self, HelstromConfig};
use crate::model::{kennedy_angle, PulsePair};
use crate::receivers::{self, angle_grid, angle_sweep};
use crate::{Error, Result, VERSION};

/// Significant digits of every rendered float.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const DEFAULT_REFERENCE_INTENSITIES: [f64; 4] = [1.0, 2.0, 4.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    /// An undefined value, e.g. a 0/0 ratio at zero signal.
    Null,
}

impl Cell {
    fn num_or_null(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Null
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Map<String, Value>,
}

impl Table {
    fn new(columns: Vec<&'static str>, rows: Vec<Vec<Cell>>, figure: u8) -> Self {
        let mut metadata = Map::new();
        metadata.insert("figure".into(), json!(figure));
        metadata.insert("library_version".into(), json!(VERSION));
        Self {
            columns,
            rows,
            metadata,
        }
    }

    fn meta(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.into(), value);
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_significant(*x, SIGNIFICANT_DIGITS),
                    Cell::Text(s) => s.clone(),
                    Cell::Null => "null".to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"metadata": {...}, "rows": [{column: value, ...}, ...]}` with floats
    /// rounded to the same digits as the CSV.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(name, cell)| ((*name).to_string(), cell_to_json(cell)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "metadata": Value::Object(self.metadata.clone()), "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

fn cell_to_json(cell: &Cell) -> Value {
    match cell {
        Cell::Num(x) => {
            let rounded: f64 = format_significant(*x, SIGNIFICANT_DIGITS)
                .parse()
                .expect("formatted float parses");
            Number::from_f64(rounded)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Null => Value::Null,
    }
}

/// C-style `%.{digits}g`: fixed notation for exponents in `[-5, digits)`,
/// scientific otherwise, trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn ratio(num: f64, den: f64) -> Cell {
    if den == 0.0 {
        Cell::Null
    } else {
        Cell::num_or_null(num / den)
    }
}

/// `points` values spaced evenly in log10 between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::Config(format!(
            "bad log grid [{lo}, {hi}] with {points} points"
        )));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)
            }
        })
        .collect())
}

/// 64 signal intensities from 1e-3 to 1, log-spaced.
pub fn default_signal_grid() -> Vec<f64> {
    log_grid(1e-3, 1.0, 64).expect("static grid")
}

/// Reference intensities 0, 0.25, ..., 20.
pub fn default_reference_grid() -> Vec<f64> {
    (0..=80).map(|i| f64::from(i) * 0.25).collect()
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Config(format!(
            "{name} grid value {bad} is not a non-negative number"
        )));
    }
    Ok(())
}

fn pairs(alpha2_grid: &[f64], beta2_list: &[f64]) -> Result<Vec<PulsePair>> {
    check_grid("alpha2", alpha2_grid)?;
    check_grid("beta2", beta2_list)?;
    beta2_list
        .iter()
        .flat_map(|&b2| alpha2_grid.iter().map(move |&a2| PulsePair::new(a2, b2)))
        .collect()
}

/// Kennedy receiver with finite versus infinite reference.
/// Columns: `alpha2, beta2, P_Ken, P_Ken_gen, ratio_P, D_Ken, D_Ken_gen, ratio_D`.
pub fn figure_kennedy_ratios(alpha2_grid: &[f64], beta2_list: &[f64]) -> Result<Table> {
    let rows = pairs(alpha2_grid, beta2_list)?
        .par_iter()
        .map(|p| {
            let inf = receivers::p_kennedy_asymptotic(p.alpha2())?;
            let fin = receivers::p_kennedy_generalized(p);
            Ok(ratio_row(
                p,
                inf.error_probability,
                fin.error_probability,
                inf.distinguishability,
                fin.distinguishability,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(
        vec![
            "alpha2",
            "beta2",
            "P_Ken",
            "P_Ken_gen",
            "ratio_P",
            "D_Ken",
            "D_Ken_gen",
            "ratio_D",
        ],
        rows,
        1,
    ))
}

/// Homodyne receiver with finite versus infinite reference.
/// Columns: `alpha2, beta2, P_hom, P_hom_gen, ratio_P, D_hom, D_hom_gen, ratio_D`.
pub fn figure_homodyne_ratios(
    alpha2_grid: &[f64],
    beta2_list: &[f64],
    tail_tol: f64,
) -> Result<Table> {
    let pulse_pairs = pairs(alpha2_grid, beta2_list)?;
    let results = pulse_pairs
        .par_iter()
        .map(|p| {
            let inf = receivers::p_homodyne_asymptotic(p.alpha2())?;
            let fin = receivers::p_homodyne_generalized(p, tail_tol)?;
            Ok((
                ratio_row(
                    p,
                    inf.error_probability,
                    fin.error_probability,
                    inf.distinguishability,
                    fin.distinguishability,
                ),
                fin.accuracy.truncation_bound,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let rows = results.into_iter().map(|r| r.0).collect();
    Ok(Table::new(
        vec![
            "alpha2",
            "beta2",
            "P_hom",
            "P_hom_gen",
            "ratio_P",
            "D_hom",
            "D_hom_gen",
            "ratio_D",
        ],
        rows,
        2,
    )
    .meta("tail_tol", json!(tail_tol))
    .meta("max_truncation_bound", json!(worst)))
}

fn ratio_row(p: &PulsePair, p_inf: f64, p_fin: f64, d_inf: f64, d_fin: f64) -> Vec<Cell> {
    vec![
        Cell::Num(p.alpha2()),
        Cell::Num(p.beta2()),
        Cell::Num(p_inf),
        Cell::Num(p_fin),
        ratio(p_fin, p_inf),
        Cell::Num(d_inf),
        Cell::Num(d_fin),
        ratio(d_fin, d_inf),
    ]
}

/// Error of the maximum-likelihood receiver across the splitter family, with
/// reference rows for the generalized Kennedy and homodyne receivers.
/// Columns: `series, phi_over_pi, P`; `series` is `family`, `kennedy` or `homodyne`.
pub fn figure_angle_sweep(p: &PulsePair, n_angles: usize, tail_tol: f64) -> Result<Table> {
    if n_angles < 64 {
        return Err(Error::Config(format!(
            "angle sweep needs at least 64 angles, got {n_angles}"
        )));
    }
    let grid = angle_grid(n_angles)?;
    let values = angle_sweep(p, &grid, tail_tol)?;
    let worst = values
        .iter()
        .map(|v| v.accuracy.truncation_bound)
        .fold(0.0, f64::max);
    let mut rows: Vec<Vec<Cell>> = grid
        .iter()
        .zip(&values)
        .map(|(bs, v)| {
            vec![
                Cell::Text("family".into()),
                Cell::Num(bs.phi_over_pi()),
                Cell::Num(v.error_probability),
            ]
        })
        .collect();

    let kennedy_phi = kennedy_angle(p)
        .map(|bs| Cell::Num(bs.phi_over_pi()))
        .unwrap_or(Cell::Null);
    rows.push(vec![
        Cell::Text("kennedy".into()),
        kennedy_phi,
        Cell::Num(receivers::p_kennedy_generalized(p).error_probability),
    ]);
    rows.push(vec![
        Cell::Text("homodyne".into()),
        Cell::Num(0.25),
        Cell::Num(receivers::p_homodyne_generalized(p, tail_tol)?.error_probability),
    ]);
    let figure = if p.beta2() == 10.0 { 4 } else { 3 };
    Ok(Table::new(vec!["series", "phi_over_pi", "P"], rows, figure)
        .meta("alpha2", json!(p.alpha2()))
        .meta("beta2", json!(p.beta2()))
        .meta("n_angles", json!(n_angles))
        .meta("tail_tol", json!(tail_tol))
        .meta("max_truncation_bound", json!(worst)))
}

/// Optimum distinguishability relative to its infinite-reference value `2 alpha`,
/// from the small-alpha series and optionally from the exact trace norm at a
/// given small signal intensity.
/// Columns: `beta2, D_err_over_D_min[, D_err_exact_over_D_min]`.
pub fn figure_optimal_ratio(
    beta2_grid: &[f64],
    exact_alpha2: Option<f64>,
    cfg: &HelstromConfig,
) -> Result<Table> {
    check_grid("beta2", beta2_grid)?;
    if let Some(a2) = exact_alpha2 {
        if !(a2 > 0.0 && a2.is_finite()) {
            return Err(Error::Config(format!(
                "cross-check alpha2 must be positive, got {a2}"
            )));
        }
    }
    let results = beta2_grid
        .par_iter()
        .map(|&b2| {
            let series = helstrom::small_alpha_ratio(b2)?;
            let mut row = vec![Cell::Num(b2), Cell::Num(series.value)];
            let mut bound = 0.0;
            if let Some(a2) = exact_alpha2 {
                let exact = helstrom::p_err_optimal(&PulsePair::new(a2, b2)?, cfg)?;
                bound = exact.accuracy.truncation_bound;
                row.push(Cell::Num(exact.distinguishability / (2.0 * a2.sqrt())));
            }
            Ok((row, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut columns = vec!["beta2", "D_err_over_D_min"];
    let mut table_meta = vec![("series_rel_tol", json!(1e-13))];
    if let Some(a2) = exact_alpha2 {
        columns.push("D_err_exact_over_D_min");
        table_meta.push(("exact_alpha2", json!(a2)));
        table_meta.push(("tail_tol", json!(cfg.tail_tol)));
        table_meta.push(("max_truncation_bound", json!(worst)));
    }
    let mut table = Table::new(columns, results.into_iter().map(|r| r.0).collect(), 5);
    for (k, v) in table_meta {
        table = table.meta(k, v);
    }
    Ok(table)
}

/// A figure and its grid overrides, as requested from the command line.
#[derive(Debug, Clone, Default)]
pub struct FigureRequest {
    pub id: u8,
    pub alpha2: Option<Vec<f64>>,
    pub beta2: Option<Vec<f64>>,
    pub n_angles: Option<usize>,
    pub tail_tol: Option<f64>,
}

fn single(name: &str, values: &Option<Vec<f64>>, default: f64) -> Result<f64> {
    match values.as_deref() {
        None => Ok(default),
        Some([v]) => Ok(*v),
        Some(_) => Err(Error::Config(format!(
            "this figure takes exactly one {name} value"
        ))),
    }
}

pub fn build_figure(req: &FigureRequest) -> Result<Table> {
    let tail_tol = req.tail_tol.unwrap_or(receivers::DEFAULT_TAIL_TOL);
    let signal = || req.alpha2.clone().unwrap_or_else(default_signal_grid);
    let references = || {
        req.beta2
            .clone()
            .unwrap_or_else(|| DEFAULT_REFERENCE_INTENSITIES.to_vec())
    };
    match req.id {
        1 => figure_kennedy_ratios(&signal(), &references()),
        2 => figure_homodyne_ratios(&signal(), &references(), tail_tol),
        3 | 4 => {
            let default_b2 = if req.id == 3 { 1.0 } else { 10.0 };
            let p = PulsePair::new(
                single("alpha2", &req.alpha2, 0.1)?,
                single("beta2", &req.beta2, default_b2)?,
            )?;
            let mut table = figure_angle_sweep(&p, req.n_angles.unwrap_or(256), tail_tol)?;
            table.metadata.insert("figure".into(), json!(req.id));
            Ok(table)
        }
        5 => {
            let grid = req.beta2.clone().unwrap_or_else(default_reference_grid);
            let exact = match req.alpha2.as_deref() {
                None => None,
                Some([a2]) => Some(*a2),
                Some(_) => {
                    return Err(Error::Config(
                        "figure 5 takes at most one alpha2 value".into(),
                    ))
                }
            };
            let cfg = req
                .tail_tol
                .map(HelstromConfig::with_tail_tol)
                .unwrap_or_default();
            figure_optimal_ratio(&grid, exact, &cfg)
        }
        other => Err(Error::Config(format!("unknown figure {other}; choose 1-5"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.347571964199439, 12), "0.347571964199");
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(10.0, 12), "10");
        assert_eq!(format_significant(-2.5e-7, 12), "-2.5e-07");
        assert_eq!(format_significant(1.5e13, 12), "1.5e+13");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(9.9999999999999e-3, 12), "0.01");
        assert_eq!(format_significant(123456789012.4, 12), "123456789012");
    }

    #[test]
    fn log_grid_endpoints() {
        let g = default_signal_grid();
        assert_eq!(g.len(), 64);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[63], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_signal_ratio_is_null() {
        let t = figure_homodyne_ratios(&[0.0], &[5.0], 1e-12).unwrap();
        let row = &t.rows[0];
        assert_eq!(row[2], Cell::Num(0.5));
        assert_eq!(row[3], Cell::Num(0.5));
        assert_eq!(row[7], Cell::Null);
        assert!(t.to_csv().lines().nth(1).unwrap().ends_with(",null"));
        assert!(t.to_json().contains("\"ratio_D\": null"));
    }

    #[test]
    fn csv_header_and_row_count() {
        let t = figure_kennedy_ratios(&[0.1, 0.2], &[1.0, 10.0]).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha2,beta2,P_Ken,P_Ken_gen,ratio_P,D_Ken,D_Ken_gen,ratio_D"
        );
        assert_eq!(lines.count(), 4);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_rows_mirror_columns() {
        let t = figure_kennedy_ratios(&[0.1], &[1.0]).unwrap();
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        let row = v["rows"][0].as_object().unwrap();
        let keys: Vec<&str> = row.keys().map(String::as_str).collect();
        assert_eq!(keys, t.columns);
        assert_eq!(v["metadata"]["library_version"], json!(VERSION));
        assert_eq!(row["P_Ken_gen"], json!(0.347571964199));
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(figure_kennedy_ratios(&[], &[1.0]).is_err());
        assert!(figure_kennedy_ratios(&[-0.1], &[1.0]).is_err());
        assert!(figure_angle_sweep(&PulsePair::new(0.1, 1.0).unwrap(), 10, 1e-12).is_err());
        assert!(build_figure(&FigureRequest {
            id: 7,
            ..Default::default()
        })
        .is_err());
    }
}
