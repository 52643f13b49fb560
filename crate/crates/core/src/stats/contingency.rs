use serde::{Deserialize, Serialize};

use super::{chi2_sf, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyResult {
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
    pub cramers_v: f64,
    pub n: f64,
    pub expected: Vec<Vec<f64>>,
    /// Adjusted standardized residuals; `None` where undefined.
    pub residuals: Vec<Vec<Option<f64>>>,
}

struct Margins {
    rows: Vec<f64>,
    cols: Vec<f64>,
    total: f64,
}

fn margins(table: &[Vec<f64>]) -> Result<Margins, StatsError> {
    if table.is_empty() || table[0].is_empty() {
        return Err(StatsError::InvalidArgument("empty table".into()));
    }
    let c = table[0].len();
    if table.iter().any(|r| r.len() != c) {
        return Err(StatsError::InvalidArgument("ragged table".into()));
    }
    if table.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(StatsError::InvalidArgument("counts must be finite and non-negative".into()));
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if let Some(i) = rows.iter().position(|v| *v == 0.0) {
        return Err(StatsError::ZeroMarginal(format!("row {i}")));
    }
    if let Some(j) = cols.iter().position(|v| *v == 0.0) {
        return Err(StatsError::ZeroMarginal(format!("column {j}")));
    }
    let total = rows.iter().sum();
    Ok(Margins { rows, cols, total })
}

/// Pearson chi-squared test of independence with Cramér's V and adjusted
/// standardized residuals.
pub fn chi_squared_independence(table: &[Vec<f64>]) -> Result<ContingencyResult, StatsError> {
    let m = margins(table)?;
    let (r, c) = (table.len(), table[0].len());
    let expected: Vec<Vec<f64>> =
        m.rows.iter().map(|ri| m.cols.iter().map(|cj| ri * cj / m.total).collect()).collect();
    let chi2: f64 = table
        .iter()
        .zip(&expected)
        .flat_map(|(o, e)| o.iter().zip(e))
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let df = (r - 1) * (c - 1);
    let k = r.min(c);
    let cramers_v = if k > 1 { (chi2 / (m.total * (k - 1) as f64)).sqrt().min(1.0) } else { 0.0 };
    Ok(ContingencyResult {
        chi2,
        df,
        p_value: chi2_sf(chi2, df as f64),
        cramers_v,
        n: m.total,
        residuals: adjusted_residuals(table, &m),
        expected,
    })
}

/// Adjusted (Haberman) residuals `(O − E) / sqrt(E (1 − r/N) (1 − c/N))`.
pub fn standardized_residuals(table: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>, StatsError> {
    let m = margins(table)?;
    Ok(adjusted_residuals(table, &m))
}

fn adjusted_residuals(table: &[Vec<f64>], m: &Margins) -> Vec<Vec<Option<f64>>> {
    table
        .iter()
        .zip(&m.rows)
        .map(|(row, ri)| {
            row.iter()
                .zip(&m.cols)
                .map(|(o, cj)| {
                    let e = ri * cj / m.total;
                    let var = e * (1.0 - ri / m.total) * (1.0 - cj / m.total);
                    (var > 0.0).then(|| (o - e) / var.sqrt())
                })
                .collect()
        })
        .collect()
}
