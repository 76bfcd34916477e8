//! Threshold table: for each puncturing pattern of one ensemble, the design
//! rate, the capacity limit, the ML lower bound, the iterative-decoding
//! threshold and the fractional gap, all on the BIAWGN channel in dB.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::density_evolution::{de_threshold_with_tol, DeConfig};
use crate::degree_distributions::EnsembleSpec;
use crate::error::Result;
use crate::puncturing::{punctured_design_rate, PuncturingPattern};
use crate::scalar::Real;
use crate::thresholds::{
    capacity_limit_threshold, fractional_gap, ml_threshold_with_tol, ChannelFamily,
    ThresholdResult, DEFAULT_TOL_DB,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    /// Bisection resolution in dB for the ML and DE searches.
    pub tol_db: f64,
    /// `None` skips the density-evolution column.
    pub de: Option<DeConfig>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            tol_db: DEFAULT_TOL_DB,
            de: Some(DeConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow<T> {
    /// 1-based row number.
    pub index: usize,
    pub pattern: PuncturingPattern<T>,
    pub design_rate: T,
    pub capacity: ThresholdResult<T>,
    pub ml: ThresholdResult<T>,
    pub it: Option<ThresholdResult<T>>,
    pub fractional_gap: Option<T>,
}

impl<T: Real> TableRow<T> {
    /// Largest bisection bracket among the row's thresholds, in dB.
    pub fn tolerance_db(&self) -> T {
        let mut t = self.capacity.tolerance.max(self.ml.tolerance);
        if let Some(it) = &self.it {
            t = t.max(it.tolerance);
        }
        t
    }
}

pub fn table_row<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
    index: usize,
    opts: &TableOptions,
) -> Result<TableRow<T>> {
    let family = ChannelFamily::Biawgn;
    let tol = T::lit(opts.tol_db);
    let design_rate = punctured_design_rate(e, pattern)?;
    let capacity = capacity_limit_threshold(design_rate, family)?;
    let ml = ml_threshold_with_tol(e, pattern, family, tol)?;
    let (it, gap) = match &opts.de {
        Some(cfg) => {
            let it = de_threshold_with_tol(e, pattern, family, cfg, tol)?;
            let gap = fractional_gap(
                capacity.eb_n0_db.unwrap(),
                ml.eb_n0_db.unwrap(),
                it.eb_n0_db.unwrap(),
            )?;
            (Some(it), Some(gap))
        }
        None => (None, None),
    };
    Ok(TableRow {
        index,
        pattern: pattern.clone(),
        design_rate,
        capacity,
        ml,
        it,
        fractional_gap: gap,
    })
}

/// Computes the rows for `(row number, pattern)` pairs concurrently; the
/// result keeps the input order.
pub fn threshold_table<T: Real + Send + Sync>(
    e: &EnsembleSpec<T>,
    rows: &[(usize, PuncturingPattern<T>)],
    opts: &TableOptions,
) -> Result<Vec<TableRow<T>>> {
    rows.par_iter()
        .map(|(i, p)| table_row(e, p, *i, opts))
        .collect()
}

/// `0.07886x + 0.01405x^2 + ...`, with degree `d` shown as `x^(d-1)`; `0`
/// for the empty pattern.
pub fn pattern_polynomial<T: Real>(p: &PuncturingPattern<T>) -> String {
    let terms: Vec<String> = p
        .rates()
        .iter()
        .map(|&(d, r)| match d - 1 {
            0 => format!("{r}"),
            1 => format!("{r}x"),
            k => format!("{r}x^{k}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

const HEADER: [&str; 7] = [
    "puncturing pattern",
    "design rate",
    "capacity limit (dB)",
    "ML lower bound (dB)",
    "IT threshold (dB)",
    "fractional gap",
    "tolerance (dB)",
];

fn cells<T: Real>(row: &TableRow<T>) -> [String; 7] {
    let db = |t: &ThresholdResult<T>| format!("{:.3}", t.eb_n0_db.unwrap());
    [
        pattern_polynomial(&row.pattern),
        format!("{:.3}", row.design_rate),
        db(&row.capacity),
        db(&row.ml),
        row.it.as_ref().map_or("-".into(), db),
        row.fractional_gap
            .map_or("-".into(), |g| format!(">= {:.1}%", g * T::lit(100.0))),
        format!("{:.1e}", row.tolerance_db()),
    ]
}

pub fn render_csv<T: Real>(rows: &[TableRow<T>]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for row in rows {
        let c = cells(row);
        let quoted: Vec<String> = c
            .iter()
            .map(|s| if s.contains(',') { format!("\"{s}\"") } else { s.clone() })
            .collect();
        out.push_str(&quoted.join(","));
        out.push('\n');
    }
    out
}

/// Markdown table with columns padded to a common width.
pub fn render_markdown<T: Real>(rows: &[TableRow<T>]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(cells).collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: Vec<&str>| {
        let mut s = String::from("|");
        for (c, w) in cols.iter().zip(&width) {
            let _ = write!(s, " {c:<w$} |");
        }
        s.push('\n');
        s
    };
    let mut out = line(HEADER.to_vec());
    out.push('|');
    for w in &width {
        out.push_str(&"-".repeat(w + 2));
        out.push('|');
    }
    out.push('\n');
    for r in &body {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::bundled_table1;

    #[test]
    fn polynomial_text() {
        let p = PuncturingPattern::new(vec![(2, 0.07886f64), (3, 0.01405), (10, 0.07206)]).unwrap();
        assert_eq!(pattern_polynomial(&p), "0.07886x + 0.01405x^2 + 0.07206x^9");
        assert_eq!(pattern_polynomial(&PuncturingPattern::<f64>::none()), "0");
    }

    #[test]
    fn rows_without_de() {
        let (e, patterns) = bundled_table1().unwrap();
        let opts = TableOptions {
            de: None,
            ..TableOptions::default()
        };
        let rows: Vec<_> = patterns.into_iter().enumerate().take(2).map(|(i, p)| (i + 1, p)).collect();
        let table = threshold_table(&e, &rows, &opts).unwrap();
        assert_eq!(table[0].index, 1);
        assert!((table[0].ml.eb_n0_db.unwrap() - 0.270).abs() < 5e-3);
        assert!((table[1].design_rate - 0.528).abs() < 2e-3);
        let csv = render_csv(&table);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0.500,0.187,0.270,-,-,"));
        let md = render_markdown(&table);
        assert_eq!(md.lines().count(), 4);
        let widths: Vec<usize> = md.lines().map(|l| l.chars().count()).collect();
        assert!(widths.iter().all(|&w| w == widths[0]));
    }
}
