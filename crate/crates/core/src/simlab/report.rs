use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{DesignDensity, Estimator, RegressionModel};

pub const CSV_HEADER: [&str; 10] = [
    "model",
    "design",
    "d",
    "n",
    "x",
    "estimator",
    "coverage",
    "se",
    "mean_width",
    "theoretical_level",
];

/// Coverage of one estimator at one (model, design, d, n, x).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCell {
    pub model: RegressionModel,
    pub design: DesignDensity,
    pub d: f64,
    pub n: usize,
    pub x: f64,
    pub estimator: Estimator,
    /// Fraction of replications whose interval contains r(x).
    pub coverage: f64,
    /// Binomial standard error √(p̂(1-p̂)/N).
    pub se: f64,
    /// Mean full width over non-degenerate replications.
    pub mean_width: f64,
    pub theoretical_level: f64,
    pub reps: usize,
    /// Replications scored as non-covering because of a zero denominator.
    pub degenerate: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverageReport {
    pub cells: Vec<CoverageCell>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    model: String,
    design: String,
    d: f64,
    n: usize,
    x: f64,
    estimator: &'a str,
    coverage: f64,
    se: f64,
    mean_width: f64,
    theoretical_level: f64,
}

impl CoverageReport {
    pub fn find(&self, d: f64, n: usize, x: f64, estimator: Estimator) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.d == d && c.n == n && c.x == x && c.estimator == estimator)
    }

    /// One row per cell with a header row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for c in &self.cells {
            w.serialize(CsvRow {
                model: c.model.to_string(),
                design: c.design.to_string(),
                d: c.d,
                n: c.n,
                x: c.x,
                estimator: c.estimator.name(),
                coverage: c.coverage,
                se: c.se,
                mean_width: c.mean_width,
                theoretical_level: c.theoretical_level,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Aligned text table: one block per (model, design), one section per d,
    /// one row per estimator, columns grouped by x then n, and the
    /// theoretical level last.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let mut groups: Vec<(RegressionModel, DesignDensity)> = Vec::new();
        for c in &self.cells {
            if !groups.contains(&(c.model, c.design)) {
                groups.push((c.model, c.design));
            }
        }
        for (model, design) in groups {
            let cells: Vec<&CoverageCell> = self
                .cells
                .iter()
                .filter(|c| c.model == model && c.design == design)
                .collect();
            let xs = sorted_unique(cells.iter().map(|c| c.x));
            let ns: BTreeSet<usize> = cells.iter().map(|c| c.n).collect();
            let ds = sorted_unique(cells.iter().map(|c| c.d));
            let col = 9;

            let _ = writeln!(out, "model {model}, design {design}");
            let _ = write!(out, "{:10}", "");
            for x in &xs {
                let _ = write!(out, "{:^w$}", format!("x={x}"), w = col * ns.len());
            }
            let _ = writeln!(out, "{:>col$}", "CL");
            let _ = write!(out, "{:10}", "");
            for _ in &xs {
                for n in &ns {
                    let _ = write!(out, "{:>col$}", format!("n={n}"));
                }
            }
            let _ = writeln!(out);
            for d in ds {
                let _ = writeln!(out, "d={d}");
                for est in [Estimator::Nw, Estimator::Averaged] {
                    let row: Vec<&&CoverageCell> =
                        cells.iter().filter(|c| c.d == d && c.estimator == est).collect();
                    if row.is_empty() {
                        continue;
                    }
                    let _ = write!(out, "{:10}", format!("  {}", est.name()));
                    for x in &xs {
                        for n in &ns {
                            match row.iter().find(|c| c.x == *x && c.n == *n) {
                                Some(c) => {
                                    let _ = write!(out, "{:>col$}", format!("{:.2}%", 100.0 * c.coverage));
                                }
                                None => {
                                    let _ = write!(out, "{:>col$}", "-");
                                }
                            }
                        }
                    }
                    let _ = writeln!(out, "{:>col$}", format!("{:.2}%", 100.0 * row[0].theoretical_level));
                }
            }
            let _ = writeln!(out);
        }
        out
    }
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(d: f64, n: usize, x: f64, estimator: Estimator, coverage: f64) -> CoverageCell {
        CoverageCell {
            model: RegressionModel::Cosine,
            design: DesignDensity::StdNormal,
            d,
            n,
            x,
            estimator,
            coverage,
            se: 0.01,
            mean_width: 0.5,
            theoretical_level: 0.95,
            reps: 100,
            degenerate: 0,
        }
    }

    #[test]
    fn csv_layout() {
        let report = CoverageReport {
            cells: vec![cell(1.0, 50, -0.5, Estimator::Nw, 0.965)],
        };
        let csv = report.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "cos,std_normal,1.0,50,-0.5,nw,0.965,0.01,0.5,0.95");
        assert!(lines.next().is_none());
    }

    #[test]
    fn text_table_has_a_row_per_estimator_and_d() {
        let report = CoverageReport {
            cells: vec![
                cell(1.0, 50, 0.0, Estimator::Nw, 0.96),
                cell(1.0, 50, 0.0, Estimator::Averaged, 0.998),
                cell(2.0, 50, 0.0, Estimator::Nw, 0.95),
            ],
        };
        let text = report.to_text_table();
        assert!(text.contains("model cos, design std_normal"));
        assert!(text.contains("96.00%"));
        assert!(text.contains("99.80%"));
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("nw")).count(), 2);
    }
}
