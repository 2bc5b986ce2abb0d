//! Numeric reports: DSC tables and selection statistics.
//!
//! Every CSV starts with a `# schema_version=N` comment line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{selection_histogram, IterationRecord, Policy};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const SHARE_WINDOW: u64 = 1000;
pub const TOP_SELECTED: usize = 20;

pub(crate) fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("# schema_version={CSV_SCHEMA_VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).expect("in-memory write");
        for row in rows {
            w.write_record(row).expect("in-memory write");
        }
        w.flush().expect("in-memory flush");
    }
    String::from_utf8(out).expect("csv output is utf-8")
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-class Dice values of one policy, indexed `[class][seed]`, as fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDsc {
    pub policy: Policy,
    pub per_class: Vec<Vec<f64>>,
}

/// Mean ± standard deviation in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DscCell {
    pub mean: f64,
    pub std: f64,
}

impl DscCell {
    pub fn display(&self) -> String {
        format!("{:.2} ± {:.2}", self.mean, self.std)
    }
}

/// Unweighted mean of the class means, and of the class standard deviations.
pub fn average_row(cells: &[DscCell]) -> DscCell {
    let n = cells.len().max(1) as f64;
    DscCell {
        mean: cells.iter().map(|c| c.mean).sum::<f64>() / n,
        std: cells.iter().map(|c| c.std).sum::<f64>() / n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DscTable {
    /// Column order: Uniform, OHEM, UCB, RUCB (those present).
    pub policies: Vec<Policy>,
    pub class_names: Vec<String>,
    /// `[class][policy]`.
    pub rows: Vec<Vec<DscCell>>,
    /// `[policy]`.
    pub avg: Vec<DscCell>,
}

pub fn render_dsc_table(results: &[PolicyDsc], class_names: &[String]) -> Result<DscTable> {
    if results.is_empty() || class_names.is_empty() {
        return Err(Error::InvalidArgument(
            "DSC table needs at least one policy and one class".into(),
        ));
    }
    let mut ordered: Vec<&PolicyDsc> = results.iter().collect();
    ordered.sort_by_key(|r| r.policy);
    if ordered.windows(2).any(|w| w[0].policy == w[1].policy) {
        return Err(Error::InvalidArgument(
            "duplicate policy in DSC results".into(),
        ));
    }
    let mut rows = vec![Vec::with_capacity(ordered.len()); class_names.len()];
    let mut avg = Vec::with_capacity(ordered.len());
    for r in &ordered {
        if r.per_class.len() != class_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} has {} classes, expected {}",
                r.policy,
                r.per_class.len(),
                class_names.len()
            )));
        }
        let mut column = Vec::with_capacity(class_names.len());
        for (row, values) in rows.iter_mut().zip(&r.per_class) {
            if values.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "{} has a class with no runs",
                    r.policy
                )));
            }
            let pct: Vec<f64> = values.iter().map(|v| 100.0 * v).collect();
            let (mean, std) = mean_std(&pct);
            let cell = DscCell { mean, std };
            row.push(cell);
            column.push(cell);
        }
        avg.push(average_row(&column));
    }
    Ok(DscTable {
        policies: ordered.iter().map(|r| r.policy).collect(),
        class_names: class_names.to_vec(),
        rows,
        avg,
    })
}

impl DscTable {
    pub fn to_text(&self) -> String {
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Organs".to_string()];
        header.extend(self.policies.iter().map(|p| p.label().to_string()));
        lines.push(header);
        for (name, row) in self.class_names.iter().zip(&self.rows) {
            let mut line = vec![name.clone()];
            line.extend(row.iter().map(DscCell::display));
            lines.push(line);
        }
        let mut avg = vec!["AVG".to_string()];
        avg.extend(self.avg.iter().map(DscCell::display));
        lines.push(avg);

        let cols = lines[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                lines
                    .iter()
                    .map(|l| l[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let fmt_line = |l: &Vec<String>| {
            l.iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let rule = widths
            .iter()
            .map(|&w| "-".repeat(w))
            .collect::<Vec<_>>()
            .join("-+-");
        let mut out = String::from("DSC (%) per organ class (mean ± standard deviation)\n");
        out.push_str(&fmt_line(&lines[0]));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for l in &lines[1..lines.len() - 1] {
            out.push_str(&fmt_line(l));
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str(&fmt_line(&lines[lines.len() - 1]));
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["class".to_string()];
        for p in &self.policies {
            header.push(format!("{}_mean", p.key()));
            header.push(format!("{}_std", p.key()));
        }
        let row = |name: &str, cells: &[DscCell]| {
            let mut r = vec![name.to_string()];
            for c in cells {
                r.push(format!("{:.2}", c.mean));
                r.push(format!("{:.2}", c.std));
            }
            r
        };
        let mut rows: Vec<Vec<String>> = self
            .class_names
            .iter()
            .zip(&self.rows)
            .map(|(n, cells)| row(n, cells))
            .collect();
        rows.push(row("AVG", &self.avg));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        csv_document(&header, &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareWindow {
    /// First iteration of the window, 1-based.
    pub start: u64,
    pub end: u64,
    pub corrupted_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopSample {
    pub sample_id: usize,
    pub count: u64,
    pub corrupted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Policy-driven selections per sample.
    pub histogram: Vec<u64>,
    /// Corrupted fraction per window of [`SHARE_WINDOW`] iterations over the whole log.
    pub share_series: Option<Vec<ShareWindow>>,
    pub top: Vec<TopSample>,
    pub warnings: Vec<String>,
}

pub fn emit_selection_report(
    log: &[IterationRecord],
    num_samples: usize,
    corrupted: Option<&[bool]>,
) -> Result<SelectionReport> {
    if log.is_empty() {
        return Err(Error::InvalidArgument(
            "selection report needs a non-empty log".into(),
        ));
    }
    if let Some(rec) = log.iter().find(|r| r.sample_id >= num_samples) {
        return Err(Error::OutOfRange {
            id: rec.sample_id,
            len: num_samples,
        });
    }
    let mut warnings = Vec::new();
    let flags = match corrupted {
        Some(f) if !f.is_empty() => {
            if f.len() != num_samples {
                return Err(Error::DimensionMismatch(format!(
                    "{} corruption flags for {num_samples} samples",
                    f.len()
                )));
            }
            Some(f)
        }
        _ => {
            warnings
                .push("corruption metadata missing; corrupted-share series omitted".to_string());
            None
        }
    };
    let histogram = selection_histogram(log, num_samples);
    let share_series = flags.map(|f| {
        log.chunks(SHARE_WINDOW as usize)
            .map(|w| ShareWindow {
                start: w[0].iteration,
                end: w[w.len() - 1].iteration,
                corrupted_fraction: w.iter().filter(|r| f[r.sample_id]).count() as f64
                    / w.len() as f64,
            })
            .collect()
    });
    let mut ids: Vec<usize> = (0..num_samples).filter(|&i| histogram[i] > 0).collect();
    ids.sort_by(|&a, &b| histogram[b].cmp(&histogram[a]).then(a.cmp(&b)));
    let top = ids
        .into_iter()
        .take(TOP_SELECTED)
        .map(|i| TopSample {
            sample_id: i,
            count: histogram[i],
            corrupted: flags.map(|f| f[i]),
        })
        .collect();
    Ok(SelectionReport {
        histogram,
        share_series,
        top,
        warnings,
    })
}

fn flag_text(flag: Option<bool>) -> String {
    flag.map(|f| f.to_string()).unwrap_or_default()
}

impl SelectionReport {
    pub fn histogram_csv(&self, corrupted: Option<&[bool]>) -> String {
        let rows: Vec<Vec<String>> = self
            .histogram
            .iter()
            .enumerate()
            .map(|(i, c)| {
                vec![
                    i.to_string(),
                    c.to_string(),
                    flag_text(corrupted.and_then(|f| f.get(i).copied())),
                ]
            })
            .collect();
        csv_document(&["sample_id", "count", "corrupted"], &rows)
    }

    pub fn share_csv(&self) -> Option<String> {
        let series = self.share_series.as_ref()?;
        let rows: Vec<Vec<String>> = series
            .iter()
            .map(|w| {
                vec![
                    w.start.to_string(),
                    w.end.to_string(),
                    w.corrupted_fraction.to_string(),
                ]
            })
            .collect();
        Some(csv_document(
            &["window_start", "window_end", "corrupted_fraction"],
            &rows,
        ))
    }

    pub fn top_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .top
            .iter()
            .enumerate()
            .map(|(rank, t)| {
                vec![
                    (rank + 1).to_string(),
                    t.sample_id.to_string(),
                    t.count.to_string(),
                    flag_text(t.corrupted),
                ]
            })
            .collect();
        csv_document(&["rank", "sample_id", "count", "corrupted"], &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("organ {i}")).collect()
    }

    #[test]
    fn single_cell_table() {
        let t = render_dsc_table(
            &[PolicyDsc {
                policy: Policy::Rucb,
                per_class: vec![vec![1.0, 1.0]],
            }],
            &names(1),
        )
        .unwrap();
        assert_eq!(t.rows[0][0].display(), "100.00 ± 0.00");
        assert!(t.to_text().contains("100.00 ± 0.00"));
        assert!(t
            .to_csv()
            .starts_with("# schema_version=1\nclass,rucb_mean,rucb_std\n"));
    }

    #[test]
    fn columns_follow_baseline_order() {
        let mk = |policy| PolicyDsc {
            policy,
            per_class: vec![vec![0.5]],
        };
        let t = render_dsc_table(
            &[
                mk(Policy::Rucb),
                mk(Policy::Ucb),
                mk(Policy::Uniform),
                mk(Policy::Ohem),
            ],
            &names(1),
        )
        .unwrap();
        assert_eq!(t.policies, Policy::ALL.to_vec());
        let text = t.to_text();
        let header = text.lines().nth(1).unwrap();
        let pos: Vec<usize> = ["Uniform", "OHEM", "UCB ", "RUCB"]
            .iter()
            .map(|p| header.find(p).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{header}");
    }

    #[test]
    fn avg_row_recomputes_from_class_means() {
        let per_class = vec![vec![0.9, 0.7], vec![0.2, 0.4], vec![0.5, 0.5]];
        let t = render_dsc_table(
            &[PolicyDsc {
                policy: Policy::Uniform,
                per_class: per_class.clone(),
            }],
            &names(3),
        )
        .unwrap();
        let means: Vec<f64> = per_class
            .iter()
            .map(|v| 100.0 * (v[0] + v[1]) / 2.0)
            .collect();
        assert_abs_diff_eq!(
            t.avg[0].mean,
            means.iter().sum::<f64>() / 3.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(t.avg[0].std, (10.0 + 10.0 + 0.0) / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn avg_row_averages_means_and_stds() {
        // sixteen-class column whose AVG cell is known to be 73.55 ± 10.28
        let means = [
            81.53, 29.33, 34.49, 77.51, 63.39, 79.43, 78.75, 95.35, 94.48, 96.03, 77.86, 45.36,
            72.35, 95.32, 90.62, 64.95,
        ];
        let stds = [
            4.50, 16.26, 12.92, 7.89, 12.62, 23.77, 6.54, 2.53, 9.49, 1.70, 9.92, 14.36, 13.30,
            2.17, 6.51, 19.96,
        ];
        let cells: Vec<DscCell> = means
            .iter()
            .zip(stds)
            .map(|(&mean, std)| DscCell { mean, std })
            .collect();
        assert_eq!(average_row(&cells).display(), "73.55 ± 10.28");
    }

    #[test]
    fn table_input_errors() {
        assert!(render_dsc_table(&[], &names(1)).is_err());
        let bad = PolicyDsc {
            policy: Policy::Ucb,
            per_class: vec![vec![0.5]],
        };
        assert!(render_dsc_table(std::slice::from_ref(&bad), &names(2)).is_err());
        assert!(render_dsc_table(&[bad.clone(), bad], &names(1)).is_err());
    }

    fn rec(iteration: u64, phase: usize, sample_id: usize) -> IterationRecord {
        IterationRecord {
            phase,
            t: iteration,
            iteration,
            sample_id,
            alpha: None,
            k: None,
            reward: 0.1,
        }
    }

    #[test]
    fn selection_report_without_flags_warns() {
        let log: Vec<_> = (1..=10).map(|i| rec(i, 1, (i % 3) as usize)).collect();
        let r = emit_selection_report(&log, 3, None).unwrap();
        assert!(r.share_series.is_none());
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.histogram, vec![3, 4, 3]);
        assert_eq!(r.top[0].sample_id, 1);
        assert!(r.share_csv().is_none());
        let r2 = emit_selection_report(&log, 3, Some(&[])).unwrap();
        assert_eq!(r2.warnings.len(), 1);
        assert!(emit_selection_report(&[], 3, None).is_err());
    }

    #[test]
    fn share_series_windows() {
        let log: Vec<_> = (1..=2500)
            .map(|i| rec(i, 1, if i <= 1000 { 0 } else { 1 }))
            .collect();
        let r = emit_selection_report(&log, 2, Some(&[true, false])).unwrap();
        let s = r.share_series.unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(
            (s[0].start, s[0].end, s[0].corrupted_fraction),
            (1, 1000, 1.0)
        );
        assert_eq!(
            (s[2].start, s[2].end, s[2].corrupted_fraction),
            (2001, 2500, 0.0)
        );
        assert_eq!(r.top[0].corrupted, Some(false));
    }
}
