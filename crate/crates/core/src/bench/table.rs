//! Sweep result tables: raw CSV and a markdown rendering with the best
//! weighting per ordering in bold.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Iteration count of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Count {
    pub iterations: usize,
    pub converged: bool,
}

impl Count {
    pub fn converged(iterations: usize) -> Self {
        Self {
            iterations,
            converged: true,
        }
    }

    pub fn failed(iterations: usize) -> Self {
        Self {
            iterations,
            converged: false,
        }
    }

    /// Value written to CSV: the iteration count, or `maxit + 1` for runs that
    /// did not converge.
    pub fn csv_value(&self, maxit: usize) -> usize {
        if self.converged {
            self.iterations
        } else {
            maxit + 1
        }
    }

    fn markdown(&self) -> String {
        if self.converged {
            self.iterations.to_string()
        } else {
            ">maxit".to_string()
        }
    }
}

/// Indices of the smallest converged counts; every tie is included. Empty when
/// nothing converged.
pub fn argmin_set(counts: &[Count]) -> Vec<usize> {
    let best = counts.iter().filter(|c| c.converged).map(|c| c.iterations).min();
    match best {
        Some(best) => counts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.converged && c.iterations == best)
            .map(|(i, _)| i)
            .collect(),
        None => Vec::new(),
    }
}

/// One problem row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub label: String,
    /// First preconditioner alone.
    pub solo_first: Count,
    /// Second preconditioner alone.
    pub solo_second: Count,
    /// Selective runs per alpha with the first preconditioner leading.
    pub per_alpha_forward: Option<Vec<Count>>,
    /// Selective runs per alpha with the second preconditioner leading.
    pub per_alpha_reverse: Option<Vec<Count>>,
}

impl SweepRow {
    pub fn minima_forward(&self) -> Vec<usize> {
        self.per_alpha_forward
            .as_deref()
            .map(argmin_set)
            .unwrap_or_default()
    }

    pub fn minima_reverse(&self) -> Vec<usize> {
        self.per_alpha_reverse
            .as_deref()
            .map(argmin_set)
            .unwrap_or_default()
    }
}

/// Table layout shared by the CSV and markdown writers.
#[derive(Debug, Clone, PartialEq)]
pub struct TableHeader {
    pub first: String,
    pub second: String,
    pub alphas: Vec<f64>,
    pub maxit: usize,
}

/// Renders rows as `label | first | alphas | second | alphas | first`, the
/// left alpha block with the first preconditioner leading and the right block
/// with the second leading. A missing ordering drops its block and its
/// trailing solo column. The minima of each alpha block are bold; solo columns
/// never are.
pub fn render_markdown(header: &TableHeader, rows: &[SweepRow]) -> String {
    let forward = rows.iter().any(|r| r.per_alpha_forward.is_some());
    let reverse = rows.iter().any(|r| r.per_alpha_reverse.is_some());
    let alpha_cells = |lead: &str| {
        header
            .alphas
            .iter()
            .map(|a| format!("{lead} {a}"))
            .collect::<Vec<_>>()
    };

    let mut cols = vec!["problem".to_string()];
    match (forward, reverse) {
        (true, true) => {
            cols.push(header.first.clone());
            cols.extend(alpha_cells(&header.first));
            cols.push(header.second.clone());
            cols.extend(alpha_cells(&header.second));
            cols.push(header.first.clone());
        }
        (false, true) => {
            cols.push(header.second.clone());
            cols.extend(alpha_cells(&header.second));
            cols.push(header.first.clone());
        }
        _ => {
            cols.push(header.first.clone());
            cols.extend(alpha_cells(&header.first));
            cols.push(header.second.clone());
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "| {} |", cols.join(" | "));
    let rule: Vec<&str> = std::iter::once("---")
        .chain(std::iter::repeat_n("---:", cols.len() - 1))
        .collect();
    let _ = writeln!(out, "|{}|", rule.join("|"));

    let block = |per: Option<&Vec<Count>>| -> Vec<String> {
        let Some(per) = per else {
            return vec!["-".to_string(); header.alphas.len()];
        };
        let minima = argmin_set(per);
        per.iter()
            .enumerate()
            .map(|(i, c)| {
                if minima.contains(&i) {
                    format!("**{}**", c.markdown())
                } else {
                    c.markdown()
                }
            })
            .collect()
    };
    for row in rows {
        let mut cells = vec![row.label.clone()];
        let (fwd, rev) = (row.per_alpha_forward.as_ref(), row.per_alpha_reverse.as_ref());
        match (forward, reverse) {
            (true, true) => {
                cells.push(row.solo_first.markdown());
                cells.extend(block(fwd));
                cells.push(row.solo_second.markdown());
                cells.extend(block(rev));
                cells.push(row.solo_first.markdown());
            }
            (false, true) => {
                cells.push(row.solo_second.markdown());
                cells.extend(block(rev));
                cells.push(row.solo_first.markdown());
            }
            _ => {
                cells.push(row.solo_first.markdown());
                cells.extend(block(fwd));
                cells.push(row.solo_second.markdown());
            }
        }
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

#[derive(Debug, Serialize)]
struct CsvRecord<'a> {
    label: &'a str,
    ordering: &'a str,
    config: String,
    iterations: usize,
    converged: bool,
}

/// Raw counts, one line per solve: `label,ordering,config,iterations,converged`.
pub fn render_csv(header: &TableHeader, rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut emit = |label: &str, ordering: &str, config: String, c: &Count| {
        w.serialize(CsvRecord {
            label,
            ordering,
            config,
            iterations: c.csv_value(header.maxit),
            converged: c.converged,
        })
    };
    let csv_err = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    for row in rows {
        emit(
            &row.label,
            "solo",
            format!("fgmres:{}", header.first),
            &row.solo_first,
        )
        .map_err(csv_err)?;
        emit(
            &row.label,
            "solo",
            format!("fgmres:{}", header.second),
            &row.solo_second,
        )
        .map_err(csv_err)?;
        for (ordering, per) in [
            ("forward", &row.per_alpha_forward),
            ("reverse", &row.per_alpha_reverse),
        ] {
            if let Some(per) = per {
                for (alpha, c) in header.alphas.iter().zip(per) {
                    emit(&row.label, ordering, format!("smpgmres:alpha={alpha}"), c).map_err(csv_err)?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}
