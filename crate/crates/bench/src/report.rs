//! csv and markdown renderings of benchmark results.

use std::fmt::Write;
use std::str::FromStr;

use crate::registry::Cell;
use crate::runner::BenchmarkResult;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(BenchError::Config {
                line: 0,
                message: format!("unknown format `{s}`"),
            }),
        }
    }
}

/// Column order of the csv report. `wall_time` is only written when timing
/// is requested, so that reports are byte-identical across runs.
pub const CSV_COLUMNS: [&str; 12] = [
    "problem",
    "method",
    "boundary_count",
    "interior_count",
    "truncation_order",
    "l2_rel_error",
    "avg_rel_error",
    "rms_rel_error",
    "cond_estimate",
    "used_tsvd",
    "wall_time",
    "failure",
];

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(results: &[BenchmarkResult], timing: bool) -> String {
    let mut out = String::new();
    let header: Vec<&str> = CSV_COLUMNS.iter().copied().filter(|c| timing || *c != "wall_time").collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in results {
        let mut fields = vec![
            csv_escape(&r.problem),
            r.method.to_string(),
            r.boundary_count.to_string(),
            r.interior_count.to_string(),
            r.truncation_order.to_string(),
            format!("{:e}", r.l2_rel_error),
            format!("{:e}", r.avg_rel_error),
            format!("{:e}", r.rms_rel_error),
            format!("{:e}", r.cond_estimate),
            r.used_tsvd.to_string(),
        ];
        if timing {
            fields.push(format!("{:.6}", r.wall_time));
        }
        fields.push(csv_escape(r.failure.as_deref().unwrap_or("")));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn markdown(results: &[BenchmarkResult], timing: bool) -> String {
    let mut out = String::new();
    out.push_str("| problem | method | boundary | interior | M | L2 rel. error | avg rel. error | cond |");
    if timing {
        out.push_str(" time (s) |");
    }
    out.push_str("\n|---|---|---|---|---|---|---|---|");
    if timing {
        out.push_str("---|");
    }
    out.push('\n');
    for r in results {
        let err = match &r.failure {
            Some(f) => format!("failed: {f}"),
            None => format!("{:.2e}", r.l2_rel_error),
        };
        let _ = write!(
            out,
            "| {} | {} | {} | {} | {} | {} | {:.2e} | {:.1e} |",
            r.problem, r.method, r.boundary_count, r.interior_count, r.truncation_order, err, r.avg_rel_error, r.cond_estimate
        );
        if timing {
            let _ = write!(out, " {:.3} |", r.wall_time);
        }
        out.push('\n');
    }
    out
}

pub fn emit_report(results: &[BenchmarkResult], format: Format, timing: bool) -> String {
    match format {
        Format::Csv => csv(results, timing),
        Format::Markdown => markdown(results, timing),
    }
}

fn cell_label(cell: &Cell, result: &BenchmarkResult) -> String {
    let method = cell.method.to_ascii_uppercase();
    match cell.method.as_str() {
        "bkm" if result.interior_count > 0 => format!("{method} ({}+{})", result.boundary_count, result.interior_count),
        "mkm" => format!("{method} ({})", result.boundary_count + result.interior_count),
        _ => format!("{method} ({})", result.boundary_count),
    }
}

/// Published-table layout: one markdown grid per table, one line per table
/// row, each entry `label: measured (published)` with a mark for misses.
pub fn emit_tables(runs: &[(Cell, BenchmarkResult, bool)]) -> String {
    let mut tables: Vec<u32> = runs.iter().map(|(c, _, _)| c.table).collect();
    tables.dedup();
    let mut out = String::new();
    for t in tables {
        let rows: Vec<&(Cell, BenchmarkResult, bool)> = runs.iter().filter(|(c, _, _)| c.table == t).collect();
        let mut labels: Vec<&str> = Vec::new();
        for (c, _, _) in &rows {
            if !labels.contains(&c.row.as_str()) {
                labels.push(&c.row);
            }
        }
        let width = labels
            .iter()
            .map(|l| rows.iter().filter(|(c, _, _)| c.row == *l).count())
            .max()
            .unwrap_or(0);
        let _ = writeln!(out, "Table {t}\n");
        let _ = write!(out, "| |");
        for i in 0..width {
            let _ = write!(out, " {} |", i + 1);
        }
        let _ = write!(out, "\n|---|");
        for _ in 0..width {
            out.push_str("---|");
        }
        out.push('\n');
        for label in labels {
            let _ = write!(out, "| {label} |");
            for (c, r, pass) in rows.iter().filter(|(c, _, _)| c.row == label) {
                let measured = match &r.failure {
                    Some(_) => "failed".to_string(),
                    None => format!("{:.1e}", r.l2_rel_error),
                };
                let mark = if *pass { "" } else { " ✗" };
                let _ = write!(out, " {}: {measured} ({:.1e}){mark} |", cell_label(c, r), c.published);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
