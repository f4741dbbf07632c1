//! Merging study tables and expressing wall time relative to a reference
//! row.

use std::fmt::Write as _;

use gradbem::metrics::STUDY_CSV_HEADER;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub label: String,
    pub family: String,
    pub lmin: f64,
    pub lmax: f64,
    pub faces: usize,
    pub el2_all: f64,
    pub el2_ipsi: f64,
    pub el2_contra: f64,
    pub elinf_all: f64,
    pub ratio: f64,
    pub seconds: f64,
}

pub fn parse_study_csv(text: &str, source: &str) -> Result<Vec<StudyRecord>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == STUDY_CSV_HEADER => {}
        _ => return Err(CliError::Report(format!("{source}: header is not '{STUDY_CSV_HEADER}'"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| CliError::Report(format!("{source} row {}: {what}", i + 1));
            let c: Vec<&str> = line.trim().split(',').collect();
            if c.len() != 11 {
                return Err(bad("expected 11 columns"));
            }
            let num = |j: usize| c[j].parse::<f64>().map_err(|_| bad(&format!("column {} is not a number", j + 1)));
            Ok(StudyRecord {
                label: c[0].to_string(),
                family: c[1].to_string(),
                lmin: num(2)?,
                lmax: num(3)?,
                faces: c[4].parse().map_err(|_| bad("nFaces is not an integer"))?,
                el2_all: num(5)?,
                el2_ipsi: num(6)?,
                el2_contra: num(7)?,
                elinf_all: num(8)?,
                ratio: num(9)?,
                seconds: num(10)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub source: String,
    pub record: StudyRecord,
    /// Wall time in percent of the reference row.
    pub relative_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub reference: String,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_CSV_HEADER: &str =
    "source,label,family,lmin,lmax,nFaces,eL2_all,eL2_ipsi,eL2_contra,eLinf_all,ratio,seconds,relTime";

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let x = &r.record;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.source, x.label, x.family, x.lmin, x.lmax, x.faces, x.el2_all, x.el2_ipsi, x.el2_contra,
                x.elinf_all, x.ratio, x.seconds, r.relative_time
            );
        }
        s
    }

    /// Plot data: cost against accuracy.
    pub fn cost_csv(&self) -> String {
        let mut s = String::from("label,nFaces,relTime,eL2_all\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.record.label, r.record.faces, r.relative_time, r.record.el2_all);
        }
        s
    }
}

/// Merges `(source name, csv text)` tables. The reference row is the first
/// row labelled `reference`, or the row with the most faces when `None`.
pub fn report(tables: &[(String, String)], reference: Option<&str>) -> Result<Report> {
    if tables.is_empty() {
        return Err(CliError::Report("no study tables given".into()));
    }
    let mut rows = Vec::new();
    for (source, text) in tables {
        for record in parse_study_csv(text, source)? {
            rows.push(ReportRow { source: source.clone(), record, relative_time: 0.0 });
        }
    }
    let reference_row = match reference {
        Some(label) => rows
            .iter()
            .find(|r| r.record.label == label)
            .ok_or_else(|| CliError::Report(format!("reference row '{label}' not found")))?,
        None => rows
            .iter()
            .fold(None::<&ReportRow>, |best, r| match best {
                Some(b) if b.record.faces >= r.record.faces => Some(b),
                _ => Some(r),
            })
            .ok_or_else(|| CliError::Report("study tables have no rows".into()))?,
    };
    let (label, t_ref) = (reference_row.record.label.clone(), reference_row.record.seconds);
    if !(t_ref > 0.0) {
        return Err(CliError::Report(format!("reference row '{label}' has no positive time")));
    }
    for r in &mut rows {
        r.relative_time = r.record.seconds / t_ref * 100.0;
    }
    Ok(Report { reference: label, rows })
}
