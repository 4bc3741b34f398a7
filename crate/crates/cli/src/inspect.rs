use std::io::Write;
use std::path::Path;

use sortkd::{descending_argsort, softmax, Logits, Temperature};

use crate::error::CliError;
use crate::records::{parse_records, LogitRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InspectOptions {
    pub top: usize,
    pub confusion: bool,
    /// Skip the per-record blocks and print only the aggregate.
    pub summary_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordView {
    pub id: String,
    pub label: usize,
    pub predicted: usize,
    pub correct: bool,
    /// `(class, confidence)` at T = 1, most confident first.
    pub top: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InspectReport {
    pub records: usize,
    pub misclassified: usize,
    pub classes: Option<usize>,
    /// `confusion[label][predicted]`, when requested.
    pub confusion: Option<Vec<Vec<u64>>>,
}

pub fn inspect_record(rec: &LogitRecord, k: usize) -> Result<RecordView, CliError> {
    let z = Logits::new(rec.logits.clone())?;
    let p = softmax(&z, Temperature::one());
    let (_, order) = descending_argsort(&z);
    let predicted = order.as_slice()[0];
    Ok(RecordView {
        id: rec.id.clone(),
        label: rec.label,
        predicted,
        correct: predicted == rec.label,
        top: order.as_slice().iter().take(k).map(|&c| (c, p[c])).collect(),
    })
}

fn write_view<W: Write>(out: &mut W, v: &RecordView) -> std::io::Result<()> {
    let flag = if v.correct { "correct" } else { "wrong" };
    writeln!(out, "{}  label={}  pred={}  {flag}", v.id, v.label, v.predicted)?;
    for (class, conf) in &v.top {
        let mark = if *class == v.label { "  <- label" } else { "" };
        writeln!(out, "  {class:>6}  {conf:.6}{mark}")?;
    }
    Ok(())
}

fn write_confusion<W: Write>(out: &mut W, m: &[Vec<u64>]) -> std::io::Result<()> {
    writeln!(out, "confusion (rows: label, columns: predicted)")?;
    write!(out, "{:>6}", "")?;
    for c in 0..m.len() {
        write!(out, " {c:>6}")?;
    }
    writeln!(out)?;
    for (label, row) in m.iter().enumerate() {
        write!(out, "{label:>6}")?;
        for n in row {
            write!(out, " {n:>6}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `sortkd inspect`: per-record top-k report and aggregate counts.
pub fn cmd_inspect<W: Write>(input: &Path, opts: InspectOptions, out: &mut W) -> Result<InspectReport, CliError> {
    if opts.top == 0 {
        return Err(CliError::Invalid("--top must be at least 1".into()));
    }
    let stdout_err = |e| CliError::io("<stdout>", e);
    let mut reader = parse_records(input)?;
    let mut report = InspectReport::default();
    for rec in reader.by_ref() {
        let rec = rec?;
        let view = inspect_record(&rec, opts.top)?;
        report.records += 1;
        if !view.correct {
            report.misclassified += 1;
        }
        if opts.confusion {
            let c = rec.logits.len();
            let m = report.confusion.get_or_insert_with(|| vec![vec![0; c]; c]);
            m[view.label][view.predicted] += 1;
        }
        if !opts.summary_only {
            write_view(out, &view).map_err(stdout_err)?;
        }
    }
    report.classes = reader.classes();
    if opts.confusion && report.confusion.is_none() {
        report.confusion = Some(Vec::new());
    }
    let accuracy = if report.records == 0 {
        0.0
    } else {
        1.0 - report.misclassified as f64 / report.records as f64
    };
    writeln!(
        out,
        "records={} misclassified={} top1={accuracy:.4}",
        report.records, report.misclassified
    )
    .map_err(stdout_err)?;
    if let Some(m) = &report.confusion {
        write_confusion(out, m).map_err(stdout_err)?;
    }
    Ok(report)
}
