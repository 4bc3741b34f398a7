//! JSON Lines logit records: `{"id": "...", "label": 3, "logits": [...]}`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogitRecord {
    pub id: String,
    pub label: usize,
    pub logits: Vec<f64>,
}

/// Streams validated records from JSON Lines input, one line at a time.
/// Blank lines are skipped. The first record fixes the class count.
/// Iteration stops after the first error.
pub struct RecordReader<R> {
    inner: R,
    source_name: String,
    line: usize,
    record_line: usize,
    classes: Option<usize>,
    buf: Vec<u8>,
    done: bool,
}

/// Opens `path` for streaming.
pub fn parse_records(path: &Path) -> Result<RecordReader<BufReader<File>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(RecordReader::new(BufReader::new(file), path.display().to_string()))
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(inner: R, source_name: impl Into<String>) -> Self {
        RecordReader {
            inner,
            source_name: source_name.into(),
            line: 0,
            record_line: 0,
            classes: None,
            buf: Vec::new(),
            done: false,
        }
    }

    /// Line number of the record most recently returned.
    pub fn line(&self) -> usize {
        self.record_line
    }

    /// Class count fixed by the first record, if one has been read.
    pub fn classes(&self) -> Option<usize> {
        self.classes
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Record {
            source_name: self.source_name.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn parse_line(&mut self) -> Result<LogitRecord, CliError> {
        let text = std::str::from_utf8(&self.buf).map_err(|_| self.error("line is not valid UTF-8"))?;
        let rec: LogitRecord = serde_json::from_str(text).map_err(|e| self.error(e.to_string()))?;
        let c = rec.logits.len();
        if c < 2 {
            return Err(self.error(format!("a record needs at least 2 logits, got {c}")));
        }
        if let Some(i) = rec.logits.iter().position(|v| !v.is_finite()) {
            return Err(self.error(format!("logit {i} is not finite")));
        }
        match self.classes {
            None => self.classes = Some(c),
            Some(expected) if expected != c => {
                return Err(self.error(format!("expected {expected} logits (fixed by the first record), got {c}")));
            }
            Some(_) => {}
        }
        if rec.label >= c {
            return Err(self.error(format!("label {} is out of range for {c} classes", rec.label)));
        }
        Ok(rec)
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<LogitRecord, CliError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(CliError::io(&self.source_name, e)));
                }
            }
            self.line += 1;
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let out = self.parse_line();
            self.record_line = self.line;
            self.done = out.is_err();
            return Some(out);
        }
    }
}

/// Writes one record as a single JSON line. Logits use 17 significant
/// digits, which parse back to the identical `f64`.
pub fn write_record<W: Write>(out: &mut W, id: &str, label: usize, logits: &[f64]) -> io::Result<()> {
    let mut line = String::with_capacity(32 + logits.len() * 24);
    push_record(&mut line, id, label, logits);
    out.write_all(line.as_bytes())
}

pub(crate) fn push_record(line: &mut String, id: &str, label: usize, logits: &[f64]) {
    use std::fmt::Write as _;
    line.push_str("{\"id\":");
    line.push_str(&serde_json::to_string(id).expect("strings always serialize"));
    let _ = write!(line, ",\"label\":{label},\"logits\":[");
    for (i, v) in logits.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v:.16e}");
    }
    line.push_str("]}\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Vec<Result<LogitRecord, CliError>> {
        RecordReader::new(text.as_bytes(), "mem").collect()
    }

    #[test]
    fn valid_record() {
        let got = read("{\"id\":\"a\",\"label\":3,\"logits\":[1,4,3,2]}\n");
        assert_eq!(
            got[0].as_ref().unwrap(),
            &LogitRecord {
                id: "a".into(),
                label: 3,
                logits: vec![1.0, 4.0, 3.0, 2.0],
            }
        );
    }

    #[test]
    fn empty_and_blank_input() {
        assert!(read("").is_empty());
        assert!(read("\n  \n\n").is_empty());
    }

    #[test]
    fn inconsistent_width_reports_line() {
        let text = "{\"id\":\"a\",\"label\":0,\"logits\":[1,4,3,2]}\n\n{\"id\":\"b\",\"label\":0,\"logits\":[1,2,3]}\n";
        let got = read(text);
        assert_eq!(got.len(), 2);
        match &got[1] {
            Err(CliError::Record { line, message, .. }) => {
                assert_eq!(*line, 3);
                assert!(message.contains("expected 4 logits"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_records() {
        let cases = [
            ("{\"id\":\"a\",\"label\":4,\"logits\":[1,4,3,2]}", "out of range"),
            ("{\"id\":\"a\",\"label\":-1,\"logits\":[1,4]}", "invalid value"),
            ("{\"id\":\"a\",\"label\":0,\"logits\":[1]}", "at least 2"),
            ("{\"id\":\"a\",\"label\":0,\"logits\":[1,1e400]}", "out of range"),
            ("{\"id\":\"a\",\"label\":0}", "missing field"),
            ("{\"id\":\"a\",\"label\":0,\"logits\":[1,2],\"x\":1}", "unknown field"),
            ("not json", "expected"),
        ];
        for (line, needle) in cases {
            match &read(line)[0] {
                Err(CliError::Record { line: 1, message, .. }) => assert!(message.contains(needle), "{line}: {message}"),
                other => panic!("{line}: {other:?}"),
            }
        }
    }

    #[test]
    fn stops_after_first_error() {
        let text = "bad\n{\"id\":\"a\",\"label\":0,\"logits\":[1,2]}\n";
        assert_eq!(read(text).len(), 1);
    }

    #[test]
    fn emit_format() {
        let mut out = Vec::new();
        write_record(&mut out, "q\"1", 1, &[1.0, -0.0, 0.1]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"id\":\"q\\\"1\",\"label\":1,\"logits\":[1.0000000000000000e0,-0.0000000000000000e0,1.0000000000000001e-1]}\n"
        );
    }
}
