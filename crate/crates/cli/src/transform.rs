use std::fs::{self, File};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use sortkd::transforms::apply_in_place;
use sortkd::TransformSpec;

use crate::error::CliError;
use crate::records::{parse_records, push_record, LogitRecord, RecordReader};

/// Records transformed in parallel per batch; output order is restored
/// before each batch is written.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformStats {
    pub records: usize,
    pub classes: Option<usize>,
}

/// Transforms every record from `reader` and writes them, in input order,
/// to `out`.
pub fn transform_stream<R: BufRead, W: Write>(
    mut reader: RecordReader<R>,
    out: &mut W,
    spec: TransformSpec,
    out_name: &Path,
) -> Result<TransformStats, CliError> {
    let mut records = 0;
    let mut chunk: Vec<(usize, LogitRecord)> = Vec::with_capacity(CHUNK);
    loop {
        chunk.clear();
        while chunk.len() < CHUNK {
            let Some(rec) = reader.next() else { break };
            chunk.push((reader.line(), rec?));
        }
        if chunk.is_empty() {
            break;
        }
        let source_name = reader.source_name();
        let lines: Vec<String> = chunk
            .par_iter_mut()
            .map(|(line, rec)| {
                apply_in_place(spec, &mut rec.logits, rec.label).map_err(|e| CliError::Record {
                    source_name: source_name.to_string(),
                    line: *line,
                    message: e.to_string(),
                })?;
                let mut s = String::new();
                push_record(&mut s, &rec.id, rec.label, &rec.logits);
                Ok(s)
            })
            .collect::<Result<_, CliError>>()?;
        for line in &lines {
            out.write_all(line.as_bytes()).map_err(|e| CliError::io(out_name, e))?;
        }
        records += lines.len();
    }
    out.flush().map_err(|e| CliError::io(out_name, e))?;
    Ok(TransformStats {
        records,
        classes: reader.classes(),
    })
}

/// `sortkd transform`. On failure the partial output file is removed.
pub fn cmd_transform(input: &Path, output: &Path, spec: TransformSpec) -> Result<TransformStats, CliError> {
    let reader = parse_records(input)?;
    let file = File::create(output).map_err(|e| CliError::io(output, e))?;
    let mut out = BufWriter::new(file);
    let result = transform_stream(reader, &mut out, spec, output);
    drop(out);
    if result.is_err() {
        let _ = fs::remove_file(output);
    }
    result
}
