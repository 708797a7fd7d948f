//! CSV file of sign-corrected heterodyne outcomes (`re,im`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use prqs_core::ComplexSample;

use crate::format::sig;
use crate::LabError;

pub const SAMPLES_SCHEMA: &str = "# prqs samples schema=1";
const HEADER: [&str; 2] = ["re", "im"];

/// Reads outcomes from a `re,im` CSV. Lines starting with `#` are comments.
pub fn read_samples(path: &Path) -> Result<Vec<ComplexSample>, LabError> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(false)
        .from_reader(file);
    let data_err = |line: u64, message: String| LabError::Data {
        path: path.to_owned(),
        line,
        message,
    };

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(data_err(0, "file has no header and no samples".into())),
        Some(r) => r.map_err(|e| csv_to_data(path, e))?,
    };
    let line = header.position().map_or(0, |p| p.line());
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(data_err(
            line,
            format!(
                "expected header `re,im`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut samples = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_to_data(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, LabError> {
            let raw = &record[i];
            let v: f64 = raw
                .parse()
                .map_err(|_| data_err(line, format!("`{raw}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(data_err(line, format!("`{raw}` is not finite")))
            }
        };
        samples.push(ComplexSample::new(field(0)?, field(1)?));
    }
    if samples.is_empty() {
        return Err(data_err(line, "no samples after the header".into()));
    }
    Ok(samples)
}

fn csv_to_data(path: &Path, e: csv::Error) -> LabError {
    let line = e.position().map_or(0, |p| p.line());
    LabError::Data {
        path: path.to_owned(),
        line,
        message: e.to_string(),
    }
}

/// Writes outcomes in the format read by [`read_samples`].
pub fn write_samples(path: &Path, samples: &[ComplexSample]) -> Result<(), LabError> {
    let io = |e| LabError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{SAMPLES_SCHEMA}").map_err(io)?;
    writeln!(out, "re,im").map_err(io)?;
    for z in samples {
        writeln!(out, "{},{}", sig(z.re), sig(z.im)).map_err(io)?;
    }
    out.flush().map_err(io)
}
