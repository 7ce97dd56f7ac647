use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{MtsDataset, MtsSample};
use crate::error::{Result, StemError};

const FIXED_COLUMNS: [&str; 3] = ["sample_id", "label", "t"];

/// Loads a long-form dataset CSV (`sample_id,label,t,dim_0,...`).
pub fn load_csv(path: impl AsRef<Path>) -> Result<MtsDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| StemError::io(path, e))?;
    read_csv(file)
}

struct PendingSample {
    label: Option<String>,
    rows: Vec<(usize, Vec<f64>)>,
}

pub fn read_csv<R: Read>(reader: R) -> Result<MtsDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let dims = parse_header(&headers)?;

    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, PendingSample> = HashMap::new();

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let row = record.position().map_or(i as u64 + 2, |p| p.line());
        if record.len() != 3 + dims {
            return Err(StemError::Schema(format!(
                "row {row}: expected {} columns, found {}",
                3 + dims,
                record.len()
            )));
        }
        let id = record[0].to_string();
        let label = match &record[1] {
            "" => None,
            l => Some(l.to_string()),
        };
        let t: usize = record[2].trim().parse().map_err(|_| StemError::Parse {
            row,
            message: format!("`t` is not a non-negative integer: `{}`", &record[2]),
        })?;
        let mut values = Vec::with_capacity(dims);
        for d in 0..dims {
            let cell = record[3 + d].trim();
            let v: f64 = cell.parse().map_err(|_| StemError::Parse {
                row,
                message: format!("dim_{d} is not numeric: `{cell}`"),
            })?;
            if !v.is_finite() {
                return Err(StemError::Parse {
                    row,
                    message: format!("dim_{d} is not finite: `{cell}`"),
                });
            }
            values.push(v);
        }

        let entry = pending.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            PendingSample {
                label: label.clone(),
                rows: Vec::new(),
            }
        });
        if entry.label != label {
            return Err(StemError::MalformedDataset {
                sample: id,
                message: format!("row {row}: label changes within the sample"),
            });
        }
        entry.rows.push((t, values));
    }

    if order.is_empty() {
        return Err(StemError::EmptyDataset);
    }

    let samples = order
        .into_iter()
        .map(|id| {
            let p = pending.remove(&id).expect("every ordered id is pending");
            assemble(id, p, dims)
        })
        .collect::<Result<Vec<_>>>()?;
    MtsDataset::new(samples)
}

fn parse_header(headers: &csv::StringRecord) -> Result<usize> {
    if headers.len() < 4 {
        return Err(StemError::Schema(format!(
            "header needs `sample_id,label,t` and at least one `dim_<d>` column, found {} columns",
            headers.len()
        )));
    }
    for (i, want) in FIXED_COLUMNS.iter().enumerate() {
        if headers[i].trim() != *want {
            return Err(StemError::Schema(format!(
                "header column {i} must be `{want}`, found `{}`",
                &headers[i]
            )));
        }
    }
    let dims = headers.len() - 3;
    for d in 0..dims {
        let want = format!("dim_{d}");
        if headers[3 + d].trim() != want {
            return Err(StemError::Schema(format!(
                "header column {} must be `{want}`, found `{}`",
                3 + d,
                &headers[3 + d]
            )));
        }
    }
    Ok(dims)
}

fn assemble(id: String, mut p: PendingSample, dims: usize) -> Result<MtsSample> {
    p.rows.sort_by_key(|(t, _)| *t);
    for (expected, (t, _)) in p.rows.iter().enumerate() {
        if *t != expected {
            let message = if *t < expected {
                format!("duplicate t = {t}")
            } else {
                format!("missing t = {expected}")
            };
            return Err(StemError::MalformedDataset { sample: id, message });
        }
    }
    let mut values = vec![Vec::with_capacity(p.rows.len()); dims];
    for (_, row) in p.rows {
        for (d, v) in row.into_iter().enumerate() {
            values[d].push(v);
        }
    }
    MtsSample::new(id, p.label, values)
}

/// Writes `ds` in the long-form interchange format.
pub fn write_csv(ds: &MtsDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| StemError::io(path, e))?;
    write_csv_to(ds, std::io::BufWriter::new(file))
}

pub fn write_csv_to<W: Write>(ds: &MtsDataset, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..ds.dims()).map(|d| format!("dim_{d}")));
    wtr.write_record(&header)?;

    let mut record = Vec::with_capacity(header.len());
    for s in ds.samples() {
        for t in 0..s.len() {
            record.clear();
            record.push(s.id().to_string());
            record.push(s.label().unwrap_or("").to_string());
            record.push(t.to_string());
            // shortest representation that round-trips (at most 17 significant digits)
            record.extend((0..s.dims()).map(|d| format!("{:?}", s.dim(d)[t])));
            wtr.write_record(&record)?;
        }
    }
    wtr.flush().map_err(|e| StemError::io("<csv output>", e))?;
    Ok(())
}
