//! Diagnostics CSV and binary ensemble snapshots.

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::field::{DiagnosticsRecord, FieldError, VortexBlob, VorticityEnsemble};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("missing column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub const BASE_COLUMNS: [&str; 7] = ["t", "mass", "h_center", "energy", "abs_moment", "diameter", "sup_u1"];

pub fn csv_header(tail_exponents: &[u32]) -> String {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    cols.extend(tail_exponents.iter().map(|n| format!("f_{n}")));
    cols.join(",")
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_row(r: &DiagnosticsRecord) -> String {
    let base = [r.t, r.mass, r.h_center, r.energy, r.abs_moment, r.diameter, r.sup_u1];
    base.iter()
        .chain(&r.tails)
        .map(|&v| format_float(v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Line-buffered CSV sink; every row is flushed so an aborted run leaves a readable file.
pub struct CsvWriter<W: Write> {
    out: W,
    width: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, tail_exponents: &[u32]) -> io::Result<Self> {
        writeln!(out, "{}", csv_header(tail_exponents))?;
        out.flush()?;
        Ok(Self {
            out,
            width: tail_exponents.len(),
        })
    }

    pub fn write_record(&mut self, r: &DiagnosticsRecord) -> io::Result<()> {
        if r.tails.len() != self.width {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("record has {} tails, header has {}", r.tails.len(), self.width),
            ));
        }
        writeln!(self.out, "{}", csv_row(r))?;
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// A parsed diagnostics file.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsTable {
    pub tail_exponents: Vec<u32>,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn read_diagnostics_csv<R: BufRead>(input: R) -> Result<DiagnosticsTable, IoError> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(IoError::MissingColumns(BASE_COLUMNS.iter().map(|c| c.to_string()).collect())),
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let missing: Vec<String> = BASE_COLUMNS
        .iter()
        .filter(|c| !names.contains(c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(IoError::MissingColumns(missing));
    }
    let base_idx: Vec<usize> = BASE_COLUMNS
        .iter()
        .map(|c| names.iter().position(|n| n == c).unwrap())
        .collect();
    let mut tails: Vec<(u32, usize)> = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if let Some(n) = name.strip_prefix("f_").and_then(|s| s.parse::<u32>().ok()) {
            tails.push((n, i));
        }
    }
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(IoError::Malformed {
                line: lineno,
                reason: format!("{} fields, header has {}", fields.len(), names.len()),
            });
        }
        let parse = |i: usize| {
            fields[i].parse::<f64>().map_err(|_| IoError::Malformed {
                line: lineno,
                reason: format!("column {}: cannot parse {:?}", names[i], fields[i]),
            })
        };
        let b = base_idx
            .iter()
            .map(|&i| parse(i))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(DiagnosticsRecord {
            t: b[0],
            mass: b[1],
            h_center: b[2],
            energy: b[3],
            abs_moment: b[4],
            diameter: b[5],
            sup_u1: b[6],
            tails: tails.iter().map(|&(_, i)| parse(i)).collect::<Result<_, _>>()?,
        });
    }
    Ok(DiagnosticsTable {
        tail_exponents: tails.iter().map(|&(n, _)| n).collect(),
        records,
    })
}

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"CYLVORT1";

/// Binary layout: magic, blob count (u64 LE), a nonneg flag byte, then
/// `x, y, circulation, core_radius` per blob as f64 LE.
pub fn write_snapshot<W: Write>(mut out: W, ens: &VorticityEnsemble) -> io::Result<()> {
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(ens.len() as u64).to_le_bytes())?;
    out.write_all(&[ens.nonneg() as u8])?;
    for b in ens.blobs() {
        for v in [b.pos.x(), b.pos.y(), b.circulation, b.core_radius] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<VorticityEnsemble, IoError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(IoError::BadMagic);
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let count = u64::from_le_bytes(word) as usize;
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag)?;
    let mut blobs = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let mut v = [0.0; 4];
        for slot in &mut v {
            input.read_exact(&mut word)?;
            *slot = f64::from_le_bytes(word);
        }
        blobs.push(VortexBlob::new(v[0], v[1], v[2], v[3])?);
    }
    Ok(VorticityEnsemble::new(blobs, flag[0] != 0)?)
}
