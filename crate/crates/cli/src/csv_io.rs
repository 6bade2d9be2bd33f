//! Results CSV codec, schema v1. The column list is pinned: tools
//! downstream parse by name, so new columns may only be appended, never
//! reordered or renamed. Floats are written in shortest round-trip form,
//! which keeps equal runs byte-identical.

use anyhow::{bail, Context, Result};
use mecsim_core::metrics::DropRecord;
use std::path::Path;

pub const HEADER: [&str; 12] = [
    "seed",
    "K",
    "I_prime",
    "N",
    "strategy",
    "total_j",
    "compute_j",
    "transmit_j",
    "served",
    "offloaders",
    "converged_fraction",
    "wall_ms",
];

pub fn write_records<W: std::io::Write>(out: W, rows: &[DropRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.num_servers.to_string(),
            r.i_prime.to_string(),
            r.num_subcarriers.to_string(),
            r.strategy.clone(),
            r.total_j.to_string(),
            r.compute_j.to_string(),
            r.transmit_j.to_string(),
            r.served.to_string(),
            r.offloaders.to_string(),
            r.converged_fraction.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_to_path(path: &Path, rows: &[DropRecord]) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    write_records(std::io::BufWriter::new(file), rows)
        .with_context(|| format!("while writing {}", path.display()))
}

pub fn read_records_from_path(path: &Path) -> Result<Vec<DropRecord>> {
    let file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_records(std::io::BufReader::new(file))
        .with_context(|| format!("while reading {}", path.display()))
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<DropRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header != csv::StringRecord::from(HEADER.as_slice()) {
        bail!("unexpected results header {header:?}, wanted {HEADER:?}");
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 2; // header is line 1
        if record.len() != HEADER.len() {
            bail!("line {row}: {} fields, wanted {}", record.len(), HEADER.len());
        }
        let field = |i: usize| record.get(i).unwrap();
        let int = |i: usize| -> Result<usize> {
            field(i)
                .parse()
                .with_context(|| format!("line {row}, column {}: bad integer", HEADER[i]))
        };
        let real = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .with_context(|| format!("line {row}, column {}: bad number", HEADER[i]))
        };
        rows.push(DropRecord {
            seed: field(0)
                .parse()
                .with_context(|| format!("line {row}, column seed: bad integer"))?,
            num_servers: int(1)?,
            i_prime: int(2)?,
            num_subcarriers: int(3)?,
            strategy: field(4).to_string(),
            total_j: real(5)?,
            compute_j: real(6)?,
            transmit_j: real(7)?,
            served: int(8)?,
            offloaders: int(9)?,
            converged_fraction: real(10)?,
            wall_ms: real(11)?,
        });
    }
    Ok(rows)
}
