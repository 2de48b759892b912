//! CSV and JSON readers and writers for series, matrices and profiles.
//!
//! Floats are written in Rust's shortest round-trip form, so equal values
//! always produce equal bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::sim::SeriesSample;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Header `t,x1,...,xp`, one row per time index starting at 0.
pub fn write_series_csv<W: Write>(w: W, sample: &SeriesSample) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let p = sample.p();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=p).map(|j| format!("x{j}")))
        .collect();
    wr.write_record(&header)?;
    for t in 0..sample.x.rows() {
        let rec: Vec<String> = std::iter::once(t.to_string())
            .chain(sample.x.row(t).iter().map(|v| v.to_string()))
            .collect();
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_series(path: &Path, sample: &SeriesSample) -> Result<()> {
    write_series_csv(create(path)?, sample)
}

/// Reads a series written by [`write_series_csv`]. Rows must be in time
/// order; the `t` column is checked, not used for sorting.
pub fn read_series_csv<R: Read>(r: R) -> Result<SeriesSample> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rd.headers()?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(Error::InvalidInput("series CSV needs a header 't,x1,...,xp'".into()));
    }
    let p = header.len() - 1;
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec?;
        let t: usize = rec[0]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad time index {:?}", &rec[0])))?;
        if t != rows {
            return Err(Error::InvalidInput(format!("expected t = {rows}, found {t}")));
        }
        for field in rec.iter().skip(1) {
            data.push(parse_f64(field)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::InvalidInput("series CSV has no rows".into()));
    }
    Ok(SeriesSample::new(DenseMatrix::new(rows, p, data)?))
}

pub fn load_series(path: &Path) -> Result<SeriesSample> {
    read_series_csv(File::open(path)?)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
}

/// Dense matrix, one CSV row per matrix row, no header.
pub fn write_matrix_csv<W: Write>(w: W, m: &DenseMatrix) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.rows() {
        wr.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_matrix_csv(create(path)?, m)
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rd.records() {
        rows.push(rec?.iter().map(parse_f64).collect::<Result<_>>()?);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("matrix CSV is empty".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    read_matrix_csv(File::open(path)?)
}

/// `k,norm` rows for `k = 0, 1, ...`.
pub fn write_profile_csv<W: Write>(w: W, norms: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["k", "norm"])?;
    for (k, v) in norms.iter().enumerate() {
        wr.write_record([k.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// `j,<name>` rows for a vector, `j` starting at 1.
pub fn write_vector_csv<W: Write>(w: W, name: &str, values: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", name])?;
    for (j, v) in values.iter().enumerate() {
        wr.write_record([(j + 1).to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_vector(path: &Path, name: &str, values: &[f64]) -> Result<()> {
    write_vector_csv(create(path)?, name, values)
}

/// Serializes `rows` under a header row, after an optional `# comment` line.
pub fn write_records<W: Write, T: Serialize>(mut w: W, comment: Option<&str>, rows: &[T]) -> Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {c}")?;
    }
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_records<T: Serialize>(path: &Path, comment: Option<&str>, rows: &[T]) -> Result<()> {
    write_records(create(path)?, comment, rows)
}

/// Reads a vector stored as a single CSV column or a single row, with no
/// header.
pub fn read_vector_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let m = read_matrix_csv(r)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(Error::Shape(format!(
            "expected one row or column, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.into_vec())
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    read_vector_csv(File::open(path)?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let x = DenseMatrix::from_fn(4, 3, |i, j| (i as f64 - 1.5) * 0.1 + j as f64 / 3.0);
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &SeriesSample::new(x.clone())).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2,x3\n0,"));
        assert_eq!(read_series_csv(&buf[..]).unwrap().x, x);
    }

    #[test]
    fn matrix_round_trip() {
        let m = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64 / 7.0);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(read_series_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_series_csv("t,x1\n1,2\n".as_bytes()).is_err());
        assert!(read_series_csv("t,x1\n0,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn profile_layout() {
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &[1.0, 0.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,norm\n0,1\n1,0.5\n");
    }
}
