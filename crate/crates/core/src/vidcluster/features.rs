use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SALN";
const VERSION: u32 = 1;

/// One item's interval features, one row per time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStream {
    pub item_id: String,
    pub features: DMatrix<f64>,
    pub interval_duration_s: f64,
}

impl FeatureStream {
    pub fn new(item_id: impl Into<String>, features: DMatrix<f64>, interval_duration_s: f64) -> Result<Self> {
        let item_id = item_id.into();
        if features.nrows() == 0 {
            return Err(Error::EmptyInput(format!("item `{item_id}` has no intervals")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconsistent(format!("item `{item_id}` has non-finite features")));
        }
        if !(interval_duration_s > 0.0 && interval_duration_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interval duration must be positive, got {interval_duration_s}"
            )));
        }
        Ok(FeatureStream {
            item_id,
            features,
            interval_duration_s,
        })
    }

    pub fn num_intervals(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Time extent `[start, end)` of interval `t`, in seconds.
    pub fn interval_span(&self, t: usize) -> (f64, f64) {
        let d = self.interval_duration_s;
        (t as f64 * d, (t + 1) as f64 * d)
    }
}

/// Checks that every stream has the same feature dimension.
pub fn check_dimensions(streams: &[FeatureStream]) -> Result<usize> {
    let first = streams
        .first()
        .ok_or_else(|| Error::EmptyInput("no feature streams".into()))?;
    let d = first.dim();
    if let Some(other) = streams.iter().find(|s| s.dim() != d) {
        return Err(Error::Inconsistent(format!(
            "item `{}` has {} feature columns, `{}` has {d}",
            other.item_id,
            other.dim(),
            first.item_id
        )));
    }
    Ok(d)
}

/// Reads a headerless CSV of numbers, one row per interval.
pub fn read_feature_csv(path: &Path, item_id: &str, interval_duration_s: f64) -> Result<FeatureStream> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::schema(path, e))?;
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::schema(path, e))?;
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(Error::schema(
                path,
                format!("line {}: expected {} values, found {}", r + 1, width.unwrap_or(0), record.len()),
            ));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::schema(path, format!("line {}: bad number `{field}`", r + 1)))?;
            if !v.is_finite() {
                return Err(Error::schema(path, format!("line {}: non-finite value", r + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::schema(path, "no feature rows"));
    }
    let features = DMatrix::from_row_slice(rows, width.unwrap_or(0), &values);
    FeatureStream::new(item_id, features, interval_duration_s).map_err(|e| Error::schema(path, e))
}

pub fn write_feature_csv(path: &Path, stream: &FeatureStream) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::schema(path, e))?;
    for row in stream.features.row_iter() {
        writer
            .write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(|e| Error::schema(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads the binary format: `SALN`, version `u32`, `T u64`, `d u64`, then
/// `T * d` row-major `f64`, all little-endian.
pub fn read_feature_binary(path: &Path, item_id: &str, interval_duration_s: f64) -> Result<FeatureStream> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = [0u8; 24];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::schema(path, "truncated header"))?;
    if &header[..4] != MAGIC {
        return Err(Error::schema(path, "bad magic, expected `SALN`"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::schema(path, format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(header[16..24].try_into().expect("8 bytes")) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::schema(path, "header dimensions overflow"))?;
    let mut body = Vec::new();
    reader.read_to_end(&mut body).map_err(|e| Error::io(path, e))?;
    if body.len() != count * 8 {
        return Err(Error::schema(
            path,
            format!("expected {} payload bytes for {rows}x{cols}, found {}", count * 8, body.len()),
        ));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let features = DMatrix::from_row_slice(rows, cols, &values);
    FeatureStream::new(item_id, features, interval_duration_s).map_err(|e| Error::schema(path, e))
}

pub fn write_feature_binary(path: &Path, stream: &FeatureStream) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(MAGIC)?;
    put(&VERSION.to_le_bytes())?;
    put(&(stream.num_intervals() as u64).to_le_bytes())?;
    put(&(stream.dim() as u64).to_le_bytes())?;
    for row in stream.features.row_iter() {
        for v in row.iter() {
            put(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads `<item_id>.saln` or `<item_id>.csv` from `dir` for every id, in order.
pub fn read_feature_dir(dir: &Path, item_ids: &[String], interval_duration_s: f64) -> Result<Vec<FeatureStream>> {
    item_ids
        .iter()
        .map(|id| {
            let binary = dir.join(format!("{id}.saln"));
            let text = dir.join(format!("{id}.csv"));
            if binary.is_file() {
                read_feature_binary(&binary, id, interval_duration_s)
            } else if text.is_file() {
                read_feature_csv(&text, id, interval_duration_s)
            } else {
                Err(Error::UnknownItem(format!("{id} (no features in {})", dir.display())))
            }
        })
        .collect()
}

/// Item ids of every feature file in `dir`, sorted.
pub fn list_feature_dir(dir: &Path) -> Result<Vec<String>> {
    let mut ids: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            let ext = path.extension()?.to_str()?;
            if ext == "saln" || ext == "csv" {
                Some(path.file_stem()?.to_str()?.to_string())
            } else {
                None
            }
        })
        .collect();
    ids.sort();
    ids.dedup();
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> FeatureStream {
        let x = DMatrix::from_fn(4, 3, |i, j| i as f64 * 0.5 - j as f64 / 3.0);
        FeatureStream::new("v1", x, 1.5).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("saln-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v1.saln");
        let s = stream();
        write_feature_binary(&path, &s).unwrap();
        let back = read_feature_binary(&path, "v1", 1.5).unwrap();
        assert_eq!(back, s);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"SALN");
        assert_eq!(bytes.len(), 24 + 12 * 8);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("featcsv-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v1.csv");
        let s = stream();
        write_feature_csv(&path, &s).unwrap();
        assert_eq!(read_feature_csv(&path, "v1", 1.5).unwrap(), s);
        assert_eq!(list_feature_dir(&dir).unwrap(), vec!["v1".to_string()]);
        assert_eq!(read_feature_dir(&dir, &["v1".into()], 1.5).unwrap()[0], s);
        fs::write(&path, "1,2\n3\n").unwrap();
        assert!(matches!(read_feature_csv(&path, "v1", 1.0), Err(Error::Schema { .. })));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_bad_streams() {
        assert!(FeatureStream::new("a", DMatrix::zeros(0, 2), 1.0).is_err());
        assert!(FeatureStream::new("a", DMatrix::from_element(1, 1, f64::NAN), 1.0).is_err());
        assert!(FeatureStream::new("a", DMatrix::zeros(1, 1), 0.0).is_err());
    }
}
